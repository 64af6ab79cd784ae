import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from qtrunc import cli
from qtrunc.config import ExperimentConfig, ValidationError, cache_key, load_config
from qtrunc.errors import PreconditionError, ResourceError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


SWEEP = """
group = "Z"
[lipnorm]
family = "weighted_l1"
[levels]
start = 2
stop = 8
"""


class TestConfig:
    def test_shipped_configs_validate(self):
        for p in sorted(CONFIGS.glob("*.toml")):
            load_config(p)

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            load_config(write(tmp_path, 'group = "Z"\ncolour = 1\n'))
        with pytest.raises(ValidationError):
            load_config(write(tmp_path, 'group = "Z"\n[lipnorm]\nfamily = "weighted_l1"\nwidth = 3\n'))

    def test_bad_group_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            load_config(write(tmp_path, 'group = "Q17"\n'))

    def test_seed_override_and_range(self, tmp_path):
        cfg = load_config(write(tmp_path, SWEEP), seed=11)
        assert cfg.seed == 11
        with pytest.raises(ValidationError):
            ExperimentConfig(group="Z", seed=2**64)

    def test_randomized_commands_need_seed(self, tmp_path):
        cfg = load_config(write(tmp_path, SWEEP))
        cfg.require("fejer-sweep")
        with pytest.raises(PreconditionError, match="seed"):
            cfg.require("distq")

    def test_cache_key(self, tmp_path):
        a = load_config(write(tmp_path, SWEEP), seed=1)
        b = load_config(write(tmp_path, SWEEP), seed=2)
        assert cache_key("fejer-sweep", a) != cache_key("fejer-sweep", b)
        assert cache_key("fejer-sweep", a) != cache_key("lipnorm", a)
        assert cache_key("fejer-sweep", a) == cache_key("fejer-sweep", load_config(write(tmp_path, SWEEP), seed=1))

    def test_level_range_inclusive(self):
        cfg = ExperimentConfig(group="Z", levels={"start": 2, "stop": 4})
        assert cfg.levels.values() == [2, 3, 4]
        assert ExperimentConfig(group="Z", levels={"start": 3, "stop": 1}).levels.values() == []


class TestFormatting:
    def test_fmt(self):
        assert cli.fmt(Fraction(1, 3)) == "1/3"
        assert cli.fmt(0.1) == "0.1"
        assert cli.fmt(True) == "true"
        assert cli.fmt((1, -2)) == "1 -2"
        assert cli.fmt(None) == ""

    def test_fmt_numpy_scalars(self):
        assert cli.fmt(np.float64(0.25)) == "0.25"
        assert cli.fmt(np.bool_(False)) == "false"
        assert cli.fmt(np.int64(7)) == "7"


class TestCommands:
    def test_fejer_sweep(self, tmp_path):
        assert cli.main(["fejer-sweep", "--config", str(write(tmp_path, SWEEP)), "--out", str(tmp_path / "o")]) == 0
        lines = (tmp_path / "o" / "fejer-sweep.csv").read_text().splitlines()
        assert lines[0] == "n,epsilon,epsilon_float,lower,gap,level,method,scope"
        assert len(lines) == 8
        for n, line in zip(range(2, 9), lines[1:]):
            cols = line.split(",")
            assert cols[0] == str(n) and cols[1] == f"1/{n}" and cols[4] == "0"

    def test_empty_range(self, tmp_path):
        cfg = write(tmp_path, SWEEP.replace("stop = 8", "stop = 1"))
        assert cli.main(["fejer-sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "fejer-sweep.csv").read_text() == "n,epsilon,epsilon_float,lower,gap,level,method,scope\n"

    def test_distq_two_element_group(self, tmp_path):
        assert cli.main(["distq", "--config", str(CONFIGS / "distq_z2.toml"), "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "distq.csv").read_text().splitlines()
        assert lines[1] == "0,fejer[1],1,1,0,0.0,true"

    def test_distq_needs_seed(self, tmp_path):
        cfg = write(tmp_path, 'group = "Z/2"\n[lipnorm]\nfamily = "weighted_l1"\n')
        assert cli.main(["distq", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_oracle_metric_recovery(self, tmp_path):
        assert cli.main(["oracle", "--config", str(CONFIGS / "oracle_metric_s3.toml"), "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "oracle.csv").read_text().splitlines()[1:]
        assert len(rows) == 36 and all(r.endswith(",true") for r in rows)

    def test_fusion(self, tmp_path):
        assert cli.main(["fusion", "--config", str(CONFIGS / "fusion_s3.toml"), "--out", str(tmp_path)]) == 0
        side = json.loads((tmp_path / "fusion.json").read_text())
        assert side["extra"]["stabilizes_at"] == 2
        assert set(side["extra"]["filtration"]["2"]) == {"triv", "sgn", "std"}

    def test_lipnorm_heisenberg(self, tmp_path):
        assert cli.main(["lipnorm", "--config", str(CONFIGS / "lipnorm_heisenberg.toml"), "--out", str(tmp_path)]) == 0
        for line in (tmp_path / "lipnorm.csv").read_text().splitlines()[1:]:
            cols = line.split(",")
            assert float(cols[2]) == pytest.approx(int(cols[1]), abs=1e-6)

    def test_states(self, tmp_path):
        assert cli.main(["states", "--config", str(CONFIGS / "states_z.toml"), "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "states.csv").read_text().splitlines()[1:]
        assert [r.split(",")[0] for r in rows] == ["1", "2", "3", "4", "5", "6"]


class TestCacheAndExitCodes:
    def test_cache_hit_skips_compute(self, tmp_path, monkeypatch):
        cfg = write(tmp_path, SWEEP)
        out = tmp_path / "o"
        assert cli.main(["fejer-sweep", "--config", str(cfg), "--out", str(out)]) == 0
        first = (out / "fejer-sweep.csv").read_bytes()

        def boom(*a, **k):
            raise AssertionError("recomputed on a cache hit")

        monkeypatch.setitem(cli.COMMAND_FNS, "fejer-sweep", boom)
        assert cli.main(["fejer-sweep", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "fejer-sweep.csv").read_bytes() == first
        assert json.loads((out / "fejer-sweep.json").read_text())["timing"]["cache"] == "hit"

    def test_no_cache_recomputes(self, tmp_path, monkeypatch):
        cfg = write(tmp_path, SWEEP)
        cli.main(["fejer-sweep", "--config", str(cfg), "--out", str(tmp_path)])
        calls = []
        real = cli.COMMAND_FNS["fejer-sweep"]
        monkeypatch.setitem(cli.COMMAND_FNS, "fejer-sweep", lambda c, w: calls.append(1) or real(c, w))
        cli.main(["fejer-sweep", "--config", str(cfg), "--out", str(tmp_path), "--no-cache"])
        assert calls == [1]

    def test_resource_failure_exit_3(self, tmp_path, monkeypatch):
        def fail(*a, **k):
            raise ResourceError("ball too large")

        monkeypatch.setitem(cli.COMMAND_FNS, "fejer-sweep", fail)
        assert cli.main(["fejer-sweep", "--config", str(write(tmp_path, SWEEP)), "--out", str(tmp_path)]) == 3

    def test_invalid_inputs_exit_2(self, tmp_path):
        assert cli.main(["fejer-sweep", "--config", str(tmp_path / "missing.toml")]) == 2
        bad = write(tmp_path, 'group = "Z"\nextra = 1\n')
        assert cli.main(["fejer-sweep", "--config", str(bad), "--out", str(tmp_path)]) == 2
        assert cli.main(["fejer-sweep", "--config", str(write(tmp_path, SWEEP)), "--seed", "-1"]) == 2
        assert cli.main(["oracle", "--config", str(write(tmp_path, SWEEP)), "--out", str(tmp_path)]) == 2

    def test_workers_preserve_order(self, tmp_path):
        cfg = write(tmp_path, SWEEP)
        cli.main(["fejer-sweep", "--config", str(cfg), "--out", str(tmp_path / "a"), "--no-cache"])
        cli.main(["fejer-sweep", "--config", str(cfg), "--out", str(tmp_path / "b"), "--no-cache", "--workers", "4"])
        assert (tmp_path / "a" / "fejer-sweep.csv").read_bytes() == (tmp_path / "b" / "fejer-sweep.csv").read_bytes()


class TestReport:
    def _sidecar(self, tmp_path):
        cli.main(["fejer-sweep", "--config", str(write(tmp_path, SWEEP)), "--out", str(tmp_path)])
        return tmp_path / "fejer-sweep.json"

    def test_decreasing(self, tmp_path, capsys):
        side = self._sidecar(tmp_path)
        assert cli.main(["report", str(side), "--out", str(tmp_path / "r")]) == 0
        assert "decreasing: true" in capsys.readouterr().out
        rep = json.loads((tmp_path / "r" / "report.json").read_text())
        assert rep["tables"][0]["rows"][0][:2] == [2, "1/2"]

    def test_mixed_versions(self, tmp_path):
        side = self._sidecar(tmp_path)
        other = json.loads(side.read_text())
        other["version"] = "0.0.0"
        p = tmp_path / "old.json"
        p.write_text(json.dumps(other))
        assert cli.main(["report", str(side), str(p), "--out", str(tmp_path / "r")]) == 2

    def test_empty(self, tmp_path):
        assert cli.main(["report", "--out", str(tmp_path)]) == 0
        assert cli.report([])["tables"] == []
