"""Regenerate src/qtrunc/data/finite_groups.json.

Irreducible representations are given by the images of two generators and
extended along a BFS spanning tree of the Cayley graph; every extension is
checked to be a unitary homomorphism before it is written out.

    PYTHONPATH=src python3 scripts/build_group_data.py
"""

import itertools
import json
from pathlib import Path

from qtrunc.cyclotomic import Cyc

OUT = Path(__file__).resolve().parents[1] / "src" / "qtrunc" / "data" / "finite_groups.json"
VERSION = 1


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum((a[i][k] * b[k][j] for k in range(m)), Cyc.rational(a[0][0].order, 0)) for j in range(p)] for i in range(n)]


def mat(order, rows):
    return [[x if isinstance(x, Cyc) else Cyc.rational(order, x) for x in row] for row in rows]


def adjoint(a):
    return [[a[j][i].conjugate() for j in range(len(a))] for i in range(len(a[0]))]


def identity(order, d):
    return mat(order, [[1 if i == j else 0 for j in range(d)] for i in range(d)])


def extend(table, gens, images, order):
    """Images of all elements from generator images; identity is index 0."""
    d = len(images[0])
    rho = {0: identity(order, d)}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for s, img in zip(gens, images):
                y = table[x][s]
                if y not in rho:
                    rho[y] = matmul(rho[x], img)
                    nxt.append(y)
        frontier = nxt
    n = len(table)
    assert len(rho) == n, "generators do not generate"
    for x in range(n):
        assert matmul(rho[x], adjoint(rho[x])) == identity(order, d), "not unitary"
        for y in range(n):
            assert matmul(rho[x], rho[y]) == rho[table[x][y]], "not a homomorphism"
    return [rho[x] for x in range(n)]


def trace(m):
    return sum((m[i][i] for i in range(len(m))), Cyc.rational(m[0][0].order, 0))


def s3():
    perms = sorted(itertools.permutations(range(3)))
    names = {(0, 1, 2): "e", (0, 2, 1): "(23)", (1, 0, 2): "(12)", (1, 2, 0): "(123)", (2, 0, 1): "(132)", (2, 1, 0): "(13)"}
    idx = {p: i for i, p in enumerate(perms)}
    # (p*q)(i) = p(q(i))
    table = [[idx[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms]
    r, s = idx[(1, 2, 0)], idx[(1, 0, 2)]
    w = Cyc.zeta(3)
    irreps = {
        "triv": ([[1]], [[1]]),
        "sgn": ([[1]], [[-1]]),
        "std": ([[w, 0], [0, w * w]], [[0, 1], [1, 0]]),
    }
    return {
        "elements": [names[p] for p in perms],
        "table": table,
        "generators": ["(12)", "(23)"],
        "cyclotomic_order": 3,
        "trivial": "triv",
    }, (r, s), irreps


def q8():
    # quaternion units as (sign, axis) with axis in 1, i, j, k
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    basis = {"1": (1, 0), "-1": (-1, 0), "i": (1, 1), "-i": (-1, 1), "j": (1, 2), "-j": (-1, 2), "k": (1, 3), "-k": (-1, 3)}
    # unit products: axis a * axis b = sign, axis
    prod = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    lookup = {v: k for k, v in basis.items()}
    table = []
    for x in names:
        row = []
        for y in names:
            sx, ax = basis[x]
            sy, ay = basis[y]
            sp, ap = prod[(ax, ay)]
            row.append(names.index(lookup[(sx * sy * sp, ap)]))
        table.append(row)
    i, j = names.index("i"), names.index("j")
    z = Cyc.zeta(4)
    irreps = {
        "triv": ([[1]], [[1]]),
        "chi_i": ([[1]], [[-1]]),
        "chi_j": ([[-1]], [[1]]),
        "chi_k": ([[-1]], [[-1]]),
        "H": ([[z, 0], [0, -z]], [[0, -1], [1, 0]]),
    }
    return {
        "elements": names,
        "table": table,
        "generators": ["i", "j"],
        "cyclotomic_order": 4,
        "trivial": "triv",
    }, (i, j), irreps


def d4():
    n = 4
    elems = [(k, f) for k in range(n) for f in (0, 1)]

    def mul(x, y):
        return ((x[0] + (y[0] if x[1] == 0 else -y[0])) % n, x[1] ^ y[1])

    table = [[elems.index(mul(x, y)) for y in elems] for x in elems]
    r, s = elems.index((1, 0)), elems.index((0, 1))
    irreps = {
        "triv": ([[1]], [[1]]),
        "A2": ([[1]], [[-1]]),
        "B1": ([[-1]], [[1]]),
        "B2": ([[-1]], [[-1]]),
        "E": ([[0, -1], [1, 0]], [[1, 0], [0, -1]]),
    }
    return {
        "elements": [list(e) for e in elems],
        "table": table,
        "generators": [[1, 0], [0, 1]],
        "cyclotomic_order": 4,
        "trivial": "triv",
    }, (r, s), irreps


def build():
    groups = {}
    for name, maker in (("S3", s3), ("Q8", q8), ("D4", d4)):
        info, gens, irreps = maker()
        order = info["cyclotomic_order"]
        info["irreps"] = {}
        info["characters"] = {}
        for label, (a, b) in irreps.items():
            mats = extend(info["table"], gens, [mat(order, a), mat(order, b)], order)
            info["irreps"][label] = [[[c.to_json() for c in row] for row in m] for m in mats]
            info["characters"][label] = [trace(m).to_json() for m in mats]
        assert sum(len(irreps[l][0]) ** 2 for l in irreps) == len(info["table"])
        groups[name] = info
    return {"version": VERSION, "groups": groups}


if __name__ == "__main__":
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(build(), separators=(",", ":")) + "\n")
    print(f"wrote {OUT}")
