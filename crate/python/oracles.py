"""Independent exact computations whose outputs are frozen in crates/core/tests/oracles.rs.

Everything here is built from scratch with sympy rationals: Fock spaces of
graphs as path bases, creation operators, monomial spans and their
quotients by the covariance ideal. Run: python3 python/oracles.py
"""

import json

import sympy as sp


def graph(n, edges, relative):
    return {"n": n, "edges": edges, "J": set(relative)}


def compose_ok(g, e, f):
    # e ⊗ f survives when f lands where e starts
    return g["edges"][f][1] == g["edges"][e][0]


def paths(g, k):
    if k == 0:
        return [("v", v) for v in range(g["n"])]
    out = [(e,) for e in range(len(g["edges"]))]
    for _ in range(k - 1):
        out = [p + (f,) for p in out for f in range(len(g["edges"])) if compose_ok(g, p[-1], f)]
    return out


def source(g, p):
    return p[1] if p[0] == "v" else g["edges"][p[-1]][0]


def rng(g, p):
    return p[1] if p[0] == "v" else g["edges"][p[0]][1]


def fock_basis(g, level):
    return [p for k in range(level + 1) for p in paths(g, k)]


def prepend(g, e, p):
    """e ⊗ p, or None."""
    if p[0] == "v":
        return (e,) if g["edges"][e][0] == p[1] else None
    return (e,) + p if compose_ok(g, e, p[0]) else None


def creation(g, basis, e):
    idx = {p: i for i, p in enumerate(basis)}
    m = sp.zeros(len(basis), len(basis))
    for j, p in enumerate(basis):
        q = prepend(g, e, p)
        if q is not None and q in idx:
            m[idx[q], j] = 1
    return m


def path_op(g, basis, ts, p):
    if p[0] == "v":
        return sp.diag(*[1 if rng(g, q) == p[1] else 0 for q in basis])
    m = sp.eye(len(basis))
    for e in p:
        m = m * ts[e]
    return m


def rank_of(ops):
    if not ops:
        return 0
    return sp.Matrix([list(o) for o in ops]).rank()


def stage_dim(g, degree, depth, level):
    """dim of span{t_μ t_ν^*: |μ| = |ν| + degree, |ν| ≤ depth} modulo the
    covariance ideal for J, computed on the Fock truncation at `level`
    restricted to the part below `level` where the relations hold."""
    basis = fock_basis(g, level)
    ts = [creation(g, basis, e) for e in range(len(g["edges"]))]
    keep = [i for i, p in enumerate(basis) if (0 if p[0] == "v" else len(p)) < level]

    def cut(m):
        return m.extract(list(range(len(basis))), keep)

    mons = []
    gens = []
    for k in range(depth + 1):
        for nu in paths(g, k):
            for mu in paths(g, k + degree):
                if source(g, mu) != source(g, nu):
                    continue
                a, b = path_op(g, basis, ts, mu), path_op(g, basis, ts, nu)
                mons.append(cut(a * b.T))
        # covariance defects p_v − Σ_{r(e)=v} t_e t_e^*, moved by monomials
        for v in g["J"]:
            q = path_op(g, basis, ts, ("v", v))
            for e, (s, r) in enumerate(g["edges"]):
                if r == v:
                    q = q - ts[e] * ts[e].T
            for nu in paths(g, k):
                for mu in paths(g, k + degree):
                    if source(g, mu) == v and source(g, nu) == v:
                        a, b = path_op(g, basis, ts, mu), path_op(g, basis, ts, nu)
                        gens.append(cut(a * q * b.T))
    return rank_of(mons + gens) - rank_of(gens)


def adjacency(g):
    a = [[0] * g["n"] for _ in range(g["n"])]
    for s, r in g["edges"]:
        a[r][s] += 1
    return a


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def main():
    i = sp.I
    out = {}
    out["rank_hermitian"] = sp.Matrix([[1, i], [-i, 1]]).rank()
    out["kernel_row"] = [str(x) for x in sp.Matrix([[1, 1]]).nullspace()[0]]
    out["gram_rank"] = sp.Matrix([[1, 1], [1, 1]]).rank()
    # ℂ² → M₃, e₁ ↦ diag(1,1,0), e₂ ↦ diag(0,0,1): multiplicity = rank / block size
    out["embedding_multiplicity"] = [[sp.diag(1, 1, 0).rank()], [sp.diag(0, 0, 1).rank()]]

    o2 = graph(1, [(0, 0), (0, 0)], [0])
    toeplitz = graph(1, [(0, 0), (0, 0)], [])
    two_cycle = graph(2, [(0, 1), (1, 0)], [0, 1])
    edge = graph(2, [(0, 1)], [])
    out["fock_sizes"] = {"two_loops_level_2": len(fock_basis(o2, 2)), "edge_level_2": len(fock_basis(edge, 2))}
    out["core_dims"] = {
        "two_loops_relative": [stage_dim(o2, 0, n, n + 2) for n in range(4)],
        "two_loops_toeplitz": [stage_dim(toeplitz, 0, n, n + 2) for n in range(4)],
        "two_cycle": [stage_dim(two_cycle, 0, n, n + 2) for n in range(4)],
    }
    out["degree_one_dims"] = {
        "two_loops_relative": [stage_dim(o2, 1, n - 1, n + 2) for n in range(1, 4)],
        "two_loops_toeplitz": [stage_dim(toeplitz, 1, n - 1, n + 2) for n in range(1, 4)],
        "two_cycle": [stage_dim(two_cycle, 1, n - 1, n + 2) for n in range(1, 4)],
    }
    mixed = graph(3, [(0, 1), (1, 2), (2, 0), (0, 0), (1, 0)], [])
    a = adjacency(mixed)
    out["mixed_adjacency"] = a
    out["mixed_adjacency_squared"] = matmul(a, a)
    out["mixed_paths_2"] = len(paths(mixed, 2))
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
