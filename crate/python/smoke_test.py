"""Smoke test for the corrbi_py extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/corrbi_py-*.whl
Then: python3 python/smoke_test.py
"""

import pathlib

import corrbi_py as cb

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def main():
    two_loops = cb.Graph(1, [(0, 0), (0, 0)], [0])
    assert [two_loops.core_stage(n).dim for n in range(4)] == [1, 4, 16, 64]
    assert two_loops.core_embedding(1) == [[2]]

    toeplitz = two_loops.with_relative([])
    stage = toeplitz.core_stage(2)
    assert stage.blocks == [1, 2, 4] and stage.oracle_dim == 21

    cycle = cb.Graph.from_json((FIXTURES / "two_cycle_graph.json").read_text())
    t = cycle.trichotomy(3)
    assert t["coincide"] and t["bimodule"]
    assert not two_loops.trichotomy(2)["bimodule"]
    assert cycle.bratteli(2, "dot").startswith("digraph")
    assert cycle.bratteli(2)["stable_from"] == 0

    e = two_loops.correspondence()
    assert e.multiplicity == [[2]] and not e.is_bimodule()
    assert e.tensor(e).multiplicity == [[4]]
    assert cycle.correspondence().is_bimodule()

    c2, m3 = cb.Algebra([1, 1]), cb.Algebra([3])
    f = cb.Correspondence.canonical(c2, m3, [[2], [1]])
    assert f.dim == 9 and f.target == m3

    assert cb.rank([[1, 1j], [-1j, 1]]) == 1
    assert cb.rank([[1, 0], [0, 1]]) == 2

    ok, reports = cb.validate((FIXTURES / "o2.json").read_text())
    assert ok and all(r["status"] == "pass" for r in reports)
    ok, reports = cb.validate((FIXTURES / "not_psd.json").read_text())
    assert not ok
    ok, reports = cb.reflect((FIXTURES / "sample_arrows.json").read_text(), 3)
    assert ok and len(reports) == 50
    ok, reports = cb.coherence(5, seed=11)
    assert ok and len(reports) == 10

    try:
        cb.validate((FIXTURES / "dangling.json").read_text())
    except ValueError:
        pass
    else:
        raise AssertionError("dangling reference accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
