import random
from fractions import Fraction as F

import pytest

from contractlab.core import Contract, ZERO
from contractlab.equilibria import is_cce, is_ce, is_pne
from contractlab.solvers import (
    LinearProgram,
    best_cce,
    best_ce,
    best_pne_binary,
    enumerate_pne,
    grid_search,
    solve_lp,
    worst_cce,
)
from contractlab.fixtures import (
    golden_ratio_instance,
    random_contract,
    random_instance,
    separation_example,
    subadditive_gap_instance,
    supermodular_cce_gap_instance,
)


def lp(objective, sense, rows):
    return LinearProgram(objective=tuple(F(c) for c in objective), sense=sense,
                         rows=tuple((tuple(F(c) for c in coeffs), rel, F(rhs))
                                    for coeffs, rel, rhs in rows))


def test_solve_lp_basic():
    r = solve_lp(lp([1], "max", [([1], "<=", 3)]))
    assert r.status == "optimal" and r.value == 3 and r.x == (F(3),)

    r = solve_lp(lp([1, 1], "max", [([1, 1], "<=", 1)]))
    assert r.status == "optimal" and r.value == 1

    r = solve_lp(lp([1], "max", []))
    assert r.status == "unbounded"

    r = solve_lp(lp([1], "min", [([1], ">=", 2)]))
    assert r.status == "optimal" and r.value == 2

    r = solve_lp(lp([1], "max", [([1], ">=", 2), ([1], "<=", 1)]))
    assert r.status == "infeasible"


def test_solve_lp_equalities_and_degeneracy():
    r = solve_lp(lp([2, 3], "max", [([1, 1], "=", 4), ([1, 0], "<=", 2),
                                    ([0, 1], "<=", 3)]))
    assert r.status == "optimal" and r.value == 11 and r.x == (F(1), F(3))
    # redundant equality row must not break phase one
    r = solve_lp(lp([1, 1], "max", [([1, 1], "=", 2), ([2, 2], "=", 4),
                                    ([1, 0], "<=", 1)]))
    assert r.status == "optimal" and r.value == 2


def test_solve_lp_solution_feasible():
    rng = random.Random(21)
    for _ in range(20):
        n = rng.randint(1, 4)
        rows = []
        for _ in range(rng.randint(1, 4)):
            coeffs = [F(rng.randint(-3, 3)) for _ in range(n)]
            rel = rng.choice(["<=", "=", ">="])
            rows.append((coeffs, rel, F(rng.randint(0, 6))))
        rows.append(([F(1)] * n, "<=", F(10)))  # keep it bounded
        prog = lp([rng.randint(-3, 3) for _ in range(n)], "max", rows)
        r = solve_lp(prog)
        if r.status != "optimal":
            continue
        assert sum(c * x for c, x in zip(prog.objective, r.x)) == r.value
        for coeffs, rel, rhs in prog.rows:
            lhs = sum(c * x for c, x in zip(coeffs, r.x))
            assert (lhs <= rhs if rel == "<=" else
                    lhs >= rhs if rel == ">=" else lhs == rhs)


def test_best_cce_separation():
    inst = separation_example()
    D, utility = best_cce(inst, Contract.of(["1/36", "1/36"]))
    assert is_cce(inst, D, Contract.of(["1/36", "1/36"]))
    assert utility >= F(918, 5)  # at least the mixed equilibrium


def test_worst_cce_separation():
    inst = separation_example()
    a = Contract.of(["7/120", F(0)])
    D, utility = worst_cce(inst, a)
    assert utility == F(339, 2)
    assert is_cce(inst, D, a)
    assert D.expected_reward(inst) == 180


def test_best_cce_supermodular_gap():
    inst = supermodular_cce_gap_instance()
    a = Contract.of(["0.925", "1/18"])
    _, cce_utility = best_cce(inst, a)
    assert cce_utility >= F(7, 45)
    _, ce_utility = best_ce(inst, a)
    assert ce_utility <= cce_utility
    # share total 1 leaves the principal nothing
    _, zero = best_cce(inst, Contract.of(["1/2", "1/2"]))
    assert zero == 0


def test_best_ce_verifies():
    rng = random.Random(22)
    for trial in range(8):
        inst = random_instance("table", 900 + trial, 2, 2)
        a = random_contract(inst.n, rng)
        D, _ = best_ce(inst, a)
        assert is_ce(inst, D, a)


def test_enumerate_pne():
    inst = separation_example()
    pnes = enumerate_pne(inst, Contract.of(["1/20", "1/20"]))
    assert (0b11, F(180)) in pnes
    assert pnes[0][1] == 180
    only = enumerate_pne(inst, Contract.zero(2))
    assert only == [(0, ZERO)]


def test_best_pne_binary():
    inst = separation_example()
    S, a, utility = best_pne_binary(inst)
    assert (S, utility) == (0b11, F(180))
    assert a.alpha == (F(1, 20), F(1, 20))
    assert is_pne(inst, S, a)
    # the inducing contract keeps S among its equilibria
    assert any(p == S for p, _ in enumerate_pne(inst, a))

    _, _, g = best_pne_binary(golden_ratio_instance(20))
    assert abs(g) <= F(1, 10 ** 18)

    _, _, g1 = best_pne_binary(subadditive_gap_instance(1))
    assert g1 <= F(13, 2)

    with pytest.raises(ValueError):
        best_pne_binary(supermodular_cce_gap_instance())


def test_grid_search_separation():
    inst = separation_example()
    report = grid_search(inst, 20, "best_pne")
    assert report.best_value == 180
    assert report.best_contract.alpha == (F(1, 20), F(1, 20))
    tiny = grid_search(inst, 1, "best_pne")
    assert tiny.best_value == 0


def test_grid_search_explicit_cells():
    inst = supermodular_cce_gap_instance()
    cells = [Contract.of(["0.925", "1/18"])]
    report = grid_search(inst, 2, "best_cce", explicit_cells=cells)
    assert report.best_value >= F(7, 45)
    pne = grid_search(inst, 2, "best_pne", explicit_cells=cells)
    assert pne.best_value <= 0 or pne.best_value < report.best_value


def test_chain_of_benchmarks():
    rng = random.Random(23)
    for trial in range(6):
        inst = random_instance("coverage", 950 + trial, 2, 2)
        a = random_contract(inst.n, rng)
        _, v_cce = best_cce(inst, a)
        _, v_ce = best_ce(inst, a)
        pnes = enumerate_pne(inst, a)
        v_pne = pnes[0][1] if pnes else None
        assert v_cce >= v_ce
        if v_pne is not None:
            assert v_ce >= v_pne
