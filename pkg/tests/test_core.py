import random
from fractions import Fraction as F

import pytest

from contractlab.core import (
    Contract,
    NEG_INF,
    agent_utility,
    as_fraction,
    bits_of,
    mask_of,
    make_instance,
    potential,
    principal_utility,
    submasks,
    welfare,
)
from contractlab.fixtures import (
    random_instance,
    separation_example,
    supermodular_cce_gap_instance,
)


def test_as_fraction_parses_decimals_exactly():
    assert as_fraction("0.925") == F(37, 40)
    assert as_fraction("1/3") == F(1, 3)
    assert as_fraction(7) == F(7)
    with pytest.raises(TypeError):
        as_fraction(0.1)


def test_submasks_ascending():
    assert list(submasks(0b101)) == [0b000, 0b001, 0b100, 0b101]
    assert list(submasks(0)) == [0]


def test_mask_roundtrip():
    assert mask_of(bits_of(0b1011)) == 0b1011


def test_instance_rejects_out_of_order_owners():
    reward = separation_example().reward
    with pytest.raises(ValueError):
        make_instance([[1], []], reward)  # arity mismatch
    from contractlab.core import Instance
    with pytest.raises(ValueError):
        Instance(n=2, owners=(1, 0), costs=(F(1), F(1)), reward=reward)


def test_contract_bounds():
    with pytest.raises(ValueError):
        Contract((F(3, 2),))
    a = Contract.of(["1/2", "1/2", "1/2"])
    assert a.total() == F(3, 2)  # totals above 1 are allowed
    assert a.replace(0, F(0)).total() == F(1)


def test_agent_utility_separation():
    inst = separation_example()
    a = Contract.of(["1/36", "1/36"])
    assert agent_utility(inst, 0b11, a, 1) == F(41, 9)
    assert agent_utility(inst, 0, a, 0) == 0
    with pytest.raises(ValueError):
        agent_utility(inst, 0b11, a, 2)


def test_agent_utility_supermodular_gap():
    inst = supermodular_cce_gap_instance()
    a = Contract.of(["0.925", "1/18"])
    assert agent_utility(inst, 0b111, a, 1) == F(11, 36)


def test_principal_utility():
    inst = separation_example()
    assert principal_utility(inst, 0b11, Contract.of(["1/20", "1/20"])) == 180
    assert principal_utility(inst, 0b11, Contract.of(["1/2", "1/2"])) == 0
    sup = supermodular_cce_gap_instance()
    assert principal_utility(sup, 0b111, Contract.of(["0.925", "1/18"])) == F(7, 36)


def test_welfare():
    sup = supermodular_cce_gap_instance()
    assert welfare(sup, 0b111) == F(1, 2)
    assert welfare(sup, 0) == 0
    assert welfare(sup, 0b011) == F(-15, 4)


def test_potential():
    inst = separation_example()
    a = Contract.of(["1/18", "1/18"])
    assert potential(inst, 0b11, a) == 164
    assert potential(inst, 0, a) == 0
    # costly slice at a zero share sinks the whole potential
    assert potential(inst, 0b01, Contract.of([0, "1/18"])) == NEG_INF
    # zero-cost slice at zero share contributes nothing
    sup = supermodular_cce_gap_instance()
    free = make_instance([[0], [0]], separation_example().reward)
    assert potential(free, 0b11, Contract.zero(2)) == 200
    del sup


def test_accounting_identity():
    # principal + agents = welfare, on random instances
    rng = random.Random(5)
    for trial in range(10):
        inst = random_instance("table", 100 + trial, 2, 2)
        a = Contract.of([F(rng.randint(0, 4), 4) for _ in range(inst.n)])
        for S in range(1 << inst.m):
            total = principal_utility(inst, S, a) + sum(
                agent_utility(inst, S, a, i) for i in range(inst.n))
            assert total == welfare(inst, S)


def test_potential_law_exhaustive():
    # unilateral utility change = alpha_i * potential change when alpha_i > 0
    rng = random.Random(6)
    for trial in range(10):
        inst = random_instance("coverage", 200 + trial, 2, 2)
        a = Contract.of([F(rng.randint(1, 4), 4) for _ in range(inst.n)])
        for S in range(1 << inst.m):
            for i in range(inst.n):
                mask = inst.agent_mask(i)
                for T in submasks(mask):
                    S2 = (S & ~mask) | T
                    du = agent_utility(inst, S2, a, i) - agent_utility(inst, S, a, i)
                    dphi = potential(inst, S2, a) - potential(inst, S, a)
                    assert du == a[i] * dphi
