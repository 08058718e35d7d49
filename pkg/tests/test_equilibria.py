import random
from fractions import Fraction as F

import pytest

from contractlab.core import Contract
from contractlab.equilibria import (
    JointDistribution,
    ProductDistribution,
    best_response_dynamics,
    is_cce,
    is_ce,
    is_dropout_stable,
    is_mne,
    is_pne,
    potential_maximizer_pne,
)
from contractlab.fixtures import (
    random_contract,
    random_instance,
    sample_cce,
    sample_ce,
    separation_example,
    separation_mne,
    supermodular_cce_gap_instance,
    supermodular_gap_cce,
)


def test_joint_distribution_validation():
    with pytest.raises(ValueError):
        JointDistribution(())
    with pytest.raises(ValueError):
        JointDistribution(((0, F(1, 2)), (0, F(1, 2))))
    with pytest.raises(ValueError):
        JointDistribution(((0, F(1, 3)),))
    D = JointDistribution(((3, F(1, 2)), (0, F(1, 2))))
    assert D.support[0][0] == 0  # canonical order


def test_product_expansion():
    inst = separation_example()
    _, P = separation_mne()
    J = P.to_joint(inst)
    assert dict(J.support)[0b11] == F(81, 100)
    assert J.expected_reward(inst) == F(972, 5)  # 194.4


def test_product_rejects_foreign_slice():
    inst = separation_example()
    P = ProductDistribution((((0b10, F(1)),), ((0b10, F(1)),)))
    with pytest.raises(ValueError):
        P.to_joint(inst)


def test_is_pne_separation():
    inst = separation_example()
    assert is_pne(inst, 0b11, Contract.of(["1/20", "1/20"]))
    assert is_pne(inst, 0, Contract.zero(2))
    v = is_pne(inst, 0b11, Contract.of(["1/36", "1/36"]))
    assert not v and v.agent == 0 and v.deviation == 0


def test_is_pne_threshold_supermodular():
    inst = supermodular_cce_gap_instance()
    assert is_pne(inst, 0b111, Contract.of(["17/18", "1/18"]))
    below = Contract.of([F(17, 18) - F(1, 1000), F(1, 18)])
    v = is_pne(inst, 0b111, below)
    assert not v and v.agent == 0 and v.deviation == 0b001


def test_is_cce():
    inst = supermodular_cce_gap_instance()
    a, D = supermodular_gap_cce()
    assert is_cce(inst, D, a)
    sep = separation_example()
    v = is_cce(sep, JointDistribution.point(0b11), Contract.of(["1/36", "1/36"]))
    assert not v and v.agent == 0 and v.deviation == 0


def test_prop54_distribution_is_not_ce():
    # conditioned on the work recommendation, agent 1 gains by dropping
    # the expensive action, so the distribution is only coarse-correlated
    inst = supermodular_cce_gap_instance()
    a, D = supermodular_gap_cce()
    v = is_ce(inst, D, a)
    assert not v
    assert v.agent == 0 and v.recommendation == 0b011 and v.deviation == 0b001


def test_is_mne_separation():
    inst = separation_example()
    a, P = separation_mne()
    assert is_mne(inst, P, a)
    assert is_ce(inst, P.to_joint(inst), a)


def test_dropout_stability():
    inst = separation_example()
    a, P = separation_mne()
    assert is_dropout_stable(inst, P.to_joint(inst), a)
    v = is_dropout_stable(inst, JointDistribution.point(0b11), Contract.zero(2))
    assert not v and v.agent == 0


def test_best_response_dynamics():
    inst = separation_example()
    assert best_response_dynamics(inst, 0, Contract.zero(2)) == 0
    # at (1/20, 1/20) agent 1 is indifferent once agent 0 works, so the
    # dynamics stop at the one-agent equilibrium
    assert best_response_dynamics(inst, 0, Contract.of(["1/20", "1/20"])) == 0b01
    assert best_response_dynamics(inst, 0, Contract.of(["1/18", "1/18"])) == 0b11
    sup = supermodular_cce_gap_instance()
    a = Contract.of(["17/18", "1/18"])
    assert best_response_dynamics(sup, 0b111, a, forced_floor=[0b011, 0b100]) == 0b111
    with pytest.raises(ValueError):
        best_response_dynamics(sup, 0b100, a, forced_floor=[0b011, 0b100])


def test_potential_maximizer_pne():
    inst = separation_example()
    assert potential_maximizer_pne(inst, Contract.of(["1/18", "1/18"]), 0b11) == 0b11
    assert potential_maximizer_pne(inst, Contract.zero(2), 0b11) == 0
    assert potential_maximizer_pne(inst, Contract.of(["7/216", F(0)]), 0b01) == 0b01


def test_containment_chain_random():
    rng = random.Random(11)
    for trial in range(15):
        kind = ("coverage", "xos", "table")[trial % 3]
        inst = random_instance(kind, 700 + trial, 2, 2)
        a = random_contract(inst.n, rng)
        ce = sample_ce(inst, a, rng)
        assert ce is not None and is_ce(inst, ce, a)
        assert is_cce(inst, ce, a)
        assert is_dropout_stable(inst, ce, a)
        cce = sample_cce(inst, a, rng)
        assert cce is not None and is_cce(inst, cce, a)
        assert is_dropout_stable(inst, cce, a)


def test_dynamics_reaches_pne():
    rng = random.Random(12)
    for trial in range(10):
        inst = random_instance("coverage", 800 + trial, 2, 2)
        a = random_contract(inst.n, rng)
        S = best_response_dynamics(inst, 0, a)
        assert is_pne(inst, S, a)
