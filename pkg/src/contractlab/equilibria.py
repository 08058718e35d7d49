"""Distribution types, exact equilibrium verifiers, and best-response dynamics.

All verifiers use weak inequalities decided in exact rational arithmetic. The
optional ``tol`` argument exists only for fixtures built from rational
approximations of irrational constants; by default comparisons are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import (
    Contract,
    Instance,
    ONE,
    POS_INF,
    ZERO,
    agent_utility,
    check_enum_bits,
    principal_utility,
    submasks,
)
from .rewards import demand

DEFAULT_TOLERANCE = Fraction(1, 10 ** 30)


@dataclass(frozen=True)
class JointDistribution:
    """Finitely supported distribution over action profiles, exact rationals."""

    support: tuple  # ((profile mask, probability), ...)

    def __post_init__(self):
        if not self.support:
            raise ValueError("empty support")
        seen = set()
        total = ZERO
        for S, p in self.support:
            if S in seen:
                raise ValueError("duplicate profile in support")
            seen.add(S)
            if not isinstance(p, Fraction) or p <= 0:
                raise ValueError("probabilities must be positive rationals")
            total += p
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "support",
                           tuple(sorted(self.support, key=lambda e: e[0])))

    @classmethod
    def point(cls, S: int) -> "JointDistribution":
        return cls(((S, ONE),))

    def expectation(self, fn: Callable[[int], Fraction]) -> Fraction:
        return sum((p * fn(S) for S, p in self.support), ZERO)

    def expected_reward(self, inst: Instance) -> Fraction:
        return self.expectation(inst.reward.value)

    def principal_utility(self, inst: Instance, a: Contract) -> Fraction:
        return self.expectation(lambda S: principal_utility(inst, S, a))


@dataclass(frozen=True)
class ProductDistribution:
    """Independent per-agent mixtures over slices of that agent's actions."""

    per_agent: tuple  # per agent: ((slice mask, probability), ...)

    def __post_init__(self):
        for entries in self.per_agent:
            if not entries:
                raise ValueError("each agent needs at least one slice")
            seen = set()
            total = ZERO
            for mask, p in entries:
                if mask in seen:
                    raise ValueError("duplicate slice for an agent")
                seen.add(mask)
                if not isinstance(p, Fraction) or p <= 0:
                    raise ValueError("probabilities must be positive rationals")
                total += p
            if total != 1:
                raise ValueError(f"agent probabilities sum to {total}, not 1")

    def to_joint(self, inst: Instance) -> JointDistribution:
        if len(self.per_agent) != inst.n:
            raise ValueError("agent count mismatch")
        for i, entries in enumerate(self.per_agent):
            for mask, _ in entries:
                if mask & ~inst.agent_mask(i):
                    raise ValueError(f"slice {mask:#x} not owned by agent {i}")
        combos = [(0, ONE)]
        for entries in self.per_agent:
            if len(entries) == 1:
                mask = entries[0][0]
                combos = [(S | mask, p) for S, p in combos]
            else:
                combos = [(S | mask, p * q) for S, p in combos for mask, q in entries]
        return JointDistribution(tuple(combos))


@dataclass(frozen=True)
class Verdict:
    """Outcome of an equilibrium check, with a witness on failure."""

    ok: bool
    agent: Optional[int] = None
    deviation: Optional[int] = None
    recommendation: Optional[int] = None
    lhs: Optional[Fraction] = None
    rhs: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.ok


OK = Verdict(True)


def _tol(tol) -> Fraction:
    return ZERO if tol is None else tol


def is_pne(inst: Instance, S: int, a: Contract, tol=None) -> Verdict:
    """No agent gains by a unilateral switch of its own slice."""
    inst.check_profile(S)
    eps = _tol(tol)
    for i in range(inst.n):
        mask = inst.agent_mask(i)
        check_enum_bits(mask.bit_count(), f"is_pne agent {i}")
        base = agent_utility(inst, S, a, i)
        rest = S & ~mask
        for T in submasks(mask):
            if T == S & mask:
                continue
            dev = a[i] * inst.reward.value(rest | T) - inst.cost(T)
            if dev > base + eps:
                return Verdict(False, agent=i, deviation=T, lhs=base, rhs=dev)
    return OK


def is_cce(inst: Instance, D: JointDistribution, a: Contract, tol=None) -> Verdict:
    """No agent gains in expectation by committing to a fixed slice."""
    eps = _tol(tol)
    fvals = [(S, p, inst.reward.value(S)) for S, p in D.support]
    for i in range(inst.n):
        mask = inst.agent_mask(i)
        check_enum_bits(mask.bit_count(), f"is_cce agent {i}")
        base = sum((p * (a[i] * fS - inst.cost(S & mask)) for S, p, fS in fvals), ZERO)
        for T in submasks(mask):
            dev = sum((p * a[i] * inst.reward.value((S & ~mask) | T)
                       for S, p, fS in fvals), ZERO) - inst.cost(T)
            if dev > base + eps:
                return Verdict(False, agent=i, deviation=T, lhs=base, rhs=dev)
    return OK


def is_ce(inst: Instance, D: JointDistribution, a: Contract, tol=None) -> Verdict:
    """No agent gains by re-mapping any recommended slice to another slice."""
    eps = _tol(tol)
    for i in range(inst.n):
        mask = inst.agent_mask(i)
        check_enum_bits(mask.bit_count(), f"is_ce agent {i}")
        groups: dict = {}
        for S, p in D.support:
            groups.setdefault(S & mask, []).append((S, p))
        for rec, entries in groups.items():
            weight = sum((p for _, p in entries), ZERO)
            base = sum((p * a[i] * inst.reward.value(S) for S, p in entries),
                       ZERO) - weight * inst.cost(rec)
            for T in submasks(mask):
                if T == rec:
                    continue
                dev = sum((p * a[i] * inst.reward.value((S & ~mask) | T)
                           for S, p in entries), ZERO) - weight * inst.cost(T)
                if dev > base + eps:
                    return Verdict(False, agent=i, deviation=T,
                                   recommendation=rec, lhs=base, rhs=dev)
    return OK


def is_mne(inst: Instance, P: ProductDistribution, a: Contract, tol=None) -> Verdict:
    """Product distribution satisfying the CCE inequality against pure slices."""
    return is_cce(inst, P.to_joint(inst), a, tol=tol)


def is_dropout_stable(inst: Instance, D: JointDistribution, a: Contract,
                      tol=None) -> Verdict:
    """No agent gains in expectation by switching to taking no action."""
    eps = _tol(tol)
    for i in range(inst.n):
        mask = inst.agent_mask(i)
        lhs = sum((p * (a[i] * inst.reward.value(S) - inst.cost(S & mask))
                   for S, p in D.support), ZERO)
        rhs = sum((p * a[i] * inst.reward.value(S & ~mask)
                   for S, p in D.support), ZERO)
        if rhs > lhs + eps:
            return Verdict(False, agent=i, deviation=0, lhs=lhs, rhs=rhs)
    return OK


def best_response_dynamics(inst: Instance, start: int, a: Contract,
                           forced_floor: Optional[Sequence[int]] = None,
                           on_step: Optional[Callable[[int, int], None]] = None) -> int:
    """Round-robin strict best responses until no agent can improve.

    With ``forced_floor``, agent i only considers responses containing
    floor_i; the start profile must contain the floor. ``on_step(i, S)`` is
    invoked after every strict improvement.
    """
    inst.check_profile(start)
    floors = [0] * inst.n if forced_floor is None else list(forced_floor)
    for i, fl in enumerate(floors):
        if fl & ~inst.agent_mask(i):
            raise ValueError(f"floor for agent {i} not owned by the agent")
        if fl & ~start:
            raise ValueError("start profile does not contain the floor")
    S = start
    while True:
        improved = False
        for i in range(inst.n):
            mask = inst.agent_mask(i)
            check_enum_bits(mask.bit_count(), f"best response agent {i}")
            rest = S & ~mask
            best_T, best_u = S & mask, agent_utility(inst, S, a, i)
            for T in submasks(mask):
                if floors[i] & ~T:
                    continue
                u = a[i] * inst.reward.value(rest | T) - inst.cost(T)
                if u > best_u:
                    best_T, best_u = T, u
            if best_T != S & mask:
                S = rest | best_T
                improved = True
                if on_step is not None:
                    on_step(i, S)
        if not improved:
            return S


def potential_prices(inst: Instance, a: Contract, restrict: int) -> list:
    """Price vector c_j / alpha_owner(j) on restrict, +infinity elsewhere."""
    prices = [POS_INF] * inst.m
    for j in range(inst.m):
        if not restrict >> j & 1:
            continue
        alpha = a[inst.owners[j]]
        if inst.costs[j] == 0:
            prices[j] = ZERO
        elif alpha == 0:
            prices[j] = POS_INF
        else:
            prices[j] = inst.costs[j] / alpha
    return prices


def potential_maximizer_pne(inst: Instance, a: Contract, restrict: int) -> int:
    """Global potential maximizer over restrict, found by one demand query.

    The result is a PNE of the contract equal to ``a`` on agents owning
    actions in restrict and zero elsewhere; this is verified before returning.
    """
    inst.check_profile(restrict)
    S = demand(inst.reward, potential_prices(inst, a, restrict), restrict)
    zeroed = Contract(tuple(
        a[i] if inst.agent_mask(i) & restrict else ZERO for i in range(inst.n)))
    verdict = is_pne(inst, S, zeroed)
    if not verdict:
        raise RuntimeError(
            f"potential maximizer {S:#x} failed the equilibrium post-check "
            f"(agent {verdict.agent}, deviation {verdict.deviation:#x})")
    return S
