"""Model primitives: instances, action profiles, contracts, utilities, potential.

Action profiles are plain int bitsets over global action ids 0..m-1.
All numeric quantities are exact rationals (fractions.Fraction); the only
non-rational values are the +/-infinity sentinels used by the potential
convention and by price vectors.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

Scalar = Fraction
ExtendedScalar = Union[Fraction, float]  # Fraction, or float +/-inf sentinel

NEG_INF = float("-inf")
POS_INF = float("inf")

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_ENUM_CAP_BITS = 24
DEFAULT_PROFILE_CAP = 4096


class CapacityError(Exception):
    """A brute-force enumeration would exceed the configured cap."""


def enum_cap_bits() -> int:
    raw = os.environ.get("CONTRACTLAB_CAP")
    if raw:
        return int(raw.split(",")[0])
    return DEFAULT_ENUM_CAP_BITS


def profile_cap() -> int:
    raw = os.environ.get("CONTRACTLAB_CAP")
    if raw and "," in raw:
        return int(raw.split(",")[1])
    return DEFAULT_PROFILE_CAP


def check_enum_bits(bits: int, what: str) -> None:
    if bits > enum_cap_bits():
        raise CapacityError(f"{what}: 2^{bits} subsets exceeds enumeration cap")


def check_profile_count(count: int, what: str) -> None:
    if count > profile_cap():
        raise CapacityError(f"{what}: {count} profiles exceeds profile cap")


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, and 'p/q' / decimal strings to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError(f"refusing inexact float {x!r}; pass a string or Fraction")
    raise TypeError(f"cannot interpret {x!r} as a rational")


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


# ---------------------------------------------------------------------------
# bitset helpers

def bits_of(mask: int) -> Iterator[int]:
    j = 0
    while mask:
        if mask & 1:
            yield j
        mask >>= 1
        j += 1


def mask_of(indices) -> int:
    value = 0
    for j in indices:
        value |= 1 << j
    return value


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` in increasing numeric order (empty set first)."""
    positions = list(bits_of(mask))
    for k in range(1 << len(positions)):
        sub = 0
        for t, j in enumerate(positions):
            if k >> t & 1:
                sub |= 1 << j
        yield sub


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class Instance:
    """A multi-agent contract instance.

    ``owners[j]`` is the agent owning global action j; owners must be
    non-decreasing so action ids are numbered in agent order. ``reward`` is any
    object exposing ``m`` and ``value(mask) -> Fraction``.
    """

    n: int
    owners: tuple
    costs: tuple
    reward: object

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one agent")
        if len(self.owners) != len(self.costs):
            raise ValueError("owners and costs length mismatch")
        masks = [0] * self.n
        prev = 0
        for j, owner in enumerate(self.owners):
            if not 0 <= owner < self.n:
                raise ValueError(f"action {j} has invalid owner {owner}")
            if owner < prev:
                raise ValueError("action ids must be numbered in agent order")
            prev = owner
            masks[owner] |= 1 << j
        for c in self.costs:
            if not isinstance(c, Fraction) or c < 0:
                raise ValueError("costs must be nonnegative rationals")
        if getattr(self.reward, "m", None) != self.m:
            raise ValueError("reward function arity does not match action count")
        object.__setattr__(self, "_agent_masks", tuple(masks))

    @property
    def m(self) -> int:
        return len(self.owners)

    @property
    def full_mask(self) -> int:
        return (1 << self.m) - 1

    @property
    def binary(self) -> bool:
        return self.n == self.m and all(m.bit_count() == 1 for m in self._agent_masks)

    def agent_mask(self, i: int) -> int:
        return self._agent_masks[i]

    def slice(self, S: int, i: int) -> int:
        return S & self._agent_masks[i]

    def others(self, S: int, i: int) -> int:
        return S & ~self._agent_masks[i]

    def cost(self, mask: int) -> Fraction:
        return sum((self.costs[j] for j in bits_of(mask)), ZERO)

    def check_profile(self, S: int) -> None:
        if not 0 <= S <= self.full_mask:
            raise ValueError(f"profile {S:#x} has bits outside the {self.m} actions")


def make_instance(agent_actions: Sequence[Sequence], reward) -> Instance:
    """Build an Instance from per-agent cost lists, in agent order."""
    owners, costs = [], []
    for i, agent in enumerate(agent_actions):
        for c in agent:
            owners.append(i)
            costs.append(as_fraction(c))
    return Instance(n=len(agent_actions), owners=tuple(owners), costs=tuple(costs),
                    reward=reward)


@dataclass(frozen=True)
class Contract:
    """Per-agent reward shares alpha_i in [0, 1].

    The total may exceed 1; the principal's utility is then negative.
    """

    alpha: tuple

    def __post_init__(self):
        for a in self.alpha:
            if not isinstance(a, Fraction) or not ZERO <= a <= ONE:
                raise ValueError(f"share {a!r} outside [0, 1]")

    @classmethod
    def of(cls, values) -> "Contract":
        return cls(tuple(as_fraction(v) for v in values))

    @classmethod
    def zero(cls, n: int) -> "Contract":
        return cls((ZERO,) * n)

    def __getitem__(self, i: int) -> Fraction:
        return self.alpha[i]

    def __len__(self) -> int:
        return len(self.alpha)

    def total(self) -> Fraction:
        return sum(self.alpha, ZERO)

    def replace(self, i: int, value: Fraction) -> "Contract":
        parts = list(self.alpha)
        parts[i] = value
        return Contract(tuple(parts))


# ---------------------------------------------------------------------------
# operations

def agent_utility(inst: Instance, S: int, a: Contract, i: int) -> Fraction:
    """alpha_i * f(S) - c(S_i)."""
    if not 0 <= i < inst.n:
        raise ValueError(f"invalid agent id {i}")
    inst.check_profile(S)
    return a[i] * inst.reward.value(S) - inst.cost(inst.slice(S, i))


def principal_utility(inst: Instance, S: int, a: Contract) -> Fraction:
    """(1 - sum_i alpha_i) * f(S)."""
    inst.check_profile(S)
    return (ONE - a.total()) * inst.reward.value(S)


def welfare(inst: Instance, S: int) -> Fraction:
    """f(S) - c(S)."""
    inst.check_profile(S)
    return inst.reward.value(S) - inst.cost(S)


def potential(inst: Instance, S: int, a: Contract) -> ExtendedScalar:
    """Weighted potential f(S) - sum_i c(S_i)/alpha_i.

    A zero-cost slice contributes 0 even at alpha_i = 0; a costly slice at
    alpha_i = 0 makes the whole potential -infinity.
    """
    inst.check_profile(S)
    total = inst.reward.value(S)
    for i in range(inst.n):
        ci = inst.cost(inst.slice(S, i))
        if ci == 0:
            continue
        if a[i] == 0:
            return NEG_INF
        total -= ci / a[i]
    return total
