"""Exact rational LP solver and equilibrium benchmarks built on it.

The simplex is a textbook two-phase tableau method with Bland's anti-cycling
rule, run entirely over fractions.Fraction. Exactness matters: equilibria hold
with ties, so every comparison must be decided without rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    Contract,
    Instance,
    ONE,
    ZERO,
    check_profile_count,
    principal_utility,
    submasks,
)
from .equilibria import JointDistribution, is_pne


@dataclass(frozen=True)
class LinearProgram:
    """max/min objective . x subject to rows, x >= 0."""

    objective: tuple
    sense: str
    rows: tuple  # (coefficients, relation in {"<=", "=", ">="}, rhs)

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"unknown sense {self.sense!r}")
        width = len(self.objective)
        for coeffs, rel, _ in self.rows:
            if len(coeffs) != width:
                raise ValueError("row width does not match variable count")
            if rel not in ("<=", "=", ">="):
                raise ValueError(f"unknown relation {rel!r}")


@dataclass(frozen=True)
class LpResult:
    status: str  # optimal | infeasible | unbounded
    x: Optional[tuple] = None
    value: Optional[Fraction] = None


def _pivot(rows, obj, basis, r, c):
    piv = rows[r][c]
    rows[r] = [v / piv for v in rows[r]]
    pivot_row = rows[r]
    for idx in range(len(rows)):
        if idx != r and rows[idx][c] != 0:
            coef = rows[idx][c]
            rows[idx] = [v - coef * w for v, w in zip(rows[idx], pivot_row)]
    if obj[c] != 0:
        coef = obj[c]
        obj[:] = [v - coef * w for v, w in zip(obj, pivot_row)]
    basis[r] = c


def _iterate(rows, obj, basis, allowed_cols):
    """Maximize with Bland's rule; returns 'optimal' or 'unbounded'."""
    while True:
        enter = None
        for j in range(allowed_cols):
            if obj[j] > 0:
                enter = j
                break
        if enter is None:
            return "optimal"
        best_r = None
        best_ratio = None
        for r in range(len(rows)):
            coef = rows[r][enter]
            if coef > 0:
                ratio = rows[r][-1] / coef
                if (best_r is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[r] < basis[best_r])):
                    best_r, best_ratio = r, ratio
        if best_r is None:
            return "unbounded"
        _pivot(rows, obj, basis, best_r, enter)


def solve_lp(lp: LinearProgram) -> LpResult:
    n = len(lp.objective)
    sign = ONE if lp.sense == "max" else -ONE
    objective = [sign * Fraction(c) for c in lp.objective]

    # normalize rows so every rhs is nonnegative
    norm = []
    for coeffs, rel, rhs in lp.rows:
        coeffs = [Fraction(c) for c in coeffs]
        rhs = Fraction(rhs)
        if rhs < 0:
            coeffs = [-c for c in coeffs]
            rhs = -rhs
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        norm.append((coeffs, rel, rhs))

    n_slack = sum(1 for _, rel, _ in norm if rel != "=")
    n_art = sum(1 for _, rel, _ in norm if rel != "<=")
    total = n + n_slack + n_art
    rows, basis = [], []
    slack_at, art_at = n, n + n_slack
    for coeffs, rel, rhs in norm:
        row = coeffs + [ZERO] * (n_slack + n_art) + [rhs]
        if rel == "<=":
            row[slack_at] = ONE
            basis.append(slack_at)
            slack_at += 1
        elif rel == ">=":
            row[slack_at] = -ONE
            slack_at += 1
            row[art_at] = ONE
            basis.append(art_at)
            art_at += 1
        else:
            row[art_at] = ONE
            basis.append(art_at)
            art_at += 1
        rows.append(row)

    if n_art:
        obj1 = [ZERO] * total + [ZERO]
        for j in range(n + n_slack, total):
            obj1[j] = -ONE
        for r, b in enumerate(basis):
            if b >= n + n_slack:
                obj1 = [v + w for v, w in zip(obj1, rows[r])]
        _iterate(rows, obj1, basis, total)
        if -obj1[-1] < 0:
            return LpResult(status="infeasible")
        # pivot remaining zero-level artificials out, or drop redundant rows
        r = 0
        while r < len(rows):
            if basis[r] >= n + n_slack:
                col = next((j for j in range(n + n_slack) if rows[r][j] != 0), None)
                if col is None:
                    del rows[r]
                    del basis[r]
                    continue
                _pivot(rows, obj1, basis, r, col)
            r += 1

    obj = objective + [ZERO] * (n_slack + n_art) + [ZERO]
    for r, b in enumerate(basis):
        if obj[b] != 0:
            coef = obj[b]
            obj = [v - coef * w for v, w in zip(obj, rows[r])]
    status = _iterate(rows, obj, basis, n + n_slack)
    if status == "unbounded":
        return LpResult(status="unbounded")
    x = [ZERO] * n
    for r, b in enumerate(basis):
        if b < n:
            x[b] = rows[r][-1]
    return LpResult(status="optimal", x=tuple(x), value=sign * -obj[-1])


# ---------------------------------------------------------------------------
# equilibrium benchmarks

def _profiles(inst: Instance) -> list:
    count = 1 << inst.m
    check_profile_count(count, "equilibrium LP")
    return list(range(count))


def _cce_rows(inst: Instance, a: Contract, profiles, fvals):
    """One >= 0 row per (agent, fixed deviation slice)."""
    rows = []
    for i in range(inst.n):
        mask = inst.agent_mask(i)
        for T in submasks(mask):
            coeffs = []
            cT = inst.cost(T)
            for S in profiles:
                dev = inst.reward.value((S & ~mask) | T)
                coeffs.append(a[i] * (fvals[S] - dev) - inst.cost(S & mask) + cT)
            rows.append((tuple(coeffs), ">=", ZERO))
    return rows


def _ce_rows(inst: Instance, a: Contract, profiles, fvals):
    """Conditional rows multiplied through by the recommendation's marginal."""
    rows = []
    for i in range(inst.n):
        mask = inst.agent_mask(i)
        for R in submasks(mask):
            cR = inst.cost(R)
            for T in submasks(mask):
                if T == R:
                    continue
                cT = inst.cost(T)
                coeffs = []
                for S in profiles:
                    if S & mask == R:
                        dev = inst.reward.value((S & ~mask) | T)
                        coeffs.append(a[i] * (fvals[S] - dev) - cR + cT)
                    else:
                        coeffs.append(ZERO)
                rows.append((tuple(coeffs), ">=", ZERO))
    return rows


def _solve_distribution(inst, a, rows, profiles, fvals, sense):
    rows = list(rows)
    rows.append(((ONE,) * len(profiles), "=", ONE))
    lp = LinearProgram(objective=tuple(fvals[S] for S in profiles),
                       sense=sense, rows=tuple(rows))
    result = solve_lp(lp)
    if result.status != "optimal":
        raise RuntimeError(f"equilibrium LP came back {result.status}")
    support = tuple((S, p) for S, p in zip(profiles, result.x) if p > 0)
    dist = JointDistribution(support)
    return dist, (ONE - a.total()) * result.value


def best_cce(inst: Instance, a: Contract):
    """CCE maximizing expected reward; returns it with the principal utility."""
    profiles = _profiles(inst)
    fvals = [inst.reward.value(S) for S in profiles]
    return _solve_distribution(inst, a, _cce_rows(inst, a, profiles, fvals),
                               profiles, fvals, "max")


def worst_cce(inst: Instance, a: Contract):
    profiles = _profiles(inst)
    fvals = [inst.reward.value(S) for S in profiles]
    return _solve_distribution(inst, a, _cce_rows(inst, a, profiles, fvals),
                               profiles, fvals, "min")


def best_ce(inst: Instance, a: Contract):
    profiles = _profiles(inst)
    fvals = [inst.reward.value(S) for S in profiles]
    return _solve_distribution(inst, a, _ce_rows(inst, a, profiles, fvals),
                               profiles, fvals, "max")


def enumerate_pne(inst: Instance, a: Contract) -> list:
    """All pure equilibria with principal utilities, best first."""
    found = []
    for S in _profiles(inst):
        if is_pne(inst, S, a):
            found.append((S, principal_utility(inst, S, a)))
    found.sort(key=lambda e: (-e[1], e[0]))
    return found


def best_pne_binary(inst: Instance):
    """Best pure equilibrium in the binary case via the closed form
    g(S) = f(S) * (1 - sum_{i in S} c_i / f(i | S\\{i})).

    Sets containing a costly action with zero marginal cannot be induced and
    are skipped. Returns (profile, inducing contract, utility).
    """
    if not inst.binary:
        raise ValueError("closed-form search needs binary actions")
    count = 1 << inst.m
    check_profile_count(count, "best_pne_binary")
    f = inst.reward.value
    best = None
    for S in range(count):
        fS = f(S)
        shares = [ZERO] * inst.n
        share_sum = ZERO
        redundant = False
        for j in range(inst.m):
            if not S >> j & 1:
                continue
            marginal = fS - f(S & ~(1 << j))
            if marginal == 0:
                if inst.costs[j] > 0:
                    redundant = True
                    break
                continue
            shares[j] = inst.costs[j] / marginal
            share_sum += shares[j]
        if redundant:
            continue
        g = fS * (ONE - share_sum)
        if best is None or g > best[2]:
            best = (S, shares, g)
    S, shares, g = best
    return S, Contract(tuple(shares)), g


# ---------------------------------------------------------------------------
# contract grid search

@dataclass(frozen=True)
class GapReport:
    objective: str
    resolution: int
    cells: tuple  # (Contract, value)
    best_contract: Contract
    best_value: Fraction
    witness: object  # profile for best_pne, JointDistribution otherwise


_OBJECTIVES = ("best_pne", "best_cce", "worst_cce", "best_ce")


def _grid_contracts(n: int, resolution: int):
    """Row-major sweep of {0, 1/r, ..., 1}^n keeping cells with sum <= 1."""
    def rec(prefix, remaining):
        if not remaining:
            yield Contract(tuple(prefix))
            return
        budget = ONE - sum(prefix, ZERO)
        for k in range(resolution + 1):
            v = Fraction(k, resolution)
            if v > budget:
                break
            yield from rec(prefix + [v], remaining - 1)
    yield from rec([], n)


def evaluate_cell(inst: Instance, a: Contract, objective: str):
    """Principal utility of the objective at one contract, with a witness."""
    if objective == "best_pne":
        pnes = enumerate_pne(inst, a)
        return pnes[0][1], pnes[0][0]
    solver = {"best_cce": best_cce, "worst_cce": worst_cce, "best_ce": best_ce}
    dist, utility = solver[objective](inst, a)
    return utility, dist


def grid_search(inst: Instance, resolution: int, objective: str,
                explicit_cells: Sequence[Contract] = ()) -> GapReport:
    """Sweep the contract grid (plus any explicit contracts) and pick the best
    cell. worst_cce is also maximized: the value of a contract is its worst
    case, and we search for the contract whose worst case is largest.
    """
    if objective not in _OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    cells = []
    best = None
    for a in list(_grid_contracts(inst.n, resolution)) + list(explicit_cells):
        value, witness = evaluate_cell(inst, a, objective)
        cells.append((a, value))
        if best is None or value > best[1]:
            best = (a, value, witness)
    return GapReport(objective=objective, resolution=resolution,
                     cells=tuple(cells), best_contract=best[0],
                     best_value=best[1], witness=best[2])
