"""Exact iterated integrals over piecewise sign functions, and the
vanishing-condition checks behind every suppression-order claim.

The central object is

    F[r_1..r_s; F_1..F_s] = int_0^1 dt_s ... int_0^{t_2} dt_1
                             prod_k F_k(t_k) t_k^{r_k}

evaluated exactly by iterated antidifferentiation of piecewise polynomials
(the sign functions are piecewise constant, so every intermediate stage is a
polynomial on each grid interval).  Values are bounded by 1/s! (simplex
volume), while the zero tolerance used by the checks is 1e-10, many orders
below the generic nonzero scale at the budgets tested here.

Checked conditions (each over all tuples with s + sum(r) <= N):

* single-axis Uhrig (scalar sigma):    vanishes when xor(gamma) = 1
* nested multi-qubit train:            vanishes when xor(alpha) != 0
* bosonic homogenization:              vanishes when xor(alpha) is neither
                                       the zero index nor the index of -J
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import IO, Iterator, Sequence

import numpy as np

from .pauli_basis import ALL_PAIRS, MultiIndex, PAIR_I, gamma_set, symplectic_form_index
from .schedules import (
    PiecewiseSignFunction,
    PulseSchedule,
    decoupling_schedule,
    homogenization_schedule,
    qubit_nudd_schedule,
    sigma_function,
    substitute_bosonic,
    toggling_sign_function,
    udd_times,
)

DEGREE_CAP = 24
ZERO_TOL = 1e-10
QUBIT_LABEL_GUARD = 10 ** 4


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Polynomial pieces on a shared grid over [0, 1].

    ``coeffs[i]`` are ascending-power coefficients (in the global variable)
    valid on ``(breaks[i], breaks[i+1]]``.
    """

    breaks: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]

    def value(self, tau: float) -> float:
        if not 0.0 <= tau <= 1.0:
            raise ValueError(f"argument {tau} outside [0, 1]")
        i = np.searchsorted(self.breaks, tau, side="left") - 1
        i = min(max(int(i), 0), len(self.coeffs) - 1)
        return _poly_eval(self.coeffs[i], tau)

    @property
    def degree(self) -> int:
        return max(len(c) - 1 for c in self.coeffs)


def _poly_eval(coeffs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _interval_signs(F: PiecewiseSignFunction, breaks: Sequence[float]) -> list[int]:
    """Sign of F on each grid interval; F.flips must be a subset of breaks."""
    out = []
    sgn = 1
    fi = 0
    flips = F.flips
    for b in breaks[:-1]:
        while fi < len(flips) and flips[fi] <= b:
            sgn = -sgn
            fi += 1
        out.append(sgn)
    return out


def _integrate_stage(poly: PiecewisePolynomial, F: PiecewiseSignFunction,
                     power: int) -> PiecewisePolynomial:
    """Antiderivative of F(u) u^power poly(u), continuous and zero at 0."""
    breaks = poly.breaks
    signs = _interval_signs(F, breaks)
    acc = 0.0
    out = []
    for i, c in enumerate(poly.coeffs):
        shifted = [0.0] * power + [signs[i] * ck for ck in c]
        anti = [0.0] + [ck / (k + 1) for k, ck in enumerate(shifted)]
        if len(anti) - 1 > DEGREE_CAP:
            raise RuntimeError(f"polynomial degree exceeds cap {DEGREE_CAP}")
        lo, hi = breaks[i], breaks[i + 1]
        anti[0] = acc - _poly_eval(anti, lo)
        acc = _poly_eval(anti, hi)
        out.append(tuple(anti))
    return PiecewisePolynomial(breaks=breaks, coeffs=tuple(out))


def iterated_integral(signs: Sequence[PiecewiseSignFunction],
                      powers: Sequence[int],
                      extra_breaks: Sequence[float] = ()) -> float:
    """Exact nested integral g_s(1) with g_k' = F_k(u) u^{r_k} g_{k-1}(u).

    ``extra_breaks`` refines the integration grid with spurious breakpoints;
    the value is invariant under any refinement (used by property tests).
    """
    if len(signs) != len(powers):
        raise ValueError("need one power per sign function")
    if not signs:
        raise ValueError("empty integrand")
    if any(r < 0 for r in powers):
        raise ValueError("powers must be nonnegative")
    grid = {0.0, 1.0}
    for F in signs:
        grid.update(F.flips)
    for b in extra_breaks:
        if not 0.0 < b < 1.0:
            raise ValueError("grid refinement points must lie in (0, 1)")
        grid.add(float(b))
    breaks = tuple(sorted(grid))
    poly = PiecewisePolynomial(breaks=breaks, coeffs=((1.0,),) * (len(breaks) - 1))
    for F, r in zip(signs, powers):
        poly = _integrate_stage(poly, F, int(r))
    return poly.value(1.0)


def simplex_bound(s: int) -> float:
    """|F| <= 1/s! for any admissible integrand (ordered-simplex volume)."""
    return 1.0 / math.factorial(s)


# ---------------------------------------------------------------------------
# Condition reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRow:
    s: int
    powers: tuple[int, ...]
    labels: tuple
    value: float
    required_zero: bool


@dataclass(frozen=True)
class ConditionReport:
    scheme: str
    order: int
    tol: float
    rows: tuple[CheckRow, ...]
    exhaustive: bool
    m: int | None = None

    @property
    def max_violation(self) -> float:
        vals = [abs(r.value) for r in self.rows if r.required_zero]
        return max(vals, default=0.0)

    @property
    def n_checked(self) -> int:
        return sum(1 for r in self.rows if r.required_zero)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def _budget_pairs(order: int) -> list[tuple[int, tuple[int, ...]]]:
    """All (s, powers) with s >= 1 and s + sum(powers) <= order."""
    pairs = []
    for s in range(1, order + 1):
        for total in range(order - s + 1):
            for comp in _compositions(total, s):
                pairs.append((s, comp))
    return pairs


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def check_udd_condition(order: int, tol: float = ZERO_TOL) -> ConditionReport:
    """Single-axis Uhrig vanishing: all tuples with odd gamma parity vanish.

    Also probes the tuple (s=1, r=N, gamma=1) one order past the budget; its
    value (-1/4)^N is the witness that suppression stops exactly at order N.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order > 8:
        raise ValueError("budget guard: order <= 8")
    sigma = PiecewiseSignFunction(udd_times(order))
    return _scalar_condition_report("udd", order, sigma, tol)


def check_bosonic_decoupling_condition(order: int, tol: float = ZERO_TOL) -> ConditionReport:
    """Same integral equations, with sigma built from the pulse schedule.

    The sign function of the flip-pulse schedule must coincide with the
    Uhrig construction exactly; this is asserted before checking.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order > 8:
        raise ValueError("budget guard: order <= 8")
    sigma = sigma_function(decoupling_schedule(order, n_system=1))
    if sigma.flips != udd_times(order):
        raise AssertionError("schedule-derived sigma differs from the Uhrig times")
    return _scalar_condition_report("bosonic-decoupling", order, sigma, tol)


def _scalar_condition_report(scheme: str, order: int,
                             sigma: PiecewiseSignFunction, tol: float) -> ConditionReport:
    const = PiecewiseSignFunction(())
    rows = []
    for s, powers in _budget_pairs(order):
        for gammas in itertools.product((0, 1), repeat=s):
            if sum(gammas) % 2 == 0:
                continue
            signs = [sigma if g else const for g in gammas]
            value = iterated_integral(signs, powers)
            rows.append(CheckRow(s, powers, gammas, value, required_zero=True))
    probe = iterated_integral([sigma], [order])
    rows.append(CheckRow(1, (order,), (1,), probe, required_zero=False))
    return ConditionReport(scheme=scheme, order=order, tol=tol,
                           rows=tuple(rows), exhaustive=True)


def _xor(indices: Sequence[MultiIndex]) -> MultiIndex:
    acc = tuple(PAIR_I for _ in indices[0])
    for idx in indices:
        acc = tuple((a[0] ^ b[0], a[1] ^ b[1]) for a, b in zip(acc, idx))
    return acc


def _tuple_condition_report(scheme: str, schedule: PulseSchedule,
                            alphabet: Sequence[MultiIndex],
                            exempt_xors: frozenset,
                            order: int, tol: float,
                            max_tuples: int, seed: int) -> ConditionReport:
    functions = {alpha: toggling_sign_function(schedule, alpha) for alpha in alphabet}
    pairs = _budget_pairs(order)
    total = sum(len(alphabet) ** s for s, _ in pairs)
    rows = []
    if total <= max_tuples:
        for s, powers in pairs:
            for alphas in itertools.product(alphabet, repeat=s):
                if _xor(alphas) in exempt_xors:
                    continue
                value = iterated_integral([functions[a] for a in alphas], powers)
                rows.append(CheckRow(s, powers, alphas, value, required_zero=True))
        exhaustive = True
    else:
        rng = np.random.default_rng(seed)
        attempts = 0
        while len(rows) < max_tuples and attempts < 20 * max_tuples:
            attempts += 1
            s, powers = pairs[int(rng.integers(len(pairs)))]
            alphas = tuple(alphabet[int(rng.integers(len(alphabet)))] for _ in range(s))
            if _xor(alphas) in exempt_xors:
                continue
            value = iterated_integral([functions[a] for a in alphas], powers)
            rows.append(CheckRow(s, powers, alphas, value, required_zero=True))
        exhaustive = False
    return ConditionReport(scheme=scheme, order=order, tol=tol, rows=tuple(rows),
                           exhaustive=exhaustive, m=schedule.m)


def check_qubit_nudd_condition(order: int, m: int, tol: float = ZERO_TOL,
                               max_tuples: int = 10 ** 5,
                               seed: int = 0) -> ConditionReport:
    """Nested-train decoupling condition over the full (Z2xZ2)^{m+1} alphabet."""
    if (order + 1) ** (2 * m + 2) > QUBIT_LABEL_GUARD:
        raise ValueError("label set exceeds the qubit-condition guard")
    schedule = qubit_nudd_schedule(order, m)
    alphabet = tuple(itertools.product(ALL_PAIRS, repeat=m + 1))
    exempt = frozenset({(PAIR_I,) * (m + 1)})
    return _tuple_condition_report("qubit-nudd", schedule, alphabet, exempt,
                                   order, tol, max_tuples, seed)


def check_homogenization_condition_for(schedule: PulseSchedule, order: int,
                                       m: int, tol: float = ZERO_TOL,
                                       max_tuples: int = 10 ** 5,
                                       seed: int = 0) -> ConditionReport:
    """Homogenization condition for an arbitrary indexed pulse schedule.

    Tuples whose index sum is the zero index (product ~ identity) or the
    index of the symplectic form (product ~ J) are exempt.
    """
    alphabet = gamma_set(m)
    exempt = frozenset({(PAIR_I,) * (m + 1), symplectic_form_index(m)})
    return _tuple_condition_report(schedule.scheme, schedule, alphabet,
                                   exempt, order, tol, max_tuples, seed)


def check_homogenization_condition(order: int, m: int, tol: float = ZERO_TOL,
                                   max_tuples: int = 10 ** 5,
                                   seed: int = 0) -> ConditionReport:
    """Homogenization condition for the nested-train bosonic schedule."""
    if (order + 1) ** (2 * m + 2) > QUBIT_LABEL_GUARD:
        raise ValueError("label set exceeds the homogenization-condition guard")
    return check_homogenization_condition_for(homogenization_schedule(order, m),
                                              order, m, tol, max_tuples, seed)


# ---------------------------------------------------------------------------
# Qubit <-> bosonic correspondence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrespondenceReport:
    order: int
    m: int
    n_checked: int
    mismatches: tuple[MultiIndex, ...]

    @property
    def passed(self) -> bool:
        return not self.mismatches


def verify_qubit_bosonic_correspondence(order: int, m: int) -> CorrespondenceReport:
    """Breakpoint-exact equality F^bos_alpha == F^qubit_alpha'.

    alpha' differs from alpha only at position 0: with a_0 = (c, d), the
    partner index is (c, c, 0, ..., 0) xor alpha, i.e. a_0' = (0, d xor c).
    """
    qubit = qubit_nudd_schedule(order, m)
    bosonic = substitute_bosonic(qubit)
    mismatches = []
    gamma = gamma_set(m)
    for alpha in gamma:
        c, d = alpha[0]
        alpha_prime = ((0, d ^ c),) + tuple(alpha[1:])
        f_bos = toggling_sign_function(bosonic, alpha)
        f_qub = toggling_sign_function(qubit, alpha_prime)
        if f_bos != f_qub:
            mismatches.append(alpha)
    return CorrespondenceReport(order=order, m=m, n_checked=len(gamma),
                                mismatches=tuple(mismatches))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def format_labels(labels: tuple) -> str:
    """gamma tuples as ';'-joined bits; index tuples as ';'-joined bit pairs."""
    if all(isinstance(l, int) for l in labels):
        return ";".join(str(l) for l in labels)
    return ";".join("".join(f"{x}{z}" for x, z in alpha) for alpha in labels)


def report_to_csv(report: ConditionReport, stream: IO[str]) -> None:
    stream.write("s,r,labels,value,required_zero,pass\n")
    for row in report.rows:
        ok = (abs(row.value) <= report.tol) if row.required_zero else True
        stream.write(f"{row.s},{';'.join(str(r) for r in row.powers)},"
                     f"{format_labels(row.labels)},{row.value:.17g},"
                     f"{int(row.required_zero)},{int(ok)}\n")
