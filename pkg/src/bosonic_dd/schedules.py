"""Pulse schedules: single-axis Uhrig trains, nested multi-qubit trains,
and the bosonic homogenization schedules obtained by pulse substitution.

A schedule stores fractional application times ``0 < delta <= 1``; the total
time T is supplied when the schedule is evolved.  Two pulse alphabets occur:

* flip schedules ("decoupling"): every pulse is the phase flip -I on the
  system block.  The pulse is stored as the bit 1; the relevant sign
  information is the scalar function sigma that flips at every pulse.
* indexed schedules ("qubit-nudd", "bosonic-homogenization"): pulses are
  multi-indices over (Z2 x Z2)^{m+1} (see :mod:`bosonic_dd.pauli_basis`).
  Position 0 of the index corresponds to the innermost nesting level of the
  nested train; level 2k is the z-slot and level 2k+1 the x-slot of
  position k.

Sign functions are stored canonically as their flip points only: F(0+) = +1
always, and a flip at exactly delta = 1 is dropped (it changes the function
on a zero-measure tail only, and dropping it makes function comparison
breakpoint-exact across schedules that do or do not retain a final pulse).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence, Union

from .pauli_basis import (
    MultiIndex,
    PAIR_I,
    PAIR_X,
    PAIR_Y,
    PAIR_Z,
    product_index,
    symplectic_inner_product,
)

FLIP = 1  # pulse token for -I on the system block
Pulse = Union[int, MultiIndex]

# Pulse times produced by the nested recursion are distinct by construction;
# the merge below is a safety net for externally supplied schedules.
MERGE_TOL = 1e-12

NUDD_LABEL_GUARD = 10 ** 6


@dataclass(frozen=True)
class PulseEntry:
    delta: float
    pulse: Pulse
    sign: int = 1


@dataclass(frozen=True)
class PulseSchedule:
    scheme: str
    order: int
    entries: tuple[PulseEntry, ...]
    m: int | None = None
    n_system: int | None = None

    def __post_init__(self) -> None:
        prev = 0.0
        for e in self.entries:
            if not 0.0 < e.delta <= 1.0:
                raise ValueError(f"pulse time {e.delta} outside (0, 1]")
            if e.delta <= prev:
                raise ValueError("pulse times must be strictly increasing")
            prev = e.delta

    @property
    def is_flip_schedule(self) -> bool:
        return self.m is None

    def times(self) -> tuple[float, ...]:
        return tuple(e.delta for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PiecewiseSignFunction:
    """Piecewise +-1 function on [0, 1]: starts at +1, flips at each point.

    Intervals follow the left-open right-closed convention: the value on
    ``(flip_k, flip_{k+1}]`` is ``(-1)^{k+1}``, so ``value(flip_k)`` still
    carries the pre-flip sign.
    """

    flips: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        prev = 0.0
        for t in self.flips:
            if not 0.0 < t < 1.0:
                raise ValueError(f"flip point {t} outside (0, 1)")
            if t <= prev:
                raise ValueError("flip points must be strictly increasing")
            prev = t

    def value(self, tau: float) -> int:
        if not 0.0 <= tau <= 1.0:
            raise ValueError(f"argument {tau} outside [0, 1]")
        k = sum(1 for t in self.flips if t < tau)
        return -1 if k % 2 else 1

    def interval_values(self) -> tuple[int, ...]:
        """Values on the len(flips)+1 intervals between consecutive flips."""
        return tuple(-1 if k % 2 else 1 for k in range(len(self.flips) + 1))


def udd_times(n_pulses: int) -> tuple[float, ...]:
    """Uhrig fractions sin^2(j pi / (2(N+1))), j = 1..N.

    Strictly increasing in (0, 1) and symmetric: delta_j + delta_{N+1-j} = 1.
    """
    if n_pulses < 1:
        raise ValueError("need at least one pulse")
    return tuple(math.sin(j * math.pi / (2 * (n_pulses + 1))) ** 2
                 for j in range(1, n_pulses + 1))


def flip_train_schedule(deltas: Sequence[float], n_system: int,
                        order: int = 0, scheme: str = "flip-train") -> PulseSchedule:
    """Schedule applying -I_S at the given fractions (merging even repeats)."""
    merged = _merge_entries([PulseEntry(float(d), FLIP) for d in sorted(deltas)],
                            flip_alphabet=True)
    return PulseSchedule(scheme=scheme, order=order, entries=tuple(merged),
                         n_system=n_system)


def decoupling_schedule(n_pulses: int, n_system: int) -> PulseSchedule:
    """N applications of -I_S at the Uhrig fractions."""
    return flip_train_schedule(udd_times(n_pulses), n_system,
                               order=n_pulses, scheme="decoupling")


def sigma_function(schedule: PulseSchedule) -> PiecewiseSignFunction:
    """The scalar sign function: sigma(0) = +1, flipping at every -I_S pulse."""
    if not schedule.is_flip_schedule:
        raise ValueError("sigma is defined for flip schedules only")
    return PiecewiseSignFunction(tuple(e.delta for e in schedule.entries
                                       if e.delta < 1.0))


# ---------------------------------------------------------------------------
# Nested (multi-level) Uhrig schedules
# ---------------------------------------------------------------------------

Label = tuple[int, ...]


def _nudd_guard(n_pulses: int, m: int) -> None:
    if n_pulses < 1:
        raise ValueError("suppression order must be >= 1")
    if m < 0:
        raise ValueError("m must be nonnegative")
    if (n_pulses + 1) ** (2 * m + 2) > NUDD_LABEL_GUARD:
        raise ValueError(
            f"label set size (N+1)^(2m+2) = {(n_pulses + 1) ** (2 * m + 2)} "
            f"exceeds the resource guard {NUDD_LABEL_GUARD}")


def _nested_time(label: Label, grid: Sequence[float]) -> float:
    """Evaluate the nesting recursion d for one label, innermost entry first.

    ``grid[j]`` holds delta_j for j = 0..N+1 plus a sentinel at N+2 that is
    only ever multiplied by a zero prefix (it arises for the shifted labels
    whose prefix is all zeros).
    """
    d = grid[label[0]]
    for lk in label[1:]:
        d = grid[lk] + (grid[lk + 1] - grid[lk]) * d
    return d


def nudd_times(n_pulses: int, m: int) -> dict[Label, float]:
    """Pulse fraction for every label in {0..N}^{2m+2}.

    The all-zero label maps to 1 (a final pulse at readout time); a label
    whose first nonzero entry sits at position r >= 1 is evaluated through
    the shifted label with entries (r-1, r) replaced by (N+1, l_r - 1).
    """
    _nudd_guard(n_pulses, m)
    N = n_pulses
    grid = [math.sin(j * math.pi / (2 * (N + 1))) ** 2 for j in range(N + 1)]
    grid += [1.0, 1.0]  # delta_{N+1} = 1 and the never-weighted sentinel
    out: dict[Label, float] = {}
    for label in itertools.product(range(N + 1), repeat=2 * m + 2):
        if all(l == 0 for l in label):
            out[label] = 1.0
            continue
        r = next(i for i, l in enumerate(label) if l != 0)
        if r == 0:
            out[label] = _nested_time(label, grid)
        else:
            shifted = list(label)
            shifted[r - 1] = N + 1
            shifted[r] = label[r] - 1
            out[label] = _nested_time(tuple(shifted), grid)
    return out


def nudd_pulses(n_pulses: int, m: int) -> dict[Label, MultiIndex]:
    """Pulse index for every label.

    Even N: the lowest nonzero level decides, z at even levels, x at odd.
    Odd N: each level pulse additionally carries the product of all lower
    y factors (z_k picks up y_0..y_{k-1}, x_k becomes y_0..y_k, and the
    all-zero label becomes the product of every y).
    """
    _nudd_guard(n_pulses, m)
    N = n_pulses
    odd = N % 2 == 1
    out: dict[Label, MultiIndex] = {}
    for label in itertools.product(range(N + 1), repeat=2 * m + 2):
        idx = [PAIR_I] * (m + 1)
        if all(l == 0 for l in label):
            if odd:
                idx = [PAIR_Y] * (m + 1)
        else:
            r = next(i for i, l in enumerate(label) if l != 0)
            k, x_slot = divmod(r, 2)
            if x_slot:
                if odd:
                    for j in range(k + 1):
                        idx[j] = PAIR_Y
                else:
                    idx[k] = PAIR_X
            else:
                idx[k] = PAIR_Z
                if odd:
                    for j in range(k):
                        idx[j] = PAIR_Y
        out[label] = tuple(idx)
    return out


def qubit_nudd_schedule(n_pulses: int, m: int) -> PulseSchedule:
    """The (m+1)-qubit nested Uhrig schedule as a time-ordered pulse list."""
    times = nudd_times(n_pulses, m)
    pulses = nudd_pulses(n_pulses, m)
    entries = [PulseEntry(times[lab], pulses[lab])
               for lab in sorted(times, key=lambda l: times[l])]
    merged = _merge_entries(entries, flip_alphabet=False)
    return PulseSchedule(scheme="qubit-nudd", order=n_pulses,
                         entries=tuple(merged), m=m, n_system=2 ** m)


def substitute_bosonic(qubit: PulseSchedule) -> PulseSchedule:
    """Replace qubit pulses by bosonic ones: the first index entry maps
    (1,0),(1,1) -> (1,1) and (0,0),(0,1) -> (0,0).

    Pulses that substitute to the all-zero index apply no operation and are
    dropped, except for the final slot at delta = 1, which is always kept so
    that the schedule has exactly (N+1)^{2m+1} entries for nested input of
    any parity (the retained identity there is a bookkeeping no-op).
    """
    if qubit.is_flip_schedule:
        raise ValueError("substitution expects an indexed qubit schedule")
    entries = []
    for e in qubit.entries:
        beta = e.pulse
        b0 = tuple(beta[0])
        b0p = PAIR_Y if b0 in (PAIR_X, PAIR_Y) else PAIR_I
        bp = (b0p,) + tuple(beta[1:])
        if all(p == PAIR_I for p in bp) and e.delta < 1.0:
            continue
        entries.append(PulseEntry(e.delta, bp, e.sign))
    return PulseSchedule(scheme="bosonic-homogenization", order=qubit.order,
                         entries=tuple(entries), m=qubit.m, n_system=qubit.n_system)


def homogenization_schedule(n_pulses: int, m: int) -> PulseSchedule:
    """Bosonic homogenization schedule for 2^m modes at suppression order N."""
    return substitute_bosonic(qubit_nudd_schedule(n_pulses, m))


# ---------------------------------------------------------------------------
# Toggling-frame sign functions
# ---------------------------------------------------------------------------


def _pulse_overlap(alpha, pulse: Pulse) -> int:
    if isinstance(pulse, int):
        if alpha not in (0, 1):
            raise ValueError("flip schedules pair with a scalar Z2 index")
        return alpha & pulse
    return symplectic_inner_product(alpha, pulse)


def toggling_sign_function(schedule: PulseSchedule, alpha) -> PiecewiseSignFunction:
    """F_alpha: flips exactly at pulses whose index pairs oddly with alpha.

    For indexed schedules ``alpha`` is a multi-index of matching length; for
    flip schedules it is a bit (0 or 1), pairing 1 with every flip pulse.
    """
    flips = [e.delta for e in schedule.entries
             if e.delta < 1.0 and _pulse_overlap(alpha, e.pulse) == 1]
    return PiecewiseSignFunction(tuple(flips))


def _merge_entries(entries: Iterable[PulseEntry], flip_alphabet: bool) -> list[PulseEntry]:
    """Merge pulses at coincident times (instantaneous pulses compose)."""
    merged: list[PulseEntry] = []
    for e in sorted(entries, key=lambda x: x.delta):
        if merged and abs(e.delta - merged[-1].delta) <= MERGE_TOL:
            prev = merged.pop()
            if flip_alphabet:
                parity = (prev.pulse + e.pulse) % 2
                if parity:
                    merged.append(PulseEntry(prev.delta, FLIP))
                continue
            idx, sign = product_index([e.pulse, prev.pulse])
            if all(p == PAIR_I for p in idx) and sign == 1:
                continue
            merged.append(PulseEntry(prev.delta, idx, sign * prev.sign * e.sign))
        else:
            merged.append(e)
    return merged


# ---------------------------------------------------------------------------
# Schedule file format
# ---------------------------------------------------------------------------
#
# One pulse per line: "<delta><TAB><bits>", delta with 17 significant digits.
# For indexed schedules the bits are the index pairs in position order
# (innermost level first), x-bit then z-bit per position, optionally
# prefixed with '-' for a negative merged sign.  Flip schedules use the
# single bit "1".  Header lines: #scheme, #N, #m ("-" for flip schedules),
# plus informational #-lines that readers ignore.


def _pulse_to_bits(pulse: Pulse, sign: int) -> str:
    if isinstance(pulse, int):
        return str(pulse)
    bits = "".join(f"{x}{z}" for x, z in pulse)
    return ("-" + bits) if sign < 0 else bits


def _bits_to_pulse(bits: str) -> tuple[Pulse, int]:
    sign = 1
    if bits.startswith("-"):
        sign = -1
        bits = bits[1:]
    if len(bits) == 1:
        return int(bits), sign
    if len(bits) % 2:
        raise ValueError(f"malformed pulse bits {bits!r}")
    pairs = tuple((int(bits[2 * i]), int(bits[2 * i + 1]))
                  for i in range(len(bits) // 2))
    return pairs, sign


def write_schedule(schedule: PulseSchedule, stream: IO[str]) -> None:
    stream.write(f"#scheme {schedule.scheme}\n")
    stream.write(f"#N {schedule.order}\n")
    stream.write(f"#m {'-' if schedule.m is None else schedule.m}\n")
    if schedule.n_system is not None:
        stream.write(f"#nS {schedule.n_system}\n")
    stream.write("# bits: index pairs innermost-level first, x-bit then z-bit"
                 " per position; flip schedules use the single bit 1\n")
    for e in schedule.entries:
        stream.write(f"{e.delta:.17g}\t{_pulse_to_bits(e.pulse, e.sign)}\n")


def read_schedule(stream: IO[str]) -> PulseSchedule:
    scheme, order, m, n_system = "unknown", 0, None, None
    entries = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if len(parts) != 2:
                continue
            key, value = parts
            if key == "scheme":
                scheme = value
            elif key == "N":
                order = int(value)
            elif key == "m" and value != "-":
                m = int(value)
            elif key == "nS":
                n_system = int(value)
            continue
        delta_str, bits = line.split("\t")
        pulse, sign = _bits_to_pulse(bits)
        entries.append(PulseEntry(float(delta_str), pulse, sign))
    return PulseSchedule(scheme=scheme, order=order, entries=tuple(entries),
                         m=m, n_system=n_system)
