"""Randomized low-discrepancy point sets.

Two families are provided: randomly shifted rank-1 lattices and base-2
Sobol' nets randomized by a random linear scramble (lower-triangular bit
matrices with unit diagonal) plus a digital shift. All randomness is keyed
by (seed, stream_id) so that replicates regenerate bit-identically no matter
in which order or on how many threads they are produced.

Point sets are plain float64 arrays of shape (n, s) with every coordinate in
[0, 1). Coordinates carry 53 fraction bits, so every representable double in
[0, 1) is reachable.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _tables
from .errors import InternalError

MAX_BITS = 53

# Domain tags keep shift / scramble / digital-shift randomness on disjoint
# SeedSequence spawn keys for the same user seed.
_DOMAIN_SHIFT = 1
_DOMAIN_SCRAMBLE = 2
_DOMAIN_DIGITAL = 3


def keyed_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for a (seed, purpose, stream...) tuple."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def assert_unit_cube(points: np.ndarray) -> None:
    assert points.ndim == 2
    assert np.all(points >= 0.0) and np.all(points < 1.0), "coordinate outside [0,1)"


# ---------------------------------------------------------------------------
# Rank-1 lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratingVector:
    """Rank-1 lattice parameters: component vector z and point count N.

    Components must be coprime to N (full-period projections); pass
    require_coprime=False to study degenerate rules whose projections
    collapse, which the spectral variance identities still cover.
    """

    z: tuple[int, ...]
    n_points: int
    require_coprime: bool = True

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("lattice needs N >= 1 points")
        for j, zj in enumerate(self.z, start=1):
            if self.n_points > 1 and not 1 <= zj < self.n_points:
                raise ValueError(f"z_{j} = {zj} outside [1, N)")
            if self.require_coprime and math.gcd(zj, self.n_points) != 1:
                raise ValueError(f"gcd(z_{j} = {zj}, N = {self.n_points}) != 1")

    @property
    def dim(self) -> int:
        return len(self.z)


def lattice_points(gen: GeneratingVector, shift: np.ndarray) -> np.ndarray:
    """Shifted lattice t_i = (i z / N + shift) mod 1, i = 0..N-1, in index order."""
    shift = np.asarray(shift, dtype=np.float64)
    if shift.shape != (gen.dim,):
        raise ValueError(f"shift has dim {shift.shape}, lattice has dim {gen.dim}")
    if np.any(shift < 0.0) or np.any(shift >= 1.0):
        raise ValueError("shift components must lie in [0, 1)")
    n = gen.n_points
    i = np.arange(n, dtype=np.uint64)
    pts = np.empty((n, gen.dim), dtype=np.float64)
    for j, zj in enumerate(gen.z):
        frac = ((i * np.uint64(zj)) % np.uint64(n)).astype(np.float64) / n
        x = frac + shift[j]
        pts[:, j] = np.where(x >= 1.0, x - 1.0, x)
    assert_unit_cube(pts)
    return pts


def random_shift(seed: int, stream_id: int, s: int) -> np.ndarray:
    """Uniform shift vector in [0,1)^s, a pure function of (seed, stream_id)."""
    if s < 1:
        raise ValueError("dimension must be >= 1")
    return keyed_rng(seed, _DOMAIN_SHIFT, stream_id).random(s)


# ---------------------------------------------------------------------------
# Sobol' nets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SobolParams:
    """Primitive polynomials and initial direction values for dimensions >= 2.

    ``rows[k]`` holds (degree, a, m_init) for dimension k + 2; dimension 1 is
    always the van der Corput identity matrix. ``a`` encodes the inner
    polynomial coefficients a_1..a_{degree-1} as a binary number, a_1 first.
    """

    rows: tuple[tuple[int, int, tuple[int, ...]], ...]
    max_bits: int = MAX_BITS

    @property
    def dims_available(self) -> int:
        return len(self.rows) + 1

    def direction_vectors(self, s: int) -> np.ndarray:
        """Direction numbers as max_bits-bit integers, shape (s, max_bits)."""
        if s < 1:
            raise ValueError("dimension must be >= 1")
        if s > self.dims_available:
            raise ValueError(
                f"dimension {s} requested but direction numbers cover only "
                f"{self.dims_available}; supply a larger table"
            )
        return _direction_vectors_cached(self.rows[: s - 1], self.max_bits, s)


@lru_cache(maxsize=32)
def _direction_vectors_cached(rows, max_bits, s):
    v = np.zeros((s, max_bits), dtype=np.uint64)
    # dimension 1: identity generating matrix (van der Corput)
    v[0] = [1 << (max_bits - c - 1) for c in range(max_bits)]
    for j, (degree, a, m_init) in enumerate(rows, start=1):
        m = list(m_init)
        for i in range(degree, max_bits):
            new = m[i - degree] ^ (m[i - degree] << degree)
            for k in range(1, degree):
                if (a >> (degree - 1 - k)) & 1:
                    new ^= m[i - k] << k
            m.append(new)
        v[j] = [m[c] << (max_bits - c - 1) for c in range(max_bits)]
    v.setflags(write=False)
    return v


def parse_direction_numbers(text_stream, max_bits: int = MAX_BITS) -> SobolParams:
    """Parse the published ``d s a m_1 .. m_s`` direction-number format.

    Accepts a string or a text file object. A leading header line (as in the
    published files) and blank lines are skipped. Dimension 1 is synthesized.
    """
    if isinstance(text_stream, str):
        text_stream = io.StringIO(text_stream)
    rows = []
    expected_dim = 2
    for lineno, line in enumerate(text_stream, start=1):
        fields = line.split()
        if not fields:
            continue
        if not fields[0].lstrip("+-").isdigit():
            if lineno == 1:
                continue  # column header
            raise ValueError(f"row {lineno}: non-numeric dimension field {fields[0]!r}")
        try:
            values = [int(f) for f in fields]
        except ValueError as exc:
            raise ValueError(f"row {lineno}: {exc}") from None
        if len(values) < 3:
            raise ValueError(f"row {lineno}: expected 'd s a m_i' fields, got {len(values)}")
        d, degree, a = values[:3]
        m_init = values[3:]
        if d != expected_dim:
            raise ValueError(f"row {lineno}: dimension {d}, expected {expected_dim}")
        if degree < 1:
            raise ValueError(f"row {lineno}: degree {degree} < 1")
        if len(m_init) != degree:
            raise ValueError(
                f"row {lineno}: degree {degree} row carries {len(m_init)} initial values"
            )
        if not 0 <= a < 1 << max(degree - 1, 0):
            raise ValueError(f"row {lineno}: coefficient a = {a} outside [0, 2^(s-1))")
        for i, mi in enumerate(m_init, start=1):
            if mi % 2 == 0:
                raise ValueError(f"row {lineno}: m_{i} = {mi} is even")
            if not 0 < mi < 1 << i:
                raise ValueError(f"row {lineno}: m_{i} = {mi} not in (0, 2^{i})")
        rows.append((degree, a, tuple(m_init)))
        expected_dim += 1
    return SobolParams(rows=tuple(rows), max_bits=max_bits)


def default_sobol_params() -> SobolParams:
    """Embedded table covering dimensions 1..16."""
    return parse_direction_numbers(_tables.DIRECTION_NUMBER_TABLE)


@dataclass(frozen=True)
class ScrambleState:
    """Per-dimension random linear scramble plus digital shift.

    ``columns[j, c]`` is column c+1 of the lower-triangular scramble matrix
    for axis j, packed as a max_bits-bit integer whose bit (max_bits - 1 - i)
    is row i+1. The unit diagonal makes every matrix invertible, so the
    scramble permutes each dyadic digit grid. ``matrix_scramble=False`` keeps
    the identity matrices and applies only the digital shift.
    """

    columns: np.ndarray
    shifts: np.ndarray
    seed: int
    stream_id: int
    max_bits: int = MAX_BITS

    @property
    def dim(self) -> int:
        return len(self.shifts)

    def apply_to_vectors(self, vectors: np.ndarray) -> np.ndarray:
        """Left-multiply each direction number by the axis scramble matrix."""
        s, nbits = vectors.shape
        if s > self.dim:
            raise ValueError(f"scramble covers {self.dim} dims, vectors need {s}")
        out = np.zeros_like(vectors)
        for digit in range(self.max_bits):
            bit = (vectors >> np.uint64(self.max_bits - 1 - digit)) & np.uint64(1)
            out ^= np.where(bit == 1, self.columns[:s, digit][:, np.newaxis], np.uint64(0))
        return out


def _scramble_state(seed, stream_id, s, max_bits, matrix_scramble):
    if s < 1:
        raise ValueError("dimension must be >= 1")
    diag = np.uint64(1) << np.arange(max_bits - 1, -1, -1, dtype=np.uint64)
    below = diag - np.uint64(1)
    columns = np.zeros((s, max_bits), dtype=np.uint64)
    shifts = np.zeros(s, dtype=np.uint64)
    domain = _DOMAIN_SCRAMBLE if matrix_scramble else _DOMAIN_DIGITAL
    for axis in range(s):
        rng = keyed_rng(seed, domain, stream_id, axis)
        if matrix_scramble:
            rand = rng.integers(0, 1 << max_bits, size=max_bits, dtype=np.uint64)
            columns[axis] = diag | (rand & below)
        else:
            columns[axis] = diag
        shifts[axis] = rng.integers(0, 1 << max_bits, dtype=np.uint64)
    columns.setflags(write=False)
    shifts.setflags(write=False)
    return ScrambleState(columns=columns, shifts=shifts, seed=seed,
                         stream_id=stream_id, max_bits=max_bits)


def linear_scramble(seed: int, stream_id: int, s: int, max_bits: int = MAX_BITS) -> ScrambleState:
    """Random linear scramble + digital shift, deterministic in (seed, stream_id).

    Axis states depend only on (seed, stream_id, axis), so extending the
    dimension reuses the states of the shared axes.
    """
    return _scramble_state(seed, stream_id, s, max_bits, matrix_scramble=True)


def digital_shift_only(seed: int, stream_id: int, s: int, max_bits: int = MAX_BITS) -> ScrambleState:
    """Digital shift with identity matrices (used by reference oracles)."""
    return _scramble_state(seed, stream_id, s, max_bits, matrix_scramble=False)


def sobol_integers(params: SobolParams, m: int, s: int,
                   scramble: ScrambleState | None = None) -> np.ndarray:
    """The 2^m scrambled Sobol' points as max_bits-bit integers, shape (2^m, s).

    Natural index order: point i is the XOR of direction numbers selected by
    the binary digits of i, so it is a pure function of i.
    """
    if m < 0 or m > 48:
        raise ValueError(f"2^{m} points not representable in the integer pipeline")
    v = params.direction_vectors(s)
    if scramble is not None:
        if scramble.max_bits != params.max_bits:
            raise ValueError("scramble and params disagree on max_bits")
        v = scramble.apply_to_vectors(v)
    n = 1 << m
    y = np.zeros((n, s), dtype=np.uint64)
    for c in range(m):
        half = 1 << c
        y[half:2 * half] = y[:half] ^ v[:, c]
    if scramble is not None:
        y ^= scramble.shifts[np.newaxis, :s]
    return y


def sobol_points(params: SobolParams, m: int, s: int,
                 scramble: ScrambleState | None = None) -> np.ndarray:
    """2^m Sobol' points in [0,1)^s, optionally scrambled and digitally shifted."""
    y = sobol_integers(params, m, s, scramble)
    pts = y.astype(np.float64) * 2.0 ** -params.max_bits
    assert_unit_cube(pts)
    return pts


# ---------------------------------------------------------------------------
# (t, m, s)-net verification
# ---------------------------------------------------------------------------

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def verify_net_property(points: np.ndarray, m: int, s: int) -> int:
    """Smallest t such that the 2^m points form a (t, m, s)-net in base 2.

    Checks, for t = 0 upward, that every elementary interval of volume
    2^(t-m) contains exactly 2^t points, by exhaustive counting over all
    interval shapes. t = m always passes (the only volume-1 interval is the
    cube itself), so that return value means the points carry no nontrivial
    equidistribution at this m; generic i.i.d. points land there.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.shape != (1 << m, s):
        raise ValueError(f"need shape ({1 << m}, {s}) point array, got {points.shape}")
    assert_unit_cube(points)
    for t in range(m + 1):
        q = m - t
        want = 1 << t
        balanced = True
        for shape in _compositions(q, s):
            cells = np.zeros(len(points), dtype=np.int64)
            for j, lj in enumerate(shape):
                idx = np.floor(points[:, j] * (1 << lj)).astype(np.int64)
                cells = (cells << lj) | idx
            counts = np.bincount(cells, minlength=1 << q)
            if not np.all(counts == want):
                balanced = False
                break
        if balanced:
            return t
    raise InternalError("t = m must always pass; points violated a checked invariant")
