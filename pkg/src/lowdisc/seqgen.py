"""Deterministic low-discrepancy constructions.

Point sets are returned as read-only ``(n, d)`` float64 arrays with every
coordinate in ``[0, 1)``.  Row ``i`` of ``lattice_points(spec, n, start)``
is the point with index ``start + i``, so streams can be extended without
recomputing earlier points (the same holds for digital and Halton points).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PRECISION = 52
MAX_INDEX = 1 << PRECISION
DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
DEFAULT_DIRECTION_FILE = os.path.join(DATA_DIR, "sobol_directions.txt")
DEFAULT_LATTICE_FILE = os.path.join(DATA_DIR, "lattice_default.txt")

PointSet = np.ndarray


def _freeze(a: np.ndarray) -> PointSet:
    a.flags.writeable = False
    return a


def first_primes(d: int) -> tuple[int, ...]:
    primes: list[int] = []
    k = 2
    while len(primes) < d:
        if all(k % p for p in primes if p * p <= k):
            primes.append(k)
        k += 1
    return tuple(primes)


def _is_prime(b: int) -> bool:
    return b >= 2 and all(b % p for p in range(2, int(b ** 0.5) + 1))


def _indices(start: int, n: int) -> np.ndarray:
    if start < 0 or n < 0:
        raise ValueError("start and n must be nonnegative")
    if start + n > MAX_INDEX:
        raise ValueError(f"indices beyond 2^{PRECISION} are not supported")
    return np.arange(start, start + n, dtype=np.uint64)


# --------------------------------------------------------------------------
# radical inverse

def van_der_corput(i: int, b: int = 2) -> float:
    """Radical inverse of ``i`` in base ``b``.

    >>> van_der_corput(6, 2)
    0.375
    """
    if b < 2:
        raise ValueError("base must be at least 2")
    if i < 0 or i >= MAX_INDEX:
        raise ValueError(f"index must lie in [0, 2^{PRECISION})")
    num, den = 0, 1
    while i:
        i, digit = divmod(i, b)
        num = num * b + digit
        den *= b
    # int / int is correctly rounded
    return num / den


def _digits(idx: np.ndarray, b: int, depth: int) -> np.ndarray:
    out = np.empty((idx.size, depth), dtype=np.int64)
    q = idx.copy()
    for k in range(depth):
        out[:, k] = q % b
        q //= b
    return out


def _digit_count(top: int, b: int) -> int:
    k = 0
    while top:
        top //= b
        k += 1
    return k


def _below_one(x: np.ndarray) -> np.ndarray:
    return np.minimum(x, np.nextafter(1.0, 0.0))


def radical_inverse(idx: np.ndarray, b: int, perms: Sequence[Sequence[int]] | None = None) -> np.ndarray:
    """Vectorised (generalised) radical inverse.

    ``perms[r]`` permutes the digit in position ``r``; positions beyond
    ``len(perms)`` are ignored, so a permuted inverse is truncated at that
    depth.  Without ``perms`` the digit expansion of each index is used in
    full.
    """
    idx = np.asarray(idx, dtype=np.uint64)
    if idx.size == 0:
        return np.zeros(0)
    if perms is None:
        if b == 2:
            return _bit_reverse(idx)
        depth = _digit_count(int(idx.max()), b)
        if depth == 0:
            return np.zeros(idx.size)
        dig = _digits(idx, b, depth)
    else:
        depth = len(perms)
        table = np.asarray(perms, dtype=np.int64)
        dig = _digits(idx, b, depth)
        dig = table[np.arange(depth)[None, :], dig]
    if b ** depth < (1 << 63):
        num = np.zeros(idx.size, dtype=np.uint64)
        for k in range(depth):
            num = num * np.uint64(b) + dig[:, k].astype(np.uint64)
        return _below_one(num.astype(np.float64) / float(b ** depth))
    v = np.zeros(idx.size)
    for k in range(depth - 1, -1, -1):
        v = (dig[:, k] + v) / b
    return _below_one(v)


def _bit_reverse(idx: np.ndarray) -> np.ndarray:
    out = np.zeros(idx.size, dtype=np.uint64)
    q = idx.copy()
    for _ in range(PRECISION):
        out = (out << np.uint64(1)) | (q & np.uint64(1))
        q >>= np.uint64(1)
    return out.astype(np.float64) * 2.0 ** -PRECISION


# --------------------------------------------------------------------------
# rank-1 lattices

@dataclass(frozen=True)
class LatticeSpec:
    """Rank-1 lattice generating vector ``h`` in base ``b``.

    Up to ``b**m_max`` points may be drawn.  For ``b == 2`` every component
    must be odd so that each power-of-two prefix is a full lattice.
    """

    h: tuple[int, ...]
    b: int = 2
    m_max: int = 32

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(int(v) for v in self.h))
        if not self.h:
            raise ValueError("empty generating vector")
        if self.b < 2:
            raise ValueError("base must be at least 2")
        if any(v < 1 for v in self.h):
            raise ValueError("generating vector components must be >= 1")
        if self.h[0] != 1:
            raise ValueError("first generating vector component must be 1")
        if self.b == 2 and any(v % 2 == 0 for v in self.h):
            raise ValueError("base-2 lattices need odd generating vector components")
        limit = PRECISION if self.b == 2 else 32
        if self.m_max < 0 or self.b ** self.m_max > 2 ** limit:
            raise ValueError("b**m_max is too large")

    @property
    def d(self) -> int:
        return len(self.h)


def lattice_points(spec: LatticeSpec, n: int, start: int = 0, order: str = "extensible") -> PointSet:
    """Points ``phi_b(i) * h mod 1`` for ``i = start .. start + n - 1``.

    With ``order="natural"`` the points are ``i * h / n mod 1`` for
    ``i = 0 .. n - 1`` instead (``start`` must then be 0).
    """
    h = np.array(spec.h, dtype=np.uint64)
    if order == "natural":
        if start:
            raise ValueError("natural order has no stream offset")
        if n < 1:
            raise ValueError("natural-order lattices need n >= 1")
        if n > 2 ** 32:
            raise ValueError("n too large for natural order")
        i = np.arange(n, dtype=np.uint64)
        val = (i[:, None] * (h % np.uint64(n))[None, :]) % np.uint64(n)
        return _freeze(val.astype(np.float64) / n)
    if order != "extensible":
        raise ValueError(f"unknown lattice order {order!r}")
    big = spec.b ** spec.m_max
    if start + n > big:
        raise ValueError(f"at most {spec.b}^{spec.m_max} lattice points are available")
    idx = _indices(start, n)
    if spec.b == 2:
        rev = np.zeros(idx.size, dtype=np.uint64)
        q = idx.copy()
        for _ in range(spec.m_max):
            rev = (rev << np.uint64(1)) | (q & np.uint64(1))
            q >>= np.uint64(1)
    else:
        dig = _digits(idx, spec.b, spec.m_max)
        rev = np.zeros(idx.size, dtype=np.uint64)
        for k in range(spec.m_max):
            rev = rev * np.uint64(spec.b) + dig[:, k].astype(np.uint64)
    B = np.uint64(big)
    hm = h % B
    # base 2: uint64 wrap-around is harmless because 2^m_max divides 2^64
    val = (rev[:, None] * hm[None, :]) % B
    return _freeze(val.astype(np.float64) / float(big))


def read_lattice_file(path: str = DEFAULT_LATTICE_FILE) -> tuple[int, ...]:
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(int(line.split()[-1]))
    return tuple(values)


def default_lattice_spec(d: int, m_max: int = 32) -> LatticeSpec:
    """Bundled base-2 generating vector truncated to ``d`` components."""
    h = read_lattice_file()
    if d > len(h):
        raise ValueError(f"bundled lattice vector covers only d <= {len(h)}")
    return LatticeSpec(h[:d], 2, m_max)


# --------------------------------------------------------------------------
# base-2 digital nets

def xor_unit(a: float, b: float, M: int = PRECISION) -> float:
    """Digitwise exclusive or of two numbers in [0, 1) with ``M`` bits."""
    scale = float(1 << M)
    ia, ib = int(a * scale), int(b * scale)
    if ia / scale != a or ib / scale != b:
        raise ValueError(f"operands need at most {M} binary digits")
    return (ia ^ ib) / scale


@dataclass(frozen=True)
class DigitalSpec:
    """Base-2 generating matrices packed as column integers.

    ``columns[j][c]`` is column ``c`` (0-based) of the matrix for dimension
    ``j``; bit ``M - l`` of that integer is the row-``l`` entry (row 1 is the
    most significant binary digit of the coordinate).
    """

    columns: tuple[tuple[int, ...], ...]
    M: int = PRECISION

    def __post_init__(self):
        cols = tuple(tuple(int(c) for c in row) for row in self.columns)
        object.__setattr__(self, "columns", cols)
        if not cols:
            raise ValueError("no dimensions")
        if not 1 <= self.M <= PRECISION:
            raise ValueError(f"M must be in [1, {PRECISION}]")
        widths = {len(row) for row in cols}
        if len(widths) != 1:
            raise ValueError("all dimensions need the same number of columns")
        top = 1 << self.M
        if any(c < 0 or c >= top for row in cols for c in row):
            raise ValueError("column integer out of range")

    @property
    def d(self) -> int:
        return len(self.columns)

    @property
    def N(self) -> int:
        return len(self.columns[0])

    def array(self) -> np.ndarray:
        return np.array(self.columns, dtype=np.uint64).reshape(self.d, self.N)

    def matrix(self, j: int) -> np.ndarray:
        """Dense ``M x N`` 0/1 matrix of dimension ``j`` (0-based)."""
        col = np.array(self.columns[j], dtype=np.uint64)
        shifts = np.arange(self.M - 1, -1, -1, dtype=np.uint64)
        return ((col[None, :] >> shifts[:, None]) & np.uint64(1)).astype(np.uint8)

    @classmethod
    def from_matrices(cls, matrices: Iterable[np.ndarray], M: int | None = None) -> "DigitalSpec":
        mats = [np.asarray(C, dtype=np.int64) % 2 for C in matrices]
        rows = M if M is not None else mats[0].shape[0]
        cols = []
        for C in mats:
            if C.shape[0] > rows:
                raise ValueError("matrix has more rows than M")
            weights = [1 << (rows - 1 - r) for r in range(C.shape[0])]
            cols.append(tuple(int(sum(w for w, bit in zip(weights, C[:, c]) if bit)) for c in range(C.shape[1])))
        return cls(tuple(cols), rows)

    def project(self, dims: Sequence[int]) -> "DigitalSpec":
        return DigitalSpec(tuple(self.columns[j] for j in dims), self.M)


def digital_points(spec: DigitalSpec, n: int, start: int = 0, method: str = "xor") -> PointSet:
    """Points of the digital sequence with indices ``start .. start + n - 1``.

    ``method="xor"`` combines the generating points ``x_1, x_2, x_4, ...``
    by digitwise exclusive or; ``method="matrix"`` multiplies each
    generating matrix by the binary digit vector of the index modulo 2.
    Both give bit-identical output.
    """
    if start + n > (1 << spec.N):
        raise ValueError(f"at most 2^{spec.N} points are available")
    idx = _indices(start, n)
    scale = 2.0 ** -spec.M
    if method == "xor":
        cols = spec.array()
        acc = np.zeros((n, spec.d), dtype=np.uint64)
        top = start + n - 1
        for k in range(spec.N):
            if top >> k == 0:
                break
            bit = (idx >> np.uint64(k)) & np.uint64(1)
            acc ^= bit[:, None] * cols[:, k][None, :]
        return _freeze(acc.astype(np.float64) * scale)
    if method == "matrix":
        ibits = ((idx[:, None] >> np.arange(spec.N, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(np.int64)
        weights = 2.0 ** -np.arange(1, spec.M + 1)
        out = np.empty((n, spec.d))
        for j in range(spec.d):
            C = spec.matrix(j).astype(np.int64)
            digits = (ibits @ C.T) % 2
            out[:, j] = digits @ weights
        return _freeze(out)
    raise ValueError(f"unknown method {method!r}")


def read_direction_file(path: str = DEFAULT_DIRECTION_FILE) -> list[tuple[int, int, int, tuple[int, ...]]]:
    """Parse ``j s a m_1 ... m_s`` lines into a list of tuples."""
    entries = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                fields = [int(tok) for tok in line.split()]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer field") from None
            if len(fields) < 4:
                raise ValueError(f"{path}:{lineno}: expected 'j s a m_1 ... m_s'")
            j, s, a, m = fields[0], fields[1], fields[2], tuple(fields[3:])
            if s < 1 or len(m) != s:
                raise ValueError(f"{path}:{lineno}: degree {s} but {len(m)} direction integers")
            if a < 0 or a >= 1 << max(s - 1, 0):
                raise ValueError(f"{path}:{lineno}: polynomial coefficient {a} out of range")
            for k, mk in enumerate(m, 1):
                if mk % 2 == 0 or mk >= 1 << k:
                    raise ValueError(f"{path}:{lineno}: m_{k}={mk} must be odd and < 2^{k}")
            expected = entries[-1][0] + 1 if entries else 2
            if j != expected:
                raise ValueError(f"{path}:{lineno}: expected dimension {expected}, got {j}")
            entries.append((j, s, a, m))
    return entries


def _direction_integers(s: int, a: int, m: Sequence[int], N: int) -> list[int]:
    v = list(m[:N])
    for k in range(s, N):
        new = v[k - s] ^ (v[k - s] << s)
        for r in range(1, s):
            if (a >> (s - 1 - r)) & 1:
                new ^= v[k - r] << r
        v.append(new)
    return v


def sobol_spec(d: int, direction_file: str | None = None, N: int = 32, M: int = PRECISION) -> DigitalSpec:
    """Sobol' generating matrices for ``d`` dimensions.

    Dimension 1 is the identity matrix; dimensions 2..d come from the
    direction-number file (the bundled one by default).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 1 <= N <= M:
        raise ValueError("need 1 <= N <= M")
    entries = read_direction_file(direction_file or DEFAULT_DIRECTION_FILE) if d > 1 else []
    if len(entries) < d - 1:
        raise ValueError(f"direction file covers only d <= {len(entries) + 1}")
    cols = [tuple(1 << (M - k) for k in range(1, N + 1))]
    for _, s, a, m in entries[: d - 1]:
        v = _direction_integers(s, a, m, N)
        cols.append(tuple(vk << (M - k) for k, vk in enumerate(v, 1)))
    return DigitalSpec(tuple(cols), M)


def write_matrix_file(spec: DigitalSpec, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"{spec.d} {spec.M} {spec.N}\n")
        for row in spec.columns:
            fh.write(" ".join(str(c) for c in row) + "\n")


def read_matrix_file(path: str) -> DigitalSpec:
    """Read a generating-matrix file: ``d M N`` then ``d`` rows of ``N`` integers."""
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    try:
        d, M, N = (int(tok) for tok in lines[0].split())
        rows = [tuple(int(tok) for tok in ln.split()) for ln in lines[1:]]
    except (ValueError, IndexError):
        raise ValueError(f"{path}: malformed generating-matrix file") from None
    if len(rows) != d or any(len(r) != N for r in rows):
        raise ValueError(f"{path}: expected {d} rows of {N} columns")
    return DigitalSpec(tuple(rows), M)


# --------------------------------------------------------------------------
# Halton, Hammersley, grids

@dataclass(frozen=True)
class HaltonSpec:
    """Halton bases with optional per-digit permutations.

    ``permutations[j][r]`` is the permutation applied to digit ``r`` of
    coordinate ``j``.
    """

    bases: tuple[int, ...]
    permutations: tuple[tuple[tuple[int, ...], ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(int(b) for b in self.bases))
        if not self.bases:
            raise ValueError("no bases")
        if len(set(self.bases)) != len(self.bases):
            raise ValueError("bases must be distinct")
        if not all(_is_prime(b) for b in self.bases):
            raise ValueError("bases must be prime")
        if self.permutations is not None:
            perms = tuple(tuple(tuple(int(v) for v in p) for p in dim) for dim in self.permutations)
            object.__setattr__(self, "permutations", perms)
            if len(perms) != len(self.bases):
                raise ValueError("one permutation list per dimension required")
            for b, dim in zip(self.bases, perms):
                for p in dim:
                    if sorted(p) != list(range(b)):
                        raise ValueError(f"not a permutation of 0..{b - 1}: {p}")

    @classmethod
    def first(cls, d: int) -> "HaltonSpec":
        return cls(first_primes(d))

    @property
    def d(self) -> int:
        return len(self.bases)


def halton_points(spec: HaltonSpec, n: int, start: int = 0) -> PointSet:
    idx = _indices(start, n)
    out = np.empty((n, spec.d))
    for j, b in enumerate(spec.bases):
        perms = spec.permutations[j] if spec.permutations is not None else None
        out[:, j] = radical_inverse(idx, b, perms)
    return _freeze(out)


def hammersley_points(spec: HaltonSpec, n: int) -> PointSet:
    """``(i/n, phi_b1(i), ..., phi_bd(i))`` for ``i < n``; dimension ``d + 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tail = halton_points(spec, n)
    out = np.empty((n, spec.d + 1))
    out[:, 0] = np.arange(n) / n
    out[:, 1:] = tail
    return _freeze(out)


def grid_points(m: int, d: int) -> PointSet:
    """Tensor midpoint grid ``{(2k+1)/(2m)}^d`` with ``m**d`` points."""
    ticks = (2 * np.arange(m) + 1) / (2 * m)
    mesh = np.meshgrid(*([ticks] * d), indexing="ij")
    return _freeze(np.stack([g.ravel() for g in mesh], axis=1))
