"""Fixed-size linear algebra for 2x2 operators and small square matrices.

Component 0 of every two-vector is the excited state ``|1>`` and component 1
the ground state ``|0>``. :class:`MatN` is generic over its scalar type, so the
same elimination code runs on floats, complex numbers or
:class:`fractions.Fraction` (exact arithmetic on float inputs).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import NegativeEigenvalue, NotHermitian, SingularMatrix

Ket = tuple[complex, complex]

HERMITIAN_TOL = 1e-12
SINGULAR_REL_TOL = 1e-12
DEFAULT_FLOOR = 1e-12


def inner(u: Sequence[complex], v: Sequence[complex]) -> complex:
    """``<u|v>``, conjugate-linear in the first argument."""
    return u[0].conjugate() * v[0] + u[1].conjugate() * v[1]


def norm2(u: Sequence[complex]) -> float:
    return abs(u[0]) ** 2 + abs(u[1]) ** 2


@dataclass(frozen=True)
class Mat2:
    """Immutable 2x2 complex matrix, row-major."""

    e00: complex
    e01: complex
    e10: complex
    e11: complex

    def __post_init__(self) -> None:
        for name in ("e00", "e01", "e10", "e11"):
            z = complex(getattr(self, name))
            if not cmath.isfinite(z):
                raise ValueError("Mat2 entries must be finite")
            object.__setattr__(self, name, z)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]]) -> Mat2:
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> Mat2:
        return cls(1, 0, 0, 1)

    @classmethod
    def zeros(cls) -> Mat2:
        return cls(0, 0, 0, 0)

    @classmethod
    def diag(cls, a: complex, d: complex) -> Mat2:
        return cls(a, 0, 0, d)

    @classmethod
    def outer(cls, u: Sequence[complex], v: Sequence[complex]) -> Mat2:
        """``|u><v|``."""
        cv0, cv1 = v[0].conjugate(), v[1].conjugate()
        return cls(u[0] * cv0, u[0] * cv1, u[1] * cv0, u[1] * cv1)

    def __getitem__(self, idx: tuple[int, int]) -> complex:
        i, j = idx
        return (self.e00, self.e01, self.e10, self.e11)[2 * i + j]

    def rows(self) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
        return ((self.e00, self.e01), (self.e10, self.e11))

    def tolist(self) -> list[list[complex]]:
        return [list(r) for r in self.rows()]

    def __add__(self, other: Mat2) -> Mat2:
        return Mat2(self.e00 + other.e00, self.e01 + other.e01,
                    self.e10 + other.e10, self.e11 + other.e11)

    def __sub__(self, other: Mat2) -> Mat2:
        return Mat2(self.e00 - other.e00, self.e01 - other.e01,
                    self.e10 - other.e10, self.e11 - other.e11)

    def __mul__(self, s: complex) -> Mat2:
        return Mat2(self.e00 * s, self.e01 * s, self.e10 * s, self.e11 * s)

    __rmul__ = __mul__

    def __matmul__(self, other: Any) -> Any:
        if isinstance(other, Mat2):
            return Mat2(
                self.e00 * other.e00 + self.e01 * other.e10,
                self.e00 * other.e01 + self.e01 * other.e11,
                self.e10 * other.e00 + self.e11 * other.e10,
                self.e10 * other.e01 + self.e11 * other.e11,
            )
        v0, v1 = other
        return (self.e00 * v0 + self.e01 * v1, self.e10 * v0 + self.e11 * v1)

    def dagger(self) -> Mat2:
        return Mat2(self.e00.conjugate(), self.e10.conjugate(),
                    self.e01.conjugate(), self.e11.conjugate())

    def trace(self) -> complex:
        return self.e00 + self.e11

    def det(self) -> complex:
        return self.e00 * self.e11 - self.e01 * self.e10

    def max_abs(self) -> float:
        return max(abs(self.e00), abs(self.e01), abs(self.e10), abs(self.e11))

    def max_abs_diff(self, other: Mat2) -> float:
        return (self - other).max_abs()

    def hermitian_residual(self) -> float:
        return self.max_abs_diff(self.dagger())


def mat2_sum(terms: Iterable[Mat2]) -> Mat2:
    acc = [0j, 0j, 0j, 0j]
    for t in terms:
        acc[0] += t.e00
        acc[1] += t.e01
        acc[2] += t.e10
        acc[3] += t.e11
    return Mat2(*acc)


def _unit_phase(v: Ket) -> Ket:
    """Normalize and fix the global phase: first non-negligible entry real positive."""
    big = max(abs(v[0]), abs(v[1]))
    v = (v[0] / big, v[1] / big)  # rescale first so squaring cannot underflow
    n = math.sqrt(norm2(v))
    v = (v[0] / n, v[1] / n)
    lead = v[0] if abs(v[0]) > 1e-15 else v[1]
    ph = lead / abs(lead)
    return (v[0] / ph, v[1] / ph)


def eig_hermitian_2x2(m: Mat2) -> tuple[tuple[float, float], tuple[Ket, Ket]]:
    """Eigen-decomposition of a Hermitian 2x2 matrix.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors.

    Raises
    ------
    NotHermitian
        If ``max|m - m^dagger| > 1e-12``.
    """
    res = m.hermitian_residual()
    if res > HERMITIAN_TOL:
        raise NotHermitian(f"matrix is not Hermitian (residual {res:.3e})")
    a, d = m.e00.real, m.e11.real
    b = (m.e01 + m.e10.conjugate()) / 2
    half_gap = (a - d) / 2
    r = math.hypot(half_gap, abs(b))
    mean = (a + d) / 2
    lo, hi = mean - r, mean + r
    if abs(b) == 0.0:
        if a <= d:
            return (a, d), ((1 + 0j, 0j), (0j, 1 + 0j))
        return (d, a), ((0j, 1 + 0j), (1 + 0j, 0j))
    # two candidate eigenvectors for `hi`; keep the larger to avoid cancellation
    c1 = (b, complex(hi - a))
    c2 = (complex(hi - d), b.conjugate())
    v_hi = c1 if max(map(abs, c1)) >= max(map(abs, c2)) else c2
    v_hi = _unit_phase(v_hi)
    v_lo = _unit_phase((-v_hi[1].conjugate(), v_hi[0].conjugate()))
    return (lo, hi), (v_lo, v_hi)


def _psd_function(m: Mat2, fn, floor: float) -> tuple[Mat2, int]:
    vals, vecs = eig_hermitian_2x2(m)
    if vals[0] < -1e-9:
        raise NegativeEigenvalue(f"eigenvalue {vals[0]:.3e} below -1e-9")
    vals = tuple(max(v, 0.0) for v in vals)
    cutoff = floor * max(vals[1], 0.0)
    out = Mat2.zeros()
    rank = 0
    for lam, v in zip(vals, vecs):
        if lam > cutoff and lam > 0.0:
            out = out + Mat2.outer(v, v) * fn(lam)
            rank += 1
    return out, rank


def psd_inv_sqrt(m: Mat2, floor: float = DEFAULT_FLOOR) -> Mat2:
    """Generalized inverse square root of a PSD matrix.

    Eigenvalues at or below ``floor * lambda_max`` are mapped to zero, so the
    result is the inverse square root on the support and zero on the kernel.
    """
    return _psd_function(m, lambda lam: lam ** -0.5, floor)[0]


def psd_sqrt(m: Mat2, floor: float = DEFAULT_FLOOR) -> Mat2:
    return _psd_function(m, math.sqrt, floor)[0]


def psd_rank(m: Mat2, floor: float = DEFAULT_FLOOR) -> int:
    """Number of eigenvalues above ``floor * lambda_max``."""
    return _psd_function(m, lambda lam: 1.0, floor)[1]


def support_projector(m: Mat2, floor: float = DEFAULT_FLOOR) -> Mat2:
    return _psd_function(m, lambda lam: 1.0, floor)[0]


@dataclass(frozen=True)
class MatN:
    """Small square matrix (n <= 4) over an arbitrary numeric field."""

    entries: tuple[tuple[Any, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.entries)
        if not 1 <= n <= 4:
            raise ValueError(f"MatN supports sizes up to 4, got {n}")
        if any(len(r) != n for r in self.entries):
            raise ValueError("MatN must be square")
        object.__setattr__(self, "entries", tuple(tuple(r) for r in self.entries))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Any]]) -> MatN:
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, n: int, one: Any = 1) -> MatN:
        zero = one - one
        return cls(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def diag(cls, values: Sequence[Any]) -> MatN:
        n = len(values)
        zero = values[0] - values[0]
        return cls(tuple(tuple(values[i] if i == j else zero for j in range(n))
                         for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, idx: tuple[int, int]) -> Any:
        i, j = idx
        return self.entries[i][j]

    def __matmul__(self, other: Any) -> Any:
        n = self.n
        if isinstance(other, MatN):
            return MatN(tuple(
                tuple(sum((self.entries[i][k] * other.entries[k][j] for k in range(n)),
                          start=self.entries[i][0] * 0)
                      for j in range(n))
                for i in range(n)))
        return tuple(sum((self.entries[i][k] * other[k] for k in range(n)),
                         start=self.entries[i][0] * 0)
                     for i in range(n))

    def transpose(self) -> MatN:
        return MatN(tuple(zip(*self.entries)))

    def map(self, fn) -> MatN:
        return MatN(tuple(tuple(fn(x) for x in r) for r in self.entries))

    def to_exact(self) -> MatN:
        """Exact rational copy of a real matrix (floats converted without rounding)."""
        return self.map(Fraction)

    def to_float(self) -> MatN:
        return self.map(float)

    def tolist(self) -> list[list[Any]]:
        return [list(r) for r in self.entries]

    def max_abs(self) -> float:
        return max(abs(x) for r in self.entries for x in r)

    def max_abs_diff(self, other: MatN) -> float:
        return max(abs(a - b) for ra, rb in zip(self.entries, other.entries)
                   for a, b in zip(ra, rb))

    def inf_norm(self) -> Any:
        return max(sum(abs(x) for x in r) for r in self.entries)

    def total(self) -> Any:
        return sum((x for r in self.entries for x in r), start=self.entries[0][0] * 0)

    def col_sums(self) -> tuple[Any, ...]:
        return tuple(sum(col, start=col[0] * 0) for col in zip(*self.entries))

    def row_sums(self) -> tuple[Any, ...]:
        return tuple(sum(r, start=r[0] * 0) for r in self.entries)


def invert(m: MatN, rel_tol: float = SINGULAR_REL_TOL) -> MatN:
    """Gauss-Jordan inverse with partial pivoting.

    Works over any field the entries belong to; with ``Fraction`` entries the
    result is exact.

    Raises
    ------
    SingularMatrix
        When a pivot is below ``rel_tol`` times the largest entry of ``m``.
    """
    n = m.n
    scale = m.max_abs()
    if scale == 0:
        raise SingularMatrix("zero matrix has no inverse")
    one = m.entries[0][0] * 0 + 1
    zero = one - one
    a = [list(r) + [one if i == j else zero for j in range(n)]
         for i, r in enumerate(m.entries)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[piv][col]) <= rel_tol * scale:
            raise SingularMatrix(
                f"pivot {float(abs(a[piv][col])):.3e} in column {col} below tolerance")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return MatN(tuple(tuple(r[n:]) for r in a))
