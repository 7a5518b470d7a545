"""Purity of the post-measurement state and its constrained minimum.

The purity is the bilinear form ``sum_mn |C_mn|^2 w_m w_n`` on the probability
simplex, with ``C_mn = <phi_m|phi_n>``. Its stationary point under
``sum w = 1`` is

    w_ext = (column sums of C^-1) / (sum of all entries of C^-1)
    P_min = 1 / (sum of all entries of C^-1)

Overlaps are computed exactly (as fractions) from the floating-point
amplitudes and inverted exactly, so ``P_min`` stays accurate even when the
overlap matrix is badly conditioned.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .basis import EulerAngles, MeasurementSet, StateVector
from .errors import NotOnSimplex, SingularMatrix, SingularOverlap, Unattainable
from .preparation import ThermalParams, coherence_of, mixture, probabilities_from_polar, state_purity
from .smallmat import MatN, invert

FEASIBILITY_TOL = 1e-10
SIMPLEX_TOL = 1e-10
MAX_CONDITION = 1e12


def _exact_inner(u: StateVector, v: StateVector) -> tuple[Fraction, Fraction]:
    """Real and imaginary parts of <u|v>, exact in the float amplitudes."""
    re = Fraction(0)
    im = Fraction(0)
    for a, b in ((u.c1, v.c1), (u.c0, v.c0)):
        ar, ai, br, bi = (Fraction(a.real), Fraction(a.imag),
                          Fraction(b.real), Fraction(b.imag))
        re += ar * br + ai * bi
        im += ar * bi - ai * br
    return re, im


@dataclass(frozen=True)
class OverlapMatrix:
    """Squared overlaps ``|<phi_m|phi_n>|^2``; ``exact`` holds the rational values."""

    exact: MatN
    c2: MatN = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c2", self.exact.to_float())
        n = self.exact.n
        for i in range(n):
            if abs(self.c2[i, i] - 1.0) > 1e-12:
                raise ValueError(f"overlap diagonal entry {i} is {self.c2[i, i]!r}, expected 1")
            for j in range(n):
                if self.exact[i, j] != self.exact[j, i]:
                    raise ValueError("overlap matrix must be symmetric")
                if not -1e-12 <= self.c2[i, j] <= 1.0 + 1e-12:
                    raise ValueError(f"overlap entry ({i},{j}) outside [0, 1]")

    @property
    def n(self) -> int:
        return self.exact.n

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> OverlapMatrix:
        return cls(MatN.from_rows([[Fraction(float(x)) for x in r] for r in rows]))

    def as_array(self) -> np.ndarray:
        return np.array(self.c2.tolist(), dtype=float)


def overlap_matrix(phi: Sequence[StateVector] | MeasurementSet) -> OverlapMatrix:
    vecs = phi.phi if isinstance(phi, MeasurementSet) else tuple(phi)
    n = len(vecs)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            re, im = _exact_inner(vecs[i], vecs[j])
            rows[i][j] = rows[j][i] = re * re + im * im
    return OverlapMatrix(MatN.from_rows(rows))


def overlap_closed_form(angles: Sequence[EulerAngles]) -> np.ndarray:
    """``|C_mn|^2`` from the Euler angles alone:

    cos^2(dphi/2) cos^2((t_m - t_n)/2) + sin^2(dphi/2) cos^2((t_m + t_n)/2)
    """
    n = len(angles)
    out = np.ones((n, n))
    for m in range(n):
        for k in range(n):
            if m == k:
                continue
            dp = angles[m].phi - angles[k].phi
            tm, tk = angles[m].theta, angles[k].theta
            out[m, k] = (math.cos(dp / 2) ** 2 * math.cos((tm - tk) / 2) ** 2
                         + math.sin(dp / 2) ** 2 * math.cos((tm + tk) / 2) ** 2)
    return out


class Feasibility(str, enum.Enum):
    OK = "OK"
    OMEGA_OUT_OF_RANGE = "OmegaOutOfRange"
    SINGULAR_OVERLAP = "SingularOverlap"


@dataclass(frozen=True)
class ExtremalSolution:
    """Stationary point of the purity on the plane ``sum w = 1``.

    Infeasible solutions keep the raw (formal) ``omega_ext`` and ``p_min`` so
    callers can report how far outside the simplex they fall. For a singular
    overlap matrix both are empty/None.
    """

    omega_ext: tuple[float, ...]
    p_min: float | None
    feasible: bool
    reason: Feasibility
    condition: float = math.inf


def extremal_probabilities(c: OverlapMatrix) -> ExtremalSolution:
    try:
        inv = invert(c.exact)
    except SingularMatrix:
        return ExtremalSolution((), None, False, Feasibility.SINGULAR_OVERLAP)
    cond = float(c.exact.inf_norm() * inv.inf_norm())
    total = inv.total()
    if cond > MAX_CONDITION or total <= 0:
        return ExtremalSolution((), None, False, Feasibility.SINGULAR_OVERLAP, cond)
    omega = [float(s / total) for s in inv.col_sums()]
    p_min = float(1 / total)
    lo, hi = -FEASIBILITY_TOL, 1.0 + FEASIBILITY_TOL
    if all(lo <= w <= hi for w in omega):
        omega = [min(max(w, 0.0), 1.0) for w in omega]
        return ExtremalSolution(tuple(omega), p_min, True, Feasibility.OK, cond)
    return ExtremalSolution(tuple(omega), p_min, False, Feasibility.OMEGA_OUT_OF_RANGE, cond)


def _check_simplex(omega: Sequence[float]) -> None:
    if any(w < -SIMPLEX_TOL for w in omega) or abs(math.fsum(omega) - 1.0) > SIMPLEX_TOL:
        raise NotOnSimplex(f"weights {tuple(omega)} are not on the probability simplex")


def purity_bilinear(c: OverlapMatrix, omega: Sequence[float]) -> float:
    """``sum_mn |C_mn|^2 w_m w_n``, accumulated exactly."""
    if len(omega) != c.n:
        raise ValueError(f"expected {c.n} weights, got {len(omega)}")
    _check_simplex(omega)
    w = [Fraction(float(x)) for x in omega]
    acc = Fraction(0)
    for i in range(c.n):
        for j in range(c.n):
            acc += c.exact[i, j] * w[i] * w[j]
    return float(acc)


def _simplex_lattice(n: int, k: int) -> np.ndarray:
    """All integer points of ``k * simplex`` in ``n`` coordinates, as rows."""
    if n == 1:
        return np.array([[k]])
    if n == 2:
        i = np.arange(k + 1)
        return np.stack([i, k - i], axis=1)
    if n == 3:
        i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
        mask = i + j <= k
        i, j = i[mask], j[mask]
        return np.stack([i, j, k - i - j], axis=1)
    raise ValueError("lattice enumeration is provided for up to 3 free weights")


def brute_force_min(c: OverlapMatrix, grid_step: float) -> tuple[tuple[float, ...], float]:
    """Exhaustive minimum of the purity form over a lattice on the simplex.

    The lattice has spacing ``1/round(1/grid_step)``; the last weight is
    ``1 - (others)`` so every point satisfies the constraint exactly.
    """
    if not 0 < grid_step <= 0.1:
        raise ValueError("grid_step must lie in (0, 0.1]")
    k = int(round(1.0 / grid_step))
    a = c.as_array()
    n = c.n
    best_val, best_w = math.inf, None
    if n <= 3:
        chunks = [_simplex_lattice(n, k)]
    elif n == 4:
        chunks = []
        for first in range(k + 1):
            rest = _simplex_lattice(3, k - first)
            chunks.append(np.column_stack([np.full(len(rest), first), rest]))
    else:
        raise ValueError("brute force supports N <= 4")
    for pts in chunks:
        w = pts / k
        vals = np.einsum("pi,ij,pj->p", w, a, w)
        idx = int(np.argmin(vals))
        if vals[idx] < best_val:
            best_val, best_w = float(vals[idx]), w[idx]
    return tuple(float(x) for x in best_w), best_val


def self_consistent_theta_a(omega_ext: float, t: ThermalParams, n_outcomes: int = 3) -> float:
    """Polar angle ``theta_a`` placing outcome probability ``omega_ext`` at temperature ``t``.

    Solves ``cos theta_a = (1 - N omega_ext) coth(beta omega0 / 2)``.

    Raises
    ------
    Unattainable
        If the right-hand side exceeds 1 in magnitude.
    """
    d = 1.0 - n_outcomes * omega_ext
    if d == 0.0:
        return math.pi / 2
    rhs = d * t.coth_half
    if abs(rhs) > 1.0 + 1e-12:
        raise Unattainable(
            f"|cos theta_a| = {abs(rhs):.6g} > 1: no polar angle reaches "
            f"omega_ext = {omega_ext:.6g} at k_B T/omega0 = {t.kT_over_omega0:.6g}",
            cos_value=abs(rhs))
    return math.acos(min(max(rhs, -1.0), 1.0))


def self_consistent_thetas(omega_ext: Sequence[float], t: ThermalParams) -> tuple[float, ...]:
    n = len(omega_ext)
    out = []
    for m, w in enumerate(omega_ext):
        try:
            out.append(self_consistent_theta_a(w, t, n))
        except Unattainable as exc:
            raise Unattainable(f"outcome m={m + 1}: {exc}", index=m, cos_value=exc.cos_value) from None
    return tuple(out)


def max_self_consistent_kT(omega_ext: Sequence[float]) -> float:
    """Highest ``k_B T/omega0`` at which every ``theta_a`` is still solvable.

    From ``max_m |1 - N w_m| coth(1/(2 kT)) = 1``: ``kT = 1 / (2 artanh(M))``.
    Returns ``inf`` when all ``w_m = 1/N``.
    """
    n = len(omega_ext)
    worst = max(abs(1.0 - n * w) for w in omega_ext)
    if worst == 0.0:
        return math.inf
    if worst > 1.0:
        raise Unattainable(f"max |1 - N w| = {worst:.6g} > 1 at every temperature",
                           cos_value=worst)
    if worst == 1.0:
        return 0.0
    return 1.0 / (2.0 * math.atanh(worst))


@dataclass(frozen=True)
class SweepRecord:
    kT_over_omega0: float
    purity: float
    coherence_abs: float
    p_min: float
    probabilities: tuple[float, ...] = ()


def _sweep_point(phi, theta_a, p_min, t: ThermalParams) -> SweepRecord:
    omega = probabilities_from_polar(theta_a, t)
    rho = mixture(phi, omega)
    return SweepRecord(t.kT_over_omega0, state_purity(rho), abs(coherence_of(rho)), p_min, omega)


def temperature_sweep(phi: Sequence[StateVector], t_star: ThermalParams,
                      t_grid: Sequence[ThermalParams], *, workers: int = 1) -> list[SweepRecord]:
    """Fix ``theta_a`` self-consistently at ``t_star`` and re-evaluate the state on ``t_grid``.

    The purity reaches ``p_min`` at ``t_star`` by construction. Records come
    back in grid order whatever ``workers`` is.

    Raises
    ------
    SingularOverlap
        If the phi overlap matrix cannot be inverted.
    Unattainable
        If some ``theta_a`` has no solution at ``t_star``.
    """
    phi = tuple(phi)
    ext = extremal_probabilities(overlap_matrix(phi))
    if ext.reason is Feasibility.SINGULAR_OVERLAP:
        raise SingularOverlap("overlap matrix of the phi vectors is singular")
    theta_a = self_consistent_thetas(ext.omega_ext, t_star)

    def point(t: ThermalParams) -> SweepRecord:
        return _sweep_point(phi, theta_a, ext.p_min, t)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, t_grid))
    return [point(t) for t in t_grid]


def kT_grid(kT_min: float = 0.0, kT_max: float = 3.0, points: int = 201) -> list[ThermalParams]:
    if points < 2:
        raise ValueError("a sweep grid needs at least two points")
    last = points - 1
    return [ThermalParams.from_kT((kT_min * (last - i) + kT_max * i) / last)
            for i in range(points)]


def asymptotic_purities(mset: MeasurementSet) -> tuple[float, float]:
    """Zero- and high-temperature limits of the purity.

    ``P(T=0) = sum_mn |C_mn|^2 |a0_m|^2 |a0_n|^2`` and
    ``P(T->inf) = sum_mn |C_mn|^2 / N^2``.
    """
    c = overlap_matrix(mset.phi)
    a = c.as_array()
    g = np.array([abs(p.c0) ** 2 for p in mset.psi])
    n = mset.n_outcomes
    return float(g @ a @ g), float(a.sum() / n ** 2)
