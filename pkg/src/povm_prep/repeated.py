"""A second nonselective measurement performed right after the first one.

The first measurement leaves ``rho_S = sum_m w_m |phi_m><phi_m|``. A second
one with vectors ``(psi'_n, phi'_n)`` gives

    rho'_S = sum_n w~_n |phi'_n><phi'_n|,   w~_n = sum_m |<psi'_n|phi_m>|^2 w_m

The square-root measurement (SRM) ``psi'_n = sqrt(w_n) rho_S^{-1/2} phi_n``
leaves the probabilities unchanged, ``w~ = w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .basis import MeasurementSet, PhiVector, StateVector
from .errors import Diagnostic, InvalidSet, NotOnSimplex, SingularMatrix, SingularOverlap
from .preparation import PreparedState, ThermalParams, reduced_density
from .purity import Feasibility, OverlapMatrix, extremal_probabilities, overlap_matrix, purity_bilinear
from .smallmat import DEFAULT_FLOOR, Mat2, MatN, invert, mat2_sum, psd_inv_sqrt, psd_rank, support_projector

COMPLETENESS_TOL = 1e-9
SIMPLEX_TOL = 1e-10
SHIFT_TOL = 1e-10
SAME_VECTOR_TOL = 1e-12


def frame_operator(vectors: Sequence[StateVector]) -> Mat2:
    """``S = sum_n |v_n><v_n|``."""
    return mat2_sum(Mat2.outer(v.ket, v.ket) for v in vectors)


def completeness_residual(vectors: Sequence[StateVector], target: Mat2 | None = None) -> float:
    """``max |S - target|`` elementwise; the target defaults to the identity."""
    return frame_operator(vectors).max_abs_diff(Mat2.identity() if target is None else target)


def _apply(m: Mat2, v: StateVector, scale: float = 1.0) -> StateVector:
    c1, c0 = m @ v.ket
    return StateVector(scale * c1, scale * c0)


@dataclass(frozen=True)
class SrmVectors:
    vectors: tuple[StateVector, ...]
    rank: int
    diagnostics: tuple[Diagnostic, ...] = ()


def srm_vectors(prepared: PreparedState, phi: Sequence[StateVector],
                floor: float = DEFAULT_FLOOR) -> SrmVectors:
    """Square-root measurement vectors ``sqrt(w_n) rho^{-1/2} |phi_n>``.

    ``rho^{-1/2}`` is the generalized inverse square root; when ``rho`` has an
    eigenvalue at or below ``floor * lambda_max`` the vectors live on its
    support only and ``RankDeficient`` is attached.
    """
    phi = tuple(phi)
    if len(phi) != len(prepared.probabilities):
        raise ValueError("phi and probabilities must have the same length")
    rho = prepared.rho.m
    inv_sqrt = psd_inv_sqrt(rho, floor)
    rank = psd_rank(rho, floor)
    vecs = tuple(_apply(inv_sqrt, v, math.sqrt(max(w, 0.0)))
                 for v, w in zip(phi, prepared.probabilities))
    diags = (Diagnostic.RANK_DEFICIENT,) if rank < 2 else ()
    return SrmVectors(vecs, rank, diags)


def restore_completeness(vectors: Sequence[StateVector], floor: float = DEFAULT_FLOOR) -> tuple[StateVector, ...]:
    """Map a set onto one with ``sum |v><v| = I`` via ``S^{-1/2}``, S the frame operator."""
    s_inv = psd_inv_sqrt(frame_operator(vectors), floor)
    return tuple(_apply(s_inv, v) for v in vectors)


@dataclass(frozen=True)
class TransferMatrix:
    """``d2[n, m] = |<psi'_n|phi_m>|^2``."""

    d2: MatN

    def column_sums(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.d2.col_sums())

    def is_column_stochastic(self, tol: float = 1e-10) -> bool:
        return all(abs(s - 1.0) <= tol for s in self.column_sums())


def transfer_matrix(primed_psi: Sequence[StateVector], phi: Sequence[StateVector]) -> TransferMatrix:
    primed_psi, phi = tuple(primed_psi), tuple(phi)
    if len(primed_psi) != len(phi):
        raise ValueError("primed psi and phi must have the same length")
    return TransferMatrix(MatN.from_rows(
        [[abs(p.inner(f)) ** 2 for f in phi] for p in primed_psi]))


def _on_simplex(w: Sequence[float], tol: float = SIMPLEX_TOL) -> bool:
    return all(x >= -tol for x in w) and abs(math.fsum(w) - 1.0) <= tol


def updated_probabilities(d: TransferMatrix, omega: Sequence[float]) -> tuple[float, ...]:
    """``w~_n = sum_m d2[n, m] w_m``.

    Raises
    ------
    NotOnSimplex
        If ``omega`` or the result leaves the simplex (the latter happens
        when the primed psi vectors do not resolve the identity).
    """
    if not _on_simplex(omega):
        raise NotOnSimplex(f"input weights {tuple(omega)} are not on the simplex")
    out = tuple(math.fsum(d.d2[n, m] * omega[m] for m in range(d.d2.n)) for n in range(d.d2.n))
    if not _on_simplex(out):
        raise NotOnSimplex(f"updated weights sum to {math.fsum(out):.15g}")
    return out


def second_purity(primed_phi: Sequence[StateVector], omega_tilde: Sequence[float]) -> float:
    """``P' = sum_mn |C'_mn|^2 w~_m w~_n`` on the primed phi vectors."""
    return purity_bilinear(overlap_matrix(primed_phi), omega_tilde)


def squared_error_r(prepared: PreparedState, phi: Sequence[StateVector],
                    primed_psi: Sequence[StateVector]) -> float:
    """``R = sum_n w_n || |phi_n> - |psi'_n> ||^2`` with the Euclidean vector norm."""
    return math.fsum(w * _dist2(f, p) for w, f, p in zip(prepared.probabilities, phi, primed_psi))


def squared_error_scaled(prepared: PreparedState, phi: Sequence[StateVector],
                         primed_psi: Sequence[StateVector]) -> float:
    """``sum_n || sqrt(w_n) |phi_n> - |psi'_n> ||^2``.

    This is the error functional the square-root measurement is known to
    minimize over complete sets; :func:`squared_error_r` weights the plain
    difference instead and is not minimized by it in general.
    """
    out = []
    for w, f, p in zip(prepared.probabilities, phi, primed_psi):
        s = math.sqrt(max(w, 0.0))
        out.append(abs(s * f.c1 - p.c1) ** 2 + abs(s * f.c0 - p.c0) ** 2)
    return math.fsum(out)


def _dist2(u: StateVector, v: StateVector) -> float:
    return abs(u.c1 - v.c1) ** 2 + abs(u.c0 - v.c0) ** 2


@dataclass(frozen=True)
class ExtremumShift:
    """Both sides of the no-return condition per index.

    ``lhs[n] = (D^{-1} w'_ext)_n`` and ``rhs[n] = w_ext_n``, with
    ``D = |D_nm|^2`` and ``w'_ext`` built from the primed overlaps.
    ``violated[n]`` is true when they differ by more than ``1e-10``: the
    second measurement cannot land on the new purity minimum.
    """

    lhs: tuple[float, ...]
    rhs: tuple[float, ...]
    violated: tuple[bool, ...]

    @property
    def any_violated(self) -> bool:
        return any(self.violated)


def _normalized_col_sums(inv: MatN) -> list[Fraction]:
    total = inv.total()
    if total == 0:
        raise SingularOverlap("inverse overlap matrix sums to zero")
    return [s / total for s in inv.col_sums()]


def extremum_shift_check(first_c: OverlapMatrix, primed_c: OverlapMatrix,
                         d: TransferMatrix, tol: float = SHIFT_TOL) -> ExtremumShift:
    """Evaluate the condition for a second measurement to leave the purity minimum.

    All inversions are exact in the stored floating-point entries.

    Raises
    ------
    SingularOverlap
        If ``C``, ``C'`` or ``D`` is not invertible.
    """
    try:
        c_inv = invert(first_c.exact)
        cp_inv = invert(primed_c.exact)
        d_inv = invert(d.d2.to_exact())
    except SingularMatrix as exc:
        raise SingularOverlap(f"cannot evaluate the extremum shift: {exc}") from None
    rhs = _normalized_col_sums(c_inv)
    lhs = d_inv @ _normalized_col_sums(cp_inv)
    lhs_f = tuple(float(x) for x in lhs)
    rhs_f = tuple(float(x) for x in rhs)
    return ExtremumShift(lhs_f, rhs_f, tuple(abs(a - b) > tol for a, b in zip(lhs_f, rhs_f)))


def same_vectors(a: Sequence[StateVector], b: Sequence[StateVector], tol: float = SAME_VECTOR_TOL) -> bool:
    return len(a) == len(b) and all(_dist2(u, v) <= tol * tol for u, v in zip(a, b))


@dataclass(frozen=True)
class RepeatedScheme:
    """First measurement at temperature ``t`` followed instantly by a primed one."""

    first: MeasurementSet
    t: ThermalParams
    primed_psi: tuple[StateVector, ...]
    primed_phi: tuple[PhiVector, ...]
    prepared: PreparedState = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "primed_psi", tuple(self.primed_psi))
        object.__setattr__(self, "primed_phi", tuple(self.primed_phi))
        n = self.first.n_outcomes
        if len(self.primed_psi) != n or len(self.primed_phi) != n:
            raise InvalidSet(f"primed sets must have {n} vectors each")
        prepared = reduced_density(self.first, self.t)
        object.__setattr__(self, "prepared", prepared)
        # completeness is only required where the state lives
        p = support_projector(prepared.rho.m)
        s = frame_operator(self.primed_psi)
        res = (p @ s @ p).max_abs_diff(p)
        if res > COMPLETENESS_TOL:
            raise InvalidSet(f"primed psi vectors do not resolve the identity on the state support "
                             f"(residual {res:.3e})")


def srm_scheme(first: MeasurementSet, t: ThermalParams,
               primed_phi: Sequence[PhiVector] | None = None) -> tuple[RepeatedScheme, tuple[Diagnostic, ...]]:
    """Second measurement with SRM psi vectors; ``primed_phi`` defaults to the first phi."""
    prepared = reduced_density(first, t)
    srm = srm_vectors(prepared, first.phi)
    phi2 = first.phi if primed_phi is None else tuple(primed_phi)
    return RepeatedScheme(first, t, srm.vectors, phi2), srm.diagnostics


@dataclass(frozen=True)
class RepeatedReport:
    omega: tuple[float, ...]
    omega_tilde: tuple[float, ...]
    purity: float
    purity_prime: float
    squared_error: float
    squared_error_scaled: float
    transfer: TransferMatrix
    shift: ExtremumShift | None
    diagnostics: tuple[Diagnostic, ...] = ()


def evaluate_scheme(scheme: RepeatedScheme, diagnostics: Sequence[Diagnostic] = ()) -> RepeatedReport:
    """Probabilities, purities, squared errors and the extremum-shift verdict.

    The verdict is None (with ``NoGlobalMinimum``) when an overlap or the
    transfer matrix is singular.
    """
    prepared = scheme.prepared
    phi = scheme.first.phi
    d = transfer_matrix(scheme.primed_psi, phi)
    w = prepared.probabilities
    w2 = updated_probabilities(d, w)
    p1 = purity_bilinear(overlap_matrix(phi), w)
    p2 = second_purity(scheme.primed_phi, w2)
    diags = list(diagnostics)
    try:
        shift = extremum_shift_check(overlap_matrix(phi), overlap_matrix(scheme.primed_phi), d)
    except SingularOverlap:
        shift = None
        diags.append(Diagnostic.NO_GLOBAL_MINIMUM)
    if same_vectors(scheme.primed_phi, phi) and all(abs(a - b) <= SIMPLEX_TOL for a, b in zip(w, w2)):
        diags.append(Diagnostic.USELESS_REPEAT)
    return RepeatedReport(w, w2, p1, p2, squared_error_r(prepared, phi, scheme.primed_psi),
                          squared_error_scaled(prepared, phi, scheme.primed_psi), d, shift, tuple(diags))


def new_minimum(primed_phi: Sequence[StateVector]) -> float | None:
    """``P_min`` of the primed phi set, or None if it has no feasible minimum."""
    ext = extremal_probabilities(overlap_matrix(primed_phi))
    return ext.p_min if ext.reason is Feasibility.OK else None


__all__ = [
    "COMPLETENESS_TOL", "ExtremumShift", "RepeatedReport", "RepeatedScheme", "SrmVectors",
    "TransferMatrix", "completeness_residual", "evaluate_scheme", "extremum_shift_check",
    "frame_operator", "new_minimum", "restore_completeness", "same_vectors",
    "second_purity", "squared_error_r", "squared_error_scaled", "srm_scheme", "srm_vectors",
    "transfer_matrix", "updated_probabilities",
]
