"""Measurement state vectors, Omega operators, effects and the Gram operator.

Vectors follow the half-angle convention

    |psi> = sqrt(2/N) (e^{-i phi/2} cos(theta/2), e^{+i phi/2} sin(theta/2))
    |phi> =           (e^{-i phi/2} cos(theta/2), e^{+i phi/2} sin(theta/2))

with component 0 the excited state |1> and component 1 the ground state |0>.
No rephasing is ever applied.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import Diagnostic, InvalidAngle, InvalidSet, InvalidVector
from .smallmat import Ket, Mat2, inner, mat2_sum, norm2

TWO_PI = 2.0 * math.pi
RESOLUTION_TOL = 1e-10
NORM_TOL = 1e-12
GRAM_TOL = 1e-10


def wrap_angle(x: float) -> float:
    """Reduce an angle into [0, 2pi)."""
    y = math.fmod(x, TWO_PI)
    if y < 0:
        y += TWO_PI
    return 0.0 if y >= TWO_PI else y


@dataclass(frozen=True)
class EulerAngles:
    """Polar angle ``theta`` in [0, pi] and azimuth ``phi`` wrapped into [0, 2pi)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        theta, phi = float(self.theta), float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise InvalidAngle("angles must be finite")
        if theta < -1e-12 or theta > math.pi + 1e-12:
            raise InvalidAngle(f"theta={theta!r} outside [0, pi]")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        object.__setattr__(self, "phi", wrap_angle(phi))

    @classmethod
    def in_pi_units(cls, theta: float, phi: float = 0.0) -> EulerAngles:
        return cls(theta * math.pi, phi * math.pi)


@dataclass(frozen=True)
class StateVector:
    """Two-component ket; ``c1`` multiplies |1>, ``c0`` multiplies |0>."""

    c1: complex
    c0: complex

    def __post_init__(self) -> None:
        c1, c0 = complex(self.c1), complex(self.c0)
        if not (cmath.isfinite(c1) and cmath.isfinite(c0)):
            raise InvalidVector("amplitudes must be finite")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c0", c0)

    @property
    def ket(self) -> Ket:
        return (self.c1, self.c0)

    def norm2(self) -> float:
        return norm2(self.ket)

    def inner(self, other: StateVector | Ket) -> complex:
        """``<self|other>``."""
        o = other.ket if isinstance(other, StateVector) else other
        return inner(self.ket, o)

    def angles(self) -> EulerAngles:
        """Recover the Euler angles (theta, phi) of the direction of this vector."""
        n = math.sqrt(self.norm2())
        theta = 2.0 * math.atan2(abs(self.c0), abs(self.c1))
        if abs(self.c1) < 1e-15 * n or abs(self.c0) < 1e-15 * n:
            phi = 0.0
        else:
            phi = cmath.phase(self.c0) - cmath.phase(self.c1)
        return EulerAngles(theta, phi)


@dataclass(frozen=True)
class PsiVector(StateVector):
    """Effect vector |psi_m> of an N-outcome measurement, norm^2 = 2/N."""

    n_outcomes: int = 2

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.n_outcomes < 2:
            raise InvalidVector("n_outcomes must be >= 2")
        target = 2.0 / self.n_outcomes
        if abs(self.norm2() - target) > NORM_TOL:
            raise InvalidVector(
                f"|a1|^2 + |a0|^2 = {self.norm2():.15g}, expected 2/N = {target:.15g}")

    @property
    def a1(self) -> complex:
        return self.c1

    @property
    def a0(self) -> complex:
        return self.c0


@dataclass(frozen=True)
class PhiVector(StateVector):
    """Normalized post-measurement vector |phi_m>."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if abs(self.norm2() - 1.0) > NORM_TOL:
            raise InvalidVector(f"|b1|^2 + |b0|^2 = {self.norm2():.15g}, expected 1")

    @property
    def b1(self) -> complex:
        return self.c1

    @property
    def b0(self) -> complex:
        return self.c0


def _half_angle_ket(angles: EulerAngles, scale: float) -> Ket:
    h = angles.phi / 2.0
    return (scale * cmath.exp(-1j * h) * math.cos(angles.theta / 2.0),
            scale * cmath.exp(1j * h) * math.sin(angles.theta / 2.0))


def psi_from_angles(angles: EulerAngles, n_outcomes: int) -> PsiVector:
    if n_outcomes < 2:
        raise InvalidVector("n_outcomes must be >= 2")
    c1, c0 = _half_angle_ket(angles, math.sqrt(2.0 / n_outcomes))
    return PsiVector(c1, c0, n_outcomes)


def phi_from_angles(angles: EulerAngles) -> PhiVector:
    c1, c0 = _half_angle_ket(angles, 1.0)
    return PhiVector(c1, c0)


def omega_operator(psi: StateVector, phi: StateVector) -> Mat2:
    """``Omega = |phi><psi|``."""
    return Mat2.outer(phi.ket, psi.ket)


def effect_operator(psi: StateVector) -> Mat2:
    """``F = |psi><psi|``; a projector only when ``|psi|^2 = 1``."""
    return Mat2.outer(psi.ket, psi.ket)


def resolution_residual(psi: Sequence[StateVector]) -> float:
    """``max |sum_m F_m - I|`` elementwise."""
    total = mat2_sum(effect_operator(p) for p in psi)
    return total.max_abs_diff(Mat2.identity())


@dataclass(frozen=True)
class MeasurementSet:
    """Paired subsets ({|psi_m>}, {|phi_m>}) of one nonselective measurement.

    Construction validates that the effects resolve the identity to within
    ``1e-10``; it never repairs inputs.
    """

    n_outcomes: int
    psi: tuple[PsiVector, ...]
    phi: tuple[PhiVector, ...]
    residual: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        psi, phi = tuple(self.psi), tuple(self.phi)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)
        n = self.n_outcomes
        if n < 2:
            raise InvalidSet("n_outcomes must be >= 2")
        if len(psi) != n or len(phi) != n:
            raise InvalidSet(f"expected {n} psi and {n} phi vectors, "
                             f"got {len(psi)} and {len(phi)}")
        if any(p.n_outcomes != n for p in psi):
            raise InvalidSet("all psi vectors must be built with the same N")
        res = resolution_residual(psi)
        object.__setattr__(self, "residual", res)
        if res > RESOLUTION_TOL:
            raise InvalidSet(f"effects do not resolve the identity (residual {res:.3e})")

    @classmethod
    def from_angles(cls, psi_angles: Sequence[EulerAngles],
                    phi_angles: Sequence[EulerAngles]) -> MeasurementSet:
        n = len(psi_angles)
        return cls(n, tuple(psi_from_angles(a, n) for a in psi_angles),
                   tuple(phi_from_angles(a) for a in phi_angles))

    def omegas(self) -> tuple[Mat2, ...]:
        return tuple(omega_operator(p, f) for p, f in zip(self.psi, self.phi))

    def effects(self) -> tuple[Mat2, ...]:
        return tuple(effect_operator(p) for p in self.psi)


def validate_resolution(mset: MeasurementSet) -> float:
    return resolution_residual(mset.psi)


def gram_operator(phi: MeasurementSet | Sequence[PhiVector]) -> Mat2:
    """``G = (2/N) sum_m |phi_m><phi_m|``."""
    vecs = phi.phi if isinstance(phi, MeasurementSet) else tuple(phi)
    return mat2_sum(Mat2.outer(v.ket, v.ket) for v in vecs) * (2.0 / len(vecs))


def gram_diagonality_residual(phi: MeasurementSet | Sequence[PhiVector]) -> float:
    """``|sum_m e^{i phi_b} sin theta_b|``, computed from the amplitudes.

    Equal to twice the modulus of the off-diagonal element of
    ``sum_m |phi_m><phi_m|``.
    """
    vecs = phi.phi if isinstance(phi, MeasurementSet) else tuple(phi)
    return 2.0 * abs(sum(v.c1 * v.c0.conjugate() for v in vecs))


def gram_residual_from_angles(angles: Sequence[EulerAngles]) -> float:
    return abs(sum(cmath.exp(1j * a.phi) * math.sin(a.theta) for a in angles))


def gram_is_diagonal(phi: MeasurementSet | Sequence[PhiVector], tol: float = GRAM_TOL) -> bool:
    return gram_diagonality_residual(phi) < tol


def phi_angle_diagnostics(angles: Sequence[EulerAngles]) -> list[Diagnostic]:
    """Warnings for phi-angle triples; currently only ``cos(phi_b3) = 0``.

    The diagonality condition can hold in that case, so this is not an error.
    """
    out: list[Diagnostic] = []
    if len(angles) == 3 and abs(math.cos(angles[2].phi)) < 1e-12:
        out.append(Diagnostic.COS_PHI3_ZERO)
    return out
