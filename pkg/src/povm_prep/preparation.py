"""Post-measurement reduced state of the qubit in the dephasing model.

Temperature enters only through the dimensionless ``beta_omega0 = omega0/(k_B T)``
(hbar = k_B = 1); ``math.inf`` is the zero-temperature point and is handled
through exact limits rather than large finite values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .basis import GRAM_TOL, MeasurementSet, PhiVector, StateVector, gram_diagonality_residual
from .errors import DomainError, GramNotDiagonal, InvalidSet, ZeroDenominator
from .smallmat import Mat2, eig_hermitian_2x2, mat2_sum

# sigma_+ = |1><0| in the (|1>, |0>) ordering
SIGMA_PLUS = Mat2(0, 1, 0, 0)
SIGMA_MINUS = Mat2(0, 0, 1, 0)
SIGMA_3 = Mat2.diag(1, -1)

DENSITY_TOL = 1e-12
PROB_TOL = 1e-12


@dataclass(frozen=True)
class ThermalParams:
    """Bath temperature as ``beta_omega0``; ``inf`` means T = 0."""

    beta_omega0: float
    # the k_B T/omega0 value this was built from, kept so grids echo exactly
    kT: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        b = float(self.beta_omega0)
        if math.isnan(b) or b < 0:
            raise DomainError(f"beta_omega0 must be >= 0, got {b!r}")
        object.__setattr__(self, "beta_omega0", b)

    @classmethod
    def from_kT(cls, kT_over_omega0: float) -> ThermalParams:
        """From ``k_B T / omega0``; zero maps to the zero-temperature point."""
        if not kT_over_omega0 >= 0:
            raise DomainError(f"k_B T/omega0 must be >= 0, got {kT_over_omega0!r}")
        if kT_over_omega0 == 0:
            return cls(math.inf, 0.0)
        return cls(1.0 / kT_over_omega0, float(kT_over_omega0))

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta_omega0)

    @property
    def kT_over_omega0(self) -> float:
        if self.kT is not None:
            return self.kT
        return 0.0 if self.zero_temperature else (
            math.inf if self.beta_omega0 == 0 else 1.0 / self.beta_omega0)

    @property
    def tanh_half(self) -> float:
        return 1.0 if self.zero_temperature else math.tanh(self.beta_omega0 / 2.0)

    @property
    def coth_half(self) -> float:
        """``coth(beta omega0 / 2)``; ``inf`` at infinite temperature."""
        t = self.tanh_half
        return math.inf if t == 0 else 1.0 / t

    @property
    def ground_weight(self) -> float:
        """``e^{x} / (2 cosh x)`` with ``x = beta omega0 / 2``: Gibbs weight of |0>."""
        return 1.0 / (1.0 + math.exp(-self.beta_omega0))

    @property
    def excited_weight(self) -> float:
        e = math.exp(-self.beta_omega0)
        return e / (1.0 + e)


def _psi_list(src: MeasurementSet | Sequence[StateVector]) -> tuple[StateVector, ...]:
    return src.psi if isinstance(src, MeasurementSet) else tuple(src)


def thermal_probabilities(mset: MeasurementSet | Sequence[StateVector],
                          t: ThermalParams) -> tuple[float, ...]:
    """Outcome probabilities ``omega_m`` of the equilibrium state.

    ``omega_m = (|a0|^2 e^{x} + |a1|^2 e^{-x}) / (2 cosh x)``, ``x = beta omega0/2``.
    """
    p0, p1 = t.ground_weight, t.excited_weight
    return tuple(abs(p.c0) ** 2 * p0 + abs(p.c1) ** 2 * p1 for p in _psi_list(mset))


def probabilities_from_polar(theta_a: Sequence[float], t: ThermalParams) -> tuple[float, ...]:
    """``omega_m = (1 - cos(theta_a) tanh(beta omega0/2)) / N`` for Euler-parameterized psi."""
    n = len(theta_a)
    th = t.tanh_half
    return tuple((1.0 - math.cos(a) * th) / n for a in theta_a)


@dataclass(frozen=True)
class DensityMatrix:
    m: Mat2

    def __post_init__(self) -> None:
        if self.m.hermitian_residual() > DENSITY_TOL:
            raise InvalidSet("density matrix is not Hermitian")
        tr = self.m.trace()
        if abs(tr - 1.0) > DENSITY_TOL:
            raise InvalidSet(f"density matrix trace {tr.real:.15g} != 1")
        lo, hi = eig_hermitian_2x2(self.m)[0]
        if lo < -DENSITY_TOL or hi > 1.0 + DENSITY_TOL:
            raise InvalidSet(f"density matrix eigenvalues ({lo:.3e}, {hi:.3e}) outside [0, 1]")

    def eigenvalues(self) -> tuple[float, float]:
        return eig_hermitian_2x2(self.m)[0]


@dataclass(frozen=True)
class PreparedState:
    rho: DensityMatrix
    probabilities: tuple[float, ...]
    coherence: complex

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.probabilities)
        object.__setattr__(self, "probabilities", w)
        if abs(math.fsum(w) - 1.0) > PROB_TOL:
            raise InvalidSet(f"probabilities sum to {math.fsum(w):.15g}")
        if any(x < -PROB_TOL or x > 1 + PROB_TOL for x in w):
            raise InvalidSet("probabilities outside [0, 1]")

    @property
    def purity(self) -> float:
        return state_purity(self.rho)


def mixture(phi: Sequence[StateVector], weights: Sequence[float]) -> Mat2:
    """``sum_m w_m |phi_m><phi_m|``."""
    return mat2_sum(Mat2.outer(v.ket, v.ket) * w for v, w in zip(phi, weights))


def coherence_of(rho: Mat2) -> complex:
    """``<sigma_+> = Tr(sigma_+ rho)``, i.e. the element ``rho[1, 0]``."""
    return (SIGMA_PLUS @ rho).trace()


def prepare_from_probabilities(phi: Sequence[PhiVector], omega: Sequence[float]) -> PreparedState:
    rho = mixture(phi, omega)
    return PreparedState(DensityMatrix(rho), tuple(omega), coherence_of(rho))


def reduced_density(mset: MeasurementSet, t: ThermalParams) -> PreparedState:
    """``rho_S(0) = sum_m omega_m |phi_m><phi_m|`` with thermal ``omega_m``."""
    return prepare_from_probabilities(mset.phi, thermal_probabilities(mset, t))


def state_purity(rho: DensityMatrix | Mat2) -> float:
    m = rho.m if isinstance(rho, DensityMatrix) else rho
    return (m @ m).trace().real


def _sandwich(mset: MeasurementSet, op: Mat2) -> list[tuple[complex, complex]]:
    """Per outcome: (<0|Omega^dag op Omega|0>, <1|Omega^dag op Omega|1>)."""
    out = []
    for om in mset.omegas():
        s = om.dagger() @ op @ om
        out.append((s[1, 1], s[0, 0]))
    return out


def coherence_prefactor(mset: MeasurementSet, op: Mat2 = SIGMA_PLUS) -> complex:
    """``sum_m <0|Omega_m^dag op Omega_m|0>``."""
    return sum(g for g, _ in _sandwich(mset, op))


def initial_coherence_formula(mset: MeasurementSet, t: ThermalParams) -> complex:
    """Initial ``<sigma_+>`` from the closed form valid for a diagonal Gram operator.

    Raises
    ------
    GramNotDiagonal
        If the Gram residual is not below ``1e-10``.
    """
    res = gram_diagonality_residual(mset)
    if res >= GRAM_TOL:
        raise GramNotDiagonal(f"Gram operator is not diagonal (residual {res:.3e})")
    return coherence_prefactor(mset) * t.tanh_half


def a_factor(mset: MeasurementSet, t: ThermalParams, op: Mat2 = SIGMA_PLUS) -> complex:
    """Correlation factor A: thermally weighted difference over sum of
    ``<0|Omega^dag op Omega|0>`` and ``<1|Omega^dag op Omega|1>``.

    Both numerator and denominator are divided by ``2 cosh(beta omega0/2)``
    so the zero-temperature point is finite. Equals ``coth(beta omega0/2)``
    whenever the Gram operator is diagonal.
    """
    p0, p1 = t.ground_weight, t.excited_weight
    terms = _sandwich(mset, op)
    num = sum(g * p0 - e * p1 for g, e in terms)
    den = sum(g * p0 + e * p1 for g, e in terms)
    if abs(den) < 1e-14:
        raise ZeroDenominator(f"A-factor denominator {abs(den):.3e} vanishes")
    return num / den
