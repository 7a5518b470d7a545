"""Measurement-setting families for N = 3 with a diagonal Gram operator.

Three families make ``sum_m e^{i phi_b} sin theta_b = 0`` hold:

* case 1: azimuths differ by multiples of pi; ``sin theta_b3`` follows from
  the other two polar angles,
* case 2: ``phi_b`` sits on a pole (``theta_b2 = pi k``) and
  ``phi_b1 - phi_b3 = pi``,
* case 3: generic azimuths; ``theta_b2``, ``theta_b3`` follow from
  ``theta_b1`` and the azimuth differences inside an admissible window.

On top of these come the equal-overlap settings, for which all extremal
probabilities equal 1/3.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .basis import (
    GRAM_TOL,
    EulerAngles,
    MeasurementSet,
    PhiVector,
    StateVector,
    gram_residual_from_angles,
    phi_angle_diagnostics,
    phi_from_angles,
    psi_from_angles,
    wrap_angle,
)
from .errors import (
    Diagnostic,
    DomainError,
    IncompatibleFamily,
    InvalidSet,
    OutOfWindow,
    SingularOverlap,
)
from .preparation import ThermalParams
from .purity import ExtremalSolution, Feasibility, extremal_probabilities, overlap_matrix, self_consistent_thetas

PI = math.pi
WINDOW_TOL = 1e-12
DUPLICATE_TOL = 1e-10


class Branch(str, enum.Enum):
    """Which solution of ``sin theta = s`` to take."""

    PRINCIPAL = "principal"    # theta = arcsin(s) in [0, pi/2]
    SUPPLEMENT = "supplement"  # theta = pi - arcsin(s)

    def theta(self, s: float) -> float:
        t = math.asin(s)
        return t if self is Branch.PRINCIPAL else PI - t


class Case2Branch(str, enum.Enum):
    SAME = "same"      # theta_b3 = theta_b1
    MIRROR = "mirror"  # theta_b3 = pi - theta_b1


# theta_b2 obtuse, theta_b3 acute: the case-3 branch used for temperature sweeps
DEFAULT_CASE3_BRANCH = (Branch.SUPPLEMENT, Branch.PRINCIPAL)


@dataclass(frozen=True)
class PhiSetting:
    """Euler angles of the three phi vectors produced by a generator."""

    case: str
    angles: tuple[EulerAngles, ...]
    diagnostics: tuple[Diagnostic, ...] = ()
    branch: tuple[str, ...] = ()
    gram_residual: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gram_residual", gram_residual_from_angles(self.angles))

    def vectors(self) -> tuple[PhiVector, ...]:
        return tuple(phi_from_angles(a) for a in self.angles)

    def extremal(self) -> ExtremalSolution:
        return extremal_probabilities(overlap_matrix(self.vectors()))


def _sine_in_range(s: float, what: str) -> float:
    if s < -WINDOW_TOL or s > 1.0 + WINDOW_TOL:
        raise OutOfWindow(f"{what} = {s:.12g} is outside [0, 1]", condition=f"0 <= {what} <= 1")
    return min(max(s, 0.0), 1.0)


def _setting(case: str, thetas: Sequence[float], phis: Sequence[float],
             diagnostics: Sequence[Diagnostic] = (), branch: Sequence[str] = ()) -> PhiSetting:
    angles = tuple(EulerAngles(t, p) for t, p in zip(thetas, phis))
    diags = list(diagnostics) + phi_angle_diagnostics(angles)
    out = PhiSetting(case, angles, tuple(diags), tuple(branch))
    if out.gram_residual >= GRAM_TOL:
        raise OutOfWindow(f"{case}: Gram residual {out.gram_residual:.3e} not below {GRAM_TOL}",
                          condition="diagonal Gram operator")
    return out


@dataclass(frozen=True)
class Case1Params:
    theta_b1: float
    theta_b2: float
    k: int = 1
    l: int = 0
    phi_b3_gauge: float = 0.0
    theta_b3_branch: Branch = Branch.PRINCIPAL


CASE1_PAIRS = ((1, 0), (1, 1))


def generate_case1(p: Case1Params) -> PhiSetting:
    """Azimuths ``phi_b3 = gauge``, ``phi_b1 = gauge + pi k``, ``phi_b2 = gauge + pi l``.

    ``sin theta_b3 = sin theta_b1 - sin theta_b2`` for (k, l) = (1, 0) and
    ``sin theta_b1 + sin theta_b2`` for (1, 1), assuming
    ``theta_b1 > theta_b2`` (inputs in the other order are swapped).
    """
    if (p.k, p.l) not in CASE1_PAIRS:
        raise DomainError(f"(k, l) = ({p.k}, {p.l}) is not one of {CASE1_PAIRS}")
    t1, t2 = p.theta_b1, p.theta_b2
    for t in (t1, t2):
        EulerAngles(t)
    diags: list[Diagnostic] = []
    if t1 < t2:
        t1, t2 = t2, t1
        diags.append(Diagnostic.SWAPPED_POLAR_ANGLES)
    sign = 1.0 if p.l == 1 else -1.0
    s3 = _sine_in_range(math.sin(t1) + sign * math.sin(t2), "sin(theta_b3)")
    t3 = Branch(p.theta_b3_branch).theta(s3)
    g = p.phi_b3_gauge
    return _setting("case1", (t1, t2, t3), (g + PI * p.k, g + PI * p.l, g), diags,
                    ("-", "-", Branch(p.theta_b3_branch).value))


def case1_overlaps_closed_form(thetas: Sequence[float], l: int) -> dict[tuple[int, int], float]:
    """Case-1 overlaps ``cos^2((t_m -/+ t_n)/2)`` keyed by 1-based index pairs."""
    t1, t2, t3 = thetas
    minus = lambda a, b: math.cos((a - b) / 2) ** 2
    plus = lambda a, b: math.cos((a + b) / 2) ** 2
    return {
        (1, 2): minus(t1, t2) if l == 1 else plus(t1, t2),
        (1, 3): plus(t1, t3),
        (2, 3): minus(t2, t3) if l == 0 else plus(t2, t3),
    }


@dataclass(frozen=True)
class Case2Params:
    theta_b1: float
    k: int = 0
    branch: Case2Branch = Case2Branch.SAME


def generate_case2(p: Case2Params) -> PhiSetting:
    """``theta_b2 = pi k``, ``phi_b1 - phi_b3 = pi`` and ``theta_b3`` from the branch."""
    if p.k not in (0, 1):
        raise DomainError(f"k must be 0 or 1, got {p.k}")
    t1 = p.theta_b1
    EulerAngles(t1)
    if math.sin(t1) <= WINDOW_TOL:
        raise OutOfWindow("case 2 needs sin(theta_b1) != 0", condition="0 < theta_b1 < pi")
    branch = Case2Branch(p.branch)
    t3 = t1 if branch is Case2Branch.SAME else PI - t1
    return _setting("case2", (t1, PI * p.k, t3), (PI, 0.0, 0.0), (), ("-", "-", branch.value))


def case2_overlaps_closed_form(theta_b1: float, k: int, branch: Case2Branch) -> dict[tuple[int, int], float]:
    c_half, s_half = math.cos(theta_b1 / 2) ** 2, math.sin(theta_b1 / 2) ** 2
    same = Case2Branch(branch) is Case2Branch.SAME
    c13 = math.cos(theta_b1) ** 2 if same else 0.0
    if k == 0:
        return {(1, 2): c_half, (1, 3): c13, (2, 3): c_half if same else s_half}
    return {(1, 2): s_half, (1, 3): c13, (2, 3): s_half if same else c_half}


@dataclass(frozen=True)
class Case3Params:
    theta_b1: float
    delta12: float
    delta13: float
    branch: tuple[Branch, Branch] = DEFAULT_CASE3_BRANCH


def case3_window_violation(theta_b1: float, delta12: float, delta13: float) -> str | None:
    """Name of the first violated window condition, or None if all hold."""
    d12, d13 = wrap_angle(delta12), wrap_angle(delta13)
    s1 = math.sin(theta_b1)
    eps = WINDOW_TOL
    if not 0 < theta_b1 < PI:
        return "0 < theta_b1 < pi"
    if not 0 < d13 < PI:
        return "0 < delta13 < pi"
    if not PI < d12 < 2 * PI:
        return "pi < delta12 < 2 pi"
    if not 0 < d12 - d13 < PI:
        return "0 < delta12 - delta13 < pi"
    a = math.asin(math.sin(d13) * s1)
    if not d13 + a - eps <= d12 <= PI + d13 - a + eps:
        return ("delta13 + asin(sin delta13 sin theta_b1) <= delta12 "
                "<= pi + delta13 - asin(sin delta13 sin theta_b1)")
    b = math.asin(math.sin(d12) * s1)
    if not d12 - PI - b - eps <= d13 <= d12 + b + eps:
        return ("delta12 - pi - asin(sin delta12 sin theta_b1) <= delta13 "
                "<= delta12 + asin(sin delta12 sin theta_b1)")
    return None


def case3_sines(theta_b1: float, delta12: float, delta13: float) -> tuple[float, float]:
    """``sin theta_b2`` and ``sin theta_b3`` implied by the diagonality condition."""
    d = math.sin(delta12 - delta13)
    s1 = math.sin(theta_b1)
    return math.sin(delta13) / d * s1, -math.sin(delta12) / d * s1


def generate_case3(p: Case3Params) -> tuple[PhiSetting, ...]:
    """Every arcsine branch of the case-3 solution that keeps the Gram operator diagonal.

    Gauge ``phi_b3 = 0`` so that ``phi_b1 = delta13`` and
    ``phi_b2 = delta13 - delta12``. Results carry ``MultiBranch`` when more
    than one branch survives (the usual situation: the condition only fixes
    the sines).
    """
    bad = case3_window_violation(p.theta_b1, p.delta12, p.delta13)
    if bad is not None:
        raise OutOfWindow(f"case 3 window violated: {bad}", condition=bad)
    d12, d13 = wrap_angle(p.delta12), wrap_angle(p.delta13)
    s2, s3 = case3_sines(p.theta_b1, d12, d13)
    s2 = _sine_in_range(s2, "sin(theta_b2)")
    s3 = _sine_in_range(s3, "sin(theta_b3)")
    phis = (d13, d13 - d12, 0.0)
    seen: set[tuple[float, float]] = set()
    out = []
    for b2 in Branch:
        for b3 in Branch:
            t2, t3 = b2.theta(s2), b3.theta(s3)
            if (t2, t3) in seen:
                continue
            seen.add((t2, t3))
            try:
                out.append(_setting("case3", (p.theta_b1, t2, t3), phis, (),
                                    ("-", b2.value, b3.value)))
            except OutOfWindow:
                continue
    if not out:
        raise OutOfWindow("no arcsine branch keeps the Gram operator diagonal",
                          condition="diagonal Gram operator")
    if len(out) > 1:
        out = [PhiSetting(s.case, s.angles, s.diagnostics + (Diagnostic.MULTI_BRANCH,), s.branch)
               for s in out]
    return tuple(out)


def case3_setting(p: Case3Params) -> PhiSetting:
    """The single case-3 setting on branch ``p.branch``."""
    want = ("-", Branch(p.branch[0]).value, Branch(p.branch[1]).value)
    candidates = generate_case3(p)
    for s in candidates:
        if s.branch == want:
            return s
    # s2 or s3 equal to 1 merges the two branches of that angle
    s2, s3 = case3_sines(p.theta_b1, wrap_angle(p.delta12), wrap_angle(p.delta13))
    for s in candidates:
        if all(w == h or abs(v - 1.0) <= WINDOW_TOL
               for w, h, v in zip(want[1:], s.branch[1:], (s2, s3))):
            return s
    raise OutOfWindow(f"branch {want[1:]} does not survive", condition="diagonal Gram operator")


# name -> (k, l, p, q, r)
EQUAL_OVERLAP_VARIANTS: dict[str, tuple[int, int, int, int, int]] = {
    "kl11_q0r1": (1, 1, 1, 0, 1),
    "kl11_q1r0": (1, 1, 1, 1, 0),
    "kl10_q0r1": (1, 0, 1, 0, 1),
    "kl10_q1r0": (1, 0, 1, 1, 0),
}


def _equal_overlap_thetas(theta_b3: float, k: int, l: int, q: int, r: int) -> tuple[float, float]:
    if (k, l) == (1, 1):
        return ((4 * PI * q + 2 * PI * r - 3 * theta_b3) / 3,
                (2 * PI * q + 4 * PI * r - 3 * theta_b3) / 3)
    return (-theta_b3 + 2 * PI * (q + 2 * r) / 3,
            theta_b3 + 2 * PI * (q - r) / 3)


def _variant_tuple(variant: str | tuple[int, int, int, int, int]) -> tuple[int, int, int, int, int]:
    if isinstance(variant, str):
        try:
            return EQUAL_OVERLAP_VARIANTS[variant]
        except KeyError:
            raise DomainError(f"unknown equal-overlap variant {variant!r}") from None
    return tuple(int(x) for x in variant)  # type: ignore[return-value]


def equal_overlap_theta_b3_range(variant: str | tuple[int, int, int, int, int]) -> tuple[float, float]:
    """Open interval of ``theta_b3`` keeping all three polar angles inside (0, pi).

    Empty intervals come back with ``lo >= hi``.
    """
    k, l, _, q, r = _variant_tuple(variant)
    lo, hi = 0.0, PI
    # each derived angle is c + slope * theta_b3 with slope = +-1
    for t0, t1 in zip(_equal_overlap_thetas(0.0, k, l, q, r), _equal_overlap_thetas(1.0, k, l, q, r)):
        slope = t1 - t0
        a, b = (-t0) / slope, (PI - t0) / slope
        lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
    return lo, hi


def equal_overlap_case1_family(theta_b3: float,
                               variant: str | tuple[int, int, int, int, int]) -> PhiSetting:
    """Case-1 angles with ``|C_12|^2 = |C_13|^2 = |C_23|^2``.

    ``variant`` is a name from :data:`EQUAL_OVERLAP_VARIANTS` or an explicit
    ``(k, l, p, q, r)`` tuple. The underlying linear system in the polar angles
    is solvable only when ``r + q = p``.
    """
    diags: list[Diagnostic] = []
    k, l, p, q, r = _variant_tuple(variant)
    if (k, l, p, q, r) not in EQUAL_OVERLAP_VARIANTS.values():
        diags.append(Diagnostic.UNVALIDATED_FAMILY)
    if (k, l) not in CASE1_PAIRS:
        raise DomainError(f"(k, l) = ({k}, {l}) is not one of {CASE1_PAIRS}")
    if any(x not in (0, 1) for x in (p, q, r)):
        raise DomainError("p, q, r must each be 0 or 1")
    if r + q != p:
        raise IncompatibleFamily(f"equations are compatible only at r + q = p (got p={p}, q={q}, r={r})")
    t1, t2 = _equal_overlap_thetas(theta_b3, k, l, q, r)
    for name, t in (("theta_b1", t1), ("theta_b2", t2), ("theta_b3", theta_b3)):
        if not WINDOW_TOL < t < PI - WINDOW_TOL:
            raise OutOfWindow(f"{name} = {t:.12g} outside (0, pi) for this variant",
                              condition=f"0 < {name} < pi")
    return _setting("equal_overlap_case1", (t1, t2, theta_b3), (PI * k, PI * l, 0.0), diags)


def is_unphysical(ext: ExtremalSolution, tol: float = 1e-10) -> bool:
    """An extremal weight of 0 or 1 would need a vanishing psi amplitude."""
    return ext.reason is Feasibility.OK and any(w <= tol or w >= 1 - tol for w in ext.omega_ext)


def equal_overlap_case2_family(k: int, branch: Case2Branch = Case2Branch.SAME) -> PhiSetting:
    """``theta_b1 = 2pi/3`` (k = 0) or ``pi/3`` (k = 1) on a case-2 setting.

    Only the ``same`` branch gives equal overlaps; ``mirror`` is produced for
    inspection and flagged ``Unphysical``.
    """
    if k not in (0, 1):
        raise DomainError(f"k must be 0 or 1, got {k}")
    theta = 2 * PI / 3 if k == 0 else PI / 3
    s = generate_case2(Case2Params(theta, k, branch))
    if is_unphysical(s.extremal()):
        s = PhiSetting("equal_overlap_case2", s.angles, s.diagnostics + (Diagnostic.UNPHYSICAL,), s.branch)
    else:
        s = PhiSetting("equal_overlap_case2", s.angles, s.diagnostics, s.branch)
    return s


def psi_azimuths(theta_a: Sequence[float]) -> tuple[float, ...]:
    """Azimuths ``phi_a`` making ``sum_m e^{i phi_a} sin theta_a`` vanish.

    This is the off-diagonal part of the identity resolution; it needs the
    three lengths ``sin theta_a`` to close a triangle.

    Raises
    ------
    InvalidSet
        When no such azimuths exist.
    """
    s = [math.sin(t) for t in theta_a]
    n = len(s)
    tol = 1e-12
    if n == 2:
        if abs(s[0] - s[1]) > tol:
            raise InvalidSet("two effects resolve the identity only with equal sin(theta_a)")
        return (0.0, PI)
    if n != 3:
        raise InvalidSet("azimuth completion is implemented for N = 2 and N = 3")
    biggest = max(range(3), key=lambda i: s[i])
    if s[biggest] > sum(s) - s[biggest] + tol:
        raise InvalidSet(
            "sin(theta_a) = ({:.6g}, {:.6g}, {:.6g}) cannot close a triangle".format(*s))
    if max(s) == 0.0:
        return (0.0, 0.0, 0.0)
    s1, s2, s3 = s
    if s1 == 0.0:
        return (0.0, 0.0, PI)
    if s2 == 0.0:
        return (0.0, 0.0, PI)
    cos_a = (s3 * s3 - s1 * s1 - s2 * s2) / (2 * s1 * s2)
    alpha = math.acos(min(max(cos_a, -1.0), 1.0))
    v = s1 + s2 * cmath.exp(1j * alpha)
    phi3 = cmath.phase(-v) if s3 > 0 else 0.0
    return (0.0, alpha, wrap_angle(phi3))


def self_consistent_set(phi: Sequence[PhiVector], t_star: ThermalParams) -> MeasurementSet:
    """Complete a phi subset with psi vectors that put the state at its purity minimum.

    Polar angles come from self-consistency at ``t_star``; azimuths from
    :func:`psi_azimuths`.

    Raises
    ------
    SingularOverlap, Unattainable, InvalidSet
    """
    phi = tuple(phi)
    ext = extremal_probabilities(overlap_matrix(phi))
    if ext.reason is Feasibility.SINGULAR_OVERLAP:
        raise SingularOverlap("overlap matrix of the phi vectors is singular")
    theta_a = self_consistent_thetas(ext.omega_ext, t_star)
    phis = psi_azimuths(theta_a)
    n = len(phi)
    psi = tuple(psi_from_angles(EulerAngles(t, f), n) for t, f in zip(theta_a, phis))
    return MeasurementSet(n, psi, phi)


@dataclass(frozen=True)
class CollapsedSet:
    """Effective outcomes after merging phi vectors that coincide up to phase."""

    phi: tuple[StateVector, ...]
    weights: tuple[float, ...]
    groups: tuple[tuple[int, ...], ...]

    @property
    def n_effective(self) -> int:
        return len(self.phi)


def degenerate_collapse(phi: Sequence[StateVector], omega: Sequence[float]) -> CollapsedSet:
    """Group phi vectors with ``|<phi_i|phi_j>| >= 1 - 1e-10`` and add their weights."""
    reps: list[StateVector] = []
    groups: list[list[int]] = []
    for i, v in enumerate(phi):
        for g, r in enumerate(reps):
            if abs(r.inner(v)) >= 1.0 - DUPLICATE_TOL:
                groups[g].append(i)
                break
        else:
            reps.append(v)
            groups.append([i])
    weights = tuple(math.fsum(omega[i] for i in g) for g in groups)
    return CollapsedSet(tuple(reps), weights, tuple(tuple(g) for g in groups))
