"""Random draws of settings and measurement sets shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from povm_prep.basis import EulerAngles, MeasurementSet, PhiVector, phi_from_angles, psi_from_angles
from povm_prep.errors import DomainError
from povm_prep.settings import (
    Branch,
    Case1Params,
    Case2Branch,
    Case2Params,
    Case3Params,
    PhiSetting,
    case3_window_violation,
    generate_case1,
    generate_case2,
    generate_case3,
    psi_azimuths,
)

PI = math.pi

# fixed-point reference values
REF_CASE3 = dict(theta_b1=0.8 * PI, delta12=1.4 * PI, delta13=0.75 * PI)
REF_T_STARS = (0.0, 0.5, 0.75, 1.11)


def random_case1(rng: np.random.Generator) -> PhiSetting:
    while True:
        k, l = (1, 0) if rng.random() < 0.5 else (1, 1)
        t1, t2 = rng.uniform(0.0, PI, 2)
        br = Branch.PRINCIPAL if rng.random() < 0.5 else Branch.SUPPLEMENT
        try:
            return generate_case1(Case1Params(t1, t2, k, l, rng.uniform(0, 2 * PI), br))
        except DomainError:
            continue


def random_case2(rng: np.random.Generator) -> PhiSetting:
    t1 = rng.uniform(1e-3, PI - 1e-3)
    k = int(rng.integers(0, 2))
    br = Case2Branch.SAME if rng.random() < 0.5 else Case2Branch.MIRROR
    return generate_case2(Case2Params(t1, k, br))


def random_case3_params(rng: np.random.Generator) -> Case3Params:
    """Uniform draw over the box, kept only when inside the admissible window."""
    while True:
        t1 = rng.uniform(0.0, PI)
        d12 = rng.uniform(PI, 2 * PI)
        d13 = rng.uniform(0.0, PI)
        if case3_window_violation(t1, d12, d13) is None:
            return Case3Params(t1, d12, d13)


def random_case3(rng: np.random.Generator) -> tuple[PhiSetting, ...]:
    return generate_case3(random_case3_params(rng))


def random_diagonal_phi(rng: np.random.Generator) -> PhiSetting:
    pick = rng.integers(0, 3)
    if pick == 0:
        return random_case1(rng)
    if pick == 1:
        return random_case2(rng)
    return random_case3(rng)[0]


def random_phi(rng: np.random.Generator, n: int = 3) -> tuple[PhiVector, ...]:
    return tuple(phi_from_angles(EulerAngles(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * PI)))
                 for _ in range(n))


def random_psi_angles(rng: np.random.Generator) -> tuple[EulerAngles, ...]:
    """Three psi directions whose effects resolve the identity (N = 3)."""
    while True:
        c1, c2 = rng.uniform(-1, 1, 2)
        c3 = -c1 - c2
        if abs(c3) > 1:
            continue
        thetas = [math.acos(c) for c in (c1, c2, c3)]
        try:
            phis = psi_azimuths(thetas)
        except DomainError:
            continue
        g = rng.uniform(0, 2 * PI)
        return tuple(EulerAngles(t, f + g) for t, f in zip(thetas, phis))


def random_set(rng: np.random.Generator, phi=None) -> MeasurementSet:
    if phi is None:
        phi = random_phi(rng)
    psi = tuple(psi_from_angles(a, 3) for a in random_psi_angles(rng))
    return MeasurementSet(3, psi, tuple(phi))


def to_np(m) -> np.ndarray:
    """Mat2 or MatN to a numpy array."""
    return np.array([[complex(x) for x in row] for row in m.tolist()])
