import math

import numpy as np
import pytest
import scipy.optimize

from povm_prep.basis import EulerAngles, PhiVector, phi_from_angles
from povm_prep.errors import NotOnSimplex, SingularOverlap, Unattainable
from povm_prep.preparation import ThermalParams, reduced_density
from povm_prep.purity import (
    Feasibility,
    OverlapMatrix,
    asymptotic_purities,
    brute_force_min,
    extremal_probabilities,
    kT_grid,
    max_self_consistent_kT,
    overlap_closed_form,
    overlap_matrix,
    purity_bilinear,
    self_consistent_theta_a,
    self_consistent_thetas,
    temperature_sweep,
)
from povm_prep.settings import Case3Params, case3_setting
from sampling import REF_CASE3, random_case1, random_case3, random_phi, random_set

PI = math.pi


def _bloch(v: PhiVector) -> np.ndarray:
    a = v.angles()
    return np.array([math.sin(a.theta) * math.cos(a.phi), math.sin(a.theta) * math.sin(a.phi), math.cos(a.theta)])


def _kkt_oracle(c: np.ndarray) -> tuple[np.ndarray, float]:
    """Stationary point of w.C.w on sum(w) = 1 from the Lagrange system."""
    n = len(c)
    k = np.zeros((n + 1, n + 1))
    k[:n, :n] = 2 * c
    k[:n, n] = k[n, :n] = 1
    rhs = np.zeros(n + 1)
    rhs[n] = 1
    w = np.linalg.solve(k, rhs)[:n]
    return w, float(w @ c @ w)


def test_overlap_matrix_examples():
    c = overlap_matrix([PhiVector(1, 0), PhiVector(0, 1)])
    assert c.c2.tolist() == [[1.0, 0.0], [0.0, 1.0]]
    v = phi_from_angles(EulerAngles(0.4, 2.0))
    assert overlap_matrix([v, v]).c2[0, 1] == pytest.approx(1, abs=1e-15)


def test_overlap_matrix_matches_closed_form():
    rng = np.random.default_rng(0)
    for _ in range(500):
        angles = [EulerAngles(rng.uniform(0, PI), rng.uniform(0, 2 * PI)) for _ in range(3)]
        c = overlap_matrix([phi_from_angles(a) for a in angles]).as_array()
        assert np.max(np.abs(c - overlap_closed_form(angles))) < 1e-12


def test_overlap_matrix_validation():
    with pytest.raises(ValueError):
        OverlapMatrix.from_rows([[1, 0.2], [0.3, 1]])
    with pytest.raises(ValueError):
        OverlapMatrix.from_rows([[0.9, 0], [0, 1]])
    with pytest.raises(ValueError):
        OverlapMatrix.from_rows([[1, 1.5], [1.5, 1]])


def test_extremal_examples():
    e = extremal_probabilities(overlap_matrix([PhiVector(1, 0), PhiVector(0, 1)]))
    assert e.omega_ext == (0.5, 0.5) and e.p_min == 0.5 and e.feasible
    for x in (0.1, 0.25, 0.6):
        e = extremal_probabilities(OverlapMatrix.from_rows([[1, x, x], [x, 1, x], [x, x, 1]]))
        assert e.omega_ext == pytest.approx((1 / 3,) * 3, abs=1e-14)
    rng = np.random.default_rng(1)
    for _ in range(50):
        assert random_case1(rng).extremal().p_min == pytest.approx(0.5, abs=1e-12)


def test_extremal_matches_lagrange_and_geometry():
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(400):
        phi = random_phi(rng)
        c = overlap_matrix(phi)
        e = extremal_probabilities(c)
        if e.reason is Feasibility.SINGULAR_OVERLAP:
            continue
        w, p = _kkt_oracle(c.as_array())
        if np.linalg.cond(c.as_array()) < 1e6:
            np.testing.assert_allclose(e.omega_ext, w, atol=1e-8)
            assert e.p_min == pytest.approx(p, abs=1e-10)
        # P_min = (1 + d^2)/2, d = distance from the origin to the plane of the Bloch points
        r = [_bloch(v) for v in phi]
        normal = np.cross(r[1] - r[0], r[2] - r[0])
        d = abs(normal @ r[0]) / np.linalg.norm(normal)
        assert e.p_min == pytest.approx((1 + d * d) / 2, abs=1e-9)
        if e.feasible:
            assert 0.5 - 1e-12 <= e.p_min <= 1
            assert math.fsum(e.omega_ext) == pytest.approx(1, abs=1e-10)
            assert purity_bilinear(c, e.omega_ext) == pytest.approx(e.p_min, abs=1e-10)
            checked += 1
    assert checked > 50


def test_singular_overlap_reported_as_data():
    v = phi_from_angles(EulerAngles(0.3, 0.3))
    e = extremal_probabilities(overlap_matrix([v, v, phi_from_angles(EulerAngles(1.0))]))
    assert e.reason is Feasibility.SINGULAR_OVERLAP and e.p_min is None and not e.feasible


def test_purity_bilinear():
    c = overlap_matrix([PhiVector(1, 0), PhiVector(0, 1)])
    assert purity_bilinear(c, (0.5, 0.5)) == 0.5
    rng = np.random.default_rng(3)
    c3 = overlap_matrix(random_phi(rng))
    for k in range(3):
        e = [0.0] * 3
        e[k] = 1.0
        assert purity_bilinear(c3, e) == pytest.approx(1)
    with pytest.raises(NotOnSimplex):
        purity_bilinear(c3, (0.5, 0.6, 0.0))
    with pytest.raises(NotOnSimplex):
        purity_bilinear(c3, (1.2, -0.2, 0.0))


def test_purity_bilinear_matches_trace_purity():
    rng = np.random.default_rng(4)
    for _ in range(300):
        s = random_set(rng)
        st = reduced_density(s, ThermalParams(rng.exponential(2)))
        assert purity_bilinear(overlap_matrix(s.phi), st.probabilities) == pytest.approx(st.purity, abs=1e-12)


def test_brute_force_examples():
    rng = np.random.default_rng(5)
    n = 0
    while n < 5:
        s = random_case1(rng)
        if not s.extremal().feasible:
            continue
        w, p = brute_force_min(overlap_matrix(s.vectors()), 1e-3)
        assert abs(p - 0.5) < 1e-4
        n += 1
    w, p = brute_force_min(overlap_matrix([PhiVector(1, 0), PhiVector(0, 1)]), 1e-3)
    assert w == pytest.approx((0.5, 0.5)) and p == pytest.approx(0.5)
    with pytest.raises(ValueError):
        brute_force_min(overlap_matrix([PhiVector(1, 0), PhiVector(0, 1)]), 0.5)


def _slsqp_min(c: np.ndarray) -> float:
    """Simplex minimum from several SLSQP starts; independent of the lattice."""
    n = len(c)
    best = math.inf
    cons = ({"type": "eq", "fun": lambda w: w.sum() - 1},)
    for start in [np.full(n, 1 / n), *np.eye(n) * 0.9 + 0.1 / n]:
        r = scipy.optimize.minimize(lambda w: w @ c @ w, start, bounds=[(0, 1)] * n,
                                    constraints=cons, method="SLSQP", options={"ftol": 1e-14})
        best = min(best, r.fun)
    return best


def test_brute_force_on_infeasible_instances():
    rng = np.random.default_rng(6)
    seen = 0
    while seen < 20:
        c = overlap_matrix(random_phi(rng))
        e = extremal_probabilities(c)
        if e.reason is not Feasibility.OMEGA_OUT_OF_RANGE:
            continue
        w, p = brute_force_min(c, 1e-3)
        # the formal stationary value lies off the simplex, strictly below anything reachable
        assert p > e.p_min - 1e-10
        assert p >= _slsqp_min(c.as_array()) - 1e-9
        assert p - _slsqp_min(c.as_array()) < 1e-4
        seen += 1


def test_brute_force_four_outcomes():
    rng = np.random.default_rng(7)
    c = overlap_matrix(random_phi(rng, 4))
    w, p = brute_force_min(c, 0.02)
    assert sum(w) == pytest.approx(1) and p >= 0.5 - 1e-12
    assert p == pytest.approx(_slsqp_min(c.as_array()), abs=5e-3)


def test_self_consistent_theta_a():
    for b in (0.1, 1, math.inf):
        assert self_consistent_theta_a(1 / 3, ThermalParams(b)) == PI / 2
    with pytest.raises(Unattainable):
        self_consistent_theta_a(0.3, ThermalParams(1e-6))
    # cos theta = (1 - 3 w) coth(beta/2)
    t = ThermalParams(2.0)
    assert math.cos(self_consistent_theta_a(0.25, t)) == pytest.approx(0.25 / math.tanh(1))


def test_self_consistent_thetas_reports_index():
    with pytest.raises(Unattainable) as exc:
        self_consistent_thetas((0.5, 0.3, 0.2), ThermalParams(0.5))
    assert exc.value.index == 0 and exc.value.cos_value > 1


def test_reference_boundary_against_root_finding():
    s = case3_setting(Case3Params(**REF_CASE3))
    ext = s.extremal()

    def excess(kt):
        return max(abs(1 - 3 * w) for w in ext.omega_ext) / math.tanh(1 / (2 * kt)) - 1

    root = scipy.optimize.brentq(excess, 0.05, 10, xtol=1e-14)
    kt = max_self_consistent_kT(ext.omega_ext)
    assert kt == pytest.approx(root, abs=1e-10)
    assert abs(kt - 1.11) <= 0.02
    self_consistent_thetas(ext.omega_ext, ThermalParams.from_kT(kt))
    with pytest.raises(Unattainable):
        self_consistent_thetas(ext.omega_ext, ThermalParams.from_kT(kt * 1.001))


def test_max_kT_edge_cases():
    assert max_self_consistent_kT((1 / 3, 1 / 3, 1 / 3)) == math.inf
    assert max_self_consistent_kT((0.0, 0.5, 0.5)) == 0.0
    with pytest.raises(Unattainable):
        max_self_consistent_kT((-0.1, 0.6, 0.5))


def test_kT_grid_exact_points():
    g = kT_grid()
    assert len(g) == 201 and g[0].zero_temperature
    assert g[74].kT_over_omega0 == 1.11 and g[-1].kT_over_omega0 == 3.0
    assert [x.kT_over_omega0 for x in g[:3]] == [0.0, 0.015, 0.03]
    with pytest.raises(ValueError):
        kT_grid(points=1)


@pytest.mark.parametrize("i_star", [0, 33, 50, 73])
def test_sweep_minimum_at_t_star(i_star):
    phi = case3_setting(Case3Params(**REF_CASE3)).vectors()
    grid = kT_grid()
    recs = temperature_sweep(phi, grid[i_star], grid)
    p_min = recs[0].p_min
    assert recs[i_star].purity == pytest.approx(p_min, abs=1e-10)
    assert all(r.purity >= p_min - 1e-12 for r in recs)
    assert all(r.coherence_abs > 0 for r in recs[1:])


def test_sweep_order_independent_of_workers():
    phi = case3_setting(Case3Params(**REF_CASE3)).vectors()
    grid = kT_grid(points=41)
    a = temperature_sweep(phi, ThermalParams.from_kT(0.5), grid, workers=1)
    b = temperature_sweep(phi, ThermalParams.from_kT(0.5), grid, workers=4)
    assert a == b


def test_sweep_errors():
    v = phi_from_angles(EulerAngles(0.3))
    with pytest.raises(SingularOverlap):
        temperature_sweep([v, v, phi_from_angles(EulerAngles(1.0))], ThermalParams(1.0), kT_grid(points=3))
    phi = case3_setting(Case3Params(**REF_CASE3)).vectors()
    with pytest.raises(Unattainable):
        temperature_sweep(phi, ThermalParams.from_kT(2.0), kT_grid(points=3))
    # the literal 1.11 lies just past the self-consistency boundary
    with pytest.raises(Unattainable):
        temperature_sweep(phi, ThermalParams.from_kT(1.11), kT_grid(points=3))


def test_asymptotic_purities():
    rng = np.random.default_rng(8)
    v = phi_from_angles(EulerAngles(0.9, 0.2))
    s = random_set(rng, (v, v, v))
    assert asymptotic_purities(s)[0] == pytest.approx(1, abs=1e-12)
    for _ in range(50):
        s = random_set(rng)
        p0, ph = asymptotic_purities(s)
        assert reduced_density(s, ThermalParams(1e3)).purity == pytest.approx(p0, abs=1e-6)
        assert reduced_density(s, ThermalParams(1e-6)).purity == pytest.approx(ph, abs=1e-6)


def test_case3_strictly_above_one_half():
    rng = np.random.default_rng(9)
    for _ in range(200):
        for s in random_case3(rng):
            assert s.extremal().p_min > 0.5
