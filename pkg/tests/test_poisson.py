"""Structure tensors, brackets, Jacobi and Poisson-map verifiers."""

import numpy as np
import pytest

from qhdyn import (
    Chart,
    ChartError,
    DomainError,
    DynamicVariable,
    PhasePoint,
    Quaternion,
    coordinate,
    hamiltonian_vector_field,
    jacobi_residual,
    momentum_along,
    poisson_bracket,
    poisson_map_residual,
    quat_mul,
    right_translation_covariance_check,
    rotation_entry_variable,
    structure_tensor,
)
from qhdyn.poisson import structure_jacobian, _tensor_components
from qhdyn.verify import random_phase_point, random_polynomial, random_unit_quat


@pytest.fixture
def rng():
    return np.random.default_rng(101)


def test_phase_point_coords_roundtrip(rng):
    pt = random_phase_point(rng, Chart.MIXED_M)
    back = PhasePoint.from_coords(pt.coords(), Chart.MIXED_M)
    np.testing.assert_array_equal(back.coords(), pt.coords())


def test_phase_point_validation():
    q = Quaternion.identity()
    with pytest.raises(DomainError):
        PhasePoint(np.zeros(2), np.zeros(3), q, np.zeros(3), Chart.MIXED_M)
    with pytest.raises(ChartError):
        PhasePoint(np.zeros(3), np.zeros(3), q, np.zeros(3), "not-a-chart")


def test_structure_tensor_mixed_momentum_block(rng):
    # {M1, M2} = -2 M3 and cyclic
    for _ in range(20):
        pt = random_phase_point(rng, Chart.MIXED_M)
        J = structure_tensor(pt).j
        M = pt.mom
        assert J[10, 11] == -2.0 * M[2]
        assert J[11, 12] == -2.0 * M[0]
        assert J[12, 10] == -2.0 * M[1]


def test_structure_tensor_inertial_at_identity():
    pt = PhasePoint(np.zeros(3), np.zeros(3), Quaternion.identity(),
                    np.array([0.4, -0.7, 1.2]), Chart.INERTIAL_MU)
    J = structure_tensor(pt).j
    # {mu_i, q_j} = eps_ijk q_k - q0 delta_ij reduces to -delta_ij at q = e0
    np.testing.assert_array_equal(J[10:13, 7:10], -np.eye(3))
    np.testing.assert_array_equal(J[10:13, 6], np.zeros(3))


def test_structure_tensor_antisymmetry_and_blocks(rng):
    for chart in (Chart.INERTIAL_MU, Chart.MIXED_M):
        pt = random_phase_point(rng, chart)
        st = structure_tensor(pt)
        np.testing.assert_array_equal(st.j, -st.j.T)
        np.testing.assert_array_equal(st.j[6:10, 6:10], np.zeros((4, 4)))
        np.testing.assert_array_equal(st.j[0:3, 3:6], np.eye(3))
        # translational block decouples from the rotational one
        np.testing.assert_array_equal(st.j[0:6, 6:13], np.zeros((6, 7)))
        assert st.labels[0] == "x1" and len(st.labels) == 13


def test_structure_tensor_rotational_block(rng):
    pt = random_phase_point(rng, Chart.INERTIAL_MU)
    st = structure_tensor(pt, full=False)
    assert st.j.shape == (7, 7)
    assert st.labels == ("q0", "q1", "q2", "q3", "mu1", "mu2", "mu3")
    np.testing.assert_array_equal(st.j, structure_tensor(pt).j[6:, 6:])


def test_structure_jacobian_matches_finite_differences(rng):
    z = rng.uniform(-2, 2, 13)
    h = 1e-6
    for chart in (Chart.INERTIAL_MU, Chart.MIXED_M):
        dj = structure_jacobian(chart)
        for L in range(13):
            zp, zm = z.copy(), z.copy()
            zp[L] += h
            zm[L] -= h
            fd = (_tensor_components(zp, chart) - _tensor_components(zm, chart)) / (2 * h)
            np.testing.assert_allclose(dj[:, :, L], fd, atol=1e-9)


def test_bracket_table_examples(rng):
    for _ in range(20):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        q = pt.q.as_array()
        for i in range(3):
            got = poisson_bracket(coordinate(f"mu{i + 1}"), coordinate("q0"), pt)
            assert got == pytest.approx(q[i + 1], abs=1e-15)
        assert poisson_bracket(coordinate("x1"), coordinate("p1"), pt) == 1.0
        F = coordinate("q0")
        assert poisson_bracket(F, F, pt) == 0.0


def test_bracket_chart_mismatch_raises(rng):
    pt = random_phase_point(rng, Chart.MIXED_M)
    with pytest.raises(ChartError):
        poisson_bracket(coordinate("mu1"), coordinate("q0"), pt)


def test_bracket_antisymmetry_and_leibniz(rng):
    for _ in range(30):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        F = random_polynomial(rng, Chart.INERTIAL_MU)
        G = random_polynomial(rng, Chart.INERTIAL_MU)
        H = random_polynomial(rng, Chart.INERTIAL_MU)
        assert poisson_bracket(F, G, pt) == pytest.approx(-poisson_bracket(G, F, pt), abs=1e-12)
        lhs = poisson_bracket(F * G, H, pt)
        rhs = (F.value(pt) * poisson_bracket(G, H, pt)
               + G.value(pt) * poisson_bracket(F, H, pt))
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_dynamic_variable_fd_fallback_matches_analytic(rng):
    # the same function with and without a registered gradient
    for _ in range(10):
        z = random_phase_point(rng, Chart.INERTIAL_MU).coords()
        for i in range(3):
            for j in range(3):
                var = rotation_entry_variable(i, j)
                bare = DynamicVariable(var.fn)
                assert not bare.has_analytic_gradient
                ga, gf = var.gradient(z), bare.gradient(z)
                np.testing.assert_allclose(ga, gf, rtol=1e-6, atol=1e-8)


def test_dynamic_variable_arithmetic_gradients(rng):
    z = random_phase_point(rng, Chart.INERTIAL_MU).coords()
    a = coordinate("q1")
    b = coordinate("mu2")
    combo = 2.0 * a * b + a - 0.5
    expect = np.zeros(13)
    expect[7] = 2.0 * z[11] + 1.0
    expect[11] = 2.0 * z[7]
    np.testing.assert_allclose(combo.gradient(z), expect, atol=1e-14)
    assert combo.value(z) == pytest.approx(2.0 * z[7] * z[11] + z[7] - 0.5)


def _jacobi_bruteforce(z, chart):
    J = _tensor_components(z, chart)
    dJ = structure_jacobian(chart)
    n = 13
    worst = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = 0.0
                for l in range(n):
                    s += (dJ[i, j, l] * J[l, k] + dJ[j, k, l] * J[l, i]
                          + dJ[k, i, l] * J[l, j])
                worst = max(worst, abs(s))
    return worst


def test_jacobi_residual_matches_bruteforce(rng):
    # independent triple-loop evaluation of the cyclic sum
    for chart in (Chart.INERTIAL_MU, Chart.MIXED_M):
        pt = random_phase_point(rng, chart)
        fast = jacobi_residual(pt)
        slow = _jacobi_bruteforce(pt.coords(), chart)
        assert fast == pytest.approx(slow, abs=1e-14)


def test_jacobi_residual_both_charts(rng):
    for chart in (Chart.INERTIAL_MU, Chart.MIXED_M):
        worst = max(jacobi_residual(random_phase_point(rng, chart)) for _ in range(200))
        assert worst <= 1e-12


def test_jacobi_negative_control(rng):
    worst = max(jacobi_residual(random_phase_point(rng, Chart.INERTIAL_MU), corrupt=True)
                for _ in range(50))
    assert worst > 0.1


def test_poisson_map_residual(rng):
    worst = 0.0
    for i in range(100):
        pt = random_phase_point(rng, Chart.INERTIAL_MU, small_q0=(i % 10 == 0))
        worst = max(worst, poisson_map_residual(pt))
    assert worst <= 1e-11


def test_poisson_map_requires_inertial_chart(rng):
    with pytest.raises(ChartError):
        poisson_map_residual(random_phase_point(rng, Chart.MIXED_M))


def test_rotation_entries_commute(rng):
    # {Q_ij, Q_kl} = 0 exactly: the q-q block of the tensor vanishes
    pt = random_phase_point(rng, Chart.INERTIAL_MU)
    v1 = rotation_entry_variable(0, 1)
    v2 = rotation_entry_variable(2, 2)
    assert poisson_bracket(v1, v2, pt) == 0.0


def test_hamiltonian_vector_field_momentum_hamiltonian(rng):
    for _ in range(30):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        xi = rng.standard_normal(3)
        field = hamiltonian_vector_field(momentum_along(xi), pt)
        expect = quat_mul(Quaternion.pure(xi), pt.q).as_array()
        np.testing.assert_allclose(field[6:10], expect, atol=1e-14)


def test_hamiltonian_vector_field_constant_and_q0(rng):
    pt = random_phase_point(rng, Chart.INERTIAL_MU)
    const = DynamicVariable(lambda z: 3.5, lambda z: np.zeros(13))
    np.testing.assert_array_equal(hamiltonian_vector_field(const, pt), np.zeros(13))
    field = hamiltonian_vector_field(coordinate("q0"), pt)
    np.testing.assert_allclose(field[10:13], pt.q.qv, atol=1e-15)
    np.testing.assert_array_equal(field[0:10], np.zeros(10))


def test_hamiltonian_vector_field_is_bracket_derivative(rng):
    for _ in range(20):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        F = random_polynomial(rng, Chart.INERTIAL_MU)
        H = random_polynomial(rng, Chart.INERTIAL_MU)
        field = hamiltonian_vector_field(H, pt)
        directional = float(F.gradient(pt.coords()) @ field)
        assert poisson_bracket(F, H, pt) == pytest.approx(directional, abs=1e-9)


def test_right_translation_covariance(rng):
    pt = random_phase_point(rng, Chart.INERTIAL_MU)
    assert right_translation_covariance_check(pt, Quaternion.identity()) <= 1e-11
    worst = 0.0
    for i in range(50):
        pt = random_phase_point(rng, Chart.INERTIAL_MU, small_q0=(i % 5 == 0))
        worst = max(worst, right_translation_covariance_check(pt, random_unit_quat(rng)))
    assert worst <= 1e-11


def test_norm_function_commutes_with_generators(rng):
    norm_sq = DynamicVariable(
        lambda z: float(z[6:10] @ z[6:10]),
        lambda z: np.concatenate([np.zeros(6), 2.0 * z[6:10], np.zeros(3)]))
    for chart in (Chart.INERTIAL_MU, Chart.MIXED_M):
        for _ in range(20):
            pt = random_phase_point(rng, chart)
            for idx in range(13):
                assert abs(poisson_bracket(norm_sq, coordinate(idx), pt)) <= 1e-11
