"""Randomized verification suites over the algebra, bracket and dynamics layers.

Each suite draws reproducible samples from a seeded generator and returns a
list of :class:`CheckResult` rows, one per identity checked, holding the
worst observed residual and the tolerance it must stay under.  Phase points
are drawn with q uniform on the unit sphere (normalized 4-dim Gaussian) and
positions/momenta componentwise uniform in [-2, 2]; a 10% share of points
forces |q0| <= 1e-6 to probe the nearly-pure-quaternion regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import dynamics, poisson, so3
from .poisson import Chart, DynamicVariable, PhasePoint, coordinate
from .quaternion import (
    Quaternion,
    axis_angle_to_quat,
    quat_conj,
    quat_inverse,
    quat_mul,
    quat_norm,
    right_action_matrix,
    rotate_vector,
)

SMALL_Q0 = 1e-6
SMALL_Q0_FRACTION = 0.1


@dataclass(frozen=True)
class CheckResult:
    """One verified identity: worst residual against its tolerance."""

    name: str
    residual: float
    tolerance: float
    n: int
    mode: str = "max"  # "max": residual <= tol, "min": residual >= tol

    @property
    def passed(self) -> bool:
        if self.mode == "min":
            return self.residual >= self.tolerance
        return self.residual <= self.tolerance


def random_quat(rng: np.random.Generator, scale: float = 1.0) -> Quaternion:
    return Quaternion.from_array(scale * rng.standard_normal(4))


def random_unit_quat(rng: np.random.Generator, small_q0: bool = False) -> Quaternion:
    a = rng.standard_normal(4)
    if small_q0:
        a[0] = rng.uniform(-SMALL_Q0, SMALL_Q0)
        n = np.linalg.norm(a[1:])
        a[1:] *= math.sqrt(max(1.0 - a[0] ** 2, 0.0)) / n
        return Quaternion.from_array(a)
    return Quaternion.from_array(a / np.linalg.norm(a))


def random_phase_point(rng: np.random.Generator, chart: Chart,
                       small_q0: bool = False) -> PhasePoint:
    return PhasePoint(
        x=rng.uniform(-2.0, 2.0, 3),
        p=rng.uniform(-2.0, 2.0, 3),
        q=random_unit_quat(rng, small_q0),
        mom=rng.uniform(-2.0, 2.0, 3),
        chart=chart,
    )


def _small_q0_flags(rng: np.random.Generator, n: int) -> np.ndarray:
    flags = np.zeros(n, dtype=bool)
    k = max(1, int(SMALL_Q0_FRACTION * n)) if n > 0 else 0
    flags[:k] = True
    rng.shuffle(flags)
    return flags


def random_polynomial(rng: np.random.Generator, chart: Optional[Chart] = None,
                      indices: tuple[int, ...] = tuple(range(6, 13)),
                      n_terms: int = 5) -> DynamicVariable:
    """Random degree-<=2 polynomial in the chosen coordinates, analytic grad."""
    var = coordinate(int(rng.choice(indices)), chart) * float(rng.uniform(-1, 1))
    for _ in range(n_terms - 1):
        a = coordinate(int(rng.choice(indices)), chart)
        if rng.uniform() < 0.5:
            b = coordinate(int(rng.choice(indices)), chart)
            var = var + float(rng.uniform(-1, 1)) * (a * b)
        else:
            var = var + float(rng.uniform(-1, 1)) * a
    return var


# ---------------------------------------------------------------------------
# quaternion algebra and the rotation maps


def _comp_dist(a: Quaternion, b: Quaternion) -> float:
    return max(abs(a.q0 - b.q0), abs(a.q1 - b.q1), abs(a.q2 - b.q2), abs(a.q3 - b.q3))


def algebra_checks(rng: np.random.Generator, n: int) -> list[CheckResult]:
    """Identities of the quaternion product, conjugation, norm and inverse."""
    e = [Quaternion.basis(mu) for mu in range(4)]
    # plain-float batch; three operands per sample
    draw = rng.standard_normal((n, 3, 4)).tolist()

    worst = 0.0
    for r in range(1, 4):
        for s in range(1, 4):
            prod = quat_mul(e[r], e[s]).as_array()
            expect = np.zeros(4)
            if r == s:
                expect[0] = -1.0
            else:
                t = ({1, 2, 3} - {r, s}).pop()
                expect[t] = poisson.LEVI[r - 1, s - 1, t - 1]
            worst = max(worst, float(np.max(np.abs(prod - expect))))
    out = [CheckResult("defining relations e_r e_s", worst, 0.0, 9)]

    e0 = Quaternion.identity()
    w_ident = w_assoc = w_conj = w_norm = w_inv = w_pure = w_ract = 0.0
    for i in range(n):
        a = Quaternion.from_array(draw[i][0])
        b = Quaternion.from_array(draw[i][1])
        c = Quaternion.from_array(draw[i][2])
        ab = quat_mul(a, b)

        w_ident = max(w_ident, _comp_dist(quat_mul(e[0], a), a),
                      _comp_dist(quat_mul(a, e[0]), a))
        w_assoc = max(w_assoc, _comp_dist(quat_mul(a, quat_mul(b, c)), quat_mul(ab, c)))
        w_conj = max(w_conj, _comp_dist(quat_conj(ab),
                                        quat_mul(quat_conj(b), quat_conj(a))))
        na, nb = quat_norm(a), quat_norm(b)
        w_norm = max(w_norm, abs(quat_norm(ab) - na * nb) / max(na * nb, 1e-300))
        if na > 1e-8:
            w_inv = max(w_inv, _comp_dist(quat_mul(a, quat_inverse(a)), e0))

        x1, x2, x3 = draw[i][0][1:]
        y1, y2, y3 = draw[i][1][1:]
        xy = quat_mul(Quaternion.pure((x1, x2, x3)), Quaternion.pure((y1, y2, y3)))
        yx = quat_mul(Quaternion.pure((y1, y2, y3)), Quaternion.pure((x1, x2, x3)))
        dot = x1 * y1 + x2 * y2 + x3 * y3
        w_pure = max(
            w_pure,
            abs(-0.5 * (xy.q0 + yx.q0) - dot),
            abs(0.5 * (xy.q1 + yx.q1)), abs(0.5 * (xy.q2 + yx.q2)),
            abs(0.5 * (xy.q3 + yx.q3)), abs(0.5 * (xy.q0 - yx.q0)),
            abs(0.5 * (xy.q1 - yx.q1) - (x2 * y3 - x3 * y2)),
            abs(0.5 * (xy.q2 - yx.q2) - (x3 * y1 - x1 * y3)),
            abs(0.5 * (xy.q3 - yx.q3) - (x1 * y2 - x2 * y1)),
        )

        lhs = right_action_matrix(b) @ a.as_array()
        w_ract = max(w_ract, abs(lhs[0] - ab.q0), abs(lhs[1] - ab.q1),
                     abs(lhs[2] - ab.q2), abs(lhs[3] - ab.q3))

    out.append(CheckResult("identity element e0", w_ident, 0.0, n))
    out.append(CheckResult("associativity a(bc) = (ab)c", w_assoc, 1e-13, n))
    out.append(CheckResult("anti-homomorphism (ab)^dag = b^dag a^dag", w_conj, 1e-13, n))
    out.append(CheckResult("norm multiplicativity |ab| = |a||b| (rel)", w_norm, 1e-13, n))
    out.append(CheckResult("inverse q q^-1 = e0", w_inv, 1e-13, n))
    out.append(CheckResult("pure products give dot and cross", w_pure, 1e-13, n))
    out.append(CheckResult("right-action matrix R_b q = q b", w_ract, 1e-13, n))
    return out


def rotation_checks(rng: np.random.Generator, n: int) -> list[CheckResult]:
    """Group homomorphism, double cover, and matrix->quaternion roundtrips."""
    out = []
    units = rng.standard_normal((n, 2, 4))
    units /= np.linalg.norm(units, axis=2, keepdims=True)
    worst = 0.0
    for i in range(n):
        q1 = Quaternion.from_array(units[i, 0])
        q2 = Quaternion.from_array(units[i, 1])
        lhs = so3.quat_to_matrix(quat_mul(q1, q2))
        rhs = so3.quat_to_matrix(q1) @ so3.quat_to_matrix(q2)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    out.append(CheckResult("homomorphism G(q1 q2) = G(q1) G(q2)", worst, 1e-13, n))

    worst = 0.0
    for i in range(n):
        q = Quaternion.from_array(units[i, 0])
        worst = max(worst, float(np.max(np.abs(
            so3.quat_to_matrix(-q) - so3.quat_to_matrix(q)))))
    out.append(CheckResult("double cover G(-q) = G(q)", worst, 0.0, n))

    worst = 0.0
    flags = _small_q0_flags(rng, n)
    for i in range(n):
        q = (random_unit_quat(rng, small_q0=True) if flags[i]
             else Quaternion.from_array(units[i, 1]))
        r = so3.matrix_to_quat(so3.quat_to_matrix(q))
        d = min(_comp_dist(r, q), _comp_dist(r, -q))
        worst = max(worst, d)
    out.append(CheckResult("roundtrip matrix_to_quat(quat_to_matrix(q)) in {q,-q}",
                           worst, 1e-12, n))

    worst = 0.0
    for _ in range(max(1, n // 10)):
        q = random_unit_quat(rng)
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        rx, ry = rotate_vector(q, x), rotate_vector(q, y)
        worst = max(worst, abs(float(rx @ ry) - float(x @ y)),
                    float(np.max(np.abs(np.cross(rx, ry) - rotate_vector(q, np.cross(x, y))))))
    out.append(CheckResult("rotation preserves dot and cross", worst, 1e-13, max(1, n // 10)))
    return out


def maurer_cartan_checks(rng: np.random.Generator, n: int,
                         h: float = 1e-4) -> list[CheckResult]:
    """Right-invariant derivative identity under central differences."""
    residuals = []
    ratios = []
    for _ in range(n):
        base = random_unit_quat(rng)
        u = rng.standard_normal(3)
        v = rng.standard_normal(3)
        alpha = rng.uniform(0.2, 0.8)
        beta = rng.uniform(0.2, 0.8)

        def path(t, base=base, u=u, v=v, alpha=alpha, beta=beta):
            return quat_mul(quat_mul(axis_angle_to_quat(u, alpha * t), base),
                            axis_angle_to_quat(v, beta * t))

        t0 = rng.uniform(-1.0, 1.0)
        r_h = so3.maurer_cartan_residual(path, t0, h)
        r_half = so3.maurer_cartan_residual(path, t0, 0.5 * h)
        residuals.append(r_h)
        if r_half > 1e-13:
            ratios.append(r_h / r_half)
    out = [CheckResult("derivative identity residual at h=1e-4",
                       float(np.max(residuals)), 1e-7, n)]
    med = float(np.median(ratios)) if ratios else 4.0
    out.append(CheckResult("halving-step convergence ratio - 4", abs(med - 4.0), 0.5, len(ratios)))
    return out


# ---------------------------------------------------------------------------
# bracket layer


def bracket_checks(rng: np.random.Generator, n: int) -> list[CheckResult]:
    """Structure-tensor tables against the quaternion-product forms."""
    out = []
    worst_anti = 0.0
    worst_mu = 0.0
    worst_m = 0.0
    worst_xp = 0.0
    flags = _small_q0_flags(rng, n)
    for i in range(n):
        small = bool(flags[i])
        pt_mu = random_phase_point(rng, Chart.INERTIAL_MU, small)
        pt_m = random_phase_point(rng, Chart.MIXED_M, small)
        J_mu = poisson.structure_tensor(pt_mu).j
        J_m = poisson.structure_tensor(pt_m).j
        worst_anti = max(worst_anti,
                         float(np.max(np.abs(J_mu + J_mu.T))),
                         float(np.max(np.abs(J_m + J_m.T))))
        # {q_mu, mom_i} columns against the product forms e_i q and q e_i
        for k in range(3):
            ei_q = quat_mul(Quaternion.basis(k + 1), pt_mu.q).as_array()
            worst_mu = max(worst_mu, float(np.max(np.abs(J_mu[6:10, 10 + k] - ei_q))))
            q_ei = quat_mul(pt_m.q, Quaternion.basis(k + 1)).as_array()
            worst_m = max(worst_m, float(np.max(np.abs(J_m[6:10, 10 + k] - q_ei))))
        worst_xp = max(worst_xp, float(np.max(np.abs(J_mu[0:3, 3:6] - np.eye(3)))))
    out.append(CheckResult("antisymmetry J + J^T = 0", worst_anti, 0.0, n))
    out.append(CheckResult("inertial chart: {q, mu_i} = e_i q", worst_mu, 1e-14, n))
    out.append(CheckResult("mixed chart: {q, M_i} = q e_i", worst_m, 1e-14, n))
    out.append(CheckResult("canonical block {x_i, p_j} = delta_ij", worst_xp, 0.0, n))

    worst = 0.0
    nc = max(1, n // 10)
    for _ in range(nc):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        F = random_polynomial(rng, Chart.INERTIAL_MU)
        G = random_polynomial(rng, Chart.INERTIAL_MU)
        H = random_polynomial(rng, Chart.INERTIAL_MU)
        lhs = poisson.poisson_bracket(F * G, H, pt)
        rhs = (F.value(pt) * poisson.poisson_bracket(G, H, pt)
               + G.value(pt) * poisson.poisson_bracket(F, H, pt))
        worst = max(worst, abs(lhs - rhs))
    out.append(CheckResult("Leibniz rule {FG, H} = F{G,H} + G{F,H}", worst, 1e-10, nc))

    norm_sq = DynamicVariable(
        lambda z: float(z[6:10] @ z[6:10]),
        lambda z: np.concatenate([np.zeros(6), 2.0 * z[6:10], np.zeros(3)]),
        name="|q|^2")
    worst = 0.0
    for _ in range(nc):
        for chart in (Chart.INERTIAL_MU, Chart.MIXED_M):
            pt = random_phase_point(rng, chart)
            for idx in range(13):
                worst = max(worst, abs(poisson.poisson_bracket(norm_sq, coordinate(idx), pt)))
    out.append(CheckResult("norm function commutes with all generators", worst, 1e-11, nc))

    worst = 0.0
    flags = _small_q0_flags(rng, n)
    for i in range(n):
        pt = random_phase_point(rng, Chart.INERTIAL_MU, small_q0=bool(flags[i]))
        b = random_unit_quat(rng)
        worst = max(worst, poisson.right_translation_covariance_check(pt, b))
        if flags[i]:
            worst = max(worst, poisson.right_translation_covariance_check(pt, Quaternion.identity()))
    out.append(CheckResult("right-translated q b obeys the same brackets", worst, 1e-11, n))
    return out


def jacobi_checks(rng: np.random.Generator, n: int, corrupt: bool = False) -> list[CheckResult]:
    out = []
    for chart in (Chart.INERTIAL_MU, Chart.MIXED_M):
        flags = _small_q0_flags(rng, n)
        worst = 0.0
        for i in range(n):
            pt = random_phase_point(rng, chart, small_q0=bool(flags[i]))
            worst = max(worst, poisson.jacobi_residual(pt, corrupt=corrupt))
        out.append(CheckResult(f"Jacobi cyclic residual ({chart.value})", worst, 1e-12, n))
    control = 0.0
    for _ in range(min(n, 100)):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        control = max(control, poisson.jacobi_residual(pt, corrupt=True))
    out.append(CheckResult("negative control (flipped sign) residual", control, 0.1,
                           min(n, 100), mode="min"))
    return out


def poisson_map_checks(rng: np.random.Generator, n: int) -> list[CheckResult]:
    flags = _small_q0_flags(rng, n)
    worst = 0.0
    for i in range(n):
        pt = random_phase_point(rng, Chart.INERTIAL_MU, small_q0=bool(flags[i]))
        worst = max(worst, poisson.poisson_map_residual(pt))
    return [CheckResult("push-forward brackets to (Q, pi)", worst, 1e-11, n)]


def symplectic_checks(rng: np.random.Generator, n: int) -> list[CheckResult]:
    out = []
    worst = 0.0
    for _ in range(n):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        F = random_polynomial(rng, Chart.INERTIAL_MU)
        G = random_polynomial(rng, Chart.INERTIAL_MU)
        xf = poisson.hamiltonian_vector_field(F, pt)
        xg = poisson.hamiltonian_vector_field(G, pt)
        omega = poisson.symplectic_form_eval(pt, xf, xg)
        worst = max(worst, abs(omega - poisson.poisson_bracket(F, G, pt)))
    out.append(CheckResult("duality Omega(X_F, X_G) = {F, G}", worst, 1e-9, n))

    worst = 0.0
    for _ in range(n):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        u = _random_tangent(rng, pt)
        worst = max(worst, abs(poisson.symplectic_form_eval(pt, u, u)))
    out.append(CheckResult("antisymmetry Omega(u, u) = 0", worst, 0.0, n))

    worst = 0.0
    for _ in range(n):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        fields = [poisson.hamiltonian_vector_field(coordinate(f"mu{k + 1}"), pt)
                  for k in range(3)]
        for k in range(3):
            ek_q = quat_mul(Quaternion.basis(k + 1), pt.q).as_array()
            worst = max(worst, float(np.max(np.abs(fields[k][6:10] - ek_q))))
            # Liouville form on the left-invariant field returns mu_k
            u = np.concatenate([ek_q, 2.0 * np.cross(_basis3(k), pt.mom)])
            worst = max(worst, abs(poisson.liouville_form_eval(pt, u) - pt.mom[k]))
        # q-block columns of the momentum fields against the closed-form table
        eta = np.stack([np.array([fields[k][6 + mu] for k in range(3)])
                        for mu in range(4)])
        q0, q1, q2, q3 = pt.q.as_array()
        eta_expect = np.array([
            [-q1, -q2, -q3],
            [q0, q3, -q2],
            [-q3, q0, q1],
            [q2, -q1, q0],
        ])
        worst = max(worst, float(np.max(np.abs(eta - eta_expect))))
    out.append(CheckResult("left-invariant fields and the eta table", worst, 1e-13, n))

    worst = 0.0
    for _ in range(n):
        pt = random_phase_point(rng, Chart.INERTIAL_MU)
        F = random_polynomial(rng, Chart.INERTIAL_MU, indices=tuple(range(6, 10)))
        G = random_polynomial(rng, Chart.INERTIAL_MU, indices=tuple(range(6, 10)))
        field = poisson.hamiltonian_vector_field(F, pt)
        worst = max(worst, float(np.max(np.abs(field[0:10]))),
                    abs(poisson.poisson_bracket(F, G, pt)))
    out.append(CheckResult("orientation-only functions commute; fields are pure momentum",
                           worst, 1e-15, n))
    return out


def _basis3(k: int) -> np.ndarray:
    e = np.zeros(3)
    e[k] = 1.0
    return e


def _random_tangent(rng: np.random.Generator, pt: PhasePoint) -> np.ndarray:
    q4 = pt.q.as_array()
    w = rng.standard_normal(4)
    w -= (w @ q4) * q4
    return np.concatenate([w, rng.uniform(-2.0, 2.0, 3)])


# ---------------------------------------------------------------------------
# dynamics oracle


def _oracle_params() -> list[dynamics.BodyParams]:
    inertia = dynamics.InertiaTensor(1.0, 2.0, 3.0)
    pots = [dynamics.free(), dynamics.linear_gravity(1.0, 9.81),
            dynamics.heavy_top(1.0, 9.81, 1.0), dynamics.harmonic(1.0)]
    return [dynamics.BodyParams(1.0, inertia, pot) for pot in pots]


def dynamics_oracle_checks(rng: np.random.Generator, n: int) -> list[CheckResult]:
    """Algebraic equations of motion against the bracket engine J grad(H)."""
    out = []
    for params in _oracle_params():
        H = dynamics.hamiltonian_variable(params)
        worst = 0.0
        for _ in range(n):
            pt = random_phase_point(rng, Chart.MIXED_M)
            rhs = dynamics.eom_rhs(pt, params)
            field = poisson.hamiltonian_vector_field(H, pt)
            worst = max(worst, float(np.max(np.abs(rhs - field))))
        out.append(CheckResult(f"eom_rhs = J grad(H), potential {params.potential.name}",
                               worst, 1e-9, n))

    params = _oracle_params()[2]  # heavy top: the only torque-generating builtin
    worst = 0.0
    for _ in range(min(n, 200)):
        pt = random_phase_point(rng, Chart.MIXED_M)
        q4 = pt.q.as_array()
        g = params.potential.gradient_q(pt.x, q4)
        q0, qv = q4[0], q4[1:]
        expanded = g[0] * qv - q0 * g[1:] - np.cross(g[1:], qv)
        w = quat_mul(quat_conj(pt.q), Quaternion.from_array(g))
        compact = -np.array([w.q1, w.q2, w.q3])
        worst = max(worst, float(np.max(np.abs(expanded - compact))))
    out.append(CheckResult("expanded and compact torque forms agree", worst, 1e-12,
                           min(n, 200)))

    inertia = dynamics.InertiaTensor(1.0, 2.0, 3.0)
    worst = 0.0
    for _ in range(min(n, 200)):
        M = rng.uniform(-2.0, 2.0, 3)
        omega = dynamics.angular_velocity(M, inertia)
        h = 1e-6
        for i in range(3):
            dp = M.copy()
            dm = M.copy()
            dp[i] += h
            dm[i] -= h
            fd = (dynamics.spin_kinetic(dp, inertia) - dynamics.spin_kinetic(dm, inertia)) / (2 * h)
            worst = max(worst, abs(2.0 * fd - omega[i]))
    out.append(CheckResult("2 dT_spin/dM equals the angular velocity", worst, 1e-8,
                           min(n, 200)))
    return out


# ---------------------------------------------------------------------------
# suite registry


def suite_algebra(rng, n, corrupt=False):
    return algebra_checks(rng, n) + rotation_checks(rng, n)


def suite_brackets(rng, n, corrupt=False):
    return bracket_checks(rng, n)


def suite_jacobi(rng, n, corrupt=False):
    return jacobi_checks(rng, n, corrupt=corrupt)


def suite_poisson_map(rng, n, corrupt=False):
    return poisson_map_checks(rng, n)


def suite_maurer_cartan(rng, n, corrupt=False):
    return maurer_cartan_checks(rng, n)


def suite_symplectic(rng, n, corrupt=False):
    return symplectic_checks(rng, n)


def suite_dynamics_oracle(rng, n, corrupt=False):
    return dynamics_oracle_checks(rng, n)


SUITES: dict[str, Callable] = {
    "algebra": suite_algebra,
    "brackets": suite_brackets,
    "jacobi": suite_jacobi,
    "poisson_map": suite_poisson_map,
    "maurer_cartan": suite_maurer_cartan,
    "symplectic": suite_symplectic,
    "dynamics_oracle": suite_dynamics_oracle,
}

DEFAULT_POINTS: dict[str, int] = {
    "algebra": 10000,
    "brackets": 1000,
    "jacobi": 1000,
    "poisson_map": 1000,
    "maurer_cartan": 100,
    "symplectic": 100,
    "dynamics_oracle": 1000,
}


def run_suite(name: str, seed: int = 0, n_points: Optional[int] = None,
              corrupt: bool = False) -> list[CheckResult]:
    """Run one named suite with a reproducible generator.

    Raises
    ------
    KeyError
        If the suite name is unknown.
    """
    fn = SUITES[name]
    n = n_points if n_points is not None else DEFAULT_POINTS[name]
    rng = np.random.default_rng(seed)
    return fn(rng, n, corrupt=corrupt)
