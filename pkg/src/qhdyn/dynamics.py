"""Rigid-body Hamiltonian, algebraic equations of motion, and an integrator.

The state lives in the mixed chart: (x, p) are spatial, the quaternion q maps
body to space, and M is the doubled body-frame angular momentum.  With
Omega_i = M_i / (2 I_i) the equations of motion are purely algebraic:

    dx/dt = p / m
    dp/dt = -dV/dx
    dq/dt = (1/2) q Omega            (Omega as a pure quaternion)
    dM/dt = -Omega x M - Im(q^-1 grad_q V)

where grad_q V is the 4-component quaternion gradient of the potential and
Im takes the vector part.  These agree with the structure-tensor route
J grad(H) of :mod:`qhdyn.poisson`, which the test suite uses as the oracle.

The energy is H = p^2/(2m) + (M1^2/I1 + M2^2/I2 + M3^2/I3)/8 + V(x, q);
the factor 1/8 reflects the doubling M = 2 Pi of the physical momentum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ChartError, DomainError, IntegrationAborted
from .poisson import Chart, DynamicVariable, PhasePoint
from .quaternion import TOL_UNIT

Vec3 = np.ndarray

_FD_STEP = float(np.cbrt(np.finfo(float).eps))


@dataclass(frozen=True)
class InertiaTensor:
    """Principal moments of inertia (body frame, kg m^2), all positive."""

    i1: float
    i2: float
    i3: float

    def __post_init__(self):
        for name in ("i1", "i2", "i3"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"inertia {name} must be a positive finite number, got {v!r}")
            object.__setattr__(self, name, v)
        # A rigid body made of real mass satisfies the triangle inequalities;
        # exotic values are allowed but flagged.
        for a, b, c in ((self.i1, self.i2, self.i3),
                        (self.i2, self.i3, self.i1),
                        (self.i3, self.i1, self.i2)):
            if a + b < c:
                warnings.warn(f"inertia triangle inequality violated: {a} + {b} < {c}",
                              stacklevel=2)
                break

    def as_array(self) -> np.ndarray:
        return np.array([self.i1, self.i2, self.i3])


class PotentialSpec:
    """Potential V(x, q) with positional and quaternion gradients.

    ``value(x, q4)`` takes the position 3-vector and the quaternion as a
    4-array (scalar first) and returns joules.  Analytic gradients are
    optional; missing ones fall back to central finite differences.
    """

    __slots__ = ("name", "value", "_grad_x", "_grad_q")

    def __init__(self, name: str,
                 value: Callable[[np.ndarray, np.ndarray], float],
                 grad_x: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
                 grad_q: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None):
        self.name = name
        self.value = value
        self._grad_x = grad_x
        self._grad_q = grad_q

    @property
    def analytic_grad_x(self) -> bool:
        return self._grad_x is not None

    @property
    def analytic_grad_q(self) -> bool:
        return self._grad_q is not None

    def gradient_x(self, x: np.ndarray, q4: np.ndarray) -> np.ndarray:
        if self._grad_x is not None:
            return np.asarray(self._grad_x(x, q4), dtype=float)
        g = np.empty(3)
        for i in range(3):
            h = _FD_STEP * max(1.0, abs(x[i]))
            xp = x.copy()
            xp[i] += h
            xm = x.copy()
            xm[i] -= h
            g[i] = (self.value(xp, q4) - self.value(xm, q4)) / (2.0 * h)
        return g

    def gradient_q(self, x: np.ndarray, q4: np.ndarray) -> np.ndarray:
        """4-component quaternion gradient (dV/dq0, dV/dq1, dV/dq2, dV/dq3)."""
        if self._grad_q is not None:
            return np.asarray(self._grad_q(x, q4), dtype=float)
        g = np.empty(4)
        for i in range(4):
            h = _FD_STEP * max(1.0, abs(q4[i]))
            qp = q4.copy()
            qp[i] += h
            qm = q4.copy()
            qm[i] -= h
            g[i] = (self.value(x, qp) - self.value(x, qm)) / (2.0 * h)
        return g

    def __repr__(self):
        return f"PotentialSpec({self.name!r})"


@dataclass(frozen=True)
class BodyParams:
    """Mass, principal inertia and potential of one rigid body."""

    mass: float
    inertia: InertiaTensor
    potential: PotentialSpec

    def __post_init__(self):
        m = float(self.mass)
        if not (math.isfinite(m) and m > 0.0):
            raise DomainError(f"mass must be positive and finite, got {m!r}")
        object.__setattr__(self, "mass", m)


@dataclass(frozen=True)
class RenormPolicy:
    """When to project the integrated quaternion back to unit norm."""

    mode: str  # "none" | "every_step" | "threshold"
    eps: float = 1e-9

    @classmethod
    def none(cls) -> "RenormPolicy":
        return cls("none")

    @classmethod
    def every_step(cls) -> "RenormPolicy":
        return cls("every_step")

    @classmethod
    def threshold(cls, eps: float = 1e-9) -> "RenormPolicy":
        if eps <= 0.0:
            raise DomainError("renormalization threshold must be positive")
        return cls("threshold", float(eps))

    def __post_init__(self):
        if self.mode not in ("none", "every_step", "threshold"):
            raise DomainError(f"unknown renormalization mode {self.mode!r}")


DEFAULT_RENORM = RenormPolicy.threshold(1e-9)


@dataclass(frozen=True)
class MonitorRecord:
    """Conserved-quantity snapshot: energy, |q|, |M| and spatial momentum."""

    energy: float
    qnorm: float
    mom_norm: float
    pi_spatial: np.ndarray


@dataclass
class Trajectory:
    """Sampled integrator output in the mixed chart, with monitors."""

    times: np.ndarray          # (k,)
    states: np.ndarray         # (k, 13) in (x, p, q, M) coordinate order
    energy: np.ndarray         # (k,)
    qnorm: np.ndarray          # (k,)
    mom_norm: np.ndarray       # (k,)
    pi_spatial: np.ndarray     # (k, 3)
    h: float
    n_steps: int

    def __len__(self) -> int:
        return self.times.size

    def point(self, i: int) -> PhasePoint:
        return PhasePoint.from_coords(self.states[i], Chart.MIXED_M)

    def monitor(self, i: int) -> MonitorRecord:
        return MonitorRecord(float(self.energy[i]), float(self.qnorm[i]),
                             float(self.mom_norm[i]), self.pi_spatial[i].copy())


def angular_velocity(M: Sequence[float], inertia: InertiaTensor) -> Vec3:
    """Body angular velocity Omega_i = M_i / (2 I_i)."""
    M = np.asarray(M, dtype=float)
    return np.array([M[0] / (2.0 * inertia.i1),
                     M[1] / (2.0 * inertia.i2),
                     M[2] / (2.0 * inertia.i3)])


def spin_kinetic(M: Sequence[float], inertia: InertiaTensor) -> float:
    """Rotational kinetic energy (M1^2/I1 + M2^2/I2 + M3^2/I3) / 8."""
    M = np.asarray(M, dtype=float)
    return 0.125 * (M[0] ** 2 / inertia.i1 + M[1] ** 2 / inertia.i2 + M[2] ** 2 / inertia.i3)


def hamiltonian_eval(state: PhasePoint, params: BodyParams) -> float:
    """Total energy p^2/(2m) + T_spin(M) + V(x, q)."""
    if state.chart is not Chart.MIXED_M:
        raise ChartError("hamiltonian_eval expects a MIXED_M phase point")
    ke = float(state.p @ state.p) / (2.0 * params.mass)
    return ke + spin_kinetic(state.mom, params.inertia) + float(
        params.potential.value(state.x, state.q.as_array()))


def hamiltonian_variable(params: BodyParams) -> DynamicVariable:
    """The Hamiltonian as a DynamicVariable on the mixed chart.

    The gradient is assembled analytically from the potential gradients
    (which themselves may fall back to finite differences).
    """
    m = params.mass
    inv4 = 0.25 / params.inertia.as_array()
    pot = params.potential

    def fn(z: np.ndarray) -> float:
        ke = float(z[3:6] @ z[3:6]) / (2.0 * m)
        M = z[10:13]
        spin = 0.125 * (M[0] ** 2 / params.inertia.i1 + M[1] ** 2 / params.inertia.i2
                        + M[2] ** 2 / params.inertia.i3)
        return ke + spin + float(pot.value(z[0:3], z[6:10]))

    def grad(z: np.ndarray) -> np.ndarray:
        g = np.empty(13)
        g[0:3] = pot.gradient_x(z[0:3], z[6:10])
        g[3:6] = z[3:6] / m
        g[6:10] = pot.gradient_q(z[0:3], z[6:10])
        g[10:13] = z[10:13] * inv4
        return g

    return DynamicVariable(fn, grad, name="H", chart=Chart.MIXED_M)


def _make_rhs(params: BodyParams) -> Callable[[np.ndarray], np.ndarray]:
    inv_m = 1.0 / params.mass
    d1 = 0.5 / params.inertia.i1
    d2 = 0.5 / params.inertia.i2
    d3 = 0.5 / params.inertia.i3
    grad_x = params.potential.gradient_x
    grad_q = params.potential.gradient_q

    def rhs(z: np.ndarray) -> np.ndarray:
        x = z[0:3]
        q4 = z[6:10]
        q0, q1, q2, q3 = q4
        m1, m2, m3 = z[10], z[11], z[12]
        o1 = m1 * d1
        o2 = m2 * d2
        o3 = m3 * d3
        gx = grad_x(x, q4)
        g0, g1, g2, g3 = grad_q(x, q4)
        out = np.empty(13)
        out[0] = z[3] * inv_m
        out[1] = z[4] * inv_m
        out[2] = z[5] * inv_m
        out[3] = -gx[0]
        out[4] = -gx[1]
        out[5] = -gx[2]
        # dq/dt = (1/2) q Omega with Omega pure
        out[6] = -0.5 * (q1 * o1 + q2 * o2 + q3 * o3)
        out[7] = 0.5 * (q0 * o1 + q2 * o3 - q3 * o2)
        out[8] = 0.5 * (q0 * o2 + q3 * o1 - q1 * o3)
        out[9] = 0.5 * (q0 * o3 + q1 * o2 - q2 * o1)
        # dM/dt = -Omega x M - Im(q^dag grad_q V)
        out[10] = -(o2 * m3 - o3 * m2) - (q0 * g1 - g0 * q1 - (q2 * g3 - q3 * g2))
        out[11] = -(o3 * m1 - o1 * m3) - (q0 * g2 - g0 * q2 - (q3 * g1 - q1 * g3))
        out[12] = -(o1 * m2 - o2 * m1) - (q0 * g3 - g0 * q3 - (q1 * g2 - q2 * g1))
        return out

    return rhs


def eom_rhs(state: PhasePoint, params: BodyParams, unit_tol: float = TOL_UNIT) -> np.ndarray:
    """Time derivative of the 13 mixed-chart coordinates at a state.

    Agrees with the Hamiltonian vector field J grad(H) of the poisson module.

    Raises
    ------
    ChartError
        If the state is not in the MIXED_M chart.
    PreconditionError
        If |q| deviates from 1 by more than ``unit_tol``.
    """
    if state.chart is not Chart.MIXED_M:
        raise ChartError("eom_rhs expects a MIXED_M phase point")
    state.q.require_unit(unit_tol, "state quaternion")
    return _make_rhs(params)(state.coords())


def _rk4(z: np.ndarray, h: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    k1 = rhs(z)
    k2 = rhs(z + (0.5 * h) * k1)
    k3 = rhs(z + (0.5 * h) * k2)
    k4 = rhs(z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state: PhasePoint, params: BodyParams, h: float) -> PhasePoint:
    """One classical fourth-order Runge-Kutta step; no renormalization."""
    if h <= 0.0:
        raise DomainError(f"step size h must be positive, got {h!r}")
    if state.chart is not Chart.MIXED_M:
        raise ChartError("rk4_step expects a MIXED_M phase point")
    state.q.require_unit(TOL_UNIT, "state quaternion")
    z = _rk4(state.coords(), h, _make_rhs(params))
    return PhasePoint.from_coords(z, Chart.MIXED_M)


def _apply_renorm(z: np.ndarray, policy: RenormPolicy) -> None:
    if policy.mode == "none":
        return
    n = math.sqrt(z[6] ** 2 + z[7] ** 2 + z[8] ** 2 + z[9] ** 2)
    if policy.mode == "every_step" or abs(n - 1.0) > policy.eps:
        z[6:10] /= n


def _monitor_row(z: np.ndarray, params: BodyParams) -> tuple[float, float, float, np.ndarray]:
    q0, q1, q2, q3 = z[6], z[7], z[8], z[9]
    m1, m2, m3 = z[10], z[11], z[12]
    inertia = params.inertia
    ke = (z[3] ** 2 + z[4] ** 2 + z[5] ** 2) / (2.0 * params.mass)
    spin = 0.125 * (m1 * m1 / inertia.i1 + m2 * m2 / inertia.i2 + m3 * m3 / inertia.i3)
    energy = ke + spin + float(params.potential.value(z[0:3], z[6:10]))
    n2 = q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3
    qn = math.sqrt(n2)
    mom_norm = math.sqrt(m1 * m1 + m2 * m2 + m3 * m3)
    # pi = vec(q M q^-1) / 2 with the exact inverse q^dag / |q|^2
    t0 = -(q1 * m1 + q2 * m2 + q3 * m3)
    t1 = q0 * m1 + q2 * m3 - q3 * m2
    t2 = q0 * m2 + q3 * m1 - q1 * m3
    t3 = q0 * m3 + q1 * m2 - q2 * m1
    s = 0.5 / n2
    pi = np.array([
        (-t0 * q1 + t1 * q0 - t2 * q3 + t3 * q2) * s,
        (-t0 * q2 + t2 * q0 - t3 * q1 + t1 * q3) * s,
        (-t0 * q3 + t3 * q0 - t1 * q2 + t2 * q1) * s,
    ])
    return float(energy), float(qn), float(mom_norm), pi


def conserved_quantities(state: PhasePoint, params: BodyParams) -> MonitorRecord:
    """Energy, |q|, |M| and the spatial momentum pi = vec(q M q^-1) / 2."""
    if state.chart is not Chart.MIXED_M:
        raise ChartError("conserved_quantities expects a MIXED_M phase point")
    energy, qn, mom_norm, pi = _monitor_row(state.coords(), params)
    return MonitorRecord(energy, qn, mom_norm, pi)


def integrate(state0: PhasePoint, params: BodyParams, h: float, n_steps: int,
              renorm_policy: RenormPolicy = DEFAULT_RENORM,
              sample_stride: int = 1) -> Trajectory:
    """Fixed-step RK4 integration with optional quaternion renormalization.

    Samples (state plus monitor row) are recorded at step 0, every
    ``sample_stride`` steps, and at the final step.

    Raises
    ------
    IntegrationAborted
        If a non-finite component appears; the exception carries the step
        index at which integration stopped.
    """
    if h <= 0.0:
        raise DomainError(f"step size h must be positive, got {h!r}")
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    if sample_stride < 1:
        raise DomainError(f"sample_stride must be >= 1, got {sample_stride}")
    if state0.chart is not Chart.MIXED_M:
        raise ChartError("integrate expects a MIXED_M phase point")
    state0.q.require_unit(TOL_UNIT, "initial quaternion")

    rhs = _make_rhs(params)
    z = state0.coords()
    times, states, monitors = [], [], []

    def record(step: int) -> None:
        times.append(step * h)
        states.append(z.copy())
        monitors.append(_monitor_row(z, params))

    record(0)
    for step in range(1, n_steps + 1):
        z = _rk4(z, h, rhs)
        if not np.all(np.isfinite(z)):
            raise IntegrationAborted(step)
        _apply_renorm(z, renorm_policy)
        if step % sample_stride == 0 or step == n_steps:
            record(step)

    energy = np.array([mrow[0] for mrow in monitors])
    qnorm = np.array([mrow[1] for mrow in monitors])
    mom_norm = np.array([mrow[2] for mrow in monitors])
    pi = np.array([mrow[3] for mrow in monitors])
    return Trajectory(np.array(times), np.array(states), energy, qnorm,
                      mom_norm, pi, h=h, n_steps=n_steps)


def free() -> PotentialSpec:
    """Zero potential; the body is a free top."""
    zero3 = np.zeros(3)
    zero4 = np.zeros(4)
    return PotentialSpec("free",
                         value=lambda x, q4: 0.0,
                         grad_x=lambda x, q4: zero3.copy(),
                         grad_q=lambda x, q4: zero4.copy())


def linear_gravity(mass: float, g: float) -> PotentialSpec:
    """Uniform gravity on the center of mass: V = m g x3."""
    mg = float(mass) * float(g)
    zero4 = np.zeros(4)
    return PotentialSpec("linear_gravity",
                         value=lambda x, q4: mg * x[2],
                         grad_x=lambda x, q4: np.array([0.0, 0.0, mg]),
                         grad_q=lambda x, q4: zero4.copy())


def heavy_top(mass: float, g: float, length: float) -> PotentialSpec:
    """Top pivoted a distance ``length`` below its center of mass.

    V = m g l Q33(q) = m g l (q0^2 - q1^2 - q2^2 + q3^2), the height of the
    center of mass above the pivot; maximal (upright) at q = e0.
    """
    if length < 0.0:
        raise DomainError("pivot arm length must be >= 0")
    mgl = float(mass) * float(g) * float(length)
    return PotentialSpec(
        "heavy_top",
        value=lambda x, q4: mgl * (q4[0] ** 2 - q4[1] ** 2 - q4[2] ** 2 + q4[3] ** 2),
        grad_x=lambda x, q4: np.zeros(3),
        grad_q=lambda x, q4: 2.0 * mgl * np.array([q4[0], -q4[1], -q4[2], q4[3]]),
    )


def harmonic(k: float) -> PotentialSpec:
    """Isotropic spring to the origin: V = k |x|^2 / 2."""
    if k < 0.0:
        raise DomainError("spring constant must be >= 0")
    k = float(k)
    zero4 = np.zeros(4)
    return PotentialSpec("harmonic",
                         value=lambda x, q4: 0.5 * k * float(x @ x),
                         grad_x=lambda x, q4: k * x,
                         grad_q=lambda x, q4: zero4.copy())


BUILTIN_POTENTIALS = ("free", "linear_gravity", "heavy_top", "harmonic")
