"""Poisson structure tensors, brackets, and the symplectic form on T*S3.

Phase points carry 13 coordinates in the fixed order

    (x1, x2, x3, p1, p2, p3, q0, q1, q2, q3, mom1, mom2, mom3)

where (x, p) are the spatial center-of-mass position and linear momentum and
q is the orientation quaternion.  The meaning of the momentum block depends
on the chart tag:

``Chart.INERTIAL_MU``
    mom = mu, the doubled spatial angular momentum (mu = 2 pi).  Bracket
    table on the rotational block:

        {q_mu, q_nu} = 0
        {mu_i, q_0}  = q_i
        {mu_i, q_j}  = eps_ijk q_k - q0 delta_ij
        {mu_i, mu_j} = 2 eps_ijl mu_l

``Chart.MIXED_M``
    mom = M, the doubled body-frame angular momentum (M = q^-1 mu q):

        {q_mu, q_nu} = 0
        {M_i, q_0}   = q_i
        {M_i, q_j}   = -q0 delta_ij - eps_ijl q_l
        {M_i, M_j}   = -2 eps_ijl M_l

In both charts the translational block is canonical, {x_i, p_j} = delta_ij,
and decouples from the rotational block.  Every tensor is affine in the
coordinates, which lets :func:`jacobi_residual` use exact coordinate
derivatives instead of finite differences.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ChartError, DomainError, PreconditionError
from .quaternion import (
    Quaternion,
    TOL_UNIT,
    quat_conj,
    quat_mul,
    right_action_matrix,
)
from . import so3

N_COORDS = 13
_Q0, _MOM0 = 6, 10  # offsets of the quaternion and momentum blocks

LEVI = np.zeros((3, 3, 3))
LEVI[0, 1, 2] = LEVI[1, 2, 0] = LEVI[2, 0, 1] = 1.0
LEVI[0, 2, 1] = LEVI[2, 1, 0] = LEVI[1, 0, 2] = -1.0


class Chart(enum.Enum):
    """Which momentum coordinate the phase point carries."""

    INERTIAL_MU = "inertial_mu"
    MIXED_M = "mixed_m"


_BASE_LABELS = ("x1", "x2", "x3", "p1", "p2", "p3", "q0", "q1", "q2", "q3")
_MOM_LABELS = {Chart.INERTIAL_MU: ("mu1", "mu2", "mu3"),
               Chart.MIXED_M: ("M1", "M2", "M3")}


def coordinate_labels(chart: Chart) -> tuple[str, ...]:
    return _BASE_LABELS + _MOM_LABELS[chart]


@dataclass(frozen=True)
class PhasePoint:
    """Phase point (x, p, q, mom) plus the chart tag for ``mom``."""

    x: np.ndarray
    p: np.ndarray
    q: Quaternion
    mom: np.ndarray
    chart: Chart

    def __post_init__(self):
        for name in ("x", "p", "mom"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise DomainError(f"PhasePoint.{name} must have shape (3,), got {v.shape}")
            if not np.all(np.isfinite(v)):
                raise DomainError(f"PhasePoint.{name} has non-finite components")
            object.__setattr__(self, name, v)
        if not isinstance(self.q, Quaternion):
            raise DomainError(f"PhasePoint.q must be a Quaternion, got {type(self.q).__name__}")
        if not isinstance(self.chart, Chart):
            raise ChartError(f"unknown chart tag {self.chart!r}")

    def coords(self) -> np.ndarray:
        """All 13 coordinates in the fixed (x, p, q, mom) order."""
        z = np.empty(N_COORDS)
        z[0:3] = self.x
        z[3:6] = self.p
        z[6:10] = self.q.as_array()
        z[10:13] = self.mom
        return z

    @classmethod
    def from_coords(cls, z: Sequence[float], chart: Chart) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        if z.shape != (N_COORDS,):
            raise DomainError(f"expected {N_COORDS} coordinates, got shape {z.shape}")
        return cls(z[0:3], z[3:6], Quaternion.from_array(z[6:10]), z[10:13], chart)


@dataclass(frozen=True)
class StructureTensor:
    """Antisymmetric bracket tensor J_IJ = {z_I, z_J} at a phase point."""

    j: np.ndarray
    labels: tuple[str, ...]
    chart: Chart


def _tensor_components(z: np.ndarray, chart: Chart, corrupt: bool = False) -> np.ndarray:
    """Raw 13x13 tensor from coordinates; no point validation.

    ``corrupt`` flips the sign of the {mom_1, q0} entry (keeping antisymmetry)
    and exists only as a negative control for the Jacobi verifier.
    """
    J = np.zeros((N_COORDS, N_COORDS))
    for i in range(3):
        J[i, 3 + i] = 1.0
        J[3 + i, i] = -1.0
    q0, q1, q2, q3 = z[6], z[7], z[8], z[9]
    m1, m2, m3 = z[10], z[11], z[12]
    if chart is Chart.INERTIAL_MU:
        col0 = [q1, q2, q3]
        B = np.array([
            [-q0, q3, -q2],
            [-q3, -q0, q1],
            [q2, -q1, -q0],
        ])
        C = np.array([
            [0.0, 2 * m3, -2 * m2],
            [-2 * m3, 0.0, 2 * m1],
            [2 * m2, -2 * m1, 0.0],
        ])
    elif chart is Chart.MIXED_M:
        col0 = [q1, q2, q3]
        B = np.array([
            [-q0, -q3, q2],
            [q3, -q0, -q1],
            [-q2, q1, -q0],
        ])
        C = np.array([
            [0.0, -2 * m3, 2 * m2],
            [2 * m3, 0.0, -2 * m1],
            [-2 * m2, 2 * m1, 0.0],
        ])
    else:
        raise ChartError(f"unknown chart tag {chart!r}")
    if corrupt:
        col0[0] = -col0[0]
    for i in range(3):
        J[_MOM0 + i, _Q0] = col0[i]
        J[_Q0, _MOM0 + i] = -col0[i]
        for jj in range(3):
            J[_MOM0 + i, _Q0 + 1 + jj] = B[i, jj]
            J[_Q0 + 1 + jj, _MOM0 + i] = -B[i, jj]
            J[_MOM0 + i, _MOM0 + jj] = C[i, jj]
    return J


_JACOBIAN_CACHE: dict[tuple[Chart, bool], np.ndarray] = {}


def structure_jacobian(chart: Chart, corrupt: bool = False) -> np.ndarray:
    """Constant array dJ[I, J, L] = d J_IJ / d z_L for the given chart.

    Exact because every tensor entry is affine in the coordinates; computed
    once per chart by differencing against the zero point.
    """
    key = (chart, corrupt)
    if key not in _JACOBIAN_CACHE:
        j0 = _tensor_components(np.zeros(N_COORDS), chart, corrupt)
        dj = np.empty((N_COORDS, N_COORDS, N_COORDS))
        for L in range(N_COORDS):
            e = np.zeros(N_COORDS)
            e[L] = 1.0
            dj[:, :, L] = _tensor_components(e, chart, corrupt) - j0
        _JACOBIAN_CACHE[key] = dj
    return _JACOBIAN_CACHE[key]


def structure_tensor(point: PhasePoint, full: bool = True) -> StructureTensor:
    """Evaluate the chart's bracket table at a phase point.

    Returns the 13x13 tensor over (x, p, q, mom) by default, or the 7x7
    rotational block over (q, mom) with ``full=False``.
    """
    point.q.require_unit(TOL_UNIT, "phase-point quaternion")
    J = _tensor_components(point.coords(), point.chart)
    labels = coordinate_labels(point.chart)
    if not full:
        return StructureTensor(J[_Q0:, _Q0:], labels[_Q0:], point.chart)
    return StructureTensor(J, labels, point.chart)


_FD_STEP = float(np.cbrt(np.finfo(float).eps))


def _fd_gradient(fn: Callable[[np.ndarray], float], z: np.ndarray) -> np.ndarray:
    g = np.empty(z.size)
    for i in range(z.size):
        h = _FD_STEP * max(1.0, abs(z[i]))
        zp = z.copy()
        zp[i] += h
        zm = z.copy()
        zm[i] -= h
        g[i] = (fn(zp) - fn(zm)) / (2.0 * h)
    return g


def _merge_charts(a: Optional[Chart], b: Optional[Chart]) -> Optional[Chart]:
    if a is None:
        return b
    if b is None or a is b:
        return a
    raise ChartError(f"chart mismatch between variables: {a} vs {b}")


class DynamicVariable:
    """Scalar function of a phase point with a gradient over all coordinates.

    ``fn`` maps the 13-coordinate array to a float.  When ``grad`` is given it
    must return the full 13-gradient; otherwise gradients fall back to central
    finite differences with step cbrt(eps) * max(1, |z_i|).  Variables combine
    under ``+``, ``-``, ``*`` and scalar arithmetic with exact product and sum
    rules for the gradients.

    A non-None ``chart`` restricts the variable to points of that chart;
    ``poisson_bracket`` raises :class:`ChartError` on mismatch.
    """

    __slots__ = ("fn", "grad_fn", "name", "chart")

    def __init__(self, fn: Callable[[np.ndarray], float],
                 grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 name: str = "", chart: Optional[Chart] = None):
        self.fn = fn
        self.grad_fn = grad
        self.name = name
        self.chart = chart

    @property
    def has_analytic_gradient(self) -> bool:
        return self.grad_fn is not None

    def _coords(self, point_or_z) -> np.ndarray:
        if isinstance(point_or_z, PhasePoint):
            return point_or_z.coords()
        return np.asarray(point_or_z, dtype=float)

    def value(self, point_or_z) -> float:
        return float(self.fn(self._coords(point_or_z)))

    def gradient(self, point_or_z) -> np.ndarray:
        z = self._coords(point_or_z)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(z), dtype=float)
        return _fd_gradient(self.fn, z)

    def __add__(self, other):
        if isinstance(other, DynamicVariable):
            chart = _merge_charts(self.chart, other.chart)
            return DynamicVariable(
                lambda z: self.fn(z) + other.fn(z),
                lambda z: self.gradient(z) + other.gradient(z),
                name=f"({self.name}+{other.name})", chart=chart)
        if isinstance(other, (int, float)):
            c = float(other)
            return DynamicVariable(lambda z: self.fn(z) + c, self.gradient,
                                   name=f"({self.name}+{c})", chart=self.chart)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return DynamicVariable(lambda z: -self.fn(z), lambda z: -self.gradient(z),
                               name=f"(-{self.name})", chart=self.chart)

    def __sub__(self, other):
        add = self.__add__(-other if isinstance(other, DynamicVariable) else -float(other))
        return add

    def __mul__(self, other):
        if isinstance(other, DynamicVariable):
            chart = _merge_charts(self.chart, other.chart)
            return DynamicVariable(
                lambda z: self.fn(z) * other.fn(z),
                lambda z: self.fn(z) * other.gradient(z) + other.fn(z) * self.gradient(z),
                name=f"({self.name}*{other.name})", chart=chart)
        if isinstance(other, (int, float)):
            c = float(other)
            return DynamicVariable(lambda z: c * self.fn(z),
                                   lambda z: c * self.gradient(z),
                                   name=f"({c}*{self.name})", chart=self.chart)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"DynamicVariable({self.name or self.fn!r}, chart={self.chart})"


def coordinate(which: Union[int, str], chart: Optional[Chart] = None) -> DynamicVariable:
    """Coordinate function as a DynamicVariable.

    Accepts an index 0..12 or a label: x1..x3, p1..p3, q0..q3 (chart-neutral),
    mu1..mu3 (implies the inertial chart) or M1..M3 (implies the mixed chart).
    """
    if isinstance(which, str):
        if which in _BASE_LABELS:
            idx = _BASE_LABELS.index(which)
        elif which in _MOM_LABELS[Chart.INERTIAL_MU]:
            idx = _MOM0 + _MOM_LABELS[Chart.INERTIAL_MU].index(which)
            chart = _merge_charts(chart, Chart.INERTIAL_MU)
        elif which in _MOM_LABELS[Chart.MIXED_M]:
            idx = _MOM0 + _MOM_LABELS[Chart.MIXED_M].index(which)
            chart = _merge_charts(chart, Chart.MIXED_M)
        else:
            raise DomainError(f"unknown coordinate label {which!r}")
        name = which
    else:
        idx = int(which)
        if not 0 <= idx < N_COORDS:
            raise DomainError(f"coordinate index must be 0..12, got {idx}")
        name = f"z{idx}"
    e = np.zeros(N_COORDS)
    e[idx] = 1.0
    return DynamicVariable(lambda z: z[idx], lambda z, e=e: e.copy(), name=name, chart=chart)


def momentum_along(xi: Sequence[float], chart: Chart = Chart.INERTIAL_MU) -> DynamicVariable:
    """Linear momentum variable <mom, xi> for a fixed 3-vector xi."""
    xi = np.asarray(xi, dtype=float)
    g = np.zeros(N_COORDS)
    g[_MOM0:] = xi
    return DynamicVariable(lambda z: float(z[_MOM0:] @ xi), lambda z, g=g: g.copy(),
                           name="<mom,xi>", chart=chart)


def rotation_entry_variable(i: int, j: int) -> DynamicVariable:
    """Entry (i, j), 0-based, of the rotation matrix as a function of q.

    Uses the quadratic form Q_ab = 2[(q0^2 - 1/2) d_ab + q_a q_b - q0 q_l eps_lab]
    with an analytic gradient over the quaternion block.
    """
    if not (0 <= i < 3 and 0 <= j < 3):
        raise DomainError("rotation entry indices must be 0..2")
    delta = 1.0 if i == j else 0.0
    eps_col = LEVI[:, i, j]  # eps_lab over l

    def fn(z: np.ndarray) -> float:
        q0 = z[6]
        qv = z[7:10]
        return 2.0 * ((q0 * q0 - 0.5) * delta + qv[i] * qv[j] - q0 * float(eps_col @ qv))

    def grad(z: np.ndarray) -> np.ndarray:
        q0 = z[6]
        qv = z[7:10]
        g = np.zeros(N_COORDS)
        g[6] = 4.0 * q0 * delta - 2.0 * float(eps_col @ qv)
        gq = np.zeros(3)
        gq[i] += 2.0 * qv[j]
        gq[j] += 2.0 * qv[i]
        gq -= 2.0 * q0 * eps_col
        g[7:10] = gq
        return g

    return DynamicVariable(fn, grad, name=f"Q{i + 1}{j + 1}")


def _point_tensor(point: PhasePoint) -> np.ndarray:
    point.q.require_unit(TOL_UNIT, "phase-point quaternion")
    return _tensor_components(point.coords(), point.chart)


def _require_variable_chart(var: DynamicVariable, point: PhasePoint) -> None:
    if var.chart is not None and var.chart is not point.chart:
        raise ChartError(f"variable {var.name!r} is bound to {var.chart}, point is {point.chart}")


def _bracket(F: DynamicVariable, G: DynamicVariable, z: np.ndarray, J: np.ndarray) -> float:
    return float(F.gradient(z) @ J @ G.gradient(z))


def poisson_bracket(F: DynamicVariable, G: DynamicVariable, point: PhasePoint) -> float:
    """{F, G} at the point: grad(F) . J . grad(G).

    Antisymmetric in (F, G) and a derivation in each slot.
    """
    _require_variable_chart(F, point)
    _require_variable_chart(G, point)
    return _bracket(F, G, point.coords(), _point_tensor(point))


def hamiltonian_vector_field(H: DynamicVariable, point: PhasePoint) -> np.ndarray:
    """Coordinate components J grad(H) of the Hamiltonian field of H.

    For any F, the bracket {F, H} equals the directional derivative of F
    along the returned 13-vector.
    """
    _require_variable_chart(H, point)
    J = _point_tensor(point)
    return J @ H.gradient(point.coords())


def jacobi_residual(point: PhasePoint, corrupt: bool = False) -> float:
    """Max-abs entry of the cyclic Jacobi sum over all index triples.

    Evaluates J_IJ^{,L} J_LK + J_JK^{,L} J_LI + J_KI^{,L} J_LJ with the exact
    constant coordinate derivatives of the chart tensor.  Vanishes (to float
    rounding) at every valid point; ``corrupt=True`` flips one bracket-table
    sign and serves as the negative control.
    """
    point.q.require_unit(TOL_UNIT, "phase-point quaternion")
    z = point.coords()
    J = _tensor_components(z, point.chart, corrupt)
    dJ = structure_jacobian(point.chart, corrupt)
    A = np.einsum("ijl,lk->ijk", dJ, J)
    cyc = A + np.transpose(A, (2, 0, 1)) + np.transpose(A, (1, 2, 0))
    return float(np.max(np.abs(cyc)))


def poisson_map_residual(point: PhasePoint) -> float:
    """Residual of the bracket push-forward from (q, mu) to (Q, pi).

    With pi = mu/2 and Q the rotation matrix of q, checks through
    :func:`poisson_bracket` that

        {pi_i, Q_jk} = eps_ijl Q_lk,   {Q_ij, Q_kl} = 0,
        {pi_i, pi_j} = eps_ijl pi_l

    and returns the largest absolute deviation.  Inertial chart only.
    """
    if point.chart is not Chart.INERTIAL_MU:
        raise ChartError("poisson_map_residual requires the INERTIAL_MU chart")
    Q = so3.quat_to_matrix(point.q)
    z = point.coords()
    J = _point_tensor(point)
    pi_vars = [0.5 * coordinate(f"mu{i + 1}") for i in range(3)]
    q_vars = [[rotation_entry_variable(i, j) for j in range(3)] for i in range(3)]
    # gradients are point-local constants; evaluate each once per point
    g_pi = [v.gradient(z) for v in pi_vars]
    g_q = [[q_vars[i][j].gradient(z) for j in range(3)] for i in range(3)]
    jg_q = [[J @ g_q[i][j] for j in range(3)] for i in range(3)]
    jg_pi = [J @ g for g in g_pi]
    worst = 0.0
    for i in range(3):
        for j in range(3):
            for k in range(3):
                lhs = float(g_pi[i] @ jg_q[j][k])
                rhs = float(LEVI[i, j, :] @ Q[:, k])
                worst = max(worst, abs(lhs - rhs))
    for a in range(3):
        for b in range(3):
            for c in range(3):
                for d in range(3):
                    worst = max(worst, abs(float(g_q[a][b] @ jg_q[c][d])))
    pi_val = 0.5 * point.mom
    for i in range(3):
        for j in range(3):
            lhs = float(g_pi[i] @ jg_pi[j])
            rhs = float(LEVI[i, j, :] @ pi_val)
            worst = max(worst, abs(lhs - rhs))
    return worst


def right_translation_covariance_check(point: PhasePoint, b: Quaternion) -> float:
    """Check that p = q b obeys the same brackets with pi as q itself.

    Evaluates {pi_i, (q b)_mu} by the chain rule through the structure tensor
    (the gradient of (q b)_mu in q is a row of the right-action matrix) and
    compares against -1/2 (e_i (q b))_mu.  Returns the max residual over all
    i and mu.  Inertial chart only.
    """
    if point.chart is not Chart.INERTIAL_MU:
        raise ChartError("right_translation_covariance_check requires the INERTIAL_MU chart")
    b.require_unit(TOL_UNIT, "right-translation quaternion")
    Rb = right_action_matrix(b)
    qb = quat_mul(point.q, b)
    z = point.coords()
    J = _point_tensor(point)
    worst = 0.0
    for i in range(3):
        F = 0.5 * coordinate(f"mu{i + 1}")
        ei_qb = quat_mul(Quaternion.basis(i + 1), qb).as_array()
        for mu in range(4):
            row = np.zeros(N_COORDS)
            row[6:10] = Rb[mu, :]
            G = DynamicVariable(
                lambda z, mu=mu: float(Rb[mu, :] @ z[6:10]),
                lambda z, row=row: row.copy(),
                name=f"(qb)_{mu}", chart=Chart.INERTIAL_MU)
            lhs = _bracket(F, G, z, J)
            worst = max(worst, abs(lhs - (-0.5 * ei_qb[mu])))
    return worst


def _rotational_vector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    if v.shape == (N_COORDS,):
        return v[_Q0:]
    if v.shape == (7,):
        return v
    raise DomainError(f"expected a 7- or 13-vector, got shape {v.shape}")


def _dq_of(q: Quaternion, u7: np.ndarray, what: str) -> np.ndarray:
    """Value of the right-invariant form dq q^-1 on a tangent vector."""
    uq = u7[0:4]
    if abs(float(q.as_array() @ uq)) > 1e-9 * max(1.0, float(np.linalg.norm(uq))):
        raise PreconditionError(f"{what} is not tangent to the unit sphere at q")
    w = quat_mul(Quaternion.from_array(uq), quat_conj(q))
    return np.array([w.q1, w.q2, w.q3])


def liouville_form_eval(point: PhasePoint, u) -> float:
    """Canonical one-form mu_i (u_q q^-1)^i on a tangent vector u.

    ``u`` is a 7-vector (q-block, mom-block) or a full 13-vector whose
    rotational block is used; its q-part must be tangent: <q, u_q> = 0.
    """
    if point.chart is not Chart.INERTIAL_MU:
        raise ChartError("liouville_form_eval requires the INERTIAL_MU chart")
    point.q.require_unit(TOL_UNIT, "phase-point quaternion")
    du = _dq_of(point.q, _rotational_vector(u), "u")
    return float(point.mom @ du)


def symplectic_form_eval(point: PhasePoint, u, v) -> float:
    """Canonical symplectic form on two tangent vectors at the point.

    With dq = (tangent q-block) q^-1, evaluates

        Omega(u, v) = <dq(u), v_mom> - <dq(v), u_mom> - 2 <mu, dq(u) x dq(v)>

    For Hamiltonian fields X_F, X_G this reproduces the bracket:
    Omega(X_F, X_G) = {F, G}.
    """
    if point.chart is not Chart.INERTIAL_MU:
        raise ChartError("symplectic_form_eval requires the INERTIAL_MU chart")
    point.q.require_unit(TOL_UNIT, "phase-point quaternion")
    u7 = _rotational_vector(u)
    v7 = _rotational_vector(v)
    du = _dq_of(point.q, u7, "u")
    dv = _dq_of(point.q, v7, "v")
    pairing = float(du @ v7[4:7]) - float(dv @ u7[4:7])
    twist = -2.0 * float(point.mom @ np.cross(du, dv))
    return pairing + twist
