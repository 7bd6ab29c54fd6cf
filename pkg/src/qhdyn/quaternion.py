"""Scalar-first quaternion algebra and the rotation action on 3-vectors.

Quaternions are value objects q = q0*e0 + q1*e1 + q2*e2 + q3*e3 with scalar
part ``q0`` and vector part ``qv = (q1, q2, q3)``.  The generators satisfy
``e_r e_s = -delta_rs e0 + eps_rst e_t``, which fixes the product law

    a b = (a0*b0 - <av, bv>) e0 + a0*bv + b0*av + av x bv

Everything in this module is exact algebra on the given components: no
operation normalizes its input behind the caller's back.  Normalization is an
explicit step (:func:`quat_normalize`), and operations that genuinely require
a unit quaternion (the rotation action) check the norm against
:data:`TOL_UNIT` and raise :class:`PreconditionError` when it is violated.

3-vectors are plain ``numpy`` arrays of shape (3,); a 3-vector doubles as a
pure quaternion (zero scalar part) via :meth:`Quaternion.pure`.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError

# Tolerance on | |q| - 1 | for operations that require a unit quaternion.
# Looser than arithmetic noise, tight enough to catch integration drift.
TOL_UNIT = 1e-9

Vec3 = np.ndarray
Matrix4 = np.ndarray


class Quaternion:
    """Immutable quaternion with scalar part ``q0`` and vector part ``qv``.

    Components are stored scalar-first: ``Quaternion(q0, (q1, q2, q3))``.
    Instances support ``+``, ``-``, unary ``-``, scalar scaling and ``*`` as
    the quaternion product; the named module functions are the primary API.
    """

    __slots__ = ("q0", "q1", "q2", "q3")

    def __init__(self, q0: float, qv: Sequence[float] = (0.0, 0.0, 0.0)):
        q1, q2, q3 = qv
        object.__setattr__(self, "q0", float(q0))
        object.__setattr__(self, "q1", float(q1))
        object.__setattr__(self, "q2", float(q2))
        object.__setattr__(self, "q3", float(q3))
        if not (math.isfinite(self.q0) and math.isfinite(self.q1)
                and math.isfinite(self.q2) and math.isfinite(self.q3)):
            raise DomainError(f"quaternion components must be finite, got {self!r}")

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    @property
    def qv(self) -> Vec3:
        """Vector part (q1, q2, q3) as a fresh numpy array."""
        return np.array([self.q1, self.q2, self.q3])

    @classmethod
    def from_array(cls, a: Sequence[float]) -> "Quaternion":
        a0, a1, a2, a3 = a
        return cls(a0, (a1, a2, a3))

    @classmethod
    def pure(cls, v: Sequence[float]) -> "Quaternion":
        """Pure quaternion (zero scalar part) from a 3-vector."""
        return cls(0.0, v)

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(1.0)

    @classmethod
    def basis(cls, mu: int) -> "Quaternion":
        """Generator e_mu for mu in 0..3 (e0 is the algebra unit)."""
        if mu not in (0, 1, 2, 3):
            raise DomainError(f"basis index must be 0..3, got {mu}")
        comps = [0.0, 0.0, 0.0, 0.0]
        comps[mu] = 1.0
        return cls.from_array(comps)

    def as_array(self) -> np.ndarray:
        return np.array([self.q0, self.q1, self.q2, self.q3])

    def is_unit(self, tol: float = TOL_UNIT) -> bool:
        return abs(self.q0 * self.q0 + self.q1 * self.q1
                   + self.q2 * self.q2 + self.q3 * self.q3 - 1.0) <= tol

    def require_unit(self, tol: float = TOL_UNIT, what: str = "quaternion") -> None:
        if not self.is_unit(tol):
            n = quat_norm(self)
            raise PreconditionError(f"{what} must be unit to {tol:g}, |q| = {n!r}")

    def __add__(self, other: "Quaternion") -> "Quaternion":
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.q0 + other.q0,
                          (self.q1 + other.q1, self.q2 + other.q2, self.q3 + other.q3))

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.q0 - other.q0,
                          (self.q1 - other.q1, self.q2 - other.q2, self.q3 - other.q3))

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.q0, (-self.q1, -self.q2, -self.q3))

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        if isinstance(other, (int, float)):
            s = float(other)
            return Quaternion(self.q0 * s, (self.q1 * s, self.q2 * s, self.q3 * s))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self.__mul__(other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        return (isinstance(other, Quaternion)
                and self.q0 == other.q0 and self.q1 == other.q1
                and self.q2 == other.q2 and self.q3 == other.q3)

    def __hash__(self):
        return hash((self.q0, self.q1, self.q2, self.q3))

    def __repr__(self) -> str:
        return f"Quaternion({self.q0!r}, ({self.q1!r}, {self.q2!r}, {self.q3!r}))"


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Quaternion product a*b.

    Bilinear and associative; the scalar part is ``a0*b0 - <av, bv>`` and the
    vector part is ``a0*bv + b0*av + av x bv``.
    """
    a0, a1, a2, a3 = a.q0, a.q1, a.q2, a.q3
    b0, b1, b2, b3 = b.q0, b.q1, b.q2, b.q3
    return Quaternion(
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        (a0 * b1 + b0 * a1 + a2 * b3 - a3 * b2,
         a0 * b2 + b0 * a2 + a3 * b1 - a1 * b3,
         a0 * b3 + b0 * a3 + a1 * b2 - a2 * b1),
    )


def quat_conj(q: Quaternion) -> Quaternion:
    """Conjugate: flips the sign of the vector part."""
    return Quaternion(q.q0, (-q.q1, -q.q2, -q.q3))


def quat_norm(q: Quaternion) -> float:
    """Euclidean norm sqrt(q q^dag), always >= 0."""
    return math.sqrt(q.q0 * q.q0 + q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3)


def quat_inverse(q: Quaternion) -> Quaternion:
    """Multiplicative inverse q^dag / |q|^2.

    Raises
    ------
    DomainError
        If ``|q| = 0``; zero is the one element of the division ring without
        an inverse.
    """
    n2 = q.q0 * q.q0 + q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3
    if n2 == 0.0:
        raise DomainError("zero quaternion has no inverse")
    return Quaternion(q.q0 / n2, (-q.q1 / n2, -q.q2 / n2, -q.q3 / n2))


def quat_normalize(q: Quaternion) -> Quaternion:
    """Return q / |q|.  Raises DomainError on the zero quaternion."""
    n = quat_norm(q)
    if n == 0.0:
        raise DomainError("cannot normalize the zero quaternion")
    return Quaternion(q.q0 / n, (q.q1 / n, q.q2 / n, q.q3 / n))


def rotate_vector(q: Quaternion, x: Sequence[float]) -> Vec3:
    """Rotate a 3-vector by the unit quaternion q: vector part of q*x*q^dag.

    Preserves dot and cross products of its arguments, and ``q`` and ``-q``
    produce the same rotation.

    Parameters
    ----------
    q : Quaternion
        Unit to within :data:`TOL_UNIT`, else :class:`PreconditionError`.
    x : (3,) array_like
        Vector to rotate.

    Returns
    -------
    (3,) ndarray
    """
    q.require_unit(TOL_UNIT, "rotation quaternion")
    x1, x2, x3 = (float(c) for c in x)
    xq = Quaternion(0.0, (x1, x2, x3))
    y = quat_mul(quat_mul(q, xq), quat_conj(q))
    return np.array([y.q1, y.q2, y.q3])


def axis_angle_to_quat(axis: Sequence[float], phi: float) -> Quaternion:
    """Unit quaternion cos(phi/2) e0 + sin(phi/2) axis/|axis|.

    As a function of ``phi`` this is a one-parameter subgroup of the unit
    quaternions; ``phi`` is the rotation angle about ``axis`` measured
    counterclockwise.

    Raises
    ------
    DomainError
        If ``axis`` is the zero vector.
    """
    a1, a2, a3 = (float(c) for c in axis)
    n = math.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
    if n == 0.0:
        raise DomainError("rotation axis must be nonzero")
    s = math.sin(0.5 * phi) / n
    return Quaternion(math.cos(0.5 * phi), (a1 * s, a2 * s, a3 * s))


def right_action_matrix(b: Quaternion) -> Matrix4:
    """4x4 matrix R_b of right multiplication by b on column quaternions.

    ``R_b @ q.as_array()`` equals ``quat_mul(q, b).as_array()`` for every q.
    Row-major layout, components ordered (q0, q1, q2, q3).
    """
    b0, b1, b2, b3 = b.q0, b.q1, b.q2, b.q3
    return np.array([
        [b0, -b1, -b2, -b3],
        [b1, b0, b3, -b2],
        [b2, -b3, b0, b1],
        [b3, b2, -b1, b0],
    ])
