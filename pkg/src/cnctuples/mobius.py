"""Automorphisms ``u o phi_a`` of the unit ball, on points and on tuples.

``phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>)`` with ``P_a`` the
orthogonal projection onto ``C a``, ``Q_a = I - P_a`` and
``s_a = sqrt(1 - |a|^2)``.  For ``a = 0`` we use ``P_0 = 0, s_0 = 1``, so
``phi_0(z) = -z``; this is the continuous extension and keeps the family
closed under the ball's automorphism group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charfn import _resolvent_solve, ball_grid, ball_point, eval_theta, inner
from .coincidence import (
    CoincidenceWitness,
    decide_weak_coincidence,
    sample_function,
    weak_residual,
)
from .errors import DimensionMismatch, GramMismatch
from .linalg import DEFAULT_TOL, isometry_from_gram, maxabs
from .tuples import OperatorTuple, defects, validate


@dataclass(frozen=True)
class MobiusMap:
    a: np.ndarray
    u: np.ndarray = None
    tol: float = DEFAULT_TOL
    P: np.ndarray = field(init=False, repr=False)
    s: float = field(init=False)

    def __post_init__(self):
        a = ball_point(self.a)
        n = a.shape[0]
        u = np.eye(n, dtype=complex) if self.u is None else np.asarray(self.u, dtype=complex)
        if u.shape != (n, n):
            raise DimensionMismatch(f"u must be {n}x{n}, got {u.shape}")
        if maxabs(u.conj().T @ u - np.eye(n)) > self.tol:
            raise DimensionMismatch("u is not unitary")
        aa = float(np.real(np.vdot(a, a)))
        P = np.outer(a, a.conj()) / aa if aa > 0 else np.zeros((n, n), dtype=complex)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "s", float(np.sqrt(1 - aa)))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def Q(self) -> np.ndarray:
        return np.eye(self.n) - self.P


def phi_a(m: MobiusMap, z) -> np.ndarray:
    """``u(phi_a(z))``."""
    z = ball_point(z, m.n)
    w = (m.a - m.P @ z - m.s * (m.Q @ z)) / (1 - inner(z, m.a))
    return m.u @ w


def _phi_only(m: MobiusMap, z):
    return phi_a(MobiusMap(m.a, None, m.tol), z)


def transform_tuple(T: OperatorTuple, m: MobiusMap, check=True) -> OperatorTuple:
    """``u(T_a)`` with ``T_a = (I - T A^*)^{-1} (A - P_a T - s_a Q_a T)``.

    Here ``T A^* = sum conj(a_i) T_i`` and ``(P_a T)_j = a_j (T A^*) / |a|^2``.
    """
    a, d = m.a, T.d
    TA = T.linear_combination(np.conj(a))
    aa = float(np.real(np.vdot(a, a)))
    PT = np.array([a[j] * TA / aa for j in range(m.n)]) if aa > 0 else np.zeros_like(T.mats)
    QT = T.mats - PT
    num = np.array([a[j] * np.eye(d) - PT[j] - m.s * QT[j] for j in range(m.n)])
    R = np.eye(d) - TA
    Ta = np.array([_resolvent_solve(R, num[j]) for j in range(m.n)])
    uTa = np.tensordot(m.u, Ta, axes=1)
    return validate(uTa, T.tol) if check else OperatorTuple(uTa, T.tol)


def check_defect_identity(T: OperatorTuple, m: MobiusMap) -> float:
    """Residual of ``I - T_a T_a^* = (1-|a|^2)(I - TA^*)^{-1} (I - TT^*) (I - AT^*)^{-1}``."""
    Ta = transform_tuple(T, MobiusMap(m.a, None, m.tol), check=False)
    R = Ta.row()
    lhs = np.eye(T.d) - R @ R.conj().T
    Rt = T.row()
    Rinv = np.linalg.inv(np.eye(T.d) - T.linear_combination(np.conj(m.a)))
    rhs = m.s**2 * Rinv @ (np.eye(T.d) - Rt @ Rt.conj().T) @ Rinv.conj().T
    return maxabs(lhs - rhs)


def defect_unitary(T: OperatorTuple, m: MobiusMap, tol=None):
    """``S = s_a (I - TA^*)^{-1}`` and the unitary ``U: D_{T_a*} -> D_{T*}``.

    ``U D_{T_a*} = D_{T*} S^*``; both sides have the Gram matrix
    ``I - T_a T_a^*`` by the defect identity, so ``U`` comes from
    :func:`isometry_from_gram` on the columns of the two sides.  Returned as
    an ambient ``d x d`` matrix vanishing off the defect space of ``T_a``.
    """
    tol = T.tol if tol is None else tol
    S = m.s * np.linalg.inv(np.eye(T.d) - T.linear_combination(np.conj(m.a)))
    Ta = transform_tuple(T, m, check=False)
    A = defects(Ta).D_Tstar
    B = defects(T).D_Tstar @ S.conj().T
    U = isometry_from_gram(A, B, 10 * tol)
    res = maxabs(U @ A - B)
    if res > 10 * tol:
        raise GramMismatch(f"defect unitary residual {res:.3e}", residual=res)
    return S, U


@dataclass(frozen=True)
class TransformationReport:
    witness: CoincidenceWitness
    decider_residual: float
    resolvent_left: float
    resolvent_right: float
    scalar_identity: float

    @property
    def residual(self) -> float:
        return self.witness.residual

    def to_dict(self):
        return {
            "witness_residual": self.witness.residual,
            "decider_residual": self.decider_residual,
            "resolvent_left": self.resolvent_left,
            "resolvent_right": self.resolvent_right,
            "scalar_identity": self.scalar_identity,
        }


def verify_transformation_law(T: OperatorTuple, m: MobiusMap, grid=None, tol=None, seed=0):
    """Compare ``theta_T o phi_a o u^*`` with ``theta_{u(T_a)}`` on ``grid``.

    The codomain unitary comes from :func:`defect_unitary` (transported to
    defect coordinates); the generic weak-coincidence decider is then run
    independently.  Alongside, the two resolvent factorizations behind the
    law and the scalar identity
    ``1 - <phi_a w, phi_a z> = (1-|a|^2)(1-<w,z>) / ((1-<w,a>)(1-<a,z>))``
    are checked at every pair of grid points.
    """
    tol = T.tol if tol is None else tol
    grid = ball_grid(T.n) if grid is None else np.asarray(grid, dtype=complex)
    dT = defects(T)
    uTa = transform_tuple(T, m)
    dU = defects(uTa)
    Ta = transform_tuple(T, MobiusMap(m.a, None, m.tol), check=False)

    F = sample_function(
        lambda z: eval_theta(T, dT, _phi_only(m, m.u.conj().T @ z)), grid, dT.rank, dT.rank_star
    )
    G = sample_function(lambda z: eval_theta(uTa, dU, z), grid, dU.rank, dU.rank_star)

    _, U = defect_unitary(T, m, tol)
    # D_{u(T_a)*} = D_{T_a*}, so U is already defined on the right space
    Uc = dT.basis_DTstar.basis.conj().T @ U @ dU.basis_DTstar.basis
    tau_star = Uc.conj().T
    res = weak_residual(F, G, tau_star)
    witness = CoincidenceWitness(tau_star, None, "weak", res)
    decided = decide_weak_coincidence(F, G, tol, seed)

    a, d = m.a, T.d
    I = np.eye(d)
    AT = np.tensordot(a, T.adjoints(), axes=1)
    TA = T.linear_combination(np.conj(a))
    images = np.array([_phi_only(m, w) for w in grid])
    r_left = r_right = 0.0
    for w, wp in zip(grid, images):
        lhs = np.linalg.inv(I - np.tensordot(wp, T.adjoints(), axes=1)) / (1 - inner(w, a))
        rhs = np.linalg.inv(I - AT) @ np.linalg.inv(I - np.tensordot(w, Ta.adjoints(), axes=1))
        r_left = max(r_left, maxabs(lhs - rhs))
        lhs = np.linalg.inv(I - T.linear_combination(np.conj(wp))) / (1 - inner(a, w))
        rhs = np.linalg.inv(I - Ta.linear_combination(np.conj(w))) @ np.linalg.inv(I - TA)
        r_right = max(r_right, maxabs(lhs - rhs))
    # all pairs at once: entry (i, j) is for w = grid[i], z = grid[j]
    s_lhs = 1 - images @ images.conj().T
    wa = 1 - grid @ a.conj()
    s_rhs = m.s**2 * (1 - grid @ grid.conj().T) / np.outer(wa, wa.conj())
    r_scalar = maxabs(s_lhs - s_rhs)
    return TransformationReport(witness, decided.residual, r_left, r_right, r_scalar)
