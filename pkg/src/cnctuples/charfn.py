"""Characteristic function ``theta_T`` and the kernel ``k_T`` on the unit ball.

Both are returned in coordinates of the orthonormal defect bases carried by
:class:`~cnctuples.tuples.DefectData`:

* ``theta_T(z)`` is ``rank D_{T*} x rank D_T``,
* ``k_T(z)`` is ``d x rank D_{T*}``.

With ``Z = [z_1 I ... z_n I]`` the formulas are::

    theta_T(z) = -T + D_{T*} (I - sum z_i T_i^*)^{-1} Z D_T
    k_T(z)     = (I - sum conj(z_i) T_i)^{-1} D_{T*}
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.stats import norm, qmc

from .errors import DimensionMismatch, OutsideBall, SingularResolvent
from .linalg import maxabs
from .tuples import DefectData, OperatorTuple, defects

DEFAULT_GRID = 64
DEFAULT_RADIUS = 0.8


def ball_point(z, n=None) -> np.ndarray:
    """Validate a point of the open unit ball of ``C^n``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1 or (n is not None and z.shape[0] != n):
        raise DimensionMismatch(f"expected a point of C^{n}, got shape {z.shape}")
    r2 = float(np.sum(np.abs(z) ** 2))
    if not r2 < 1.0:
        raise OutsideBall(f"|z|^2 = {r2:.6g} is not < 1", norm2=r2)
    return z


def inner(w, z) -> complex:
    """``<w, z> = sum w_i conj(z_i)``."""
    return complex(np.sum(np.asarray(w) * np.conj(z)))


def ball_grid(n, size=DEFAULT_GRID, radius=DEFAULT_RADIUS, seed=0, include_origin=True):
    """Seeded quasi-random points in the ball ``|z| <= radius``.

    A scrambled Halton sequence in ``[0, 1)^{2n+1}`` is mapped to the ball:
    the first ``2n`` coordinates give a Gaussian direction through the
    inverse normal CDF, the last one the radius ``radius * u^(1/2n)``, which
    makes the points uniform in volume.  The origin is prepended when
    ``include_origin`` is set, so the default grid has ``size + 1`` points.
    """
    if not 0 < radius < 1:
        raise OutsideBall(f"grid radius must lie in (0, 1), got {radius}")
    pts = []
    if include_origin:
        pts.append(np.zeros(n, dtype=complex))
    if size > 0:
        u = qmc.Halton(d=2 * n + 1, scramble=True, seed=seed).random(size)
        u = np.clip(u, 1e-12, 1 - 1e-12)
        g = norm.ppf(u[:, : 2 * n])
        v = g[:, :n] + 1j * g[:, n:]
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        rad = radius * u[:, 2 * n] ** (1.0 / (2 * n))
        pts.extend(v * rad[:, None])
    return np.array(pts, dtype=complex).reshape(-1, n)


def _resolvent_solve(A, rhs):
    """Solve ``A X = rhs`` and flag numerically singular ``A``."""
    if A.shape[0] == 0:
        return np.zeros_like(rhs, dtype=complex)
    try:
        lu = lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularResolvent(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) <= 1e3 * np.finfo(float).eps * max(1.0, maxabs(A)):
        raise SingularResolvent("resolvent is numerically singular")
    return lu_solve(lu, rhs)


def theta_ambient(T: OperatorTuple, dd: DefectData, z) -> np.ndarray:
    """``theta_T(z)`` as a ``d x nd`` matrix, before passing to coordinates."""
    z = ball_point(z, T.n)
    d = T.d
    A = np.eye(d) - np.tensordot(z, T.adjoints(), axes=1)
    Z = np.hstack([zi * np.eye(d) for zi in z])
    return -T.row() + dd.D_Tstar @ _resolvent_solve(A, Z @ dd.D_T)


def eval_theta(T: OperatorTuple, dd: DefectData | None, z) -> np.ndarray:
    """``theta_T(z)`` in the bases ``basis_DT -> basis_DTstar``."""
    dd = defects(T) if dd is None else dd
    B, Bs = dd.basis_DT.basis, dd.basis_DTstar.basis
    return Bs.conj().T @ theta_ambient(T, dd, z) @ B


def eval_kT(T: OperatorTuple, dd: DefectData | None, z) -> np.ndarray:
    """``k_T(z) = (I - sum conj(z_i) T_i)^{-1} D_{T*}`` on ``basis_DTstar``.

    Shape ``d x rank D_{T*}``.
    """
    dd = defects(T) if dd is None else dd
    z = ball_point(z, T.n)
    A = np.eye(T.d) - T.linear_combination(np.conj(z))
    return _resolvent_solve(A, dd.D_Tstar @ dd.basis_DTstar.basis)


def check_theta_identity(T: OperatorTuple, z, w, dd: DefectData | None = None) -> float:
    """Residual of ``I - theta(w) theta(z)^* = (1 - <w,z>) G(w, z)``.

    ``G(w, z) = D_{T*} (I - sum w_i T_i^*)^{-1} (I - sum conj(z_i) T_i)^{-1} D_{T*}``
    is formed from two independent linear solves, not from ``k_T``.
    """
    dd = defects(T) if dd is None else dd
    z = ball_point(z, T.n)
    w = ball_point(w, T.n)
    Bs = dd.basis_DTstar.basis
    lhs = np.eye(Bs.shape[1]) - eval_theta(T, dd, w) @ eval_theta(T, dd, z).conj().T
    d = T.d
    Y = _resolvent_solve(np.eye(d) - T.linear_combination(np.conj(z)), dd.D_Tstar @ Bs)
    X = _resolvent_solve(np.eye(d) - np.tensordot(w, T.adjoints(), axes=1), Y)
    rhs = (1 - inner(w, z)) * (Bs.conj().T @ dd.D_Tstar @ X)
    return maxabs(lhs - rhs)


def check_kernel_identity(T: OperatorTuple, z, w, dd: DefectData | None = None) -> float:
    """Residual of ``(I - theta(w) theta(z)^*) / (1 - <w,z>) = k_T(w)^* k_T(z)``."""
    dd = defects(T) if dd is None else dd
    z = ball_point(z, T.n)
    w = ball_point(w, T.n)
    r = dd.rank_star
    lhs = (np.eye(r) - eval_theta(T, dd, w) @ eval_theta(T, dd, z).conj().T) / (1 - inner(w, z))
    rhs = eval_kT(T, dd, w).conj().T @ eval_kT(T, dd, z)
    return maxabs(lhs - rhs)
