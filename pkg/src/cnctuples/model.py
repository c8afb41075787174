"""Functional model of a completely non-coisometric tuple, truncated at degree N.

Notation (all matrices in orthonormal coordinates of the truncated spaces):

* ``M``  - ``P_N M_theta P_N`` from ``H^2_N (x) D_T`` to ``H^2_N (x) D_{T*}``
* ``Delta = (I - M^* M)^{1/2}``, with ``Rb`` an orthonormal basis of its range
* ``j``  - the dilation map, ``L = j^*``
* ``r``  - the map with ``r L = -Delta M^*`` and ``|h|^2 = |jh|^2 + |rh|^2``
* ``V = j (+) r`` and ``U = M (+) Delta``, both into
  ``K = (H^2_N (x) D_{T*}) (+) Ran Delta``

The model space is ``H_T = K (-) Ran U`` and the model tuple acts by
``T_i^*(u, v) = ((M_{z_i}^* (x) I) u, Delta^{-1} (M_{z_i}^* (x) I) Delta v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charfn import ball_grid
from .coincidence import CoincidenceWitness
from .errors import IntertwiningFailure, NotCNC, ResidualTooLarge, SpanDeficient
from .fockspace import (
    TruncatedFockSpace,
    build_space,
    dilation_j,
    multiplier_matrix,
    shift_matrices,
    theta_taylor,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    isometry_from_gram,
    maxabs,
    orthogonal_complement,
    psd_sqrt,
    range_basis,
)
from .tuples import OperatorTuple, cnc_kernel, defects, limit_AT

CERT_TOL = 1e-8


@dataclass(frozen=True)
class RMap:
    r: np.ndarray
    norm_residual: float
    rL_residual: float
    samples: int


@dataclass(frozen=True)
class ModelSpace:
    T: OperatorTuple
    space: TruncatedFockSpace
    dom_space: TruncatedFockSpace
    M: np.ndarray
    Delta: np.ndarray
    ran_delta: Subspace
    j: np.ndarray
    r: np.ndarray
    V: np.ndarray
    U: np.ndarray
    H_T: Subspace
    residuals: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.space.N

    @property
    def ambient_dim(self) -> int:
        return self.V.shape[0]

    def to_dict(self):
        return {
            "N": self.N,
            "fock_dim": self.space.dim,
            "ran_delta_dim": self.ran_delta.dim,
            "model_dim": self.H_T.dim,
            **self.residuals,
        }


def _pieces(T, N, dd, cap):
    space = build_space(T.n, N, dd.rank_star, cap)
    dom = build_space(T.n, N, dd.rank, cap)
    theta = theta_taylor(T, dd, N, validate=False)
    M = multiplier_matrix(theta, dom, space)
    G = np.eye(dom.dim) - M.conj().T @ M
    Delta = psd_sqrt((G + G.conj().T) / 2, T.tol)
    j = dilation_j(T, dd, space)
    return space, dom, M, Delta, j


def _solve_r(T, space, M, Delta, j, grid, seed):
    """Least-squares ``r`` from ``r L (k_z (x) x) = -Delta M^* (k_z (x) x)``."""
    L = j.conj().T
    pts = ball_grid(T.n, seed=seed) if grid is None else np.asarray(grid, dtype=complex)
    for attempt in range(2):
        K = np.hstack([space.kernel_vector(z) for z in pts])
        A = L @ K
        if range_basis(A, T.tol).dim == T.d:
            break
        # grid exhausted: one denser retry before giving up
        pts = ball_grid(T.n, size=4 * len(pts), seed=seed + 1)
    else:
        raise NotCNC("kernel samples k_T(z) x do not span the space", rank=range_basis(A, T.tol).dim)
    B = -Delta @ M.conj().T @ K
    r = np.linalg.lstsq(A.T, B.T, rcond=None)[0].T
    return r, len(pts)


def build_r(T: OperatorTuple, N: int, grid=None, seed=0, cert_tol=CERT_TOL, cap=20000) -> RMap:
    """The contraction ``r`` with ``r(k_T(z) x) = -Delta(k(., z) (x) theta_T(z)^* x)``.

    Certifies ``|h|^2 = |jh|^2 + |rh|^2`` on a basis and ``r L = -Delta M^*``
    on the truncated space.  Raises :class:`NotCNC` when the tuple has a
    nonzero coisometric part, and :class:`ResidualTooLarge` when a
    certificate fails (typically because ``N`` is too small).
    """
    dd = defects(T)
    if cnc_kernel(T, dd).dim:
        raise NotCNC("tuple has a nonzero T*-invariant subspace killed by D_{T*}")
    space, _, M, Delta, j = _pieces(T, N, dd, cap)
    r, m = _solve_r(T, space, M, Delta, j, grid, seed)
    res_norm = maxabs(np.eye(T.d) - j.conj().T @ j - r.conj().T @ r)
    res_rL = maxabs(r @ j.conj().T + Delta @ M.conj().T)
    if max(res_norm, res_rL) > cert_tol:
        raise ResidualTooLarge(
            f"r certificates {res_norm:.3e}, {res_rL:.3e} exceed {cert_tol:.1e}; raise the degree",
            norm_residual=res_norm,
            rL_residual=res_rL,
        )
    return RMap(r, res_norm, res_rL, m)


def build_model(T: OperatorTuple, N: int, grid=None, seed=0, cert_tol=CERT_TOL, cap=20000) -> ModelSpace:
    """Assemble ``V``, ``U`` and the model space, with their certificates.

    Certified: ``V V^* + U U^* = I_K`` and ``r^* Delta = -L M``.
    """
    dd = defects(T)
    if cnc_kernel(T, dd).dim:
        raise NotCNC("tuple has a nonzero T*-invariant subspace killed by D_{T*}")
    space, dom, M, Delta, j = _pieces(T, N, dd, cap)
    r, _ = _solve_r(T, space, M, Delta, j, grid, seed)
    Rb = range_basis(Delta, T.tol)
    V = np.vstack([j, Rb.basis.conj().T @ r])
    U = np.vstack([M, Rb.basis.conj().T @ Delta])
    K = V.shape[0]
    H = orthogonal_complement(range_basis(U, T.tol)) if U.size else Subspace.full(K, T.tol)
    residuals = {
        "res_norm": maxabs(np.eye(T.d) - V.conj().T @ V),
        "res_rL": maxabs(r @ j.conj().T + Delta @ M.conj().T),
        "res35": maxabs(r.conj().T @ Delta + j.conj().T @ M),
        "resVVUU": maxabs(V @ V.conj().T + U @ U.conj().T - np.eye(K)),
        "res_range": H.contains(V),
    }
    bad = {k: v for k, v in residuals.items() if v > cert_tol}
    if bad or H.dim != T.d:
        raise ResidualTooLarge(
            f"model certificates failed: {bad or {'model_dim': H.dim}}", model_dim=H.dim, **residuals
        )
    return ModelSpace(T, space, dom, M, Delta, Rb, j, r, V, U, H, residuals)


def model_operators(ms: ModelSpace) -> np.ndarray:
    """``(M_{z_i}^* (x) I) (+) Delta^+ (M_{z_i}^* (x) I) Delta`` on ``K``."""
    S = shift_matrices(ms.space)
    Sd = shift_matrices(ms.dom_space)
    Rb = ms.ran_delta.basis
    Dp = np.linalg.pinv(ms.Delta, rcond=ms.T.tol, hermitian=True)
    k1 = ms.space.dim
    ops = []
    for Si, Sdi in zip(S, Sd):
        op = np.zeros((ms.ambient_dim,) * 2, dtype=complex)
        op[:k1, :k1] = Si.conj().T
        op[k1:, k1:] = Rb.conj().T @ Dp @ Sdi.conj().T @ ms.Delta @ Rb
        ops.append(op)
    return np.array(ops)


def model_tuple(ms: ModelSpace, cert_tol=CERT_TOL) -> OperatorTuple:
    """The model tuple on ``H_T`` in the coordinates of ``ms.H_T``.

    Certifies ``Op_i V = V T_i^*`` and the invariance of ``H_T`` under the
    model operators.  ``model_tuple(ms).conjugate_by(W) == T`` for the unitary
    ``W = V^* H`` (``H`` the model basis).
    """
    ops = model_operators(ms)
    Hb = ms.H_T.basis
    inter = max(maxabs(op @ ms.V - ms.V @ Ti.conj().T) for op, Ti in zip(ops, ms.T))
    inv = max(ms.H_T.contains(op @ Hb) for op in ops)
    if max(inter, inv) > cert_tol:
        raise ResidualTooLarge(f"model intertwining {inter:.3e}, invariance {inv:.3e}", intertwining=inter, invariance=inv)
    mats = np.array([(Hb.conj().T @ op @ Hb).conj().T for op in ops])
    return OperatorTuple(mats, ms.T.tol)


def model_intertwining_residual(ms: ModelSpace) -> float:
    ops = model_operators(ms)
    return max(maxabs(op @ ms.V - ms.V @ Ti.conj().T) for op, Ti in zip(ops, ms.T))


@dataclass(frozen=True)
class MVForm:
    phi: np.ndarray
    U_ops: np.ndarray
    W: np.ndarray
    residuals: dict

    def to_dict(self):
        return {"ran_A_dim": self.U_ops.shape[1] if self.U_ops.ndim == 3 else 0, **self.residuals}


def mv_form(T: OperatorTuple, ms: ModelSpace, cert_tol=CERT_TOL) -> MVForm:
    """The spherical isometry ``W`` on ``Ran Delta`` of the Mueller-Vasilescu form.

    ``phi`` is the isometry ``Ran A_T -> Ran Delta`` with ``r = phi A_T^{1/2}``;
    ``U_i (A_T^{1/2} h) = A_T^{1/2} T_i^* h``; ``W_i = phi U_i phi^*`` on
    ``Ran phi``, completed by ``W_1 = I``, ``W_i = 0`` (``i > 1``) on the
    rest of ``Ran Delta``.  Everything is in the orthonormal coordinates of
    ``Ran A_T`` and ``Ran Delta``.  Certifies
    ``((M_z^* (x) I) (+) W_i) V = V T_i^*``.
    """
    tol = T.tol
    A, _ = limit_AT(T, tol=0.0, rtol=1e-14)
    Ah = psd_sqrt((A + A.conj().T) / 2, tol)
    Ra = range_basis(Ah, tol).basis
    Rb = ms.ran_delta.basis
    rc = Rb.conj().T @ ms.r
    phi_amb = isometry_from_gram(Ah, rc, max(tol, cert_tol))
    phi = phi_amb @ Ra
    Ahp = np.linalg.pinv(Ah, rcond=tol, hermitian=True)
    Uops = np.array([Ra.conj().T @ Ah @ Ti.conj().T @ Ahp @ Ra for Ti in T])
    k = Rb.shape[1]
    comp = orthogonal_complement(range_basis(phi, tol)).basis if k else np.zeros((0, 0))
    W = []
    for i in range(T.n):
        Wi = phi @ Uops[i] @ phi.conj().T
        if i == 0 and comp.size:
            Wi = Wi + comp @ comp.conj().T
        W.append(Wi)
    W = np.array(W).reshape(T.n, k, k)
    S = shift_matrices(ms.space)
    k1 = ms.space.dim
    inter = 0.0
    for i, Ti in enumerate(T):
        top = S[i].conj().T @ ms.V[:k1]
        bottom = W[i] @ ms.V[k1:]
        inter = max(inter, maxabs(np.vstack([top, bottom]) - ms.V @ Ti.conj().T))
    residuals = {
        "res_phi": maxabs(phi @ Ra.conj().T @ Ah - rc),
        "res_sum_U": maxabs(sum(Ui.conj().T @ Ui for Ui in Uops) - np.eye(Ra.shape[1])) if Ra.shape[1] else 0.0,
        "res_spherical": maxabs(sum(Wi.conj().T @ Wi for Wi in W) - np.eye(k)) if k else 0.0,
        "res_mv": inter,
    }
    if max(residuals.values()) > cert_tol:
        raise ResidualTooLarge(f"MV certificates failed: {residuals}", **residuals)
    return MVForm(phi, Uops, W, residuals)


def equivalence_from_coincidence(T: OperatorTuple, R: OperatorTuple, witness: CoincidenceWitness, grid=None, tol=None, seed=0):
    """Unitary ``U: H_R -> H_T`` with ``U R_i = T_i U`` from a weak coincidence.

    ``witness.tau_star`` maps ``D_{T*}`` to ``D_{R*}`` (defect coordinates)
    and ``U`` is fixed by ``U k_R(z) xi = k_T(z) tau_*^* xi`` on the grid.
    """
    from .charfn import eval_kT

    tol = T.tol if tol is None else tol
    pts = ball_grid(T.n, seed=seed) if grid is None else np.asarray(grid, dtype=complex)
    dT, dR = defects(T), defects(R)
    ts = np.asarray(witness.tau_star, dtype=complex)
    A = np.hstack([eval_kT(R, dR, z) for z in pts])
    B = np.hstack([eval_kT(T, dT, z) @ ts.conj().T for z in pts])
    rA, rB = range_basis(A, tol).dim, range_basis(B, tol).dim
    if rA < R.d or rB < T.d:
        raise SpanDeficient(f"kernel samples span {rA}/{R.d} and {rB}/{T.d}", ranks=[rA, rB])
    scale = max(1.0, maxabs(A) ** 2, maxabs(B) ** 2)
    U = isometry_from_gram(A, B, tol * scale)
    res = max(maxabs(U @ Ri - Ti @ U) for Ri, Ti in zip(R, T))
    if res > 10 * tol * max(1.0, maxabs(A)):
        raise IntertwiningFailure(f"U R_i - T_i U = {res:.3e}", residual=res)
    return U
