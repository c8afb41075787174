"""Commuting row contractions and their basic invariants.

A tuple ``T = (T_1, ..., T_n)`` of ``d x d`` matrices is stored as an array of
shape ``(n, d, d)``.  The row operator ``C^{nd} -> C^d`` is ``[T_1 ... T_n]``
and its adjoint is the column ``(T_1^*, ..., T_n^*)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonCommuting, NotRowContraction
from .linalg import DEFAULT_TOL, Subspace, maxabs, null_basis, opnorm, psd_sqrt, range_basis


@dataclass(frozen=True)
class OperatorTuple:
    """Validated commuting row contraction.

    Build instances through :func:`validate`; the constructor itself does not
    check the invariants.  ``d == 0`` is allowed only for the degenerate
    tuples produced by the inner-function realization.
    """

    mats: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        M = np.asarray(self.mats, dtype=complex)
        M.setflags(write=False)
        object.__setattr__(self, "mats", M)

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def d(self) -> int:
        return self.mats.shape[1]

    @property
    def degenerate(self) -> bool:
        return self.d == 0

    def __iter__(self):
        return iter(self.mats)

    def __getitem__(self, i):
        return self.mats[i]

    def row(self) -> np.ndarray:
        """The row operator ``[T_1 ... T_n]`` (``d x nd``)."""
        return np.hstack(list(self.mats)) if self.n else np.zeros((self.d, 0))

    def column_adjoint(self) -> np.ndarray:
        """``T^*: h -> (T_1^* h, ..., T_n^* h)`` (``nd x d``)."""
        return self.row().conj().T

    def adjoints(self) -> np.ndarray:
        return np.conj(np.transpose(self.mats, (0, 2, 1)))

    def linear_combination(self, c) -> np.ndarray:
        """``sum_i c_i T_i``."""
        return np.tensordot(np.asarray(c, dtype=complex), self.mats, axes=1)

    def conjugate_by(self, Q) -> "OperatorTuple":
        """``(Q T_i Q^*)_i`` for a unitary (or isometry) ``Q``."""
        Q = np.asarray(Q, dtype=complex)
        return OperatorTuple(np.einsum("ab,ibc,dc->iad", Q, self.mats, Q.conj()), self.tol)


@dataclass(frozen=True)
class DefectData:
    D_T: np.ndarray
    D_Tstar: np.ndarray
    basis_DT: Subspace
    basis_DTstar: Subspace

    @property
    def rank(self):
        return self.basis_DT.dim

    @property
    def rank_star(self):
        return self.basis_DTstar.dim


@dataclass(frozen=True)
class ClassificationReport:
    is_pure: bool
    is_coisometric: bool
    is_spherical_isometry: bool
    is_cnc: bool
    A_T: np.ndarray
    cnc_kernel: Subspace
    iterations_to_converge: int
    defect_ranks: tuple = field(default=(0, 0))

    def to_dict(self):
        return {
            "pure": self.is_pure,
            "coisometric": self.is_coisometric,
            "spherical_isometry": self.is_spherical_isometry,
            "cnc": self.is_cnc,
            "cnc_kernel_dim": self.cnc_kernel.dim,
            "A_T_norm": float(np.linalg.norm(self.A_T, 2)) if self.A_T.size else 0.0,
            "iterations_to_converge": self.iterations_to_converge,
            "rank_DT": self.defect_ranks[0],
            "rank_DTstar": self.defect_ranks[1],
        }


def validate(mats, tol=DEFAULT_TOL) -> OperatorTuple:
    """Check commutativity and row contractivity.

    Raises :class:`NonCommuting` with the offending pair and its max-norm, or
    :class:`NotRowContraction` with ``excess = lambda_max(sum T_i T_i^*) - 1``.
    """
    M = np.asarray(mats, dtype=complex)
    if M.ndim == 2:
        M = M[None]
    if M.ndim != 3 or M.shape[0] < 1 or M.shape[1] < 1 or M.shape[1] != M.shape[2]:
        raise DimensionMismatch(f"expected n >= 1 square d x d matrices, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionMismatch("non-finite entries")
    for i, j in combinations(range(M.shape[0]), 2):
        c = maxabs(M[i] @ M[j] - M[j] @ M[i])
        if c > tol:
            raise NonCommuting(f"T_{i} and T_{j} do not commute ({c:.3e})", i=i, j=j, magnitude=c)
    T = OperatorTuple(M, tol)
    lam = float(np.linalg.eigvalsh(row_gram(T))[-1])
    if lam > 1 + tol:
        raise NotRowContraction(f"lambda_max = {lam:.6g} > 1", excess=lam - 1)
    return T


def row_gram(T: OperatorTuple) -> np.ndarray:
    """``sum_i T_i T_i^*``."""
    R = T.row()
    return R @ R.conj().T


def defects(T: OperatorTuple) -> DefectData:
    d, n = T.d, T.n
    R = T.row()
    DTs = psd_sqrt(np.eye(d) - R @ R.conj().T, T.tol)
    DT = psd_sqrt(np.eye(n * d) - R.conj().T @ R, T.tol)
    return DefectData(DT, DTs, range_basis(DT, T.tol), range_basis(DTs, T.tol))


def apply_PT(T: OperatorTuple, X) -> np.ndarray:
    """The completely positive map ``X -> sum_i T_i X T_i^*``."""
    X = np.asarray(X, dtype=complex)
    if X.shape != (T.d, T.d):
        raise DimensionMismatch(f"X must be {T.d}x{T.d}, got {X.shape}")
    return np.einsum("iab,bc,idc->ad", T.mats, X, T.mats.conj())


def limit_AT(T: OperatorTuple, tol=None, max_iter=100_000, rtol=0.0, monitor=None, tail=False):
    """Limit of the decreasing chain ``I >= P_T(I) >= P_T^2(I) >= ...``.

    Iterates ``X <- P_T(X)`` from ``X = I`` and stops at the first ``k`` with
    ``max|X_k - X_{k-1}| <= tol + rtol * max|X_k|``, or with
    ``|X_k| <= tol`` in operator norm (the chain is decreasing and PSD, so the
    limit is then within ``tol`` of zero).  With ``tail=True`` the difference
    test also requires the geometric tail estimate ``|X_k - X_{k-1}| q / (1 - q)``,
    with ``q`` the largest of the last three ratios of successive differences
    in operator norm, to be at
    most ``tol / 2``; this keeps slowly mixing pure tuples from stopping at a
    visibly nonzero iterate.
    Returns ``(X_k, k)``.  ``monitor(X_prev, X_next)`` is called on every step
    when given.
    """
    tol = T.tol if tol is None else tol
    X = np.eye(T.d, dtype=complex)
    steps = []
    for k in range(1, max_iter + 1):
        Y = apply_PT(T, X)
        Y = (Y + Y.conj().T) / 2
        if monitor is not None:
            monitor(X, Y)
        diff = maxabs(Y - X)
        if opnorm(Y) <= tol:
            return Y, k
        step = opnorm(Y - X) if tail else diff
        if diff <= tol + rtol * maxabs(Y):
            ratios = [b / a if a else 0.0 for a, b in zip(steps[-3:], steps[-2:] + [step])]
            q = max(ratios, default=0.0)
            if not tail or q == 0.0 or (q < 1 and step * q / (1 - q) <= tol / 2):
                return Y, k
        steps.append(step)
        X = Y
    raise NoConvergence(f"no convergence after {max_iter} iterations", max_iter=max_iter)


def cnc_kernel(T: OperatorTuple, dd: DefectData | None = None) -> Subspace:
    """Largest ``T^*``-invariant subspace annihilated by ``D_{T^*}``.

    ``K_0 = Ker D_{T^*}``, ``K_{m+1} = {h in K_m : T_i^* h in K_m for all i}``;
    the dimension strictly drops until it stabilizes, so at most ``d`` rounds.
    The tuple is c.n.c. iff the result is ``{0}``.
    """
    dd = defects(T) if dd is None else dd
    K = null_basis(dd.D_Tstar, T.tol) if np.any(dd.D_Tstar) else Subspace.full(T.d, T.tol)
    adj = T.adjoints()
    for _ in range(T.d + 1):
        if K.dim == 0:
            break
        Kb = K.basis
        leak = np.vstack([(np.eye(T.d) - Kb @ Kb.conj().T) @ (A @ Kb) for A in adj])
        if maxabs(leak) <= T.tol:
            break
        C = null_basis(leak, T.tol)
        K = Subspace(T.d, Kb @ C.basis, T.tol)
    return K


def classify(T: OperatorTuple) -> ClassificationReport:
    dd = defects(T)
    A, its = limit_AT(T, tail=True)
    tol = T.tol
    K = cnc_kernel(T, dd)
    col_gram = sum(Ti.conj().T @ Ti for Ti in T)
    return ClassificationReport(
        is_pure=bool(np.linalg.norm(A, 2) <= tol),
        is_coisometric=bool(maxabs(dd.D_Tstar) <= tol),
        is_spherical_isometry=bool(maxabs(np.eye(T.d) - col_gram) <= tol),
        is_cnc=K.dim == 0,
        A_T=A,
        cnc_kernel=K,
        iterations_to_converge=its,
        defect_ranks=(dd.rank, dd.rank_star),
    )
