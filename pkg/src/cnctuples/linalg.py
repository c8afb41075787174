"""Dense complex matrix kernel.

All rank decisions in the package go through :func:`range_basis`, which drops
singular values at or below ``tol * sigma_max``.  Subspaces are carried as
:class:`Subspace` values holding an orthonormal basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ColumnCountMismatch,
    DimensionMismatch,
    NoSolution,
    NotHermitian,
    NotPSD,
)

DEFAULT_TOL = 1e-9


def maxabs(M) -> float:
    """Entrywise max-norm; 0 for empty arrays."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def opnorm(M) -> float:
    M = np.asarray(M)
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def as_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatch("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class Subspace:
    """Subspace of ``C^ambient_dim`` given by an orthonormal basis (columns)."""

    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "Subspace":
        return orthogonal_complement(self)

    def contains(self, vectors, tol=None) -> float:
        """Max-norm of the component of ``vectors`` orthogonal to the subspace."""
        V = np.asarray(vectors, dtype=complex).reshape(self.ambient_dim, -1)
        return maxabs(V - self.basis @ (self.basis.conj().T @ V))

    @classmethod
    def full(cls, dim, tol=DEFAULT_TOL):
        return cls(dim, np.eye(dim, dtype=complex), tol)

    @classmethod
    def zero(cls, dim, tol=DEFAULT_TOL):
        return cls(dim, np.zeros((dim, 0), dtype=complex), tol)


def hermitian_part(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return (M + M.conj().T) / 2


def psd_sqrt(M, tol=DEFAULT_TOL) -> np.ndarray:
    """Positive square root of a Hermitian PSD matrix.

    The input is symmetrized before the eigendecomposition.  Eigenvalues in
    ``[-tol, tol]`` are set to zero, so exact zeros of the analytic object do
    not turn into ``sqrt(eps)``-sized spurious directions.

    Raises
    ------
    NotHermitian
        if ``max|M - M*| > tol``.
    NotPSD
        if some eigenvalue is below ``-tol``.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"psd_sqrt needs a square matrix, got {M.shape}")
    if M.shape[0] == 0:
        return M.copy()
    asym = maxabs(M - M.conj().T)
    if asym > tol:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds tol", magnitude=asym)
    w, V = np.linalg.eigh(hermitian_part(M))
    if w[0] < -tol:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -tol", eigenvalue=float(w[0]))
    w = np.where(w <= tol, 0.0, w)
    return (V * np.sqrt(w)) @ V.conj().T


def range_basis(M, tol=DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the column space of ``M``.

    Singular values ``<= tol * sigma_max`` count as zero.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M[:, None]
    rows = M.shape[0]
    if M.size == 0:
        return Subspace.zero(rows, tol)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0.0:
        return Subspace.zero(rows, tol)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(rows, U[:, :rank], tol)


def _basis_above(M, cut) -> np.ndarray:
    """Left singular vectors of ``M`` with singular value above ``cut``."""
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > cut]


def null_basis(M, tol=DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the kernel of ``M`` (relative rank threshold)."""
    M = np.asarray(M, dtype=complex)
    cols = M.shape[1]
    if M.shape[0] == 0 or cols == 0:
        return Subspace.full(cols, tol)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return Subspace.full(cols, tol)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(cols, Vh[rank:].conj().T, tol)


def orthogonal_complement(S: Subspace) -> Subspace:
    if S.dim == 0:
        return Subspace.full(S.ambient_dim, S.tol)
    return null_basis(S.basis.conj().T, S.tol)


def span(*subspaces_or_matrices, tol=DEFAULT_TOL) -> Subspace:
    parts = [s.basis if isinstance(s, Subspace) else np.asarray(s) for s in subspaces_or_matrices]
    return range_basis(np.hstack(parts), tol)


def subspace_intersection(subspaces, ambient_dim=None, tol=None) -> Subspace:
    """Intersection of subspaces sharing an ambient space.

    A vector lies in every ``S_i`` iff it is annihilated by every
    ``I - P_i``; the intersection is the kernel of the stacked complements.
    The empty intersection is the whole ambient space (``ambient_dim`` must
    then be given).
    """
    subspaces = list(subspaces)
    if not subspaces:
        if ambient_dim is None:
            raise DimensionMismatch("empty intersection needs ambient_dim")
        return Subspace.full(ambient_dim, DEFAULT_TOL if tol is None else tol)
    dims = {s.ambient_dim for s in subspaces}
    if len(dims) != 1:
        raise DimensionMismatch(f"ambient dimensions differ: {sorted(dims)}")
    (n,) = dims
    if tol is None:
        tol = max(s.tol for s in subspaces)
    comps = [orthogonal_complement(s).basis.conj().T for s in subspaces]
    stacked = np.vstack(comps) if comps else np.zeros((0, n))
    if stacked.shape[0] == 0:
        return Subspace.full(n, tol)
    # complements are orthonormal rows, so the singular values are sines of
    # angles; sqrt(tol) keeps noise-level tilts of ~tol inside the intersection
    _, s, Vh = np.linalg.svd(stacked, full_matrices=True)
    s_full = np.zeros(n)
    s_full[: s.size] = s
    keep = s_full <= np.sqrt(tol)
    return Subspace(n, Vh[keep].conj().T, tol)


def polar_unitary(X) -> np.ndarray:
    """Unitary factor of the polar decomposition of a square matrix."""
    U, _, Vh = np.linalg.svd(np.asarray(X, dtype=complex))
    return U @ Vh


def isometry_from_gram(A, B, tol=DEFAULT_TOL) -> np.ndarray:
    """Partial isometry ``U`` with ``U @ A = B``, from ``Ran A`` onto ``Ran B``.

    Exists exactly when the column Gram matrices agree.  The unitary between
    the two ranges is the polar factor of ``Qb* B A* Qa`` (orthogonal
    Procrustes), which is exact when ``B = U0 A`` and stable otherwise.

    Returns the ambient ``rows(B) x rows(A)`` matrix; it vanishes on
    ``(Ran A)^perp``.

    Raises
    ------
    ColumnCountMismatch
        if ``A`` and ``B`` have different column counts.
    NoSolution
        if ``max|A*A - B*B| > tol``, if the ranks differ, or if the recovered
        map misses ``B`` by more than ``10 * tol`` in some column.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape[1] != B.shape[1]:
        raise ColumnCountMismatch(f"column counts differ: {A.shape[1]} vs {B.shape[1]}")
    gap = maxabs(A.conj().T @ A - B.conj().T @ B)
    if gap > tol:
        raise NoSolution(f"Gram gap {gap:.3e} exceeds tol", reason="GramMismatch", residual=gap)
    # one absolute cut for both sides: a relative cut would promote pure
    # rounding noise on one side to full rank
    cut = tol * max(1.0, opnorm(A), opnorm(B))
    Qa = _basis_above(A, cut)
    Qb = _basis_above(B, cut)
    if Qa.shape[1] != Qb.shape[1]:
        raise NoSolution(
            f"ranks differ: {Qa.shape[1]} vs {Qb.shape[1]}", reason="RankMismatch", residual=gap
        )
    if Qa.shape[1] == 0:
        return np.zeros((B.shape[0], A.shape[0]), dtype=complex)
    W = polar_unitary((Qb.conj().T @ B) @ (Qa.conj().T @ A).conj().T)
    U = Qb @ W @ Qa.conj().T
    miss = float(np.max(np.linalg.norm(U @ A - B, axis=0))) if A.shape[1] else 0.0
    if miss > 10 * tol:
        raise NoSolution(f"columnwise miss {miss:.3e}", reason="GramMismatch", residual=miss)
    return U


def embed_columns(S: Subspace, k: int) -> np.ndarray:
    """Deterministic orthonormal completion: ``k`` columns orthogonal to ``S``."""
    C = orthogonal_complement(S).basis
    if C.shape[1] < k:
        raise DimensionMismatch(f"complement has dimension {C.shape[1]} < {k}")
    return C[:, :k]
