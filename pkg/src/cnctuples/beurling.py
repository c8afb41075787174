"""Shift-invariant subspaces of truncated ``H^2_n(E)`` and inner multipliers.

Every invariant subspace splits as ``(H^2 (x) X) (+) Y`` with ``X`` the
largest reducing slice and ``Y = Ran M_phi`` for a purely contractive inner
``phi``; conversely every purely contractive inner ``theta`` is, up to weak
coincidence, the characteristic function of the compression of the shift to
``(Ran M_theta)^perp``.

The truncated shift is the compression of ``M_z`` to degrees ``<= N``.  A
constant ``eta`` is accepted into ``X`` only when its whole orbit
``z^k (x) eta``, ``|k| <= N``, lies in the subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfn import ball_grid, eval_theta
from .coincidence import SampledOperatorFunction, decide_weak_coincidence, sample_function
from .errors import (
    CertificationFailure,
    HasReducingPart,
    NoSolution,
    NotInner,
    NotPurelyContractive,
    ShapeMismatch,
)
from .fockspace import (
    TaylorCoefficients,
    TruncatedFockSpace,
    build_space,
    multiplier_matrix,
    shift_matrices,
    theta_taylor,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    isometry_from_gram,
    maxabs,
    null_basis,
    orthogonal_complement,
    range_basis,
)
from .tuples import OperatorTuple, defects, validate

CERT_TOL = 1e-8


@dataclass(frozen=True)
class InvariantSubspace:
    space: TruncatedFockSpace
    basis: Subspace

    @property
    def dim(self) -> int:
        return self.basis.dim

    def projector(self) -> np.ndarray:
        return self.basis.projector()

    def invariance_residual(self) -> float:
        B = self.basis.basis
        return max((self.basis.contains(S @ B) for S in shift_matrices(self.space)), default=0.0)


def constant_embedding(space: TruncatedFockSpace, k) -> np.ndarray:
    """Isometry ``E -> H^2_N(E)``, ``eta -> sqrt(gamma_k) z^k (x) eta``."""
    Ek = np.zeros((space.dim, space.coeff_dim), dtype=complex)
    Ek[space.block(k)] = np.eye(space.coeff_dim)
    return Ek


def invariant_span(space: TruncatedFockSpace, vectors, tol=DEFAULT_TOL) -> InvariantSubspace:
    """Smallest shift-invariant subspace containing the columns of ``vectors``."""
    S = shift_matrices(space)
    V = np.asarray(vectors, dtype=complex).reshape(space.dim, -1)
    basis = range_basis(V, tol)
    for _ in range(space.N + 1):
        grown = range_basis(np.hstack([basis.basis] + [Si @ basis.basis for Si in S]), tol)
        if grown.dim == basis.dim:
            break
        basis = grown
    return InvariantSubspace(space, basis)


def slice_subspace(space: TruncatedFockSpace, X: Subspace) -> Subspace:
    """``H^2_N (x) X``; orthonormal since the monomial blocks are."""
    cols = [constant_embedding(space, k) @ X.basis for k in space.indices]
    B = np.hstack(cols) if cols else np.zeros((space.dim, 0))
    return Subspace(space.dim, B, X.tol)


def multiplier_range(theta: TaylorCoefficients, N: int, tol=DEFAULT_TOL) -> InvariantSubspace:
    """``Ran P_N M_theta`` as an invariant subspace of ``H^2_N(E_*)``."""
    dom = build_space(theta.n, N, theta.dom)
    cod = build_space(theta.n, N, theta.codom)
    M = multiplier_matrix(theta.truncated(N), dom, cod)
    return InvariantSubspace(cod, range_basis(M, tol) if M.size else Subspace.zero(cod.dim, tol))


def reducing_part(M: InvariantSubspace, tol=None) -> Subspace:
    """Largest ``X`` in ``E`` with ``H^2_N (x) X`` inside ``M``.

    Kernel of the stacked maps ``eta -> (I - P_M)(z^k (x) eta)`` over all
    ``|k| <= N``.
    """
    tol = M.basis.tol if tol is None else tol
    sp = M.space
    if M.dim == 0:
        return Subspace.zero(sp.coeff_dim, tol)
    Q = np.eye(sp.dim) - M.projector()
    stack = np.vstack([Q @ constant_embedding(sp, k) for k in sp.indices])
    if maxabs(stack) <= tol:
        return Subspace.full(sp.coeff_dim, tol)
    return null_basis(stack, max(tol, 1e-8))


@dataclass(frozen=True)
class BLHDecomposition:
    X: Subspace
    Y: InvariantSubspace
    residual: float
    invariance: float

    def to_dict(self):
        return {"dim_X": self.X.dim, "dim_Y": self.Y.dim, "residual": self.residual, "invariance": self.invariance}


def blh_decompose(M: InvariantSubspace, tol=None) -> BLHDecomposition:
    """``M = (H^2_N (x) X) (+) Y`` with ``X`` the reducing part.

    ``residual`` is ``max |P_M - P_{H^2 (x) X} - P_Y|``; ``invariance`` the
    shift-invariance defect of ``Y``.
    """
    tol = M.basis.tol if tol is None else tol
    sp = M.space
    X = reducing_part(M, tol)
    HX = slice_subspace(sp, X)
    Yb = M.basis.basis - HX.basis @ (HX.basis.conj().T @ M.basis.basis)
    Y = InvariantSubspace(sp, range_basis(Yb, tol) if Yb.size else Subspace.zero(sp.dim, tol))
    res = maxabs(M.projector() - HX.projector() - Y.projector())
    return BLHDecomposition(X, Y, res, Y.invariance_residual())


def _value_at_origin(theta):
    if isinstance(theta, TaylorCoefficients):
        return theta.coefficient((0,) * theta.n)
    if isinstance(theta, SampledOperatorFunction):
        hit = np.flatnonzero(np.all(theta.points == 0, axis=1))
        if hit.size == 0:
            raise ShapeMismatch("sampled function has no sample at the origin")
        return theta.values[hit[0]]
    return np.asarray(theta, dtype=complex)


def is_purely_contractive(theta, tol=DEFAULT_TOL) -> bool:
    """``|phi(0) eta| < |eta|`` for all ``eta != 0``, via ``lambda_max < 1 - tol``."""
    C0 = _value_at_origin(theta)
    if C0.shape[1] == 0:
        return True
    return bool(np.linalg.eigvalsh(C0.conj().T @ C0)[-1] < 1 - tol)


def is_inner(theta: TaylorCoefficients, N: int, tol=1e-9):
    """Projection test for ``P_N M_theta``: ``(M M^*)^2 = M M^*``.

    Returns ``(flag, residual)``.
    """
    dom = build_space(theta.n, N, theta.dom)
    cod = build_space(theta.n, N, theta.codom)
    M = multiplier_matrix(theta.truncated(N), dom, cod)
    P = M @ M.conj().T
    res = maxabs(P @ P - P)
    return res <= tol, res


def compress_shift(space: TruncatedFockSpace, C: Subspace) -> np.ndarray:
    """``C^* S_i C`` for the shifts ``S_i``; ``C`` spans a co-invariant subspace."""
    B = C.basis
    return np.array([B.conj().T @ S @ B for S in shift_matrices(space)])


def inner_from_invariant(Y: InvariantSubspace, tol=None, cert_tol=CERT_TOL):
    """Purely contractive inner ``phi`` and pure tuple ``T`` with ``Ran M_phi = Y``.

    ``T`` is the compression of the shift to ``Y^perp``, ``phi = tau theta_T``
    where the isometry ``tau: D_{T*} -> E`` matches ``D_{T*} h`` with the
    constant coefficient of ``h`` (their Gram matrices agree because
    ``sum S_i S_i^* = I - P_constants``).  Certifies ``P_Y = M_phi M_phi^*``.

    For ``Y = {0}`` the zero function on a zero-dimensional domain is returned
    together with the compressed shift on the whole space.
    """
    tol = Y.basis.tol if tol is None else tol
    sp = Y.space
    X = reducing_part(Y, tol)
    if X.dim:
        raise HasReducingPart(f"subspace contains H^2 (x) X with dim X = {X.dim}", dim=X.dim)
    C = orthogonal_complement(Y.basis)
    T = validate(compress_shift(sp, C), tol)
    if Y.dim == 0:
        zero = TaylorCoefficients(sp.n, 0, sp.coeff_dim, {(0,) * sp.n: np.zeros((sp.coeff_dim, 0))})
        return zero, T
    dd = defects(T)
    theta = theta_taylor(T, dd, sp.N, validate=False)
    A = dd.basis_DTstar.basis.conj().T @ dd.D_Tstar
    B = constant_embedding(sp, (0,) * sp.n).conj().T @ C.basis
    tau = isometry_from_gram(A, B, max(tol, cert_tol))
    phi = theta.left_multiply(tau)
    dom = build_space(sp.n, sp.N, phi.dom)
    M = multiplier_matrix(phi, dom, sp)
    res = maxabs(Y.projector() - M @ M.conj().T)
    if res > cert_tol:
        raise CertificationFailure(f"P_Y - M_phi M_phi^* = {res:.3e}", residual=res)
    return phi, T


def sample_taylor(theta: TaylorCoefficients, points) -> SampledOperatorFunction:
    return sample_function(theta, points, theta.dom, theta.codom)


def tuple_from_inner(theta: TaylorCoefficients, N: int, tol=DEFAULT_TOL, grid=None, cert_tol=CERT_TOL, seed=0):
    """Compression of the shift to ``(Ran M_theta)^perp`` in ``H^2_N(E_*)``.

    ``theta`` must be inner at degree ``N``.  When the complement is
    ``{0}`` (for example a constant unitary) the degenerate tuple on a
    zero-dimensional space is returned.  Otherwise ``theta`` must be purely
    contractive and the result is certified by weak coincidence of ``theta``
    and ``theta_T`` on ``grid``.
    """
    ok, res = is_inner(theta, N)
    if not ok:
        raise NotInner(f"(M M^*)^2 - M M^* = {res:.3e}", residual=res)
    N_space = multiplier_range(theta, N, tol)
    C = orthogonal_complement(N_space.basis)
    if C.dim == 0:
        return OperatorTuple(np.zeros((theta.n, 0, 0), dtype=complex), tol)
    if not is_purely_contractive(theta, tol):
        raise NotPurelyContractive("theta(0) has a unit-norm direction")
    T = validate(compress_shift(N_space.space, C), tol)
    pts = ball_grid(theta.n, seed=seed) if grid is None else np.asarray(grid, dtype=complex)
    dd = defects(T)
    F = sample_taylor(theta, pts)
    G = sample_function(lambda z: eval_theta(T, dd, z), pts, dd.rank, dd.rank_star)
    try:
        decide_weak_coincidence(F, G, cert_tol, seed)
    except NoSolution as exc:
        raise CertificationFailure(f"theta and theta_T do not coincide weakly: {exc}", **exc.details) from exc
    return T
