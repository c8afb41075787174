"""Sampled operator-valued functions, supports and coincidence deciders.

Two functions ``F: B_n -> L(E, E_*)`` and ``G: B_n -> L(F, F_*)`` coincide
weakly when a unitary ``tau_*: E_* -> F_*`` satisfies
``G(w) G(z)^* = tau_* F(w) F(z)^* tau_*^*`` for all ``z, w``; they coincide
when in addition a unitary ``tau: E -> F`` gives ``G(z) tau = tau_* F(z)``.
Both are decided on the finite sample grid the functions carry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySamples, GridMismatch, NoSolution, ShapeMismatch
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    isometry_from_gram,
    maxabs,
    orthogonal_complement,
    polar_unitary,
    range_basis,
)

# relative singular-value cut for the linear intertwiner system
_NULL_CUT = 1e-7


@dataclass(frozen=True)
class SampledOperatorFunction:
    """Samples ``values[i] = F(points[i])`` of shape ``codomain_dim x domain_dim``."""

    points: np.ndarray
    values: np.ndarray
    domain_dim: int
    codomain_dim: int

    def __post_init__(self):
        P = np.asarray(self.points, dtype=complex)
        V = np.asarray(self.values, dtype=complex)
        if P.ndim != 2:
            raise ShapeMismatch(f"points must be (m, n), got {P.shape}")
        shape = (P.shape[0], self.codomain_dim, self.domain_dim)
        if V.size != int(np.prod(shape)) or (V.ndim == 3 and V.shape != shape):
            raise ShapeMismatch(f"values have shape {V.shape}, expected {shape}")
        V = V.reshape(shape).copy()
        P = P.copy()
        P.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "values", V)
        if P.shape[0] > 1:
            diff = P[:, None, :] - P[None, :, :]
            dist = np.linalg.norm(diff, axis=2) + np.eye(P.shape[0])
            if np.min(dist) == 0:
                raise ShapeMismatch("sample points must be pairwise distinct")

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def stacked(self) -> np.ndarray:
        """``[F(z_1); ...; F(z_m)]`` of shape ``(m * codom, dom)``."""
        return self.values.reshape(self.m * self.codomain_dim, self.domain_dim)

    def map_values(self, left=None, right=None) -> "SampledOperatorFunction":
        """``z -> left F(z) right``."""
        V = self.values
        if left is not None:
            V = np.einsum("ab,ibc->iac", np.asarray(left), V)
        if right is not None:
            V = np.einsum("iab,bc->iac", V, np.asarray(right))
        return SampledOperatorFunction(self.points, V, V.shape[2], V.shape[1])


@dataclass(frozen=True)
class CoincidenceWitness:
    """``tau_*`` (codomain unitary), ``tau`` (domain unitary, strong only)."""

    tau_star: np.ndarray
    tau: np.ndarray | None
    kind: str
    residual: float

    def to_dict(self):
        out = {"kind": self.kind, "residual": self.residual, "tau_star": _mat(self.tau_star)}
        if self.tau is not None:
            out["tau"] = _mat(self.tau)
        return out


def _mat(M):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(M)]


def constant_function(M, points) -> SampledOperatorFunction:
    M = np.asarray(M, dtype=complex)
    P = np.asarray(points, dtype=complex)
    return SampledOperatorFunction(P, np.broadcast_to(M, (P.shape[0],) + M.shape), M.shape[1], M.shape[0])


def support(F: SampledOperatorFunction, tol=DEFAULT_TOL) -> Subspace:
    """Span of the ranges of ``F(z_i)^*`` in the domain."""
    if F.m == 0:
        raise EmptySamples("support needs at least one sample")
    return range_basis(F.stacked().conj().T, tol)


def _check_grids(F, G):
    if F.points.shape != G.points.shape or maxabs(F.points - G.points) > 0:
        raise GridMismatch("sample grids differ")
    if F.m == 0:
        raise EmptySamples("no samples")


def _gram_family(F: SampledOperatorFunction) -> np.ndarray:
    """Rows ``vec(F(z_i) F(z_j)^*)`` for all ordered pairs."""
    S = F.stacked()
    K = (S @ S.conj().T).reshape(F.m, F.codomain_dim, F.m, F.codomain_dim)
    return K.transpose(0, 2, 1, 3).reshape(F.m * F.m, -1)


def _scale(F, G):
    return max(1.0, maxabs(F.values) ** 2, maxabs(G.values) ** 2)


def weak_residual(F, G, tau_star) -> float:
    """``max |G(w) G(z)^* - tau_* F(w) F(z)^* tau_*^*|`` over all sample pairs."""
    SF = np.einsum("ab,ibc->iac", tau_star, F.values).reshape(F.m * G.codomain_dim, -1)
    SG = G.stacked()
    return maxabs(SG @ SG.conj().T - SF @ SF.conj().T)


def decide_weak_coincidence(F, G, tol=DEFAULT_TOL, seed=0) -> CoincidenceWitness:
    """Find a unitary ``tau_*`` with ``K_G(w, z) = tau_* K_F(w, z) tau_*^*``.

    The equation is linear after multiplying by ``tau_*`` on the right:
    ``tau_* K_F = K_G tau_*`` over the span of all sample pairs.  Its solution
    space is ``tau_0`` times the commutant of the self-adjoint family
    ``{K_F}``, a ``*``-algebra, so the polar factor of any invertible solution
    is again a solution.  The orthogonal projection of the identity onto the
    solution space is tried first, a seeded random element second.

    The result is accepted when the weak residual is at most
    ``tol * max(1, max|F|^2, max|G|^2)``.
    """
    _check_grids(F, G)
    c = F.codomain_dim
    if G.codomain_dim != c:
        raise NoSolution(
            f"codomain dimensions differ: {c} vs {G.codomain_dim}",
            reason="WeakFailure",
            residual=float("inf"),
        )
    if c == 0:
        return CoincidenceWitness(np.zeros((0, 0), dtype=complex), None, "weak", 0.0)
    bound = tol * _scale(F, G)
    joint = np.hstack([_gram_family(F), _gram_family(G)])
    _, s, Vh = np.linalg.svd(joint, full_matrices=False)
    keep = s > _NULL_CUT * s[0] if s.size and s[0] > 0 else np.zeros(0, bool)
    eye = np.eye(c)
    rows = []
    for v in Vh[keep]:
        # rows of ``joint`` are row-major vecs and span the same space as Vh
        CF = v[: c * c].reshape(c, c)
        CG = v[c * c :].reshape(c, c)
        # column-major vec: vec(X C) = (C^T kron I) vec X, vec(C X) = (I kron C) vec X
        rows.append(np.kron(CF.T, eye) - np.kron(eye, CG))
    if rows:
        system = np.vstack(rows)
        _, s2, Vh2 = np.linalg.svd(system)
        cut = _NULL_CUT * max(s2[0], 1.0)
        rank = int(np.sum(s2 > cut))
        null = Vh2[rank:].conj().T
    else:
        null = np.eye(c * c, dtype=complex)
    if null.shape[1] == 0:
        raise NoSolution("no intertwiner of the Gram families", reason="WeakFailure", residual=float("inf"))

    rng = np.random.default_rng(seed)
    vec_id = eye.reshape(-1, order="F")
    candidates = [null @ (null.conj().T @ vec_id)]
    for _ in range(3):
        coef = rng.standard_normal(null.shape[1]) + 1j * rng.standard_normal(null.shape[1])
        candidates.append(null @ coef)
    best = None
    for vec in candidates:
        X = vec.reshape(c, c, order="F")
        sv = np.linalg.svd(X, compute_uv=False)
        if sv[-1] <= 1e-8 * max(sv[0], 1e-300):
            continue
        tau_star = polar_unitary(X)
        res = weak_residual(F, G, tau_star)
        if best is None or res < best[1]:
            best = (tau_star, res)
        if res <= bound:
            return CoincidenceWitness(tau_star, None, "weak", res)
    res = float("inf") if best is None else best[1]
    raise NoSolution(f"weak residual {res:.3e} exceeds {bound:.3e}", reason="WeakFailure", residual=res)


def decide_coincidence(F, G, tol=DEFAULT_TOL, seed=0) -> CoincidenceWitness:
    """Strong coincidence: weak coincidence plus matching support complements.

    The domain unitary is fixed on the support by
    ``U(F(z)^* tau_*^* x) = G(z)^* x`` and extended by a deterministic
    orthonormal completion between the support complements.
    """
    weak = decide_weak_coincidence(F, G, tol, seed)
    ts = weak.tau_star
    A = F.map_values(left=ts).stacked().conj().T
    B = G.stacked().conj().T
    scale = _scale(F, G)
    try:
        U = isometry_from_gram(A, B, tol * scale)
    except NoSolution as exc:
        raise NoSolution(str(exc), reason="WeakFailure", **exc.details) from exc
    sF = range_basis(A, tol)
    sG = range_basis(B, tol)
    cF = orthogonal_complement(sF)
    cG = orthogonal_complement(sG)
    if cF.dim != cG.dim:
        raise NoSolution(
            f"support complements have dimensions {cF.dim} vs {cG.dim}",
            reason="ComplementMismatch",
            complement_dims=[cF.dim, cG.dim],
        )
    tau = U + cG.basis @ cF.basis.conj().T
    res = max(weak.residual, maxabs(G.values @ tau - np.einsum("ab,ibc->iac", ts, F.values)))
    if res > tol * scale * 10:
        raise NoSolution(f"strong residual {res:.3e}", reason="StrongFailure", residual=res)
    return CoincidenceWitness(ts, tau, "strong", res)


def sample_function(fn, points, domain_dim, codomain_dim) -> SampledOperatorFunction:
    P = np.asarray(points, dtype=complex)
    vals = np.array([fn(z) for z in P], dtype=complex).reshape(P.shape[0], codomain_dim, domain_dim)
    return SampledOperatorFunction(P, vals, domain_dim, codomain_dim)


def sample_theta(T, points, dd=None) -> SampledOperatorFunction:
    """``theta_T`` on a grid, in defect-basis coordinates."""
    from .charfn import eval_theta
    from .tuples import defects

    dd = defects(T) if dd is None else dd
    return sample_function(lambda z: eval_theta(T, dd, z), points, dd.rank, dd.rank_star)
