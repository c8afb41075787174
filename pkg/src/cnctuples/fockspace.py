"""Degree-truncated Drury-Arveson spaces ``H^2_n(E)``.

Polynomials of total degree ``<= N`` with coefficients in ``E = C^c`` are
stored in the orthonormal basis ``sqrt(gamma_k) z^k (x) e_j``, where
``gamma_k = |k|! / k!``.  Vector index ``pos(k) * c + j``; multi-indices are
ordered by degree and, inside a degree, lexicographically descending, so for
``n = 2`` the order starts ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.

In this basis the shifts, multipliers and the dilation map are plain
matrices and every adjoint is a conjugate transpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .errors import OracleMismatch, ShapeMismatch, SizeOverflow
from .linalg import DEFAULT_TOL, maxabs
from .tuples import DefectData, OperatorTuple, defects, limit_AT

DIM_CAP = 20000


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> tuple:
    if parts == 1:
        return ((total,),)
    out = []
    for first in range(total, -1, -1):
        out.extend((first,) + rest for rest in _compositions(total - first, parts - 1))
    return tuple(out)


def multi_indices(n: int, N: int) -> list:
    """All ``k in N^n`` with ``|k| <= N`` in graded descending-lex order."""
    return [k for deg in range(N + 1) for k in _compositions(deg, n)]


def gamma(k) -> int:
    """Multinomial weight ``|k|! / (k_1! ... k_n!)``."""
    g = factorial(sum(k))
    for ki in k:
        g //= factorial(ki)
    return g


def unit(n: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def add(k, l) -> tuple:
    return tuple(a + b for a, b in zip(k, l))


def sub(k, l):
    """``k - l`` or ``None`` when some entry would be negative."""
    d = tuple(a - b for a, b in zip(k, l))
    return d if min(d, default=0) >= 0 else None


def monomial(z, k) -> complex:
    return complex(np.prod([zi**ki for zi, ki in zip(z, k)]))


@dataclass(frozen=True)
class TruncatedFockSpace:
    n: int
    N: int
    coeff_dim: int
    indices: tuple = field(init=False, repr=False)
    position: dict = field(init=False, repr=False, compare=False)
    gammas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = tuple(multi_indices(self.n, self.N))
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "position", {k: p for p, k in enumerate(idx)})
        g = np.array([gamma(k) for k in idx], dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "gammas", g)

    @property
    def num_monomials(self) -> int:
        return len(self.indices)

    @property
    def dim(self) -> int:
        return self.num_monomials * self.coeff_dim

    def block(self, k) -> slice:
        p = self.position[tuple(k)] * self.coeff_dim
        return slice(p, p + self.coeff_dim)

    def degree_mask(self, max_degree: int) -> np.ndarray:
        """Boolean mask of basis vectors of total degree ``<= max_degree``."""
        deg = np.array([sum(k) for k in self.indices])
        return np.repeat(deg <= max_degree, self.coeff_dim)

    def with_coeff_dim(self, c: int) -> "TruncatedFockSpace":
        return build_space(self.n, self.N, c)

    def to_dict(self):
        return {"n": self.n, "N": self.N, "coeff_dim": self.coeff_dim}

    def kernel_vector(self, z, x=None) -> np.ndarray:
        """Coordinates of ``k_N(., z) (x) x``, the degree-``N`` slice of the kernel.

        With ``x`` omitted returns the ``dim x coeff_dim`` matrix whose columns
        are the slices for the standard basis of ``E``.
        """
        w = np.array([np.sqrt(g) * np.conj(monomial(z, k)) for k, g in zip(self.indices, self.gammas)])
        K = np.kron(w[:, None], np.eye(self.coeff_dim))
        return K if x is None else K @ np.asarray(x, dtype=complex)

    def evaluate(self, f, z) -> np.ndarray:
        """Value at ``z`` of the polynomial with orthonormal coordinates ``f``."""
        return self.kernel_vector(z).conj().T @ np.asarray(f, dtype=complex)


def build_space(n: int, N: int, coeff_dim: int, cap: int = DIM_CAP) -> TruncatedFockSpace:
    if n < 1 or N < 0 or coeff_dim < 0:
        raise ShapeMismatch(f"invalid space parameters n={n}, N={N}, coeff_dim={coeff_dim}")
    dim = comb(N + n, n) * coeff_dim
    if dim > cap:
        raise SizeOverflow(f"ambient dimension {dim} exceeds cap {cap}", dim=dim, cap=cap)
    return TruncatedFockSpace(n, N, coeff_dim)


def shift_matrices(space: TruncatedFockSpace) -> np.ndarray:
    """``M_{z_i} (x) I_E`` compressed to degrees ``<= N``, shape ``(n, dim, dim)``."""
    m = space.num_monomials
    S = np.zeros((space.n, m, m))
    for p, k in enumerate(space.indices):
        if sum(k) == space.N:
            continue
        for i in range(space.n):
            kp = add(k, unit(space.n, i))
            q = space.position[kp]
            S[i, q, p] = np.sqrt(space.gammas[p] / space.gammas[q])
    eye = np.eye(space.coeff_dim)
    return np.array([np.kron(Si, eye) for Si in S], dtype=complex)


@dataclass(frozen=True)
class TaylorCoefficients:
    """Polynomial ``sum_k C_k z^k`` with ``codom x dom`` coefficient matrices."""

    n: int
    dom: int
    codom: int
    coeffs: dict

    def __post_init__(self):
        clean = {}
        for k, C in self.coeffs.items():
            k = tuple(int(x) for x in k)
            C = np.asarray(C, dtype=complex)
            if len(k) != self.n or C.shape != (self.codom, self.dom):
                raise ShapeMismatch(f"coefficient {k} has shape {C.shape}, expected {(self.codom, self.dom)}")
            clean[k] = C
        object.__setattr__(self, "coeffs", clean)

    @property
    def max_degree(self) -> int:
        return max((sum(k) for k in self.coeffs), default=0)

    def coefficient(self, k) -> np.ndarray:
        C = self.coeffs.get(tuple(k))
        return np.zeros((self.codom, self.dom), dtype=complex) if C is None else C

    def __call__(self, z) -> np.ndarray:
        out = np.zeros((self.codom, self.dom), dtype=complex)
        for k, C in self.coeffs.items():
            out += monomial(z, k) * C
        return out

    def truncated(self, N: int) -> "TaylorCoefficients":
        return TaylorCoefficients(self.n, self.dom, self.codom, {k: C for k, C in self.coeffs.items() if sum(k) <= N})

    def left_multiply(self, M) -> "TaylorCoefficients":
        M = np.asarray(M, dtype=complex)
        return TaylorCoefficients(self.n, self.dom, M.shape[0], {k: M @ C for k, C in self.coeffs.items()})

    def right_multiply(self, M) -> "TaylorCoefficients":
        M = np.asarray(M, dtype=complex)
        return TaylorCoefficients(self.n, M.shape[1], self.codom, {k: C @ M for k, C in self.coeffs.items()})


def constant_multiplier(n: int, M) -> TaylorCoefficients:
    M = np.asarray(M, dtype=complex)
    return TaylorCoefficients(n, M.shape[1], M.shape[0], {(0,) * n: M})


def _adjoint_powers(T: OperatorTuple, dd: DefectData, max_degree: int) -> dict:
    """``coords(D_{T*} T^{*alpha})`` for ``|alpha| <= max_degree``."""
    Bs = dd.basis_DTstar.basis
    adj = T.adjoints()
    out = {(0,) * T.n: Bs.conj().T @ dd.D_Tstar}
    for k in multi_indices(T.n, max_degree):
        if sum(k) == 0:
            continue
        i = next(j for j, kj in enumerate(k) if kj > 0)
        prev = sub(k, unit(T.n, i))
        out[k] = out[prev] @ adj[i]
    return out


def theta_taylor(T: OperatorTuple, dd: DefectData | None = None, max_degree: int = 8, validate=True, seed=0):
    """Taylor coefficients of ``theta_T`` up to total degree ``max_degree``.

    ``C_0 = -T`` and, for ``|b| >= 1``,
    ``C_b = sum_{j: b_j >= 1} gamma_{b - e_j} D_{T*} T^{*(b - e_j)} Pi_j D_T``
    where ``Pi_j`` picks the ``j``-th block of ``C^{nd}``; all in defect
    coordinates.  The Neumann tail of degree ``m`` is bounded by ``|z|^m``,
    so the truncation is checked against :func:`eval_theta` at 16 seeded
    points with the bound ``10 tol + |z|^{N+1} / (1 - |z|)``.
    """
    from .charfn import ball_grid, eval_theta

    dd = defects(T) if dd is None else dd
    n, d = T.n, T.d
    B, Bs = dd.basis_DT.basis, dd.basis_DTstar.basis
    r, rs = B.shape[1], Bs.shape[1]
    pw = _adjoint_powers(T, dd, max(max_degree - 1, 0))
    DB = dd.D_T @ B
    blocks = [DB[j * d : (j + 1) * d] for j in range(n)]
    coeffs = {(0,) * n: -Bs.conj().T @ T.row() @ B}
    for k in multi_indices(n, max_degree):
        if sum(k) == 0:
            continue
        C = np.zeros((rs, r), dtype=complex)
        for j in range(n):
            prev = sub(k, unit(n, j))
            if prev is not None:
                C += gamma(prev) * pw[prev] @ blocks[j]
        coeffs[k] = C
    theta = TaylorCoefficients(n, r, rs, coeffs)
    if validate and r and rs:
        pts = ball_grid(n, 16, 0.6, seed=seed + 7919, include_origin=False)
        for z in pts:
            rz = float(np.linalg.norm(z))
            bound = 10 * T.tol + rz ** (max_degree + 1) / (1 - rz)
            err = float(np.linalg.norm(theta(z) - eval_theta(T, dd, z), 2))
            if err > bound:
                raise OracleMismatch(f"Taylor truncation off by {err:.3e} > {bound:.3e}", residual=err, bound=bound)
    return theta


def multiplier_matrix(theta: TaylorCoefficients, dom_space: TruncatedFockSpace, codom_space: TruncatedFockSpace):
    """``P_N M_theta`` restricted to polynomials of degree ``<= N``.

    The block from ``sqrt(gamma_l) z^l`` to ``sqrt(gamma_k) z^k`` is
    ``sqrt(gamma_l / gamma_k) C_{k - l}``.
    """
    if dom_space.n != codom_space.n or dom_space.N != codom_space.N or theta.n != dom_space.n:
        raise ShapeMismatch("spaces must share n and N with theta")
    if theta.dom != dom_space.coeff_dim or theta.codom != codom_space.coeff_dim:
        raise ShapeMismatch(
            f"theta is {theta.codom}x{theta.dom}, spaces carry {codom_space.coeff_dim} and {dom_space.coeff_dim}"
        )
    M = np.zeros((codom_space.dim, dom_space.dim), dtype=complex)
    g = codom_space.gammas
    for q, k in enumerate(codom_space.indices):
        for p, l in enumerate(dom_space.indices):
            diff = sub(k, l)
            if diff is None or diff not in theta.coeffs:
                continue
            M[codom_space.block(k), dom_space.block(l)] = np.sqrt(g[p] / g[q]) * theta.coeffs[diff]
    return M


def dilation_j(T: OperatorTuple, dd: DefectData | None, space: TruncatedFockSpace) -> np.ndarray:
    """``j h = sum_alpha gamma_alpha (D_{T*} T^{*alpha} h) z^alpha``, degrees ``<= N``.

    The ``alpha`` block in orthonormal coordinates is
    ``sqrt(gamma_alpha) coords(D_{T*} T^{*alpha})``.  The adjoint ``L = j^*``
    satisfies ``L(p (x) xi) = p(T) D_{T*} xi``.
    """
    dd = defects(T) if dd is None else dd
    if space.n != T.n or space.coeff_dim != dd.rank_star:
        raise ShapeMismatch(f"space must have n={T.n} and coeff_dim={dd.rank_star}")
    pw = _adjoint_powers(T, dd, space.N)
    return np.vstack([np.sqrt(g) * pw[k] for k, g in zip(space.indices, space.gammas)]).reshape(space.dim, T.d)


@dataclass(frozen=True)
class DilationReport:
    res33: float
    res34: float
    N: int
    iterations: int
    exact_degree: int

    def to_dict(self):
        return {
            "res33": self.res33,
            "res34": self.res34,
            "N": self.N,
            "limit_iterations": self.iterations,
            "res34_block_degree": self.exact_degree,
        }


def check_dilation_identities(T: OperatorTuple, N: int, dd: DefectData | None = None, cap=DIM_CAP):
    """Residuals of ``L L^* + A_T = I`` and ``L^* L + M_theta M_theta^* = I``.

    ``theta`` is truncated at degree ``N`` and ``M_theta`` compressed to the
    degree-``N`` slice.  Compression kills exactly the terms that would leave
    the slice, and ``L^* L`` is the slice of the kernel ``(1 - <w,z>)^{-1}
    k_T(w)^* k_T(z)`` expansion, so the second identity holds on the whole
    slice for every tuple; the first one carries the truncation tail
    ``P_T^{N+1}(I) - A_T``.  ``A_T`` is iterated until it stops moving at
    machine precision.
    """
    dd = defects(T) if dd is None else dd
    space = build_space(T.n, N, dd.rank_star, cap)
    dom = build_space(T.n, N, dd.rank, cap)
    j = dilation_j(T, dd, space)
    A, its = limit_AT(T, tol=0.0, rtol=1e-14)
    res33 = maxabs(j.conj().T @ j + A - np.eye(T.d))
    theta = theta_taylor(T, dd, N, validate=False)
    M = multiplier_matrix(theta, dom, space)
    res34 = maxabs(j @ j.conj().T + M @ M.conj().T - np.eye(space.dim))
    return DilationReport(res33, res34, N, its, N)
