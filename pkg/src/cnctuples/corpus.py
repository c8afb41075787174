"""Seeded test tuples.

Commuting tuples are built as polynomials in one random matrix ``G`` and
then rescaled so that ``lambda_max(sum T_i T_i^*) = 1 - eps``; both tuple
invariants hold by construction.  Jointly nilpotent tuples use a strictly
upper triangular ``G`` conjugated by a random unitary and polynomials
without constant term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, maxabs
from .tuples import OperatorTuple, classify, row_gram, validate


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, d) -> np.ndarray:
    Q, R = np.linalg.qr(_complex_normal(rng, (d, d)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _rescale(mats, eps, tol):
    lam = float(np.linalg.eigvalsh(row_gram(OperatorTuple(mats)))[-1])
    if lam == 0:
        return validate(mats, tol)
    return validate(mats * np.sqrt((1 - eps) / lam), tol)


def _poly_family(rng, G, n, constant):
    d = G.shape[0]
    I = np.eye(d)
    mats = []
    for _ in range(n):
        c = _complex_normal(rng, 3)
        if not constant:
            c[0] = 0
        mats.append(c[0] * I + c[1] * G + c[2] * G @ G / max(1.0, np.linalg.norm(G, 2)))
    return np.array(mats)


def random_tuple(rng, n, d, eps=0.05, tol=DEFAULT_TOL) -> OperatorTuple:
    """Commuting strict row contraction with ``lambda_max = 1 - eps``."""
    G = _complex_normal(rng, (d, d))
    return _rescale(_poly_family(rng, G, n, constant=True), eps, tol)


def nilpotent_tuple(rng, n, d, eps=0.1, tol=DEFAULT_TOL) -> OperatorTuple:
    """Jointly nilpotent tuple: ``T^alpha = 0`` whenever ``|alpha| >= d``."""
    G = np.triu(_complex_normal(rng, (d, d)), 1)
    Q = random_unitary(rng, d)
    return _rescale(_poly_family(rng, Q @ G @ Q.conj().T, n, constant=False), eps, tol)


def nilpotency_order(T: OperatorTuple, tol=1e-12, max_order=None) -> int:
    """Smallest ``p`` with ``T^alpha = 0`` for all ``|alpha| = p`` (0 if none found)."""
    max_order = T.d + 1 if max_order is None else max_order
    level = [np.eye(T.d, dtype=complex)]
    for p in range(1, max_order + 1):
        level = [Ti @ X for X in level for Ti in T]
        if max(maxabs(X) for X in level) <= tol:
            return p
    return 0


def zero_tuple(n, d, tol=DEFAULT_TOL) -> OperatorTuple:
    return validate(np.zeros((n, d, d)), tol)


def jordan_block(d, scale=1.0, tol=DEFAULT_TOL) -> OperatorTuple:
    return validate(scale * np.eye(d, k=1)[None], tol)


def coordinate_pair(tol=DEFAULT_TOL) -> OperatorTuple:
    """``(diag(1, 0), diag(0, 1))``: commuting, coisometric, spherical isometry."""
    return validate(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]), tol)


def conjugate(T: OperatorTuple, Q) -> OperatorTuple:
    return validate(T.conjugate_by(Q).mats, T.tol)


@dataclass(frozen=True)
class SearchResult:
    trials: int
    found: list
    max_cnc_A_norm: float


def search_cnc_nonpure(rng, trials=200, n_choices=(1, 2), d_max=4, tol=DEFAULT_TOL) -> SearchResult:
    """Randomized search for c.n.c. tuples with ``|A_T| > 10 tol``.

    Candidates are drawn at the contractive boundary (``eps = 0``) and as
    direct sums of a contraction with a unitary-diagonal block, conjugated by
    a random similarity and rescaled, which is where non-pure tuples live.
    Each hit would carry its own certificate; ``max_cnc_A_norm`` records the
    largest ``|A_T|`` seen among c.n.c. candidates.
    """
    found = []
    best = 0.0
    for t in range(trials):
        n = n_choices[t % len(n_choices)]
        d = 2 + t % (d_max - 1)
        if t % 2 == 0:
            T = random_tuple(rng, n, d, eps=0.0, tol=tol)
        else:
            k = 1 + t % (d - 1)
            phases = np.exp(2j * np.pi * rng.random(k))
            G = np.zeros((d, d), dtype=complex)
            G[:k, :k] = np.diag(phases)
            G[k:, k:] = 0.5 * _complex_normal(rng, (d - k, d - k))
            S = np.eye(d) + 0.3 * _complex_normal(rng, (d, d))
            G = S @ G @ np.linalg.inv(S)
            T = _rescale(_poly_family(rng, G, n, constant=False), 0.0, tol)
        rep = classify(T)
        if rep.is_cnc:
            a = float(np.linalg.norm(rep.A_T, 2))
            best = max(best, a)
            if a > 10 * tol:
                found.append({"tuple": T, "A_T_norm": a, "iterations": rep.iterations_to_converge})
    return SearchResult(trials, found, best)
