import numpy as np
import pytest

from cnctuples import corpus
from cnctuples.charfn import ball_grid
from cnctuples.coincidence import CoincidenceWitness, decide_coincidence, decide_weak_coincidence, sample_theta
from cnctuples.errors import NoSolution, NotCNC
from cnctuples.fockspace import build_space, shift_matrices
from cnctuples.linalg import maxabs
from cnctuples.model import (
    build_model,
    build_r,
    equivalence_from_coincidence,
    model_operators,
    model_tuple,
    mv_form,
)
from cnctuples.tuples import defects, validate

from conftest import nilpotent_fixtures, scalar


def grid(n):
    return ball_grid(n, 32)


class TestR:
    def test_pure_nilpotent_zero(self):
        for T in nilpotent_fixtures(4):
            rm = build_r(T, T.d + 1, grid(T.n))
            assert maxabs(rm.r) <= 1e-10
            assert rm.norm_residual <= 1e-10 and rm.rL_residual <= 1e-10

    def test_scalar_three_quarters(self):
        # every scalar strict contraction is pure: r vanishes up to the (9/16)^(N+1) tail
        rm = build_r(scalar(0.75), 40, grid(1))
        assert maxabs(rm.r) <= 1e-5
        assert rm.norm_residual <= 1e-9

    def test_rejects_non_cnc(self):
        with pytest.raises(NotCNC):
            build_r(validate(np.diag([1.0, 0.5])[None]), 4)

    def test_norm_split(self):
        for T in nilpotent_fixtures():
            ms = build_model(T, T.d + 1, grid(T.n))
            jh = ms.j
            rh = ms.r
            split = np.sum(np.abs(jh) ** 2, axis=0) + np.sum(np.abs(rh) ** 2, axis=0)
            assert np.max(np.abs(1 - split)) <= T.tol


class TestModel:
    def test_pure_nilpotent(self):
        for T in nilpotent_fixtures():
            ms = build_model(T, T.d + 1, grid(T.n))
            assert ms.H_T.dim == T.d
            assert ms.residuals["resVVUU"] <= 1e-8
            assert ms.residuals["res35"] <= 1e-8
            # second summand carries nothing of V when r = 0
            assert maxabs(ms.V[ms.space.dim :]) <= 1e-10

    def test_zero_tuple(self):
        ms = build_model(corpus.zero_tuple(2, 1), 3, grid(2))
        assert ms.H_T.dim == 1
        M = model_tuple(ms)
        assert maxabs(M.mats) <= 1e-12

    def test_intertwining_and_invariance(self):
        for T in nilpotent_fixtures():
            ms = build_model(T, T.d + 1, grid(T.n))
            ops = model_operators(ms)
            for op, Ti in zip(ops, T):
                assert maxabs(op @ ms.V - ms.V @ Ti.conj().T) <= 1e-8
                assert ms.H_T.contains(op @ ms.H_T.basis) <= 1e-8

    def test_model_tuple_equivalent(self):
        for T in nilpotent_fixtures(4):
            ms = build_model(T, T.d + 1, grid(T.n))
            M = model_tuple(ms)
            W = ms.V.conj().T @ ms.H_T.basis
            assert maxabs(W.conj().T @ W - np.eye(T.d)) <= 1e-10
            assert max(maxabs(W @ Mi @ W.conj().T - Ti) for Mi, Ti in zip(M, T)) <= 1e-8
            pts = grid(T.n)
            w = decide_coincidence(sample_theta(T, pts), sample_theta(M, pts))
            assert w.kind == "strong"

    def test_jordan_block(self):
        T = corpus.jordan_block(4, 0.9)
        ms = build_model(T, 5, grid(1))
        M = model_tuple(ms)
        # nilpotent spectra are ill-conditioned; compare characteristic polynomials
        assert maxabs(np.poly(M.mats[0]) - np.poly(T.mats[0])) <= 1e-10

    def test_compressed_shift(self):
        sp = build_space(2, 2, 1)
        S = validate(shift_matrices(sp))
        ms = build_model(S, 3, grid(2))
        M = model_tuple(ms)
        pts = grid(2)
        w = decide_coincidence(sample_theta(S, pts), sample_theta(M, pts))
        U = equivalence_from_coincidence(S, M, w, pts)
        assert max(maxabs(U @ Mi - Si @ U) for Mi, Si in zip(M, S)) <= 1e-8


class TestMV:
    def test_pure(self):
        for T in nilpotent_fixtures(4):
            ms = build_model(T, T.d + 1, grid(T.n))
            mv = mv_form(T, ms)
            assert mv.phi.shape[1] == 0
            assert mv.residuals["res_mv"] <= 1e-8
            assert mv.residuals["res_spherical"] <= 1e-8
            k = ms.ran_delta.dim
            assert mv.W.shape == (T.n, k, k)

    def test_cnc_equals_pure_in_finite_dimensions(self):
        # search over boundary tuples: c.n.c. never comes with A_T != 0
        res = corpus.search_cnc_nonpure(np.random.default_rng(3), trials=60)
        assert res.found == []
        assert res.max_cnc_A_norm <= 10 * 1e-9


class TestEquivalence:
    def test_identity(self, rng):
        T = corpus.random_tuple(rng, 2, 3)
        dd = defects(T)
        pts = grid(2)
        w = CoincidenceWitness(np.eye(dd.rank_star), None, "weak", 0.0)
        U = equivalence_from_coincidence(T, T, w, pts)
        assert maxabs(U - np.eye(3)) <= 1e-9

    def test_conjugated(self, rng):
        for n, d in [(1, 3), (2, 3), (3, 2)]:
            T = corpus.random_tuple(rng, n, d)
            Q = corpus.random_unitary(rng, d)
            R = corpus.conjugate(T, Q)
            pts = grid(n)
            w = decide_coincidence(sample_theta(T, pts), sample_theta(R, pts))
            U = equivalence_from_coincidence(T, R, w, pts)
            assert max(maxabs(U @ Ri - Ti @ U) for Ri, Ti in zip(R, T)) <= 1e-9
            # U = Q^* up to a global phase
            P = U @ Q
            assert maxabs(P - P[0, 0] * np.eye(d)) <= 1e-8

    def test_rank_mismatch_refuted(self, rng):
        T = corpus.random_tuple(rng, 2, 3)
        # a unit diagonal entry drops the rank of D_{R*} to 2
        R = validate(np.array([np.diag([1.0, 0.0, 0.0]), np.zeros((3, 3))]))
        pts = grid(2)
        assert defects(T).rank_star == 3 and defects(R).rank_star == 2
        with pytest.raises(NoSolution):
            decide_coincidence(sample_theta(T, pts), sample_theta(R, pts))

    def test_weak_upgrades_to_strong(self, rng):
        for T in nilpotent_fixtures(4):
            R = corpus.conjugate(T, corpus.random_unitary(rng, T.d))
            pts = grid(T.n)
            F, G = sample_theta(T, pts), sample_theta(R, pts)
            w = decide_weak_coincidence(F, G)
            equivalence_from_coincidence(T, R, w, pts)
            assert decide_coincidence(F, G).kind == "strong"
