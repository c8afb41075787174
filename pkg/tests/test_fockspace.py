import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cnctuples import corpus
from cnctuples.charfn import eval_kT, eval_theta
from cnctuples.errors import ShapeMismatch, SizeOverflow
from cnctuples.fockspace import (
    TaylorCoefficients,
    build_space,
    check_dilation_identities,
    constant_multiplier,
    dilation_j,
    gamma,
    multi_indices,
    multiplier_matrix,
    shift_matrices,
    theta_taylor,
)
from cnctuples.linalg import maxabs
from cnctuples.tuples import defects, limit_AT

from conftest import nilpotent_fixtures, random_point, scalar


class TestSpace:
    def test_two_variables_degree_two(self):
        sp = build_space(2, 2, 1)
        assert sp.dim == 6
        assert sp.indices == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
        assert list(sp.gammas) == [1, 1, 1, 1, 2, 1]
        assert gamma((1, 1)) == 2

    def test_hardy(self):
        assert list(build_space(1, 3, 2).gammas) == [1, 1, 1, 1]

    def test_dimension(self):
        assert build_space(3, 1, 5).dim == 20

    def test_cap(self):
        with pytest.raises(SizeOverflow):
            build_space(4, 20, 2)
        assert build_space(4, 20, 2, cap=10**6).dim == 2 * 10626

    def test_gamma_multinomial(self):
        # Pascal recursion gamma_k = sum_i gamma_{k - e_i}
        for k in multi_indices(3, 4)[1:]:
            assert gamma(k) == sum(gamma(k[:i] + (k[i] - 1,) + k[i + 1 :]) for i in range(3) if k[i])

    def test_reproducing_property(self, rng):
        sp = build_space(2, 4, 2)
        # polynomial with raw Taylor coefficients a_k, orthonormal coords a_k / sqrt(gamma_k)
        a = {k: rng.standard_normal(2) + 1j * rng.standard_normal(2) for k in sp.indices}
        f = np.concatenate([a[k] / np.sqrt(gamma(k)) for k in sp.indices])
        z = random_point(rng, 2)
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        fz = sum(a[k] * z[0] ** k[0] * z[1] ** k[1] for k in sp.indices)
        assert abs(np.vdot(sp.kernel_vector(z, x), f) - np.vdot(x, fz)) < 1e-13
        assert maxabs(sp.evaluate(f, z) - fz) < 1e-13


class TestShifts:
    def test_jordan(self):
        S = shift_matrices(build_space(1, 4, 1))
        assert maxabs(S[0] - np.eye(5, k=-1)) == 0

    def test_degree_one(self):
        sp = build_space(2, 1, 1)
        S = shift_matrices(sp)
        e = np.eye(3)
        assert maxabs(S[0] @ e[0] - e[1]) == 0 and maxabs(S[1] @ e[0] - e[2]) == 0
        assert maxabs(S[0][:, 1:]) == 0 and maxabs(S[1][:, 1:]) == 0

    @settings(max_examples=15, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 5), st.integers(1, 2))
    def test_commuting_row_contraction(self, n, N, c):
        sp = build_space(n, N, c)
        S = shift_matrices(sp)
        for i in range(n):
            for j in range(n):
                assert maxabs(S[i] @ S[j] - S[j] @ S[i]) <= 1e-15
        G = sum(Si @ Si.conj().T for Si in S)
        assert np.linalg.eigvalsh(G)[-1] <= 1 + 1e-12
        # I - sum S S^* below the top degree is the projection onto constants
        low = sp.degree_mask(N - 1)
        P0 = np.zeros(sp.dim)
        P0[:c] = 1
        D = (np.eye(sp.dim) - G)[np.ix_(low, low)]
        assert maxabs(D - np.diag(P0[low])) <= 1e-14


class TestTaylor:
    def test_zero_tuple(self):
        T = corpus.zero_tuple(2, 1)
        dd = defects(T)
        th = theta_taylor(T, dd, 4)
        B, Bs = dd.basis_DT.basis, dd.basis_DTstar.basis
        assert maxabs(th.coefficient((0, 0))) == 0
        for j, k in enumerate([(1, 0), (0, 1)]):
            assert maxabs(th.coefficient(k) - Bs.conj().T @ np.eye(2)[j][None, :] @ B) < 1e-15
        assert all(maxabs(C) == 0 for k, C in th.coeffs.items() if sum(k) > 1)

    def test_scalar_series(self):
        T = scalar(0.5)
        dd = defects(T)
        ph = np.conj(dd.basis_DTstar.basis[0, 0]) * dd.basis_DT.basis[0, 0]
        th = theta_taylor(T, dd, 12)
        assert abs(th.coefficient((0,))[0, 0] + 0.5 * ph) < 1e-16
        for m in range(1, 13):
            assert abs(th.coefficient((m,))[0, 0] - 0.75 * 0.5 ** (m - 1) * ph) < 1e-15

    def test_nilpotent_terminates(self):
        for T in nilpotent_fixtures():
            th = theta_taylor(T, None, T.d + 3)
            assert all(maxabs(C) < 1e-12 for k, C in th.coeffs.items() if sum(k) > T.d)
            z = random_point(np.random.default_rng(0), T.n, 0.95)
            assert maxabs(th(z) - eval_theta(T, None, z)) < 1e-12

    def test_matches_pointwise(self, rng):
        T = corpus.random_tuple(rng, 2, 3, eps=0.3)
        th = theta_taylor(T, None, 30)
        z = random_point(rng, 2, 0.3)
        assert np.linalg.norm(th(z) - eval_theta(T, None, z), 2) <= 0.3**31 / 0.7 + 1e-12

    def test_operations(self, rng):
        th = theta_taylor(corpus.random_tuple(rng, 2, 2), None, 3)
        z = random_point(rng, 2)
        Q = corpus.random_unitary(rng, th.codom)
        assert maxabs(th.left_multiply(Q)(z) - Q @ th(z)) < 1e-14
        assert th.truncated(1).max_degree == 1


class TestMultiplier:
    def test_identity(self):
        sp = build_space(2, 3, 2)
        assert maxabs(multiplier_matrix(constant_multiplier(2, np.eye(2)), sp, sp) - np.eye(sp.dim)) == 0

    def test_constant_unitary(self, rng):
        sp = build_space(2, 2, 3)
        u = corpus.random_unitary(rng, 3)
        M = multiplier_matrix(constant_multiplier(2, u), sp, sp)
        assert maxabs(M - np.kron(np.eye(sp.num_monomials), u)) < 1e-15

    def test_z_is_shift(self):
        sp = build_space(1, 5, 1)
        th = TaylorCoefficients(1, 1, 1, {(1,): np.ones((1, 1))})
        assert maxabs(multiplier_matrix(th, sp, sp) - shift_matrices(sp)[0]) == 0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            multiplier_matrix(constant_multiplier(2, np.eye(2)), build_space(2, 2, 3), build_space(2, 2, 2))

    def test_module_map(self):
        for T in nilpotent_fixtures(4):
            N = T.d + 3
            dd = defects(T)
            dom, cod = build_space(T.n, N, dd.rank), build_space(T.n, N, dd.rank_star)
            M = multiplier_matrix(theta_taylor(T, dd, N), dom, cod)
            cols = dom.degree_mask(N - T.d - 1)
            for Sd, Sc in zip(shift_matrices(dom), shift_matrices(cod)):
                assert maxabs((M @ Sd - Sc @ M)[:, cols]) < 1e-13


class TestDilation:
    def test_scalar_zero(self):
        T = scalar(0.0)
        dd = defects(T)
        j = dilation_j(T, dd, build_space(1, 3, 1))
        assert abs((j.conj().T @ j)[0, 0] - 1) < 1e-15

    def test_unitary(self, rng):
        T = corpus.conjugate(corpus.coordinate_pair(), corpus.random_unitary(rng, 2))
        j = dilation_j(T, None, build_space(2, 3, 0))
        assert j.shape == (0, 2)

    def test_nilpotent_isometric(self):
        for T in nilpotent_fixtures():
            j = dilation_j(T, None, build_space(T.n, T.d, defects(T).rank_star))
            assert maxabs(j.conj().T @ j - np.eye(T.d)) <= 1e-12

    def test_intertwines(self):
        for T in nilpotent_fixtures(4):
            sp = build_space(T.n, 4, defects(T).rank_star)
            j = dilation_j(T, None, sp)
            rows = sp.degree_mask(sp.N - 1)
            for Ti, S in zip(T, shift_matrices(sp)):
                assert maxabs((j @ Ti.conj().T - S.conj().T @ j)[rows]) < 1e-14

    def test_kernel_functions(self, rng):
        for T in nilpotent_fixtures(4):
            dd = defects(T)
            sp = build_space(T.n, T.d, dd.rank_star)
            L = dilation_j(T, dd, sp).conj().T
            z = random_point(rng, T.n)
            assert maxabs(L @ sp.kernel_vector(z) - eval_kT(T, dd, z)) < 1e-13

    def test_nilpotent_identities(self):
        for T in nilpotent_fixtures():
            rep = check_dilation_identities(T, T.d + 1)
            assert rep.res33 <= 1e-10 and rep.res34 <= 1e-10

    def test_zero_tuple(self):
        for N in (1, 3):
            rep = check_dilation_identities(corpus.zero_tuple(2, 1), N)
            assert rep.res33 == 0 and rep.res34 <= 1e-15

    def test_scalar_decay(self):
        res = [check_dilation_identities(scalar(0.5), N).res33 for N in (10, 20, 40)]
        # P^{N+1}(I) = 4^{-(N+1)} up to rounding of the sum
        for N, r in zip((10, 20), res):
            assert r == pytest.approx(0.25 ** (N + 1), rel=1e-6)
        assert res[2] <= 0.25**41 + 4 * np.finfo(float).eps
        assert res[0] > res[1] >= res[2]

    def test_res34_exact_for_random(self, rng):
        rep = check_dilation_identities(corpus.random_tuple(rng, 2, 2), 5)
        assert rep.res34 <= 1e-12

    def test_limit_agrees(self):
        A, _ = limit_AT(scalar(0.5), tol=0.0, rtol=1e-14)
        assert A[0, 0] == 0
