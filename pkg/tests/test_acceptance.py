"""Acceptance criteria, one test each, at their stated tolerances and time limits."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from cnctuples import corpus
from cnctuples.beurling import (
    InvariantSubspace,
    blh_decompose,
    multiplier_range,
    reducing_part,
    slice_subspace,
    tuple_from_inner,
)
from cnctuples.charfn import ball_grid, check_kernel_identity, check_theta_identity
from cnctuples.cli import main
from cnctuples.coincidence import constant_function, decide_coincidence, decide_weak_coincidence, sample_theta
from cnctuples.errors import NoSolution
from cnctuples.fockspace import build_space, check_dilation_identities, shift_matrices, theta_taylor
from cnctuples.linalg import Subspace, maxabs, range_basis
from cnctuples.mobius import MobiusMap, check_defect_identity, phi_a, verify_transformation_law
from cnctuples.model import build_model, equivalence_from_coincidence, model_intertwining_residual, model_tuple
from cnctuples.tuples import defects, validate

from conftest import ACCEPTANCE, FIXTURES, nilpotent_fixtures, random_point, scalar


@contextmanager
def criterion(num, name, limit=None):
    info = {}
    t0 = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        dt = time.perf_counter() - t0
        if ok and limit is not None and dt > limit:
            ok = False
            info["runtime"] = f"exceeded {limit} s"
        detail = ", ".join(f"{k} {v:.2e}" if isinstance(v, float) else f"{k} {v}" for k, v in info.items())
        ACCEPTANCE[num] = f"criterion {num} {name}: {'PASS' if ok else 'FAIL'} ({detail}; {dt:.1f} s)"
    assert dt <= (limit or np.inf), f"runtime {dt:.1f} s exceeds {limit} s"


def random_ball(rng, n):
    return random_point(rng, n, 0.95)


def mismatched_tuple(rng, n, d):
    """Commuting contraction with one spherical-unitary direction: rank D_{T*} = d - 1."""
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    inner = corpus.random_tuple(rng, n, d - 1, eps=0.3).mats
    mats = np.zeros((n, d, d), dtype=complex)
    for i in range(n):
        mats[i, 0, 0] = v[i]
        mats[i, 1:, 1:] = inner[i]
    return corpus.conjugate(validate(mats), corpus.random_unitary(rng, d))


def test_identity_suite():
    rng = np.random.default_rng(1)
    with criterion(1, "identity suite", limit=30) as info:
        worst = 0.0
        for t in range(100):
            n, d = 1 + t % 3, 1 + t % 6
            T = corpus.random_tuple(rng, n, d)
            dd = defects(T)
            for _ in range(20):
                z, w = random_ball(rng, n), random_ball(rng, n)
                worst = max(worst, check_theta_identity(T, z, w, dd), check_kernel_identity(T, z, w, dd))
        info["max residual"] = worst
        assert worst <= 1e-10


def test_mobius_suite():
    rng = np.random.default_rng(2)
    with criterion(2, "Mobius suite", limit=60) as info:
        defect = inv = law = 0.0
        for t in range(20):
            n, d = 1 + t % 3, 1 + t % 4
            T = corpus.random_tuple(rng, n, d)
            a = random_point(rng, n, 0.8)
            m = MobiusMap(a, corpus.random_unitary(rng, n))
            defect = max(defect, check_defect_identity(T, m))
            rep = verify_transformation_law(T, m, ball_grid(n, 24, seed=t))
            law = max(law, rep.residual)
        for _ in range(500):
            n = int(rng.integers(1, 4))
            m = MobiusMap(random_point(rng, n, 0.9))
            z = random_ball(rng, n)
            inv = max(inv, float(np.max(np.abs(phi_a(m, phi_a(m, z)) - z))))
        info.update({"defect identity": defect, "involution": inv, "transformation law": law})
        assert defect <= 1e-10 and inv <= 1e-12 and law <= 1e-9


def test_dilation_suite():
    with criterion(3, "dilation suite") as info:
        worst = 0.0
        for T in nilpotent_fixtures():
            N = corpus.nilpotency_order(T) + 1
            rep = check_dilation_identities(T, N)
            worst = max(worst, rep.res33, rep.res34)
        res = {N: check_dilation_identities(scalar(0.5), N).res33 for N in (10, 20, 40)}
        info["nilpotent residual"] = worst
        info.update({f"res33(N={N})": v for N, v in res.items()})
        assert worst <= 1e-10
        # exact value is 4^-(N+1); geometric envelope plus the float floor
        for N, v in res.items():
            assert v <= 4.0 ** -(N + 1) * (1 + 1e-6) + 1e-15
        assert res[20] < res[10]


def test_model_suite():
    with criterion(4, "model suite") as info:
        vv = r35 = tw = 0.0
        grid = ball_grid(3, 32)
        for T in nilpotent_fixtures():
            ms = build_model(T, corpus.nilpotency_order(T) + 1, grid[:, : T.n])
            model_tuple(ms)
            vv = max(vv, ms.residuals["resVVUU"])
            r35 = max(r35, ms.residuals["res35"])
            tw = max(tw, model_intertwining_residual(ms))
        info.update({"VV*+UU*": vv, "r*Delta": r35, "intertwining": tw})
        assert max(vv, r35, tw) <= 1e-8


def test_invariant_round_trips():
    rng = np.random.default_rng(5)
    with criterion(5, "invariant round trips") as info:
        worst = 0.0
        for t in range(20):
            n, d = 1 + t % 3, 2 + t % 3
            T = corpus.random_tuple(rng, n, d)
            R = corpus.conjugate(T, corpus.random_unitary(rng, d))
            pts = ball_grid(n, 32, seed=t)
            w = decide_coincidence(sample_theta(T, pts), sample_theta(R, pts))
            U = equivalence_from_coincidence(T, R, w, pts)
            worst = max(worst, max(maxabs(U @ Ri - Ti @ U) for Ri, Ti in zip(R, T)))
        refuted = 0
        for t in range(20):
            n, d = 1 + t % 3, 2 + t % 3
            T = corpus.random_tuple(rng, n, d)
            R = mismatched_tuple(rng, n, d)
            pts = ball_grid(n, 32, seed=t)
            try:
                decide_coincidence(sample_theta(T, pts), sample_theta(R, pts))
            except NoSolution:
                refuted += 1
        # weak implies strong among c.n.c. corpus tuples, all ordered pairs of equal length
        pool = nilpotent_fixtures() + [corpus.random_tuple(rng, 1 + k % 3, 2 + k % 2) for k in range(6)]
        pool += [corpus.conjugate(T, corpus.random_unitary(rng, T.d)) for T in pool]
        weak = upgraded = 0
        for T in pool:
            for R in pool:
                if T.n != R.n:
                    continue
                pts = ball_grid(T.n, 32)
                F, G = sample_theta(T, pts), sample_theta(R, pts)
                try:
                    decide_weak_coincidence(F, G)
                except NoSolution:
                    continue
                weak += 1
                decide_coincidence(F, G)
                upgraded += 1
        info.update({"intertwining": worst, "refuted": f"{refuted}/20", "weak upgraded": f"{upgraded}/{weak}"})
        assert worst <= 1e-8 and refuted == 20 and upgraded == weak > 0


def test_blh_suite():
    rng = np.random.default_rng(6)
    with criterion(6, "BLH suite") as info:
        planted = 0.0
        for n, k in [(1, 1), (2, 1), (2, 2), (3, 2)]:
            sp = build_space(n, 3, 3)
            A = rng.standard_normal((3, k)) + 1j * rng.standard_normal((3, k))
            L = range_basis(A)
            X = reducing_part(InvariantSubspace(sp, slice_subspace(sp, L)))
            planted = max(planted, maxabs(X.projector() - L.projector()))

        comp = 0.0
        for t in range(10):
            n, N = 1 + t % 2, 4
            S = corpus.nilpotent_tuple(rng, n, 2)
            theta0 = theta_taylor(S, None, N).left_multiply(np.eye(3)[:, 1:])
            sp = build_space(n, N, 3)
            X0 = Subspace(3, np.eye(3)[:, :1])
            Y0 = multiplier_range(theta0, N)
            M = InvariantSubspace(sp, Subspace(sp.dim, np.hstack([slice_subspace(sp, X0).basis, Y0.basis.basis])))
            dec = blh_decompose(M)
            comp = max(comp, maxabs(dec.X.projector() - X0.projector()), maxabs(dec.Y.projector() - Y0.projector()), dec.residual)

        # pure tuples resolved exactly at degree N: nilpotency order <= N
        shift = build_space(2, 2, 1)
        pure = nilpotent_fixtures() + [
            corpus.jordan_block(3, 0.8),
            corpus.zero_tuple(2, 2),
            validate(shift_matrices(shift)),
        ]
        cor = 0
        for T in pure:
            N = corpus.nilpotency_order(T) + 1
            cor += reducing_part(multiplier_range(theta_taylor(T, None, N), N)).dim

        trip = 0.0
        for S in nilpotent_fixtures():
            N = corpus.nilpotency_order(S) + 3
            pts = ball_grid(S.n, 32)
            T = tuple_from_inner(theta_taylor(S, None, N), N, grid=pts)
            w = decide_coincidence(sample_theta(S, pts), sample_theta(T, pts))
            U = equivalence_from_coincidence(S, T, w, pts)
            trip = max(trip, max(maxabs(U @ Ti - Si @ U) for Si, Ti in zip(S, T)))
        info.update({"planted": planted, "composite": comp, "reducing dims": cor, "round trip": trip})
        assert planted <= 1e-9 and comp <= 1e-9 and cor == 0 and trip <= 1e-8


def test_weak_strong_separation():
    with criterion(7, "weak vs strong separation") as info:
        pts = ball_grid(2, 16)
        phi = constant_function(np.eye(2), pts)
        psi = constant_function(np.hstack([np.zeros((2, 2)), np.eye(2)]), pts)
        w = decide_weak_coincidence(phi, psi)
        info["weak residual"] = w.residual
        with pytest.raises(NoSolution) as exc:
            decide_coincidence(phi, psi)
        info["strong"] = exc.value.detail
        assert exc.value.detail == "ComplementMismatch"


def test_cli_determinism(tmp_path):
    nil = str(FIXTURES / "nilpotent_n2_d3.json")
    conj = str(FIXTURES / "nilpotent_n2_d3_conj.json")
    commands = [
        ["report", nil],
        ["sample-theta", nil],
        ["taylor", nil],
        ["verify", "--mode", "identities", nil],
        ["verify", "--mode", "mobius", nil],
        ["verify", "--mode", "coincide", nil, conj],
        ["verify", "--mode", "model", nil],
        ["verify", "--mode", "blh", nil],
    ]
    with criterion(8, "CLI determinism") as info:
        same = 0
        for i, argv in enumerate(commands):
            a, b = tmp_path / f"{i}a", tmp_path / f"{i}b"
            main(argv + ["--seed", "3", "--out", str(a)])
            main(argv + ["--seed", "3", "--out", str(b)])
            same += a.read_bytes() == b.read_bytes()
        info["identical"] = f"{same}/{len(commands)}"
        assert same == len(commands)
