"""Command line interface.

    cnctuples report TUPLE.json
    cnctuples sample-theta TUPLE.json
    cnctuples taylor TUPLE.json --degree 6
    cnctuples verify --mode {identities,mobius,coincide,model,blh} INPUT [INPUT]

Output goes to stdout unless ``--out`` is given.  Exit codes: 0 success,
1 refutation or failed certificate, 2 input error, 3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import serialize as io
from .beurling import blh_decompose, inner_from_invariant, is_inner, is_purely_contractive, tuple_from_inner
from .charfn import (
    DEFAULT_GRID,
    DEFAULT_RADIUS,
    ball_grid,
    check_kernel_identity,
    check_theta_identity,
)
from .coincidence import decide_coincidence, sample_theta
from .corpus import random_unitary
from .errors import CncError, InputError, SizeOverflow
from .fockspace import DIM_CAP, check_dilation_identities, theta_taylor
from .linalg import DEFAULT_TOL, maxabs
from .mobius import MobiusMap, check_defect_identity, verify_transformation_law
from .model import build_model, equivalence_from_coincidence, model_intertwining_residual, model_tuple, mv_form
from .tuples import classify, defects

MODES = ("identities", "mobius", "coincide", "model", "blh")


@dataclass(frozen=True)
class RunConfig:
    tol: float = DEFAULT_TOL
    grid_size: int = DEFAULT_GRID
    grid_radius: float = DEFAULT_RADIUS
    seed: int = 0
    truncation_N: int = 8
    dim_cap: int = DIM_CAP

    def __post_init__(self):
        if not 0 < self.grid_radius < 1:
            raise InputError(f"--radius must lie in (0, 1), got {self.grid_radius}")
        if not self.tol > 0:
            raise InputError(f"--tol must be positive, got {self.tol}")
        if self.truncation_N < 0 or self.grid_size < 0:
            raise InputError("--degree and --grid must be nonnegative")

    def grid(self, n):
        return ball_grid(n, self.grid_size, self.grid_radius, self.seed)


def _load_tuple(path, cfg):
    obj = io.load_json(path)
    if io.detect_kind(obj) != "tuple":
        raise InputError(f"{path} is not a tuple file")
    return io.tuple_from_dict(obj, cfg.tol)


def _pair_residuals(T, pts, limit=16):
    """Max identity residuals over all pairs of the first ``limit`` grid points."""
    dd = defects(T)
    sub = pts[:limit]
    th = max(check_theta_identity(T, z, w, dd) for z in sub for w in sub)
    ke = max(check_kernel_identity(T, z, w, dd) for z in sub for w in sub)
    return th, ke


def cmd_report(args, cfg):
    T = _load_tuple(args.inputs[0], cfg)
    rep = classify(T)
    dil = check_dilation_identities(T, cfg.truncation_N, cap=cfg.dim_cap)
    th, ke = _pair_residuals(T, cfg.grid(T.n))
    out = {
        "n": T.n,
        "d": T.d,
        "classification": rep.to_dict(),
        "dilation": dil.to_dict(),
        "identities": {"theta": th, "kernel": ke},
        "sub_blocks": {
            "res33": "whole space",
            "res34": f"polynomials of degree <= {cfg.truncation_N}",
            "identities": "all pairs of the first 16 grid points",
        },
        "config": _cfg_dict(cfg),
    }
    return 0, io.dumps(out)


def cmd_sample_theta(args, cfg):
    T = _load_tuple(args.inputs[0], cfg)
    return 0, io.sampled_to_csv(sample_theta(T, cfg.grid(T.n)))


def cmd_taylor(args, cfg):
    T = _load_tuple(args.inputs[0], cfg)
    theta = theta_taylor(T, None, cfg.truncation_N, seed=cfg.seed)
    return 0, io.dumps(io.taylor_to_dict(theta))


def _verify_identities(args, cfg):
    T = _load_tuple(args.inputs[0], cfg)
    th, ke = _pair_residuals(T, cfg.grid(T.n))
    dd = defects(T)
    R = T.row()
    res = {
        "theta_identity": th,
        "kernel_identity": ke,
        "defect_star": maxabs(dd.D_Tstar @ dd.D_Tstar + R @ R.conj().T - np.eye(T.d)),
        "defect": maxabs(dd.D_T @ dd.D_T + R.conj().T @ R - np.eye(T.n * T.d)),
        "intertwining": maxabs(R @ dd.D_T - dd.D_Tstar @ R),
    }
    return res, {}


def _mobius_for(n, cfg):
    rng = np.random.default_rng(cfg.seed)
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a *= 0.6 * rng.random() / np.linalg.norm(a)
    return MobiusMap(a, random_unitary(rng, n), cfg.tol)


def _verify_mobius(args, cfg):
    T = _load_tuple(args.inputs[0], cfg)
    m = _mobius_for(T.n, cfg)
    rep = verify_transformation_law(T, m, cfg.grid(T.n), cfg.tol, cfg.seed)
    res = {"defect_identity": check_defect_identity(T, m), **rep.to_dict()}
    return res, {"a": [[float(x.real), float(x.imag)] for x in m.a]}


def _verify_coincide(args, cfg):
    if len(args.inputs) != 2:
        raise InputError("mode coincide needs two tuple files")
    T = _load_tuple(args.inputs[0], cfg)
    R = _load_tuple(args.inputs[1], cfg)
    if T.n != R.n:
        raise InputError(f"tuples have different lengths {T.n} and {R.n}")
    pts = cfg.grid(T.n)
    w = decide_coincidence(sample_theta(T, pts), sample_theta(R, pts), cfg.tol, cfg.seed)
    extra = {"witness": w.to_dict()}
    res = {"coincidence": w.residual}
    if classify(T).is_cnc and classify(R).is_cnc:
        U = equivalence_from_coincidence(T, R, w, pts, cfg.tol, cfg.seed)
        res["intertwining"] = max(maxabs(U @ Ri - Ti @ U) for Ri, Ti in zip(R, T))
        extra["unitary"] = io.encode_matrix(U)
    return res, extra


def _verify_model(args, cfg):
    T = _load_tuple(args.inputs[0], cfg)
    ms = build_model(T, cfg.truncation_N, cfg.grid(T.n), cfg.seed, cap=cfg.dim_cap)
    model_tuple(ms)
    mv = mv_form(T, ms)
    res = {**ms.residuals, "intertwining": model_intertwining_residual(ms), **mv.residuals}
    return res, {"model_dim": ms.H_T.dim, "ran_delta_dim": ms.ran_delta.dim}


def _verify_blh(args, cfg):
    obj = io.load_json(args.inputs[0])
    kind = io.detect_kind(obj)
    N = cfg.truncation_N
    if kind == "subspace":
        M = io.subspace_from_dict(obj, cfg.tol)
        dec = blh_decompose(M)
        res = {"decomposition": dec.residual, "invariance": dec.invariance}
        extra = {"dim_X": dec.X.dim, "dim_Y": dec.Y.dim}
        phi, T = inner_from_invariant(dec.Y)
        extra["model_d"] = T.d
        return res, extra
    if kind == "taylor":
        theta = io.taylor_from_dict(obj)
        T = tuple_from_inner(theta, N, cfg.tol, cfg.grid(theta.n), seed=cfg.seed)
        return {}, {"d": T.d, "tuple": io.tuple_to_dict(T)}
    S = io.tuple_from_dict(obj, cfg.tol)
    theta = theta_taylor(S, None, N, seed=cfg.seed)
    ok, res_inner = is_inner(theta, N)
    pts = cfg.grid(S.n)
    T = tuple_from_inner(theta, N, cfg.tol, pts, seed=cfg.seed)
    w = decide_coincidence(sample_theta(S, pts), sample_theta(T, pts), cfg.tol, cfg.seed)
    U = equivalence_from_coincidence(S, T, w, pts, cfg.tol, cfg.seed)
    res = {"inner": res_inner, "intertwining": max(maxabs(U @ Ti - Si @ U) for Si, Ti in zip(S, T))}
    return res, {"purely_contractive": is_purely_contractive(theta, cfg.tol), "d": T.d}


_VERIFY = {
    "identities": _verify_identities,
    "mobius": _verify_mobius,
    "coincide": _verify_coincide,
    "model": _verify_model,
    "blh": _verify_blh,
}

# per-mode acceptance bounds, as multiples of --tol
_BOUND = {"identities": 1.0, "mobius": 1.0, "coincide": 10.0, "model": 10.0, "blh": 10.0}


def cmd_verify(args, cfg):
    res, extra = _VERIFY[args.mode](args, cfg)
    bound = _BOUND[args.mode] * cfg.tol
    ok = all(v <= bound for v in res.values())
    out = {"mode": args.mode, "ok": ok, "bound": bound, "residuals": res, **extra, "config": _cfg_dict(cfg)}
    if not ok:
        out["reason"] = "ResidualTooLarge"
    return (0 if ok else 1), io.dumps(out)


def _cfg_dict(cfg):
    return {
        "tol": cfg.tol,
        "grid": cfg.grid_size,
        "radius": cfg.grid_radius,
        "seed": cfg.seed,
        "degree": cfg.truncation_N,
    }


def build_parser():
    p = argparse.ArgumentParser(prog="cnctuples", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="quasi-random grid size (origin added)")
    common.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--degree", type=int, default=8, help="truncation degree N")
    common.add_argument("--dim-cap", type=int, default=DIM_CAP)
    common.add_argument("--out", help="write output to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)
    for name, nargs in (("report", 1), ("sample-theta", 1), ("taylor", 1)):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("inputs", nargs=nargs)
    sp = sub.add_parser("verify", parents=[common])
    sp.add_argument("--mode", choices=MODES, required=True)
    sp.add_argument("inputs", nargs="+")
    return p


_COMMANDS = {"report": cmd_report, "sample-theta": cmd_sample_theta, "taylor": cmd_taylor, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.tol, args.grid, args.radius, args.seed, args.degree, args.dim_cap)
        code, text = _COMMANDS[args.command](args, cfg)
    except CncError as exc:
        code = 3 if isinstance(exc, SizeOverflow) else 2 if isinstance(exc, InputError) else 1
        text = io.dumps({"ok": False, **exc.to_dict()})
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
