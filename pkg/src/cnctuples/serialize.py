"""JSON and CSV formats.

Complex entries are ``[re, im]`` pairs.  Formats, by top-level keys:

* tuple: ``{"n", "d", "tol", "matrices"}`` with ``matrices[i][row][col]``
* Taylor coefficients: ``{"n", "dom", "codom", "coeffs": [{"k", "matrix"}]}``
* invariant subspace: ``{"n", "N", "coeff_dim", "basis"}`` with an
  orthonormal ``dim x k`` basis matrix
* sampled function CSV: ``sample, re_z1.., im_z1.., row, col, re, im``
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .errors import ParseError
from .fockspace import TaylorCoefficients, build_space, multi_indices
from .linalg import DEFAULT_TOL, Subspace
from .tuples import validate


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in M]


def decode_matrix(data, shape=None) -> np.ndarray:
    try:
        A = np.asarray(data, dtype=float)
        if A.size == 0 and shape is not None:
            return np.zeros(shape, dtype=complex)
        if A.ndim != 3 or A.shape[2] != 2:
            raise ValueError(f"expected rows of [re, im] pairs, got array of shape {A.shape}")
        M = A[..., 0] + 1j * A[..., 1]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad matrix: {exc}") from exc
    if shape is not None and M.shape != tuple(shape):
        raise ParseError(f"matrix has shape {M.shape}, expected {tuple(shape)}")
    return M


def _finite(obj):
    # strict JSON has no inf/nan; spell them as strings
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_finite(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def tuple_to_dict(T) -> dict:
    return {"n": T.n, "d": T.d, "tol": T.tol, "matrices": [encode_matrix(Ti) for Ti in T]}


def tuple_from_dict(obj, tol=None):
    try:
        n, d = int(obj["n"]), int(obj["d"])
        mats = obj["matrices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"tuple JSON needs n, d, matrices: {exc}") from exc
    if len(mats) != n:
        raise ParseError(f"expected {n} matrices, got {len(mats)}")
    arr = np.array([decode_matrix(m, (d, d)) for m in mats])
    tol = float(obj.get("tol", DEFAULT_TOL)) if tol is None else tol
    return validate(arr, tol)


def taylor_to_dict(theta: TaylorCoefficients) -> dict:
    order = {k: i for i, k in enumerate(multi_indices(theta.n, theta.max_degree))}
    items = sorted(theta.coeffs.items(), key=lambda kv: order[kv[0]])
    return {
        "n": theta.n,
        "dom": theta.dom,
        "codom": theta.codom,
        "coeffs": [{"k": list(k), "matrix": encode_matrix(C)} for k, C in items],
    }


def taylor_from_dict(obj) -> TaylorCoefficients:
    try:
        n, dom, codom = int(obj["n"]), int(obj["dom"]), int(obj["codom"])
        coeffs = {tuple(int(x) for x in c["k"]): decode_matrix(c["matrix"], (codom, dom)) for c in obj["coeffs"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"Taylor JSON needs n, dom, codom, coeffs: {exc}") from exc
    return TaylorCoefficients(n, dom, codom, coeffs)


def subspace_to_dict(Y) -> dict:
    sp = Y.space
    return {"n": sp.n, "N": sp.N, "coeff_dim": sp.coeff_dim, "basis": encode_matrix(Y.basis.basis)}


def subspace_from_dict(obj, tol=DEFAULT_TOL):
    from .beurling import InvariantSubspace

    try:
        sp = build_space(int(obj["n"]), int(obj["N"]), int(obj["coeff_dim"]))
        raw = obj["basis"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"subspace JSON needs n, N, coeff_dim, basis: {exc}") from exc
    B = decode_matrix(raw) if len(raw) and len(raw[0]) else np.zeros((sp.dim, 0), dtype=complex)
    if B.shape[0] != sp.dim:
        raise ParseError(f"basis has {B.shape[0]} rows, space has dimension {sp.dim}")
    if np.max(np.abs(B.conj().T @ B - np.eye(B.shape[1])), initial=0.0) > 1e-8:
        raise ParseError("basis columns are not orthonormal")
    return InvariantSubspace(sp, Subspace(sp.dim, B, tol))


def detect_kind(obj) -> str:
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON must be an object")
    if "matrices" in obj:
        return "tuple"
    if "coeffs" in obj:
        return "taylor"
    if "basis" in obj:
        return "subspace"
    raise ParseError(f"unrecognized JSON keys {sorted(obj)}")


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def sampled_to_csv(F) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = F.n
    w.writerow(["sample"] + [f"re_z{i + 1}" for i in range(n)] + [f"im_z{i + 1}" for i in range(n)] + ["row", "col", "re", "im"])
    for s, (z, M) in enumerate(zip(F.points, F.values)):
        head = [s] + [repr(float(x)) for x in z.real] + [repr(float(x)) for x in z.imag]
        for r in range(M.shape[0]):
            for c in range(M.shape[1]):
                w.writerow(head + [r, c, repr(float(M[r, c].real)), repr(float(M[r, c].imag))])
    return buf.getvalue()


def sampled_from_csv(text, domain_dim, codomain_dim):
    from .coincidence import SampledOperatorFunction

    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError("empty CSV")
    header = rows[0]
    n = sum(1 for h in header if h.startswith("re_z"))
    pts, vals = {}, {}
    for row in rows[1:]:
        s = int(row[0])
        pts[s] = np.array([float(x) for x in row[1 : 1 + n]]) + 1j * np.array([float(x) for x in row[1 + n : 1 + 2 * n]])
        M = vals.setdefault(s, np.zeros((codomain_dim, domain_dim), dtype=complex))
        M[int(row[1 + 2 * n]), int(row[2 + 2 * n])] = float(row[3 + 2 * n]) + 1j * float(row[4 + 2 * n])
    keys = sorted(pts)
    return SampledOperatorFunction(np.array([pts[k] for k in keys]), np.array([vals[k] for k in keys]), domain_dim, codomain_dim)
