"""Shift-invariant subspaces of truncated vector-valued Drury-Arveson space.

Plants a reducing slice next to the range of an inner multiplier, splits the
sum back apart, and turns the inner part into a pure tuple whose
characteristic function reproduces it.
"""

import numpy as np

from cnctuples import corpus
from cnctuples.beurling import (
    InvariantSubspace,
    blh_decompose,
    inner_from_invariant,
    multiplier_range,
    slice_subspace,
)
from cnctuples.fockspace import build_space, theta_taylor
from cnctuples.linalg import Subspace, maxabs

rng = np.random.default_rng(2)
n, N = 2, 4
S = corpus.nilpotent_tuple(rng, n, 2)
theta0 = theta_taylor(S, None, N).left_multiply(np.eye(3)[:, 1:])

sp = build_space(n, N, 3)
X0 = Subspace(3, np.eye(3)[:, :1])
Y0 = multiplier_range(theta0, N)
M = InvariantSubspace(sp, Subspace(sp.dim, np.hstack([slice_subspace(sp, X0).basis, Y0.basis.basis])))
print(f"ambient dim {sp.dim}, invariant subspace dim {M.dim}, invariance residual {M.invariance_residual():.1e}")

dec = blh_decompose(M)
print(f"reducing part dim {dec.X.dim}, |P_X - P_X0| = {maxabs(dec.X.projector() - X0.projector()):.1e}")
print(f"remaining part dim {dec.Y.dim}, |P_Y - P_Y0| = {maxabs(dec.Y.projector() - Y0.projector()):.1e}")

phi, T = inner_from_invariant(dec.Y)
# the complement of Y also holds the reducing slice, so T carries a truncated shift block
print(f"inner multiplier {phi.codom}x{phi.dom}, compressed shift tuple on dimension {T.d}")
