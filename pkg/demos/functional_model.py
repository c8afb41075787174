"""Functional model and the complete unitary invariant.

A jointly nilpotent pair is realized on its model space, the model tuple is
compared with the original, and a hidden unitary conjugation is recovered
from coincidence of characteristic functions alone.  A partially
coisometric pair shows the invariant refuting equivalence.
"""

import numpy as np

from cnctuples import corpus
from cnctuples.charfn import ball_grid
from cnctuples.coincidence import decide_coincidence, sample_theta
from cnctuples.errors import NoSolution
from cnctuples.linalg import maxabs
from cnctuples.model import build_model, equivalence_from_coincidence, model_intertwining_residual, model_tuple
from cnctuples.tuples import validate

rng = np.random.default_rng(1)
T = corpus.nilpotent_tuple(rng, 2, 3)
N = corpus.nilpotency_order(T) + 1
pts = ball_grid(2, 32)

ms = build_model(T, N, pts)
M = model_tuple(ms)
print(f"model space dim {ms.H_T.dim} inside ambient dim {ms.ambient_dim}")
print(f"VV* + UU* = I residual {ms.residuals['resVVUU']:.1e}")
print(f"intertwining residual {model_intertwining_residual(ms):.1e}")

Q = corpus.random_unitary(rng, 3)
R = corpus.conjugate(T, Q)
w = decide_coincidence(sample_theta(T, pts), sample_theta(R, pts))
U = equivalence_from_coincidence(T, R, w, pts)
print(f"{w.kind} coincidence, recovered U with |U R_i - T_i U| = {max(maxabs(U @ Ri - Ti @ U) for Ri, Ti in zip(R, T)):.1e}")

# one spherical-unitary direction next to a strict contraction: rank D_{S*} = 2
S = np.zeros((2, 3, 3), dtype=complex)
S[:, 0, 0] = [0.6, 0.8]
S[:, 1:, 1:] = corpus.random_tuple(rng, 2, 2, eps=0.3).mats
try:
    decide_coincidence(sample_theta(T, pts), sample_theta(validate(S), pts))
except NoSolution as exc:
    print("refuted:", exc.reason, exc.detail)
