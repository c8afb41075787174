"""Characteristic function of a commuting row contraction.

Builds a random commuting pair, classifies it, evaluates theta_T and checks
the kernel identity that ties theta_T to the defect operators, then moves
the pair by a ball automorphism and compares characteristic functions.
"""

import numpy as np

from cnctuples import corpus
from cnctuples.charfn import ball_grid, check_kernel_identity, check_theta_identity, eval_theta
from cnctuples.mobius import MobiusMap, verify_transformation_law
from cnctuples.tuples import classify, defects

rng = np.random.default_rng(0)
T = corpus.random_tuple(rng, 2, 3)
rep = classify(T)
print(f"pure={rep.is_pure} cnc={rep.is_cnc} defect ranks (D_T, D_T*) = {rep.defect_ranks}")

dd = defects(T)
z = np.array([0.3 + 0.1j, -0.2j])
print("theta_T(z) =\n", np.round(eval_theta(T, dd, z), 4))

pts = ball_grid(2, 16)
th = max(check_theta_identity(T, a, b, dd) for a in pts for b in pts)
ke = max(check_kernel_identity(T, a, b, dd) for a in pts for b in pts)
print(f"I - theta(w) theta(z)^* identity residual {th:.1e}, kernel identity residual {ke:.1e}")

m = MobiusMap(np.array([0.4, 0.2j]), corpus.random_unitary(rng, 2))
law = verify_transformation_law(T, m, pts)
print(f"theta_T o phi_a o u^* vs theta of u(T_a): residual {law.residual:.1e}")
