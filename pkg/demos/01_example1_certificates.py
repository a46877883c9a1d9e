"""
Stability certificates for the two-plant example
================================================

Two plants share one channel. Plant 1 is scheduled with probability 0.6,
plant 2 with 0.4, and every packet is dropped with probability 0.3.
"""

import numpy as np

from ncs_sched.config import load_example
from ncs_sched.model import check_assumption
from ncs_sched.stability import analyze_ncs

cfg = load_example(1)
model = cfg.model

# each plant is open-loop unstable and has a Schur closed loop
for plant in model.plants:
    rep = check_assumption(plant)
    print(f"plant {plant.index}: rho(A) = {rep.open_loop_radius:.4f}, A+BK Schur: {rep.closed_loop_schur}")

# closed-loop probability is p_j (1 - q); stability is decided by the
# spectral radius of the second-moment operator
analysis = analyze_ncs(model)
for pv in analysis.plants:
    print(f"plant {pv.plant}: pi_s = {pv.probs.pi_s:.2f}, radius = {pv.radius:.6f}, stable = {pv.stable}")

# the certificate solves both coupled Lyapunov inequalities with residual -I
cert = analysis[2].certificate
np.set_printoptions(precision=4, suppress=True)
print("P_s =\n", cert.P_s)
print("P_u =\n", cert.P_u)
print("residual_s =\n", cert.residual_s)
