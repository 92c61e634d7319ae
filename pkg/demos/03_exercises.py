# Rehabilitation and diagnosis trajectories checked against G0.

import math

from kneepkm import (check_feasibility, gen_cpm_flexion, gen_gait, gen_lachman,
                     gen_pivot_shift, reference_geometry)

g0 = reference_geometry("G0")

trajectories = {
    "gait": gen_gait(),
    "lachman": gen_lachman(),
    "pivot shift": gen_pivot_shift(),
    "cpm flexion": gen_cpm_flexion(),
}
for name, traj in trajectories.items():
    rep = check_feasibility(g0, traj)
    print(f"{name:12s} feasible={rep.all_feasible!s:5s} max |dq/dt| {rep.max_abs_q_rate:.3f} m/s, "
          f"max kappa {rep.max_kappa:.3g}")

# A much wider stride runs into the actuator rate limit.
rep = check_feasibility(g0, gen_gait(A_x=0.5))
i = rep.first_infeasible_index
s = rep.samples[i]
print(f"\nwide gait: first bad sample {i} at t={s.t:.2f} s, "
      f"rate {max(abs(s.q_rate)):.3f} > {rep.rate_limit} m/s")

# Slowing the same stride down brings it back under the limit.
slow = check_feasibility(g0, gen_gait(A_x=0.5, period=4.0))
print("same stride over 4 s:", slow.all_feasible or f"still fails at {slow.first_infeasible_index}")

# The Lachman test is a small-amplitude shuttle at fixed pitch.
lach = gen_lachman(theta_fix=math.radians(20.0), amplitude=0.05)
print("lachman 20 deg, 5 cm:", check_feasibility(g0, lach).all_feasible)
