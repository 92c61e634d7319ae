# Inverse and forward kinematics on the two reference designs.

import numpy as np

from kneepkm import Pose, fk, ik, jacobian, reference_geometry

g0 = reference_geometry("G0")
g1 = reference_geometry("G1")

# A mildly pitched and rotated pose (angles in radians).
pose = Pose.from_degrees(0.05, 1.0, 10.0, 5.0)

for geom in (g0, g1):
    sol = ik(geom, pose)
    print(geom.name, geom.architecture.value)
    print("  actuators q      :", np.round(sol.q, 6))
    print("  central limb phi :", round(sol.phi_central, 6))
    print("  violations       :", [v.kind.value for v in sol.violations] or "none")

# Forward kinematics needs a starting guess.  A guess near the target
# converges in a handful of Newton steps.
q = ik(g1, pose).q
guess = Pose(0.04, 0.98, 0.15, 0.1)
back = fk(g1, q, guess)
print("\nFK recovered:", np.round(back.as_array(), 9))
print("error       :", np.abs(back.as_array() - pose.as_array()).max())

# The central limb only ever sees the distance to the platform centre.
for th, ps in [(0.0, 0.0), (0.3, -0.2), (-0.5, 0.4)]:
    print("central q at (0.1, 0.9):", ik(g0, Pose(0.1, 0.9, th, ps)).q[0])

# Conditioning of the same pose on both designs.
for geom in (g0, g1):
    rep = jacobian(geom, pose)
    print(f"{geom.name}: sigma_min {rep.sigma_min:.3e}, kappa {rep.kappa:.3e}")
