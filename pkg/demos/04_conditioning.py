# Conditioning maps.  G0's base and platform anchors are scaled copies of
# each other, so the level platform is a parallel singularity everywhere.

import math

import numpy as np

from kneepkm import Pose, jacobian, orientation_sweep, reference_geometry

g0 = reference_geometry("G0")
g1 = reference_geometry("G1")

for geom in (g0, g1):
    rep = jacobian(geom, Pose(0.0, 1.0, 0.0, 0.0))
    print(f"{geom.name} level platform: sigma_min {rep.sigma_min:.2e}, singular={rep.singular}")

# G1 is only singular on the symmetric centre line; moving off it helps.
for x in (0.01, 0.1, 0.2):
    rep = jacobian(g1, Pose(x, 1.0, 0.0, 0.0))
    print(f"G1 x={x:.2f}: margin {rep.sigma_min / rep.sigma_max:.3e}")

# Tilting G0 away from theta=0 restores full rank.
for deg in (0.0, 1.0, 5.0, 15.0):
    rep = jacobian(g0, Pose.from_degrees(0.0, 1.0, deg, 0.0))
    print(f"G0 theta={deg:4.1f} deg: margin {rep.sigma_min / rep.sigma_max:.3e}")

# Which orientations are reachable at the home station.
omap = orientation_sweep(g1, 0.0, 1.0, (-0.6, 0.6), (-0.6, 0.6), 0.1)
print("\nG1 orientations at (0, 1.0), theta rows / psi columns")
for th, row in zip(omap.thetas, omap.feasible):
    print(f"{math.degrees(th):+6.1f} " + "".join("#" if f else "." for f in row))

# Inverse condition number along a pitch sweep.
thetas = np.linspace(-0.5, 0.5, 11)
inv = [1.0 / jacobian(g1, Pose(0.0, 1.0, float(t), 0.0)).kappa for t in thetas]
print("\nG1 1/kappa vs theta:", np.round(inv, 4))
