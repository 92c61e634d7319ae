# Sagittal workspace of both designs on the reference grid.

import numpy as np

from kneepkm import GridSpec, compare, reference_geometry, sweep

g0 = reference_geometry("G0")
g1 = reference_geometry("G1")

grid = GridSpec(-0.4, 0.4, 0.55, 1.25, 0.01)
report = compare(g0, g1, grid)

for label, m in (("G0", report.metrics_a), ("G1", report.metrics_b)):
    print(f"{label}: area {m.area:.4f} m^2, {m.x_extent:.2f} x {m.z_extent:.2f} m, "
          f"aspect {m.aspect:.3f}, gci {m.gci:.3g}")
print("ordering:", report.ordering.value)
print("area ratio G0/G1:", round(report.area_ratio, 3))

# Coarse ASCII picture of each map, z increasing upwards.
for label, wmap in (("G0", report.map_a), ("G1", report.map_b)):
    mask = wmap.feasible_mask()[::5, ::5]
    print(f"\n{label}")
    for row in mask.T[::-1]:
        print("".join("#" if f else "." for f in row))

# What stops the corners of a small grid.
small = sweep(g0, GridSpec(-0.2, 0.2, 0.8, 1.2, 0.2))
for c in small.cells:
    if not c.feasible:
        print(f"({c.x:+.1f}, {c.z:.1f}) -> {c.violation_code.value}, q0 = {c.q[0]:.4f}")

# Widening the central stroke opens the corners up.
wide = g0.with_strokes([[0.5, 1.3]] + [[0.6, 1.3]] * 3)
print("feasible after widening:", int(sweep(wide, small.grid).feasible_mask().sum()), "of 9")
