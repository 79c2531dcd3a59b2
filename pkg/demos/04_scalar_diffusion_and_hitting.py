"""The scalar reference diffusion and its boundary-hitting probabilities.

dZ = 2Z(1-Z^2) dt + sqrt(2)(1-Z^2) dB on [-1, 1].  The scale function
s(z) = z - z^3/3 is finite at the boundaries, so every path is absorbed at
+1 or -1; the absorption split is the polynomial (2 + 3z0 - z0^3)/4,
checked here against direct simulation.
"""

import os

import numpy as np

from rqf import hit_up_probability, scale, simulate_z, simulate_z_finals
from rqf._svg import line_chart

OUT = os.path.join(os.path.dirname(__file__) or ".", "demo_out")
os.makedirs(OUT, exist_ok=True)

reps, horizon, dt = 4000, 20.0, 1e-3
print("z0     closed form   Monte Carlo   3*stderr")
zs = [-0.75, -0.5, 0.0, 0.5, 0.75]
for i, z0 in enumerate(zs):
    p = hit_up_probability(z0)
    finals = simulate_z_finals(z0, horizon, dt, 40 + i, reps)
    p_hat = float(np.mean(finals >= 0.999))
    se = np.sqrt(p * (1 - p) / reps)
    print(f"{z0:+.2f}   {p:.5f}       {p_hat:.5f}       {3 * se:.5f}")

# a few sample paths and the scale function
paths = [simulate_z(0.0, 8.0, 1e-3, seed) for seed in (1, 2, 3, 4)]
series = [(p.times[::10], p.values[::10]) for p in paths]
svg = line_chart(series, title="scalar diffusion paths: absorption at the boundaries")
with open(os.path.join(OUT, "z_paths.svg"), "w") as fh:
    fh.write(svg)

grid = np.linspace(-1, 1, 201)
svg2 = line_chart([(grid, [scale(z) for z in grid])], title="scale function z - z^3/3")
with open(os.path.join(OUT, "scale_function.svg"), "w") as fh:
    fh.write(svg2)
print(f"wrote {OUT}/z_paths.svg and {OUT}/scale_function.svg")
