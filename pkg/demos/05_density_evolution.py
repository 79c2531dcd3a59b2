"""Fokker-Planck evolution of the scalar diffusion's density.

A conservative finite-volume scheme advances the cell masses of
dp/dt = -d/dz(2z(1-z^2) p) + d^2/dz^2((1-z^2)^2 p) from a near-delta
start.  Mass is conserved to roundoff and drains into the boundary cells,
matching a large batch of simulated paths.
"""

import os

import numpy as np

from rqf import DensityGrid, fokker_planck_evolve, l1_density_distance, simulate_z_finals
from rqf._svg import line_chart

OUT = os.path.join(os.path.dirname(__file__) or ".", "demo_out")
os.makedirs(OUT, exist_ok=True)

cells = 401
series = []
grid = DensityGrid.delta(0.0, cells)
for t_slice in (0.1, 0.2, 0.2):  # cumulative: densities at t = 0.1, 0.3, 0.5
    grid = fokker_planck_evolve(grid, t_slice)
    interior = slice(4, cells - 4)  # omit the boundary spikes for the plot
    series.append((grid.centers[interior], grid.density()[interior]))
print(f"mass drift after evolving to t=0.5: {abs(grid.masses.sum() - 1.0):.2e}")
print(f"mass within 0.01 of the boundaries: {grid.masses[np.abs(grid.centers) > 0.99].sum():.3f}")

samples = simulate_z_finals(0.0, 0.5, 2.5e-4, 103, 50_000)
print(f"L1 distance to a 5e4-path histogram at t=0.5: {l1_density_distance(grid, samples):.4f}")

svg = line_chart(series, title="interior density at t = 0.1, 0.3, 0.5 (mass drains to +-1)")
with open(os.path.join(OUT, "density_evolution.svg"), "w") as fh:
    fh.write(svg)
print(f"wrote {OUT}/density_evolution.svg")
