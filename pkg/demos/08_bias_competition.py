"""Quadratic noise vs linear bias: singleton against antipodal pair.

With only the linear (vector-noise) term the coupled pair collapses to a
single point; with only the quadratic (matrix-noise) term it settles on an
antipodal pair.  Sweeping the ratio sigma_w / sigma_q interpolates between
the two regimes; the scan reports cluster-count statistics without
claiming a critical value.
"""

import os

import numpy as np

from rqf import batch_finals
from rqf._svg import line_chart

OUT = os.path.join(os.path.dirname(__file__) or ".", "demo_out")
os.makedirs(OUT, exist_ok=True)

x0 = np.array([1.0, 0.0, 0.0])
y0 = np.array([0.0, 1.0, 0.0])
ratios = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0]
reps, horizon, dt = 400, 25.0, 5e-3

polar, antipolar = [], []
print("sigma_w/sigma_q   polar   antipolar   undecided")
for i, ratio in enumerate(ratios):
    fin = batch_finals(np.stack([x0, y0]), horizon, dt, 900 + i, reps,
                       sigma_q=1.0, sigma_w=ratio)
    inner = np.einsum("ri,ri->r", fin[:, 0], fin[:, 1])
    p = float(np.mean(inner > 0.995))
    a = float(np.mean(inner < -0.995))
    polar.append(p)
    antipolar.append(a)
    print(f"{ratio:13.2f}   {p:.3f}   {a:.3f}       {1 - p - a:.3f}")

svg = line_chart([(ratios, polar), (ratios, antipolar)],
                 title="polar vs antipolar terminal fraction across the bias sweep")
with open(os.path.join(OUT, "bias_competition.svg"), "w") as fh:
    fh.write(svg)
print(f"wrote {OUT}/bias_competition.svg")
