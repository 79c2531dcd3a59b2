"""One-point motion: a Brownian motion on the sphere, at half clock speed.

Both flows here are spherical Brownian motions, but the symmetrized matrix
noise carries Var(dQ_ij) = dt/2 off the diagonal, so its quadratic
variation is P/2 dt against P dt for the vector-noise motion.  The mean
inner product with the start decays as exp(-(n-1)t/4) for the matrix-noise
flow and exp(-(n-1)t/2) for the vector-noise one; matching laws requires
the factor-2 time change.
"""

import os

import numpy as np

from rqf import batch_finals, ks_critical_value, ks_two_sample
from rqf._svg import line_chart

OUT = os.path.join(os.path.dirname(__file__) or ".", "demo_out")
os.makedirs(OUT, exist_ok=True)

x0 = np.array([1.0, 0.0, 0.0])
reps, dt = 3000, 1e-3
times = [0.25, 0.5, 1.0, 1.5, 2.0]

snap_q = batch_finals(x0[None, :], times[-1], dt, 11, reps, checkpoints=times)
snap_w = batch_finals(x0[None, :], times[-1], dt, 12, reps, sigma_q=0.0, sigma_w=1.0,
                      checkpoints=times)
mean_q = [float((s[:, 0] @ x0).mean()) for s in snap_q]
mean_w = [float((s[:, 0] @ x0).mean()) for s in snap_w]

print("t      matrix-noise   exp(-t/2)   vector-noise   exp(-t)")
for t, mq, mw in zip(times, mean_q, mean_w):
    print(f"{t:4.2f}   {mq: .4f}       {np.exp(-t/2): .4f}     {mw: .4f}       {np.exp(-t): .4f}")

# same law after slowing the clock by two
q_at_1 = snap_q[2][:, 0] @ x0   # t = 1.0
w_at_05 = snap_w[1][:, 0] @ x0  # t = 0.5
stat, p = ks_two_sample(q_at_1, w_at_05)
print(f"\nKS matrix-noise(t=1) vs vector-noise(t=1/2): {stat:.4f} "
      f"(1% critical {ks_critical_value(reps, reps):.4f}, p={p:.2f})")

svg = line_chart(
    [(times, mean_q), (times, np.exp(-np.asarray(times) / 2)),
     (times, mean_w), (times, np.exp(-np.asarray(times)))],
    title="mean inner product with the start: measured vs exp(-t/2), exp(-t)",
)
with open(os.path.join(OUT, "one_point_decay.svg"), "w") as fh:
    fh.write(svg)
print(f"wrote {OUT}/one_point_decay.svg")
