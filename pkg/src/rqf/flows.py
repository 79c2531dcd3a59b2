"""Whole-trajectory and ensemble simulation of the sphere flows.

One noise realization is one :class:`~rqf.noise.NoisePath`; every member of
an ensemble consumes the same symmetrized increment at every step, so the
common-noise coupling is structural rather than something callers have to
get right.  Monte Carlo over realizations uses per-replicate substreams
(seed, replicate index) and advances whole chunks of replicates with
batched array arithmetic.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import noise
from .errors import NumericalError, ResourceCapError
from .geometry import fibonacci_sphere, random_unit_vector, unit_vector

__all__ = [
    "Ensemble",
    "PhaseTrajectory",
    "PullbackResult",
    "Trajectory",
    "batch_finals",
    "circle_angle",
    "phase_finals",
    "pullback_run",
    "simulate_bias",
    "simulate_coupled",
    "simulate_phase",
    "simulate_rqf",
    "sphere_grid",
]


@dataclass(frozen=True)
class Trajectory:
    """Uniformly spaced times (t_0 = 0) and the states visited."""

    times: np.ndarray
    states: np.ndarray  # (len(times), n)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class Ensemble:
    """Members advanced under one shared noise realization."""

    noise: noise.NoisePath | None
    members: list[Trajectory]

    @property
    def final_states(self) -> np.ndarray:
        return np.stack([m.states[-1] for m in self.members])


@dataclass(frozen=True)
class PhaseTrajectory:
    times: np.ndarray
    angles: np.ndarray  # wrapped to [0, 2*pi)

    @property
    def final(self) -> float:
        return float(self.angles[-1])


@dataclass(frozen=True)
class PullbackResult:
    final_states: np.ndarray
    summary: object  # a diagnostics.ClusterSummary


def _step_count(T: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if T < 0:
        raise ValueError("T must be >= 0")
    if T == 0:
        return 0
    if dt > T:
        raise ValueError(f"dt={dt} exceeds T={T}")
    return int(math.ceil(T / dt - 1e-9))


def _field(states: np.ndarray, dq: np.ndarray, dw, q_scale: float, w_scale: float) -> np.ndarray:
    # states (m, n), dq (n, n) symmetric, dw (n,) or None
    dqy = states @ dq
    s = np.einsum("mi,mi->m", states, dqy)
    f = q_scale * (dqy - s[:, None] * states)
    if w_scale != 0.0:
        f = f + w_scale * (dw[None, :] - (states @ dw)[:, None] * states)
    return f


def _advance(states: np.ndarray, path, q_scale: float, w_scale: float, record=None) -> float:
    """Heun-advance (m, n) ``states`` in place through ``path``; returns max defect."""
    max_defect = 0.0
    k = 0
    for db, dw_block in path.blocks():
        if not np.all(np.isfinite(db)) or (dw_block is not None and not np.all(np.isfinite(dw_block))):
            raise NumericalError("noise block contains non-finite entries")
        dq_block = noise.symmetrize(db)
        for j in range(len(dq_block)):
            dq = dq_block[j]
            dw = dw_block[j] if dw_block is not None else None
            f1 = _field(states, dq, dw, q_scale, w_scale)
            f2 = _field(states + f1, dq, dw, q_scale, w_scale)
            out = states + 0.5 * (f1 + f2)
            norms = np.sqrt(np.einsum("mi,mi->m", out, out))
            defect = float(np.max(np.abs(norms - 1.0)))
            if defect > max_defect:
                max_defect = defect
            states[...] = out / norms[:, None]
            k += 1
            if record is not None:
                record[k] = states
    return max_defect


def _resolve_path(path, seed, n, dt, steps, with_vector, stream):
    if path is None:
        return noise.generate_path(seed, n, dt, steps, with_vector=with_vector, stream=stream, materialize=False)
    if path.steps < steps:
        raise ValueError(f"supplied path has {path.steps} steps, need {steps}")
    if path.n != n:
        raise ValueError(f"supplied path has n={path.n}, states have n={n}")
    return path


def simulate_rqf(x0, T: float, dt: float, seed: int, *, sign: float = -1.0, stream: int = 0, path=None) -> Trajectory:
    """Quadratic-form flow dX = sign * P_X dQ X from x0 up to time T.

    Runs ceil(T/dt) Heun steps on the symmetrized increments of the
    (seed, stream) noise path; deterministic given the seed.
    """
    if sign not in (-1.0, 1.0, -1, 1):
        raise ValueError("sign must be +1 or -1")
    x0 = unit_vector(x0)
    steps = _step_count(T, dt)
    p = _resolve_path(path, seed, x0.size, dt, steps, False, stream)
    states = x0[None, :].copy()
    record = np.empty((steps + 1, 1, x0.size))
    record[0] = states
    _advance(states, p, float(sign), 0.0, record)
    return Trajectory(times=dt * np.arange(steps + 1), states=record[:, 0])


def simulate_bias(
    x0,
    T: float,
    dt: float,
    seed: int,
    sigma_q: float,
    sigma_w: float,
    *,
    stream: int = 0,
    path=None,
) -> Trajectory:
    """Biased flow dX = -sigma_q P dQ X - sigma_w P dW.

    sigma_w = 0 is bit-identical to ``simulate_rqf`` with the same seed;
    sigma_q = 0 is the vector-noise (driftless) motion on the sphere.
    """
    if sigma_q < 0 or sigma_w < 0:
        raise ValueError("sigma_q and sigma_w must be nonnegative")
    if sigma_q == 0 and sigma_w == 0 and T > 0:
        warnings.warn("sigma_q = sigma_w = 0: dynamics are frozen", stacklevel=2)
    x0 = unit_vector(x0)
    steps = _step_count(T, dt)
    p = _resolve_path(path, seed, x0.size, dt, steps, sigma_w != 0.0, stream)
    states = x0[None, :].copy()
    record = np.empty((steps + 1, 1, x0.size))
    record[0] = states
    _advance(states, p, -sigma_q, -sigma_w, record)
    return Trajectory(times=dt * np.arange(steps + 1), states=record[:, 0])


def simulate_coupled(
    initials,
    T: float,
    dt: float,
    seed: int,
    *,
    sigma_q: float = 1.0,
    sigma_w: float = 0.0,
    sign: float = -1.0,
    stream: int = 0,
    path=None,
) -> Ensemble:
    """Advance several particles under one shared noise realization.

    Every member consumes the identical increment at each step.  Members
    with equal initial states therefore stay bit-identical, and (for the
    pure quadratic flow) antipodal initials stay exactly antipodal.
    """
    if sigma_q < 0 or sigma_w < 0:
        raise ValueError("sigma_q and sigma_w must be nonnegative")
    if sign not in (-1.0, 1.0, -1, 1):
        raise ValueError("sign must be +1 or -1")
    initials = list(initials)
    if not initials:
        raise ValueError("need at least one initial state")
    arr = np.stack([unit_vector(x) for x in initials])
    m, n = arr.shape
    steps = _step_count(T, dt)
    p = _resolve_path(path, seed, n, dt, steps, sigma_w != 0.0, stream)
    states = arr.copy()
    record = np.empty((steps + 1, m, n))
    record[0] = states
    _advance(states, p, float(sign) * sigma_q, float(sign) * sigma_w, record)
    members = [
        Trajectory(times=dt * np.arange(steps + 1), states=record[:, i].copy()) for i in range(m)
    ]
    base = p if isinstance(p, noise.NoisePath) else None
    return Ensemble(noise=base, members=members)


# -- batched Monte Carlo ------------------------------------------------------


def _batch_field(states, dq, dw, q_scale, w_scale):
    # states (c, m, n), dq (c, n, n), dw (c, n) or None
    dqy = states @ dq
    s = np.einsum("cmi,cmi->cm", states, dqy)
    f = q_scale * (dqy - s[..., None] * states)
    if w_scale != 0.0:
        proj = np.einsum("cmi,ci->cm", states, dw)
        f = f + w_scale * (dw[:, None, :] - proj[..., None] * states)
    return f


def _batch_chunk(initials, steps, dt, seed, rep_lo, rep_hi, q_scale, w_scale, with_vector, n, cp_steps):
    c = rep_hi - rep_lo
    m = initials.shape[0]
    db = np.empty((c, steps, n, n))
    dw = np.empty((c, steps, n)) if with_vector else None
    for i, r in enumerate(range(rep_lo, rep_hi)):
        p = noise.generate_path(seed, n, dt, steps, with_vector=with_vector, stream=r)
        db[i] = p.matrix_increments
        if with_vector:
            dw[i] = p.vector_increments
    dq = noise.symmetrize(db)
    del db
    states = np.broadcast_to(initials, (c, m, n)).copy()
    snapshots = np.empty((len(cp_steps), c, m, n))
    if 0 in cp_steps:
        snapshots[cp_steps.index(0)] = states
    for k in range(steps):
        dqk = dq[:, k]
        dwk = dw[:, k] if with_vector else None
        f1 = _batch_field(states, dqk, dwk, q_scale, w_scale)
        f2 = _batch_field(states + f1, dqk, dwk, q_scale, w_scale)
        states = states + 0.5 * (f1 + f2)
        norms = np.sqrt(np.einsum("cmi,cmi->cm", states, states))
        states /= norms[..., None]
        if (k + 1) in cp_steps:
            snapshots[cp_steps.index(k + 1)] = states
    if not np.all(np.isfinite(states)):
        raise NumericalError("batch produced non-finite states")
    return snapshots


def batch_finals(
    initials,
    T: float,
    dt: float,
    seed: int,
    replicates: int,
    *,
    sigma_q: float = 1.0,
    sigma_w: float = 0.0,
    sign: float = -1.0,
    threads: int = 1,
    chunk_bytes: int = 1 << 27,
    checkpoints=None,
) -> np.ndarray:
    """Final states over independent noise realizations, shape (R, m, n).

    Replicate r is driven by the substream (seed, r) and would match a
    member-for-member run of ``simulate_coupled(..., stream=r)``.  Chunks
    of replicates are advanced together; with ``threads > 1`` chunks are
    fanned out to a thread pool and merged by index, so the result does
    not depend on the worker count.

    ``checkpoints`` (times in [0, T]) switches the return value to the
    states at those times, shape (len(checkpoints), R, m, n).
    """
    arr = np.atleast_2d(np.asarray(initials, dtype=float))
    m, n = arr.shape
    steps = _step_count(T, dt)
    if steps == 0:
        out = np.broadcast_to(arr, (replicates, m, n)).copy()
        return out if checkpoints is None else np.broadcast_to(arr, (len(checkpoints), replicates, m, n)).copy()
    if checkpoints is None:
        cp_steps = [steps]
    else:
        cp_steps = [min(steps, max(0, int(math.ceil(t / dt - 1e-9)))) for t in checkpoints]
    with_vector = sigma_w != 0.0
    per_rep = steps * (n * n + (n if with_vector else 0)) * 8
    if per_rep > noise.DEFAULT_MEM_CAP:
        raise ResourceCapError(
            f"one replicate of {steps} steps needs {per_rep} bytes of increments "
            f"(cap {noise.DEFAULT_MEM_CAP}); shorten the horizon or use the streaming "
            f"simulate_* runners"
        )
    chunk = int(max(1, min(replicates, chunk_bytes // max(per_rep, 1))))
    spans = [(lo, min(lo + chunk, replicates)) for lo in range(0, replicates, chunk)]
    q_scale = float(sign) * sigma_q
    w_scale = float(sign) * sigma_w
    out = np.empty((len(cp_steps), replicates, m, n))

    def work(span):
        lo, hi = span
        out[:, lo:hi] = _batch_chunk(arr, steps, dt, seed, lo, hi, q_scale, w_scale, with_vector, n, cp_steps)

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)
    return out[0] if checkpoints is None else out


# -- circle phase model -------------------------------------------------------


TWO_PI = 2.0 * math.pi


def circle_angle(xy) -> np.ndarray:
    """Angle of points on the unit circle, wrapped to [0, 2*pi)."""
    xy = np.asarray(xy, dtype=float)
    return np.mod(np.arctan2(xy[..., 1], xy[..., 0]), TWO_PI)


def _phase_combos(db_block):
    # the two independent drivers of the circle model, built from the same
    # 2x2 matrix path the sphere flow consumes at n = 2
    du = db_block[:, 1, 1] - db_block[:, 0, 0]
    dv = db_block[:, 0, 1] + db_block[:, 1, 0]
    return du, dv


def simulate_phase(phi0: float, T: float, dt: float, seed: int, *, stream: int = 0, path=None) -> PhaseTrajectory:
    """Circle reduction: d(phi) = (1/2) sin(2 phi) d(B22-B11) + (1/2) cos(2 phi) d(B12+B21).

    Heun steps of the scalar Stratonovich SDE; angles are stored wrapped
    to [0, 2*pi).  Driven by the same 2x2 matrix increments as the n = 2
    sphere flow under matched (seed, stream).
    """
    steps = _step_count(T, dt)
    p = _resolve_path(path, seed, 2, dt, steps, False, stream)
    angles = np.empty(steps + 1)
    phi = float(phi0) % TWO_PI
    angles[0] = phi
    k = 0
    for db, _ in p.blocks():
        du_arr, dv_arr = _phase_combos(db)
        for du, dv in zip(du_arr.tolist(), dv_arr.tolist()):
            a1 = 0.5 * math.sin(2.0 * phi)
            b1 = 0.5 * math.cos(2.0 * phi)
            pred = phi + a1 * du + b1 * dv
            a2 = 0.5 * math.sin(2.0 * pred)
            b2 = 0.5 * math.cos(2.0 * pred)
            phi = (phi + 0.5 * ((a1 + a2) * du + (b1 + b2) * dv)) % TWO_PI
            k += 1
            angles[k] = phi
    return PhaseTrajectory(times=dt * np.arange(steps + 1), angles=angles)


def phase_finals(phi0: float, T: float, dt: float, seed: int, replicates: int, chunk: int = 8192) -> np.ndarray:
    """Final wrapped angles over independent replicate substreams."""
    steps = _step_count(T, dt)
    finals = np.empty(replicates)
    for lo in range(0, replicates, chunk):
        hi = min(lo + chunk, replicates)
        c = hi - lo
        phi = np.full(c, float(phi0) % TWO_PI)
        for block in range((steps + noise.BLOCK_STEPS - 1) // noise.BLOCK_STEPS):
            take = min(noise.BLOCK_STEPS, steps - block * noise.BLOCK_STEPS)
            du = np.empty((c, take))
            dv = np.empty((c, take))
            for i, r in enumerate(range(lo, hi)):
                db = noise.NoisePath(seed, 2, dt, take, stream=r, offset=block * noise.BLOCK_STEPS)
                mat = next(db.blocks(chunk=take))[0]
                du[i], dv[i] = _phase_combos(mat)
            for k in range(take):
                a1 = 0.5 * np.sin(2.0 * phi)
                b1 = 0.5 * np.cos(2.0 * phi)
                pred = phi + a1 * du[:, k] + b1 * dv[:, k]
                a2 = 0.5 * np.sin(2.0 * pred)
                b2 = 0.5 * np.cos(2.0 * pred)
                phi = np.mod(phi + 0.5 * ((a1 + a2) * du[:, k] + (b1 + b2) * dv[:, k]), TWO_PI)
        finals[lo:hi] = phi
    return finals


# -- pull-back experiments ----------------------------------------------------


def sphere_grid(count: int, n: int, seed: int = 0) -> np.ndarray:
    """Initial grid: equal angles on S^1, Fibonacci points on S^2, seeded
    uniform draws for n > 3."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if n == 2:
        theta = TWO_PI * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if n == 3:
        return fibonacci_sphere(count)
    rng = np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF))
    return np.stack([random_unit_vector(n, rng) for _ in range(count)])


def pullback_run(
    initial_grid,
    T: float,
    dt: float,
    seed: int,
    *,
    diameter_tol: float = 1e-3,
    stream: int = 0,
) -> PullbackResult:
    """Push a grid of initial states through one fixed realization.

    By stationarity of the increments this is equal in law to the
    pull-back picture (evolving from the distant past); the returned
    cluster summary describes the terminal configuration.
    """
    from .diagnostics import attractor_detect

    grid = np.stack([unit_vector(x) for x in initial_grid])
    steps = _step_count(T, dt)
    p = noise.generate_path(seed, grid.shape[1], dt, steps, stream=stream, materialize=False)
    states = grid.copy()
    _advance(states, p, -1.0, 0.0)
    summary = attractor_detect(states, diameter_tol)
    return PullbackResult(final_states=states, summary=summary)
