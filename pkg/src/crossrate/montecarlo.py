"""Seeded Monte-Carlo ground truth.

Trajectories are sampled from the initial-state Gaussian, propagated
with the exact discrete-time dynamics plus exact process-noise
increments, and every boundary crossing of each position chord is
recorded.  Histograms of first-entry times form the empirical collision
probability rate; entry multiplicities quantify bound saturation.

Per-trajectory noise comes from counter-based Philox streams keyed by
(campaign seed, trajectory id), so results are bit-identical regardless
of batching or thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    MotionModel,
    RadarNoise,
    StateVector,
    input_increment,
    process_noise_cov,
    steady_state_covariance,
    transition_matrix,
)
from .errors import ConfigError
from .gaussian import psd_factor
from .geometry import SEGMENT_ORDER, CrossingEvent, HostRectangle, segments

_BATCH_SIZE = 4096  # fixed by the algorithm, not by the thread count


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one campaign."""

    initial_mean: StateVector
    model: MotionModel
    radar: RadarNoise = RadarNoise()
    rect: HostRectangle = HostRectangle()
    initial_cov: np.ndarray | None = None  # None -> steady-state Riccati
    horizon: float = 8.0
    sim_step: float = 0.01
    bin_width: float = 0.05
    n_traj: int = 100_000
    seed: int = 0
    terminate_on_entry: bool = False

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigError("horizon must be > 0", "horizon")
        if self.sim_step <= 0:
            raise ConfigError("sim_step must be > 0", "sim_step")
        if self.sim_step > self.bin_width:
            raise ConfigError("sim_step must be <= bin_width", "sim_step")
        if self.n_traj < 1:
            raise ConfigError("n_traj must be >= 1", "n_traj")
        if self.initial_cov is not None:
            cov = np.asarray(self.initial_cov, dtype=float)
            if cov.shape != (6, 6):
                raise ConfigError("initial_cov must be 6x6", "initial_cov")
            object.__setattr__(self, "initial_cov", cov)

    def resolve_initial_cov(self) -> np.ndarray:
        if self.initial_cov is not None:
            return self.initial_cov
        return steady_state_covariance(self.initial_mean, self.model, self.radar)

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.horizon / self.sim_step - 1e-9))

    @property
    def n_bins(self) -> int:
        return int(math.ceil(self.horizon / self.bin_width - 1e-9))


@dataclass(frozen=True)
class CollisionRecord:
    """All boundary crossings of one simulated trajectory."""

    traj_id: int
    events: tuple[CrossingEvent, ...]

    @property
    def n_entries_host(self) -> int:
        return sum(1 for ev in self.events if ev.kind == "entry")

    @property
    def first_entry(self) -> CrossingEvent | None:
        for ev in self.events:
            if ev.kind == "entry":
                return ev
        return None

    def segment_entry_times(self, name: str) -> list[float]:
        return [ev.time for ev in self.events if ev.kind == "entry" and ev.segment == name]


@dataclass(frozen=True)
class RateHistogram:
    """Binned crossing counts normalized to rates."""

    bin_edges: np.ndarray
    n_traj: int
    first_entry_counts: dict[str, np.ndarray]  # per segment + 'total'
    all_entry_counts: dict[str, np.ndarray]

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    @property
    def bin_mid(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def rate(self, counts: np.ndarray) -> np.ndarray:
        return counts / (self.n_traj * self.bin_width)

    def first_entry_rate(self, key: str = "total") -> np.ndarray:
        return self.rate(self.first_entry_counts[key])

    def all_entry_rate(self, key: str = "total") -> np.ndarray:
        return self.rate(self.all_entry_counts[key])

    def integrated_probability(self) -> np.ndarray:
        """Cumulative first-entry probability at the right bin edges."""
        return np.cumsum(self.first_entry_counts["total"]) / self.n_traj


@dataclass(frozen=True)
class CampaignResult:
    histogram: RateHistogram
    entry_stats: dict
    n_traj: int


def _traj_rng(seed: int, traj_id: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, traj_id], dtype=np.uint64))
    )


def sample_initial(
    config: ScenarioConfig, rng: np.random.Generator, cov_factor: np.ndarray | None = None
) -> StateVector:
    """Draw one initial state from N(mean, P0) on the given stream."""
    if cov_factor is None:
        cov_factor = psd_factor(config.resolve_initial_cov())
    draw = config.initial_mean.as_array() + cov_factor @ rng.standard_normal(6)
    return StateVector.from_array(draw)


def _step_kernel(config: ScenarioConfig):
    """Precomputed per-step propagation pieces (shared by all trajectories)."""
    dt = config.sim_step
    n = config.n_steps
    phi_t = transition_matrix(dt).T
    chol_q_t = psd_factor(process_noise_cov(dt, config.model)).T
    u = np.zeros((n, 6))
    if config.model.input_enabled:
        for k in range(n):
            u[k] = input_increment(dt, config.model, t0=k * dt)
    return phi_t, chol_q_t, u


def _detect_batch_crossings(p_prev, p_new, rect, t_prev, dt, events_out, traj_ids):
    """Vectorized crossing detection for one step of a batch.

    Appends (traj_id, time, fraction, segment, point, kind) tuples for
    every chord that crosses one of the four sides within its span.
    """
    x0, y0 = p_prev[:, 0], p_prev[:, 1]
    x1, y1 = p_new[:, 0], p_new[:, 1]
    for seg in segments(rect):
        if seg.axis == "x":
            a0, a1, b0, b1 = x0, x1, y0, y1
        else:
            a0, a1, b0, b1 = y0, y1, x0, x1
        da = a1 - a0
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (seg.coord - a0) / da
        hit = (da != 0.0) & (s >= 0.0) & (s < 1.0)
        if not np.any(hit):
            continue
        idx = np.nonzero(hit)[0]
        sv = s[idx]
        tangent = b0[idx] + sv * (b1[idx] - b0[idx])
        in_span = (tangent >= seg.t_lo) & (tangent <= seg.t_hi)
        if not np.any(in_span):
            continue
        idx = idx[in_span]
        sv = sv[in_span]
        tangent = tangent[in_span]
        d_vec = p_new[idx] - p_prev[idx]
        inward = d_vec[:, 0] * seg.normal[0] + d_vec[:, 1] * seg.normal[1]
        for j, i in enumerate(idx):
            if inward[j] == 0.0:
                continue
            kind = "entry" if inward[j] > 0.0 else "exit"
            events_out.append(
                (
                    int(traj_ids[i]),
                    t_prev + sv[j] * dt,
                    float(sv[j]),
                    seg.name,
                    seg.point_at(float(tangent[j])),
                    kind,
                )
            )


def _simulate_batch(
    config: ScenarioConfig,
    traj_ids: np.ndarray,
    cov_factor: np.ndarray,
    kernel,
    x0_override: np.ndarray | None = None,
    noise_override: np.ndarray | None = None,
) -> list[CollisionRecord]:
    """Simulate a batch of trajectories to the horizon, capture crossings."""
    phi_t, chol_q_t, u = kernel
    n_steps = config.n_steps
    dt = config.sim_step
    b = len(traj_ids)

    if x0_override is not None:
        x = x0_override.copy()
        w = noise_override
    else:
        x = np.empty((b, 6))
        z = np.empty((b, n_steps, 6))
        mean = config.initial_mean.as_array()
        for j, tid in enumerate(traj_ids):
            rng = _traj_rng(config.seed, int(tid))
            x[j] = mean + cov_factor @ rng.standard_normal(6)
            z[j] = rng.standard_normal((n_steps, 6))
        w = z @ chol_q_t

    raw_events: list[tuple] = []
    p_prev = x[:, :2].copy()
    for k in range(n_steps):
        x = x @ phi_t
        x += u[k]
        x += w[:, k, :]
        _detect_batch_crossings(
            p_prev, x[:, :2], config.rect, k * dt, dt, raw_events, traj_ids
        )
        p_prev = x[:, :2].copy()

    raw_events.sort(key=lambda e: (e[0], e[1], e[2]))
    by_traj: dict[int, list[CrossingEvent]] = {}
    for tid, t_ev, _frac, seg_name, point, kind in raw_events:
        if t_ev > config.horizon:
            continue
        by_traj.setdefault(tid, []).append(CrossingEvent(t_ev, seg_name, point, kind))

    records = []
    for tid in traj_ids:
        events = by_traj.get(int(tid), [])
        if config.terminate_on_entry:
            cut = next(
                (i for i, ev in enumerate(events) if ev.kind == "entry"), None
            )
            if cut is not None:
                events = events[: cut + 1]
        records.append(CollisionRecord(int(tid), tuple(events)))
    return records


def simulate_trajectory(
    x0: StateVector, config: ScenarioConfig, rng: np.random.Generator
) -> CollisionRecord:
    """Simulate one trajectory from a given initial state.

    Noise increments are drawn from `rng` in the same order the campaign
    uses, so run_campaign with n_traj=1 reproduces this exactly.
    """
    kernel = _step_kernel(config)
    z = rng.standard_normal((config.n_steps, 6))
    w = (z @ kernel[1])[np.newaxis, :, :]
    recs = _simulate_batch(
        config,
        np.array([0]),
        cov_factor=np.zeros((6, 6)),
        kernel=kernel,
        x0_override=x0.as_array()[np.newaxis, :],
        noise_override=w,
    )
    return recs[0]


def _bin_index(t: float, bin_width: float, n_bins: int) -> int:
    i = int(t / bin_width)
    return min(i, n_bins - 1)


def run_campaign(config: ScenarioConfig, threads: int = 1) -> CampaignResult:
    """Full Monte-Carlo campaign: histograms plus entry statistics.

    Trajectories continue past their first entry so higher-order entries
    are observable; first-entry statistics are extracted afterwards.
    With terminate_on_entry the simulation stops at the first entry.
    """
    cov_factor = psd_factor(config.resolve_initial_cov())
    kernel = _step_kernel(config)
    n_bins = config.n_bins
    edges = np.arange(n_bins + 1) * config.bin_width

    keys = ["total", *SEGMENT_ORDER]
    first_counts = {k: np.zeros(n_bins, dtype=np.int64) for k in keys}
    all_counts = {k: np.zeros(n_bins, dtype=np.int64) for k in keys}
    multiplicity: dict[int, int] = {}
    first_boundary_totals = {k: 0 for k in SEGMENT_ORDER}

    def process(records: list[CollisionRecord]):
        for rec in records:
            n_ent = rec.n_entries_host
            if n_ent > 0:
                multiplicity[n_ent] = multiplicity.get(n_ent, 0) + 1
            first = rec.first_entry
            if first is not None:
                bi = _bin_index(first.time, config.bin_width, n_bins)
                first_counts["total"][bi] += 1
                first_boundary_totals[first.segment] += 1
            seen_first_seg: set[str] = set()
            for ev in rec.events:
                if ev.kind != "entry":
                    continue
                bi = _bin_index(ev.time, config.bin_width, n_bins)
                all_counts["total"][bi] += 1
                all_counts[ev.segment][bi] += 1
                if ev.segment not in seen_first_seg:
                    seen_first_seg.add(ev.segment)
                    first_counts[ev.segment][bi] += 1

    batches = [
        np.arange(lo, min(lo + _BATCH_SIZE, config.n_traj))
        for lo in range(0, config.n_traj, _BATCH_SIZE)
    ]

    def run_batch(ids):
        return _simulate_batch(config, ids, cov_factor, kernel)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # merge strictly in batch order: results independent of schedule
            for records in pool.map(run_batch, batches):
                process(records)
    else:
        for ids in batches:
            process(run_batch(ids))

    n_collided = sum(multiplicity.values())
    entry_stats = {
        "n_traj": config.n_traj,
        "multiplicity_counts": {k: multiplicity[k] for k in sorted(multiplicity)},
        "multiplicity_probability": {
            k: multiplicity[k] / config.n_traj for k in sorted(multiplicity)
        },
        "p_at_least_one": n_collided / config.n_traj,
        "first_entry_boundary_totals": first_boundary_totals,
        "first_entry_boundary_fractions": {
            k: v / config.n_traj for k, v in first_boundary_totals.items()
        },
    }
    histogram = RateHistogram(
        bin_edges=edges,
        n_traj=config.n_traj,
        first_entry_counts=first_counts,
        all_entry_counts=all_counts,
    )
    return CampaignResult(histogram=histogram, entry_stats=entry_stats, n_traj=config.n_traj)


def ttc_monte_carlo(config: ScenarioConfig) -> dict:
    """Initial-condition TTC histograms for the front and right lines.

    Only the initial state is random; each draw is propagated with the
    deterministic constant-acceleration model (no process noise, no
    input).  Per draw, all real positive roots of the crossing quadratics
    are screened by segment membership and the outside-entry condition,
    and the earliest valid root per boundary is binned.
    """
    if config.model.input_enabled:
        raise ConfigError(
            "TTC Monte-Carlo requires the deterministic input disabled", "model.input_enabled"
        )
    cov_factor = psd_factor(config.resolve_initial_cov())
    mean = config.initial_mean.as_array()
    n = config.n_traj
    states = np.empty((n, 6))
    for i in range(n):
        rng = _traj_rng(config.seed, i)
        states[i] = mean + cov_factor @ rng.standard_normal(6)

    n_bins = config.n_bins
    edges = np.arange(n_bins + 1) * config.bin_width
    rect = config.rect
    eps = 1e-6

    def ca_pos(states, t):
        x = states[:, 0] + states[:, 2] * t + 0.5 * states[:, 4] * t * t
        y = states[:, 1] + states[:, 3] * t + 0.5 * states[:, 5] * t * t
        return x, y

    def roots_along(axis: int, level: float) -> np.ndarray:
        """Both quadratic roots per draw (nan where invalid/complex)."""
        a = 0.5 * states[:, 4 + axis]
        b = states[:, 2 + axis]
        c = states[:, axis] - level
        out = np.full((n, 2), np.nan)
        lin = np.abs(a) < 1e-15
        with np.errstate(divide="ignore", invalid="ignore"):
            tl = -c / b
        out[lin & (b != 0.0), 0] = tl[lin & (b != 0.0)]
        quad = ~lin
        disc = b * b - 4.0 * a * c
        ok = quad & (disc >= 0.0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = (-b - sq) / (2.0 * a)
            r2 = (-b + sq) / (2.0 * a)
        out[ok, 0] = r1[ok]
        out[ok, 1] = r2[ok]
        return out

    def boundary_hist(axis: int, level: float, t_lo: float, t_hi: float, outside_sign: float):
        roots = roots_along(axis, level)
        best = np.full(n, np.inf)
        for col in range(2):
            t = roots[:, col]
            valid = np.isfinite(t) & (t > 0.0) & (t <= config.horizon)
            if not np.any(valid):
                continue
            tv = np.where(valid, t, 0.0)
            x_t, y_t = ca_pos(states, tv)
            tangent = y_t if axis == 0 else x_t
            member = (tangent >= t_lo) & (tangent <= t_hi)
            x_e, y_e = ca_pos(states, tv - eps)
            coord_e = x_e if axis == 0 else y_e
            outside = outside_sign * (coord_e - level) > 0.0
            ok = valid & member & outside
            best = np.where(ok & (t < best), t, best)
        hit = np.isfinite(best)
        counts, _ = np.histogram(best[hit], bins=edges)
        return counts.astype(np.int64)

    front_counts = boundary_hist(
        0, rect.x_front, rect.y_left, rect.y_right, outside_sign=+1.0
    )
    right_counts = boundary_hist(
        1, rect.y_right, rect.x_rear, rect.x_front, outside_sign=+1.0
    )
    return {
        "bin_edges": edges,
        "n_traj": n,
        "front_counts": front_counts,
        "right_counts": right_counts,
        "front_rate": front_counts / (n * config.bin_width),
        "right_rate": right_counts / (n * config.bin_width),
    }
