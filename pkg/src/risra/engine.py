"""Frame simulation, Monte Carlo aggregation, parameter sweeps, optimal slot search.

Reproducibility contract: every random number of trial t comes from one
counter-based Philox stream keyed by SeedSequence(entropy=seed,
spawn_key=(t,)), consumed in a fixed stage order: device placement first
(distances, then angles), estimation noise second (only when the noise std is
positive), access-policy draws last. Results are therefore bit-identical for
a given (config, seed) regardless of how trials are scheduled or how many
worker processes run them. Because placement draws precede policy draws,
different policies at the same seed contend over identical device drops.

run_monte_carlo evaluates trials in vectorized batches; simulate_frame is the
single-frame reference path composed from the public module operations, and
the two are bit-identical (the suite asserts it).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from multiprocessing import get_context
from typing import Iterable

import numpy as np

from . import access, channel, power_metrics, receiver
from .access import Policy
from .channel import PhaseShiftSet, phase_shift_set
from .config import ScenarioConfig, with_policy

Z95 = 1.959963984540054  # two-sided 95% normal quantile

SWEEP_AXES = ("K", "rho_mtd", "N", "S")


def substream(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for the substream identified by (seed, *path)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=tuple(path)))
    )


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """The random stream owned by one trial."""
    return substream(seed, trial)


@dataclass(slots=True)
class TrialResult:
    """One frame's outcome."""

    successes: int
    replica_counts: np.ndarray
    throughput_pps: float
    power_w: float
    energy_efficiency: float
    trace: tuple[tuple[int, int, int], ...] | None = None


@dataclass(slots=True)
class AggregateResult:
    """Monte Carlo aggregate over independent frames.

    ee_ratio_of_means is mean throughput over mean power (the headline
    estimator); ee_mean_of_ratios averages the per-frame efficiency and is
    reported alongside for transparency.
    """

    mean_a: float
    mean_throughput: float
    ci95_throughput: float
    mean_power_w: float
    ci95_power_w: float
    ee_ratio_of_means: float
    ee_mean_of_ratios: float
    trials: int
    seed: int


def simulate_frame(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    phases: PhaseShiftSet | None = None,
    keep_trace: bool = False,
) -> TrialResult:
    """Run one frame end to end: drop devices, measure, contend, decode, meter.

    Deterministic given (cfg, rng state). This is the reference path composed
    from the public module operations; run_monte_carlo's batched evaluation
    reproduces it bit for bit.
    """
    if phases is None:
        phases = phase_shift_set(cfg.s)
    placements = channel.sample_mtd_placements(
        rng,
        cfg.k,
        (cfg.mtd_d_min_m, cfg.mtd_d_max_m),
        (cfg.mtd_angle_min_rad, cfg.mtd_angle_max_rad),
        cfg.mtd_gain,
    )
    gamma = channel.snr_matrix(cfg.ris, cfg.radio, cfg.ap, placements, phases)
    quality = None
    if cfg.policy.requires_training:
        quality = access.measure_quality(gamma, cfg.estimation_c, cfg.estimation_noise_std, rng)
    decision = access.decide_access(cfg.policy, quality, rng, cfg.k, cfg.s)
    occupancy = receiver.build_occupancy(decision, cfg.s)
    decode = receiver.sic_decode(occupancy, gamma, cfg.radio.snr_threshold)
    counts = decision.replica_counts
    metrics = power_metrics.compute_frame_metrics(
        cfg.power,
        cfg.timing,
        cfg.ris.n_elements,
        counts,
        receiver.count_successes(decode),
        power_training_used=cfg.training_used,
        frame_training_used=cfg.policy.requires_training,
    )
    return TrialResult(
        successes=metrics.successes,
        replica_counts=counts,
        throughput_pps=metrics.throughput_pps,
        power_w=metrics.power_w,
        energy_efficiency=metrics.energy_efficiency,
        trace=decode.trace if keep_trace else None,
    )


_BATCH = 256  # trials per vectorized batch; keeps the SNR block under ~2 MB


def _simulate_batch(cfg: ScenarioConfig, trials: range, phases: PhaseShiftSet):
    """Vectorized evaluation of a batch of trials.

    All random draws still come from each trial's own substream in the
    simulate_frame stage order; only the deterministic math runs batched.
    Returns per-trial (successes, throughput, power) arrays.
    """
    b = len(trials)
    k, s = cfg.k, cfg.s
    policy = cfg.policy
    rngs = [trial_rng(cfg.seed, t) for t in trials]

    distances = np.empty((b, k))
    angles = np.empty((b, k))
    noise = None
    draw_noise = policy.requires_training and cfg.estimation_noise_std > 0
    if draw_noise:
        noise = np.empty((b, k, s))
    carp_u = np.empty((b, k, s)) if policy.kind == "carp" else None
    pick_first = pick_second = degrees = perm_u = None
    if policy.kind == "crdsap":
        pick_first = np.empty((b, k), dtype=np.int64)
        pick_second = np.empty((b, k), dtype=np.int64)
    elif policy.kind == "irsap":
        degrees = np.empty((b, k), dtype=np.int64)
        perm_u = np.empty((b, k, s))

    for i, rng in enumerate(rngs):
        distances[i] = rng.uniform(cfg.mtd_d_min_m, cfg.mtd_d_max_m, k)
        angles[i] = rng.uniform(cfg.mtd_angle_min_rad, cfg.mtd_angle_max_rad, k)
        if draw_noise:
            noise[i] = rng.standard_normal((k, s))
        if policy.kind == "carp":
            carp_u[i] = rng.random((k, s))
        elif policy.kind == "crdsap":
            pick_first[i] = rng.integers(0, s, k)
            pick_second[i] = rng.integers(0, s - 1, k)
        elif policy.kind == "irsap":
            degrees[i] = access.irsap_sample_degrees(rng, k, s)
            perm_u[i] = rng.random((k, s))

    # SNR grid, same elementwise formula as channel.snr_matrix
    base = cfg.ap.antenna_gain * cfg.mtd_gain / (4 * math.pi) ** 2
    beta = (
        base
        * (cfg.ris.d_x_m * cfg.ris.d_z_m / (cfg.ap.distance_m * distances)) ** 2
        * np.cos(angles) ** 2
    )
    gain_sq = channel.array_factor_power(
        cfg.ris, angles[:, :, None], np.asarray(phases.angles)[None, None, :]
    )
    gamma = cfg.radio.mtd_tx_power_w / cfg.radio.noise_power_w * beta[:, :, None] * gain_sq

    if policy.requires_training:
        quality = cfg.estimation_c * gamma
        if draw_noise:
            quality = quality + cfg.estimation_noise_std * noise
        quality = np.maximum(quality, 0.0)
    else:
        quality = None

    # per-device slot sets, boolean (b, k, s)
    if policy.kind == "carp":
        totals = quality.sum(axis=2, keepdims=True)
        probs = np.where(totals > 0.0, quality / np.where(totals > 0.0, totals, 1.0), 1.0 / s)
        chosen = carp_u < probs
        empty = ~chosen.any(axis=2)
        if empty.any():
            best = np.argmax(quality, axis=2)
            rows, devs = np.nonzero(empty)
            chosen[rows, devs, best[rows, devs]] = True
    elif policy.kind == "sscp":
        top = np.argsort(-quality, axis=2, kind="stable")[:, :, : policy.sscp_s]
        chosen = np.zeros((b, k, s), dtype=bool)
        np.put_along_axis(chosen, top, True, axis=2)
    elif policy.kind == "crdsap":
        pick_second = pick_second + (pick_second >= pick_first)
        chosen = np.zeros((b, k, s), dtype=bool)
        np.put_along_axis(chosen, pick_first[:, :, None], True, axis=2)
        np.put_along_axis(chosen, pick_second[:, :, None], True, axis=2)
    else:
        order = np.argsort(perm_u, axis=2)
        ranks = np.empty_like(order)
        np.put_along_axis(ranks, order, np.broadcast_to(np.arange(s), (b, k, s)), axis=2)
        chosen = ranks < degrees[:, :, None]

    counts = chosen.sum(axis=2)
    threshold = cfg.radio.snr_threshold
    a = np.empty(b)
    for i in range(b):
        a[i] = receiver.peel(chosen[i], gamma[i], threshold)

    # metrics, with the same floating-point op order as compute_frame_metrics
    p_ap = power_metrics.ap_power(cfg.power, cfg.timing.slots, cfg.training_used)
    p_ris = power_metrics.ris_power(cfg.ris.n_elements, cfg.power.phase_shifter_w)
    p_mtd = (
        counts * (cfg.power.mtd_pa_inverse_eff * cfg.power.mtd_tx_power_w)
    ).sum(axis=1) + k * cfg.power.mtd_static_w
    p = p_ap + p_ris + p_mtd
    r_eff = cfg.timing.training_ratio if policy.requires_training else 0.0
    g = a / ((1.0 + r_eff) * cfg.timing.slots * cfg.timing.access_slot_s)
    return a, g, p


def _simulate_range(
    cfg: ScenarioConfig, start: int, stop: int, keep_traces: bool = False
):
    """Simulate trials [start, stop); returns per-trial metric arrays (and traces)."""
    phases = phase_shift_set(cfg.s)
    if not keep_traces:
        parts = [
            _simulate_batch(cfg, range(lo, min(lo + _BATCH, stop)), phases)
            for lo in range(start, stop, _BATCH)
        ]
        return (
            np.concatenate([part[0] for part in parts]),
            np.concatenate([part[1] for part in parts]),
            np.concatenate([part[2] for part in parts]),
            None,
        )
    n = stop - start
    a = np.empty(n)
    g = np.empty(n)
    p = np.empty(n)
    traces = []
    for i, trial in enumerate(range(start, stop)):
        result = simulate_frame(cfg, trial_rng(cfg.seed, trial), phases, keep_trace=True)
        a[i] = result.successes
        g[i] = result.throughput_pps
        p[i] = result.power_w
        traces.append(result.trace)
    return a, g, p, traces


def _ci95(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return Z95 * float(values.std(ddof=1)) / math.sqrt(values.size)


def _aggregate(cfg: ScenarioConfig, a: np.ndarray, g: np.ndarray, p: np.ndarray) -> AggregateResult:
    mean_g = float(g.mean())
    mean_p = float(p.mean())
    return AggregateResult(
        mean_a=float(a.mean()),
        mean_throughput=mean_g,
        ci95_throughput=_ci95(g),
        mean_power_w=mean_p,
        ci95_power_w=_ci95(p),
        ee_ratio_of_means=mean_g / mean_p,
        ee_mean_of_ratios=float((g / p).mean()),
        trials=cfg.trials,
        seed=cfg.seed,
    )


def run_monte_carlo(cfg: ScenarioConfig) -> AggregateResult:
    """Run cfg.trials independent frames and aggregate.

    Trials are fanned out over cfg.workers forked processes when possible;
    per-trial substreams and index-ordered reduction make the result
    independent of the worker count.
    """
    workers = min(cfg.workers, cfg.trials)
    if workers > 1 and os.name == "posix":
        bounds = np.linspace(0, cfg.trials, workers + 1, dtype=int)
        jobs = [
            (cfg, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        with get_context("fork").Pool(len(jobs)) as pool:
            parts = pool.starmap(_simulate_range, jobs)
        a = np.concatenate([part[0] for part in parts])
        g = np.concatenate([part[1] for part in parts])
        p = np.concatenate([part[2] for part in parts])
    else:
        a, g, p, _ = _simulate_range(cfg, 0, cfg.trials)
    return _aggregate(cfg, a, g, p)


def run_monte_carlo_with_traces(
    cfg: ScenarioConfig,
) -> tuple[AggregateResult, list[tuple[tuple[int, int, int], ...]]]:
    """Serial debug variant of run_monte_carlo that also returns decode traces."""
    a, g, p, traces = _simulate_range(cfg, 0, cfg.trials, keep_traces=True)
    return _aggregate(cfg, a, g, p), traces


@dataclass(slots=True)
class SweepSpec:
    """One sweep: vary `axis` over `values` for each policy, on top of `base`."""

    axis: str
    values: tuple
    base: ScenarioConfig
    policies: tuple[Policy, ...]

    def __post_init__(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("sweep values must be nonempty")
        if not self.policies:
            raise ValueError("sweep needs at least one policy")
        self.values = tuple(sorted(self.values))


@dataclass(slots=True)
class SweepPoint:
    """One evaluated (policy, axis value) cell of a sweep."""

    policy_label: str
    axis: str
    value: float
    config: ScenarioConfig
    result: AggregateResult


def apply_axis_value(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    """Substitute one axis value into a config, revalidating the result."""
    if axis == "K":
        k = int(value)
        if k != value or k < 1:
            raise ValueError(f"axis K value {value!r} must be a positive integer")
        return replace(cfg, k=k)
    if axis == "rho_mtd":
        rho = float(value)
        if rho <= 0:
            raise ValueError("axis rho_mtd values must be positive watts")
        return replace(
            cfg,
            radio=replace(cfg.radio, mtd_tx_power_w=rho),
            power=replace(cfg.power, mtd_tx_power_w=rho),
        )
    if axis == "N":
        n = int(value)
        side = math.isqrt(n)
        if n != value or side * side != n or n < 1:
            raise ValueError(
                f"axis N value {value!r} is not a perfect square; the surface keeps n_x = n_z"
            )
        return replace(cfg, ris=replace(cfg.ris, n_x=side, n_z=side))
    if axis == "S":
        s = int(value)
        if s != value or s < 1:
            raise ValueError(f"axis S value {value!r} must be a positive integer")
        return replace(cfg, timing=replace(cfg.timing, slots=s))
    raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")


def sweep(spec: SweepSpec, progress=None) -> list[SweepPoint]:
    """Evaluate every (policy, axis value) cell; rows sorted by (policy, value)."""
    points = []
    cells = [
        (policy, value)
        for policy in sorted(spec.policies, key=lambda p: p.label)
        for value in spec.values
    ]
    for i, (policy, value) in enumerate(cells):
        cfg = with_policy(apply_axis_value(spec.base, spec.axis, value), policy)
        points.append(SweepPoint(policy.label, spec.axis, value, cfg, run_monte_carlo(cfg)))
        if progress is not None:
            progress(i + 1, len(cells))
    return points


@dataclass(slots=True)
class OptimalSReport:
    """Full per-S curve plus the argmax S for throughput and for efficiency."""

    curve: tuple[tuple[int, AggregateResult], ...]
    best_throughput: tuple[int, float]
    best_ee: tuple[int, float]


def optimal_over_s(
    cfg: ScenarioConfig, s_values: Iterable[int], progress=None
) -> OptimalSReport:
    """Grid-search the slot count; ties resolve to the smaller S."""
    values = sorted(set(int(s) for s in s_values))
    if not values:
        raise ValueError("s_values must be nonempty")
    curve = []
    for i, s in enumerate(values):
        result = run_monte_carlo(apply_axis_value(cfg, "S", s))
        curve.append((s, result))
        if progress is not None:
            progress(i + 1, len(values))
    best_g = max(curve, key=lambda item: item[1].mean_throughput)
    best_ee = max(curve, key=lambda item: item[1].ee_ratio_of_means)
    return OptimalSReport(
        curve=tuple(curve),
        best_throughput=(best_g[0], best_g[1].mean_throughput),
        best_ee=(best_ee[0], best_ee[1].ee_ratio_of_means),
    )
