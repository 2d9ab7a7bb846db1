"""Channel-quality measurement and the four uplink access policies.

A frame has two blocks of S slots. During the first block the surface sweeps
its S configurations while the AP sends pilots, and each contending device
records one quality value per slot. During the second block the sweep repeats
and each device transmits packet replicas in the slots chosen by its policy:

  carp    quality-proportional Bernoulli trial per slot; if no trial fires,
          fall back to the single best-quality slot
  sscp    the fixed number of slots with the strongest measured qualities
  crdsap  two distinct slots, uniform over all pairs (no training needed)
  irsap   a random replica count drawn from a soliton-like degree
          distribution, then that many distinct slots uniformly (no training)

Slot indices are 0-based throughout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

POLICY_KINDS = ("carp", "sscp", "crdsap", "irsap")


@dataclass(slots=True, frozen=True)
class Policy:
    """Access policy selector; sscp_s is the replica count used only by sscp."""

    kind: str
    sscp_s: int = 2

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if self.kind == "sscp" and self.sscp_s < 1:
            raise ValueError("sscp replica count must be >= 1")

    @property
    def requires_training(self) -> bool:
        return self.kind in ("carp", "sscp")

    @property
    def label(self) -> str:
        return self.kind


@dataclass(slots=True)
class QualityMatrix:
    """Measured channel qualities, one row per device, one column per slot."""

    values: np.ndarray
    c: np.ndarray
    noise_std: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError("quality values must be a 2-D device x slot grid")
        k = self.values.shape[0]
        if self.c.shape != (k,) or self.noise_std.shape != (k,):
            raise ValueError("per-device constants must match the number of devices")


@dataclass(slots=True)
class AccessDecision:
    """Chosen access slots per device; every set is nonempty and within range."""

    num_slots: int
    slots_per_device: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        for k, chosen in enumerate(self.slots_per_device):
            if not chosen:
                raise ValueError(f"device {k} selected no slots")
            if not all(0 <= s < self.num_slots for s in chosen):
                raise ValueError(f"device {k} selected a slot outside 0..{self.num_slots - 1}")

    @property
    def replica_counts(self) -> np.ndarray:
        return np.array([len(s) for s in self.slots_per_device])

    @property
    def total_replicas(self) -> int:
        return sum(len(s) for s in self.slots_per_device)


def measure_quality(
    snr_values: np.ndarray,
    c: float | np.ndarray = 1.0,
    noise_std: float | np.ndarray = 0.0,
    rng: np.random.Generator | None = None,
) -> QualityMatrix:
    """Per-device quality grid: scaled SNR plus zero-mean estimation noise.

    With c = 1 and noise_std = 0 (perfect estimation) the values equal the SNR
    grid exactly and no random numbers are consumed. Noisy measurements are
    Gaussian and clamped at zero from below, since the policies need
    nonnegative weights.
    """
    snr_values = np.asarray(snr_values, dtype=float)
    k = snr_values.shape[0]
    c_arr = np.broadcast_to(np.asarray(c, dtype=float), (k,)).copy()
    std_arr = np.broadcast_to(np.asarray(noise_std, dtype=float), (k,)).copy()
    if np.any(std_arr < 0):
        raise ValueError("noise_std must be nonnegative")
    values = c_arr[:, None] * snr_values
    if np.any(std_arr > 0):
        if rng is None:
            raise ValueError("rng is required when noise_std > 0")
        values = values + std_arr[:, None] * rng.standard_normal(snr_values.shape)
    return QualityMatrix(np.maximum(values, 0.0), c_arr, std_arr)


def carp_probabilities(q_row: np.ndarray) -> np.ndarray:
    """Per-slot transmit probabilities proportional to the measured qualities.

    An all-zero row carries no information, so it degrades to uniform 1/S.
    """
    q_row = np.asarray(q_row, dtype=float)
    total = q_row.sum()
    if total <= 0.0:
        return np.full(q_row.shape, 1.0 / q_row.size)
    return q_row / total


def carp_select(rng: np.random.Generator, probs: np.ndarray, q_row: np.ndarray) -> set[int]:
    """One Bernoulli trial per slot; empty outcomes fall back to the best slot."""
    draws = rng.random(len(probs))
    chosen = np.nonzero(draws < probs)[0]
    if chosen.size == 0:
        return {int(np.argmax(q_row))}
    return set(chosen.tolist())


def sscp_select(q_row: np.ndarray, count: int) -> set[int]:
    """The `count` slots with the largest qualities, ties to the lower index."""
    q_row = np.asarray(q_row, dtype=float)
    if not (1 <= count <= q_row.size):
        raise ValueError("replica count must lie in [1, num_slots]")
    order = np.argsort(-q_row, kind="stable")
    return set(order[:count].tolist())


def crdsap_select(rng: np.random.Generator, num_slots: int) -> set[int]:
    """Two distinct slots, uniform over all unordered pairs."""
    if num_slots < 2:
        raise ValueError("crdsap needs at least 2 slots")
    first = int(rng.integers(num_slots))
    second = int(rng.integers(num_slots - 1))
    if second >= first:
        second += 1
    return {first, second}


def irsap_degree_pmf(num_slots: int) -> np.ndarray:
    """Replica-count distribution over degrees 2..S; sums to 1 by telescoping."""
    if num_slots < 2:
        raise ValueError("irsap needs at least 2 slots")
    degrees = np.arange(2, num_slots + 1)
    return (1.0 + 1.0 / (num_slots - 1)) / ((degrees - 1) * degrees)


def irsap_mean_degree(num_slots: int) -> float:
    """Expected replicas per device under the irsap degree distribution."""
    if num_slots < 2:
        raise ValueError("irsap needs at least 2 slots")
    return (1.0 + 1.0 / (num_slots - 1)) * sum(1.0 / (s - 1) for s in range(2, num_slots + 1))


def irsap_sample_degrees(
    rng: np.random.Generator, count: int, num_slots: int
) -> np.ndarray:
    """Draw replica counts by inverse CDF; the last bin absorbs float residue."""
    cdf = np.cumsum(irsap_degree_pmf(num_slots))
    return np.minimum(2 + np.searchsorted(cdf, rng.random(count), side="right"), num_slots)


def irsap_select(rng: np.random.Generator, num_slots: int) -> set[int]:
    """Degree from the irsap distribution, then that many distinct slots uniformly."""
    degree = int(irsap_sample_degrees(rng, 1, num_slots)[0])
    pool = list(range(num_slots))
    for i in range(degree):  # partial Fisher-Yates, O(degree)
        j = i + int(rng.integers(num_slots - i))
        pool[i], pool[j] = pool[j], pool[i]
    return set(pool[:degree])


def decide_access(
    policy: Policy,
    quality: QualityMatrix | None,
    rng: np.random.Generator,
    num_devices: int,
    num_slots: int,
) -> AccessDecision:
    """Apply one policy to all contending devices and return their slot sets.

    carp and sscp require a quality matrix; crdsap and irsap ignore one (with
    a warning) because their choices are independent of the channel.
    """
    if policy.requires_training:
        if quality is None:
            raise ValueError(f"policy {policy.kind!r} requires a quality matrix")
        q = quality.values
        if q.shape != (num_devices, num_slots):
            raise ValueError("quality matrix shape does not match (num_devices, num_slots)")
    elif quality is not None:
        warnings.warn(f"policy {policy.kind!r} ignores the quality matrix", stacklevel=2)

    if policy.kind == "carp":
        totals = q.sum(axis=1, keepdims=True)
        probs = np.where(totals > 0.0, q / np.where(totals > 0.0, totals, 1.0), 1.0 / num_slots)
        mask = rng.random((num_devices, num_slots)) < probs
        best = np.argmax(q, axis=1)
        sets = []
        for k in range(num_devices):
            idx = np.nonzero(mask[k])[0]
            sets.append(frozenset(idx.tolist()) if idx.size else frozenset((int(best[k]),)))
        return AccessDecision(num_slots, tuple(sets))

    if policy.kind == "sscp":
        if policy.sscp_s > num_slots:
            raise ValueError("sscp replica count exceeds the number of slots")
        order = np.argsort(-q, axis=1, kind="stable")[:, : policy.sscp_s]
        return AccessDecision(num_slots, tuple(frozenset(row.tolist()) for row in order))

    if policy.kind == "crdsap":
        if num_slots < 2:
            raise ValueError("crdsap needs at least 2 slots")
        first = rng.integers(0, num_slots, num_devices)
        second = rng.integers(0, num_slots - 1, num_devices)
        second = second + (second >= first)
        return AccessDecision(
            num_slots, tuple(frozenset((int(a), int(b))) for a, b in zip(first, second))
        )

    # irsap: degrees by inverse CDF, slot subsets as prefixes of random permutations
    degrees = irsap_sample_degrees(rng, num_devices, num_slots)
    perm = np.argsort(rng.random((num_devices, num_slots)), axis=1)
    return AccessDecision(
        num_slots,
        tuple(frozenset(perm[k, : degrees[k]].tolist()) for k in range(num_devices)),
    )
