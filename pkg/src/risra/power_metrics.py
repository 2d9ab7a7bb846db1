"""Frame power consumption and the throughput / energy-efficiency metrics.

Power has three additive parts per frame: the AP (a static floor plus, when
the training block is transmitted, one PA term per training slot), the surface
(one phase-shifter per element), and each contending device (a static floor
plus one PA term per transmitted replica). Throughput divides the decoded
count by the frame duration; policies that skip training also skip the
training block in that duration. Energy efficiency is throughput over power.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(slots=True)
class PowerParams:
    """Hardware power model: PA inverse efficiencies, transmit and static powers."""

    ap_pa_inverse_eff: float
    ap_tx_power_w: float
    ap_static_w: float
    mtd_pa_inverse_eff: float
    mtd_tx_power_w: float
    mtd_static_w: float
    phase_shifter_w: float
    phase_shifter_bits: int = 3

    def __post_init__(self) -> None:
        if self.ap_pa_inverse_eff <= 1 or self.mtd_pa_inverse_eff <= 1:
            raise ValueError("PA inverse efficiencies must exceed 1")
        for value in (
            self.ap_tx_power_w,
            self.ap_static_w,
            self.mtd_tx_power_w,
            self.mtd_static_w,
            self.phase_shifter_w,
        ):
            if value <= 0:
                raise ValueError("powers must be strictly positive")


@dataclass(slots=True)
class FrameTiming:
    """Slot count, access-slot duration and training/access slot duration ratio."""

    access_slot_s: float
    training_ratio: float
    slots: int

    def __post_init__(self) -> None:
        if self.access_slot_s <= 0:
            raise ValueError("access_slot_s must be positive")
        if self.training_ratio < 0:
            raise ValueError("training_ratio must be nonnegative")
        if self.slots < 1:
            raise ValueError("slots must be >= 1")


@dataclass(slots=True)
class FrameMetrics:
    """One frame's decoded count, throughput, power breakdown and efficiency."""

    successes: int
    throughput_pps: float
    power_w: float
    power_ap_w: float
    power_ris_w: float
    power_mtd_w: float
    energy_efficiency: float


def ap_power(params: PowerParams, slots: int, training_used: bool) -> float:
    """AP power: static floor, plus one PA term per training slot when training runs."""
    if training_used:
        return slots * params.ap_pa_inverse_eff * params.ap_tx_power_w + params.ap_static_w
    return params.ap_static_w


def ris_power(n_elements: int, phase_shifter_w: float) -> float:
    """Surface power: one phase-shifter per reflecting element."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    return n_elements * phase_shifter_w


def mtd_power(params: PowerParams, replica_count: int) -> float:
    """One contending device's power: PA term per replica plus the static floor."""
    if replica_count < 1:
        raise ValueError("replica_count must be >= 1")
    return replica_count * params.mtd_pa_inverse_eff * params.mtd_tx_power_w + params.mtd_static_w


def total_power(ap_w: float, ris_w: float, mtd_w_list: Sequence[float]) -> float:
    """Frame power consumed by the whole system."""
    return ap_w + ris_w + float(sum(mtd_w_list))


def throughput(successes: int, timing: FrameTiming, training_used: bool) -> float:
    """Decoded packets per second over the frame; r drops to 0 without training."""
    if successes < 0:
        raise ValueError("successes must be nonnegative")
    r_eff = timing.training_ratio if training_used else 0.0
    return successes / ((1.0 + r_eff) * timing.slots * timing.access_slot_s)


def energy_efficiency(throughput_pps: float, power_w: float) -> float:
    """Packets per second per watt."""
    if power_w <= 0:
        raise ValueError("power must be strictly positive")
    return throughput_pps / power_w


def compute_frame_metrics(
    params: PowerParams,
    timing: FrameTiming,
    n_elements: int,
    replica_counts: np.ndarray,
    successes: int,
    power_training_used: bool,
    frame_training_used: bool,
) -> FrameMetrics:
    """Assemble one frame's power breakdown, throughput and energy efficiency.

    The two flags usually coincide but are separate knobs: power_training_used
    says whether the AP's training transmissions are charged, while
    frame_training_used says whether the frame duration includes the training
    block (it never does for policies that skip training).
    """
    p_ap = ap_power(params, timing.slots, power_training_used)
    p_ris = ris_power(n_elements, params.phase_shifter_w)
    counts = np.asarray(replica_counts)
    p_mtd = float(
        (counts * (params.mtd_pa_inverse_eff * params.mtd_tx_power_w)).sum()
        + counts.size * params.mtd_static_w
    )
    power = p_ap + p_ris + p_mtd
    tput = throughput(successes, timing, frame_training_used)
    return FrameMetrics(
        successes=successes,
        throughput_pps=tput,
        power_w=power,
        power_ap_w=p_ap,
        power_ris_w=p_ris,
        power_mtd_w=p_mtd,
        energy_efficiency=energy_efficiency(tput, power),
    )
