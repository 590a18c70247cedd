"""Per-packet transmission time and energy.

Two modes: Physical computes E = i * v * t_p from radio constants and packet
sizes; Calibrated uses a fixed joules-per-packet constant so headline totals
from a reference run can be reproduced without knowing the packet layout.
"""
from __future__ import annotations

from dataclasses import dataclass

#: Reference run: 957.8 J over 19,735 always-send transmissions, 844.9 J
#: over 17,410 gated transmissions.
REFERENCE_TOTAL_JOULES = 957.8
REFERENCE_TRANSMISSIONS = 19735
REFERENCE_GATED_JOULES = 844.9
REFERENCE_GATED_TRANSMISSIONS = 17410

#: The two reference totals imply per-packet constants differing in the 5th
#: decimal (957.8/19735 vs 844.9/17410); their midpoint reproduces both
#: totals within 0.05 J, which neither endpoint does alone.
REFERENCE_JOULES_PER_PACKET = (
    REFERENCE_TOTAL_JOULES / REFERENCE_TRANSMISSIONS
    + REFERENCE_GATED_JOULES / REFERENCE_GATED_TRANSMISSIONS) / 2.0


@dataclass(frozen=True)
class RadioSpec:
    """IEEE 802.11g-style transmit characteristics."""

    current_a: float = 0.280
    voltage_v: float = 5.0
    header_rate_bps: float = 6e6
    data_rate_bps: float = 54e6

    def __post_init__(self):
        for name in ("current_a", "voltage_v", "header_rate_bps", "data_rate_bps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class PacketSpec:
    """Packet layout in bits. Defaults hold one sensor reading."""

    header_bits: int = 288
    data_bits: int = 960

    def __post_init__(self):
        if self.header_bits < 0 or self.data_bits < 0:
            raise ValueError("packet sizes must be non-negative")


def packet_time(radio: RadioSpec, packet: PacketSpec) -> float:
    """Seconds to put one packet on the air: header and payload at their rates."""
    return packet.header_bits / radio.header_rate_bps + \
        packet.data_bits / radio.data_rate_bps


@dataclass(frozen=True)
class EnergyMode:
    """Either physical (radio + packet) or calibrated (fixed J/packet)."""

    kind: str  # "physical" | "calibrated"
    radio: RadioSpec | None = None
    packet: PacketSpec | None = None
    joules_per_packet: float | None = None

    @classmethod
    def physical(cls, radio: RadioSpec | None = None,
                 packet: PacketSpec | None = None) -> "EnergyMode":
        return cls("physical", radio or RadioSpec(), packet or PacketSpec())

    @classmethod
    def calibrated(cls, joules_per_packet: float = REFERENCE_JOULES_PER_PACKET
                   ) -> "EnergyMode":
        if joules_per_packet <= 0:
            raise ValueError("calibrated joules-per-packet must be strictly positive")
        return cls("calibrated", joules_per_packet=joules_per_packet)


def packet_energy(mode: EnergyMode) -> float:
    """Joules to transmit one packet."""
    if mode.kind == "calibrated":
        return mode.joules_per_packet
    t_p = packet_time(mode.radio, mode.packet)
    return mode.radio.current_a * mode.radio.voltage_v * t_p


def total_energy(mode: EnergyMode, n: int) -> float:
    """Joules for n packets under a uniform mode."""
    if n < 0:
        raise ValueError("packet count must be non-negative")
    return n * packet_energy(mode)
