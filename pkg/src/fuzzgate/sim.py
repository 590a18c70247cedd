"""Telemetry replay: load a CSV of sensor readings, gate each record through
the cascade, and compare transmission counts and energy against the
always-send baseline.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .cascade import Cascade, NOT_SEND, SEND
from .core import NoRuleFiredError
from .energy import EnergyMode, packet_energy

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"


class TelemetryError(Exception):
    pass


class MissingColumnError(TelemetryError):
    def __init__(self, columns: list[str], path):
        self.columns = columns
        super().__init__(f"{path}: header is missing mapped columns {columns}")


class RowError(TelemetryError):
    def __init__(self, row: int, field_name: str, message: str):
        self.row = row
        self.field_name = field_name
        super().__init__(f"row {row}, field '{field_name}': {message}")


class MismatchedRunsError(TelemetryError):
    """Comparison between results over different record sets."""


@dataclass(frozen=True)
class ColumnMapping:
    timestamp: str = "date"
    temperature: str = "T1"
    humidity: str = "RH_1"
    appliance_energy: str = "Appliances"
    humidity_scale: str = "percent"  # "percent" | "fraction"

    def __post_init__(self):
        names = (self.timestamp, self.temperature, self.humidity,
                 self.appliance_energy)
        if len(set(names)) != 4:
            raise ValueError(f"mapped column names must be distinct: {names}")
        if self.humidity_scale not in ("percent", "fraction"):
            raise ValueError(f"unknown humidity scale {self.humidity_scale!r}")


@dataclass(frozen=True)
class TelemetryRecord:
    timestamp: datetime
    temperature: float
    humidity: float  # relative humidity as a fraction in [0, 1]
    appliance_energy: float  # Wh for the interval

    @property
    def time_of_day(self) -> float:
        """Fractional hours since midnight, on [0, 24)."""
        t = self.timestamp
        return t.hour + t.minute / 60 + t.second / 3600


@dataclass(frozen=True)
class LoadReport:
    loaded: int
    skipped: int
    skipped_rows: tuple[int, ...]


def load_telemetry(path: str | Path, mapping: ColumnMapping | None = None,
                   policy: str = "strict"
                   ) -> tuple[list[TelemetryRecord], LoadReport]:
    """Read records in file order from an RFC-4180-style CSV with a header.

    policy="strict" raises RowError on the first bad row; "skip-bad" counts
    and skips bad rows instead. Humidity is divided by 100 under the percent
    scale.
    """
    if policy not in ("strict", "skip-bad"):
        raise ValueError(f"unknown policy {policy!r}")
    mapping = mapping or ColumnMapping()
    records: list[TelemetryRecord] = []
    skipped_rows: list[int] = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        wanted = [mapping.timestamp, mapping.temperature, mapping.humidity,
                  mapping.appliance_energy]
        missing = [c for c in wanted if c not in header]
        if missing:
            raise MissingColumnError(missing, path)
        for rownum, row in enumerate(reader, start=2):  # row 1 is the header
            try:
                records.append(_parse_row(row, mapping, rownum))
            except RowError:
                if policy == "strict":
                    raise
                skipped_rows.append(rownum)
    return records, LoadReport(len(records), len(skipped_rows), tuple(skipped_rows))


def _parse_row(row: dict, mapping: ColumnMapping, rownum: int) -> TelemetryRecord:
    def number(column: str) -> float:
        raw = (row.get(column) or "").strip().strip('"')
        try:
            value = float(raw)
        except ValueError:
            raise RowError(rownum, column, f"not a number: {raw!r}") from None
        if not math.isfinite(value):
            raise RowError(rownum, column, f"not finite: {raw!r}")
        return value

    raw_ts = (row.get(mapping.timestamp) or "").strip().strip('"')
    try:
        timestamp = datetime.strptime(raw_ts, TIMESTAMP_FORMAT)
    except ValueError:
        raise RowError(rownum, mapping.timestamp,
                       f"not a timestamp: {raw_ts!r}") from None
    humidity = number(mapping.humidity)
    if mapping.humidity_scale == "percent":
        humidity /= 100.0
    return TelemetryRecord(
        timestamp=timestamp,
        temperature=number(mapping.temperature),
        humidity=humidity,
        appliance_energy=number(mapping.appliance_energy),
    )


@dataclass(frozen=True)
class Decision:
    index: int
    timestamp: datetime
    temperature: float
    humidity: float
    appliance_energy: float
    time_of_day: float
    apparent_temperature: float | None
    appliance_usage_time: float | None
    score: float | None
    label: str
    clamped: bool = False
    failsafe: bool = False


@dataclass(frozen=True)
class SimulationResult:
    total_records: int
    transmissions: int
    suppressed: int
    skipped: int
    failsafe_sends: int
    clamped_records: int
    joules_per_packet: float
    total_joules: float
    decisions: tuple[Decision, ...]
    cumulative_joules: tuple[float, ...]
    records_digest: str


def _digest(records: list[TelemetryRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        h.update(f"{r.timestamp.isoformat()}|{r.temperature!r}|{r.humidity!r}|"
                 f"{r.appliance_energy!r}\n".encode())
    return h.hexdigest()


def run_traditional(records: list[TelemetryRecord], mode: EnergyMode,
                    skipped: int = 0) -> SimulationResult:
    """Always-send baseline: one transmission and one energy step per record."""
    per_packet = packet_energy(mode)
    decisions = []
    cumulative = []
    total = 0.0
    for i, record in enumerate(records):
        total += per_packet
        cumulative.append(total)
        decisions.append(Decision(
            index=i, timestamp=record.timestamp, temperature=record.temperature,
            humidity=record.humidity, appliance_energy=record.appliance_energy,
            time_of_day=record.time_of_day, apparent_temperature=None,
            appliance_usage_time=None, score=None, label=SEND))
    return SimulationResult(
        total_records=len(records) + skipped,
        transmissions=len(records),
        suppressed=0,
        skipped=skipped,
        failsafe_sends=0,
        clamped_records=0,
        joules_per_packet=per_packet,
        total_joules=len(records) * per_packet,
        decisions=tuple(decisions),
        cumulative_joules=tuple(cumulative),
        records_digest=_digest(records),
    )


def run_fuzzy(records: list[TelemetryRecord], cascade: Cascade, mode: EnergyMode,
              failsafe: str = "send", skipped: int = 0) -> SimulationResult:
    """Gate each record through the cascade; transmit only on a Send label.

    Out-of-universe readings are clamped to the nearest universe bound and
    counted. When no rule fires at some node, failsafe="send" transmits the
    record anyway (monitoring must not silently drop data); "drop" suppresses.
    """
    if failsafe not in ("send", "drop"):
        raise ValueError(f"unknown failsafe policy {failsafe!r}")
    per_packet = packet_energy(mode)
    decisions = []
    cumulative = []
    transmissions = 0
    failsafe_sends = 0
    clamped_records = 0
    total = 0.0
    for i, record in enumerate(records):
        inputs = {
            "temperature": record.temperature,
            "humidity": record.humidity,
            "appliance_energy": record.appliance_energy,
            "time_of_day": record.time_of_day,
        }
        try:
            trace = cascade.evaluate(inputs, clamp=True)
            send = trace.label == SEND
            decision = Decision(
                index=i, timestamp=record.timestamp,
                temperature=record.temperature, humidity=record.humidity,
                appliance_energy=record.appliance_energy,
                time_of_day=record.time_of_day,
                apparent_temperature=trace.intermediates[cascade.fs1.output.name],
                appliance_usage_time=trace.intermediates[cascade.fs2.output.name],
                score=trace.score, label=trace.label,
                clamped=bool(trace.clamped))
        except NoRuleFiredError:
            send = failsafe == "send"
            failsafe_sends += int(send)
            decision = Decision(
                index=i, timestamp=record.timestamp,
                temperature=record.temperature, humidity=record.humidity,
                appliance_energy=record.appliance_energy,
                time_of_day=record.time_of_day,
                apparent_temperature=None, appliance_usage_time=None,
                score=None, label=SEND if send else NOT_SEND,
                failsafe=True)
        clamped_records += int(decision.clamped)
        if send:
            transmissions += 1
            total += per_packet
        cumulative.append(total)
        decisions.append(decision)
    return SimulationResult(
        total_records=len(records) + skipped,
        transmissions=transmissions,
        suppressed=len(records) - transmissions,
        skipped=skipped,
        failsafe_sends=failsafe_sends,
        clamped_records=clamped_records,
        joules_per_packet=per_packet,
        total_joules=transmissions * per_packet,
        decisions=tuple(decisions),
        cumulative_joules=tuple(cumulative),
        records_digest=_digest(records),
    )


@dataclass(frozen=True)
class ComparisonReport:
    records: int
    traditional_transmissions: int
    fuzzy_transmissions: int
    traditional_joules: float
    fuzzy_joules: float
    reduction_pct: float
    count_reduction_pct: float
    cumulative: tuple[tuple[float, float], ...]  # (traditional, fuzzy) per record


def compare(traditional: SimulationResult, fuzzy: SimulationResult
            ) -> ComparisonReport:
    """Side-by-side report; both results must cover the same record set."""
    if (traditional.records_digest != fuzzy.records_digest
            or len(traditional.decisions) != len(fuzzy.decisions)):
        raise MismatchedRunsError(
            "cannot compare simulation results over different record sets")
    if traditional.total_joules > 0:
        reduction = (1.0 - fuzzy.total_joules / traditional.total_joules) * 100.0
    else:
        reduction = 0.0
    if traditional.transmissions > 0:
        count_reduction = (1.0 - fuzzy.transmissions / traditional.transmissions) * 100.0
    else:
        count_reduction = 0.0
    return ComparisonReport(
        records=len(traditional.decisions),
        traditional_transmissions=traditional.transmissions,
        fuzzy_transmissions=fuzzy.transmissions,
        traditional_joules=traditional.total_joules,
        fuzzy_joules=fuzzy.total_joules,
        reduction_pct=reduction,
        count_reduction_pct=count_reduction,
        cumulative=tuple(zip(traditional.cumulative_joules,
                             fuzzy.cumulative_joules)),
    )
