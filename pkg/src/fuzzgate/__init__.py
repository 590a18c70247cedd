"""Fuzzy transmission gate for IoT temperature/humidity telemetry."""

from .core import (AggregatedOutput, FuzzyError, FuzzyRule, FuzzySubsystem,
                   LinguisticVariable, MembershipFunction, NoRuleFiredError,
                   OutOfUniverseError, UnknownTermError, defuzzify_centroid,
                   fuzzify, infer, membership_degree, rule_activation)
from .cascade import (Cascade, CascadeBuildError, DecisionTrace,
                      WiringMismatchError, build_cascade, bundled_cascade,
                      decide, load_manifest)
from .energy import (EnergyMode, PacketSpec, RadioSpec, packet_energy,
                     packet_time, total_energy)
from .sim import (ColumnMapping, ComparisonReport, SimulationResult,
                  TelemetryRecord, compare, load_telemetry, run_fuzzy,
                  run_traditional)

__version__ = "0.1.0"
