"""Command-line front door: `fuzzgate check|eval|simulate`.

Exit codes are stable across subcommands: 0 success, 1 domain/validation
error, 2 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cascade as cascade_mod
from .cascade import (CascadeBuildError, bundled_fis_dir, build_cascade,
                      load_manifest)
from .core import FuzzyError, NoRuleFiredError, OutOfUniverseError
from .dsl import load_subsystem
from .energy import EnergyMode, PacketSpec, RadioSpec
from .sim import ColumnMapping, TelemetryError, compare, load_telemetry, \
    run_fuzzy, run_traditional

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2

BUNDLED_FILES = ("fs1_apparent_temperature.fis.txt",
                 "fs2_appliance_usage.fis.txt",
                 "fs3_sending_decision.fis.txt")


def _add_fis_options(parser: argparse.ArgumentParser):
    parser.add_argument("--fis1", help="FS1 definition file (apparent temperature)")
    parser.add_argument("--fis2", help="FS2 definition file (appliance usage time)")
    parser.add_argument("--fis3", help="FS3 definition file (sending decision)")
    parser.add_argument("--manifest", help="cascade manifest file")
    parser.add_argument("--threshold", type=float, default=None,
                        help="send/not-send decision threshold (default 50)")


def _add_energy_options(parser: argparse.ArgumentParser):
    parser.add_argument("--energy-mode", choices=["physical", "calibrated"],
                        default="calibrated")
    parser.add_argument("--per-packet-joules", type=float, default=None,
                        help="calibrated mode: joules per packet")
    parser.add_argument("--current", type=float, default=0.280,
                        help="physical mode: transmit current in amperes")
    parser.add_argument("--voltage", type=float, default=5.0,
                        help="physical mode: supply voltage in volts")
    parser.add_argument("--header-bits", type=int, default=288)
    parser.add_argument("--data-bits", type=int, default=960)


def _add_mapping_options(parser: argparse.ArgumentParser):
    parser.add_argument("--map-timestamp", default="date")
    parser.add_argument("--map-temp", default="T1")
    parser.add_argument("--map-humidity", default="RH_1")
    parser.add_argument("--map-energy", default="Appliances")
    parser.add_argument("--humidity-scale", choices=["percent", "fraction"],
                        default="percent")


def _build_energy_mode(args) -> EnergyMode:
    if args.energy_mode == "physical":
        radio = RadioSpec(current_a=args.current, voltage_v=args.voltage)
        packet = PacketSpec(header_bits=args.header_bits, data_bits=args.data_bits)
        return EnergyMode.physical(radio, packet)
    if args.per_packet_joules is not None:
        return EnergyMode.calibrated(args.per_packet_joules)
    return EnergyMode.calibrated()


def _build_cascade(args):
    threshold = args.threshold
    if args.manifest:
        c = load_manifest(args.manifest)
        if threshold is not None:
            c = build_cascade(c.fs1, c.fs2, c.fs3, externals=c.externals,
                              threshold=threshold)
        return c
    fis_dir = bundled_fis_dir()
    paths = [args.fis1 or fis_dir / BUNDLED_FILES[0],
             args.fis2 or fis_dir / BUNDLED_FILES[1],
             args.fis3 or fis_dir / BUNDLED_FILES[2]]
    subsystems = []
    for path in paths:
        subsystem, diags = load_subsystem(path)
        if subsystem is None:
            errors = "\n".join(d.format(str(path)) for d in diags)
            raise CascadeBuildError(f"invalid definition file:\n{errors}")
        subsystems.append(subsystem)
    return build_cascade(*subsystems,
                         threshold=threshold if threshold is not None
                         else cascade_mod.DEFAULT_THRESHOLD)


def _build_mapping(args) -> ColumnMapping:
    return ColumnMapping(timestamp=args.map_timestamp, temperature=args.map_temp,
                         humidity=args.map_humidity,
                         appliance_energy=args.map_energy,
                         humidity_scale=args.humidity_scale)


def cmd_check(args) -> int:
    paths = [args.fis1, args.fis2, args.fis3]
    if not any(paths) and not args.paths:
        fis_dir = bundled_fis_dir()
        args.paths = [str(fis_dir / name) for name in BUNDLED_FILES]
    targets = [p for p in paths if p] + list(args.paths)
    had_error = False
    rule_counts = []
    for path in targets:
        try:
            subsystem, diags = load_subsystem(path)
        except OSError as exc:
            print(f"{path}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
        for d in diags:
            print(d.format(str(path)))
        if subsystem is None:
            had_error = True
        else:
            rule_counts.append(len(subsystem.rules))
            print(f"{path}: ok, system '{subsystem.name}', "
                  f"{len(subsystem.inputs)} inputs, {len(subsystem.rules)} rules")
    if not had_error and len(rule_counts) > 1:
        print("/".join(str(n) for n in rule_counts) + " rules")
    return EXIT_DOMAIN if had_error else EXIT_OK


def cmd_eval(args) -> int:
    try:
        c = _build_cascade(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CascadeBuildError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    inputs = {"temperature": args.temp, "humidity": args.humidity,
              "appliance_energy": args.energy, "time_of_day": args.time}
    try:
        trace = c.evaluate(inputs, clamp=args.clamp)
    except (OutOfUniverseError, NoRuleFiredError, FuzzyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.json:
        payload = {
            "inputs": trace.inputs,
            "clamped": list(trace.clamped),
            "intermediates": trace.intermediates,
            "score": trace.score,
            "label": trace.label,
            "fired_rules": [
                {"node": f.node,
                 "if": [{"variable": v, "term": t} for v, t in f.antecedents],
                 "then": {"variable": f.consequent[0], "term": f.consequent[1]},
                 "activation": f.activation}
                for f in trace.fired],
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print("inputs:")
    for name, value in trace.inputs.items():
        flag = "  (clamped)" if name in trace.clamped else ""
        print(f"  {name} = {value}{flag}")
    print("intermediates:")
    for name, value in trace.intermediates.items():
        print(f"  {name} = {value:.4f}")
    print("fired rules:")
    for f in trace.fired:
        clause = " and ".join(f"{v} is {t}" for v, t in f.antecedents)
        print(f"  [{f.node}] if {clause} then {f.consequent[0]} is "
              f"{f.consequent[1]}  (activation {f.activation:.4f})")
    print(f"score: {trace.score:.4f}")
    print(f"label: {'Send' if trace.label == 'send' else 'NotSend'}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        c = _build_cascade(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CascadeBuildError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    mode = _build_energy_mode(args)
    mapping = _build_mapping(args)
    policy = "strict" if args.strict else "skip-bad"
    try:
        records, report = load_telemetry(args.dataset, mapping, policy)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TelemetryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

    traditional = run_traditional(records, mode, skipped=report.skipped)
    fuzzy = run_fuzzy(records, c, mode, failsafe=args.failsafe,
                      skipped=report.skipped)
    comparison = compare(traditional, fuzzy)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {
        "records": comparison.records,
        "skipped_rows": report.skipped,
        "traditional": {
            "transmissions": traditional.transmissions,
            "total_joules": traditional.total_joules,
        },
        "fuzzy": {
            "transmissions": fuzzy.transmissions,
            "suppressed": fuzzy.suppressed,
            "failsafe_sends": fuzzy.failsafe_sends,
            "clamped_records": fuzzy.clamped_records,
            "total_joules": fuzzy.total_joules,
        },
        "joules_per_packet": fuzzy.joules_per_packet,
        "energy_reduction_pct": comparison.reduction_pct,
        "transmission_reduction_pct": comparison.count_reduction_pct,
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    with open(out_dir / "decisions.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("index,timestamp,temperature,humidity,appliance_energy,"
                 "time_of_day,apparent_temperature,appliance_usage_time,"
                 "score,label,clamped,failsafe\n")
        for d in fuzzy.decisions:
            def opt(x):
                return "" if x is None else repr(x)
            fh.write(f"{d.index},{d.timestamp:%Y-%m-%d %H:%M:%S},"
                     f"{d.temperature!r},{d.humidity!r},{d.appliance_energy!r},"
                     f"{d.time_of_day!r},{opt(d.apparent_temperature)},"
                     f"{opt(d.appliance_usage_time)},{opt(d.score)},{d.label},"
                     f"{int(d.clamped)},{int(d.failsafe)}\n")

    with open(out_dir / "cumulative.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("index,traditional_joules,fuzzy_joules\n")
        for i, (t, f) in enumerate(comparison.cumulative):
            fh.write(f"{i},{t!r},{f!r}\n")

    print(f"{'':<28}{'Traditional':>14}{'Fuzzy':>14}")
    print(f"{'Total transmissions':<28}{traditional.transmissions:>14}"
          f"{fuzzy.transmissions:>14}")
    print(f"{'Total energy (J)':<28}{traditional.total_joules:>14.1f}"
          f"{fuzzy.total_joules:>14.1f}")
    print(f"Energy reduction: {comparison.reduction_pct:.1f}%")
    if report.skipped:
        print(f"Skipped rows: {report.skipped}")
    if fuzzy.clamped_records:
        print(f"Clamped records: {fuzzy.clamped_records}")
    if fuzzy.failsafe_sends:
        print(f"Fail-safe sends: {fuzzy.failsafe_sends}")
    print(f"Reports written to {out_dir}/")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzgate",
        description="Fuzzy transmission gate for IoT temperature/humidity "
                    "telemetry: validate rule files, trace single decisions, "
                    "and replay datasets to compare energy use.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and validate definition files")
    p_check.add_argument("paths", nargs="*", help="definition files "
                         "(defaults to the bundled three)")
    p_check.add_argument("--fis1")
    p_check.add_argument("--fis2")
    p_check.add_argument("--fis3")
    p_check.set_defaults(func=cmd_check)

    p_eval = sub.add_parser("eval", help="evaluate one reading through the cascade")
    _add_fis_options(p_eval)
    p_eval.add_argument("--temp", type=float, required=True, help="degrees C")
    p_eval.add_argument("--humidity", type=float, required=True,
                        help="relative humidity fraction in [0, 1]")
    p_eval.add_argument("--energy", type=float, required=True,
                        help="appliance energy in Wh")
    p_eval.add_argument("--time", type=float, required=True,
                        help="time of day in fractional hours [0, 24]")
    p_eval.add_argument("--clamp", action="store_true",
                        help="clamp out-of-universe inputs instead of failing")
    p_eval.add_argument("--json", action="store_true",
                        help="emit the decision trace as JSON")
    p_eval.set_defaults(func=cmd_eval)

    p_sim = sub.add_parser("simulate",
                           help="replay a telemetry CSV and compare approaches")
    _add_fis_options(p_sim)
    _add_energy_options(p_sim)
    _add_mapping_options(p_sim)
    p_sim.add_argument("--dataset", required=True, help="telemetry CSV path")
    p_sim.add_argument("--failsafe", choices=["send", "drop"], default="send")
    strictness = p_sim.add_mutually_exclusive_group()
    strictness.add_argument("--strict", action="store_true", default=False)
    strictness.add_argument("--skip-bad", dest="strict", action="store_false")
    p_sim.add_argument("--out", default="out", help="report output directory")
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
