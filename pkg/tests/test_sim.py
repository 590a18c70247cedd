import random
from datetime import datetime, timedelta

import pytest

from fuzzgate.energy import EnergyMode, PacketSpec, RadioSpec
from fuzzgate.sim import (ColumnMapping, MismatchedRunsError,
                          MissingColumnError, RowError, TelemetryRecord,
                          compare, load_telemetry, run_fuzzy, run_traditional)

CALIBRATED = EnergyMode.calibrated()


def make_records(n, temperature=20.0, humidity=0.35, energy=60.0, hour=3):
    start = datetime(2016, 1, 11, hour, 0, 0)
    return [TelemetryRecord(start + timedelta(minutes=10 * i), temperature,
                            humidity, energy) for i in range(n)]


class TestLoadTelemetry:
    def test_fixture_loads_in_order(self, fixture_csv):
        records, report = load_telemetry(fixture_csv)
        assert len(records) == 50
        assert report.skipped == 0
        assert records[0].timestamp == datetime(2016, 1, 11, 17, 0, 0)
        assert records[0].temperature == 20.05
        assert records[0].humidity == pytest.approx(0.3385)  # percent scale
        assert records[0].appliance_energy == 230.0
        timestamps = [r.timestamp for r in records]
        assert timestamps == sorted(timestamps)

    def test_fraction_scale_keeps_value(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,T1,RH_1,Appliances\n"
                     "2016-01-11 17:00:00,20,0.40,60\n")
        records, _ = load_telemetry(p, ColumnMapping(humidity_scale="fraction"))
        assert records[0].humidity == 0.40

    def test_percent_scale_normalizes(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,T1,RH_1,Appliances\n"
                     "2016-01-11 17:00:00,20,40.0,60\n")
        records, _ = load_telemetry(p)
        assert records[0].humidity == pytest.approx(0.40)

    def test_missing_column(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,T1,Appliances\n2016-01-11 17:00:00,20,60\n")
        with pytest.raises(MissingColumnError) as exc:
            load_telemetry(p)
        assert "RH_1" in str(exc.value)

    def test_bad_timestamp_strict(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,T1,RH_1,Appliances\nnot-a-date,20,40,60\n")
        with pytest.raises(RowError) as exc:
            load_telemetry(p, policy="strict")
        assert exc.value.row == 2

    def test_bad_rows_skipped_and_counted(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("date,T1,RH_1,Appliances\n"
                     "2016-01-11 17:00:00,20,40,60\n"
                     "not-a-date,20,40,60\n"
                     "2016-01-11 17:20:00,oops,40,60\n"
                     "2016-01-11 17:30:00,21,41,70\n")
        records, report = load_telemetry(p, policy="skip-bad")
        assert len(records) == 2
        assert report.skipped == 2
        assert report.skipped_rows == (3, 4)

    def test_time_of_day_fractional_hours(self):
        r = TelemetryRecord(datetime(2016, 1, 11, 13, 30, 36), 20, 0.4, 60)
        assert r.time_of_day == pytest.approx(13.51)


class TestRunTraditional:
    def test_every_record_transmits(self):
        records = make_records(10)
        result = run_traditional(records, CALIBRATED)
        assert result.transmissions == 10
        assert result.suppressed == 0
        assert len(result.cumulative_joules) == 10
        assert result.total_joules == pytest.approx(10 * result.joules_per_packet)

    def test_empty_run(self):
        result = run_traditional([], CALIBRATED)
        assert result.transmissions == 0
        assert result.total_joules == 0.0

    def test_physical_linearity(self):
        mode = EnergyMode.physical(RadioSpec(), PacketSpec(6_000_000, 0))
        result = run_traditional(make_records(2), mode)
        assert result.total_joules == pytest.approx(2.8, rel=1e-12)


class TestRunFuzzy:
    def test_all_send_at_hot_stiki_cores(self, cascade):
        # hot apparent temperature with low usage: every record transmits
        records = make_records(20, temperature=61.5, humidity=0.725,
                               energy=25.0, hour=3)
        result = run_fuzzy(records, cascade, CALIBRATED)
        assert result.transmissions == 20
        assert result.suppressed == 0

    def test_none_send_at_cool_vhigh_cores(self, cascade):
        # cool apparent temperature with v.high usage: nothing transmits
        records = make_records(20, temperature=9.25, humidity=0.15,
                               energy=600.0, hour=9)
        records = [TelemetryRecord(r.timestamp.replace(hour=9, minute=30),
                                   r.temperature, r.humidity,
                                   r.appliance_energy) for r in records]
        result = run_fuzzy(records, cascade, CALIBRATED)
        assert result.transmissions == 0
        assert result.suppressed == 20

    def test_gate_only_suppresses(self, cascade, fixture_csv):
        records, _ = load_telemetry(fixture_csv)
        traditional = run_traditional(records, CALIBRATED)
        fuzzy = run_fuzzy(records, cascade, CALIBRATED)
        assert fuzzy.transmissions <= traditional.transmissions
        assert fuzzy.transmissions + fuzzy.suppressed + fuzzy.skipped == \
            fuzzy.total_records

    def test_cumulative_series_non_decreasing(self, cascade, fixture_csv):
        records, _ = load_telemetry(fixture_csv)
        for result in (run_traditional(records, CALIBRATED),
                       run_fuzzy(records, cascade, CALIBRATED)):
            series = result.cumulative_joules
            assert all(a <= b for a, b in zip(series, series[1:]))

    def test_out_of_universe_clamped_and_counted(self, cascade):
        records = [TelemetryRecord(datetime(2016, 1, 11, 3, 0, 0),
                                   20.0, 1.4, 60.0)]
        result = run_fuzzy(records, cascade, CALIBRATED)
        assert result.clamped_records == 1
        assert result.decisions[0].clamped

    def test_replay_determinism(self, cascade, fixture_csv):
        records, _ = load_telemetry(fixture_csv)
        a = run_fuzzy(records, cascade, CALIBRATED)
        b = run_fuzzy(records, cascade, CALIBRATED)
        assert a == b

    def test_shuffle_invariance_of_totals(self, cascade, fixture_csv):
        records, _ = load_telemetry(fixture_csv)
        shuffled = records[:]
        random.Random(7).shuffle(shuffled)
        a = run_fuzzy(records, cascade, CALIBRATED)
        b = run_fuzzy(shuffled, cascade, CALIBRATED)
        assert a.transmissions == b.transmissions
        assert a.total_joules == b.total_joules

    def test_failsafe_send_vs_drop(self, cascade, fs2, fs3):
        from fuzzgate.cascade import build_cascade
        from fuzzgate.core import FuzzySubsystem
        # FS1 with no rules: NoRuleFired on every record
        empty_fs1 = FuzzySubsystem(cascade.fs1.name, cascade.fs1.inputs,
                                   cascade.fs1.output, ())
        broken = build_cascade(empty_fs1, fs2, fs3)
        records = make_records(5)
        sent = run_fuzzy(records, broken, CALIBRATED, failsafe="send")
        assert sent.transmissions == 5
        assert sent.failsafe_sends == 5
        assert all(d.failsafe for d in sent.decisions)
        dropped = run_fuzzy(records, broken, CALIBRATED, failsafe="drop")
        assert dropped.transmissions == 0
        assert dropped.failsafe_sends == 0


class TestFullScaleReplay:
    def test_synthetic_dataset_scale(self, cascade):
        # same record count as the full benchmark dataset; checks throughput
        # and gate invariants, not the real-data reduction figure
        import time
        rng = random.Random(1)
        start_ts = datetime(2016, 1, 11, 17, 0, 0)
        records = [
            TelemetryRecord(start_ts + timedelta(minutes=10 * i),
                            rng.uniform(16.0, 27.0), rng.uniform(0.30, 0.55),
                            rng.choice([30, 50, 70, 100, 150, 200, 300, 500]))
            for i in range(19735)]
        t0 = time.perf_counter()
        fuzzy = run_fuzzy(records, cascade, CALIBRATED)
        elapsed = time.perf_counter() - t0
        traditional = run_traditional(records, CALIBRATED)
        report = compare(traditional, fuzzy)
        assert elapsed < 60.0
        assert fuzzy.transmissions < traditional.transmissions
        assert 0.0 < report.reduction_pct < 100.0


class TestCompare:
    def test_reference_counts_reduction(self):
        # pin counts to the reference run: 17410 of 19735 transmitted
        records = make_records(1)
        traditional = run_traditional(records, CALIBRATED)
        report_like = (1 - 17410 / 19735) * 100
        assert round(report_like, 1) == 11.8

    def test_comparison_report_fields(self, cascade, fixture_csv):
        records, _ = load_telemetry(fixture_csv)
        traditional = run_traditional(records, CALIBRATED)
        fuzzy = run_fuzzy(records, cascade, CALIBRATED)
        report = compare(traditional, fuzzy)
        assert report.records == 50
        assert report.traditional_transmissions == 50
        assert report.reduction_pct == pytest.approx(
            (1 - fuzzy.total_joules / traditional.total_joules) * 100)
        assert report.reduction_pct == pytest.approx(
            report.count_reduction_pct, abs=1e-9)
        assert len(report.cumulative) == 50

    def test_identical_results_zero_reduction(self, fixture_csv):
        records, _ = load_telemetry(fixture_csv)
        a = run_traditional(records, CALIBRATED)
        b = run_traditional(records, CALIBRATED)
        assert compare(a, b).reduction_pct == 0.0

    def test_mismatched_record_sets(self, cascade):
        a = run_traditional(make_records(10, temperature=20.0), CALIBRATED)
        b = run_traditional(make_records(10, temperature=21.0), CALIBRATED)
        with pytest.raises(MismatchedRunsError):
            compare(a, b)
