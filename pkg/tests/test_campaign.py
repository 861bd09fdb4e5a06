import io
import math
from datetime import date, timedelta

import pytest
from conftest import (T0, UTC, V15_FOR_HALF, globe_for_offset, make_mobile_log,
                      make_series)

from microclimap.campaign import (CampaignPlan, DayFilterResult, DaySummary,
                                  Environment, Insolation, Phase, StabilityClass,
                                  StopSegment, TraversePoint, aggregate_point,
                                  day_filter, derive_day_summary,
                                  detect_stabilization, match_control,
                                  parse_mobile_csv, pasquill_class,
                                  point_result_from_drivers, process_campaign,
                                  segment_stops)
from microclimap.errors import (DayRejectedError, DomainError, MatchError,
                                SchemaError)
from microclimap.series import StationRole


def make_plan(point_ids=("P1", "P2", "P3"), campaign_id="c1",
              phase=Phase.BEFORE, **kwargs):
    points = [TraversePoint(pid, (2.41 + 0.001 * i, 48.85), Environment.FULL_SUN)
              for i, pid in enumerate(point_ids)]
    return CampaignPlan(campaign_id=campaign_id, phase=phase,
                        day=date(2019, 7, 25), tz=UTC, points=points,
                        control_station_id="ctrl", **kwargs)


def good_day(**overrides):
    fields = dict(day=date(2019, 7, 25), t_max=32.0, t_min=19.0,
                  cloud_cover_oktas=1.0, stability_class=StabilityClass.A,
                  mean_daytime_wind=1.5)
    fields.update(overrides)
    return DaySummary(**fields)


class TestPasquillClass:
    @pytest.mark.parametrize("wind,insolation,expected", [
        (1.5, Insolation.STRONG, StabilityClass.A),
        (2.5, Insolation.STRONG, StabilityClass.AB),
        (6.0, Insolation.SLIGHT, StabilityClass.D),
        (0.0, Insolation.STRONG, StabilityClass.A),
        (2.0, Insolation.STRONG, StabilityClass.AB),  # half-open bin edge
        (3.0, Insolation.MODERATE, StabilityClass.BC),
        (5.5, Insolation.MODERATE, StabilityClass.CD),
        (1.0, Insolation.SLIGHT, StabilityClass.B),
        (12.0, Insolation.STRONG, StabilityClass.C),
    ])
    def test_daytime_table(self, wind, insolation, expected):
        assert pasquill_class(wind, insolation) is expected

    def test_negative_wind_rejected(self):
        with pytest.raises(DomainError):
            pasquill_class(-0.1, Insolation.STRONG)


class TestDayFilter:
    def test_warm_clear_unstable_day_accepted(self):
        result = day_filter(good_day(t_max=26.0, t_min=17.0, cloud_cover_oktas=2.0))
        assert result == DayFilterResult(accepted=True, reasons=[])

    def test_cool_maximum_rejected(self):
        result = day_filter(good_day(t_max=24.5, t_min=17.0, cloud_cover_oktas=2.0))
        assert not result.accepted
        assert len(result.reasons) == 1
        assert "t_max" in result.reasons[0]

    def test_cloudy_day_rejected(self):
        result = day_filter(good_day(t_max=28.0, t_min=18.0, cloud_cover_oktas=4.0))
        assert not result.accepted
        assert len(result.reasons) == 1
        assert "cloud" in result.reasons[0]

    def test_neutral_stability_rejected(self):
        result = day_filter(good_day(stability_class=StabilityClass.B))
        assert not result.accepted

    def test_ab_class_accepted(self):
        assert day_filter(good_day(stability_class=StabilityClass.AB)).accepted

    def test_every_failed_criterion_listed(self):
        result = day_filter(good_day(t_max=24.0, t_min=15.0, cloud_cover_oktas=5.0,
                                     stability_class=StabilityClass.D))
        assert len(result.reasons) == 4

    @pytest.mark.parametrize("t_max,t_min,oktas,accepted", [
        (25.0, 17.0, 2.0, False),   # boundary: strictly above required
        (25.001, 17.0, 2.0, True),
        (26.0, 16.0, 2.0, False),
        (26.0, 16.001, 2.0, True),
        (26.0, 17.0, 3.0, True),    # boundary: <= 3 oktas accepted
        (26.0, 17.0, 3.001, False),
    ])
    def test_threshold_boundaries(self, t_max, t_min, oktas, accepted):
        result = day_filter(good_day(t_max=t_max, t_min=t_min,
                                     cloud_cover_oktas=oktas))
        assert result.accepted is accepted

    def test_invalid_summary(self):
        with pytest.raises(DomainError):
            good_day(cloud_cover_oktas=9.0)
        with pytest.raises(DomainError):
            good_day(t_min=33.0)


class TestDeriveDaySummary:
    def test_from_control_series(self):
        day = date(2019, 7, 25)
        samples = []
        for h in range(8, 18):
            for m in (0, 30):
                t = T0.replace(hour=h, minute=m)
                samples.append({
                    "t_air": 20.0 + h - 8 + m / 60,
                    "timestamp": t,
                    "wind": 1.0 if 12 <= h < 16 else 3.0,
                    "net_radiation": 650.0 if 12 <= h < 14 else 200.0,
                })
        control = make_series(samples, station_id="ctrl", role=StationRole.CONTROL,
                              cadence_s=1800)
        summary = derive_day_summary(control, day, cloud_cover_oktas=1.0, tz=UTC)
        assert summary.t_max == 29.5
        assert summary.t_min == 20.0
        # 1.0 m/s at the default 4 m wind height, converted to 10 m
        assert summary.mean_daytime_wind == pytest.approx(
            math.log(1000) / math.log(400), abs=1e-12)
        assert summary.stability_class is StabilityClass.A

    def test_weak_radiation_downgrades_insolation(self):
        day = date(2019, 7, 25)
        samples = [{"t_air": 25.0, "timestamp": T0.replace(hour=h, minute=m),
                    "wind": 1.0, "net_radiation": 300.0}
                   for h in range(10, 17) for m in (0, 30)]
        control = make_series(samples, station_id="ctrl", cadence_s=1800)
        summary = derive_day_summary(control, day, cloud_cover_oktas=1.0, tz=UTC)
        assert summary.stability_class is StabilityClass.AB

    def test_no_samples_on_day(self):
        control = make_series([25.0] * 10, station_id="ctrl")
        with pytest.raises(MatchError, match="2019-08-01"):
            derive_day_summary(control, date(2019, 8, 1), 1.0, UTC)


class TestParseMobileCsv:
    HEADER = "timestamp,point_id,t_air,rh,t_globe,wind\n"

    def test_well_formed(self):
        src = io.StringIO(self.HEADER
                          + "2019-07-25T12:00:00+02:00,P1,30.0,40,45.0,0.8\n"
                          + "2019-07-25T12:00:15+02:00,P1,30.1,41,45.1,0.7\n")
        log = parse_mobile_csv(src)
        assert [m.point_id for m in log] == ["P1", "P1"]
        assert log[0].sample.t_globe == 45.0

    def test_rows_sorted_by_time(self):
        src = io.StringIO(self.HEADER
                          + "2019-07-25T12:00:15+00:00,P1,30.0,40,45.0,0.8\n"
                          + "2019-07-25T12:00:00+00:00,P1,30.0,40,45.0,0.8\n")
        log = parse_mobile_csv(src)
        assert log[0].sample.timestamp < log[1].sample.timestamp

    def test_blank_rh_kept_as_missing(self):
        src = io.StringIO(self.HEADER
                          + "2019-07-25T12:00:00+00:00,P1,30.0,,45.0,0.8\n")
        assert parse_mobile_csv(src)[0].sample.rh is None

    def test_missing_point_id_column(self):
        src = io.StringIO("timestamp,t_air,rh,t_globe,wind\n"
                          "2019-07-25T12:00:00+00:00,30.0,40,45.0,0.8\n")
        with pytest.raises(SchemaError, match="point_id"):
            parse_mobile_csv(src)

    def test_naive_timestamp_rejected(self):
        src = io.StringIO(self.HEADER + "2019-07-25T12:00:00,P1,30.0,40,45.0,0.8\n")
        with pytest.raises(SchemaError, match="UTC offset"):
            parse_mobile_csv(src)

    def test_empty_log(self):
        with pytest.raises(SchemaError, match="no rows"):
            parse_mobile_csv(io.StringIO(self.HEADER))


BASE_FIELDS = {"t_air": 30.0, "rh": 40.0, "t_globe": 45.0, "wind": 0.8}


class TestSegmentStops:
    def test_two_points_two_segments(self):
        plan = make_plan(("P1", "P2"))
        log = make_mobile_log([("P1", 40, BASE_FIELDS), ("P2", 50, BASE_FIELDS)])
        segments = segment_stops(log, plan)
        assert [(s.point_id, len(s.samples)) for s in segments] == [("P1", 40),
                                                                    ("P2", 50)]

    def test_internal_gap_splits_segment(self):
        plan = make_plan(("P1",))
        first = make_mobile_log([("P1", 20, BASE_FIELDS)])
        second = make_mobile_log([("P1", 25, BASE_FIELDS)],
                                 start=T0 + timedelta(seconds=19 * 15 + 90))
        segments = segment_stops(first + second, plan)
        assert [s.point_id for s in segments] == ["P1", "P1"]
        assert len(segments[0].samples) == 20

    def test_sixty_second_gap_does_not_split(self):
        plan = make_plan(("P1",))
        first = make_mobile_log([("P1", 20, BASE_FIELDS)])
        second = make_mobile_log([("P1", 5, BASE_FIELDS)],
                                 start=T0 + timedelta(seconds=19 * 15 + 60))
        segments = segment_stops(first + second, plan)
        assert len(segments) == 1

    def test_short_dwell_flagged(self):
        plan = make_plan(("P3",))
        log = make_mobile_log([("P3", 10, BASE_FIELDS)])  # 2.5 min dwell
        (segment,) = segment_stops(log, plan)
        assert segment.too_short

    def test_unknown_point_id_named_in_error(self):
        plan = make_plan(("P1",))
        log = make_mobile_log([("P9", 5, BASE_FIELDS)])
        with pytest.raises(DomainError, match="P9"):
            segment_stops(log, plan)

    def test_half_logs_yield_same_segments_as_joined_log(self):
        plan = make_plan(("P1", "P2", "P3"))
        blocks = [("P1", 30, BASE_FIELDS), ("P2", 30, BASE_FIELDS),
                  ("P3", 30, BASE_FIELDS)]
        log = make_mobile_log(blocks)
        cut = 60  # boundary between the P2 and P3 dwells
        joined = segment_stops(log, plan)
        halves = segment_stops(log[:cut], plan) + segment_stops(log[cut:], plan)
        assert halves == joined


class TestDetectStabilization:
    def test_constant_globe_window_is_final_three_minutes(self):
        plan = make_plan(("P1",))
        log = make_mobile_log([("P1", 61, BASE_FIELDS)])  # 15 min dwell
        (segment,) = segment_stops(log, plan)
        out = detect_stabilization(segment)
        assert out.stabilized
        assert out.stabilization_window == (T0 + timedelta(seconds=720),
                                            T0 + timedelta(seconds=900))

    def test_exponential_approach_settles_late(self):
        # globe relaxes toward 35 degC with a 240 s time constant; the range
        # over a trailing 3 min window is 5*(exp(-t/240) - exp(-(t+180)/240)),
        # which crosses 0.15 degC near t = 688 s
        plan = make_plan(("P1",))
        fields = dict(BASE_FIELDS,
                      t_globe=lambda i: 35.0 - 5.0 * math.exp(-i * 15.0 / 240.0))
        log = make_mobile_log([("P1", 61, fields)])
        (segment,) = segment_stops(log, plan)
        out = detect_stabilization(segment)
        assert out.stabilized
        # the latest feasible window start is kept
        assert out.stabilization_window == (T0 + timedelta(seconds=720),
                                            T0 + timedelta(seconds=900))
        # brute-force check of the analytic crossing on the same curve
        def window_range(t):
            return 5.0 * (math.exp(-t / 240.0) - math.exp(-(t + 180.0) / 240.0))
        assert window_range(690.0) <= 0.15 < window_range(675.0)

    def test_linear_ramp_never_stabilizes(self):
        plan = make_plan(("P1",))
        fields = dict(BASE_FIELDS, t_globe=lambda i: 40.0 + 0.2 * (i * 15.0 / 60.0))
        log = make_mobile_log([("P1", 61, fields)])
        (segment,) = segment_stops(log, plan)
        out = detect_stabilization(segment)
        assert not out.stabilized
        assert out.stabilization_window is None

    def test_idempotent_on_stabilized_window(self):
        plan = make_plan(("P1",))
        fields = dict(BASE_FIELDS,
                      t_globe=lambda i: 35.0 - 5.0 * math.exp(-i * 15.0 / 240.0))
        log = make_mobile_log([("P1", 61, fields)])
        (segment,) = segment_stops(log, plan)
        first = detect_stabilization(segment)
        lo, hi = first.stabilization_window
        tail = StopSegment(point_id="P1",
                           samples=[s for s in first.samples
                                    if lo <= s.timestamp <= hi])
        again = detect_stabilization(tail)
        assert again.stabilized
        assert again.stabilization_window == first.stabilization_window

    def test_missing_globe_readings(self):
        plan = make_plan(("P1",))
        log = make_mobile_log([("P1", 25, dict(BASE_FIELDS, t_globe=None))])
        (segment,) = segment_stops(log, plan)
        with pytest.raises(DomainError, match="globe"):
            detect_stabilization(segment)


def stabilized_segment(fields=None, n=61):
    plan = make_plan(("P1",))
    log = make_mobile_log([("P1", n, {**BASE_FIELDS, **(fields or {})})])
    (segment,) = segment_stops(log, plan)
    return detect_stabilization(segment)


class TestAggregatePoint:
    def test_constant_window_returns_the_constants(self):
        drivers = aggregate_point(stabilized_segment({"wind": 1.0}))
        assert drivers.t_air == 30.0
        assert drivers.rh == 40.0
        assert drivers.t_globe == 45.0
        assert drivers.wind_measured == 1.0
        assert drivers.timestamp == T0 + timedelta(seconds=810)

    def test_log_profile_wind_conversion(self):
        drivers = aggregate_point(stabilized_segment({"wind": 1.0}))
        assert drivers.wind_10m == pytest.approx(1.378618652832536, abs=1e-12)
        assert drivers.wind_10m == pytest.approx(1.379, abs=1e-3)

    def test_missing_rh_sample_skipped_and_counted(self):
        # the final sample of the window carries no humidity reading
        fields = {"rh": lambda i: None if i == 60 else 40.0}
        drivers = aggregate_point(stabilized_segment(fields))
        assert drivers.rh == 40.0
        assert drivers.sample_counts["rh"] == 12
        assert drivers.sample_counts["t_air"] == 13

    def test_unstabilized_segment_is_unusable(self):
        plan = make_plan(("P1",))
        fields = dict(BASE_FIELDS, t_globe=lambda i: 40.0 + 0.05 * i)
        log = make_mobile_log([("P1", 61, fields)])
        (segment,) = segment_stops(log, plan)
        with pytest.raises(DomainError, match="unusable"):
            aggregate_point(detect_stabilization(segment))

    def test_mrt_computed_on_window_means(self):
        from microclimap.thermal import GlobeSpec, mrt_from_globe
        drivers = aggregate_point(stabilized_segment({"wind": 1.0}))
        assert drivers.t_mrt == mrt_from_globe(45.0, 30.0, 1.0, GlobeSpec())


class TestMatchControl:
    def test_exact_timestamp(self):
        control = make_series([25.0, 26.0, 27.0], station_id="ctrl",
                              role=StationRole.CONTROL)
        ref = match_control(T0 + timedelta(seconds=60), control)
        assert ref.t_air == 26.0
        assert ref.matched_at == T0 + timedelta(seconds=60)
        assert ref.t_mrt_ref == 26.0
        assert ref.v_ref == 0.5

    def test_nearest_within_tolerance(self):
        control = make_series([25.0, 26.0], station_id="ctrl")
        ref = match_control(T0 + timedelta(seconds=30), control)
        assert ref.matched_at in (T0, T0 + timedelta(seconds=60))

    def test_outage_is_error(self):
        control = make_series([25.0, 26.0], station_id="ctrl")
        with pytest.raises(MatchError, match="ctrl"):
            match_control(T0 + timedelta(seconds=360), control)


def synthetic_campaign(deltas, t_air=30.0, rh=40.0):
    """Plan, mobile log, and control series realizing the target offsets."""
    plan = make_plan(tuple(deltas))
    blocks = []
    for pid, delta in deltas.items():
        fields = {"t_air": t_air, "rh": rh, "wind": V15_FOR_HALF,
                  "t_globe": globe_for_offset(delta, t_air, rh)}
        blocks.append((pid, 49, fields))  # 12 min dwell per point
    log = make_mobile_log(blocks)
    control = make_series([t_air] * 80, start=T0 - timedelta(minutes=10),
                          rh=rh, station_id="ctrl", role=StationRole.CONTROL)
    return plan, log, control


class TestProcessCampaign:
    def test_drivers_equal_reference_gives_zero_offsets(self):
        plan, log, control = synthetic_campaign({"P1": 0.0, "P2": 0.0, "P3": 0.0})
        results, report = process_campaign(plan, log, control,
                                           day_summary=good_day())
        assert [r.point_id for r in results] == ["P1", "P2", "P3"]
        for r in results:
            assert r.offset.value == pytest.approx(0.0, abs=1e-6)
        assert report.failures == []

    def test_injected_offset_field_recovered(self):
        targets = {"P1": 5.0, "P2": 1.0, "P3": 0.0}
        plan, log, control = synthetic_campaign(targets)
        results, _ = process_campaign(plan, log, control, day_summary=good_day())
        for r in results:
            assert r.offset.value == pytest.approx(targets[r.point_id], abs=1e-4)
            assert abs(r.offset.value - targets[r.point_id]) < 0.2

    def test_offset_identity_holds_bit_exactly(self):
        plan, log, control = synthetic_campaign({"P1": 3.0, "P2": -1.0})
        results, _ = process_campaign(plan, log, control, day_summary=good_day())
        for r in results:
            assert r.offset.value == r.utci_mobile - r.utci_ref

    def test_rejected_day_refused_with_reasons(self):
        plan, log, control = synthetic_campaign({"P1": 0.0})
        bad = good_day(t_max=24.0, cloud_cover_oktas=5.0)
        with pytest.raises(DayRejectedError) as exc_info:
            process_campaign(plan, log, control, day_summary=bad)
        assert len(exc_info.value.reasons) == 2

    def test_rejected_day_override_recorded(self):
        plan, log, control = synthetic_campaign({"P1": 0.0})
        bad = good_day(t_max=24.0)
        results, report = process_campaign(plan, log, control, day_summary=bad,
                                           override_day_filter=True)
        assert len(results) == 1
        assert report.day_filter_overridden
        assert "override" in report.summary()

    def test_per_point_failure_does_not_kill_campaign(self):
        plan, log, control = synthetic_campaign({"P1": 2.0, "P2": 0.0})
        ramp = {"t_air": 30.0, "rh": 40.0, "wind": V15_FOR_HALF,
                "t_globe": lambda i: 40.0 + 0.05 * i}
        bad_log = make_mobile_log([("P3", 61, ramp)],
                                  start=log[-1].sample.timestamp
                                  + timedelta(seconds=15))
        plan = make_plan(("P1", "P2", "P3"))
        results, report = process_campaign(plan, log + bad_log, control,
                                           day_summary=good_day())
        assert [r.point_id for r in results] == ["P1", "P2"]
        assert [pid for pid, _ in report.failures] == ["P3"]

    def test_unvisited_point_reported(self):
        plan, log, control = synthetic_campaign({"P1": 0.0})
        plan = make_plan(("P1", "P4"))
        results, report = process_campaign(plan, log, control,
                                           day_summary=good_day())
        assert ("P4", "no mobile samples recorded") in report.failures
        assert len(results) == 1

    def test_all_points_failing_is_an_error(self):
        plan = make_plan(("P1",))
        ramp = {"t_air": 30.0, "rh": 40.0, "wind": V15_FOR_HALF,
                "t_globe": lambda i: 40.0 + 0.05 * i}
        log = make_mobile_log([("P1", 61, ramp)])
        control = make_series([30.0] * 40, rh=40.0, station_id="ctrl")
        with pytest.raises(DomainError, match="no usable points"):
            process_campaign(plan, log, control, day_summary=good_day())

    def test_onsite_station_drift_checked(self):
        plan, log, control = synthetic_campaign({"P1": 1.0, "P2": 0.0})
        onsite = make_series([30.0] * 80, start=T0 - timedelta(minutes=10),
                             rh=40.0, station_id="onsite",
                             role=StationRole.ONSITE_FIXED)
        results, report = process_campaign(plan, log, control,
                                           day_summary=good_day(), onsite=onsite)
        assert report.drift is not None
        assert report.drift.verdict.value == "stable"
        assert len(results) == 2

    def test_without_day_summary_filter_is_skipped(self):
        plan, log, control = synthetic_campaign({"P1": 0.0})
        _, report = process_campaign(plan, log, control)
        assert report.day_filter is None


class TestPointResultInvariant:
    def test_inconsistent_offset_rejected(self):
        plan, log, control = synthetic_campaign({"P1": 0.0})
        results, _ = process_campaign(plan, log, control, day_summary=good_day())
        from dataclasses import replace

        from microclimap.campaign import PointResult
        r = results[0]
        with pytest.raises(DomainError, match="inconsistent"):
            PointResult(r.point_id, r.timestamp, r.drivers,
                        r.utci_mobile + 0.5, r.utci_ref, r.offset)


class TestPlanValidation:
    def test_duplicate_point_ids(self):
        with pytest.raises(DomainError, match="duplicate"):
            make_plan(("P1", "P1"))

    def test_window_order(self):
        from datetime import time
        with pytest.raises(DomainError, match="window"):
            make_plan(("P1",), window_start=time(16, 0), window_end=time(12, 0))

    def test_point_lookup(self):
        plan = make_plan(("P1", "P2"))
        assert plan.point("P2").point_id == "P2"
        with pytest.raises(DomainError, match="P7"):
            plan.point("P7")
