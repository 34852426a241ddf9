import numpy as np
import pytest

from carv import (
    Box,
    ConstraintSet,
    DiskAvoid,
    Halfspace,
    PartitionGrid,
    carv,
    mc_check,
    run_hybrid,
    sweep_kmax,
    sweep_radius,
)
from carv.harness import SweepRecord, sample_box

from conftest import UNI, di_scenario, linear_policy, random_network
from carv.scenario import Scenario


class TestMcCheck:
    def test_deterministic(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 4, 1)), t_f=5)
        result = carv(scenario)
        a = mc_check(scenario, result, 300, seed=7)
        b = mc_check(scenario, result, 300, seed=7)
        assert a == b

    def test_seed_changes_samples(self):
        box = Box([0.0, 0.0], [1.0, 1.0])
        assert not np.array_equal(sample_box(box, 50, 1), sample_box(box, 50, 2))
        assert np.array_equal(sample_box(box, 50, 3), sample_box(box, 50, 3))

    def test_sound_run_passes(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 5, 1)), t_f=6, k_max=6)
        result = carv(scenario)
        report = mc_check(scenario, result, 500, seed=0)
        assert report.samples == 500
        assert len(report.max_violation) == len(result.rsoas)
        assert report.passes(tol=1e-9)

    def test_corrupted_box_fails(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 4, 1)), t_f=3, k_max=3)
        result = carv(scenario)
        from carv import Rsoa

        shrunk = list(result.rsoas)
        wide = shrunk[2].box
        center = 0.5 * (wide.lower + wide.upper)
        shrunk[2] = Rsoa(Box(center, center), 2, "concrete", 1)
        from dataclasses import replace

        bad = replace(result, rsoas=tuple(shrunk))
        report = mc_check(scenario, bad, 500, seed=0)
        assert not report.passes(tol=1e-9)
        assert report.worst > 0

    def test_constraint_hits_recorded(self):
        scenario = di_scenario(
            x0=Box([0.5, -0.3], [1.0, -0.2]),
            constraints=ConstraintSet((Halfspace([1.0, 0.0], 0.55),)),
            t_f=6,
            k_max=3,
        )
        result = carv(scenario)
        assert not result.safe
        report = mc_check(scenario, result, 400, seed=0)
        assert report.constraint_hits
        ts = {t for t, _ in report.constraint_hits}
        # the run stops at the failure step; sampled hits cover that step too
        assert ts <= set(range(result.failure_time + 1))
        assert result.failure_time in ts


class TestSweepKmax:
    def test_record_shape(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 4, 1)), t_f=6)
        records = sweep_kmax(scenario, ["carv", "hybr"], [1, 3, 6])
        assert len(records) == 6
        assert {(r.parameter, r.method) for r in records} == {
            (k, m) for k in (1, 3, 6) for m in ("carv", "hybr")
        }
        for r in records:
            assert r.error is None
            assert r.seconds >= 0.0

    def test_rejects_unsupported_method(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 4, 1)), t_f=3)
        with pytest.raises(ValueError):
            sweep_kmax(scenario, ["part"], [1])
        with pytest.raises(ValueError):
            sweep_kmax(scenario, ["carv"], [])

    def test_failed_point_recorded_not_raised(self):
        scenario = di_scenario(
            policy=linear_policy([1e150, 1e150]),
            x0=Box([1.0, 1.0], [2.0, 2.0]),
            constraints=ConstraintSet(),
            t_f=5,
            k_max=2,
        )
        records = sweep_kmax(scenario, ["carv"], [2])
        assert len(records) == 1
        assert records[0].error is not None
        assert not records[0].verified


def _gr_like_scenario(rng, t_f=6):
    return Scenario(
        dyn=UNI,
        policy=random_network(rng, (3, 5, 1), scale=0.2),
        x0=Box([-1.0, -1.0, -0.1], [-0.8, -0.8, 0.1]),
        constraints=ConstraintSet((DiskAvoid([5.0, 5.0], 1.0, (0, 1)),)),
        t_f=t_f,
        k_max=3,
    )


class TestSweepRadius:
    def test_sorted_and_complete(self, rng):
        scenario = _gr_like_scenario(rng)
        deltas = [0.0, 0.5, 1.0]
        records = sweep_radius(
            scenario, ["carv", "hybr", "part"], deltas, grid=PartitionGrid((2, 2, 2))
        )
        assert [r.parameter for r in records] == sorted(r.parameter for r in records)
        assert {(r.parameter, r.method) for r in records} == {
            (d, m) for d in deltas for m in ("carv", "hybr", "part")
        }

    def test_verified_monotone_in_delta(self, rng):
        # growing the keep-out disks can only flip verdicts from safe to unsafe
        scenario = _gr_like_scenario(rng)
        records = sweep_radius(scenario, ["hybr", "part"], [0.0, 2.0, 6.0],
                               grid=PartitionGrid((1, 1, 1)))
        for method in ("hybr", "part"):
            flags = [r.verified for r in records if r.method == method]
            for earlier, later in zip(flags, flags[1:]):
                assert earlier or not later

    def test_recheck_reuses_base_run(self, rng):
        scenario = _gr_like_scenario(rng)
        records = sweep_radius(scenario, ["hybr"], [0.0, 0.1, 0.2])
        calls = {(r.concrete_calls, r.symbolic_calls) for r in records}
        assert len(calls) == 1  # one base run re-checked per delta

    def test_recheck_matches_direct_run(self, rng):
        scenario = _gr_like_scenario(rng)
        records = sweep_radius(scenario, ["hybr"], [0.0, 2.0])
        for rec in records:
            direct = run_hybrid(
                scenario.with_constraints(scenario.constraints.inflate(rec.parameter))
            )
            assert rec.verified == direct.safe

    def test_partition_recheck_is_per_cell(self, rng):
        from carv import eval_box, run_partition

        scenario = _gr_like_scenario(rng)
        grid = PartitionGrid((2, 2, 2))
        base = run_partition(scenario, grid)
        assert base.partition_boxes is not None
        for delta in (0.0, 1.5, 4.0):
            records = sweep_radius(scenario, ["part"], [delta], grid=grid)
            inflated = scenario.constraints.inflate(delta)
            expected = all(
                eval_box(inflated, b)
                for boxes in base.partition_boxes
                for b in boxes
            )
            assert records[0].verified == expected
