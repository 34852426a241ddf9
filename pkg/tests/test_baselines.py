import numpy as np
import pytest

from carv import (
    Box,
    ConstraintSet,
    PartitionGrid,
    Rsoa,
    RunContext,
    refine_sequence,
    run_hybrid,
    run_partition,
    run_symbolic,
)
from carv.baselines import split_box
from carv.compgraph import simulate_batch

from conftest import DI, UNI, di_scenario, linear_policy, random_network, zero_policy
from carv.scenario import Scenario


def concrete_chain_boxes(scenario):
    ctx = RunContext.for_scenario(scenario)
    rsoas = [Rsoa(scenario.x0, 0, "initial")]
    for _ in range(scenario.t_f):
        rsoas.append(ctx.concrete(rsoas[-1]))
    return [r.box for r in rsoas]


class TestSplitBox:
    def test_all_ones_is_identity(self):
        b = Box([0.1, -0.3], [0.7, 0.9])
        cells = split_box(b, PartitionGrid((1, 1)))
        assert len(cells) == 1
        assert np.array_equal(cells[0].lower, b.lower)
        assert np.array_equal(cells[0].upper, b.upper)

    def test_cells_tile_the_box(self):
        b = Box([0.0, 0.0], [1.0, 2.0])
        cells = split_box(b, PartitionGrid((2, 3)))
        assert len(cells) == 6
        lo = np.min([c.lower for c in cells], axis=0)
        hi = np.max([c.upper for c in cells], axis=0)
        assert np.array_equal(lo, b.lower) and np.array_equal(hi, b.upper)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            PartitionGrid((0, 2))
        with pytest.raises(ValueError):
            split_box(Box([0.0], [1.0]), PartitionGrid((2, 2)))


class TestRunPartition:
    def test_all_ones_grid_bit_identical_to_concrete_chain(self, rng):
        scenario = di_scenario(
            policy=random_network(rng, (2, 4, 1)), t_f=5, k_max=5
        )
        result = run_partition(scenario, PartitionGrid((1, 1)))
        chain = concrete_chain_boxes(scenario)
        for r, box in zip(result.rsoas, chain):
            assert np.array_equal(r.box.lower, box.lower)
            assert np.array_equal(r.box.upper, box.upper)

    def test_partition_tightening(self, rng):
        scenario = di_scenario(
            policy=random_network(rng, (2, 5, 1), scale=1.0), t_f=5, k_max=5
        )
        result = run_partition(scenario, PartitionGrid((2, 2)))
        chain = concrete_chain_boxes(scenario)
        for r, box in zip(result.rsoas, chain):
            assert box.contains_box(r.box, tol=1e-12)

    def test_call_count(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 3, 1)), t_f=4)
        result = run_partition(scenario, PartitionGrid((2, 3)))
        assert result.stats.concrete_calls == 4 * 6

    def test_mc_containment(self, rng):
        scenario = di_scenario(
            policy=random_network(rng, (2, 4, 1)), t_f=4, k_max=4
        )
        result = run_partition(scenario, PartitionGrid((2, 2)))
        x0 = rng.uniform(scenario.x0.lower, scenario.x0.upper, (1000, 2))
        traj = simulate_batch(scenario.dyn, scenario.policy, x0, scenario.t_f)
        for r in result.rsoas:
            pts = traj[r.t]
            assert np.max(np.maximum(r.box.lower - pts, pts - r.box.upper)) <= 1e-9


class TestRunSymbolic:
    def test_tf1_equals_one_concrete_step(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 4, 1)), t_f=1)
        result = run_symbolic(scenario)
        chain = concrete_chain_boxes(scenario)
        assert np.array_equal(result.rsoas[1].box.lower, chain[1].lower)
        assert np.array_equal(result.rsoas[1].box.upper, chain[1].upper)

    def test_affine_exact_hull(self):
        policy = linear_policy([-0.4, -0.6])
        scenario = di_scenario(policy=policy, t_f=10, k_max=10, constraints=ConstraintSet())
        result = run_symbolic(scenario)
        a, b = DI.linear_part()
        a_cl = a + b @ np.array([[-0.4, -0.6]])
        for r in result.rsoas:
            verts = scenario.x0.corners() @ np.linalg.matrix_power(a_cl, r.t).T
            np.testing.assert_allclose(r.box.lower, verts.min(axis=0), atol=1e-9)
            np.testing.assert_allclose(r.box.upper, verts.max(axis=0), atol=1e-9)
        assert result.safe

    def test_budget_exhaustion_yields_partial_result(self, rng):
        scenario = Scenario(
            dyn=UNI,
            policy=random_network(rng, (3, 40, 20, 10, 1)),
            x0=Box([-0.2, -0.2, -0.2], [0.2, 0.2, 0.2]),
            constraints=ConstraintSet(),
            t_f=52,
            k_max=10,
        )
        result = run_symbolic(scenario, budget_secs=0.001)
        assert result.timed_out
        assert not result.safe
        assert len(result.rsoas) < scenario.t_f + 1


class TestRunHybrid:
    def test_kmax1_equals_concrete_chain_boxes(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 4, 1)), t_f=5, k_max=1)
        result = run_hybrid(scenario)
        chain = concrete_chain_boxes(scenario)
        for r, box in zip(result.rsoas, chain):
            assert np.array_equal(r.box.lower, box.lower)
            assert np.array_equal(r.box.upper, box.upper)
        assert result.stats.concrete_calls == 0
        assert result.stats.symbolic_calls[1] == 5

    def test_kmax_beyond_horizon_means_no_symbolic_calls(self, rng):
        scenario = di_scenario(policy=random_network(rng, (2, 4, 1)), t_f=5, k_max=9)
        result = run_hybrid(scenario)
        assert result.stats.symbolic_total == 0
        assert result.stats.concrete_calls == 5

    def test_anchor_boxes_match_refine_sequence(self, rng):
        net = random_network(rng, (2, 4, 1))
        scenario = di_scenario(policy=net, t_f=20, k_max=10, constraints=ConstraintSet())
        hybrid = run_hybrid(scenario)

        ctx = RunContext.for_scenario(scenario)
        rsoas = [Rsoa(scenario.x0, 0, "initial")]
        for _ in range(20):
            rsoas.append(ctx.concrete(rsoas[-1]))
        refined = refine_sequence(rsoas, k_max=10, ctx=ctx)
        for t in (10, 20):
            assert np.array_equal(hybrid.rsoas[t].box.lower, refined[t].box.lower)
            assert np.array_equal(hybrid.rsoas[t].box.upper, refined[t].box.upper)

    def test_verdict_reports_first_violation(self, rng):
        from carv import Halfspace

        scenario = di_scenario(
            x0=Box([0.5, -0.3], [1.0, -0.2]),
            constraints=ConstraintSet((Halfspace([1.0, 0.0], 0.6),)),
            t_f=8,
            k_max=3,
        )
        result = run_hybrid(scenario)
        assert not result.safe
        assert result.failure_time is not None
