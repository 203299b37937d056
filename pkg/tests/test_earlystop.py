import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neural_persistence.earlystop import (Direction, MetricTrace, PatienceConfig, StopGridResult, patience_stop,
                                          quadrant, simulate_grid, simulate_grid_runs, summarize)
from neural_persistence.errors import InvalidArgument

values = st.lists(st.sampled_from([0.0, 0.1, 0.2, 0.3, 0.5, 1.0]) | st.floats(-5, 5, allow_nan=False),
                  min_size=1, max_size=40)


def trace(vals, direction=Direction.MAXIMIZE):
    return MetricTrace.from_values(vals, direction)


def plateau(rise_until, total, direction=Direction.MAXIMIZE):
    """Strictly improving up to step ``rise_until``, flat afterwards."""
    v = np.minimum(np.arange(total + 1), rise_until).astype(float) * 0.1
    return MetricTrace.from_values(v if direction is Direction.MAXIMIZE else 5 - v, direction)


class TestPatienceStop:
    def test_hand_example(self):
        d = patience_stop(trace([0.1, 0.2, 0.2, 0.2]), PatienceConfig(2), steps_per_epoch=1)
        assert (d.triggered, d.step, d.best) == (True, 3, 0.2)

    def test_increasing_never_triggers(self):
        d = patience_stop(trace(np.arange(10.0)), PatienceConfig(1), 1)
        assert not d.triggered and d.step == 9

    def test_constant_stops_at_second_sample(self):
        d = patience_stop(trace([0.3] * 6), PatienceConfig(1, burn_in=2), 1)
        assert (d.triggered, d.step) == (True, 3)

    def test_quarter_epoch_counter(self):
        # patience 1 epoch at four evaluations per epoch needs four stale evaluations
        d = patience_stop(trace([1.0] + [0.5] * 8), PatienceConfig(1), 4)
        assert d.step == 4 and d.epoch(4) == 1.0

    def test_delta_min(self):
        d = patience_stop(trace([0.0, 0.05, 0.1, 0.15]), PatienceConfig(2, delta_min=0.1), 1)
        assert (d.triggered, d.step, d.best) == (True, 2, 0.0)

    def test_burn_in_past_end(self):
        d = patience_stop(trace([1.0, 2.0]), PatienceConfig(1, burn_in=5), 1)
        assert not d.triggered and d.best is None and d.step == 1

    def test_minimize(self):
        d = patience_stop(trace([3.0, 2.0, 2.5, 2.5], Direction.MINIMIZE), PatienceConfig(2), 1)
        assert (d.step, d.best) == (3, 2.0)

    @pytest.mark.parametrize("kwargs", [dict(patience=0), dict(patience=1, burn_in=-1),
                                        dict(patience=1, delta_min=-0.1)])
    def test_config_errors(self, kwargs):
        with pytest.raises(InvalidArgument):
            PatienceConfig(**kwargs)

    def test_trace_errors(self):
        with pytest.raises(InvalidArgument):
            MetricTrace(np.array([0, 0]), np.array([1.0, 2.0]))
        with pytest.raises(InvalidArgument):
            MetricTrace(np.array([], dtype=int), np.array([]))


class TestProperties:
    @settings(max_examples=200)
    @given(values, st.integers(1, 4), st.integers(0, 4), st.sampled_from([0.0, 0.05]), st.integers(1, 4))
    def test_sign_symmetry(self, vals, g, b, dmin, spe):
        cfg = PatienceConfig(g, b, dmin)
        lo = patience_stop(trace(vals, Direction.MINIMIZE), cfg, spe)
        hi = patience_stop(trace(-np.array(vals), Direction.MAXIMIZE), cfg, spe)
        assert (lo.triggered, lo.step) == (hi.triggered, hi.step)
        assert (lo.best is None) == (hi.best is None)
        if lo.best is not None:
            assert lo.best == -hi.best

    @settings(max_examples=200)
    @given(values, st.integers(0, 4), st.integers(1, 4))
    def test_monotone_in_patience(self, vals, b, spe):
        steps = [patience_stop(trace(vals), PatienceConfig(g, b), spe).step for g in range(1, 6)]
        assert steps == sorted(steps)

    @settings(max_examples=150)
    @given(values, st.integers(1, 3), st.integers(0, 3), st.integers(1, 3), st.integers(1, 4))
    def test_burn_in_shift(self, vals, g, b, k, spe):
        base = patience_stop(trace(vals), PatienceConfig(g, b), spe)
        padded = trace([0.0] * (k * spe) + list(vals))
        shifted = patience_stop(padded, PatienceConfig(g, b + k), spe)
        assert shifted.triggered == base.triggered
        assert shifted.step - k * spe == base.step

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 6), st.integers(1, 4), st.data())
    def test_no_trigger_above_diagonal(self, epochs, spe, data):
        n = epochs * spe + 1
        vals = data.draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=n, max_size=n))
        grid = simulate_grid(trace(vals), trace(vals, Direction.MINIMIZE), trace([0.5] * n), epochs, spe)
        for b in range(epochs):
            for g in range(1, epochs + 1):
                if b + g >= epochs:
                    assert grid.np_triggers[b, g - 1] == 0
                    assert grid.loss_triggers[b, g - 1] == 0


class TestGrid:
    def test_mirrored_traces_give_zero(self):
        rng = np.random.default_rng(0)
        vals = np.cumsum(rng.normal(size=33))
        np_tr = trace(vals)
        loss_tr = MetricTrace.from_values(-vals, Direction.MINIMIZE)
        acc = trace(rng.uniform(size=33))
        grid = simulate_grid(np_tr, loss_tr, acc, 8, 4)
        assert np.all(grid.delta_epoch == 0) and np.all(grid.delta_accuracy == 0)
        assert summarize(grid)["barycentre"] == [0.0, 0.0]

    def test_one_epoch_earlier_plateau(self):
        epochs, spe, e = 8, 4, 4
        grid = simulate_grid(plateau(e * spe, epochs * spe),
                             plateau((e + 1) * spe, epochs * spe, Direction.MINIMIZE),
                             trace([0.8] * (epochs * spe + 1)), epochs, spe)
        # four hand-checked cells: (b, g) -> (NP stop, loss stop) in epochs
        assert (grid.np_stop_epoch[0, 0], grid.loss_stop_epoch[0, 0]) == (5, 6)
        assert (grid.np_stop_epoch[2, 2], grid.loss_stop_epoch[2, 2]) == (7, 8)
        assert (grid.np_stop_epoch[4, 1], grid.loss_stop_epoch[4, 1]) == (6, 7)
        assert (grid.np_stop_epoch[5, 1], grid.loss_stop_epoch[5, 1]) == (7, 7)
        triggered = grid.np_triggers > 0
        early_burn_in = np.broadcast_to(grid.burn_ins[:, None] <= e, grid.delta_epoch.shape)
        assert np.all(grid.delta_epoch[triggered & early_burn_in] == -1)
        assert np.all(grid.delta_epoch[~early_burn_in] == 0)
        assert np.all(grid.delta_accuracy == 0)

    def test_median_over_runs(self):
        runs = []
        for e in (2, 3, 5):
            runs.append((plateau(e * 4, 32), plateau(e * 4, 32, Direction.MINIMIZE), trace([0.5] * 33)))
        grid = simulate_grid_runs(runs, 8, 4)
        assert grid.runs == 3
        assert grid.np_stop_epoch[0, 0] == 4.0
        assert grid.np_triggers[0, 0] == 3

    def test_mismatched_axes(self):
        with pytest.raises(InvalidArgument):
            simulate_grid(trace([1.0, 2.0]), MetricTrace.from_values([1.0, 2.0], Direction.MINIMIZE, start=1),
                          trace([0.5, 0.5]), 1, 1)

    def test_cells_export(self):
        grid = simulate_grid(trace([0.0, 1.0, 1.0]), trace([1.0, 0.5, 0.5], Direction.MINIMIZE),
                             trace([0.1, 0.2, 0.3]), 2, 1)
        cells = list(grid.cells())
        assert len(cells) == 4
        assert cells[0]["burn_in"] == 0 and cells[0]["patience"] == 1
        assert grid.common_mask().sum() == 2


def _grid(de, da):
    de, da = np.asarray(de, float), np.asarray(da, float)
    zeros = np.zeros_like(de)
    return StopGridResult(de.shape[0], 1, de, zeros, da, zeros, zeros.astype(int), zeros.astype(int))


class TestSummary:
    def test_all_zero(self):
        s = summarize(_grid(np.zeros((3, 3)), np.zeros((3, 3))))
        assert s["barycentre"] == [0.0, 0.0]
        assert s["quadrants"]["boundary"] == 9

    def test_single_offset_cell(self):
        s = summarize(_grid([[-1, 0], [0, 0]], [[0.5, 0], [0, 0]]))
        assert s["barycentre"] == [-0.25, 0.125]
        assert s["quadrants"]["Q2"] == 1 and s["quadrants"]["boundary"] == 3

    @pytest.mark.parametrize("de,da,q", [(1, 1, "Q1"), (-1, 1, "Q2"), (-1, -1, "Q3"), (1, -1, "Q4"),
                                         (0, 1, "boundary"), (1, 0, "boundary")])
    def test_quadrant(self, de, da, q):
        assert quadrant(de, da) == q

    def test_common_subset(self):
        s = summarize(_grid(np.full((4, 4), -1.0), np.full((4, 4), 0.1)))
        assert s["quadrants_common"]["Q2"] == 6
        assert s["barycentre_common"] == [-1.0, pytest.approx(0.1)]
