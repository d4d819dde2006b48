"""Tests for the effective-crossover matrix and the CSV emitters."""

import numpy as np
import pandas as pd
import pytest

from src.core.mfea import CrossoverEvent, GenerationStats
from src.harness.emitters import (
    compare_summaries,
    curves_frame,
    emit_plot_data,
    read_csv,
    summarize_tests,
    summary_grid,
    write_csv,
)
from src.harness.transfer import (
    EVENT_COLUMNS,
    compute_transfer_matrix,
    events_to_frame,
    infer_task_count,
    read_events,
    transfer_summary,
)
from src.utils.error_handler import ArtifactError, UsageError


def _event(donor, assignee, improved, generation=1, mating=0):
    return CrossoverEvent(
        generation=generation,
        mating_index=mating,
        offspring_index=2 * mating,
        parent_skill_a=donor,
        parent_skill_b=assignee,
        assigned_task=assignee,
        donor_task=donor,
        improved=improved,
        offspring_cost=-1.0,
    )


def _curves(generations, tasks, runs, rng):
    rows = []
    for run in range(1, runs + 1):
        for g in range(generations):
            for task in tasks:
                rows.append(
                    {
                        "generation": g,
                        "task": task,
                        "run": run,
                        "evaluations": 100 * (g + 1),
                        "best_reward": float(rng.normal()),
                        "mean_reward": float(rng.normal()),
                        "std_reward": float(rng.random()),
                    }
                )
    return pd.DataFrame(rows)


@pytest.mark.unit
class TestTransferMatrix:
    """Test effective-crossover tallies."""

    def test_single_cell_ratio(self):
        events = [_event(1, 2, improved) for improved in (True, False, False, False)]
        matrix = compute_transfer_matrix(events, 3)
        assert matrix.ratio(1, 2) == 0.25
        assert matrix.ratio(2, 1) is None

    def test_empty_log_all_null(self):
        matrix = compute_transfer_matrix([], 2)
        assert matrix.ratios() == [[None, None], [None, None]]

    def test_random_log_matches_hand_tally(self, rng):
        """Test 100 random events against a dictionary tally."""
        events = [
            _event(int(rng.integers(3)), int(rng.integers(3)), bool(rng.random() < 0.4)) for _ in range(100)
        ]
        tally = {}
        for e in events:
            total, good = tally.get((e.donor_task, e.assigned_task), (0, 0))
            tally[(e.donor_task, e.assigned_task)] = (total + 1, good + int(e.improved))
        matrix = compute_transfer_matrix(events, 3)
        for i in range(3):
            for j in range(3):
                if (i, j) in tally:
                    total, good = tally[(i, j)]
                    assert matrix.ratio(i, j) == good / total
                else:
                    assert matrix.ratio(i, j) is None

    def test_cells_in_unit_interval(self, rng):
        events = [
            _event(int(rng.integers(4)), int(rng.integers(4)), bool(rng.random() < 0.5)) for _ in range(200)
        ]
        for row in compute_transfer_matrix(events, 4).ratios():
            assert all(r is None or 0.0 <= r <= 1.0 for r in row)

    def test_unevaluated_events_skipped(self):
        matrix = compute_transfer_matrix([_event(0, 0, None)], 1)
        assert matrix.ratio(0, 0) is None

    def test_single_task_matrix(self):
        matrix = compute_transfer_matrix([_event(0, 0, True), _event(0, 0, False)], 1)
        assert matrix.ratios() == [[0.5]]

    def test_frame_layout(self):
        frame = compute_transfer_matrix([_event(0, 1, True)], 2).to_frame(["a", "b"])
        assert list(frame.columns) == ["donor", "a", "b"]
        assert frame.loc[0, "b"] == 1.0
        assert np.isnan(frame.loc[1, "a"])

    def test_summary_scopes(self):
        events = [_event(0, 0, True), _event(0, 1, False), _event(1, 0, True), _event(0, 2, True)]
        summary = transfer_summary(compute_transfer_matrix(events, 3), ["cartpole", "cartpole", "pendulum"])
        rows = summary.set_index("scope")
        assert rows.loc["intra_task", "ratio"] == 1.0
        assert rows.loc["intra_environment", "events"] == 2
        assert rows.loc["intra_environment", "ratio"] == 0.5
        assert rows.loc["inter_environment", "effective"] == 1

    def test_invalid_task_count(self):
        with pytest.raises(UsageError):
            compute_transfer_matrix([], 0)


@pytest.mark.unit
class TestEventLedger:
    """Test reading and writing the crossover ledger."""

    def test_csv_round_trip(self, temp_dir):
        events = [_event(0, 1, True, mating=0), _event(1, 1, False, mating=1)]
        path = write_csv(events_to_frame(events), temp_dir / "events_run1.csv")
        assert read_events(path) == events
        assert infer_task_count(events) == 2

    def test_missing_columns(self, temp_dir):
        path = temp_dir / "events.csv"
        path.write_text("generation,mating_index\r\n1,0\r\n", encoding="utf-8")
        with pytest.raises(ArtifactError):
            read_events(path)

    def test_missing_file(self, temp_dir):
        with pytest.raises(ArtifactError):
            read_events(temp_dir / "absent.csv")

    def test_empty_ledger_keeps_header(self, temp_dir):
        path = write_csv(events_to_frame([]), temp_dir / "events.csv")
        assert path.read_bytes() == (",".join(EVENT_COLUMNS) + "\r\n").encode("utf-8")
        assert read_events(path) == []


@pytest.mark.unit
class TestEmitters:
    """Test curve, summary and comparison files."""

    def test_crlf_line_endings(self, temp_dir):
        path = write_csv(pd.DataFrame({"a": [1, 2]}), temp_dir / "x.csv")
        assert path.read_bytes() == b"a\r\n1\r\n2\r\n"

    def test_curves_frame_rows(self, small_tasks):
        history = [GenerationStats(g, 10 * g, [1.0, -2.0], [0.5, -3.0], [0.1, 0.2]) for g in range(3)]
        frame = curves_frame(history, small_tasks, run=2)
        assert len(frame) == 6
        assert frame.loc[1, "task"] == "pendulum:A"
        assert frame.loc[1, "best_reward"] == -2.0
        assert set(frame["run"]) == {2}

    def test_plot_data_cardinality(self, temp_dir, rng):
        """Test 60 generations x 1 task x 5 runs give 300 long rows."""
        long_path, aggregate_path = emit_plot_data(_curves(60, ["cartpole:B"], 5, rng), temp_dir)
        long = read_csv(long_path)
        assert len(long) == 300
        assert list(long.columns) == ["generation", "task", "run", "best_reward", "mean_reward", "std_reward"]
        assert len(read_csv(aggregate_path)) == 60

    def test_single_run_zero_spread(self, temp_dir, rng):
        _, aggregate_path = emit_plot_data(_curves(5, ["a", "b"], 1, rng), temp_dir)
        aggregate = read_csv(aggregate_path)
        assert (aggregate["best_reward_std"] == 0.0).all()
        assert (aggregate["runs"] == 1).all()

    def test_aggregate_mean_recomputed(self, temp_dir, rng):
        curves = _curves(4, ["a"], 3, rng)
        _, aggregate_path = emit_plot_data(curves, temp_dir)
        aggregate = read_csv(aggregate_path)
        for g in range(4):
            values = curves[curves["generation"] == g]["best_reward"].to_numpy()
            row = aggregate[aggregate["generation"] == g].iloc[0]
            assert row["best_reward_mean"] == pytest.approx(sum(values) / len(values))
            assert row["best_reward_std"] == pytest.approx(np.sqrt(np.mean((values - values.mean()) ** 2)))

    def test_empty_curves_rejected(self, temp_dir):
        with pytest.raises(UsageError):
            emit_plot_data(pd.DataFrame(columns=["generation", "task", "run"]), temp_dir)

    def test_summary_and_grid(self):
        tests = pd.DataFrame(
            [
                {"task": "cartpole:A", "environment": "cartpole", "preset": "A", "run": 1,
                 "mean_reward": 300.0, "std_reward": 0.0, "episodes": 250},
                {"task": "cartpole:A", "environment": "cartpole", "preset": "A", "run": 2,
                 "mean_reward": 298.0, "std_reward": 2.0, "episodes": 250},
                {"task": "pendulum:B", "environment": "pendulum", "preset": "B", "run": 1,
                 "mean_reward": -150.0, "std_reward": 10.0, "episodes": 250},
            ]
        )
        summary = summarize_tests(tests)
        first = summary.iloc[0]
        assert first["runs"] == 2
        assert first["mean_reward"] == 299.0
        assert first["std_reward"] == 1.0
        assert first["mean_episode_std"] == 1.0

        grid = summary_grid(summary)
        assert list(grid["environment"]) == ["cartpole", "pendulum"]
        assert grid.loc[0, "A_mean"] == 299.0
        assert np.isnan(grid.loc[0, "B_mean"])
        assert grid.loc[1, "B_mean"] == -150.0

    def test_compare_summaries(self):
        labels = {"task": ["a", "b"], "environment": ["cartpole", "cartpole"]}
        separate = pd.DataFrame({**labels, "mean_reward": [300.0, 0.0]})
        joint = pd.DataFrame({**labels, "mean_reward": [270.0, -5.0]})
        comparison = compare_summaries(separate, joint).set_index("task")
        assert comparison.loc["a", "degradation"] == 30.0
        assert comparison.loc["a", "relative_degradation"] == pytest.approx(0.1)
        assert np.isnan(comparison.loc["b", "relative_degradation"])

    def test_compare_without_common_tasks(self):
        separate = pd.DataFrame({"task": ["a"], "environment": ["x"], "mean_reward": [1.0]})
        joint = pd.DataFrame({"task": ["b"], "environment": ["x"], "mean_reward": [1.0]})
        with pytest.raises(UsageError):
            compare_summaries(separate, joint)
