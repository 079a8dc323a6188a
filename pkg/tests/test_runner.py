import numpy as np
import pytest

from ecosweep.design import expand_replicates, lhs_sample
from ecosweep.errors import EmptyDesignError, SchemaError
from ecosweep.runner import Dataset, load_dataset, run_batch, save_dataset
from ecosweep.sim import SimConfig
from ecosweep.space import default_space


@pytest.fixture(scope="module")
def small_batch():
    space = default_space(seed_levels=(1, 2))
    design = lhs_sample(space, 10, design_seed=21)
    rows = expand_replicates(design)
    template = SimConfig(params=np.zeros(13), seed=0, max_ticks=80)
    ds = run_batch(rows, template, workers=1, space=space)
    return space, rows, template, ds


def test_batch_shape_and_canonical_order(small_batch):
    space, rows, template, ds = small_batch
    assert len(ds) == 20
    order = list(zip(ds.config_ids.tolist(), ds.seeds.tolist()))
    assert order == sorted(order)
    assert ds.wall_times is not None and np.all(ds.wall_times >= 0)


def test_worker_count_does_not_change_outcomes(small_batch):
    space, rows, template, ds = small_batch
    ds4 = run_batch(rows, template, workers=4, space=space)
    np.testing.assert_array_equal(ds.scores, ds4.scores)
    np.testing.assert_array_equal(ds.final_prey, ds4.final_prey)
    np.testing.assert_array_equal(ds.final_pred, ds4.final_pred)
    np.testing.assert_array_equal(ds.end_ticks, ds4.end_ticks)


def test_empty_batch_rejected():
    template = SimConfig(params=np.zeros(13), seed=0)
    with pytest.raises(EmptyDesignError):
        run_batch([], template)


def test_dataset_round_trip(tmp_path, small_batch):
    _, _, _, ds = small_batch
    path = tmp_path / "data.csv"
    save_dataset(ds, path)
    loaded = load_dataset(path)
    np.testing.assert_array_equal(loaded.config_ids, ds.config_ids)
    np.testing.assert_array_equal(loaded.seeds, ds.seeds)
    np.testing.assert_array_equal(loaded.params, ds.params)
    np.testing.assert_array_equal(loaded.scores, ds.scores)
    np.testing.assert_array_equal(loaded.end_ticks, ds.end_ticks)
    assert loaded.space == ds.space


def test_wall_time_summary_in_sidecar(tmp_path, small_batch):
    _, _, _, ds = small_batch
    path = tmp_path / "data.csv"
    save_dataset(ds, path)
    import json

    meta = json.loads((tmp_path / "data.csv.meta.json").read_text())
    assert meta["wall_time_total_s"] > 0
    assert meta["wall_time_mean_s"] == pytest.approx(
        meta["wall_time_total_s"] / len(ds))


def _mutate_csv(tmp_path, ds, mutate):
    path = tmp_path / "data.csv"
    save_dataset(ds, path)
    lines = path.read_text().splitlines()
    lines = mutate(lines)
    path.write_text("\n".join(lines) + "\n")
    return path


def test_off_grid_score_rejected(tmp_path, small_batch):
    _, _, _, ds = small_batch

    def corrupt(lines):
        for i, line in enumerate(lines):
            if line.startswith("#") or line.startswith("config_id"):
                continue
            cells = line.split(",")
            cells[16] = "0.3"
            lines[i] = ",".join(cells)
            break
        return lines

    path = _mutate_csv(tmp_path, ds, corrupt)
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_missing_column_names_the_column(tmp_path, small_batch):
    _, _, _, ds = small_batch

    def drop_score(lines):
        out = []
        for line in lines:
            if line.startswith("#"):
                out.append(line)
            else:
                cells = line.split(",")
                del cells[16]
                out.append(",".join(cells))
        return out

    path = _mutate_csv(tmp_path, ds, drop_score)
    with pytest.raises(SchemaError, match="score"):
        load_dataset(path)


def test_unbalanced_replicates_rejected(tmp_path, small_batch):
    _, _, _, ds = small_batch

    def drop_one_run(lines):
        for i, line in enumerate(lines):
            if not line.startswith("#") and not line.startswith("config_id"):
                del lines[i]
                break
        return lines

    path = _mutate_csv(tmp_path, ds, drop_one_run)
    with pytest.raises(SchemaError, match="replicate"):
        load_dataset(path)


def test_duplicate_config_seed_pair_rejected():
    space = default_space(seed_levels=(1,))
    params = np.vstack([space.bounds()[0]] * 2)
    with pytest.raises(SchemaError, match="unique"):
        Dataset(
            config_ids=np.array([0, 0]), seeds=np.array([1, 1]),
            params=params, scores=np.array([0.0, 0.5]),
            final_prey=np.array([0, 4]), final_pred=np.array([0, 0]),
            end_ticks=np.array([5, 5]), space=space,
        )


def test_records_view_round_trips_outcomes(small_batch):
    _, _, _, ds = small_batch
    records = ds.records()
    assert len(records) == len(ds)
    rec = records[0]
    assert rec.outcome.score == ds.scores[0]
    assert rec.outcome.final_prey == ds.final_prey[0]
    assert (rec.config_id, rec.seed) == (int(ds.config_ids[0]), int(ds.seeds[0]))
