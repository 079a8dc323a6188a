import numpy as np
import pytest

from ecosweep.errors import DataError, NumericError
from ecosweep.runner import Dataset
from ecosweep.space import Dim, ParameterSpace
from ecosweep.surrogate import (
    MLPSurrogate,
    cross_validate,
    init_params,
    load_model,
    loss_and_grads,
    save_model,
    stratified_group_folds,
)


def three_blob_data(n_per=60, seed=0, spread=0.05):
    """Well-separated class blobs in 2-D."""
    rng = np.random.default_rng(seed)
    centers = np.array([[0.2, 0.2], [0.8, 0.2], [0.5, 0.9]])
    X = np.vstack([
        centers[k] + rng.normal(0, spread, size=(n_per, 2)) for k in range(3)
    ])
    y = np.repeat([0, 1, 2], n_per)
    return X, y


def blob_dataset(n_cfg_per_class=12, n_rep=3, seed=0, permute_labels=False):
    rng = np.random.default_rng(seed)
    centers = np.array([[20.0, 20.0], [80.0, 20.0], [50.0, 90.0]])
    configs = []
    labels = []
    for k in range(3):
        pts = centers[k] + rng.normal(0, 3.0, size=(n_cfg_per_class, 2))
        configs.append(pts)
        labels += [k] * n_cfg_per_class
    configs = np.vstack(configs)
    labels = np.array(labels)
    if permute_labels:
        labels = rng.permutation(labels)
    n_cfg = len(labels)
    space = ParameterSpace(
        dims=(Dim("Gr", 0.0, 100.0), Dim("PH", 0.0, 100.0)),
        seed_levels=tuple(range(1, n_rep + 1)),
    )
    config_ids = np.repeat(np.arange(n_cfg), n_rep)
    scores = (labels / 2.0)[config_ids]
    return Dataset(
        config_ids=config_ids,
        seeds=np.tile(np.arange(1, n_rep + 1), n_cfg),
        params=np.clip(configs[config_ids], 0, 100),
        scores=scores,
        final_prey=np.where(scores > 0, 5, 0),
        final_pred=np.where(scores == 1.0, 2, 0),
        end_ticks=np.full(n_cfg * n_rep, 50),
        space=space,
    )


# ---------------------------------------------------------------- gradients

def test_analytic_gradients_match_finite_differences():
    rng = np.random.default_rng(7)
    params = init_params([5, 4, 3], rng)
    X = rng.random((12, 5))
    y = rng.integers(0, 3, size=12)
    _, grads = loss_and_grads(params, X, y, l2=1e-3)
    eps = 1e-6
    for li, (W, b) in enumerate(params):
        for arr, garr in ((W, grads[li][0]), (b, grads[li][1])):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                old = arr[idx]
                arr[idx] = old + eps
                up, _ = loss_and_grads(params, X, y, l2=1e-3)
                arr[idx] = old - eps
                dn, _ = loss_and_grads(params, X, y, l2=1e-3)
                arr[idx] = old
                fd = (up - dn) / (2 * eps)
                denom = max(abs(fd), abs(garr[idx]), 1e-8)
                assert abs(fd - garr[idx]) / denom < 1e-4


# ---------------------------------------------------------------- training

def test_separable_two_class_reaches_full_training_accuracy():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(-2, 0.3, (40, 3)), rng.normal(2, 0.3, (40, 3))])
    y = np.repeat([0, 2], 40)
    model = MLPSurrogate(hidden=(16,), epochs=200, batch_size=16, lr=5e-3,
                         train_seed=0)
    model.fit(X, y)
    assert np.mean(model.predict(X) == y) == 1.0


def test_single_class_training_rejected():
    X = np.random.default_rng(0).random((10, 2))
    with pytest.raises(DataError):
        MLPSurrogate().fit(X, np.zeros(10, dtype=int))


def test_probabilities_form_a_simplex():
    X, y = three_blob_data()
    model = MLPSurrogate(hidden=(8,), epochs=30, train_seed=1).fit(X, y)
    probs = model.predict_proba(np.random.default_rng(2).random((50, 2)))
    assert probs.shape == (50, 3)
    assert np.all(probs >= 0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_inference_is_pure():
    X, y = three_blob_data()
    model = MLPSurrogate(hidden=(8,), epochs=30, train_seed=1).fit(X, y)
    q = np.array([[0.4, 0.4]])
    np.testing.assert_array_equal(model.predict_proba(q), model.predict_proba(q))


def test_training_cluster_majority_is_recovered():
    X, y = three_blob_data(n_per=80, seed=3)
    model = MLPSurrogate(hidden=(32,), epochs=150, batch_size=32, lr=3e-3,
                         train_seed=2).fit(X, y)
    centers = np.array([[0.2, 0.2], [0.8, 0.2], [0.5, 0.9]])
    assert model.predict(centers).tolist() == [0, 1, 2]


def test_out_of_space_query_warns_but_answers():
    X, y = three_blob_data()
    model = MLPSurrogate(hidden=(4,), epochs=10, train_seed=0,
                         bounds=(np.zeros(2), np.ones(2))).fit(X, y)
    with pytest.warns(UserWarning, match="outside"):
        probs = model.predict_proba(np.array([[2.0, 2.0]]))
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_training_determinism_and_seed_sensitivity():
    X, y = three_blob_data()
    m1 = MLPSurrogate(hidden=(8,), epochs=20, train_seed=5).fit(X, y)
    m2 = MLPSurrogate(hidden=(8,), epochs=20, train_seed=5).fit(X, y)
    m3 = MLPSurrogate(hidden=(8,), epochs=20, train_seed=6).fit(X, y)
    for (w1, b1), (w2, b2) in zip(m1.params_, m2.params_):
        np.testing.assert_array_equal(w1, w2)
        np.testing.assert_array_equal(b1, b2)
    assert any(not np.array_equal(w1, w3)
               for (w1, _), (w3, _) in zip(m1.params_, m3.params_))


def test_stronger_l2_shrinks_weights():
    X, y = three_blob_data(n_per=50, seed=4)
    small = MLPSurrogate(hidden=(16,), epochs=80, l2=1e-6, train_seed=0).fit(X, y)
    large = MLPSurrogate(hidden=(16,), epochs=80, l2=0.05, train_seed=0).fit(X, y)
    norm = lambda m: sum(float(np.sum(W ** 2)) for W, _ in m.params_)
    assert norm(large) < norm(small)


def test_divergent_learning_rate_raises_numeric_error():
    X, y = three_blob_data()
    with pytest.raises(NumericError, match="lr"):
        MLPSurrogate(hidden=(8,), epochs=2, lr=1e200, train_seed=0).fit(X, y)


def test_model_save_load_round_trip(tmp_path):
    X, y = three_blob_data()
    model = MLPSurrogate(hidden=(8, 4), epochs=25, train_seed=9).fit(X, y)
    path = tmp_path / "model.npz"
    save_model(model, path)
    clone = load_model(path)
    q = np.random.default_rng(1).random((20, 2))
    np.testing.assert_array_equal(model.predict_proba(q), clone.predict_proba(q))
    assert clone.training_meta_["train_seed"] == 9


# ---------------------------------------------------------------- cross-validation

def test_folds_partition_groups():
    groups = np.arange(40)
    strata = np.repeat([0, 1, 2, 1], 10)
    folds = stratified_group_folds(groups, strata, k=10, seed=0)
    seen = np.concatenate(folds)
    assert sorted(seen.tolist()) == groups.tolist()
    for i in range(10):
        for j in range(i + 1, 10):
            assert not set(folds[i]) & set(folds[j])


def test_folds_stratification_deviation_at_most_one():
    groups = np.arange(55)
    strata = np.array([0] * 23 + [1] * 17 + [2] * 15)
    k = 5
    folds = stratified_group_folds(groups, strata, k, seed=3)
    for cls in (0, 1, 2):
        members = set(groups[strata == cls].tolist())
        counts = [len(members & set(f.tolist())) for f in folds]
        ideal = len(members) / k
        for c in counts:
            assert abs(c - ideal) <= 1


def test_cv_rejects_fewer_groups_than_folds():
    ds = blob_dataset(n_cfg_per_class=2)     # 6 configs < 10 folds
    with pytest.raises(DataError):
        cross_validate(ds, k=10)


def test_cv_group_integrity_and_perfect_separable_score():
    ds = blob_dataset(n_cfg_per_class=12, n_rep=3, seed=1)
    report = cross_validate(ds, k=6, cv_seed=0, hidden=(16,), epochs=120,
                            batch_size=16, lr=5e-3)
    assert report.mean_accuracy == 1.0
    assert report.confusion.sum() == len(ds)
    assert np.all(report.per_class_recall == 1.0)


def test_cv_label_permutation_collapses_to_majority_share():
    ds = blob_dataset(n_cfg_per_class=20, n_rep=2, seed=2, permute_labels=True)
    report = cross_validate(ds, k=5, cv_seed=1, hidden=(16,), epochs=60,
                            batch_size=16, lr=5e-3)
    majority = max(np.mean(ds.scores == s) for s in (0.0, 0.5, 1.0))
    assert report.mean_accuracy == pytest.approx(majority, abs=0.1)
