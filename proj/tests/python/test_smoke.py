import math

import numpy as np
import pytest

import mvrank


@pytest.fixture(scope="module")
def data():
    spec = mvrank.SynthSpec()
    spec.samples = 80
    views = mvrank.synth_generate(spec)
    return mvrank.prepare_data(views, pairs_per_query=10)


def test_synth_views_share_keys():
    views = mvrank.synth_generate(mvrank.SynthSpec())
    assert len(views) == 3
    assert all(v.keys == views[0].keys for v in views)
    assert [v.features.shape[1] for v in views] == [10, 12, 8]


def test_metrics():
    assert mvrank.kendall_tau([1, 2, 3], [1, 2, 3]) == 1.0
    assert mvrank.kendall_tau([1, 2, 3], [3, 2, 1]) == -1.0
    assert mvrank.roc_auc([0.9, 0.8, 0.2], [1, 1, 0]) == 1.0
    assert mvrank.map_at_k([([3.0, 2.0, 1.0], [1, 0, 1])], 3) == pytest.approx(5 / 6)


@pytest.mark.parametrize("method", ["mvccae", "mvmdae", "dmvdr"])
def test_train_predict_evaluate(data, method):
    model = mvrank.train(method, data.train_pairs, epochs=2, seed=3)
    assert model.method == method
    assert model.view_count == 3
    p = mvrank.predict(model, data.test_pairs.features)
    assert p.shape == (len(data.test_pairs),)
    assert np.all((p > 0) & (p < 1))
    metrics = mvrank.evaluate(data, p)
    assert math.isfinite(metrics["kendall_tau"])
    assert 0.0 <= metrics["accuracy"] <= 1.0

    single = mvrank.predict(model, [None, data.test_pairs.features[1], None])
    assert single.shape == p.shape

    again = mvrank.model_from_json(model.to_json())
    assert np.array_equal(mvrank.predict(again, data.test_pairs.features), p)


def test_training_is_seeded(data):
    a = mvrank.train("dmvdr", data.train_pairs, epochs=2, seed=5)
    b = mvrank.train("dmvdr", data.train_pairs, epochs=2, seed=5)
    assert a.to_json() == b.to_json()


def test_save_and_load(tmp_path, data):
    model = mvrank.train("mvmdae", data.train_pairs, epochs=1)
    path = tmp_path / "model.json"
    model.save(path)
    assert mvrank.load_model(path).to_json() == model.to_json()


def test_errors_are_typed(data):
    with pytest.raises(mvrank.MvrankError):
        mvrank.kendall_tau([1.0], [1.0])
    with pytest.raises(mvrank.MvrankError):
        mvrank.train("dmvdr", data.train_pairs, epochs=0)
    with pytest.raises(mvrank.MvrankError):
        mvrank.train("dmvdr", data.train_pairs, bogus=1)
    model = mvrank.train("dmvdr", data.train_pairs, epochs=1)
    with pytest.raises(mvrank.MvrankError):
        mvrank.predict(model, [None, None, None])


def test_gradcheck_suites_pass():
    results = mvrank.gradcheck(instances=2, seed=4)
    assert "mlp_backprop" in results
    assert all(passed for passed, _, _ in results.values())


def test_cli_usage_error_exit_code():
    assert mvrank.run_cli(["frobnicate"]) == 2
