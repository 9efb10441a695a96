import numpy as np
import pandas as pd
import pytest
from scipy import stats

from sift.errors import DimensionMismatch, InsufficientRows, SchemaError
from sift.model_lab import sigmoid
from sift.simulate import (
    AGE_BINS,
    SimulationConfig,
    build_dataset,
    export_dataset,
    feature_columns,
    load_adult,
    make_project1_subsample,
    simulate_segments,
    simulate_target,
    standin_adult_path,
    synth_demographics,
)


@pytest.fixture(scope="module")
def standin():
    return load_adult(standin_adult_path())


class TestLoadAdult:
    def test_missing_marker_rows_dropped(self, standin):
        assert 450 <= len(standin) < 500

    def test_schema(self, standin):
        expected = [f"age_{b}" for b in AGE_BINS] + ["income", "marital_status", "race", "sex"]
        assert list(standin.columns) == expected

    def test_age_one_hot_sums_to_one(self, standin):
        onehots = standin[[f"age_{b}" for b in AGE_BINS]]
        assert (onehots.sum(axis=1) == 1).all()

    def test_age_boundaries(self, tmp_path):
        template = "{age}, Private, 100, HS-grad, 9, Never-married, Sales, Unmarried, White, Male, 0, 0, 40, United-States, <=50K"
        path = tmp_path / "edge.csv"
        path.write_text("\n".join(template.format(age=a) for a in [17, 25, 26, 75, 76]) + "\n")
        table = load_adult(path)
        assert table["age_17-25"].tolist() == [1, 1, 0, 0, 0]
        assert table["age_26-35"].tolist() == [0, 0, 1, 0, 0]
        assert table["age_66-75"].tolist() == [0, 0, 0, 1, 0]
        assert table["age_75+"].tolist() == [0, 0, 0, 0, 1]

    def test_binary_recodes(self, standin):
        assert set(standin["marital_status"]) <= {"married", "single"}
        assert set(standin["race"]) <= {"white", "non-white"}
        assert set(standin["sex"]) <= {"male", "female"}
        assert set(standin["income"]) <= {0, 1}

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_adult(tmp_path / "nope.csv")

    def test_test_split_label_periods_stripped(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text(
            "40, Private, 100, HS-grad, 9, Married-civ-spouse, Sales, Husband, White, Male, 0, 0, 40, United-States, >50K.\n"
        )
        assert load_adult(path)["income"].tolist() == [1]


class TestSegments:
    def test_segment_probabilities_match_logistic(self):
        # married male rows should hit sigma(1), single female rows sigma(-1)
        n = 20000
        adult = pd.DataFrame(
            {
                "marital_status": ["married"] * (n // 2) + ["single"] * (n // 2),
                "sex": ["male"] * (n // 2) + ["female"] * (n // 2),
            }
        )
        c_corr, _ = simulate_segments(adult, SimulationConfig(), seed=3)
        mm = c_corr[: n // 2].mean()
        sf = c_corr[n // 2 :].mean()
        assert mm == pytest.approx(sigmoid(1.0), abs=0.01)
        assert sf == pytest.approx(sigmoid(-1.0), abs=0.01)

    def test_uncorrelated_rates_in_band(self):
        adult = synth_demographics(5000, seed=1)
        _, c_unc = simulate_segments(adult, SimulationConfig(), seed=5)
        rates = c_unc.mean(axis=0)
        assert ((rates > 0.15) & (rates < 0.85)).all()

    def test_deterministic(self):
        adult = synth_demographics(200, seed=2)
        a = simulate_segments(adult, SimulationConfig(), seed=9)
        b = simulate_segments(adult, SimulationConfig(), seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_missing_columns_raise(self):
        with pytest.raises(SchemaError):
            simulate_segments(pd.DataFrame({"sex": ["male"]}), SimulationConfig(), seed=0)


class TestTarget:
    def test_zero_coefficients(self):
        cfg = SimulationConfig()
        adult = synth_demographics(500, seed=4)
        ds = build_dataset(adult, cfg, seed=4)
        cols = feature_columns(cfg)
        zero_at = [i for i, c in enumerate(cols) if c.startswith("age_") or
                   (c.startswith("Cu") and int(c[2:]) > cfg.n_beta_uncorrelated)]
        assert all(ds.beta[i] == 0.0 for i in zero_at)
        nonzero_at = [i for i in range(len(cols)) if i not in zero_at]
        assert all(ds.beta[i] != 0.0 for i in nonzero_at)

    def test_closed_form_probability_with_zero_noise(self):
        cfg = SimulationConfig(noise_sd=0.0)
        adult = synth_demographics(50, seed=6)
        ds = build_dataset(adult, cfg, seed=6)
        p = sigmoid(cfg.intercept + ds.X.to_numpy(float) @ ds.beta)
        assert np.all((p > 0) & (p < 1))
        assert np.array_equal(ds.z, np.zeros(50))

    def test_wrong_columns_raise(self):
        cfg = SimulationConfig()
        X = pd.DataFrame(np.zeros((10, 3)), columns=["a", "b", "c"])
        with pytest.raises(DimensionMismatch):
            simulate_target(X, cfg, seed=0)

    def test_mean_target_not_degenerate(self):
        adult = synth_demographics(2000, seed=8)
        means = []
        for seed in range(10):
            ds = build_dataset(adult, SimulationConfig(), seed=seed)
            means.append(ds.y.mean())
        assert all(0.02 < m < 0.98 for m in means)

    def test_pure_function_of_inputs(self):
        adult = synth_demographics(300, seed=11)
        a = build_dataset(adult, SimulationConfig(), seed=13)
        b = build_dataset(adult, SimulationConfig(), seed=13)
        assert a.X.equals(b.X) and np.array_equal(a.y, b.y) and np.array_equal(a.beta, b.beta)


class TestSubsample:
    def test_exact_stratification(self):
        adult = synth_demographics(8000, seed=20)
        full = build_dataset(adult, SimulationConfig(), seed=20)
        sub = make_project1_subsample(full, seed=7, n_sub=2000)
        assert sub.n == 2000
        assert (sub.sens["race"] == "non-white").sum() == 100

    def test_same_seed_same_rows(self):
        adult = synth_demographics(8000, seed=21)
        full = build_dataset(adult, SimulationConfig(), seed=21)
        a = make_project1_subsample(full, seed=3, n_sub=1000)
        b = make_project1_subsample(full, seed=3, n_sub=1000)
        assert a.X.equals(b.X) and np.array_equal(a.y, b.y)

    def test_insufficient_rows(self):
        adult = synth_demographics(100, seed=22)
        full = build_dataset(adult, SimulationConfig(), seed=22)
        with pytest.raises(InsufficientRows):
            make_project1_subsample(full, seed=0, n_sub=5000)


class TestExport:
    def test_round_trip_with_sidecar(self, tmp_path):
        adult = synth_demographics(100, seed=30)
        ds = build_dataset(adult, SimulationConfig(), seed=30)
        path = tmp_path / "data.csv"
        export_dataset(ds, path)
        table = pd.read_csv(path)
        assert len(table) == 100
        assert "y" in table.columns and "race" in table.columns
        import json

        sidecar = json.loads((tmp_path / "data.csv.json").read_text())
        assert sidecar["seed"] == 30
        assert np.allclose(sidecar["beta"], ds.beta)


class TestGeneratorFidelity:
    def test_sign_recovery_on_large_sample(self):
        # coefficients with magnitude above 0.5 should be recoverable by a
        # logistic fit on half the rows
        from sift.model_lab import SplitSpec, split_train_test, train_logreg

        adult = synth_demographics(20000, seed=40)
        ds = build_dataset(adult, SimulationConfig(), seed=40)
        train_idx, _ = split_train_test(ds.n, SplitSpec(seed=1))
        X = ds.X.to_numpy(float)[train_idx]
        y = ds.y[train_idx]
        info = train_logreg(X, y)
        coef = np.asarray(info.model_params["coef"])
        strong = np.abs(ds.beta) > 0.5
        agree = np.sign(coef[strong]) == np.sign(ds.beta[strong])
        assert agree.mean() >= 0.95
