"""
SCENARIOS TEST - 1-D and 2-D deblurring problems, lambda rules and scenario
directories.
"""

import math
import sys
import tempfile
from pathlib import Path

import numpy as np
from pydantic import ValidationError

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from core.errors import ConfigurationError, ConsistencyError
from core.posterior_model import build_cache, conditional_params
from models.scenario import Scenario1dConfig, Scenario2dConfig, Spot
from scenarios.deblur_1d import build_1d, clean_data_1d, discretize_ground_truth_1d, forward_matrix_1d
from scenarios.deblur_2d import block_average, build_2d, default_phantom, operator_2d, render_phantom
from scenarios.lambda_schedule import LAMBDA_TABLE, lambda_schedule, scaled_lambda
from scenarios.scenario_io import MANIFEST, load_scenario, save_scenario


def _small_2d(**overrides) -> Scenario2dConfig:
    params = dict(grid=33, blur_sigma=0.05, fine_factor=2, n_spots=3, radius_range=(0.05, 0.1), seed=4)
    params.update(overrides)
    return Scenario2dConfig(**params)


def test_forward_matrix_rows_integrate_pixels():
    config = Scenario1dConfig(L_u=7, L_m=5)
    matrix = forward_matrix_1d(config)
    assert matrix.shape == (30, 127)
    assert np.allclose(np.asarray(matrix.sum(axis=1)).ravel(), 1.0 / 32.0, atol=1e-15)
    # pixel j = 1 starts at grid point x = 4 h = 1/32
    first_row = matrix.getrow(0)
    assert first_row.indices.min() == 3 and first_row.indices.max() == 7


def test_clean_data_is_exact_pixel_integral():
    config = Scenario1dConfig(L_u=7, L_m=5)
    clean = clean_data_1d(config)
    assert clean.shape == (30,)
    assert np.all((clean >= 0.0) & (clean <= 1.0 / 32.0 + 1e-17))
    assert abs(clean.sum() - 1.0 / 3.0) < 1e-15
    assert np.count_nonzero(np.isclose(clean, 1.0 / 32.0)) == 10
    # the two pixels cut by the jumps overlap the step by 1/96
    partial = clean[(clean > 0) & ~np.isclose(clean, 1.0 / 32.0)]
    assert np.allclose(partial, 1.0 / 96.0)


def test_ground_truth_on_grid():
    truth = discretize_ground_truth_1d(8)
    x = np.arange(1, 9) / 9
    assert np.array_equal(truth, ((x >= 1 / 3) & (x <= 2 / 3)).astype(float))


def test_build_1d_structure_and_determinism():
    config = Scenario1dConfig(L_u=6, L_m=5, lambda_rule="fixed:400", seed=7)
    bundle = build_1d(config)
    model = bundle.model
    assert (model.n, model.k) == (63, 30)
    assert model.lambda_value == 400.0
    model.check_prior_structure()
    assert bundle.shape == (63,)
    again = build_1d(config)
    assert np.array_equal(again.model.data, model.data)
    other = build_1d(config.model_copy(update={"seed": 8}))
    assert not np.array_equal(other.model.data, model.data)
    assert np.array_equal(bundle.clean_data, clean_data_1d(config))


def test_1d_config_validation():
    for kwargs in ({"L_u": 5, "L_m": 5}, {"L_u": 6, "L_m": 1}, {"L_u": 6, "noise_sigma": 0.0}, {"L_u": 6, "lambda_rule": "huge"}):
        try:
            Scenario1dConfig(**kwargs)
        except ValidationError:
            continue
        raise AssertionError(f"invalid config accepted: {kwargs}")


def test_lambda_rules():
    assert lambda_schedule("table", 127) == 280.0
    assert lambda_schedule("table", 1023) == LAMBDA_TABLE[1023] == 800.0
    assert lambda_schedule("table-value", 255) == lambda_schedule("table", 255) == 400.0
    assert Scenario1dConfig(L_u=7, lambda_rule="table-value").lambda_rule == "table-value"
    assert lambda_schedule("fixed:123.5", 63) == 123.5
    assert abs(lambda_schedule("scaled", 127) - 25.0 * math.sqrt(128.0)) < 1e-12
    assert abs(scaled_lambda(255) - 400.0) < 1e-12
    for rule, n in (("table", 63), ("table-value", 63), ("fixed:-1", 63), ("bogus", 63)):
        try:
            lambda_schedule(rule, n)
        except ConfigurationError:
            continue
        raise AssertionError(f"lambda rule {rule!r} for n={n} should raise")


def test_2d_operator_keeps_zero_and_constant_images():
    operator, prior, basis = operator_2d(_small_2d())
    n = operator.input_dim
    assert n == 33 * 33
    assert not operator.apply(np.zeros(n)).any()
    assert np.allclose(operator.apply(np.full(n, 0.7)), 0.7, atol=1e-12)
    assert basis.is_identity and basis.penalized.all()
    assert prior.shape == (n, n)


def test_default_phantom_places_disjoint_spots():
    spots = default_phantom(np.random.Generator(np.random.PCG64(1)), n_spots=8)
    assert len(spots) == 8
    for i, s in enumerate(spots):
        assert s.radius <= s.center_x <= 1.0 - s.radius
        for t in spots[i + 1:]:
            assert math.hypot(s.center_x - t.center_x, s.center_y - t.center_y) >= s.radius + t.radius
    try:
        default_phantom(np.random.Generator(np.random.PCG64(1)), n_spots=50, radius_range=(0.3, 0.4))
    except ConfigurationError:
        return
    raise AssertionError("impossible phantom must raise")


def test_render_and_block_average():
    whole = render_phantom([Spot(center_x=0.5, center_y=0.5, radius=2.0, intensity=1.5)], 6, supersample=3)
    assert whole.shape == (6, 6) and np.allclose(whole, 1.5)
    image = np.arange(16.0).reshape(4, 4)
    assert np.array_equal(block_average(image, 2), [[2.5, 4.5], [10.5, 12.5]])


def test_build_2d():
    bundle = build_2d(_small_2d())
    model = bundle.model
    assert bundle.shape == (33, 33)
    assert model.n == model.k == 33 * 33
    assert len(bundle.spots) == 3
    assert abs(model.noise_sigma - 0.1 * bundle.clean_data.max()) < 1e-15
    model.check_prior_structure()
    # blurring the rendered truth on the coarse grid is close to the fine-grid data model
    predicted = model.operator.apply(bundle.ground_truth)
    assert np.linalg.norm(predicted - bundle.clean_data) < 0.1 * np.linalg.norm(bundle.clean_data)


def test_2d_explicit_spots():
    spots = [Spot(center_x=0.3, center_y=0.6, radius=0.1, intensity=1.0)]
    bundle = build_2d(_small_2d(spots=spots))
    assert [s.center_x for s in bundle.spots] == [0.3]
    try:
        build_2d(_small_2d(spots=[]))
    except ConfigurationError:
        return
    raise AssertionError("empty phantom must raise")


def test_scenario_round_trip_1d():
    bundle = build_1d(Scenario1dConfig(L_u=6, lambda_rule="scaled", seed=3))
    with tempfile.TemporaryDirectory() as tmp:
        save_scenario(bundle, tmp)
        assert (Path(tmp) / MANIFEST).exists()
        loaded = load_scenario(tmp)
    assert loaded.kind == "1d" and loaded.config == bundle.config
    assert np.array_equal(loaded.model.data, bundle.model.data)
    assert loaded.model.lambda_value == bundle.model.lambda_value
    assert loaded.model.noise_sigma == bundle.model.noise_sigma
    assert np.array_equal(loaded.ground_truth, bundle.ground_truth)
    xi = np.linspace(-1.0, 1.0, bundle.model.n)
    for model_a, model_b in ((bundle.model, loaded.model),):
        cache_a = build_cache(model_a, "dense-gram", xi)
        cache_b = build_cache(model_b, "dense-gram", xi)
        for i in (0, 5, 62):
            assert conditional_params(i, xi, cache_a, model_a) == conditional_params(i, xi, cache_b, model_b)


def test_scenario_round_trip_2d():
    bundle = build_2d(_small_2d())
    with tempfile.TemporaryDirectory() as tmp:
        save_scenario(bundle, tmp)
        loaded = load_scenario(tmp)
    assert loaded.kind == "2d"
    assert loaded.config == bundle.config
    assert loaded.spots == bundle.spots
    assert np.array_equal(loaded.model.data, bundle.model.data)
    assert loaded.model.noise_sigma == bundle.model.noise_sigma


def test_load_rejects_missing_or_inconsistent():
    with tempfile.TemporaryDirectory() as tmp:
        try:
            load_scenario(tmp)
        except ConsistencyError:
            pass
        else:
            raise AssertionError("missing manifest must raise")

        save_scenario(build_1d(Scenario1dConfig(L_u=6, seed=1)), tmp)
        manifest = Path(tmp) / MANIFEST
        manifest.write_text(manifest.read_text().replace("n = 63", "n = 64"))
        try:
            load_scenario(tmp)
        except ConsistencyError:
            return
        raise AssertionError("dimension mismatch must raise")


if __name__ == "__main__":
    print("\n" + "=" * 80)
    print("[TEST] SCENARIOS")
    print("=" * 80 + "\n")
    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"[PASS] {name}")
            except Exception as e:
                failures += 1
                print(f"[FAIL] {name}: {type(e).__name__}: {e}")
    print("\n" + "=" * 80)
    print(f"[SUMMARY] {failures} failure(s)")
    print("=" * 80 + "\n")
    sys.exit(1 if failures else 0)
