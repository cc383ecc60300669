import json

import numpy as np
import pytest

from phaseret.io import (dump_measurement, dump_signal, load_measurement,
                         load_signal, load_measurement_file, load_signal_file,
                         save_measurement_file, save_signal_file)
from phaseret.measurement import AugmentationSpec, measure_augmented


def random_signal(seed, n):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def test_signal_json_round_trip_is_exact(tmp_path):
    x = random_signal(0, 13)
    path = str(tmp_path / "sig.json")
    save_signal_file(path, x)
    np.testing.assert_array_equal(load_signal_file(path), x)
    # and through the plain dict API
    np.testing.assert_array_equal(load_signal(json.loads(
        json.dumps(dump_signal(x)))), x)


def test_signal_csv_round_trip_is_exact(tmp_path):
    x = random_signal(1, 9)
    path = str(tmp_path / "sig.csv")
    save_signal_file(path, x)
    np.testing.assert_array_equal(load_signal_file(path), x)


def test_measurement_round_trip_with_augmentation(tmp_path):
    spec = AugmentationSpec(delta=35.0 - 0.25j, gap=2)
    ms = measure_augmented(random_signal(2, 6), spec, 40)
    path = str(tmp_path / "meas.json")
    save_measurement_file(path, ms)
    back = load_measurement_file(path)
    np.testing.assert_array_equal(back.b, ms.b)
    assert back.n == ms.n and back.m == ms.m
    assert back.augmentation.delta == spec.delta
    assert back.augmentation.gap == 2
    assert back.augmentation.side == "prefix"


def test_measurement_round_trip_without_augmentation():
    from phaseret.signals import MeasurementSet
    ms = MeasurementSet([1.0, 0.5, 0.25], 1, sigma2=0.01, real_signal=True)
    back = load_measurement(json.loads(json.dumps(dump_measurement(ms))))
    np.testing.assert_array_equal(back.b, ms.b)
    assert back.sigma2 == 0.01 and back.real_signal and back.augmentation is None


def test_seventeen_digit_floats_round_trip():
    # 0.1 + 0.2 is the canonical hard case for decimal round-trips
    x = np.array([0.1 + 0.2, np.pi, 1e-300])
    obj = json.loads(json.dumps(dump_signal(x)))
    np.testing.assert_array_equal(load_signal(obj).real, x)


def test_malformed_inputs_raise_with_context(tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    with pytest.raises(ValueError, match="invalid JSON"):
        load_signal_file(str(bad_json))

    bad_csv = tmp_path / "bad.csv"
    bad_csv.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(ValueError, match=":2:"):
        load_signal_file(str(bad_csv))

    with pytest.raises(ValueError, match="length mismatch"):
        load_signal({"n": 3, "real": [1.0], "imag": [0.0]})
    with pytest.raises(ValueError, match="malformed"):
        load_measurement({"n": 2})


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = tmp_path / "sig.json"
    save_signal_file(str(path), random_signal(3, 4))
    leftovers = [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]
    assert leftovers == []
