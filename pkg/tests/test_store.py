import json
import os

import pytest

import gmpy2
from cvxremez.precision import to_scalar
from cvxremez.remez import best_approx
from cvxremez.convex_sip import best_convex_approx
from cvxremez.store import (
    ConfigError,
    RunConfig,
    cache_key,
    cache_load,
    cache_store,
    payload_to_result,
    result_to_payload,
    scalar_from_json,
    scalar_to_json,
)
from cvxremez.targets import abs_pow

TOL = to_scalar("1e-10")


class TestScalarSerialization:
    def test_round_trip_bit_identical(self):
        values = [
            to_scalar("0.1"),
            to_scalar(1) / 3,
            gmpy2.sqrt(to_scalar(2)),
            to_scalar(0),
            -gmpy2.const_pi(),
            to_scalar("1e-300"),
        ]
        for v in values:
            back = scalar_from_json(scalar_to_json(v))
            assert back == v
            assert gmpy2.to_binary(back) == gmpy2.to_binary(v)


class TestResultPayloads:
    def test_approx_round_trip(self):
        r = best_approx(abs_pow(1), 3, TOL)
        back = payload_to_result(json.loads(json.dumps(result_to_payload(r))))
        assert back.degree == r.degree
        assert back.error_lower == r.error_lower
        assert back.error_upper == r.error_upper
        assert back.equioscillation_ratio == r.equioscillation_ratio
        assert back.iterations == r.iterations
        assert all(a == b for a, b in zip(back.polynomial.coeffs, r.polynomial.coeffs))
        assert all(a == b for a, b in zip(back.reference.nodes, r.reference.nodes))

    def test_convex_round_trip(self):
        r = best_convex_approx(abs_pow(1), 4, TOL)
        back = payload_to_result(json.loads(json.dumps(result_to_payload(r))))
        assert back.error_lower == r.error_lower
        assert back.error_upper == r.error_upper
        assert back.convexity_slack == r.convexity_slack
        assert back.cut_rounds == r.cut_rounds
        assert all(a == b for a, b in zip(back.polynomial.coeffs, r.polynomial.coeffs))


class TestCache:
    def test_store_and_load(self, tmp_path):
        key = cache_key("abs_pow", 1, 1, 1, 4, False, 256, TOL, 32)
        cache_store(str(tmp_path), key, {"payload": 42})
        rec = cache_load(str(tmp_path), key)
        assert rec["payload"] == 42
        assert rec["key"] == key
        assert "created_at" in rec

    def test_missing_is_none(self, tmp_path):
        assert cache_load(str(tmp_path), "0" * 64) is None
        assert cache_load(None, "0" * 64) is None

    def test_corrupt_record_is_miss(self, tmp_path):
        key = cache_key("abs_pow", 1, 1, 1, 5, False, 256, TOL, 32)
        path = tmp_path / (key + ".json")
        path.write_text("{ not json", encoding="utf-8")
        assert cache_load(str(tmp_path), key) is None

    def test_key_sensitivity(self):
        base = cache_key("abs_pow", 1, 1, 1, 4, False, 256, TOL, 32)
        assert base != cache_key("abs_pow", 1, 1, 1, 5, False, 256, TOL, 32)
        assert base != cache_key("abs_pow", 1, 1, 1, 4, True, 256, TOL, 32)
        assert base != cache_key("abs_pow", 1, 1, 1, 4, False, 320, TOL, 32)
        assert base != cache_key("abs_pow", 1, 1, 1, 4, False, 256, TOL, 48)
        assert base != cache_key("abs_pow", "1.5", 1, 1, 4, False, 256, TOL, 32)

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        key = cache_key("abs_pow", 1, 1, 1, 6, False, 256, TOL, 32)
        cache_store(str(tmp_path), key, {"x": 1})
        names = os.listdir(tmp_path)
        assert names == [key + ".json"]


class TestRunConfig:
    def test_defaults_validate(self):
        RunConfig().validate()

    def test_precision_floor(self):
        with pytest.raises(ConfigError):
            RunConfig(precision_bits=32).validate()

    def test_tol_precision_consistency(self):
        with pytest.raises(ConfigError):
            RunConfig(precision_bits=64, tol_rel=to_scalar("1e-30")).validate()
        # the same tolerance is acceptable once the precision supports it
        RunConfig(precision_bits=256, tol_rel=to_scalar("1e-30")).validate()

    def test_constrained_requires_convex_lambda(self):
        with pytest.raises(ConfigError):
            RunConfig(lambda_list=[to_scalar("0.5")], constrained=True).validate()
        RunConfig(lambda_list=[to_scalar("0.5")], constrained=False).validate()

    def test_range_order(self):
        with pytest.raises(ConfigError):
            RunConfig(n_min=5, n_max=2).validate()

    def test_format_checked(self):
        with pytest.raises(ConfigError):
            RunConfig(format="xml").validate()
