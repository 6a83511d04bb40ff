import math

import pytest

import pflmaps


def test_branch_eval_and_iterate():
    v_beta = pflmaps.Branch("2", "-1", "1", "0")  # 1/(2-x)
    assert v_beta.eval_exact("1/2") == "2/3"
    assert v_beta.jacobian("1/2", True) == "4/9"
    five = v_beta.iterate(5)
    # (5 - 4x)/(6 - 5x)
    assert five.eval_exact("0") == "5/6"
    assert five.eval_exact("1") == "1"
    assert v_beta.adjoint().adjoint().equivalent(v_beta)


def test_scalar_roundtrip():
    assert pflmaps.scalar_str("0.6") == "3/5"
    assert pflmaps.sqrt_adjoin("20/9") == "(2*sqrt(5))/3"
    assert pflmaps.scalar_str("(2*sqrt(5))/3") == "(2*sqrt(5))/3"
    assert pflmaps.sign("(-3 + sqrt(5))/2") == -1
    assert math.isinf(pflmaps.scalar_float("inf"))


def test_classify_linear_point_dual():
    report = pflmaps.classify("ppp", "1/2", "2/3", "3")
    assert report["outcome"] == "point_dual"
    assert report["xi_point"]["exact"] == "0"
    assert report["certificate"]["exact_zero"] is True


def test_classify_one_step_extension():
    report = pflmaps.classify("ppp", "3/5", "3/5", "1", max_terms=200)
    assert report["outcome"] == "one_step_extension"
    assert report["certificate"]["max_residual"] < 1e-8


def test_classify_negative_case():
    report = pflmaps.classify("mpp", "2", "2", "2")
    assert report["outcome"] == "no_condition_met"
    failing = [c for c in report["conditions"] if c["name"].startswith("V*_lambda(xi)")]
    assert failing and not failing[0]["holds"]
    assert "sqrt(2)" in failing[0]["lhs"]


def test_extension_branch_counts():
    for steps, count in [(1, 3), (2, 5), (3, 9)]:
        result = pflmaps.extend("ppp2", "1", steps=steps, grid=21)
        assert result["branch_count"] == count


def test_histogram_mass():
    mass = pflmaps.orbit_histogram("ppp", "1/2", "2/3", "3", iterations=50000)
    assert abs(sum(mass) - 1.0) < 1e-9
    assert all(abs(m - 0.1) < 0.02 for m in mass)


def test_invariance_exact_zero_in_surd_field():
    residual = pflmaps.invariance("mpp", "1", "1", "1")
    assert residual["exact"] is True
    assert residual["exact_zero"] is True


def test_lemma1_series():
    residual = pflmaps.lemma1("ppp2", "3/5", max_terms=500)
    assert residual["max_residual"] < 1e-10


def test_fibonacci_identity():
    assert pflmaps.fibonacci_iterate_check(20)


def test_dual_formulas():
    duals = pflmaps.dual("ppp", "1", "1", "1")
    assert duals[0] == "(1 + y)/1" or "1 + y" in duals[0]


def test_map_roundtrip_validates():
    map_obj = pflmaps.build_map("mpp", "3", "3/2", "2")
    report = pflmaps.validate_map(map_obj)
    assert report["valid"] is True


def test_out_of_range_raises():
    with pytest.raises(pflmaps.PflError):
        pflmaps.classify("ppp", "2", "1", "1")
