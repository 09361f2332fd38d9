import pytest

import gmpy2
from cvxremez.limits import (
    LsBoundViolation,
    SequenceRow,
    SequenceTable,
    boundedness_report,
    build_sequence,
    extrapolate_limit,
    ls_inequality_check,
    oq2_scaled_error,
)
from cvxremez.precision import to_scalar
from cvxremez.targets import abs_pow

TOL = to_scalar("1e-10")


def synthetic_table(values, lam=1, constrained=False):
    """A table whose scaled column is exactly `values[n]` at each n."""
    rows = []
    for n, v in values.items():
        v = to_scalar(v)
        rows.append(
            SequenceRow(
                n=n,
                lam=to_scalar(lam),
                half_width=to_scalar(1),
                constrained=constrained,
                e_lower=v / to_scalar(max(n, 1)) ** to_scalar(lam),
                e_upper=v / to_scalar(max(n, 1)) ** to_scalar(lam),
                scaled_lower=v,
                scaled_upper=v,
                iterations=1,
            )
        )
    return SequenceTable(
        rows=rows, target=abs_pow(lam), constrained=constrained, tol_rel=TOL
    )


class TestBuildSequence:
    def test_abs_small_sweep(self):
        table = build_sequence(abs_pow(1), 1, 3, constrained=False, tol_rel=TOL)
        scaled = [r.scaled_upper for r in table.rows]
        for got, want in zip(scaled, ("0.5", "0.25", "0.375")):
            assert abs(got - to_scalar(want)) < to_scalar("1e-9")

    def test_polynomial_target_all_zero(self):
        table = build_sequence(abs_pow(2), 2, 5, constrained=False, tol_rel=TOL)
        assert all(r.status == "ok" for r in table.rows)
        assert all(r.scaled_upper < to_scalar("1e-60") for r in table.rows)

    def test_constrained_matches_unconstrained_at_vacuous_degrees(self):
        t_u = build_sequence(abs_pow(1), 1, 2, constrained=False, tol_rel=TOL)
        t_c = build_sequence(abs_pow(1), 1, 2, constrained=True, tol_rel=TOL)
        for ru, rc in zip(t_u.rows, t_c.rows):
            gap = max(ru.e_lower - rc.e_upper, rc.e_lower - ru.e_upper)
            assert gap <= 10 * TOL * ru.e_upper

    def test_fast_path_duplicates_odd_degrees(self):
        table = build_sequence(abs_pow(1), 2, 5, constrained=False, tol_rel=TOL)
        assert table.fast_path_used
        by_n = {r.n: r for r in table.rows}
        assert by_n[3].duplicated and by_n[5].duplicated
        assert by_n[3].e_upper == by_n[2].e_upper
        # scaled columns use the row's own n
        assert by_n[3].scaled_upper == 3 * by_n[2].e_upper

    def test_strict_mode_disables_fast_path(self):
        table = build_sequence(
            abs_pow(1), 2, 3, constrained=False, tol_rel=TOL, strict=True
        )
        assert not table.fast_path_used
        assert not any(r.duplicated for r in table.rows)

    def test_failed_rows_are_recorded(self):
        def flaky(f, n, constrained, tol_rel, grid_factor):
            if n == 3:
                from cvxremez.remez import RemezError

                raise RemezError("synthetic failure")
            return {
                "e_lower": to_scalar("0.1"),
                "e_upper": to_scalar("0.1"),
                "equioscillation_ratio": to_scalar(1),
                "convexity_slack": None,
                "iterations": 1,
                "wall_ms": 0.0,
            }

        table = build_sequence(
            abs_pow(1), 2, 4, constrained=False, tol_rel=TOL,
            strict=True, solver=flaky,
        )
        by_n = {r.n: r for r in table.rows}
        assert by_n[3].status == "failed" and "synthetic" in by_n[3].detail
        assert by_n[2].status == "ok" and by_n[4].status == "ok"

    def test_validation(self):
        with pytest.raises(ValueError):
            build_sequence(abs_pow(1), 3, 1, constrained=False)
        with pytest.raises(ValueError):
            build_sequence(abs_pow("0.5"), 0, 2, constrained=True)


class TestExtrapolation:
    def test_first_order_model_is_exact(self):
        table = synthetic_table({n: 1 + to_scalar(1) / n for n in range(10, 21)})
        report = extrapolate_limit(table, 1, [(10, 20)], parity="any")
        assert abs(report.estimates[0][1] - 1) < to_scalar("1e-40")

    def test_constant_sequence(self):
        table = synthetic_table({n: 3 for n in range(5, 16)})
        for method in ("richardson", "aitken"):
            report = extrapolate_limit(table, 1, [(5, 15)], method=method, parity="any")
            assert abs(report.estimates[0][1] - 3) < to_scalar("1e-40")

    def test_second_order_model_two_windows(self):
        vals = {
            n: 2 + to_scalar(1) / n + to_scalar(1) / (n * n) for n in range(8, 41)
        }
        table = synthetic_table(vals)
        report = extrapolate_limit(table, 2, [(8, 20), (21, 40)], parity="any")
        for _, est in report.estimates:
            assert abs(est - 2) < to_scalar("1e-12")
        assert report.spread < to_scalar("1e-12")
        assert report.stable

    def test_insufficient_rows(self):
        table = synthetic_table({n: 1 for n in range(4, 8)})
        with pytest.raises(ValueError):
            extrapolate_limit(table, 3, [(4, 7)], parity="any")

    def test_nonpositive_values_rejected(self):
        table = synthetic_table({n: 0 for n in range(4, 12)})
        with pytest.raises(ValueError):
            extrapolate_limit(table, 1, [(4, 11)], parity="any")

    def test_even_parity_selection(self):
        # odd rows poisoned; even-parity selection must ignore them
        vals = {}
        for n in range(10, 31):
            vals[n] = 1 + to_scalar(1) / n if n % 2 == 0 else to_scalar(50)
        table = synthetic_table(vals)
        report = extrapolate_limit(table, 1, [(10, 30)], parity="even")
        assert abs(report.estimates[0][1] - 1) < to_scalar("1e-40")

    def test_bad_method(self):
        table = synthetic_table({n: 1 for n in range(4, 12)})
        with pytest.raises(ValueError):
            extrapolate_limit(table, 1, [(4, 11)], method="pade")


class TestBoundedness:
    def test_decreasing_sequence(self):
        table = build_sequence(abs_pow(1), 1, 12, constrained=False, tol_rel=TOL)
        sup, ratio = boundedness_report(table)
        assert abs(sup - to_scalar("0.5")) < to_scalar("1e-9")
        assert ratio <= 1

    def test_all_zero_table(self):
        table = synthetic_table({n: 0 for n in range(1, 9)})
        sup, ratio = boundedness_report(table)
        assert sup == 0 and ratio == 0

    def test_constant_table(self):
        table = synthetic_table({n: 2 for n in range(1, 13)})
        sup, ratio = boundedness_report(table)
        assert sup == 2 and ratio == 1

    def test_needs_eight_rows(self):
        table = synthetic_table({n: 1 for n in range(1, 8)})
        with pytest.raises(ValueError):
            boundedness_report(table)


class TestLsInequality:
    def test_cubic_against_scaled_abs(self):
        # rhs is E_2 of 6|x|, i.e. 6/8, known in closed form
        lhs, rhs, ratio = ls_inequality_check(abs_pow(3), 4, TOL)
        assert abs(rhs - to_scalar("0.75")) < to_scalar("1e-9")
        assert lhs <= rhs * (1 + TOL)
        assert ratio < to_scalar("0.1")

    def test_polynomial_target_ratio_zero(self):
        lhs, rhs, ratio = ls_inequality_check(abs_pow(2), 4, TOL)
        assert ratio == 0 and lhs < to_scalar("1e-60")

    def test_quartic_at_degree_six(self):
        lhs, rhs, ratio = ls_inequality_check(abs_pow(4), 6, TOL)
        assert ratio == 0
        assert lhs < to_scalar("1e-60") and rhs < to_scalar("1e-60")

    def test_validation(self):
        with pytest.raises(ValueError):
            ls_inequality_check(abs_pow("1.5"), 4, TOL)
        with pytest.raises(ValueError):
            ls_inequality_check(abs_pow(3), 1, TOL)


class TestOq2Scaling:
    def test_width_two(self):
        lo, up = oq2_scaled_error(abs_pow(1), 2, 2, TOL)
        assert abs(up - to_scalar("0.25")) < to_scalar("1e-9")

    def test_width_one_reduces_to_base(self):
        lo, up = oq2_scaled_error(abs_pow(1), 1, 2, TOL)
        assert abs(up - to_scalar("0.125")) < to_scalar("1e-9")

    def test_polynomial_target(self):
        lo, up = oq2_scaled_error(abs_pow(2), 3, 2, TOL)
        assert up < to_scalar("1e-60")

    def test_scaling_law(self):
        lam = to_scalar("1.5")
        base = oq2_scaled_error(abs_pow(lam), 1, 4, TOL)
        for a in (to_scalar("0.5"), to_scalar(2)):
            wide = oq2_scaled_error(abs_pow(lam), a, 4, TOL)
            factor = a ** lam
            gap = max(factor * base[0] - wide[1], wide[0] - factor * base[1])
            assert gap <= to_scalar("1e-10") * max(wide[1], factor * base[1])

    def test_bad_width(self):
        with pytest.raises(ValueError):
            oq2_scaled_error(abs_pow(1), 0, 2, TOL)
