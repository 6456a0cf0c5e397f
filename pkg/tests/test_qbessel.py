"""qbessel 模块测试"""

import pytest
from mpmath import mp

from src.core.errors import QDomainError, QHypothesisError, QRangeError
from src.core.qcore import GridFunction, QGrid, QPoint
from src.core.qbessel import (
    bessel_basis_wronskian, bessel_grid_values, bessel_ode_residual,
    bessel_remainder, delta_q_alpha, heat_kernel, heat_moment, principal_on_lattice,
    ramanujan_B_alpha, ramanujan_direct_sum, remainder_constants, weber_A_alpha, weber_integral,
)


@pytest.fixture
def bessel_grid(qp_half):
    return QGrid(qp_half, -5, 15)


class TestDeltaOperator:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_square_is_mapped_to_constant(self, bessel_grid, alpha):
        q = 0.5
        expected = (1 + q) * (1 - q ** (2 * alpha + 2)) / (1 - q)
        square = GridFunction.from_callable(bessel_grid, lambda k, x: x * x)
        for k in (-4, 0, 9):
            forms = delta_q_alpha(square, alpha, k)
            assert forms.second == pytest.approx(expected, rel=1e-12)
            assert forms.discrepancy < 1e-12

    def test_needs_neighbours(self, bessel_grid):
        f = GridFunction.constant(bessel_grid, 1)
        with pytest.raises(QRangeError):
            delta_q_alpha(f, 0.0, bessel_grid.k_min)
        with pytest.raises(QRangeError):
            delta_q_alpha(f, 0.0, bessel_grid.k_max)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_bessel_equation(self, bessel_grid, alpha):
        assert bessel_ode_residual(alpha, QPoint(-2), bessel_grid) < 1e-9

    def test_basis_wronskian_is_constant(self, qp_half):
        values = bessel_basis_wronskian(0.0, QPoint(-2), QGrid(qp_half, 0, 20))
        with mp.workdps(60):
            reference = values[-1]
            assert max(abs(v - reference) for v in values) <= 1e-8 * abs(reference)

    def test_grid_values_cover_grid(self, bessel_grid):
        values = bessel_grid_values(0.5, -1, bessel_grid)
        assert len(values.values) == len(bessel_grid)


class TestRemainder:
    def test_lattice_condition(self, qp_half, qp_plain):
        assert principal_on_lattice(0.5, qp_half)
        assert principal_on_lattice(-0.5, qp_half)
        assert not principal_on_lattice(0.0, qp_half)
        assert not principal_on_lattice(0.5, qp_plain)

    def test_constants_vanish_at_cosine_order(self, qp_half):
        C_q, C_q_chain = remainder_constants(-0.5, qp_half)
        assert C_q == 0
        assert C_q_chain == 0

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_remainder_decays_within_bound(self, qp_half, alpha):
        reports = [bessel_remainder(QPoint(0), QPoint(-K), alpha, qp_half) for K in (4, 8, 12)]
        magnitudes = [abs(r.remainder) for r in reports]
        assert magnitudes[0] > magnitudes[1] > magnitudes[2]
        assert all(r.within_bound for r in reports)
        assert all(r.principal_on_lattice for r in reports)

    def test_row_layout(self, qp_half):
        report = bessel_remainder(QPoint(1), QPoint(-4), 0.5, qp_half)
        row = report.to_row()
        assert len(row) == 8
        assert row[1] == 4
        assert float(row[2]) == 16.0
        assert float(row[3]) == 0.5
        assert float(row[6]) == pytest.approx(float(row[4]) - float(row[5]), abs=1e-15)

    @pytest.mark.parametrize("alpha", [-0.5, -0.75])
    def test_hypothesis(self, qp_half, alpha):
        with pytest.raises(QHypothesisError):
            bessel_remainder(QPoint(0), QPoint(-4), alpha, qp_half)

    def test_off_grid_argument(self, qp_half):
        with pytest.raises(QDomainError):
            bessel_remainder(0.3, QPoint(-4), 0.5, qp_half)


class TestWeber:
    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0])
    def test_normalization_positive(self, qp_half, alpha):
        assert weber_A_alpha(alpha, qp_half) > 0

    def test_normalization_domain(self, qp_half):
        with pytest.raises(QDomainError):
            weber_A_alpha(-1.0, qp_half)

    @pytest.mark.parametrize("alpha, a_exp, K", [(0.0, 0, 1), (0.5, 1, 4), (1.0, -1, 1)])
    def test_weber_identity(self, qp_half, alpha, a_exp, K):
        report = weber_integral(QPoint(a_exp), QPoint(-K), alpha, qp_half)
        assert report.residual < 1e-8
        assert report.M0 == weber_A_alpha(alpha, qp_half)


class TestRamanujan:
    @pytest.mark.parametrize("alpha, t_exp", [(0.5, 0), (0.0, 0), (1.0, 2)])
    def test_closed_form_matches_sum(self, qp_half, alpha, t_exp):
        closed = ramanujan_B_alpha(QPoint(t_exp), alpha, qp_half)
        direct = ramanujan_direct_sum(QPoint(t_exp), alpha, qp_half)
        assert closed == pytest.approx(float(direct), rel=1e-8)

    @pytest.mark.parametrize("fn", [ramanujan_B_alpha, ramanujan_direct_sum])
    def test_order_domain(self, qp_half, fn):
        with pytest.raises(QDomainError):
            fn(1, -0.5, qp_half)

    def test_zero_argument(self, qp_half):
        with pytest.raises(QDomainError):
            ramanujan_B_alpha(0, 0.5, qp_half)

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_heat_moment(self, qp_half, alpha):
        expected = 0.5 * ramanujan_B_alpha(1, alpha, qp_half)
        assert heat_moment(1, alpha, qp_half) == pytest.approx(float(expected), rel=1e-10)


class TestHeatKernel:
    def test_record_on_lattice(self, qp_half):
        record = heat_kernel(QPoint(0), QPoint(-4), 0.5, qp_half)
        assert record.residual < 1e-8
        assert record.theta is not None
        assert record.theta_bound is not None
        data = record.to_dict()
        assert set(data) == {"alpha", "t", "lambda", "A_alpha", "E_value", "lhs_integral",
                             "principal_integral", "theta", "theta_bound", "residual"}
        assert data["lambda"] == 16.0

    def test_theta_decays(self, qp_half):
        small = heat_kernel(QPoint(0), QPoint(-4), 0.5, qp_half)
        large = heat_kernel(QPoint(0), QPoint(-12), 0.5, qp_half)
        assert abs(large.theta) < abs(small.theta)

    def test_off_lattice_principal_is_skipped(self, qp_half):
        record = heat_kernel(QPoint(0), QPoint(-1), 0.0, qp_half)
        assert record.principal_integral is None
        assert record.theta is None
        assert record.to_dict()["theta"] is None

    @pytest.mark.parametrize("t_exp, K, alpha", [(1, 2, 0.5), (1, 3, 0.0), (-3, 4, 0.5)])
    def test_time_must_be_even_power(self, qp_half, t_exp, K, alpha):
        # √t = q^{s/2} 必须落在格点上
        with pytest.raises(QDomainError) as excinfo:
            heat_kernel(QPoint(t_exp), QPoint(-K), alpha, qp_half)
        assert excinfo.value.details["t_exp"] == t_exp
