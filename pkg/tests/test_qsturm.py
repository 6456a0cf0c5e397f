"""qsturm 模块测试"""

import pytest
from mpmath import mp, mpf

from src.core.errors import QDomainError, QRangeError, QSingularityError
from src.core.qcore import GridFunction, QGrid, QPoint
from src.core.qsturm import (
    BoundaryParams, Coupling, Potential, Problem, bracket_profile, certify_solution,
    coeffs_fitted, coeffs_integral, compact_potential, default_fit_window, gaussian_potential,
    gronwall_certify, green_kernel, homogeneous_solution, kernel_factors, main_identity_report,
    main_identity_residual, ode_residuals, parse_potential_spec, picard_solve, q_wronskian, solve,
    wronskian_product_formula, zero_potential,
)


@pytest.fixture
def compact(sturm_grid):
    return compact_potential(sturm_grid, 0, 5, 0.1)


class TestBoundaryData:
    def test_e1_at_zero_angle(self, qp_half):
        a, b = BoundaryParams(0.0, Problem.E1).initial_data(qp_half)
        assert a == 0
        assert b == 1

    def test_e2_at_zero_angle(self, qp_half):
        a, b = BoundaryParams(0.0, Problem.E2).initial_data(qp_half)
        assert a == pytest.approx(0.5 ** 0.5, rel=1e-15)
        assert b == 0

    def test_problem_from_string(self, qp_half):
        assert BoundaryParams(0.3, "E2").initial_data(qp_half) == \
            BoundaryParams(0.3, Problem.E2).initial_data(qp_half)


class TestPotentials:
    def test_compact_support(self, sturm_grid):
        p = compact_potential(sturm_grid, 2, 5, 0.1)
        assert p.support() == (2, 5)
        assert p.p.at(6) == 0
        assert p.norm_inf == mpf(0.1)
        assert p.norm_1 == pytest.approx(0.05 * (0.25 + 0.125 + 0.0625 + 0.03125), rel=1e-14)

    def test_zero_has_no_support(self, sturm_grid):
        assert zero_potential(sturm_grid).support() is None

    def test_compact_outside_grid(self, sturm_grid):
        with pytest.raises(QRangeError):
            compact_potential(sturm_grid, 25, 40, 1.0)

    def test_gaussian_decays(self, sturm_grid):
        p = gaussian_potential(sturm_grid, 1.0)
        assert p.p.at(30) == pytest.approx(1.0, rel=1e-15)
        assert p.p.at(-10) < 1e-10

    @pytest.mark.parametrize("spec, support", [
        ("zero", None),
        ("compact:0:5:0.1", (0, 5)),
        ("compact:-3:-1:2", (-3, -1)),
    ])
    def test_parse_spec(self, sturm_grid, spec, support):
        assert parse_potential_spec(spec, sturm_grid).support() == support

    def test_parse_gaussian_and_coupling(self, sturm_grid):
        p = parse_potential_spec("gaussian:0.5", sturm_grid, "shifted")
        assert p.coupling is Coupling.SHIFTED

    @pytest.mark.parametrize("spec", ["foo", "zero:1", "compact:1:2", "compact:a:b:c",
                                      "gaussian:x", "csv:"])
    def test_parse_rejects_malformed(self, sturm_grid, spec):
        with pytest.raises(QDomainError):
            parse_potential_spec(spec, sturm_grid)

    def test_potential_from_csv(self, tmp_path, sturm_grid):
        source = compact_potential(sturm_grid, 1, 3, 0.25)
        path = tmp_path / "p.csv"
        source.p.to_csv(str(path))
        loaded = parse_potential_spec(f"csv:{path}", sturm_grid)
        assert loaded.support() == (1, 3)

    def test_pivot_factors(self, small_grid):
        p = compact_potential(small_grid, 1, 1, 2.0)
        assert p.pivot_factors()[1] == pytest.approx(1 - 0.25 * 0.25 * 2.0, rel=1e-15)
        assert p.bracket_factor() == pytest.approx(0.875, rel=1e-15)
        shifted = compact_potential(small_grid, 1, 1, 2.0, Coupling.SHIFTED)
        assert shifted.bracket_factor() == 1


class TestWronskian:
    @pytest.mark.parametrize("K", [0, 2, 4])
    def test_basis_wronskian_is_one(self, sturm_grid, K):
        u1 = homogeneous_solution(1, 0, QPoint(-K), sturm_grid)
        u2 = homogeneous_solution(0, 1, QPoint(-K), sturm_grid)
        for k in (-10, 0, 12, 29):
            w = q_wronskian(u1, u2, k)
            assert abs(w.value - 1) < 1e-10
            assert w.discrepancy < 1e-10

    def test_product_formula_without_coefficient(self, small_grid):
        a = GridFunction.constant(small_grid, 0)
        assert wronskian_product_formula(a, 3, 5) == 3

    def test_product_formula_singular_factor(self, small_grid):
        # 1 + (1-q) q^0 a = 0 at k = 0
        a = GridFunction.from_callable(small_grid, lambda k, x: -2 if k == 0 else 0)
        with pytest.raises(QSingularityError):
            wronskian_product_formula(a, 1, 0)


class TestGreenKernel:
    def test_matches_kernel_factors(self, sturm_grid, qp_half):
        kf = kernel_factors(4, sturm_grid)
        for kx, ky in [(0, 3), (-5, 10), (12, 12)]:
            expected = kf.S.at(kx) * kf.C.at(ky) - kf.c.at(kx) * kf.s.at(ky)
            value = green_kernel(QPoint(kx), QPoint(ky), QPoint(-4), qp_half)
            assert float(value) == pytest.approx(float(expected), rel=1e-10, abs=1e-14)

    def test_small_y_limit(self, sturm_grid, qp_half):
        kf = kernel_factors(4, sturm_grid)
        value = green_kernel(QPoint(2), QPoint(30), QPoint(-4), qp_half)
        assert abs(value - kf.S.at(2)) < 1e-7

    def test_off_grid_arguments(self, qp_half):
        with pytest.raises(QDomainError):
            green_kernel(0.3, QPoint(1), QPoint(-4), qp_half)


class TestSolve:
    @pytest.mark.parametrize("problem", list(Problem))
    def test_zero_potential_gives_homogeneous_solution(self, sturm_grid, qp_half, problem):
        bc = BoundaryParams(0.3, problem)
        sol = solve(zero_potential(sturm_grid), QPoint(-4), bc)
        with mp.workdps(sol.dps):
            a, b = bc.initial_data(qp_half)
            expected = homogeneous_solution(a, b, QPoint(-4), sturm_grid)
            assert (sol.u - expected).sup_norm() / expected.sup_norm() < 1e-12

    def test_lambda_must_be_grid_point(self, sturm_grid):
        with pytest.raises(QDomainError):
            solve(zero_potential(sturm_grid), 3.0, BoundaryParams(0.0))

    def test_singular_pivot(self, sturm_grid):
        # 1 - (1-q)^2 x^2 p = 0 at x = 1 when q = 1/2, p = 4
        p = compact_potential(sturm_grid, 0, 0, 4.0)
        with pytest.raises(QSingularityError):
            solve(p, QPoint(-2), BoundaryParams(0.0))

    def test_shifted_coupling_has_no_pivot(self, sturm_grid):
        p = compact_potential(sturm_grid, 0, 0, 4.0, Coupling.SHIFTED)
        sol = solve(p, QPoint(-2), BoundaryParams(0.0))
        assert sol.bracket_factor == 1
        assert sol.coupling is Coupling.SHIFTED

    @pytest.mark.parametrize("coupling", list(Coupling))
    def test_residual_is_small(self, sturm_grid, coupling):
        p = compact_potential(sturm_grid, 0, 5, 0.1, coupling)
        sol = solve(p, QPoint(-6), BoundaryParams(0.3))
        assert sol.ode_residual_rel < 1e-10
        residuals = ode_residuals(sol, p)
        assert sorted(residuals) == list(range(-10, 29))

    def test_bracket_factor_matches_potential(self, sturm_grid, compact):
        sol = solve(compact, QPoint(-4), BoundaryParams(0.3))
        assert sol.bracket_factor == pytest.approx(float(compact.bracket_factor()), rel=1e-10)
        assert sol.support == (0, 5)

    @pytest.mark.parametrize("coupling", list(Coupling))
    def test_picard_agrees(self, sturm_grid, coupling):
        p = compact_potential(sturm_grid, 0, 5, 0.1, coupling)
        bc = BoundaryParams(0.3, Problem.E1)
        sol = solve(p, QPoint(-4), bc)
        oracle = picard_solve(p, QPoint(-4), bc)
        assert oracle.converged
        with mp.workdps(sol.dps):
            assert (sol.u - oracle.u).sup_norm() / sol.u.sup_norm() < 1e-10


class TestGronwall:
    def test_constant_function_passes(self, small_grid):
        f = GridFunction.constant(small_grid, 2)
        report = gronwall_certify(f, 2, 0)
        assert report.passed
        assert report.hypothesis_violations == 0
        assert report.valid_to == small_grid.k_min

    def test_extremal_function_is_certified(self, small_grid):
        g = mpf('0.1')

        def extremal(k, x):
            return 1 / mp.fprod(1 - mpf(0.5) * mpf(0.5) ** j * g for j in range(k, 21))

        f = GridFunction.from_callable(small_grid, extremal)
        report = gronwall_certify(f, 1, g)
        assert report.passed
        assert report.hypothesis_violations == 0
        assert report.valid_to == 0
        assert abs(report.min_margin) < 1e-12
        assert len(report.printed_bounds) == len(small_grid)

    def test_hypothesis_violations_are_reported(self, small_grid):
        f = GridFunction.constant(small_grid, 2)
        report = gronwall_certify(f, 1, 0)
        assert report.hypothesis_violations == len(small_grid)
        assert report.valid_to is None
        assert report.to_dict()["points"] == len(small_grid)

    def test_rejects_negative_input(self, small_grid):
        with pytest.raises(QDomainError):
            gronwall_certify(GridFunction.constant(small_grid, -1), 1, 0)
        with pytest.raises(QDomainError):
            gronwall_certify(GridFunction.constant(small_grid, 1), 1, -0.5)

    @pytest.mark.parametrize("K", [4, 8])
    def test_solution_certificate(self, sturm_grid, compact, K):
        sol = solve(compact, QPoint(-K), BoundaryParams(0.3))
        assert certify_solution(sol, compact).passed


class TestCoefficients:
    def test_zero_potential_coefficients(self, sturm_grid, qp_half):
        p = zero_potential(sturm_grid)
        sol = solve(p, QPoint(-4), BoundaryParams(0.0))
        integral = coeffs_integral(sol, p)
        assert integral.mu == 0
        assert integral.nu == pytest.approx(1 / 16, rel=1e-14)
        fitted = coeffs_fitted(sol)
        assert abs(fitted.mu) < 1e-12
        assert fitted.nu == pytest.approx(1 / 16, rel=1e-10)
        assert fitted.mu1 is None

    def test_default_window_lies_left_of_support(self, sturm_grid, compact):
        sol = solve(compact, QPoint(-4), BoundaryParams(0.3))
        assert default_fit_window(sol) == (-8, -1)

    def test_window_overlapping_support(self, sturm_grid, compact):
        sol = solve(compact, QPoint(-4), BoundaryParams(0.3))
        with pytest.raises(QDomainError):
            coeffs_fitted(sol, window=(-6, 3))

    def test_window_too_short(self, sturm_grid, compact):
        sol = solve(compact, QPoint(-4), BoundaryParams(0.3))
        with pytest.raises(QDomainError):
            coeffs_fitted(sol, window=(-6, -2))

    @pytest.mark.parametrize("problem", list(Problem))
    def test_integral_agrees_with_fit(self, sturm_grid, compact, problem):
        sol = solve(compact, QPoint(-10), BoundaryParams(0.3, problem))
        fitted = coeffs_fitted(sol)
        integral = coeffs_integral(sol, compact)
        names = ("mu", "nu") if problem is Problem.E1 else ("mu1", "nu1")
        for name in names:
            a, b = getattr(fitted, name), getattr(integral, name)
            assert abs(a - b) <= 1e-5 * max(abs(a), abs(b))

    def test_coupling_mismatch(self, sturm_grid, compact):
        sol = solve(compact, QPoint(-4), BoundaryParams(0.3))
        shifted = compact_potential(sturm_grid, 0, 5, 0.1, Coupling.SHIFTED)
        with pytest.raises(QDomainError):
            coeffs_integral(sol, shifted)

    def test_merge_and_record(self, sturm_grid, compact):
        phi = solve(compact, QPoint(-8), BoundaryParams(0.0, Problem.E1))
        theta = solve(compact, QPoint(-8), BoundaryParams(0.0, Problem.E2))
        merged = coeffs_integral(phi, compact).merge(coeffs_integral(theta, compact))
        record = merged.to_dict()
        assert set(record) == {"lambda", "K", "method", "mu", "nu", "mu1", "nu1", "fit_residual"}
        assert record["K"] == 8
        assert record["lambda"] == 256.0
        assert all(record[name] is not None for name in ("mu", "nu", "mu1", "nu1"))

    def test_merge_requires_same_lambda(self, sturm_grid, compact):
        first = coeffs_integral(solve(compact, QPoint(-4), BoundaryParams(0.0)), compact)
        second = coeffs_integral(solve(compact, QPoint(-6), BoundaryParams(0.0, Problem.E2)),
                                 compact)
        with pytest.raises(QDomainError):
            first.merge(second)


class TestMainIdentity:
    def test_zero_potential(self, sturm_grid):
        p = zero_potential(sturm_grid)
        phi = solve(p, QPoint(-4), BoundaryParams(0.0, Problem.E1))
        theta = solve(p, QPoint(-4), BoundaryParams(0.0, Problem.E2))
        report = main_identity_report(coeffs_integral(phi, p), coeffs_integral(theta, p))
        assert report.residual < 1e-12
        assert report.sign == -1

    @pytest.mark.parametrize("alpha", [0.0, 0.3])
    def test_compact_potential(self, sturm_grid, compact, alpha):
        phi = solve(compact, QPoint(-10), BoundaryParams(alpha, Problem.E1))
        theta = solve(compact, QPoint(-10), BoundaryParams(alpha, Problem.E2))
        assert main_identity_residual(coeffs_fitted(phi), coeffs_fitted(theta)) < 1e-4

    def test_requires_both_problems(self, sturm_grid, compact):
        phi = solve(compact, QPoint(-4), BoundaryParams(0.0, Problem.E1))
        with pytest.raises(QDomainError):
            main_identity_report(coeffs_integral(phi, compact), coeffs_integral(phi, compact))

    def test_requires_same_lambda(self, sturm_grid, compact):
        phi = solve(compact, QPoint(-4), BoundaryParams(0.0, Problem.E1))
        theta = solve(compact, QPoint(-5), BoundaryParams(0.0, Problem.E2))
        with pytest.raises(QDomainError):
            main_identity_report(coeffs_integral(phi, compact), coeffs_integral(theta, compact))


@pytest.mark.parametrize("coupling", list(Coupling))
def test_bracket_profile(sturm_grid, coupling):
    p = compact_potential(sturm_grid, 0, 5, 0.1, coupling)
    phi = solve(p, QPoint(-6), BoundaryParams(0.3, Problem.E1))
    theta = solve(p, QPoint(-6), BoundaryParams(0.3, Problem.E2))
    profile = bracket_profile(phi, theta, p)
    assert len(profile) == len(sturm_grid) - 1
    assert max(pt.residual / abs(pt.expected) for pt in profile) < 1e-9


def test_potential_and_solution_must_share_grid(sturm_grid, qp_half):
    other = zero_potential(QGrid(qp_half, -10, 29))
    sol = solve(zero_potential(sturm_grid), QPoint(-4), BoundaryParams(0.0))
    with pytest.raises(QDomainError):
        coeffs_integral(sol, other)


def test_potential_wraps_grid_function(small_grid):
    p = Potential(GridFunction.constant(small_grid, 1), "shifted")
    assert p.coupling is Coupling.SHIFTED
    assert p.grid is small_grid
