"""Tests for analytic transforms, the grid oracle, reports and stabilizers."""

import numpy as np
import pytest
from scipy import special

from src.framework.core.exceptions import (
    BesselDomainError,
    ConfigError,
    GridTooCoarseError,
    ModeAtZeroError,
    StabilizerInvalidError,
    UnsupportedAlphaError,
)
from src.framework.core.kernels import (
    Cramer,
    Direction,
    Elastic,
    GaussianRbf,
    RationalQuadratic,
    RescaledGaussian,
    RescaledRq,
    Stabilized,
    Sum,
)
from src.framework.core.spectral import (
    FourierConvention,
    Verdict,
    analytic_ft,
    analytic_ft_grid,
    background_constant,
    bessel_k0,
    calibrate_convention,
    default_convention,
    default_xi_grid,
    growth_rate,
    is_integrable,
    minimal_epsilon,
    oracle_ft,
    oracle_on_grid,
    reference_table,
    signed_log_ft,
    spectrum_report,
    stability_verdict,
    verdicts_from_ft,
)

GRID = default_xi_grid()


class TestAnalyticTransforms:
    """Tests for the tabulated transforms."""

    def test_gaussian_transform(self):
        """Test F(Gaussian sigma)(xi) = sigma exp(-sigma^2 xi^2 / 4)."""
        assert analytic_ft(GaussianRbf(sigma=2.0), 1.0) == pytest.approx(2.0 * np.exp(-1.0))
        assert analytic_ft(RescaledGaussian(sigma=2.0), 1.0) == pytest.approx(np.exp(-1.0))

    def test_rq_table(self):
        """Test each tabulated alpha against its closed form with decaying exponent."""
        xi = 1.5
        assert analytic_ft(RationalQuadratic(alpha=0.5), xi) == pytest.approx(2 * special.k0(xi))
        assert analytic_ft(RationalQuadratic(alpha=1.0), xi) == pytest.approx(np.exp(-xi))
        assert analytic_ft(RationalQuadratic(alpha=2.0), xi) == pytest.approx(
            0.5 * (8 - xi) * np.exp(-xi)
        )
        assert analytic_ft(RationalQuadratic(alpha=3.0), xi) == pytest.approx(
            0.25 * (xi**2 - 3 * xi + 3) * np.exp(-xi)
        )
        assert analytic_ft(RescaledRq(alpha=0.5), xi) == pytest.approx(special.k0(xi))

    def test_rq_untabulated_alpha(self):
        """Test alpha outside the table is rejected."""
        with pytest.raises(UnsupportedAlphaError) as exc_info:
            analytic_ft(RationalQuadratic(alpha=1.5), 1.0)
        assert exc_info.value.alpha == 1.5

    def test_pole_at_zero(self):
        """Test transforms with a pole reject the zero mode."""
        for k in [RationalQuadratic(alpha=0.5), Cramer(), Elastic()]:
            with pytest.raises(ModeAtZeroError):
                analytic_ft(k, 0.0)

    def test_cramer_and_elastic_power_laws(self):
        """Test C/|xi|^(n+1) for Cramer and 1/|xi| for the dimension-matched elastic kernel."""
        assert analytic_ft(Cramer(), 2.0, dim=2, cramer_constant=3.0) == pytest.approx(3.0 / 8.0)
        assert analytic_ft(Elastic(), 4.0, dim=3) == pytest.approx(0.25)
        assert analytic_ft(Elastic(exponent=5.0), 2.0, dim=2) == pytest.approx(8.0)

    def test_linearity(self):
        """Test sums and stabilized kernels combine transforms linearly."""
        a, b = RescaledGaussian(sigma=4.0), RescaledGaussian(sigma=1.0)
        xi = np.array([0.1, 1.0, 3.0])
        np.testing.assert_allclose(
            analytic_ft_grid(Sum.of(a, b, weights=(2.0, 1.0)), xi),
            2 * analytic_ft_grid(a, xi) + analytic_ft_grid(b, xi),
        )
        np.testing.assert_allclose(
            analytic_ft_grid(Stabilized(base=a, stabilizer=b, epsilon=0.5), xi),
            analytic_ft_grid(a, xi) - 0.5 * analytic_ft_grid(b, xi),
        )

    def test_signed_log_keeps_sign_past_underflow(self):
        """Test the signed form keeps the sign and magnitude where the value is zero."""
        k = Stabilized(
            base=RescaledGaussian(sigma=4.0), stabilizer=RescaledGaussian(sigma=1.0), epsilon=1.5
        )
        xi = np.array([1.0, 100.0])
        sign, log_abs = signed_log_ft(k, xi)
        assert analytic_ft_grid(k, xi)[1] == 0.0
        np.testing.assert_array_equal(sign, [-1.0, -1.0])
        assert log_abs[1] == pytest.approx(np.log(1.5) - 2500.0)
        assert sign[0] * np.exp(log_abs[0]) == pytest.approx(analytic_ft(k, 1.0))

    def test_bessel_k0(self):
        """Test K0 values and its domain."""
        assert bessel_k0(1.0) == pytest.approx(0.42102443824070834)
        with pytest.raises(BesselDomainError):
            bessel_k0(0.0)


class TestGrowthRates:
    """Tests for per-mode growth rates and verdicts."""

    def test_discriminator_gaussian_rate(self):
        """Test the discriminator rate of the unit Gaussian at xi=1."""
        rate = growth_rate(GaussianRbf(sigma=1.0), Direction.DISCRIMINATOR, 1.0, 1.0)
        assert rate == pytest.approx((2 * np.pi) ** 2 * np.exp(-0.25))
        assert rate == pytest.approx(30.74, abs=0.01)

    def test_generator_rate_is_negated(self):
        """Test the two directions have opposite rates."""
        k = RationalQuadratic(alpha=3.0)
        gen = growth_rate(k, Direction.GENERATOR, 2.0, 0.7)
        disc = growth_rate(k, Direction.DISCRIMINATOR, 2.0, 0.7)
        assert gen == pytest.approx(-disc)
        assert gen < 0

    def test_zero_background(self):
        """Test C = 0 freezes every mode."""
        assert growth_rate(GaussianRbf(sigma=1.0), Direction.DISCRIMINATOR, 0.0, 3.0) == 0.0

    def test_negative_background_rejected(self):
        """Test C < 0 is a configuration error."""
        with pytest.raises(ConfigError):
            growth_rate(GaussianRbf(sigma=1.0), Direction.GENERATOR, -1.0, 1.0)

    def test_background_constant(self):
        """Test C = 2 C0."""
        assert background_constant(0.5) == 1.0

    def test_gaussian_verdicts(self):
        """Test a Gaussian kernel is generator-stable and discriminator-unstable."""
        verdicts = stability_verdict(GaussianRbf(sigma=2.0), GRID)
        assert verdicts == (Verdict.STABLE, Verdict.UNSTABLE)

    def test_rq_alpha_two_is_mixed(self):
        """Test alpha=2 changes sign at xi=8 in both directions."""
        report = spectrum_report(RationalQuadratic(alpha=2.0), with_oracle=False)
        assert report.verdict_gen == Verdict.MIXED_BY_MODE
        assert report.verdict_disc == Verdict.MIXED_BY_MODE
        assert report.sign_flips.size == 1
        assert report.sign_flips[0] == pytest.approx(8.0, rel=1e-3)

    def test_stabilized_gaussian_pair_verdicts(self):
        """Test eps above the threshold makes the discriminator stable."""
        k = Stabilized(
            base=RescaledGaussian(sigma=4.0), stabilizer=RescaledGaussian(sigma=1.0), epsilon=1.5
        )
        assert stability_verdict(k, GRID) == (Verdict.UNSTABLE, Verdict.STABLE)

    def test_verdict_survives_underflow(self):
        """Test modes whose value underflows to zero still count with their sign."""
        k = RescaledGaussian(sigma=16.0)
        assert np.count_nonzero(analytic_ft_grid(k, GRID) == 0.0) > 100
        assert stability_verdict(k, GRID) == (Verdict.STABLE, Verdict.UNSTABLE)

    def test_verdict_skips_exact_zeros(self):
        """Test exact zeros carry no sign when classifying sampled values."""
        assert verdicts_from_ft([1.0, 0.0, 2.0]) == (Verdict.STABLE, Verdict.UNSTABLE)

    def test_neutral_verdict(self):
        """Test an all-zero transform is neutrally stable in both directions."""
        assert verdicts_from_ft(np.zeros(4)) == (
            Verdict.NEUTRALLY_STABLE,
            Verdict.NEUTRALLY_STABLE,
        )

    def test_grid_must_be_positive(self):
        """Test an empty or non-positive mode grid is rejected."""
        with pytest.raises(ConfigError):
            stability_verdict(GaussianRbf(sigma=1.0), np.array([0.0, 1.0]))


class TestOracle:
    """Tests for the periodic-grid spectrum."""

    def test_convention_amplitude(self):
        """Test the calibrated amplitude is sqrt(2 pi)."""
        convention = calibrate_convention()
        assert convention.amplitude == pytest.approx(np.sqrt(2 * np.pi), rel=1e-6)
        assert convention.frequency_scale == pytest.approx(2 * np.sqrt(2) * np.pi)

    def test_convention_round_trip(self):
        """Test table and cycle frequencies convert both ways."""
        convention = FourierConvention()
        xi = np.array([0.5, 2.0])
        np.testing.assert_allclose(convention.to_table(convention.to_cycles(xi)), xi)

    @pytest.mark.parametrize("sigma", [1.0, 2.0, 4.0])
    def test_gaussian_oracle_matches_analytic(self, sigma):
        """Test the oracle reproduces the Gaussian transform at its own bins."""
        k = GaussianRbf(sigma=sigma)
        convention = FourierConvention()
        spectrum = oracle_ft(k)
        analytic = convention.amplitude * analytic_ft_grid(
            k, convention.to_table(spectrum.xi_cycles)
        )
        mask = analytic > 1e-6 * sigma
        assert mask.sum() > 10
        np.testing.assert_allclose(spectrum.values[mask], analytic[mask], rtol=1e-6)

    def test_interpolated_oracle_tracks_analytic(self):
        """Test the oracle interpolated onto the mode grid agrees in sign and size."""
        k = GaussianRbf(sigma=2.0)
        oracle = oracle_on_grid(oracle_ft(k), GRID, default_convention())
        analytic = analytic_ft_grid(k, GRID)
        mask = ~np.isnan(oracle) & (analytic > 1e-6)
        assert mask.sum() > 50
        np.testing.assert_allclose(oracle[mask], analytic[mask], rtol=0.1)

    def test_grid_too_coarse(self):
        """Test a kernel narrower than four cells is rejected with a hint."""
        with pytest.raises(GridTooCoarseError) as exc_info:
            oracle_ft(GaussianRbf(sigma=0.1), domain_half_width=100.0, grid_points=1024)
        assert "grid-points" in exc_info.value.hint
        assert exc_info.value.length_scale == 0.1

    def test_grid_points_power_of_two(self):
        """Test a non power-of-two grid is rejected."""
        with pytest.raises(ConfigError):
            oracle_ft(GaussianRbf(sigma=1.0), grid_points=1000)

    def test_cramer_oracle_parity(self):
        """Test the radial part -r has positive odd modes and vanishing even modes."""
        spectrum = oracle_ft(Cramer(), domain_half_width=10.0, grid_points=1024)
        scale = np.max(np.abs(spectrum.values))
        assert np.all(spectrum.values[1:20:2] > 0)
        assert np.all(np.abs(spectrum.values[2:20:2]) < 1e-9 * scale)

    def test_constant_mode_is_never_resolved(self):
        """Test the zero-frequency bin is excluded from sign comparisons."""
        spectrum = oracle_ft(GaussianRbf(sigma=1.0))
        assert not spectrum.resolved()[0]
        assert spectrum.resolved()[1]

    def test_truncation_bound_by_kernel_class(self):
        """Test only integrable kernels carry a tail bound, decaying with frequency."""
        assert not is_integrable(Cramer())
        assert not is_integrable(Sum.of(Elastic(), GaussianRbf(sigma=1.0)))
        cramer = oracle_ft(Cramer(), domain_half_width=10.0, grid_points=1024)
        assert cramer.edge_slope == 0.0
        np.testing.assert_array_equal(cramer.truncation_bound(cramer.xi_cycles[1:]), 0.0)
        rq = oracle_ft(RationalQuadratic(alpha=1.0))
        assert rq.edge_slope > 0
        bound = rq.truncation_bound(rq.xi_cycles[1:4])
        assert bound[0] > bound[1] > bound[2] > 0

    @pytest.mark.parametrize(
        "name", ["cramer", "gaussian", "rq_alpha_0.5", "rq_alpha_1", "rq_alpha_3", "eieg"]
    )
    def test_reference_rows_agree_with_oracle(self, name):
        """Test the oracle confirms the analytic sign on every resolved mode."""
        row = next(row for row in reference_table() if row.name == name)
        report = spectrum_report(row.kernel)
        assert not report.has_discrepancy
        assert np.count_nonzero(~np.isnan(report.oracle_ft)) > 0

    def test_rq_alpha_two_discrepancy(self):
        """Test the oracle stays positive past xi=8 where the printed formula turns negative."""
        report = spectrum_report(RationalQuadratic(alpha=2.0))
        assert report.has_discrepancy
        assert np.all(report.discrepancies > 8.0)
        assert np.any((report.discrepancies > 8.0) & (report.discrepancies < 12.0))
        near_ten = np.argmin(np.abs(report.xi_grid - 10.0))
        assert report.oracle_ft[near_ten] > 0
        assert report.analytic_ft[near_ten] < 0

    def test_stabilized_oracle_all_negative(self):
        """Test the stabilized pair is negative at every resolved grid mode."""
        k = Stabilized(
            base=RescaledGaussian(sigma=4.0), stabilizer=RescaledGaussian(sigma=1.0), epsilon=1.5
        )
        report = spectrum_report(k)
        assert report.oracle_verdict_disc == Verdict.STABLE
        assert not report.has_discrepancy


class TestSpectrumReport:
    """Tests for report contents."""

    def test_rows_and_summary(self):
        """Test rows carry every column and growth rates follow the transform sign."""
        report = spectrum_report(GaussianRbf(sigma=2.0), xi_grid=[0.5, 1.0], with_oracle=False)
        rows = report.rows()
        assert list(rows[0]) == ["xi", "analytic_ft", "oracle_ft", "growth_gen", "growth_disc"]
        assert rows[0]["growth_gen"] < 0 < rows[0]["growth_disc"]
        assert np.isnan(rows[0]["oracle_ft"])
        summary = report.summary()
        assert summary["verdict_gen"] == "Stable"
        assert summary["oracle_verdict_gen"] is None

    def test_notes_flag_cramer_and_rq(self):
        """Test reports record the known printed-formula issues."""
        assert spectrum_report(Cramer(), with_oracle=False).notes
        assert spectrum_report(RationalQuadratic(alpha=3.0), with_oracle=False).notes
        assert not spectrum_report(GaussianRbf(sigma=1.0), with_oracle=False).notes

    def test_reference_table_rows(self):
        """Test every reference row is present with its printed cells."""
        rows = {row.name: row for row in reference_table()}
        assert set(rows) == {
            "cramer",
            "gaussian",
            "rq_alpha_0.5",
            "rq_alpha_1",
            "rq_alpha_2",
            "rq_alpha_3",
            "eieg",
        }
        assert rows["rq_alpha_2"].printed_gen == Verdict.MIXED_BY_MODE
        gaussian = rows["gaussian"]
        verdicts = stability_verdict(gaussian.kernel, GRID)
        assert verdicts == (gaussian.printed_gen, gaussian.printed_disc)


class TestMinimalEpsilon:
    """Tests for the stabilizer weight solver."""

    def test_gaussian_pair(self):
        """Test rgaussian(4) over rgaussian(1) peaks at the smallest mode."""
        solution = minimal_epsilon(RescaledGaussian(sigma=4.0), RescaledGaussian(sigma=1.0))
        assert solution.epsilon_min == pytest.approx(np.exp(-15 * 0.05**2 / 4), rel=1e-9)
        assert 0.95 <= solution.epsilon_min <= 1.0
        assert solution.margin > 0
        assert solution.certifies(1.5)
        assert not solution.certifies(0.5)

    def test_rq_pair(self):
        """Test the K0(xi) e^xi ratio is maximal at the smallest mode."""
        grid = np.logspace(np.log10(0.5), np.log10(20.0), 256)
        solution = minimal_epsilon(RescaledRq(alpha=0.5), RescaledRq(alpha=1.0), grid)
        assert solution.epsilon_min == pytest.approx(special.k0(0.5) * np.exp(0.5), rel=1e-9)
        assert solution.epsilon_min == pytest.approx(1.5241, abs=1e-4)

    def test_identical_pair(self):
        """Test base = stabilizer needs exactly one."""
        k = GaussianRbf(sigma=2.0)
        assert minimal_epsilon(k, k).epsilon_min == 1.0

    def test_invalid_stabilizer(self):
        """Test a stabilizer with a negative transform is rejected at the first bad mode."""
        with pytest.raises(StabilizerInvalidError) as exc_info:
            minimal_epsilon(GaussianRbf(sigma=1.0), RationalQuadratic(alpha=2.0))
        assert exc_info.value.xi > 8.0

    def test_margin_table(self):
        """Test the margin table is eps F(s) - F(e) at each mode."""
        solution = minimal_epsilon(RescaledGaussian(sigma=2.0), RescaledGaussian(sigma=1.0))
        table = solution.margin_table(2.0)
        np.testing.assert_allclose(table, 2.0 * solution.stabilizer_ft - solution.base_ft)
        assert solution.margin_at(2.0) == pytest.approx(table.min())

    def test_identical_wide_pair(self):
        """Test a wide identical pair needs exactly one even where both transforms underflow."""
        k = RescaledGaussian(sigma=4.0)
        solution = minimal_epsilon(k, k)
        assert solution.epsilon_min == 1.0
        assert solution.certifies(1.0 + 1e-9)
        assert not solution.certifies(1.0)

    def test_ratio_formed_in_log_space(self):
        """Test the ratio stays exact where the stabilizer transform underflows."""
        solution = minimal_epsilon(RescaledGaussian(sigma=16.0), RescaledGaussian(sigma=8.0))
        assert np.any(solution.stabilizer_ft == 0.0)
        near = GRID < 3.0
        expected = np.exp(-48.0 * GRID[near] ** 2)
        np.testing.assert_allclose(solution.ratio[near], expected, rtol=1e-9)
        assert solution.epsilon_min == pytest.approx(np.exp(-48.0 * 0.05**2), rel=1e-9)

    def test_base_outlasting_stabilizer_rejected(self):
        """Test no finite weight exists when the base decays far slower than the stabilizer."""
        with pytest.raises(StabilizerInvalidError) as exc_info:
            minimal_epsilon(RescaledGaussian(sigma=1.0), RescaledGaussian(sigma=16.0))
        assert exc_info.value.xi > 3.0
