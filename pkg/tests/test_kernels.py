"""Tests for kernel values, gradients and vectorized sums."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.framework.core.exceptions import NonFiniteError, ShapeMismatchError, SingularPairError
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
    evaluate,
    grad,
    grad_sum,
    interaction_sign,
    kernel_adapter,
    length_scale,
    pairwise,
    radial_profile,
)

STAB = Stabilized(
    base=RescaledGaussian(sigma=4.0), stabilizer=RescaledGaussian(sigma=1.0), epsilon=1.5
)

SMOOTH_KERNELS = [
    GaussianRbf(sigma=1.0),
    RescaledGaussian(sigma=2.0),
    RationalQuadratic(alpha=0.5),
    RescaledRq(alpha=2.0),
    Sum.of(GaussianRbf(sigma=0.5), RationalQuadratic(alpha=3.0), weights=(2.0, 0.5)),
    STAB,
]


def _numeric_grad(k, x, y, h=1e-6):
    out = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        out[i] = (evaluate(k, x + step, y) - evaluate(k, x - step, y)) / (2 * h)
    return out


def _probe_pairs(rng, n, dim, min_sep=0.0, avoid_origin=0.0):
    pairs = []
    while len(pairs) < n:
        x = rng.uniform(-2, 2, dim)
        y = rng.uniform(-2, 2, dim)
        if np.linalg.norm(x - y) < min_sep:
            continue
        if avoid_origin and min(np.linalg.norm(x), np.linalg.norm(y)) < avoid_origin:
            continue
        pairs.append((x, y))
    return pairs


class TestKernelValues:
    """Tests for closed-form kernel values."""

    def test_gaussian_at_zero_and_one_sigma(self):
        """Test the Gaussian is 1 at zero separation and e^(-1/2) at one sigma."""
        k = GaussianRbf(sigma=2.0)
        assert evaluate(k, [0.0, 0.0], [0.0, 0.0]) == pytest.approx(1.0)
        assert evaluate(k, [0.0, 0.0], [2.0, 0.0]) == pytest.approx(np.exp(-0.5))

    def test_rescaled_variants(self):
        """Test rescaled Gaussian divides by sigma and rescaled RQ multiplies by alpha."""
        r = np.array([0.0, 0.7, 3.0])
        np.testing.assert_allclose(
            radial_profile(RescaledGaussian(sigma=4.0), r),
            radial_profile(GaussianRbf(sigma=4.0), r) / 4.0,
        )
        np.testing.assert_allclose(
            radial_profile(RescaledRq(alpha=2.0), r),
            2.0 * radial_profile(RationalQuadratic(alpha=2.0), r),
        )

    def test_rational_quadratic(self):
        """Test RQ(alpha=1) at r=2 is 1/3."""
        assert evaluate(RationalQuadratic(alpha=1.0), [0.0], [2.0]) == pytest.approx(1.0 / 3.0)

    def test_cramer_value(self):
        """Test Cramer distance with anchor at the origin."""
        value = evaluate(Cramer(), [1.0, 0.0], [0.0, 1.0])
        assert value == pytest.approx(2.0 - np.sqrt(2.0))

    def test_cramer_custom_anchor(self):
        """Test the anchor shifts the unary terms."""
        value = evaluate(Cramer(z0=(1.0, 0.0)), [1.0, 0.0], [1.0, 2.0])
        assert value == pytest.approx(0.0 + 2.0 - 2.0)

    def test_cramer_anchor_dimension_mismatch(self):
        """Test a 3-D anchor is rejected for 2-D points."""
        with pytest.raises(ShapeMismatchError):
            evaluate(Cramer(z0=(0.0, 0.0, 0.0)), [1.0, 0.0], [0.0, 1.0])

    def test_elastic_default_exponent_in_2d(self):
        """Test the default exponent n-1 gives 1/r in two dimensions."""
        assert evaluate(Elastic(), [0.0, 0.0], [3.0, 4.0]) == pytest.approx(0.2)

    def test_elastic_log_potential_in_1d(self):
        """Test the one-dimensional default is -ln r."""
        assert evaluate(Elastic(), [0.0], [np.e]) == pytest.approx(-1.0)

    def test_elastic_strict_rejects_coincident_points(self):
        """Test strict mode raises on a singular pair."""
        with pytest.raises(SingularPairError) as exc_info:
            evaluate(Elastic(), [1.0, 1.0], [1.0, 1.0], strict=True)
        assert exc_info.value.separation == 0.0

    def test_elastic_clamps_without_strict(self):
        """Test the non-strict value is finite and equals the clamp value."""
        k = Elastic(exponent=1.0, r_min=1e-3)
        assert evaluate(k, [0.0, 0.0], [0.0, 0.0]) == pytest.approx(1e3)

    def test_symmetry(self, rng):
        """Test e(x, y) = e(y, x) for every variant."""
        for k in [*SMOOTH_KERNELS, Cramer(), Elastic()]:
            for x, y in _probe_pairs(rng, 10, 3, min_sep=0.1):
                assert evaluate(k, x, y) == pytest.approx(evaluate(k, y, x))

    def test_radial_under_rotation(self, rng):
        """Test rotating both points about the origin leaves every radial kernel unchanged."""
        for k in [*SMOOTH_KERNELS, Elastic()]:
            for _ in range(5):
                rotation = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
                x, y = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
                assert evaluate(k, rotation @ x, rotation @ y) == pytest.approx(
                    evaluate(k, x, y), rel=1e-12
                )

    def test_shape_mismatch(self):
        """Test points of different dimension are rejected."""
        with pytest.raises(ShapeMismatchError):
            evaluate(GaussianRbf(sigma=1.0), [0.0, 0.0], [0.0])

    def test_overflowing_sum_is_non_finite(self):
        """Test a kernel value that overflows raises NonFiniteError."""
        k = Elastic(exponent=400.0, r_min=1e-300)
        with pytest.raises(NonFiniteError):
            evaluate(k, [0.0, 0.0], [1e-200, 0.0])


class TestKernelGradients:
    """Tests for closed-form gradients against central differences."""

    @pytest.mark.parametrize("kernel", SMOOTH_KERNELS, ids=lambda k: k.label())
    def test_smooth_kernels_match_finite_differences(self, kernel, rng):
        """Test 100 random probes per smooth kernel."""
        for x, y in _probe_pairs(rng, 100, 3):
            np.testing.assert_allclose(
                grad(kernel, x, y), _numeric_grad(kernel, x, y), rtol=1e-5, atol=1e-8
            )

    def test_cramer_matches_finite_differences(self, rng):
        """Test Cramer away from its kinks."""
        k = Cramer()
        for x, y in _probe_pairs(rng, 100, 2, min_sep=0.2, avoid_origin=0.2):
            np.testing.assert_allclose(grad(k, x, y), _numeric_grad(k, x, y), rtol=1e-5, atol=1e-8)

    def test_elastic_matches_finite_differences(self, rng):
        """Test elastic kernels away from the singularity."""
        for k in [Elastic(), Elastic(exponent=2.0)]:
            for x, y in _probe_pairs(rng, 100, 2, min_sep=0.3):
                np.testing.assert_allclose(
                    grad(k, x, y), _numeric_grad(k, x, y), rtol=1e-5, atol=1e-8
                )

    def test_gaussian_gradient_points_towards_y(self):
        """Test the Gaussian gradient with respect to x is (y - x) e / sigma^2."""
        g = grad(GaussianRbf(sigma=1.0), [1.0, 0.0], [0.0, 0.0])
        np.testing.assert_allclose(g, [-np.exp(-0.5), 0.0])

    def test_gradient_at_coincident_points_is_zero(self):
        """Test smooth kernels have zero gradient at x = y."""
        np.testing.assert_allclose(grad(GaussianRbf(sigma=1.0), [0.3, 0.1], [0.3, 0.1]), 0.0)


class TestVectorizedSums:
    """Tests for pairwise matrices and row-summed gradients."""

    def test_pairwise_matches_scalar(self, rng):
        """Test every matrix entry equals the scalar evaluation."""
        p, q = rng.normal(size=(5, 2)), rng.normal(size=(4, 2))
        for k in [GaussianRbf(sigma=1.0), Cramer(), STAB]:
            matrix = pairwise(k, p, q)
            for i in range(5):
                for j in range(4):
                    assert matrix[i, j] == pytest.approx(evaluate(k, p[i], q[j]))

    def test_pairwise_excludes_diagonal(self, rng):
        """Test self-pairs contribute zero when excluded, even for singular kernels."""
        p = rng.normal(size=(6, 2))
        matrix = pairwise(Elastic(), p, p, exclude_diagonal=True, strict=True)
        np.testing.assert_allclose(np.diag(matrix), 0.0)
        assert np.all(np.isfinite(matrix))

    def test_grad_sum_matches_scalar(self, rng):
        """Test row sums equal summed scalar gradients, with and without the diagonal."""
        p, q = rng.normal(size=(5, 2)), rng.normal(size=(7, 2))
        for k in [RescaledGaussian(sigma=1.5), Cramer(), Elastic(exponent=1.0)]:
            rows = grad_sum(k, p, q)
            for i in range(5):
                expected = sum(grad(k, p[i], q[j]) for j in range(7))
                np.testing.assert_allclose(rows[i], expected, rtol=1e-8, atol=1e-10)
            rows = grad_sum(k, p, p, exclude_diagonal=True)
            for i in range(5):
                expected = sum(grad(k, p[i], p[j]) for j in range(5) if j != i)
                np.testing.assert_allclose(rows[i], expected, rtol=1e-8, atol=1e-10)

    def test_pairwise_rejects_mismatched_widths(self):
        """Test clouds of different widths are rejected."""
        with pytest.raises(ShapeMismatchError):
            pairwise(GaussianRbf(sigma=1.0), np.zeros((3, 2)), np.zeros((3, 3)))


class TestKernelDescriptions:
    """Tests for kernel models, scales and labels."""

    def test_length_scales(self):
        """Test scale conventions of each family and their combinations."""
        assert length_scale(GaussianRbf(sigma=3.0)) == 3.0
        assert length_scale(RationalQuadratic(alpha=2.0)) == pytest.approx(2.0)
        assert length_scale(Cramer()) is None
        assert length_scale(Elastic()) is None
        assert length_scale(STAB) == 1.0

    def test_json_round_trip(self):
        """Test nested kernels survive a JSON dump through the discriminated union."""
        k = Sum.of(STAB, Cramer(z0=(1.0, -1.0)), weights=(1.0, 0.25))
        restored = kernel_adapter.validate_json(kernel_adapter.dump_json(k))
        assert restored == k

    def test_models_are_frozen(self):
        """Test kernel descriptions are immutable."""
        k = GaussianRbf(sigma=1.0)
        with pytest.raises(Exception):
            k.sigma = 2.0

    def test_invalid_parameters_rejected(self):
        """Test non-positive sigma is a validation error."""
        with pytest.raises(Exception):
            GaussianRbf(sigma=0.0)

    def test_stabilized_interaction_sign(self):
        """Test base - eps * s repels at short range and attracts at long range."""
        signs = interaction_sign(STAB, np.array([0.0, 6.0]))
        assert list(signs) == [-1, 1]

    def test_interaction_sign_follows_energy(self):
        """Test the reading uses the sign of the energy, not of its slope."""
        r = np.array([0.5, 3.0])
        assert list(interaction_sign(GaussianRbf(sigma=1.0), r)) == [1, 1]
        assert list(interaction_sign(Cramer(), r)) == [-1, -1]
        np.testing.assert_array_equal(interaction_sign(STAB, r), np.sign(STAB.profile(r, 1)))

    def test_direction_signs(self):
        """Test the generator descends and the discriminator ascends."""
        assert Direction.GENERATOR.sign == 1
        assert Direction.DISCRIMINATOR.sign == -1
