import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import pinball_reference, quadrature_crps, random_cdf
from qsurface.directional import QuantileSurfaceForecast, direction_grid
from qsurface.metrics import (
    DirectionalCdf,
    MissingLevelError,
    average_directional_crps,
    build_directional_cdf,
    coverage,
    crps_per_sample,
    directional_crps,
    read_table,
    reliability_curve,
    sharpness_curve,
    sharpness_from_radii,
    skill,
    write_crps_csv,
    write_reliability_csv,
    write_summary_csv,
)
from qsurface.numkit import Rng


class TestCdf:
    def test_single_level(self):
        cdf = build_directional_cdf([0.5], [2.0])
        assert cdf(1.0) == 0.25
        assert cdf(2.0) == 1.0
        assert cdf(-1.0) == 0.0
        assert cdf(5.0) == 1.0

    def test_interpolates_between_levels(self):
        cdf = build_directional_cdf([0.2, 0.6], [1.0, 3.0])
        assert cdf(2.0) == pytest.approx(0.4)
        assert cdf(0.5) == pytest.approx(0.1)

    def test_crossing_radii_rejected(self):
        with pytest.raises(ValueError):
            build_directional_cdf([0.2, 0.6], [3.0, 1.0])

    def test_bad_anchors(self):
        with pytest.raises(ValueError):
            DirectionalCdf([0.0, 1.0], [0.5, 0.2])


class TestCrps:
    @pytest.mark.parametrize("q,o", [(2.0, 0.5), (2.0, 2.0), (2.0, 3.5), (0.0, 1.0)])
    def test_step_cdf_is_absolute_error(self, q, o):
        assert directional_crps(DirectionalCdf.step(q), o) == abs(q - o)

    def test_single_level_by_hand(self):
        # F = y/4 on [0, 2) then 1: integral of (y/4)^2 on [0,1] plus (1 - y/4)^2 on [1,2]
        expect = 1 / 48 + ((4 - 1) ** 3 - (4 - 2) ** 3) / 48
        assert directional_crps(build_directional_cdf([0.5], [2.0]), 1.0) == pytest.approx(expect)

    def test_matches_quadrature(self):
        rng = Rng(21)
        worst = 0.0
        for _ in range(100):
            cdf = random_cdf(rng)
            o = float(rng.uniform(0.0, 1.3 * cdf.lengths[-1]))
            worst = max(worst, abs(directional_crps(cdf, o) - quadrature_crps(cdf, o)))
        assert worst < 1e-6

    def test_negative_length(self):
        with pytest.raises(ValueError):
            directional_crps(DirectionalCdf.step(1.0), -0.1)

    def test_batch_matches_single(self):
        levels = np.array([0.1, 0.5, 0.9])
        radii = np.array([[0.5, 1.0, 2.0], [0.2, 0.3, 4.0]])
        obs = np.array([1.5, 5.0])
        batch = crps_per_sample(radii, levels, obs)
        for i in range(2):
            assert batch[i] == pytest.approx(directional_crps(build_directional_cdf(levels, radii[i]), obs[i]))
        assert average_directional_crps(radii, levels, obs) == pytest.approx(batch.mean())

    def test_gaussian_length_discretisation(self):
        # 99-level CDF of a standard bivariate normal length (Rayleigh) against the exact CDF
        from scipy.integrate import quad

        levels = np.arange(1, 100) / 100
        q = np.sqrt(-2 * np.log1p(-levels))
        exact_cdf = lambda y: 1 - math.exp(-y * y / 2)
        for o in [0.2, 1.0, 1.8, 2.8]:
            exact = (quad(lambda y: exact_cdf(y) ** 2, 0, o, limit=200)[0]
                     + quad(lambda y: (1 - exact_cdf(y)) ** 2, o, np.inf, limit=200)[0])
            got = crps_per_sample(q[None, :], levels, np.array([o]))[0]
            assert abs(got - exact) < 1e-3

    def test_discretisation_beyond_top_level(self):
        # past q_0.99 the jump to one makes the approximation overstate the score
        levels = np.arange(1, 100) / 100
        q = np.sqrt(-2 * np.log1p(-levels))
        assert crps_per_sample(q[None, :], levels, np.array([4.0]))[0] > 2.3797 + 1e-3

    def test_relation_to_mean_pinball(self):
        levels = np.arange(1, 100) / 100
        q = np.sqrt(-2 * np.log1p(-levels))
        # CRPS is twice the pinball loss integrated over levels
        obs = np.linalg.norm(Rng(8).normal(size=(500, 2)), axis=1)
        pin = np.mean([2 / 99 * sum(pinball_reference(o, qq, t) for qq, t in zip(q, levels))
                       for o in obs])
        crps = crps_per_sample(np.repeat(q[None, :], 500, axis=0), levels, obs).mean()
        assert crps == pytest.approx(pin, rel=0.05)

    @given(st.floats(0.1, 10), st.floats(0, 15))
    def test_nonnegative(self, r, o):
        assert directional_crps(build_directional_cdf([0.3, 0.7], [r / 2, r]), o) >= 0


class TestSkill:
    def test_known_value(self):
        assert skill(0.046, 0.376) == pytest.approx(0.878, abs=1e-3)

    def test_identity_and_sign(self):
        assert skill(1.0, 1.0) == 0.0
        assert skill(2.0, 1.0) == -1.0

    def test_zero_baseline(self):
        with pytest.raises(ValueError):
            skill(0.1, 0.0)


class TestReliability:
    def test_boundary_inclusive(self):
        assert coverage([1.0, 1.0, 1.0], [0.5, 1.0, 1.5]) == pytest.approx(2 / 3)

    def test_curve(self):
        radii = np.array([[1.0, 2.0]] * 4)
        curve = reliability_curve(radii, np.array([0.5, 1.5, 1.5, 3.0]), [0.25, 0.75])
        np.testing.assert_allclose(curve.frequencies, [0.25, 0.75])

    def test_empty(self):
        with pytest.raises(ValueError):
            coverage([], [])

    def test_exact_quantiles_are_calibrated(self):
        levels = np.array([0.1, 0.5, 0.9])
        q = np.sqrt(-2 * np.log1p(-levels))
        obs = np.linalg.norm(Rng(9).normal(size=(50000, 2)), axis=1)
        curve = reliability_curve(np.tile(q, (50000, 1)), obs, levels)
        np.testing.assert_allclose(curve.frequencies, levels, atol=0.01)


class TestSharpness:
    def test_circles(self):
        grid = direction_grid(3600)
        surf = QuantileSurfaceForecast(np.zeros(2), [0.5, 0.9], grid,
                                       np.vstack([np.ones(3600), 2 * np.ones(3600)]))
        curve = sharpness_curve([surf, surf], [0.5, 0.1])
        np.testing.assert_allclose(curve.coverages, [0.5, 0.9])
        np.testing.assert_allclose(curve.areas, [math.pi, 4 * math.pi], rtol=1e-5)

    def test_scaling(self):
        grid = direction_grid(90)
        r = np.ones((3, 1, 90)) * np.array([1.0, 2.0, 3.0])[:, None, None]
        curve = sharpness_from_radii(r, grid, [0.9], [0.1])
        base = float(sharpness_from_radii(np.ones((1, 1, 90)), grid, [0.9], [0.1]).areas[0])
        assert curve.areas[0] == pytest.approx(base * (1 + 4 + 9) / 3)

    def test_missing_level(self):
        with pytest.raises(MissingLevelError):
            sharpness_from_radii(np.ones((1, 1, 8)), direction_grid(8), [0.9], [0.2])


class TestTables:
    def test_reliability_csv(self, tmp_path):
        p = tmp_path / "rel.csv"
        write_reliability_csv(p, reliability_curve(np.array([[1.0]]), [0.5], [0.9]))
        assert read_table(p) == [["level", "frequency"], ["0.9", "1.0"]]

    def test_crps_csv(self, tmp_path):
        p = tmp_path / "crps.csv"
        write_crps_csv(p, np.array([[0.0, 1.0], [-1.0, 0.0]]), [1.0, 2.0], [0.25, 0.5])
        rows = read_table(p)
        assert rows[0] == ["sample_id", "direction_angle", "length", "crps"]
        assert float(rows[1][1]) == pytest.approx(math.pi / 2)
        assert rows[2][0] == "1" and float(rows[2][3]) == 0.5

    def test_summary_csv(self, tmp_path):
        p = tmp_path / "s.csv"
        write_summary_csv(p, [("qsnn", 0.5, 0.2), ("gauss_uncond", 0.625, float("nan"))])
        rows = read_table(p)
        assert rows[0] == ["model", "avg_crps", "skill_vs_baseline"]
        assert rows[2][2] == "nan"
