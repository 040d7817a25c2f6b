import io
import math

import numpy as np
import pytest

from qsts.errors import NotAdmissible, RangeError
from qsts.estimators import phi_matrices
from qsts.experiments import (
    AuditReport,
    audit_hellinger_chain,
    audit_state_approximation,
    nb_sufficiency_test,
    simulate_geo_regression,
    simulate_hetero_normal,
    simulate_white_noise,
)
from qsts.harness import RngStream, mc_run
from qsts.spectral import SpectralDensity, local_averages
from qsts.distributions import varstab_arccosh

COS_DENSITY = SpectralDensity.cosine(2.0, 0.5)
# geometric decay lifted so the density stays above 1 (state admissible)
LIFTED_GEOM = SpectralDensity(
    np.concatenate([[2.0], [2.0 ** -k for k in range(1, 21)]]).astype(complex),
    label="geom_decay",
)


class TestGeoRegression:
    def test_constant_variants_agree_in_law(self):
        a = SpectralDensity.constant(3.0)
        x1 = simulate_geo_regression(a, 50, "averages", RngStream(1, 0))
        x2 = simulate_geo_regression(a, 50, "points", RngStream(1, 0))
        np.testing.assert_array_equal(x1, x2)

    def test_mc_mean_matches_cell_average(self):
        n = 8
        J = local_averages(COS_DENSITY, n)

        def sampler(stream):
            return simulate_geo_regression(COS_DENSITY, n, "averages", stream).astype(float)

        out = mc_run(sampler, 4000, seed=3)
        target = (J - 1.0) / 2.0
        assert np.all(np.abs(out.mean - target) < 4 * out.se)

    def test_inadmissible_rejected(self):
        with pytest.raises(NotAdmissible):
            simulate_geo_regression(SpectralDensity.constant(0.9), 5,
                                    "averages", RngStream(2, 0))

    def test_unknown_variant(self):
        with pytest.raises(RangeError):
            simulate_geo_regression(COS_DENSITY, 5, "midpoints", RngStream(2, 0))


class TestWhiteNoise:
    def test_noiseless_is_drift_quadrature(self):
        from qsts.spectral import eval_density

        path = simulate_white_noise(COS_DENSITY, 100, 1024, "arccosh",
                                    RngStream(5, 0), noise_scale=0.0)
        w = np.linspace(-math.pi, math.pi, 200001)[:-1]
        target = np.mean([varstab_arccosh(v)
                          for v in eval_density(COS_DENSITY, w)]) * 2 * math.pi
        assert path.cumulative[-1] == pytest.approx(target, rel=1e-4)

    def test_terminal_mean_and_variance(self):
        n, L = 64, 256

        def sampler(stream):
            path = simulate_white_noise(COS_DENSITY, n, L, "arccosh", stream)
            return np.array([path.cumulative[-1]])

        out, rows = mc_run(sampler, 4000, seed=7, collect=True)
        w = np.linspace(-math.pi, math.pi, 100001)[:-1]
        from qsts.spectral import eval_density
        drift_integral = np.mean([varstab_arccosh(v)
                                  for v in eval_density(COS_DENSITY, w)]) * 2 * math.pi
        assert abs(out.mean[0] - drift_integral) < 4 * out.se[0] + 2e-3
        target_var = (2 * math.pi) ** 2 / n
        se_var = target_var * math.sqrt(2.0 / rows.shape[0])
        assert abs(np.var(rows) - target_var) < 4 * se_var

    def test_local_variant_noise_scales_with_center(self):
        n, L = 64, 256
        center = SpectralDensity.constant(3.0)

        def sampler(stream):
            path = simulate_white_noise(COS_DENSITY, n, L, "local", stream,
                                        a0=center)
            return np.array([path.cumulative[-1]])

        out, rows = mc_run(sampler, 3000, seed=9, collect=True)
        target_var = (2 * math.pi) ** 2 / n * (3.0 ** 2 - 1.0)
        se_var = target_var * math.sqrt(2.0 / rows.shape[0])
        assert abs(np.var(rows) - target_var) < 4 * se_var

    def test_increment_consistency(self):
        path = simulate_white_noise(COS_DENSITY, 32, 128, "arccosh", RngStream(11, 0))
        np.testing.assert_array_equal(np.diff(path.cumulative), path.increments)
        assert path.cumulative[0] == 0.0

    def test_grid_guard(self):
        with pytest.raises(RangeError):
            simulate_white_noise(COS_DENSITY, 32, 32, "arccosh", RngStream(1, 0))


class TestHeteroNormal:
    def test_constant_theta_iid_coordinates(self):
        theta = np.array([0.0, 3.0, 0.0])
        n = 100

        def sampler(stream):
            return simulate_hetero_normal(theta, n, 1, stream)

        out, rows = mc_run(sampler, 10 ** 4, seed=13, collect=True)
        target_var = (3.0 ** 2 - 1.0) / n  # phi = (c^2-1)^{-1} I, inverse scaled
        emp = np.var(rows, axis=0)
        se = target_var * math.sqrt(2.0 / rows.shape[0])
        assert np.all(np.abs(emp - target_var) < 5 * se)

    def test_covariance_matches_phi_inverse(self):
        from qsts.spectral import RealParam
        theta = RealParam.from_density(COS_DENSITY, d=1).theta
        n = 50
        _, phi = phi_matrices(theta, 1)
        target = np.linalg.inv(phi) / n

        def sampler(stream):
            return simulate_hetero_normal(theta, n, 1, stream)

        out, rows = mc_run(sampler, 10 ** 4, seed=17, collect=True)
        emp = np.cov(rows.T)
        scale = np.sqrt(np.outer(np.diag(target), np.diag(target)) + target ** 2)
        assert np.all(np.abs(emp - target) < 5 * scale / math.sqrt(rows.shape[0]))

    def test_seed_determinism(self):
        theta = np.array([0.0, 2.0, 0.1])
        a = simulate_hetero_normal(theta, 64, 1, RngStream(19, 0))
        b = simulate_hetero_normal(theta, 64, 1, RngStream(19, 0))
        np.testing.assert_array_equal(a, b)


class TestHellingerChain:
    def test_constant_density_sums_zero(self):
        rep = audit_hellinger_chain(SpectralDensity.constant(3.0), [9, 17, 33])
        sums = [r for r in rep.rows if r.label.startswith("hellinger")]
        assert all(r.value == pytest.approx(0.0, abs=1e-13) for r in sums)

    def test_cosine_ladder_decays(self):
        rep = audit_hellinger_chain(COS_DENSITY, [65, 129, 257, 513])
        assert rep.all_passed
        s1 = [r.value for r in rep.rows if r.label == "hellinger_circulant_vs_avg"]
        s2 = [r.value for r in rep.rows if r.label == "hellinger_points_vs_avg"]
        assert all(b < a for a, b in zip(s1, s1[1:]))
        assert all(b < a for a, b in zip(s2, s2[1:]))
        assert s1[-1] < 0.05 and s2[-1] < 0.05

    def test_even_n_rejected(self):
        with pytest.raises(RangeError):
            audit_hellinger_chain(COS_DENSITY, [64, 128])

    def test_csv_round_trip(self):
        rep = audit_hellinger_chain(COS_DENSITY, [9, 17])
        buf = io.StringIO()
        rep.write_csv(buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "label,n,m,value,bound,pass"
        assert len(lines) == len(rep.rows) + 1
        obj = rep.to_json()
        assert obj["meta"]["kind"] == "hellinger_chain"


class TestStateApproximation:
    def test_banded_density_gap_zero_entropy_tiny(self):
        rep = audit_state_approximation(COS_DENSITY, 16, 21)
        gap = [r for r in rep.rows if r.label == "symbol_gap_sq"][0]
        ent = [r for r in rep.rows if r.label == "relative_entropy"][0]
        assert gap.value == pytest.approx(0.0, abs=1e-15)
        assert ent.value <= 1e-10
        assert rep.all_passed

    def test_entropy_decreases_along_ladder(self):
        rep = audit_state_approximation(LIFTED_GEOM, 64, [67, 71, 79])
        assert rep.all_passed
        ents = [r.value for r in rep.rows if r.label == "relative_entropy"]
        assert ents == sorted(ents, reverse=True)

    def test_pinsker_row_sqrt(self):
        rep = audit_state_approximation(LIFTED_GEOM, 32, 35)
        ent = [r.value for r in rep.rows if r.label == "relative_entropy"][0]
        pin = [r.value for r in rep.rows if r.label == "pinsker_bound"][0]
        assert pin == pytest.approx(math.sqrt(2 * max(ent, 0.0)), abs=1e-12)


class TestNbSufficiency:
    def test_identical_laws_pass(self):
        chi2, crit, p = nb_sufficiency_test(0.5, 50_000, RngStream(23, 0))
        assert chi2 <= crit and p > 0.001


class TestAuditReport:
    def test_bound_row_logic(self):
        rep = AuditReport()
        ok = rep.add("x", 1, 1, 1.0, 2.0)
        bad = rep.add("y", 1, 1, 3.0, 2.0)
        assert ok.passed and not bad.passed and not rep.all_passed
