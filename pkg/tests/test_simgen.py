import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kmrkdc.errors import InvalidInput, InvalidParameter
from kmrkdc.kernels import IBS, LINEAR, QUADRATIC
from kmrkdc.simgen.generators import (
    FRONTAL_ROI_CORRELATION,
    GENDER_PROBABILITY,
    SIGMA_DEPENDENT,
    AdniSimConfig,
    Sim1Config,
    Sim2Config,
    adni_sim_generate,
    draw_maf,
    frontal_covariance,
    h1,
    project_psd,
    sim1_generate,
    sim2_generate,
)
from kmrkdc.simgen.study import (
    CSV_COLUMNS,
    GENOTYPE_METHODS,
    STUDY_DEFAULTS,
    TABLE1_METHODS,
    kdc,
    kmr,
    run_study,
    sim1_cells,
    sim2_cells,
    size_power_study,
)

BIG_N = 100_000


class TestH1:
    def test_hand_values(self):
        assert h1([0, 0, 0, 0, 0]) == pytest.approx(2.0)
        assert h1([0, 1, 0, 0, 0]) == pytest.approx(-1.0)
        assert h1([math.pi / 2, 0, 0, 0, 0]) == pytest.approx(0.0, abs=1e-15)

    @given(st.lists(st.floats(-3, 3), min_size=5, max_size=5))
    def test_formula(self, z):
        z1, z2, z3, z4, z5 = z
        expected = (
            2 * math.cos(z1) - 3 * z2**2 + 2 * math.exp(-z3) * z4
            - 1.6 * math.sin(z5) * math.cos(z3) + 4 * z1 * z5
        )
        assert h1(z) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_vectorized(self):
        z = np.random.default_rng(0).uniform(size=(4, 7))
        np.testing.assert_allclose(h1(z), [h1(row[:5]) for row in z])


class TestSim1:
    def test_shapes_and_determinism(self):
        cfg = Sim1Config(a=0.5, seed=3)
        y, x, z = sim1_generate(cfg)
        assert y.shape == (60, 1) and x.shape == (60, 1) and z.shape == (60, 5)
        y2, _, _ = sim1_generate(cfg)
        assert np.array_equal(y, y2)

    def test_shared_draws_across_a(self):
        y0, x0, z0 = sim1_generate(Sim1Config(a=0.0, seed=4))
        y1, x1, z1 = sim1_generate(Sim1Config(a=1.0, seed=4))
        assert np.array_equal(x0, x1) and np.array_equal(z0, z1)
        np.testing.assert_allclose(y1 - y0, h1(z0).reshape(-1, 1), atol=1e-12)

    def test_covariate_moments(self):
        _, x, z = sim1_generate(Sim1Config(n=BIG_N, seed=11))
        x = x[:, 0]
        mean = 3 * math.sin(1)
        var = 9 * (0.5 + math.sin(2) / 4 - math.sin(1) ** 2) + 1
        assert mean == pytest.approx(2.5244, abs=1e-4)
        assert abs(x.mean() - mean) <= 0.02
        se_var = math.sqrt(np.var((x - mean) ** 2) / BIG_N)
        assert abs(x.var(ddof=1) - var) <= 3 * se_var
        assert z.min() >= 0 and z.max() < 1

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            Sim1Config(n=9)
        with pytest.raises(InvalidParameter):
            Sim1Config(a=-0.1)


class TestSim2:
    def test_sigma_constants(self):
        assert SIGMA_DEPENDENT[0, 1] == 0.57
        assert np.array_equal(SIGMA_DEPENDENT, SIGMA_DEPENDENT.T)

    def test_shapes_and_genotypes(self):
        y, x, z = sim2_generate(Sim2Config(seed=1))
        assert y.shape == (100, 3) and x.shape == (100, 2) and z.shape == (100, 9)
        assert set(np.unique(z)) <= {0.0, 1.0, 2.0}

    def test_independent_errors_uncorrelated(self):
        cfg = Sim2Config(n=BIG_N, sigma="independent", seed=2)
        y, x, _ = sim2_generate(cfg)
        eps = y - x @ np.asarray(cfg.beta)
        c = np.corrcoef(eps.T)
        assert np.abs(c[np.triu_indices(3, 1)]).max() <= 0.05

    def test_dependent_error_covariance(self):
        cfg = Sim2Config(n=BIG_N, sigma="dependent", seed=3)
        y, x, _ = sim2_generate(cfg)
        eps = y - x @ np.asarray(cfg.beta)
        s = np.cov(eps.T)
        for i in range(3):
            for j in range(3):
                prod = eps[:, i] * eps[:, j]
                se = prod.std() / math.sqrt(BIG_N)
                assert abs(s[i, j] - SIGMA_DEPENDENT[i, j]) <= 3 * se + 1e-3

    def test_covariate_means(self):
        _, x, _ = sim2_generate(Sim2Config(n=BIG_N, seed=4))
        np.testing.assert_allclose(x.mean(axis=0), [0.2, 0.4], atol=4 / math.sqrt(BIG_N))

    def test_effects(self):
        base = dict(seed=5, maf=draw_maf(0, 9))
        y0, x, z = sim2_generate(Sim2Config(a=0.0, **base))
        ys, _, _ = sim2_generate(Sim2Config(a=0.2, effect="sparse", **base))
        yc, _, _ = sim2_generate(Sim2Config(a=0.2, effect="common", **base))
        z1, z2, z3, z4, z5, z6, z7, z8, z9 = z.T
        sparse = 0.2 * (z1 + z2 + z3 + z1 * z4 * z5 - z6 / 3 - z7 * z8 / 2 + (1 - z9))
        np.testing.assert_allclose(ys[:, 0] - y0[:, 0], sparse, atol=1e-12)
        np.testing.assert_allclose(ys[:, 1:], y0[:, 1:], atol=0)
        np.testing.assert_allclose(yc[:, 0] - y0[:, 0], sparse + 0.2 * z3, atol=1e-12)
        np.testing.assert_allclose(yc[:, 1] - y0[:, 1], 0.2 * z3, atol=1e-12)

    def test_maf(self):
        maf = draw_maf(7, 9)
        assert maf == draw_maf(7, 9)
        assert all(0.1 <= m <= 0.4 for m in maf)
        with pytest.raises(InvalidParameter):
            Sim2Config(maf=(0.6,) * 9)
        with pytest.raises(InvalidParameter):
            Sim2Config(maf=(0.2,) * 8)

    def test_canonical_null_cell(self):
        assert Sim2Config(a=0.0, effect="common").canonical() == Sim2Config(a=0.0)
        assert Sim2Config(a=0.1, effect="common").canonical().effect == "common"


class TestAdni:
    def test_correlation_entries(self):
        r = FRONTAL_ROI_CORRELATION
        assert r[0, 7] == -0.87
        assert r[4, 7] == -0.04
        assert np.array_equal(r, r.T)
        assert np.all(np.diag(r) == 1.0)

    def test_projection(self):
        sigma, ev = frontal_covariance()
        assert ev.min() < 0
        assert np.linalg.eigvalsh(sigma).min() >= -1e-12
        # clipping moves the matrix by no more than the clipped mass
        assert np.abs(sigma - FRONTAL_ROI_CORRELATION).max() <= np.abs(ev[ev < 0]).sum() + 1e-8

    def test_projection_fixed_point(self):
        m = np.array([[2.0, 0.5], [0.5, 1.0]])
        out, _ = project_psd(m)
        np.testing.assert_allclose(out, m, atol=1e-14)

    def test_invalid_correlation(self):
        bad = FRONTAL_ROI_CORRELATION.copy()
        bad[0, 1] = 0.5
        with pytest.raises(InvalidInput):
            frontal_covariance(bad)
        bad = FRONTAL_ROI_CORRELATION.copy()
        bad[2, 2] = 0.9
        with pytest.raises(InvalidInput):
            frontal_covariance(bad)

    def test_shapes_and_gender(self):
        y, x, z = adni_sim_generate(AdniSimConfig(n=20_000, seed=1))
        assert y.shape == (20_000, 8) and z.shape == (20_000, 141)
        freq = x[:, 0].mean()
        assert abs(freq - GENDER_PROBABILITY) <= 3 * math.sqrt(0.36 * 0.64 / 20_000)
        assert set(np.unique(x[:, 0])) == {0.0, 1.0}

    def test_effect_shared_by_columns(self):
        maf = draw_maf(0, 141)
        y0, _, z = adni_sim_generate(AdniSimConfig(a=0.0, maf=maf, seed=2))
        y1, _, _ = adni_sim_generate(AdniSimConfig(a=0.1, maf=maf, seed=2))
        shift = 0.1 * h1(z[:, :5])
        np.testing.assert_allclose(y1 - y0, np.repeat(shift[:, None], 8, axis=1), atol=1e-12)


@pytest.fixture(scope="module")
def small():
    methods = [kmr(LINEAR), kdc(LINEAR, LINEAR), kdc(QUADRATIC, LINEAR)]
    return run_study("sim1", (0.0, 1.0), methods, reps=12, perms=200, seed=3)


class TestStudyDriver:
    def test_method_tables(self):
        assert len(TABLE1_METHODS) == 7
        assert len(GENOTYPE_METHODS) == 10
        for k in (LINEAR, QUADRATIC, IBS):
            assert kmr(k) in GENOTYPE_METHODS and kdc(LINEAR, k) in GENOTYPE_METHODS
        assert STUDY_DEFAULTS["sim1"]["a"] == (0.0, 0.25, 0.5, 0.75, 1.0)

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            size_power_study("sim1", sim1_cells((0.0,)), TABLE1_METHODS, reps=0, perms=100)
        with pytest.raises(InvalidParameter):
            size_power_study("sim1", sim1_cells((0.0,)), TABLE1_METHODS, reps=1, perms=99)
        with pytest.raises(InvalidParameter):
            run_study("sim3", reps=1, perms=100)

    def test_equivalent_rows(self, small):
        for a in (0.0, 1.0):
            assert small.rate(kmr(LINEAR), a) == small.rate(kdc(LINEAR, LINEAR), a)

    def test_deterministic(self, small):
        again = run_study("sim1", (0.0, 1.0), [kmr(LINEAR), kdc(LINEAR, LINEAR), kdc(QUADRATIC, LINEAR)],
                          reps=12, perms=200, seed=3)
        assert again.to_csv() == small.to_csv()
        assert again.to_json() == small.to_json()

    def test_csv(self, small):
        rows = list(csv.DictReader(io.StringIO(small.to_csv())))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 6
        for row in rows:
            assert 0.0 <= float(row["rejection_rate"]) <= 1.0
            assert row["R"] == "12" and row["B"] == "200" and row["seed"] == "3"
            assert row["adjusted"] == "true"

    def test_json(self, small):
        doc = json.loads(small.to_json())
        assert doc["R"] == 12 and doc["alpha"] == 0.05
        assert doc["config"]["dgp"] == "sim1"
        assert len(doc["config"]["cells"]) == 2
        assert len(doc["cells"]) == 6

    def test_table(self, small):
        text = small.table()
        assert "a=0" in text and "a=1" in text
        assert "KMR(K=linear,adjusted)" in text

    def test_null_cell_shared(self):
        cells = sim2_cells((0.0,), effects=("sparse", "common"), sigmas=("independent",))
        res = size_power_study("sim2", cells, [kmr(LINEAR)], reps=5, perms=100, seed=1)
        assert len(res.cells) == 2
        assert res.cells[0].rejections == res.cells[1].rejections
        assert {c.effect for c in res.cells} == {"sparse", "common"}

    def test_adni_config_records_eigenvalues(self):
        res = run_study("adni", (0.0,), [kmr(LINEAR)], reps=2, perms=100, seed=0, n=30)
        assert len(res.config["roi_correlation_eigenvalues"]) == 8
        assert min(res.config["roi_correlation_eigenvalues"]) < 0


def test_rate_lookup_labels():
    res = run_study("adni", (0.0,), [kmr(LINEAR)], reps=2, perms=100, seed=0, n=30)
    assert res.rate(kmr(LINEAR), 0.0) == res.rate(kmr(LINEAR), 0.0, "roi", "h1")
    with pytest.raises(KeyError):
        res.rate(kmr(LINEAR), 0.0, "independent")
    cells = sim2_cells((0.1,), effects=("sparse",), sigmas=("independent", "dependent"))
    res2 = size_power_study("sim2", cells, [kmr(LINEAR)], reps=2, perms=100, seed=1)
    with pytest.raises(KeyError, match="several"):
        res2.rate(kmr(LINEAR), 0.1)
    assert 0 <= res2.rate(kmr(LINEAR), 0.1, "dependent") <= 1
