import math
from pathlib import Path

import numpy as np
import pytest

import mlkol

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def config_a():
    cfg = mlkol.ProblemConfig()
    cfg.p, cfg.q, cfg.alpha = 0.5, 0.5, 0.5
    cfg.beta, cfg.beta_prime = 0.9, 0.1
    cfg.gamma, cfg.gamma_prime = 0.1, 0.9
    cfg.d_in, cfg.d_out = 64, 64
    return cfg


def test_theoretical_rate():
    r = mlkol.theoretical_rate(config_a())
    assert r.eta1 == pytest.approx(4 / 7, rel=1e-14)
    assert r.u == pytest.approx(6.0, rel=1e-12)


def test_worked_schedule():
    s = mlkol.multilevel_schedule(config_a(), 2.0**14)
    assert len(s) == 2
    assert s.levels[0].x == pytest.approx(16.0, rel=1e-12)
    assert s.levels[0].y == pytest.approx(64.0, rel=1e-12)
    assert s.levels[1].x == pytest.approx(0.5, rel=1e-12)
    assert (s.levels[0].row_begin, s.levels[0].row_end) == (1, 64)


def test_decay_and_norm_roundtrip():
    np.testing.assert_allclose(mlkol.decay_values(3, 0.5), [1.0, 0.25, 1.0 / 9.0], rtol=1e-15)
    cfg = config_a()
    a = np.random.default_rng(0).standard_normal((5, 7))
    op = mlkol.operator_from_source(a, cfg)
    assert mlkol.bg_norm(op, cfg, cfg.beta, cfg.gamma) == pytest.approx(np.linalg.norm(a), rel=1e-12)


def test_validation_error_names_field():
    cfg = config_a()
    cfg.gamma_prime = 0.05
    with pytest.raises(ValueError, match="gamma_prime"):
        cfg.validate()


def test_estimators_on_small_problem():
    cfg = config_a()
    cfg.d_in, cfg.d_out = 16, 16
    _, op = mlkol.random_source_operator(cfg, 3)
    u, v = mlkol.make_dataset(op, cfg, 2048, 5)
    assert u.shape == (2048, 16) and v.shape == (2048, 16)
    truth_norm = mlkol.bg_norm(op, cfg, cfg.beta_prime, cfg.gamma_prime)
    for kind in ("single", "variance", "bias", "multilevel"):
        est = mlkol.estimate(kind, u, v, cfg)
        err = mlkol.bg_norm(est - op, cfg, cfg.beta_prime, cfg.gamma_prime)
        assert math.isfinite(err) and err < truth_norm
    with pytest.raises(ValueError):
        mlkol.estimate("ridge", u, v, cfg)


def test_oracle_checks_pass():
    results = mlkol.run_oracle_checks()
    assert len(results) == 7
    assert all(r.passed for r in results)


def test_fit_rate_exact_line():
    fit = mlkol.fit_rate([(2.0, 4.0), (4.0, 2.0), (8.0, 1.0)])
    assert fit.slope == pytest.approx(-1.0, abs=1e-12)


def test_rates_from_config_file():
    medians, slopes = mlkol.run_rates(str(CONFIGS / "config_a.json"), [256, 512, 1024], trials=2)
    assert set(slopes) == {"single", "variance", "bias", "multilevel"}
    assert all(v > 0 for v in medians.values())
    assert len(medians) == 12
