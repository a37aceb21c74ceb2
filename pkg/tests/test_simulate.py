"""Sampling the compound process: determinism, distributions, round trips."""

import math

import numpy as np
import pytest
from scipy import stats

from decompound import (
    HeatZonal,
    Mode,
    ObservationSet,
    ProcessConfig,
    WrappedNormal,
    circle,
    distance_to_origin,
    make_index,
    observations_text,
    poisson_draw,
    read_observations,
    sample_compound,
    spherical,
    sphere,
    torus,
    write_observations,
)


def _circle_config(**kw):
    law = WrappedNormal(circle(), sigma=0.7)
    base = dict(law=law, intensity=1.0, time=1.0, seed=123)
    base.update(kw)
    return ProcessConfig(**base)


def test_same_seed_bit_identical():
    cfg = _circle_config()
    a = sample_compound(cfg, 500)
    b = sample_compound(cfg, 500)
    assert np.array_equal(a.points, b.points)


def test_different_seed_differs():
    a = sample_compound(_circle_config(seed=1), 500)
    b = sample_compound(_circle_config(seed=2), 500)
    assert not np.array_equal(a.points, b.points)


def test_block_prefix_stability():
    # observation i is driven by the stream of its 4096-wide block only, so
    # extending m by whole blocks must not disturb earlier blocks
    cfg = _circle_config()
    small = sample_compound(cfg, 4096)
    big = sample_compound(cfg, 8192)
    assert np.array_equal(small.points, big.points[:4096])


def test_sample_compound_rejects_empty():
    with pytest.raises(ValueError):
        sample_compound(_circle_config(), 0)


def test_observation_set_is_read_only():
    obs = sample_compound(_circle_config(), 10)
    assert obs.m == 10
    with pytest.raises((ValueError, RuntimeError)):
        obs.points[0] = 0.0


def test_observation_set_validates_points():
    cfg = ProcessConfig(law=HeatZonal(sphere(2), tau0=0.3), intensity=1.0,
                        time=1.0, seed=0)
    bad = np.array([[0.0, 0.0, 2.0]])  # not unit norm
    with pytest.raises(ValueError):
        ObservationSet(points=bad, config=cfg)
    good = np.array([[0.0, 0.0, 1.0]])
    assert ObservationSet(points=good, config=cfg).m == 1


def test_process_config_round_trip():
    cfg = ProcessConfig(law=WrappedNormal(torus(2), sigma=0.5, mean=(0.1, 0.2)),
                        intensity=2.0, time=0.5, mode=Mode.TRAJECTORY,
                        noise_tau=0.3, seed=9)
    back = ProcessConfig.from_mapping(cfg.to_mapping())
    assert back == cfg


def test_process_config_validation():
    with pytest.raises(ValueError):
        _circle_config(intensity=-1.0)
    with pytest.raises(ValueError):
        _circle_config(time=0.0)
    with pytest.raises(ValueError):
        _circle_config(noise_tau=-0.1)


# --- Poisson counts ----------------------------------------------------------


def test_poisson_draw_rate_boundary():
    rng = np.random.default_rng(0)
    # rate must be strictly positive; tiny rates give 0 almost surely
    with pytest.raises(ValueError):
        poisson_draw(0.0, rng)
    assert all(poisson_draw(1e-12, rng) == 0 for _ in range(20))


@pytest.mark.parametrize("rate", [1.0, 4.5, 50.0, 200.0])
def test_poisson_draw_moments(rate):
    # rates below 30 exercise the product method, above it the transformed
    # rejection sampler; both must produce the right mean and variance
    rng = np.random.default_rng(17)
    n = 40_000
    draws = np.array([poisson_draw(rate, rng) for _ in range(n)], dtype=float)
    se_mean = math.sqrt(rate / n)
    assert abs(draws.mean() - rate) < 4.5 * se_mean
    # Var(sample var) ~ (mu + 2 mu^2)/n for Poisson
    se_var = math.sqrt((rate + 2 * rate**2) / n)
    assert abs(draws.var(ddof=1) - rate) < 4.5 * se_var


def test_poisson_draw_small_rate_pmf():
    rng = np.random.default_rng(23)
    n = 30_000
    draws = np.array([poisson_draw(0.8, rng) for _ in range(n)])
    for k in range(3):
        want = math.exp(-0.8) * 0.8**k / math.factorial(k)
        got = float(np.mean(draws == k))
        assert abs(got - want) < 4.5 * math.sqrt(want * (1 - want) / n)


# --- distributional checks ---------------------------------------------------


def test_transform_link_circle():
    # empirical mean of conj(phi_n) over observations estimates
    # exp(t * Lambda * (c_n - 1)) for the step coefficient c_n
    cfg = _circle_config(intensity=1.5, time=1.0, seed=77)
    obs = sample_compound(cfg, 60_000)
    for n in (1, 2, 3):
        idx = make_index(circle(), (n,))
        vals = np.conj(spherical(circle(), idx, obs.points))
        c = cfg.law.coefficient(idx)
        want = np.exp(1.5 * (c - 1.0))
        err = vals.mean() - want
        se = vals.std(ddof=1) / math.sqrt(obs.m)
        assert abs(err) < 4.5 * se + 1e-12


def test_transform_link_sphere_with_noise():
    # independent observation noise multiplies the transform by its own
    # coefficient exp(-tau^2 * kappa / 2)
    law = HeatZonal(sphere(2), tau0=0.4)
    cfg = ProcessConfig(law=law, intensity=1.0, time=1.0, noise_tau=0.5, seed=5)
    obs = sample_compound(cfg, 60_000)
    for ell in (1, 2):
        idx = make_index(sphere(2), (ell,))
        vals = spherical(sphere(2), idx, obs.points).real
        c = law.coefficient(idx).real
        want = math.exp(c - 1.0) * math.exp(-0.25 * idx.casimir / 2.0)
        se = vals.std(ddof=1) / math.sqrt(obs.m)
        assert abs(vals.mean() - want) < 4.5 * se


def test_trajectory_matches_iid_marginal():
    # one observation per unit-time window of a single path has the same
    # one-point law as independent draws
    for cfg_iid in (
        _circle_config(seed=31),
        ProcessConfig(law=HeatZonal(sphere(2), tau0=0.4), intensity=1.0,
                      time=1.0, seed=31),
    ):
        cfg_traj = ProcessConfig(law=cfg_iid.law, intensity=1.0, time=1.0,
                                 mode=Mode.TRAJECTORY, seed=32)
        a = sample_compound(cfg_iid, 4000)
        b = sample_compound(cfg_traj, 4000)
        space = cfg_iid.law.space
        da = distance_to_origin(space, a.points)
        db = distance_to_origin(space, b.points)
        ks = stats.ks_2samp(da, db)
        assert ks.pvalue > 1e-3


def test_trajectory_deterministic():
    cfg = ProcessConfig(law=HeatZonal(sphere(2), tau0=0.4), intensity=1.0,
                        time=1.0, mode=Mode.TRAJECTORY, seed=8)
    a = sample_compound(cfg, 200)
    b = sample_compound(cfg, 200)
    assert np.array_equal(a.points, b.points)
    assert np.allclose(np.linalg.norm(a.points, axis=1), 1.0, atol=1e-9)


# --- CSV round trip ----------------------------------------------------------


def test_observations_text_format():
    obs = sample_compound(_circle_config(seed=4), 3)
    text = observations_text(obs)
    lines = text.splitlines()
    assert lines[0].startswith("# ProcessConfig {")
    assert lines[1] == "theta1"
    assert len(lines) == 5


def test_csv_round_trip_exact(tmp_path):
    for cfg in (
        _circle_config(seed=10),
        ProcessConfig(law=HeatZonal(sphere(3), tau0=0.3), intensity=2.0,
                      time=0.5, noise_tau=0.1, seed=11),
    ):
        obs = sample_compound(cfg, 57)
        path = tmp_path / "obs.csv"
        write_observations(obs, path)
        back = read_observations(path)
        # 17 significant digits round-trip doubles exactly
        assert np.array_equal(back.points, obs.points)
        assert back.config == cfg
        assert back.m == 57
