import math

import numpy as np
import pytest

from conftest import random_dataset
from oracles import batch_means_se, two_item_share_posterior_mean

from coarsenrank.core import PreferenceDataset
from coarsenrank.em import stage_masses
from coarsenrank.gibbs import (
    DicPoint,
    GibbsConfig,
    PosteriorSamples,
    diagnose,
    dic,
    dic_from_samples,
    gibbs_run,
    sample_auxiliaries,
)
from coarsenrank.synth import SynthSpec, generate

WINS = PreferenceDataset.from_lists([[0, 1]] * 10)


def share(samples, item=0):
    return samples.draws[:, item] / samples.draws.sum(axis=1)


def test_auxiliary_means(rng):
    ds = random_dataset(rng, 6, 4, min_len=3)
    theta = rng.gamma(2.0, 1.0, 6)
    draws = [sample_auxiliaries(ds, theta, rng) for _ in range(20_000)]
    for b, eta in enumerate(stage_masses(ds, theta)):
        mean = np.mean([d[b] for d in draws], axis=0)
        np.testing.assert_allclose(mean, 1.0 / eta, rtol=0.03)


def test_auxiliary_mean_single_stage_1e5():
    ds = PreferenceDataset.from_lists([[0, 1]])
    rng = np.random.default_rng(8)
    theta = np.array([0.7, 2.1])
    draws = np.array([sample_auxiliaries(ds, theta, rng)[0][0, 0] for _ in range(100_000)])
    assert draws.min() > 0
    assert draws.mean() == pytest.approx(1 / 2.8, rel=0.01)


def test_two_item_posterior_matches_quadrature():
    expected = two_item_share_posterior_mean(wins=10)
    assert expected == pytest.approx(11 / 12, abs=1e-9)  # Beta(11, 1) in closed form
    s = gibbs_run(WINS, math.inf, gc=GibbsConfig(samples=2000, seed=11))
    r = share(s)
    assert abs(r.mean() - expected) <= 3 * batch_means_se(r)


def test_deterministic():
    ds = random_dataset(np.random.default_rng(0), 5, 30)
    a = gibbs_run(ds, 20.0, gc=GibbsConfig(seed=4))
    b = gibbs_run(ds, 20.0, gc=GibbsConfig(seed=4))
    assert np.array_equal(a.draws, b.draws)
    c = gibbs_run(ds, 20.0, gc=GibbsConfig(seed=5))
    assert not np.array_equal(a.draws, c.draws)


@pytest.mark.parametrize("mode", ["conjugate", "paper"])
def test_draws_positive(mode):
    ds = random_dataset(np.random.default_rng(1), 6, 40)
    s = gibbs_run(ds, 5.0, gc=GibbsConfig(samples=30, burn_in=10, conditional_mode=mode))
    assert s.draws.shape == (30, 6)
    assert np.all(s.draws > 0) and np.all(np.isfinite(s.draws))


@pytest.mark.parametrize("seed", range(3))
def test_preferred_item_has_larger_share(seed):
    s = gibbs_run(WINS, math.inf, gc=GibbsConfig(samples=500, seed=seed))
    assert share(s).mean() > 0.5


def test_mirror_symmetry():
    flipped = PreferenceDataset.from_lists([[1, 0]] * 10)
    a = gibbs_run(WINS, math.inf, gc=GibbsConfig(samples=2000, seed=2))
    b = gibbs_run(flipped, math.inf, gc=GibbsConfig(samples=2000, seed=3))
    ra, rb = share(a, 0), share(b, 1)
    se = math.hypot(batch_means_se(ra), batch_means_se(rb))
    assert abs(ra.mean() - rb.mean()) <= 3 * se


def test_invalid_config():
    with pytest.raises(ValueError):
        GibbsConfig(samples=0)
    with pytest.raises(ValueError):
        GibbsConfig(conditional_mode="exact")


class TestDic:
    def test_definition(self):
        point = dic(WINS, math.inf, gc=GibbsConfig(seed=1))
        assert point.dic == point.g - point.f
        assert all(map(math.isfinite, (point.f, point.g, point.dic)))

    def test_symmetric_data(self):
        ds = PreferenceDataset.from_lists([[0, 1], [1, 0]] * 10)
        s = gibbs_run(ds, math.inf, gc=GibbsConfig(seed=3))
        point = dic_from_samples(ds, s)
        ll = 10 * np.log(share(s, 0)) + 10 * np.log(share(s, 1))
        assert point.f == pytest.approx(ll.mean(), rel=1e-12)
        assert abs(point.f - 20 * math.log(0.5)) <= 3 * ll.std(ddof=1)

    def test_seed_consistency(self):
        ds, _, _ = generate(SynthSpec(8, 300, 4, seed=5))
        values, ses = [], []
        for seed in (1, 2):
            s = gibbs_run(ds, 100.0, gc=GibbsConfig(seed=seed))
            values.append(dic_from_samples(ds, s).dic)
            ll = [dic_from_samples(ds, PosteriorSamples(s.draws[i:i + 1], seed)).f
                  for i in range(len(s.draws))]
            ses.append(2 * np.std(ll, ddof=1) / math.sqrt(len(ll)))
        assert abs(values[0] - values[1]) <= 3 * math.hypot(*ses)

    def test_pure_function_of_samples(self):
        ds = random_dataset(np.random.default_rng(3), 5, 25)
        s = gibbs_run(ds, 10.0, gc=GibbsConfig(seed=9))
        assert dic_from_samples(ds, s) == dic_from_samples(ds, s)


class TestDiagnose:
    def test_single_point(self):
        points, selected = diagnose(WINS, [7.0], gc=GibbsConfig(samples=20, burn_in=5))
        assert selected == 7.0 and len(points) == 1

    def test_curve_shape(self):
        grid = [1.0, 10.0, 100.0, math.inf]
        points, selected = diagnose(WINS, grid, gc=GibbsConfig(samples=20, burn_in=5))
        assert [p.alpha for p in points] == grid
        assert selected == min(points, key=lambda p: p.dic).alpha
        assert all(isinstance(p, DicPoint) for p in points)

    def test_seeds_per_grid_point(self):
        gc = GibbsConfig(samples=20, burn_in=5, seed=40)
        points, _ = diagnose(WINS, [3.0, 9.0], gc=gc)
        alone = dic(WINS, 9.0, gc=GibbsConfig(samples=20, burn_in=5, seed=41))
        assert points[1] == alone

    @pytest.mark.parametrize("grid", [[], [10.0, 1.0], [0.0, 1.0], [5.0, 5.0]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            diagnose(WINS, grid)

    def test_noisy_data_selects_finite_alpha(self):
        finite = 0
        for seed in range(20):
            ds, _, _ = generate(SynthSpec(20, 2000, 5, noise_fraction=0.4, seed=seed))
            _, selected = diagnose(ds, [10.0, math.inf], gc=GibbsConfig(seed=seed))
            finite += math.isfinite(selected)
        assert finite >= 16, f"finite alpha selected in {finite}/20 trials"
