"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code; each helper re-derives
its quantity from first principles (direct products, enumeration, grids,
quadrature).
"""

import itertools
import math

import numpy as np
from scipy import integrate


def pl_prob_direct(pref, theta):
    """Plackett-Luce probability as a forward product of stage choices."""
    p = 1.0
    for i in range(len(pref) - 1):
        p *= theta[pref[i]] / sum(theta[j] for j in pref[i:])
    return p


def pl_loglik_direct(prefs, theta):
    return sum(math.log(pl_prob_direct(p, theta)) for p in prefs)


def all_orderings_mass(theta, subset):
    return sum(pl_prob_direct(list(order), theta)
               for order in itertools.permutations(subset))


def simplex_grid_argmax(prefs, total, tau, shape=1.0, rate=2.0, step_frac=0.005):
    """Maximise log prior + tau * PL log-likelihood over a 3-item simplex grid."""
    steps = int(round(1 / step_frac))
    i, j = np.meshgrid(np.arange(1, steps), np.arange(1, steps), indexing="ij")
    keep = (i + j) < steps
    grid = np.stack([i[keep], j[keep], steps - i[keep] - j[keep]], axis=1) * step_frac * total
    ll = np.zeros(len(grid))
    for pref in prefs:
        remaining = grid[:, list(pref)].sum(axis=1)
        for item in pref[:-1]:
            ll += np.log(grid[:, item]) - np.log(remaining)
            remaining = remaining - grid[:, item]
    log_prior = ((shape - 1) * np.log(grid) - rate * grid).sum(axis=1)
    objective = log_prior + tau * ll
    return grid[np.argmax(objective)], step_frac * total


def two_item_share_posterior_mean(wins, shape=1.0, rate=2.0, upper=40.0):
    """E[theta0 / (theta0 + theta1)] under a Gamma prior and ``wins`` x [0>1]."""
    def density(t1, t0):
        return (t0 * t1) ** (shape - 1) * np.exp(-rate * (t0 + t1)) * (t0 / (t0 + t1)) ** wins

    num = integrate.dblquad(lambda t1, t0: t0 / (t0 + t1) * density(t1, t0),
                            0, upper, 0, upper, epsabs=1e-13)[0]
    den = integrate.dblquad(density, 0, upper, 0, upper, epsabs=1e-13)[0]
    return num / den


def batch_means_se(x, batches=40):
    x = np.asarray(x)
    usable = len(x) - len(x) % batches
    means = x[:usable].reshape(batches, -1).mean(axis=1)
    return means.std(ddof=1) / math.sqrt(batches)


def kendall_pairs(a, b):
    """Kendall agreement fraction by explicit pair enumeration."""
    pos_a = {item: r for r, item in enumerate(a)}
    pos_b = {item: r for r, item in enumerate(b)}
    pairs = list(itertools.combinations(sorted(pos_a), 2))
    agree = sum((pos_a[x] < pos_a[y]) == (pos_b[x] < pos_b[y]) for x, y in pairs)
    return agree / len(pairs)
