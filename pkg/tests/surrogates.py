"""A labelled population shaped like a real evaluation set: skewed, heavy at 0.

Real and proxy marginals are Beta distributions matched to a target mean
and variance, coupled through a Gaussian copula. Quantiles come from sorted
Beta draws (an empirical quantile transform) so only numpy is needed.
"""

import numpy as np

from ppieval.core import PairedDataset, SimDataset


def beta_shape(mean, var):
    k = mean * (1.0 - mean) / var - 1.0
    return mean * k, (1.0 - mean) * k


def copula_pairs(latent_r, size, seed, y_moments, f_moments):
    rng = np.random.default_rng(seed)
    z = rng.multivariate_normal([0.0, 0.0], [[1.0, latent_r], [latent_r, 1.0]], size)
    y_sorted = np.sort(rng.beta(*beta_shape(*y_moments), size))
    f_sorted = np.sort(rng.beta(*beta_shape(*f_moments), size))
    ranks = np.argsort(np.argsort(z, axis=0), axis=0)
    return y_sorted[ranks[:, 0]], f_sorted[ranks[:, 1]]


def calibrate_latent(target_rho, y_moments, f_moments, size=100000, seed=0):
    lo, hi = 0.0, 0.999
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        y, f = copula_pairs(mid, size, seed, y_moments, f_moments)
        if np.corrcoef(y, f)[0, 1] < target_rho:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def surrogate_banks(target_rho, y_moments, f_moments, paired_size, sim_size, seed=1):
    r = calibrate_latent(target_rho, y_moments, f_moments)
    y, f = copula_pairs(r, paired_size, seed, y_moments, f_moments)
    _, fs = copula_pairs(r, sim_size, seed + 1, y_moments, f_moments)
    return PairedDataset(y, f), SimDataset(fs)
