"""Count distributions: negative binomial, its limits, and the hurdle variant.

The negative binomial used throughout the package is parameterized by its
mean theta and an index of dispersion r, so the variance is
theta + r*theta^2.  Small r approaches the Poisson; r = 1 is the geometric.
The hurdle variant places probability phi on zero and renormalizes the
positive NB mass.
"""

import numpy as np

from countreg import (
    HurdleParams,
    NbParams,
    hnb_log_pmf,
    hnb_mean_var,
    nb_log_pmf,
    nb_mean_var,
    nb_zero_prob,
    sample,
)

p = NbParams(theta=4.0, r=0.7)
mean, var = nb_mean_var(p)
print(f"NB(theta=4, r=0.7): mean {mean}, variance {var}, P(0) = {nb_zero_prob(p):.4f}")

y = np.arange(12)
print("\n y   NB pmf    geometric(r=1)  near-Poisson(r=1e-8)")
geo = NbParams(theta=4.0, r=1.0)
poi = NbParams(theta=4.0, r=1e-8)
for yi in y:
    print(
        f"{yi:2d}   {np.exp(nb_log_pmf(yi, p)):.5f}   {np.exp(nb_log_pmf(yi, geo)):.5f}"
        f"         {np.exp(nb_log_pmf(yi, poi)):.5f}"
    )

h = HurdleParams(nb=NbParams(theta=6.0, r=0.8), phi=0.35)
hmean, hvar = hnb_mean_var(h)
print(f"\nHurdle: phi=0.35 sits on zero; mean {hmean:.4f}, variance {hvar:.4f}")
print(f"mass at zero = exp(log pmf(0)) = {np.exp(hnb_log_pmf(0, h)):.4f}")

draws = sample(h, n=100000, seed=7)
print(f"100k draws: mean {draws.mean():.4f}, var {draws.var():.4f}, "
      f"zero fraction {(draws == 0).mean():.4f}")
