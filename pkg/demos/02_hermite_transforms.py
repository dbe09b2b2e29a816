"""Hermite chaos expansions and the two bounded rank-m constructions.

A transform Phi acts on the Gaussian process pointwise; its Hermite rank
(the lowest non-vanishing chaos order) decides which Hermite process appears
in the limit.  Both constructions keep ||Phi||_inf <= 1/(2 a*), so the
induced random coefficient a = (Phi(g) + 1/a*)^(-1) stays inside
[2 a*/3, 2 a*].
"""

import numpy as np

from oscillab import (
    coefficient_sampler,
    construct_rank_2_bounded,
    construct_rank_m,
    expand,
    hermite_eval,
    ou_semigroup,
    vandermonde_weights,
)

# chaos coefficients of a few familiar functions
for name, fn in [
    ("x^2", lambda x: x**2),
    ("sin", np.sin),
    ("indicator(x>0) - 1/2", lambda x: (x > 0).astype(float) - 0.5),
]:
    e = expand(fn)
    head = ", ".join(f"V_{q}={e[q]:+.4f}" for q in range(4))
    print(f"{name:24s}: rank {e.rank()},  {head}")

# the OU semigroup damps chaos order q by e^(-qt)
t = 0.8
for q in (1, 3, 5):
    x = np.array([0.7])
    damped = ou_semigroup(lambda y: hermite_eval(q, y), t, x)[0]
    print(f"P_t H_{q}(0.7) / H_{q}(0.7) = {damped / hermite_eval(q, 0.7):.6f}"
          f"  (e^-qt = {np.exp(-q * t):.6f})")

# exponential-moment weights behind the rank-m construction
for m in (1, 2, 3):
    b = vandermonde_weights(np.arange(m + 1, dtype=float))
    print(f"m={m}: weights b = {np.array2string(b, precision=4)}")

# rank-m transforms and the coefficient bounds they induce
a_star = 1.0
g_samples = np.random.default_rng(0).standard_normal(200_000)
for m in (1, 2, 3):
    phi = construct_rank_m(m, a_star)
    a_vals = coefficient_sampler(phi, a_star).a_of(g_samples)
    print(f"OU construction m={m}: V_m={phi.leading_coefficient:+.5f}, "
          f"a in [{a_vals.min():.4f}, {a_vals.max():.4f}]")

phi2 = construct_rank_2_bounded(a_star)
a_vals = coefficient_sampler(phi2, a_star).a_of(g_samples)
print(f"two-function rank-2: V_2={phi2.expansion[2]:+.5f}, "
      f"a in [{a_vals.min():.4f}, {a_vals.max():.4f}]  "
      f"(guaranteed [2a*/3, 2a*] = [{2 * a_star / 3:.4f}, {2 * a_star:.4f}])")
