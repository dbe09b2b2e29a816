"""Build the long-memory moving-average kernel and sample the process g.

The kernel integrates to one in L2, decays like u^(H0 - 3/2), and the
resulting stationary Gaussian process has covariance ~ x^(2 H0 - 2): slow
enough that the covariance is non-integrable, which is the long-range
dependence regime driving everything else in this library.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from oscillab import (
    KernelSpec,
    eval_kernel,
    normalization_constant,
    simulate_path,
    theoretical_covariance,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

kernel = KernelSpec(m=1, h0=0.75)
print(f"kernel: m={kernel.m}, H0={kernel.h0}, H={kernel.h}")
print(f"normalization constant C0 = {normalization_constant(1, 0.75):.6f}")
print(f"covariance at lag 0 (should be 1): {theoretical_covariance(kernel, 0.0):.8f}")

# covariance decay versus the power-law asymptote x^(2 H0 - 2)
lags = np.geomspace(1.0, 1e5, 41)
cov = np.array([theoretical_covariance(kernel, x) for x in lags])
ratio = cov / lags ** (2 * kernel.h0 - 2.0)
print("asymptote ratio at x = 1e3, 1e4, 1e5:",
      [f"{theoretical_covariance(kernel, x) / x**-0.5:.4f}" for x in (1e3, 1e4, 1e5)])

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
u = np.geomspace(1e-3, 1e3, 600)
axes[0].loglog(u, eval_kernel(kernel, u))
axes[0].loglog(u, kernel.c0 * u ** (kernel.h0 - 1.5), "--", label="C0 u^(H0-3/2)")
axes[0].set_title("moving-average kernel e(u)")
axes[0].legend()
axes[1].loglog(lags, cov, label="R_g(x)")
axes[1].loglog(lags, lags ** (2 * kernel.h0 - 2.0), "--", label="x^(2H0-2)")
axes[1].set_title("covariance decay")
axes[1].legend()

# three sample trajectories; the slow covariance decay shows up as long
# excursions away from zero
for seed in range(3):
    path = simulate_path(kernel, n=4000, delta=0.5, window=1.6e4, seed=seed,
                         truncation_tol=0.05)
    axes[2].plot(path.grid, path.values, lw=0.7, label=f"seed {seed}")
    print(f"seed {seed}: sample mean {path.values.mean():+.3f}, "
          f"sample var {path.values.var():.3f}")
axes[2].set_title("sample paths of g")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "long_memory_process.png"), dpi=120)
print("wrote", os.path.join(OUT, "long_memory_process.png"))
