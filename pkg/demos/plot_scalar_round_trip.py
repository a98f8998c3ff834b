"""
Recovering a constant coefficient from one scalar measurement
=============================================================

The simplest case: ``u' = -u + gamma u`` with ``u(0) = 1`` and ``w = 1``.
With ``gamma = 0.5`` the measurement is ``phi(t) = exp(-t/2)``.  There is
no source, so the Volterra equation collapses to ``xi = alpha / phi``.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from evoinverse import get_preset, invert

preset = get_preset("scalar_decay")

###############################################################################
# Build the problem on 200 steps and feed it the exact measurement.

spec = preset.spec(200)
t = spec.grid.nodes
result = invert(spec, preset.exact_phi(t))
print(result.report.to_text())

err = np.max(np.abs(result.gamma.gamma[1:-1] - 0.5))
print(f"max interior error in gamma: {err:.2e}")

###############################################################################
# The error comes from the Crank-Nicolson propagator behind ``alpha`` and
# drops by four each time the step is halved.

errors = []
for N in (50, 100, 200, 400):
    s = preset.spec(N)
    r = invert(s, preset.exact_phi(s.grid.nodes))
    errors.append(np.max(np.abs(r.gamma.gamma[1:-1] - 0.5)))
print("error ratios:", np.round(np.array(errors[:-1]) / errors[1:], 3))

fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].plot(t, result.xi.xi, label="computed xi")
ax[0].plot(t, np.exp(-0.5 * t), "--", label="exp(-t/2)")
ax[0].set_xlabel("t")
ax[0].legend()
ax[1].loglog([1 / 50, 1 / 100, 1 / 200, 1 / 400], errors, "o-")
ax[1].set_xlabel("h")
ax[1].set_ylabel("max |gamma error|")
fig.tight_layout()
fig.savefig("scalar_round_trip.png", dpi=100)
