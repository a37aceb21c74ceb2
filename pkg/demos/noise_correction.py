#!/usr/bin/env python3
"""Why the noise-corrected estimator exists.

Observation noise (a heat-kernel blur of intensity tau) multiplies the
transform at index pi by exp(-tau^2 kappa/2).  An estimator that ignores it
inherits a bias of tau^2 kappa / (2 t Lambda) that no amount of data removes;
the corrected variant adds the known offset back and recovers the 1/m rate.

We estimate the degree-2 coefficient on the sphere from increasingly many
noisy observations, with and without the correction.
"""

from decompound import StudyConfig, run_coefficient_study

TAU = 0.3
GRID = (100, 1000, 10_000, 100_000)
REPLICATES = 60

corrected = run_coefficient_study(StudyConfig(
    space="sphere:2", law="heat:tau=0.5", index="2",
    variant="noise-corrected", noise_tau=TAU,
    m_grid=GRID, replicates=REPLICATES, seed=13))

ignored = run_coefficient_study(StudyConfig(
    space="sphere:2", law="heat:tau=0.5", index="2",
    variant="real-log", observation_noise_tau=TAU,
    m_grid=GRID, replicates=REPLICATES, seed=13))

kappa = 6.0  # degree-2 Casimir eigenvalue on sphere(2)
bias = TAU**2 * kappa / 2.0
print(f"noise tau={TAU}; predicted squared bias when ignored: {bias**2:.4f}\n")
print(f"{'m':>7} {'corrected MSE':>14} {'ignored MSE':>12}")
for good, bad in zip(corrected.rows, ignored.rows):
    print(f"{good['m']:>7} {good['mse']:>14.2e} {bad['mse']:>12.2e}")

print(f"\ncorrected slope {corrected.fit.slope:+.3f} (reference -1);"
      f" the ignored column flatlines at the bias floor.")
