"""Robot versus handheld: spread of the readings and agreement of the fits."""

# %%
# Same transect, same seed. The two platforms share field mill noise but
# not placement errors.

import numpy as np

from platecharge import compare_platforms, handheld_reference, load_config, run_transect

cfg = load_config()


def paired(seed):
    robot = run_transect(cfg.transect, cfg.robot, cfg.sensor, cfg.world, seed)
    hand = handheld_reference(cfg.transect, cfg.handheld, cfg.sensor, cfg.world, seed)
    return compare_platforms(robot, hand, cfg.z, cfg.side_a)


report = paired(cfg.seed)
print("fractional se, robot:    %.2f to %.2f" % report.robot_fse_range)
print("fractional se, handheld: %.2f to %.2f" % report.handheld_fse_range)
print(f"variability ratio {report.variability_ratio:.2f}, sigma consistent: {report.sigma_consistent}")
for name, fit in (("robot", report.robot_fit), ("handheld", report.handheld_fit)):
    print(f"{name:9s} sigma = {fit.sigma_hat / 1e-12:.1f} +/- {fit.sigma_se / 1e-12:.1f} pC/m^2")

# %%
# A single five-run transect is a noisy estimate of the variability ratio.
# Averaged over twenty seeds it settles.

ratios = [paired(seed).variability_ratio for seed in range(20)]
print(f"variability ratio over 20 seeds: mean {np.mean(ratios):.2f}, "
      f"min {np.min(ratios):.2f}, max {np.max(ratios):.2f}")
