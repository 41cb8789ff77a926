"""Frozen regression constants.

Values here were measured once with the calibration settings noted beside
them and are asserted by the test-suite and the CLI.  Bump REGISTRY_VERSION
whenever a value is re-measured.
"""

REGISTRY_VERSION = "2026.10.1"

# Empirical constants for the weight-integral bounds, keyed by (lemma, rho).
# Calibration: ratio_scan with n_samples=2000 at seeds 101, 202, 303; value is
# 1.01 x the pooled maximum rounded up to three significant figures.
C_EMP = {
    ("tau-pair", 1.01): 202,
    ("tau-pair", 1.5): 8.06,
    ("tau-pair", 2.0): 4.04,
    ("quad-rough", 0.51): 103,
    ("quad-rough", 1.01): 3.29,
    ("quad-rough", 1.5): 2.16,
    ("quad-rough", 2.0): 1.71,
    ("cubic-rough", 0.34): 104,
    ("cubic-rough", 1.01): 2.74,
    ("cubic-rough", 1.5): 2.18,
    ("cubic-rough", 2.0): 1.9,
    ("quad-sharp", 1.01): 54.9,
    ("quad-sharp", 1.5): 4.04,
    ("quad-sharp", 2.0): 2.15,
    ("cubic-sharp", 1.01): 4.23,
    ("cubic-sharp", 1.5): 3.1,
    ("cubic-sharp", 2.0): 2.57,
}

# Log-log slope of the weighted convolution probe for the alpha = 4, beta = 3
# bump pair at s = 0, b = 0.6; ladder N = 2^8..2^12, default resolution.
# Refining the grid to (64, 32, 64, 32) changes it by < 1e-8.
PROBE_SLOPE_BETA3 = 0.5022

# Empirical two-sided range of N^2 |xi1 - xi| / |G1| at alpha = 1 with
# |xi2|, |xi - xi1 - xi2| uniform on [N, 2N] (N = 1e4, beta = 1, seed 0,
# 10^4 samples).  The exact range for these draws is [1/12, 1/3].
ALPHA1_RATIO_RANGE = (0.08356, 0.3278)

# Upper bound for max |G0| over the general-alpha window at alpha = 2,
# beta = 1, s = 0, ladder N = 2^8..2^16 (g0_window_max, n = 33).  Measured
# maximum 3.4661 at N = 2^8, decreasing to 3.4641 = 3 alpha (C2 - C1) at
# large N; value is 1.01 x the maximum rounded up to three figures.
G0_BOUND_GENERAL = 3.50
