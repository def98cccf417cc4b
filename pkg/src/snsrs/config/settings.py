"""Application settings and configuration."""

import os

# Default settings
DEFAULT_LOG_LEVEL = os.getenv("SNSRS_LOG_LEVEL", "WARNING")
DEFAULT_SEED = int(os.getenv("SNSRS_SEED", "20221"))
DEFAULT_BUDGET = int(os.getenv("SNSRS_BUDGET", "20000"))
DEFAULT_WORKERS = int(os.getenv("SNSRS_WORKERS", "1"))

# Output format
CSV_FLOAT_FORMAT = "%.9e"
MANIFEST_SCHEMA_VERSION = 1
RNG_ALGORITHM = "Philox"

# Monte Carlo sharding (trials per shard; sub-seeds derive from the shard index)
MC_SHARD_SIZE = 2**18

# Chernoff root finding
ROOT_MAXITER = 200

# Device presets. Every row uses f = 1.1, xi = 1e-10 and 0.2 dB/km fiber.
# Row B is the asymptotic row; its N is a placeholder.
DEVICE_ROWS: dict[str, dict[str, float]] = {
    "A": {"dark": 1e-8, "eta0": 0.5, "e_mis": 0.03, "N": 1e8},
    "B": {"dark": 1e-8, "eta0": 0.5, "e_mis": 0.03, "N": 1e10},
    "C": {"dark": 1e-9, "eta0": 0.5, "e_mis": 0.03, "N": 1e10},
    "D": {"dark": 1e-8, "eta0": 0.5, "e_mis": 0.03, "N": 1e12},
}
ASYMPTOTIC_ROWS = frozenset({"B"})
ROW_F_EC = 1.1
ROW_XI = 1e-10
ROW_ALPHA_DB_KM = 0.2

# Starting source settings for presets and the optimizer
DEFAULT_SOURCE: dict[str, float] = {
    "p_v": 0.65,
    "p_x": 0.15,
    "p_y": 0.15,
    "mu_x": 0.1,
    "mu_y": 0.4,
    "mu_z": 0.3,
    "lambda_slice": 0.05,
}

# Optimizer search box, in (p_v, p_x, p_y, mu_x, mu_y, mu_z, lambda_slice) order
OPTIMIZER_VARIABLES = ("p_v", "p_x", "p_y", "mu_x", "mu_y", "mu_z", "lambda_slice")
OPTIMIZER_LOG_SCALE = frozenset({"p_x", "p_y", "mu_x", "lambda_slice"})
OPTIMIZER_BOUNDS: dict[str, tuple[float, float]] = {
    "p_v": (0.01, 0.99),
    "p_x": (1e-4, 0.5),
    "p_y": (1e-4, 0.5),
    "mu_x": (1e-4, 1.0),
    "mu_y": (1e-4, 1.5),
    "mu_z": (1e-3, 2.0),
    "lambda_slice": (1e-4, 1.0),
}
# Hard limits that bound widening
OPTIMIZER_LIMITS: dict[str, tuple[float, float]] = {
    "p_v": (1e-6, 1.0),
    "p_x": (1e-8, 1.0),
    "p_y": (1e-8, 1.0),
    "mu_x": (1e-8, 10.0),
    "mu_y": (1e-8, 20.0),
    "mu_z": (1e-8, 20.0),
    "lambda_slice": (1e-8, 1.0),
}
PZ_MIN = 1e-4
OPTIMIZER_RESTARTS = 5
LINE_SEARCH_TOL = 1e-3
MAX_WIDENINGS = 2

# Published key rates in bits per window, device row C
TABLE2_DISTANCES_KM = (250.0, 300.0, 350.0)
TABLE2_PUBLISHED: dict[str, tuple[float, float, float]] = {
    "PLOB-2": (1.44e-5, 1.44e-6, 1.44e-7),
    "SNS": (4.90e-6, 1.01e-6, 1.34e-7),
    "AOPP": (8.38e-6, 1.59e-6, 1.43e-7),
    "m=2": (8.57e-6, 1.79e-6, 2.62e-7),
    "m=6": (1.72e-5, 3.41e-6, 4.66e-7),
    "m=20": (2.96e-5, 4.94e-6, 5.30e-7),
}
TABLE2_MODES = (1, 2, 6, 20)
TABLE2_ROW = "C"

__all__ = [
    "DEFAULT_LOG_LEVEL",
    "DEFAULT_SEED",
    "DEFAULT_BUDGET",
    "DEFAULT_WORKERS",
    "CSV_FLOAT_FORMAT",
    "MANIFEST_SCHEMA_VERSION",
    "RNG_ALGORITHM",
    "MC_SHARD_SIZE",
    "ROOT_MAXITER",
    "DEVICE_ROWS",
    "ASYMPTOTIC_ROWS",
    "DEFAULT_SOURCE",
    "OPTIMIZER_VARIABLES",
    "OPTIMIZER_LOG_SCALE",
    "OPTIMIZER_BOUNDS",
    "OPTIMIZER_LIMITS",
    "PZ_MIN",
    "OPTIMIZER_RESTARTS",
    "LINE_SEARCH_TOL",
    "MAX_WIDENINGS",
    "TABLE2_DISTANCES_KM",
    "TABLE2_PUBLISHED",
    "TABLE2_MODES",
    "TABLE2_ROW",
]
