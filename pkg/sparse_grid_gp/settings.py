# Settings for the sparse_grid_gp package
#
# Library-wide defaults. Benchmark config files override the study keys
# listed in the *_CONFIG dictionaries below; any other key is rejected.

# Largest N the dense oracle will factorize
DENSE_MAX_POINTS = 5000

# Diagonal nugget added to every 1-D correlation matrix (0 = exact interpolation)
NUGGET = 0.0

# Lengthscale search
PHI_BRACKET = (1e-2, 1e2)
GOLDEN_TOL = 1e-3
GOLDEN_MAX_EVALS = 100

# Monte Carlo defaults for the prediction-error study
N_MC = 200
N_PROBE = 500

# Jitter added to the joint design+probe covariance before drawing sample paths
SAMPLE_JITTER = 1e-10

# Fast and dense weights must agree to this before timings are reported
WEIGHT_GATE_TOL = 1e-8

CSV_FLOAT_FORMAT = "%.17g"
DEFAULT_SCHEDULE = "centered"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Allowed config keys per study, with defaults (the default's type is the coercion type)
RMSPE_CONFIG = {
    "d": 4,
    "nu": 2.5,
    "phi": 0.75,
    "strategies": ["sparse_grid", "lattice", "lhs"],
    "etas": [5, 6, 7],
    "lattice_sizes": [2, 3],
    "lhs_sizes": [9, 41, 129],
    "n_mc": N_MC,
    "n_probe": N_PROBE,
    "seed": 0,
    "schedule": DEFAULT_SCHEDULE,
    "nugget": NUGGET,
    "max_dense_points": DENSE_MAX_POINTS,
    "record_seconds": False,
}

MAPE_CONFIG = {
    "function": "product_peak",
    "d": 4,
    "nu": 2.5,
    "strategies": ["sparse_grid", "lhs"],
    "etas": [5, 6, 7, 8],
    "lattice_sizes": [2, 3],
    "lhs_sizes": [9, 41, 129],
    "n_probe": N_PROBE,
    "seed": 0,
    "schedule": DEFAULT_SCHEDULE,
    "phi_lo": PHI_BRACKET[0],
    "phi_hi": PHI_BRACKET[1],
    "nugget": NUGGET,
    "max_dense_points": DENSE_MAX_POINTS,
    "record_seconds": False,
}

TIMING_CONFIG = {
    "d": 10,
    "eta": 14,
    "trials": 3,
    "nu": 2.5,
    "phi": 0.75,
    "seed": 0,
    "schedule": DEFAULT_SCHEDULE,
    "nugget": NUGGET,
    "max_dense_points": DENSE_MAX_POINTS,
    "gate_tol": WEIGHT_GATE_TOL,
}

STUDY_CONFIGS = {
    "rmspe": RMSPE_CONFIG,
    "mape": MAPE_CONFIG,
    "timing": TIMING_CONFIG,
}
