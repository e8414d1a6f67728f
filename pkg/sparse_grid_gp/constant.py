"""constants"""

# Increments X_{i,j} \ X_{i,j-1} of the built-in component schedules.
# Boundary points {0, 1} arrive at level 4.
CENTERED_INCREMENTS = (
    (0.5,),
    (0.125, 0.875),
    (0.25, 0.75),
    (0.0, 1.0),
    (0.375, 0.625),
    (0.1875, 0.8125),
    (0.0625, 0.9375),
)
# Boundary points {0, 1} arrive at level 2.
BOUNDARY_INCREMENTS = (
    (0.5,),
    (0.0, 1.0),
    (0.25, 0.75),
    (0.375, 0.625),
    (0.125, 0.875),
)
SCHEDULE_NAMES = ("centered", "boundary", "hyperbolic")

# Matern smoothness values with a closed form (nu = p + 1/2)
SUPPORTED_NU = (0.5, 1.5, 2.5, 3.5)

# Borehole inputs in order (rw, r, Tu, Hu, Tl, Hl, L, Kw), (low, high)
BOREHOLE_RANGES = (
    (0.05, 0.15),
    (100.0, 50000.0),
    (63070.0, 115600.0),
    (990.0, 1110.0),
    (63.1, 116.0),
    (700.0, 820.0),
    (1120.0, 1680.0),
    (9855.0, 12045.0),
)

STRATEGIES = ("sparse_grid", "lattice", "lhs")

REPORT_COLUMNS = ["strategy", "N", "d", "metric", "value", "seconds", "seed"]
PREDICTION_COLUMNS = ["id", "mean", "variance"]
FIT_REPORT_KEYS = ("beta_hat", "sigma2_hat", "phi_hat", "loglik", "n_evals", "bracket_edge")

DESIGN_META_SUFFIX = ".meta.json"
