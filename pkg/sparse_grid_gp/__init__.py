from sparse_grid_gp.designs import SparseGridDesign, build_sparse_grid  # noqa: F401
from sparse_grid_gp.kernels import MeanBasis, SeparableKernel  # noqa: F401
from sparse_grid_gp.likelihood import fit_mle  # noqa: F401
from sparse_grid_gp.main import Bench  # noqa: F401
from sparse_grid_gp.sg_predictor import SparseGridPredictor  # noqa: F401
