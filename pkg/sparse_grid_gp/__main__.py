import sys

from sparse_grid_gp.cli import main

sys.exit(main())
