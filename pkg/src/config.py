""" Configuration file for the project. """

import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

DEFAULT_TAU_POINTS = 50  # Points in the default sweep grid
DEFAULT_TAU_MAX = 0.5  # Upper end of the default sweep grid

SVD_ABS_FLOOR = 1e-14  # Relative to sigma_max
ZERO_STD_TOL = 1e-12
ZERO_NORM_TOL = 1e-300

DEFAULT_SEED = 0
DEFAULT_N_NORMAL = 150
DEFAULT_N_ANOMALOUS = 150

MAX_WORKERS = int(os.getenv("TTAD_MAX_WORKERS", "1"))
LOG_LEVEL = os.getenv("TTAD_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
SCORE_TIE_TOL = 1e-10  # Relative spread under which a whole score vector counts as one tie
