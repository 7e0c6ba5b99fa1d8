import numpy as np

EULER_GAMMA = float(np.euler_gamma)

SLOT_COUNT = 2
PMF_CAPTURE_MASS = 1e-9
CI95_Z = 1.959963984540054

TABLE1_DELTAS = (0.0, 0.9, 0.99, 0.999)
XI_GRID = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99)
EXPLORE_LEN_SWEEP = (5, 10, 20, 40, 80)
CSV_FLOAT_FORMAT = "%.17g"
