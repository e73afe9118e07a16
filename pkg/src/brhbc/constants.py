"""Physical constants in SI units."""

import numpy as np
from scipy import constants as _sc

EPS0 = _sc.epsilon_0
MU0 = _sc.mu_0
C0 = _sc.c
ETA0 = float(np.sqrt(MU0 / EPS0))

SIGMA_COPPER = 5.8e7
