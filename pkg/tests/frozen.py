"""Reference numbers produced once by ``oracles.py`` (and the closed forms noted) and frozen."""

import math

# oracles.lp_sonic_point(): scipy DOP853 shooting from a first-order start at y* - 1e-5
LP_SONIC_POINT = 2.3411173682659863
LP_SONIC_POINT_TOL = 1e-6  # oracle start error, measured by halving the start offset

# oracles.lane_emden_first_zero(3): first zero of the n = 3 Lane-Emden function
LANE_EMDEN_XI1 = 6.896848619376914
LANE_EMDEN_W0 = LANE_EMDEN_XI1 / math.sqrt(math.pi)

# oracles.cycloid_collapse_time(1, 1, -0.5)
CYCLOID_T_STAR = 0.7591343344265236

# regression anchors of this package's own pipeline (not independent; guard against drift)
LP_SONIC_POINT_PIPELINE = 2.3411172805794185
REL_SONIC_POINT_EPS_1E_2 = 2.3539802515515467
REL_SONIC_POINT_EPS_1E_3 = 2.342280748919489
