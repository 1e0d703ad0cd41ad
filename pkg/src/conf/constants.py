import math

DIMENSION = 2
SURFACE_AREA = 2.0 * math.pi  # unit circle, d = 2
BASIS_ORDER = 0.0

# Bessel evaluation
BESSEL_SERIES_LIMIT = 4.0
BESSEL_ASYMPTOTIC_LIMIT = 25.0
BESSEL_RESCALE = 1e200
NEWTON_MAX_ITERATIONS = 50
NEWTON_TOLERANCE = 1e-15

# Hankel-transform oracle
HANKEL_INTERVALS = 400
HANKEL_NODES = 32
HANKEL_TOLERANCE = 1e-6

# simulation study
DEFAULT_INTENSITY = 200.0
THOMAS_KAPPA = 25.0
THOMAS_OMEGA = 0.0198
THOMAS_MU = 8.0
VG_KAPPA = 25.0
VG_NU = -0.25
VG_OMEGA = 0.01845
VG_MU = 8.0
DPP_ALPHA = 0.039
DPP_R_MIN = 0.01
DILATION_SIGMAS = 6.0
DISPERSAL_TAIL_MASS = 1e-8

# estimators
EPANECHNIKOV = "epanechnikov"
KDE_LEAST_SQUARES = "least-squares"
KDE_COMPOSITE_LIKELIHOOD = "composite-likelihood"
SELECTION_FIRST_LOCAL_MAX = "first-local-max"
SELECTION_BOUNDARY = "boundary"
SELECTION_GLOBAL_MAX = "global-max"
SELECTION_FIXED = "fixed"
SMW_DENOMINATOR_FLOOR = 1e-12
