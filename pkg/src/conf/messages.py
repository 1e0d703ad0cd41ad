WINDOW_DEGENERATE = "Window must satisfy x1 > x0 and y1 > y0"
POINT_OUTSIDE_WINDOW = "Point pattern contains points outside the observation window"
INTENSITY_NOT_POSITIVE = "Intensity values must be strictly positive"
INTENSITY_MISSING = "Intensity values are required for every point"
INTENSITY_LENGTH = "Intensity values must match the number of points"
PAIR_BOUNDS_INVALID = "Pair distance bounds must satisfy 0 <= r_lo < r_hi"
RANGE_EXCEEDS_WINDOW = "Upper pair distance exceeds the shortest window side"
PAIR_OUTSIDE_SUPPORT = "Pair distance outside the basis support [r_min, r_min + R]"
BASIS_INDEX_OUT_OF_RANGE = "Basis index out of range"
BASIS_ORDER_UNSUPPORTED = "Only order nu = 0 (planar) is supported"
DISTANCE_OUT_OF_RANGE = "Distance outside the fitted range [r_min, r_min + R]"
SINGULAR_SYSTEM = "Variational system is singular (condition estimate {condition:.3e})"
NO_PAIRS = "No point pairs within the distance range"
TOO_FEW_PAIRS = "At least K + 1 pairs are required in range (found {found}, K = {k})"
NEWTON_DIVERGED = "Newton iteration for Bessel root {k} did not converge"
QUADRATURE_DIVERGED = "Hankel-transform quadrature did not converge (change {change:.3e})"
NO_FEASIBLE_K = "No truncation level produced a finite cross-validation score"
K_MAX_TOO_SMALL = "K_max must be at least 2"
BANDWIDTH_NOT_POSITIVE = "Bandwidth must be positive"
UNKNOWN_KDE_CRITERION = "Unknown bandwidth criterion {criterion!r}; expected least-squares or composite-likelihood"
UNKNOWN_MODEL = "Unknown point process model {kind}"
NO_SAMPLER = "Model {kind} carries a pair correlation function only (no sampler)"
KERNEL_INVALID = "Dispersal kernel parameters are invalid"
PATTERN_HEADER = "Pattern CSV must have header x,y[,intensity]"
PATTERN_VALUES = "Pattern CSV contains non-numeric or missing values"
INTENSITY_SPEC = "Intensity mode must be constant:<value>, constant:plugin or column"
WINDOW_SPEC = "Window must be given as x0,y0,x1,y1"
CONFIG_INVALID = "Benchmark configuration is invalid: {detail}"
FIT_FORMAT = "Fit file is not a valid fit envelope: {detail}"
PSI_SUPPORT = "Support endpoint b of psi must be positive"
BASIS_SUPPORT = "Basis argument outside [0, R]"
BASIS_RANGE_INVALID = "Basis range requires R > 0, r_min >= 0 and K_max >= 1"
PAIR_NOT_FOUND = "Pair {pair_id} is not part of the variational system"
NO_FEASIBLE_BANDWIDTH = "No bandwidth on the grid produced a finite cross-validation score"
CV_ESTIMATOR = "CV(K) is defined for the vse and ose estimators only"
FILE_NOT_FOUND = "File {path} not found"
PATTERNS_DIR_MISSING = "Cells of model {kind} need PATTERNS_DIR with externally simulated patterns"
