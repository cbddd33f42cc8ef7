"""Default tolerances and search parameters, overridable per scenario."""

# Feasibility / projection accuracy on the set catalog.
TOL_FEAS = 1e-9
TOL_PROJ = 1e-7

# Acceptance threshold for sampled normal / subdifferential residuals.
TOL_RES = 1e-3

# Angular merge radius for cone direction clustering (radians).
TOL_ANGLE = 0.02

# Dual certificate arithmetic tolerance.
TOL_CERT = 1e-6

# Slack used by grid feasibility searches for shifted intersections.
TOL_FEAS_EXT = 1e-9

# Radius ladder defaults for limsup/liminf discretisation.
LADDER_RHO0 = 0.1
LADDER_FACTOR = 0.5
LADDER_RUNGS = 14
LADDER_SAMPLES = 512

# Last-rungs aggregation window is max(MIN_WINDOW, rungs // WINDOW_DIV).
WINDOW_MIN = 3
WINDOW_DIV = 4

# AQC decreasing-ladder gates.
AQC_GATE_SUM = 1e-2
AQC_GATE_SQUARES = 5e-2

# Growth surrogate: final |I|^{3/2}/R ratio must sit below this gate.
GROWTH_RATIO_GATE = 0.5

# Representation search: maximum number of summands.
REPRESENTATION_MAX_TERMS = 64

# Grid resolution for ball feasibility searches (points per axis).
GRID_RESOLUTION = 41

# Measure-of-overlapping defaults.
OVERLAP_DIRECTIONS = 64
OVERLAP_NU_GRID = 200
