"""
Configuration file for opspectra

Every tunable lives here as a module constant. Operations take explicit keyword
arguments whose defaults are read from this file.
"""

# Numerics Configuration
ABS_TOL = 1e-10  # Default absolute tolerance, scaled by the matrix norm in comparisons
HERMITIAN_TOL = 1e-9  # Self-adjointness check for Hermitian-only operations
JACOBI_OFFDIAG_TOL = 1e-12  # Jacobi stops when off-diagonal Frobenius mass < this * norm
JACOBI_MAX_SWEEPS = 100  # Cyclic Jacobi sweep cap
POWER_ITERATIONS = 2000  # Power-iteration cap for the operator-norm fallback
CHAR_POLY_MAX_DIM = 64  # Desk-scale guard for Faddeev-LeVerrier
ROOT_TOL = 1e-12  # Durand-Kerner update threshold
ROOT_MAX_SWEEPS = 500  # Durand-Kerner sweep cap
ROOT_ROTATION = 0.4  # Initial-guess rotation (radians) to break symmetric ties
EIGEN_MERGE_TOL = 1e-8  # Eigenvalues closer than this * norm share one threshold
RANK_CUT = 1e-10  # Singular values at or below this * ||T|| count as zero
RANK_FLOOR = 1e-14  # Singular values at or below this count as zero whatever the scale
SPECTRUM_ROOTS_MAX_DIM = 16  # Size guard for spectrum_symmetry_check

# Canonical Pair Configuration
HBAR = 1.0  # Reduced Planck constant in natural units (physical mode uses H_PLANCK / 2pi)

# Grid Configuration
MIN_GRID_POINTS = 8  # Smallest admissible GridFunction
QUOTIENT_MAX_STEPS = 64  # Largest difference-quotient step, in units of h (halved down to 1)
VERDICT_SLOPE_CUT = -0.4  # Heuristic: fitted log-log slope at or below this means blow-up
MONOTONE_SLACK = 0.05  # Heuristic: 5% noise allowed in "decreasing" residual curves
SPECTRAL_BOUNDARY_TOL = 1e-12  # Spectral differentiation needs f ~ 0 at the window edge
CORE_MARGIN = 10  # Core functions vanish on this many boundary cells
JUMP_WIDTH = 1.0  # Jump width used by jump_blowup_profile

# Bernstein Configuration
UNIFORM_GRID_POINTS = 1001  # Grid for sup-norm errors
KERNEL_INTERIOR_MARGIN = 1e-3  # Kernel-form derivative only evaluated on [h, 1-h]

# Physical Constants (CGS, as printed in the source tables)
H_PLANCK = 6.625e-27  # erg*sec
ELECTRON_MASS = 9.11e-28  # gram
ELECTRON_CHARGE = 4.8025e-10  # esu
SPEED_OF_LIGHT = 2.99776e10  # cm/sec
BOLTZMANN = 1.380e-16  # erg/K (never printed; used only for ratios and shapes)
QUADRATURE_POINTS = 20001  # Log-grid trapezoid nodes for the ultraviolet-catastrophe integral
PEAK_SCAN_POINTS = 4001  # Log-spaced wavelengths scanned for the Planck maximum

# Output Configuration
OUTPUT_PATH = "./out"  # Directory for CSV artifacts
CSV_DIGITS = 17  # Significant digits for floats in CSV
DEFAULT_SEED = 20240611  # Seed for random-matrix suites when none is supplied
SEED_ENV_VAR = "OPSPECTRA_SEED"  # Environment fallback for --seed
DEFAULT_DRAWS = 200  # Random draws per size in the bounded suites

# Logging Configuration
LOG_LEVEL = "INFO"  # DEBUG, INFO, WARNING, ERROR
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
