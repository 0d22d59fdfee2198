# constants.py

# --- Process Exit Codes ---
EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_VERIFY_FAILED = 2
EXIT_BLOWUP = 3

# --- Grid and Operator Limits ---
MIN_CELLS_LAPLACIAN = 2
MIN_CELLS_BIHARMONIC = 4
PHI1_TAYLOR_CUTOFF = 1e-5
PHI2_TAYLOR_CUTOFF = 1e-3
EIGENVALUE_TOLERANCE = 1e-12

# --- Integration Defaults ---
DEFAULT_BLOWUP_THRESHOLD = 1e8
DEFAULT_PICARD_MAX_ITERS = 50
DEFAULT_PICARD_TOL = 1e-12
DEFAULT_PICARD_NODES = 101
BLOWUP_REFINEMENT = 8
CONSTRAINT_RESIDUAL_LIMIT = 1e-9

# --- Choices ---
BOUNDARY_CONDITIONS = ('neumann', 'dirichlet')
SCHEMES = ('exp_euler', 'etd2')
NONLINEARITIES = ('paper', 'square_test', 'zero', 'linear_test')
IC_PRESETS = ('zero', 'constant', 'gauss_bump', 'cosine_mode', 'from_csv')

# --- Output ---
CSV_DIGITS = 17
TRAJECTORY_FILE = 'trajectory.csv'
SUMMARY_FILE = 'summary.json'
VERIFY_FILE = 'verify.json'
CONVERGE_FILE = 'converge.csv'

# --- Convergence Brackets (observed order) ---
ORDER_BRACKETS = {
    'spatial': (1.7, 2.3),
    'exp_euler': (0.8, 1.2),
    'etd2': (1.7, 2.3),
}
