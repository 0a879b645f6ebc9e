import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    # Output storage
    OUTPUT_DIR = os.getenv('EXC_OUTPUT_DIR', "runs")
    LOG_LEVEL = os.getenv('EXC_LOG_LEVEL', "INFO")

    # Reproducibility and workers
    DEFAULT_SEED = int(os.getenv('EXC_SEED', '20240101'))
    DEFAULT_THREADS = int(os.getenv('EXC_THREADS', str(os.cpu_count() or 1)))

    # Quadrature
    QUAD_REL_TOL = 1e-10
    QUAD_ABS_TOL = 1e-12
    QUAD_LIMIT = 200

    # Boundary integral divergence detector
    DIVERGENCE_RATIO = 0.9  # increment ratio on doubled truncations
    DIVERGENCE_STEPS = 3
    CONVERGENCE_REL = 1e-10
    MAX_TRUNCATIONS = 60

    # Continued fractions
    LENTZ_TINY = 1e-30
    LENTZ_MAX_DEPTH = 10_000
    SERIES_GUARD = 5
    BREAKDOWN_TOL = 1e-13
    REEXPANSION_TOL = 1e-6

    # Stieltjes-Perron inversion
    EPS_SCHEDULE = (1e-2, 5e-3, 2.5e-3)
    NEGATIVE_CLAMP = 1e-8

    # Hierarchy SDE defaults
    SDE_STEP = 1e-3
    SDE_BURN_IN = 1e3
    SDE_THIN = 1.0
    SDE_CHAINS = 256

    # Path simulation
    PATH_BLOCK = 2048  # fixed, independent of thread count
    PATH_STEP = 1e-4
    PATH_HORIZON = 20.0
    ESCAPE_RETURN_PROB = 0.25
    NEVER_RETURN_PROB = 1e-12
