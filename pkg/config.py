import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == 'true'


class Config:
    # Worker parallelism for matrix assembly
    THREADS = int(os.getenv('NDR_THREADS', 1))

    # Solver settings
    TOL = float(os.getenv('NDR_TOL', 1e-10))
    MAX_ITER_FACTOR = int(os.getenv('NDR_MAX_ITER_FACTOR', 10))
    SUPPORT_THRESHOLD = float(os.getenv('NDR_SUPPORT_THRESHOLD', 1e-8))

    # Diagnostics
    DENSE_EIGEN_LIMIT = int(os.getenv('NDR_DENSE_EIGEN_LIMIT', 5000))
    EXCLUSION_CELLS = float(os.getenv('NDR_EXCLUSION_CELLS', 3))
    REAL_AXIS_FRACTION = float(os.getenv('NDR_REAL_AXIS_FRACTION', 1e-3))
    ENDPOINT_COLLAR = float(os.getenv('NDR_ENDPOINT_COLLAR', 0.1))
    MIN_ORDER = float(os.getenv('NDR_MIN_ORDER', 1.0))

    # Gap integrals (tanh-sinh)
    GAP_TOL = float(os.getenv('NDR_GAP_TOL', 1e-12))
    MP_DPS = int(os.getenv('NDR_MP_DPS', 30))

    # Output
    OUTPUT_DIR = os.getenv('NDR_OUTPUT_DIR', 'out')
    VERBOSE = _env_bool('NDR_VERBOSE', 'true')

    @classmethod
    def validate_config(cls):
        """Validate that every setting is usable"""
        positive_vars = [
            'THREADS',
            'TOL',
            'MAX_ITER_FACTOR',
            'SUPPORT_THRESHOLD',
            'DENSE_EIGEN_LIMIT',
            'REAL_AXIS_FRACTION',
            'ENDPOINT_COLLAR',
            'MIN_ORDER',
            'GAP_TOL',
            'MP_DPS',
        ]

        bad_vars = []
        for var in positive_vars:
            if not getattr(cls, var) > 0:
                bad_vars.append(var)

        if cls.EXCLUSION_CELLS < 0:
            bad_vars.append('EXCLUSION_CELLS')

        if bad_vars:
            raise ValueError(f"Invalid NDR environment settings (must be positive): {', '.join(bad_vars)}")

        if cls.SUPPORT_THRESHOLD >= 1:
            raise ValueError("NDR_SUPPORT_THRESHOLD is relative to max(u) and must be below 1")

        return True
