import os
from dotenv import load_dotenv
from joblib import cpu_count

load_dotenv()

class Settings:
    # Tolerances
    TOL: float = float(os.getenv("PHT_TOL", "1e-9"))
    ANGLE_TOL: float = float(os.getenv("PHT_ANGLE_TOL", "1e-12"))
    PARALLEL_TOL: float = float(os.getenv("PHT_PARALLEL_TOL", "1e-12"))
    AREA_TOL: float = float(os.getenv("PHT_AREA_TOL", "1e-12"))
    PERSISTENCE_EPS: float = float(os.getenv("PHT_PERSISTENCE_EPS", "1e-12"))

    # Direction sampling
    REFINE: int = int(os.getenv("PHT_REFINE", "0"))

    # Fan-out
    JOBS: int = int(os.getenv("PHT_JOBS", str(cpu_count())))

    # Section stitching
    STITCH_MAX_HALVINGS: int = int(os.getenv("PHT_STITCH_MAX_HALVINGS", "40"))

    # Corpus generation
    GENERATOR_RESAMPLE_CAP: int = int(os.getenv("PHT_GENERATOR_RESAMPLE_CAP", "1000"))

    # Application
    LOG_LEVEL: str = os.getenv("PHT_LOG_LEVEL", "INFO").upper()
    DEBUG: bool = os.getenv("PHT_DEBUG", "False").lower() == "true"

settings = Settings()
