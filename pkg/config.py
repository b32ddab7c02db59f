import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    """
    Application configuration constants.

    Values marked (env) can be overridden from the environment or a .env
    file in the working directory.
    """

    # Output Configuration
    OUTPUT_FORMATS = ("human", "structured")
    DEFAULT_FORMAT = os.getenv("TBAT_FORMAT", "human")  # (env)

    # Logging Configuration
    LOG_LEVEL = os.getenv("TBAT_LOG_LEVEL", "WARNING")  # (env)
    LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

    # Regression Configuration
    REGRESSION_STEP_LIMIT = int(os.getenv("TBAT_STEP_LIMIT", "100000"))  # (env) rewrite steps
    SIMPLIFY_MAX_PASSES = 50

    # Batch Configuration
    DEFAULT_JOBS = int(os.getenv("TBAT_JOBS", "1"))  # (env)

    # Cache Configuration
    CACHE_MAXSIZE = int(os.getenv("TBAT_CACHE_SIZE", "4096"))  # (env)
    THEORY_CACHE_TTL = 600  # seconds
    REGRESSION_CACHE_TTL = 600  # seconds

    # File Configuration
    THEORY_EXTENSION = ".tbat"
    AUTOMATON_EXTENSION = ".ha"

    # Exit Codes
    EXIT_OK = 0
    EXIT_FAILURE = 1
    EXIT_USAGE = 2

    @classmethod
    def default_format(cls) -> str:
        """Default output format, falling back to human on unknown values"""
        fmt = os.getenv("TBAT_FORMAT", cls.DEFAULT_FORMAT)
        return fmt if fmt in cls.OUTPUT_FORMATS else "human"
