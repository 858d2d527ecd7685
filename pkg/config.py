"""
Configuration module for Graft MT
=================================

Loads environment variables and defines application constants.
Per-run settings (strategies, ablations, backend) live in a JSON run config
validated by modules.run_config; the values here are the defaults it falls back to.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# =========== App Settings ===========
APP_NAME = "Graft MT"
APP_ENV = os.getenv("APP_ENV", "development")  # "development" or "production"
DEBUG = APP_ENV == "development"


def _get_storage_root() -> str:
    """Return the directory where run directories are created by default."""
    explicit_root = os.getenv("GRAFT_STORAGE_ROOT")
    if explicit_root:
        return explicit_root
    return os.path.join(".", "runs")


# =========== Backend ===========
API_KEY_ENV = "GRAFT_API_KEY"       # name of the env var holding the API key
DEFAULT_BACKEND_URL = os.getenv("GRAFT_BACKEND_URL", "http://localhost:8000/v1")
DEFAULT_MODEL_NAME = os.getenv("GRAFT_MODEL", "meta-llama/Llama-3.1-70B-Instruct")
REQUEST_TIMEOUT_SECONDS = 120
MAX_RETRIES = 3                     # retries after the first attempt
BACKOFF_FACTOR = 1.0                # seconds; waits are factor * 2**attempt

# =========== Decoding ===========
DEFAULT_TEMPERATURE = 0.1           # sweepable over 0.1 - 0.3
BINARY_MAX_TOKENS = 1               # segmentation and edge agents answer yes/no
GENERATIVE_MAX_TOKENS = 4096        # memory and translation agents
FEW_SHOT_EXAMPLES = 3

# =========== Segmentation ===========
MAX_DISCOURSE_SENTENCES = 40        # forced boundary beyond this
SEMANTIC_THRESHOLD = 0.2
SEMANTIC_WINDOW = 0
SPACY_MODEL = "en_core_web_sm"

# =========== Graph ===========
TFIDF_TAU = 0.3
EDGE_WORKERS = 4

# =========== Memory ===========
SUMMARY_CAP = 5                     # predecessor summaries kept in incident memory
SUMMARY_DELIMITER = " | "

# =========== Metrics ===========
BLEU_SMOOTH_VALUE = 0.1
BLEU_MAX_ORDER = 4                  # sacrebleu default n-gram order
MAX_PATH_LENGTH = 8

# =========== Ingestion ===========
ABBREVIATIONS = [
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.",
    "e.g.", "i.e.", "no.", "fig.", "approx.", "inc.", "ltd.", "co.", "u.s.",
]

# Languages written without spaces between words
SPACELESS_LANGUAGES = {"zh", "ja"}

# =========== Run Output ===========
RUNS_FOLDER = _get_storage_root()
DEFAULT_WORKERS = 1


def is_production() -> bool:
    """
    Check whether the app is running in production mode.

    Returns:
        bool: True if APP_ENV is "production", False otherwise
    """
    return APP_ENV == "production"


# =========== Example .env file content ===========
# Create a .env file in the project root with this content:
#
# # Graft MT Configuration
# APP_ENV=production
# GRAFT_API_KEY=your-api-key-here
# GRAFT_BACKEND_URL=http://localhost:8000/v1
# GRAFT_MODEL=meta-llama/Llama-3.1-70B-Instruct
