import logging
import os

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r; using %s", name, raw, default)
        return default


SHA_PRECISION = max(1, _int_env("SHA_PRECISION", 16))
SHA_SEED = _int_env("SHA_SEED", 0)
SHA_DEFAULT_GROUP = os.getenv("SHA_DEFAULT_GROUP", "zmod").strip().lower() or "zmod"
SHA_LOG_LEVEL = os.getenv("SHA_LOG_LEVEL", "WARNING").strip().upper() or "WARNING"
SHA_ALLOW_EXTRAPOLATION = os.getenv("SHA_ALLOW_EXTRAPOLATION", "true").lower() in {"1", "true", "yes"}
SHA_MAX_PRIME = _int_env("SHA_MAX_PRIME", 2**31)

SUPPORTED_GROUPS = ["zmod", "sym"]
if SHA_DEFAULT_GROUP not in SUPPORTED_GROUPS:
    logger.warning("Unsupported SHA_DEFAULT_GROUP=%r; using zmod", SHA_DEFAULT_GROUP)
    SHA_DEFAULT_GROUP = "zmod"
