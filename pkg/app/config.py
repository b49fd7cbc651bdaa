import os

from dotenv import load_dotenv

load_dotenv()


def _flag(name: str, default: str = "False") -> bool:
    return os.getenv(name, default).lower() == "true"


class Config:
    DEBUG = _flag("LORENTZ_LAB_DEBUG")
    LOG_FILE = os.getenv("LORENTZ_LAB_LOG_FILE", "lorentz_lab.log")

    # Constants at or above the cap are reported as "not finite"
    FINITENESS_CAP = float(os.getenv("LORENTZ_LAB_CAP", "1e6"))
    THREADS = int(os.getenv("LORENTZ_LAB_THREADS", "1"))
    PROGRESS = _flag("LORENTZ_LAB_PROGRESS")

    CACHE_ENABLED = _flag("LORENTZ_LAB_CACHE")
    CACHE_DIR = os.getenv("CACHE_DIR", "cache")
    CACHE_EXPIRY_DAYS = int(os.getenv("CACHE_EXPIRY_DAYS", "7"))

    def cap(self) -> float:
        """Finiteness cap, re-read so that the environment can override it per run."""
        return float(os.getenv("LORENTZ_LAB_CAP", str(self.FINITENESS_CAP)))


config = Config()
