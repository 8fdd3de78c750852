from otmap.utils.logger import setup_logging
from otmap.utils.rng import make_rng

__all__ = ["setup_logging", "make_rng"]
