from .check_service import CheckService
from .oracle_service import OracleService
from .synthesis_service import SynthesisService
from .verify_service import VerifyService

__all__ = [
    "CheckService",
    "OracleService",
    "SynthesisService",
    "VerifyService",
]
