import logging
import os
from fractions import Fraction
from typing import ClassVar, List

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    app_name: str = "qsc"

    # Solver Configuration
    solver: str = os.getenv("QSC_SOLVER", "z3")
    solver_path: str = os.getenv("QSC_SOLVER_PATH", "")
    solver_flags: str = os.getenv("QSC_SOLVER_FLAGS", "")
    solver_timeout: int = int(os.getenv("QSC_SOLVER_TIMEOUT", 120))

    # Bound search
    tol: str = os.getenv("QSC_TOL", "1/128")
    eps_min: str = os.getenv("QSC_EPS_MIN", "1/1000")
    m_max: str = os.getenv("QSC_M_MAX", "1000000")
    rational_grid_bits: int = int(os.getenv("QSC_RATIONAL_GRID_BITS", 20))

    # Checker / oracle limits
    grid_cap: int = int(os.getenv("QSC_GRID_CAP", 100000))
    memory_cap_states: int = int(
        os.getenv("QSC_MEMORY_CAP_STATES", 2000000)
    )

    log_level: str = os.getenv("QSC_LOG_LEVEL", "INFO")

    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="QSC_", extra="allow"
    )

    logger: ClassVar[logging.Logger] = logging.getLogger("qsc")

    def solver_flag_list(self) -> List[str]:
        return [flag for flag in self.solver_flags.split() if flag]

    @property
    def tol_value(self) -> Fraction:
        return Fraction(self.tol)

    @property
    def eps_min_value(self) -> Fraction:
        return Fraction(self.eps_min)

    @property
    def m_max_value(self) -> Fraction:
        return Fraction(self.m_max)


logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

settings = Settings()
