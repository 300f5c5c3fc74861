from dependency_injector import containers, providers

from qsc.benchmarks.loader import BenchmarkStore
from qsc.core.config import settings
from qsc.services.check_service import CheckService
from qsc.services.oracle_service import OracleService
from qsc.services.synthesis_service import SynthesisService
from qsc.services.verify_service import VerifyService
from qsc.solver.executor import SolverExecutor
from qsc.utils.stage_timer import StageTimer


class Container(containers.DeclarativeContainer):
    config = providers.Configuration()

    solver_executor = providers.Singleton(
        SolverExecutor,
        provider=settings.solver,
        path=settings.solver_path,
        flags=settings.solver_flag_list(),
        timeout=settings.solver_timeout,
    )

    benchmark_store = providers.Singleton(BenchmarkStore)

    stage_timer = providers.Singleton(StageTimer)

    oracle_service = providers.Factory(OracleService, timer=stage_timer)

    verify_service = providers.Factory(
        VerifyService,
        executor=solver_executor,
        timer=stage_timer,
        oracle=oracle_service,
    )

    synthesis_service = providers.Factory(
        SynthesisService,
        executor=solver_executor,
        timer=stage_timer,
        oracle=oracle_service,
    )

    check_service = providers.Factory(CheckService, timer=stage_timer)
