from typing import List

from qsc.solver.adapters.base import SolverAdapter


class Z3Adapter(SolverAdapter):
    name = "z3"
    binary = "z3"

    def command(self, timeout: int) -> List[str]:
        return [
            self.executable(),
            "-smt2",
            "-in",
            f"-T:{max(1, timeout)}",
            *self.flags,
        ]
