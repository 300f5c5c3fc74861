from typing import List

from qsc.solver.adapters.base import SolverAdapter


class Cvc5Adapter(SolverAdapter):
    name = "cvc5"
    binary = "cvc5"

    def command(self, timeout: int) -> List[str]:
        return [
            self.executable(),
            "--lang=smt2",
            "--produce-models",
            f"--tlimit={max(1, timeout) * 1000}",
            *self.flags,
        ]
