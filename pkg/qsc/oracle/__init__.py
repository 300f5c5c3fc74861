from .checker import check_certificate
from .closed_form import gamblers_ruin, reach_upper
from .exact import (
    accepting_states,
    bottom_components,
    exact_invariant,
    exact_probability,
    reach_probabilities,
    solve_sparse,
    state_probabilities,
    stay_probability,
)
from .simulate import (
    SimulationResult,
    simulate,
    summarize,
    trajectory_streams,
    write_process_csv,
)
from .truncation import (
    BOUNDARY_ACCEPT,
    BOUNDARY_REJECT,
    FiniteChain,
    suggest_box,
    truncate,
)
