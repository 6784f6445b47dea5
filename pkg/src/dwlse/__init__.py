"""Consensus-based distributed weighted least squares estimation over sensor networks."""

from .cif import cif_measurement_update, cif_time_update, run_cif, wls_solve
from .consensus import (
    AdmmProblemTerms,
    AdmmState,
    DivergenceError,
    ac_run,
    ac_step,
    admm_lambda_update,
    admm_run,
    admm_x_update,
)
from .dwlse import DwlseConfig, DwlseNode, dwlse_init, dwlse_predict, dwlse_step
from .models import (
    DegenerateError,
    ModelError,
    SensorModel,
    StackedWlsProblem,
    StateEstimate,
    SystemModel,
    stack_wls,
    validate_models,
)
from .network import NetworkTopology, generate_geometric, max_degree, neighbors

__version__ = "0.1.0"
