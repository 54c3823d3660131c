"""Network SEIR epidemic with instance-based-learning agents deciding weekly
whether to wear masks."""

__version__ = "0.1.0"

from .behavior import MaskingAgents, RewardWeights, observe, observe_all, reward
from .calibration import (
    CalibrationResult,
    calibrate_to_r0,
    estimate_r0_empirical,
    expected_secondary_infections,
)
from .cogibl import (
    DeclarativeMemory,
    Instance,
    PolicyParams,
    PopulationMemory,
    StateVector,
    blend,
    learn,
    matching_score,
    retrieval_probabilities,
    seed_boundary_memory,
    select_action,
)
from .config import ScenarioConfig, load_config, validate_config
from .epidemic import DiseaseParams, Health, State, seed_outbreak, step_day, transmission_multiplier
from .graph import (
    ContactGraph,
    generate_barabasi_albert,
    generate_uniform_random,
    load_edge_list,
    sample_and_rewire,
    write_edge_list,
)
from .metrics import equilibrium_prevalence, masking_assortativity, wave_peaks
from .runner import run_scenario, simulate
