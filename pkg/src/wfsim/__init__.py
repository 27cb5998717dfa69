"""Statevector simulation of the tripartite Wigner's friend scenario."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    CorrelatorSet,
    InequalityReport,
    analytic_correlators,
    analytic_report,
    classical_bound_oracle,
    correlator_from_counts,
    inequality_closed_form,
    inequality_value,
    propagate_uncertainty,
    sampled_report,
    simulated_report,
    theta_sweep,
)
from .circuits import (  # noqa: E402
    SETTINGS,
    Circuit,
    MeasurementSetting,
    bell_singlet_circuit,
    export_qasm,
    fusion_stage,
    scenario_circuit,
    setting_stage,
    w_state_rotation_circuit,
    w_state_unitary_circuit,
)
from .sampling import CountsTable, RunConfig, execute, run_exact, run_fusion_demo, run_sampled  # noqa: E402
from .statevector import StateVector, apply_1q, apply_cnot, basis_state, fidelity_up_to_phase  # noqa: E402
