"""Eigenvalue counting bounds for periodically driven lattice operators.

The package splits into five layers:

* :mod:`quasiband.lattice`   periodic graphs, fiber matrices, band structure;
* :mod:`quasiband.finitevol` finite truncations and inertia-based counting;
* :mod:`quasiband.floquet`   time-periodic drives and the quasi-energy ladder;
* :mod:`quasiband.bounds`    counting bounds with checked preconditions;
* :mod:`quasiband.harness`   config-driven experiment pipelines (CLI in
  :mod:`quasiband.cli`).
"""

from .errors import (
    ConfigError,
    EigensolveError,
    FactorizationError,
    QuasibandError,
)
from .lattice import (
    BandStructure,
    PeriodicGraph,
    TopRegularityReport,
    band_structure,
    build_honeycomb,
    build_hypercubic,
    fiber_matrix,
    graph_from_dict,
    graph_to_dict,
    load_graph,
    save_graph,
    top_regularity_diagnostic,
)
from .windows import SpectralFrame, SpectralWindow, as_window
from .finitevol import (
    SymmetricOperator,
    TruncationSpec,
    TruncationWarning,
    assemble_static,
    box_sites,
    count_above,
    count_below,
    count_in,
    export_matrix,
    normalize_site_key,
    nu_minus,
    nu_plus,
)
from .floquet import (
    Envelopes,
    ModeSupportReport,
    PeriodicityReport,
    QuasiCountResult,
    QuasiEnergyMatrix,
    TimePeriodicPotential,
    assemble_quasienergy,
    cosine_potential,
    eigenpairs_in_window,
    fold_modulo,
    in_cone,
    in_cuboid,
    in_half_space,
    load_potential,
    mode_support_check,
    periodicity_check,
    potential_from_dict,
    potential_to_dict,
    quasi_count,
    sample_envelopes,
    save_potential,
)
from .bounds import (
    BoundResult,
    EffectivePotentials,
    PreconditionCheck,
    bargmann_norm,
    bound_1d,
    bound_T1,
    bound_T2,
    bound_T3,
    effective_potentials,
    lp_power_norm,
    sup_norm,
)
from .harness import (
    ExperimentConfig,
    config_from_dict,
    dumps_canonical,
    load_config,
    report_signature,
    resolve_graph,
    resolve_potential,
    run_bands,
    run_bargmann,
    run_calibrate,
    run_instance,
    run_sweep,
    run_verify,
    write_report_csv,
    write_report_json,
)

__version__ = "0.1.0"

__all__ = [
    "BandStructure",
    "BoundResult",
    "ConfigError",
    "EffectivePotentials",
    "EigensolveError",
    "Envelopes",
    "ExperimentConfig",
    "FactorizationError",
    "ModeSupportReport",
    "PeriodicGraph",
    "PeriodicityReport",
    "PreconditionCheck",
    "QuasiCountResult",
    "QuasiEnergyMatrix",
    "QuasibandError",
    "SpectralFrame",
    "SpectralWindow",
    "SymmetricOperator",
    "TimePeriodicPotential",
    "TopRegularityReport",
    "TruncationSpec",
    "TruncationWarning",
    "as_window",
    "assemble_quasienergy",
    "assemble_static",
    "band_structure",
    "bargmann_norm",
    "bound_1d",
    "bound_T1",
    "bound_T2",
    "bound_T3",
    "box_sites",
    "build_honeycomb",
    "build_hypercubic",
    "config_from_dict",
    "cosine_potential",
    "count_above",
    "count_below",
    "count_in",
    "dumps_canonical",
    "effective_potentials",
    "eigenpairs_in_window",
    "export_matrix",
    "fiber_matrix",
    "fold_modulo",
    "graph_from_dict",
    "graph_to_dict",
    "in_cone",
    "in_cuboid",
    "in_half_space",
    "load_config",
    "load_graph",
    "load_potential",
    "lp_power_norm",
    "mode_support_check",
    "normalize_site_key",
    "nu_minus",
    "nu_plus",
    "periodicity_check",
    "potential_from_dict",
    "potential_to_dict",
    "quasi_count",
    "report_signature",
    "resolve_graph",
    "resolve_potential",
    "run_bands",
    "run_bargmann",
    "run_calibrate",
    "run_instance",
    "run_sweep",
    "run_verify",
    "sample_envelopes",
    "save_graph",
    "save_potential",
    "sup_norm",
    "top_regularity_diagnostic",
    "write_report_csv",
    "write_report_json",
]
