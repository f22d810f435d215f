"""netspectra: Laplacian spectral properties of hidden interaction networks,
inferred from sparse time-series measurements of coupled dynamics.

The toolchain: simulate (or import) trajectories of a networked dynamical
system, observe a few coordinates, extract continuous-time eigenvalues by
dynamic mode decomposition of shift-stacked snapshots, then either invert
each eigenvalue back to a Laplacian eigenvalue exactly (small networks) or
estimate the first two Laplacian spectral moments from eigenvalue clusters
(large networks). See :mod:`netspectra.pipeline` for the one-call entry
points.
"""

from .datasets import demo_graph, karate_cut_graph, karate_graph
from .distributions import Distribution, parse_distribution
from .dmd import DmdError, DmdResult, OutlierPolicy, dmd, filter_outliers, reconstruct
from .dynamics import (
    EquilibriumError,
    HeterogeneityModel,
    LinearUnit,
    NetworkSystem,
    NonlinearUnit,
    SimulationError,
    Trajectory,
    build_K,
    catalog,
    catalog_names,
    find_equilibrium,
    linearize,
    make_system,
    simulate,
    simulate_ensemble,
)
from .graphs import (
    DegreeStats,
    GraphGenerationError,
    MomentDegreeBounds,
    SpectralMomentSet,
    WeightedDigraph,
    add_pendant_vertex,
    degree_bounds_from_spectrum,
    degree_stats,
    degree_stats_from_moments,
    exact_spectral_moments,
    gen_degree_sequence,
    gen_erdos_renyi,
    laplacian,
    load_edge_list,
    orient_random,
    unweight,
    weight_matrix,
    write_edge_list,
)
from .inversion import (
    RecoveredSpectrum,
    ResolventError,
    check_ctrb_obsv,
    g_map,
    recover_spectrum,
    sensitivity,
)
from .moments import (
    EigenvalueCluster,
    MomentEstimates,
    cluster_eigenvalues,
    hull_area_moments,
    laplacian_moment_recursion,
    laplacian_moments_hetero,
    laplacian_moments_hetero_unknown_A,
    laplacian_moments_identical,
    laplacian_moments_two_population,
    matrix_moments,
    moments_of_K,
    unweighted_moments,
)
from .observation import (
    DataMatrix,
    ObservationFunction,
    SnapshotSet,
    build_data_matrix,
    check_mode_nonvanishing,
    observe,
    obs_identity,
    obs_select,
    obs_sin_pair,
)
from .pipeline import (
    ExperimentConfig,
    IdentificationReport,
    MonteCarloResult,
    PipelineError,
    compare_spectra,
    monte_carlo,
    preset,
    preset_names,
    run_identification,
)

__version__ = "0.1.0"
