"""Forward, backward and alternating mirror descent on bilinear games, with energy and regret diagnostics."""

from .diagnostics import (
    BoundReport,
    DiagnosticsRow,
    bregman_commutator,
    diagnostics_rows,
    duality_gap_of_averages,
    energy,
    modified_energy,
    total_regret,
    verify_identities,
)
from .dynamics import Scheme, SchemeSpec, Trajectory, run
from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DomainError,
    MissingColumnError,
    SchemeMismatchError,
    SkewflowError,
    TrajectoryOverflowError,
    UnsupportedError,
)
from .game import BilinearGame, JointState, duality_gap, lift_state, make_game
from .mirror_maps import MapKind, MirrorMap, make_map

__version__ = "0.1.0"
