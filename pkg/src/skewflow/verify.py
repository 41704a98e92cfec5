"""Built-in verification matrix: every identity and bound across map kinds and schemes."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import BoundReport, bregman_commutator, sample_commutator_bound, verify_identities
from .dynamics import Scheme, SchemeSpec, Trajectory, run
from .game import PAYOFF_PRESETS, JointState, lift_state, make_game
from .mirror_maps import make_map

CORRUPTION = 1e-3


@dataclass(frozen=True)
class Case:
    label: str
    payoff: list
    kinds: tuple[str, str]
    scheme: Scheme
    eta: float
    steps: int
    dual0: tuple | None = None
    primal0: tuple | None = None


MATRIX = (
    Case("quad/alt", [[1.0]], ("euclidean", "euclidean"), Scheme.ALTERNATING, 0.1, 300, dual0=([3.0], [3.0])),
    Case("quad/alt-large", [[1.0]], ("euclidean", "euclidean"), Scheme.ALTERNATING, 1.1, 50, dual0=([3.0], [3.0])),
    Case("entropy/alt", [[2.0, 0.0], [0.0, 1.0]], ("entropy", "entropy"), Scheme.ALTERNATING, 0.1, 1000,
         primal0=([0.5, 0.5], [0.5, 0.5])),
    Case("pennies/alt", "matching_pennies", ("entropy", "entropy"), Scheme.ALTERNATING, 0.3, 500,
         primal0=([0.7, 0.3], [0.4, 0.6])),
    Case("logcosh/alt", [[1.0]], ("logcosh", "logcosh"), Scheme.ALTERNATING, 1.0, 500, dual0=([3.0], [3.0])),
    Case("cubic/alt", [[1.0]], ("cubic", "cubic"), Scheme.ALTERNATING, 0.1, 300, dual0=([3.0], [3.0])),
    Case("quadlogcosh/alt", [[1.0]], ("euclidean", "logcosh"), Scheme.ALTERNATING, 1.0, 500, dual0=([3.0], [3.0])),
    Case("quad/fwd", [[1.0]], ("euclidean", "euclidean"), Scheme.FORWARD, 0.1, 200, dual0=([3.0], [3.0])),
    Case("pennies/fwd", "matching_pennies", ("entropy", "entropy"), Scheme.FORWARD, 0.05, 500,
         primal0=([0.7, 0.3], [0.4, 0.6])),
    Case("quad/bwd", [[1.0]], ("euclidean", "euclidean"), Scheme.BACKWARD, 0.1, 200, dual0=([3.0], [3.0])),
    Case("pennies/bwd", "matching_pennies", ("entropy", "entropy"), Scheme.BACKWARD, 0.5, 200,
         primal0=([0.7, 0.3], [0.4, 0.6])),
    Case("logcosh/cts", [[1.0]], ("logcosh", "logcosh"), Scheme.CONTINUOUS, 1e-3, 5000, dual0=([3.0], [3.0])),
    Case("pennies/cts", "matching_pennies", ("entropy", "entropy"), Scheme.CONTINUOUS, 1e-3, 5000,
         primal0=([0.7, 0.3], [0.4, 0.6])),
)


def run_case(case: Case) -> Trajectory:
    A = np.array(PAYOFF_PRESETS.get(case.payoff) if isinstance(case.payoff, str) else case.payoff)
    m, n = A.shape
    game = make_game(A, make_map(case.kinds[0], dim=m), make_map(case.kinds[1], dim=n))
    if case.dual0 is not None:
        start = JointState.from_dual(game, *case.dual0)
    else:
        start = lift_state(game, *case.primal0)
    return run(game, SchemeSpec(case.scheme, case.eta), start, case.steps)


def corrupt(traj: Trajectory, step: int) -> Trajectory:
    """Copy of ``traj`` with the dual x at ``step`` nudged; a negative control for the checks."""
    step = min(max(step, 1), traj.steps)
    x = traj.x.copy()
    p = traj.p.copy()
    x[step] = x[step] + CORRUPTION
    p[step] = traj.game.map_p.dual_gradient(x[step])
    return replace(traj, x=x, p=p)


def _antisymmetry(kind: str, dim: int, seed: int = 0) -> BoundReport:
    mmap = make_map(kind, dim=dim)
    game = make_game(np.eye(dim), mmap, mmap)
    rng = np.random.default_rng(seed)
    a = rng.uniform(-5, 5, size=(1000, 2, dim))
    b = rng.uniform(-5, 5, size=(1000, 2, dim))
    fwd = bregman_commutator(game, (a[:, 0], a[:, 1]), (b[:, 0], b[:, 1]))
    bwd = bregman_commutator(game, (b[:, 0], b[:, 1]), (a[:, 0], a[:, 1]))
    return BoundReport("commutator_antisymmetry", 1e-12, float(np.max(np.abs(fwd + bwd))), f"{kind}")


def run_matrix(corrupt_step: int | None = None) -> list[BoundReport]:
    reports: list[BoundReport] = []
    for case in MATRIX:
        traj = run_case(case)
        if corrupt_step is not None and case.scheme is Scheme.ALTERNATING:
            traj = corrupt(traj, corrupt_step)
        reports += verify_identities(traj, context=case.label)
    for kind, dim in (("entropy", 2), ("logcosh", 1), ("cubic", 1), ("euclidean", 2)):
        reports.append(sample_commutator_bound(make_map(kind, dim=dim), context=kind))
        reports.append(_antisymmetry(kind, dim))
    return reports


def format_table(reports: list[BoundReport]) -> str:
    head = f"{'case':<16} {'check':<26} {'bound':>11} {'empirical':>11}  status"
    lines = [head, "-" * len(head)]
    for r in reports:
        status = "PASS" if r.satisfied else "FAIL"
        lines.append(
            f"{r.context:<16} {r.bound_name:<26} {r.bound_value:>11.3e} {r.empirical_value:>11.3e}  {status}"
        )
    n_fail = sum(not r.satisfied for r in reports)
    lines.append(f"{len(reports)} checks, {len(reports) - n_fail} passed, {n_fail} failed")
    return "\n".join(lines)
