"""Discretizations of the skew-gradient flow  dz/dt = -J grad H(z).

With z = (x, y) and H(x, y) = f(x) + g(y) the flow reads

    dx/dt = -A grad g(y),    dy/dt = A^T grad f(x).

All steps work on dual coordinates and refresh the primal pair through the
dual gradients, so p = grad f(x) and q = grad g(y) hold exactly on every
returned :class:`~skewflow.game.JointState`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import ConvergenceError, SkewflowError, TrajectoryOverflowError
from .game import BilinearGame, JointState

OVERFLOW_LIMIT = 1e150


class Scheme(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    ALTERNATING = "alternating"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class SchemeSpec:
    """Which discretization to run and with what step.

    For ``Scheme.CONTINUOUS`` the step is the fixed RK4 step h.
    """

    scheme: Scheme
    eta: float
    backward_tol: float = 1e-12
    backward_max_iters: int = 500

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.eta > 0:
            raise ValueError(f"step size must be positive, got {self.eta}")
        if not self.backward_tol > 0:
            raise ValueError("backward_tol must be positive")
        if self.backward_max_iters < 1:
            raise ValueError("backward_max_iters must be at least 1")


def step_alternating(game: BilinearGame, state: JointState, eta: float) -> JointState:
    """x' = x - eta A grad g(y);  y' = y + eta A^T grad f(x')."""
    A = game.payoff
    x = state.x - eta * (A @ state.q)
    p = game.map_p.dual_gradient(x)
    y = state.y + eta * (A.T @ p)
    return JointState(p, game.map_q.dual_gradient(y), x, y)


def step_forward(game: BilinearGame, state: JointState, eta: float) -> JointState:
    """Simultaneous explicit update from the old state."""
    A = game.payoff
    x = state.x - eta * (A @ state.q)
    y = state.y + eta * (A.T @ state.p)
    return JointState.from_dual(game, x, y)


def implicit_step(
    game: BilinearGame,
    state: JointState,
    eta: float,
    tol: float = 1e-12,
    max_iters: int = 500,
) -> JointState:
    """Solve z' = z - eta J grad H(z') by Picard iteration seeded with a forward step.

    ``eta`` may be negative, which inverts a forward step of size ``-eta``.
    The stopping test is ``|z^(j+1) - z^(j)|_inf <= tol * max(1, |z|_inf)``.
    """
    A = game.payoff
    x0, y0 = state.x, state.y
    scale = max(1.0, float(np.max(np.abs(x0))), float(np.max(np.abs(y0))))
    x = x0 - eta * (A @ state.q)
    y = y0 + eta * (A.T @ state.p)
    diff = np.inf
    for _ in range(max_iters):
        p, q = game.energy_gradient(x, y)
        x_next = x0 - eta * (A @ q)
        y_next = y0 + eta * (A.T @ p)
        diff = max(float(np.max(np.abs(x_next - x))), float(np.max(np.abs(y_next - y))))
        x, y = x_next, y_next
        if diff <= tol * scale:
            return JointState.from_dual(game, x, y)
    raise ConvergenceError(
        f"backward step did not converge in {max_iters} iterations (last change {diff:.3e})",
        residual=diff,
    )


def step_backward(game: BilinearGame, state: JointState, spec: SchemeSpec) -> JointState:
    return implicit_step(game, state, spec.eta, spec.backward_tol, spec.backward_max_iters)


def implicit_residual(game: BilinearGame, before: JointState, after: JointState, eta: float) -> float:
    """|z' - z + eta J grad H(z')|_inf for a claimed backward step."""
    A = game.payoff
    rx = after.x - before.x + eta * (A @ after.q)
    ry = after.y - before.y - eta * (A.T @ after.p)
    return max(float(np.max(np.abs(rx))), float(np.max(np.abs(ry))))


def step_continuous_ref(game: BilinearGame, state: JointState, h: float) -> JointState:
    """One classical RK4 step of the skew-gradient flow."""
    x, y = state.x, state.y
    k1x, k1y = game.skew_field(x, y)
    k2x, k2y = game.skew_field(x + 0.5 * h * k1x, y + 0.5 * h * k1y)
    k3x, k3y = game.skew_field(x + 0.5 * h * k2x, y + 0.5 * h * k2y)
    k4x, k4y = game.skew_field(x + h * k3x, y + h * k3y)
    x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    y = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    return JointState.from_dual(game, x, y)


@dataclass
class Trajectory:
    """States z_0..z_K of one run, stored as stacked arrays (row k is step k)."""

    game: BilinearGame
    spec: SchemeSpec
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    q: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def scheme(self) -> Scheme:
        return self.spec.scheme

    @property
    def eta(self) -> float:
        return self.spec.eta

    @property
    def steps(self) -> int:
        return self.x.shape[0] - 1

    def __len__(self) -> int:
        return self.x.shape[0]

    def state(self, k: int) -> JointState:
        return JointState(self.p[k], self.q[k], self.x[k], self.y[k])

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.spec.eta


def _stepper(game: BilinearGame, spec: SchemeSpec) -> Callable[[JointState], JointState]:
    if spec.scheme is Scheme.ALTERNATING:
        return lambda s: step_alternating(game, s, spec.eta)
    if spec.scheme is Scheme.FORWARD:
        return lambda s: step_forward(game, s, spec.eta)
    if spec.scheme is Scheme.BACKWARD:
        return lambda s: step_backward(game, s, spec)
    return lambda s: step_continuous_ref(game, s, spec.eta)


def run(
    game: BilinearGame,
    spec: SchemeSpec,
    initial: JointState,
    steps: int,
    callback: Callable[[int, JointState], None] | None = None,
) -> Trajectory:
    """Iterate the chosen scheme ``steps`` times from ``initial``.

    ``callback(k, state)`` is invoked for every recorded state, k = 0..steps.
    Errors raised by a step carry the index of the step being computed.
    """
    if steps < 0 or int(steps) != steps:
        raise ValueError(f"steps must be a nonnegative integer, got {steps!r}")
    steps = int(steps)
    m, n = game.shape
    xs = np.empty((steps + 1, m))
    ys = np.empty((steps + 1, n))
    ps = np.empty((steps + 1, m))
    qs = np.empty((steps + 1, n))
    advance = _stepper(game, spec)

    state = initial
    for k in range(steps + 1):
        if k > 0:
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    state = advance(state)
            except SkewflowError as exc:
                exc.step = k
                raise
            except FloatingPointError as exc:
                raise TrajectoryOverflowError(f"floating point failure: {exc}", step=k) from exc
            bad = (
                not np.all(np.isfinite(state.x))
                or not np.all(np.isfinite(state.y))
                or np.max(np.abs(state.x)) > OVERFLOW_LIMIT
                or np.max(np.abs(state.y)) > OVERFLOW_LIMIT
            )
            if bad:
                raise TrajectoryOverflowError("dual iterate exceeded 1e150", step=k)
        xs[k], ys[k], ps[k], qs[k] = state.x, state.y, state.p, state.q
        if callback is not None:
            callback(k, state)
    return Trajectory(game, spec, xs, ys, ps, qs)
