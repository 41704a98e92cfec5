"""Bilinear game, paired primal/dual state, and duality gap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, UnsupportedError
from .mirror_maps import MirrorMap

POWER_TOL = 1e-12
POWER_MAX_ITERS = 10_000

PAYOFF_PRESETS = {
    "matching_pennies": [[1.0, -1.0], [-1.0, 1.0]],
    "identity2": [[1.0, 0.0], [0.0, 1.0]],
    "scalar1": [[1.0]],
}


def symmetric_spectrum(gram: np.ndarray, tol: float = POWER_TOL, max_iters: int = POWER_MAX_ITERS) -> np.ndarray:
    """All eigenvalues of a small symmetric PSD matrix, by power iteration with deflation.

    Each new iterate is kept orthogonal to the eigenvectors already found, so
    the full spectrum comes out regardless of the order in which pairs
    converge.  Start vectors are deterministic: the normalized all-ones
    vector, then the standard basis vectors in turn if a start has no
    component left after deflation.
    """
    gram = np.asarray(gram, dtype=float)
    n = gram.shape[0]
    scale = max(float(np.max(np.abs(gram))), 1.0) if gram.size else 1.0
    found_vecs: list[np.ndarray] = []
    values: list[float] = []
    candidates = [np.ones(n) / np.sqrt(n)] + [row for row in np.eye(n)]

    def deflate(v: np.ndarray) -> np.ndarray:
        for u in found_vecs:
            v = v - np.dot(u, v) * u
        return v

    while len(values) < n:
        v = None
        while candidates:
            trial = deflate(candidates.pop(0))
            norm = np.linalg.norm(trial)
            if norm > 1e-8:
                v = trial / norm
                break
        if v is None:
            raise ConvergenceError("ran out of start vectors during deflation")
        lam = float(v @ gram @ v)
        residual = np.inf
        for _ in range(max_iters):
            w = deflate(gram @ v)
            norm = np.linalg.norm(w)
            if norm <= tol * scale:
                # v sits in the null space of the deflated operator
                lam, residual = 0.0, norm
                break
            v = w / norm
            lam = float(v @ gram @ v)
            residual = float(np.linalg.norm(deflate(gram @ v) - lam * v))
            if residual <= tol * scale:
                break
        else:
            raise ConvergenceError(
                f"power iteration did not converge in {max_iters} iterations", residual=residual
            )
        found_vecs.append(v)
        values.append(lam)
    return np.sort(np.array(values))[::-1]


def singular_value_range(payoff: np.ndarray) -> tuple[float, float]:
    """(alpha_max, alpha_min) of the payoff matrix; alpha_min is 0 unless square and full rank."""
    payoff = np.asarray(payoff, dtype=float)
    m, n = payoff.shape
    spectrum = symmetric_spectrum(payoff.T @ payoff)
    top = max(float(spectrum[0]), 0.0)
    alpha_max = float(np.sqrt(top))
    if m != n:
        return alpha_max, 0.0
    low = float(spectrum[-1])
    if low <= 1e-12 * max(top, 1.0):
        return alpha_max, 0.0
    return alpha_max, float(np.sqrt(low))


@dataclass(frozen=True)
class BilinearGame:
    """min_p max_q p^T A q with mirror maps for both players.

    Build it with :func:`make_game`, which fills in the singular values.
    """

    payoff: np.ndarray
    map_p: MirrorMap
    map_q: MirrorMap
    alpha_max: float
    alpha_min: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.payoff.shape

    @property
    def bounded(self) -> bool:
        return self.map_p.bounded and self.map_q.bounded

    def energy_gradient(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        return self.map_p.dual_gradient(x), self.map_q.dual_gradient(y)

    def skew_field(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """-J grad H(z) = (-A grad g(y), A^T grad f(x))."""
        p, q = self.energy_gradient(x, y)
        return -(self.payoff @ q), self.payoff.T @ p

    def value(self, p, q) -> float:
        return float(np.asarray(p) @ self.payoff @ np.asarray(q))


def make_game(payoff, map_p: MirrorMap, map_q: MirrorMap) -> BilinearGame:
    if isinstance(payoff, str):
        try:
            payoff = PAYOFF_PRESETS[payoff]
        except KeyError:
            raise DimensionError(f"unknown payoff preset {payoff!r}") from None
    A = np.array(payoff, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise DimensionError(f"payoff must be a matrix, got shape {A.shape}")
    m, n = A.shape
    if map_p.dim != m or map_q.dim != n:
        raise DimensionError(
            f"payoff is {m}x{n} but mirror maps have dimensions {map_p.dim} and {map_q.dim}"
        )
    if not np.all(np.isfinite(A)):
        raise DimensionError("payoff has non-finite entries")
    A.setflags(write=False)
    alpha_max, alpha_min = singular_value_range(A)
    return BilinearGame(A, map_p, map_q, alpha_max, alpha_min)


def duality_gap(game: BilinearGame, p, q) -> float:
    """max_{q'} p^T A q' - min_{p'} p'^T A q over the (bounded) strategy sets.

    A linear function over a polytope peaks at a vertex, so enumerating
    vertices is exact.  For simplices this is max(A^T p) - min(A q).
    """
    vp, vq = game.map_p.vertices(), game.map_q.vertices()
    if vp is None or vq is None:
        raise UnsupportedError("duality gap needs bounded strategy sets on both sides")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    best_response = np.max(vq @ (game.payoff.T @ p))
    best_reply = np.min(vp @ (game.payoff @ q))
    return float(best_response - best_reply)


@dataclass(frozen=True)
class JointState:
    """Primal point (p, q) together with its dual coordinates (x, y)."""

    p: np.ndarray
    q: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_dual(cls, game: BilinearGame, x, y) -> "JointState":
        x = np.array(x, dtype=float, ndmin=1)
        y = np.array(y, dtype=float, ndmin=1)
        if x.shape != (game.map_p.dim,) or y.shape != (game.map_q.dim,):
            raise DimensionError(
                f"dual point shapes {x.shape}, {y.shape} do not match game {game.shape}"
            )
        return cls(game.map_p.dual_gradient(x), game.map_q.dual_gradient(y), x, y)


def lift_state(game: BilinearGame, p, q) -> JointState:
    """Dual coordinates x = grad phi(p), y = grad psi(q) for an interior primal pair."""
    x = game.map_p.primal_gradient(np.array(p, dtype=float, ndmin=1))
    y = game.map_q.primal_gradient(np.array(q, dtype=float, ndmin=1))
    return JointState.from_dual(game, x, y)
