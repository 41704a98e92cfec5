"""Energy, modified energy, Bregman commutator, regret and duality-gap diagnostics.

Everything here is a pure function of a game or a finished
:class:`~skewflow.dynamics.Trajectory`.  The per-step table is computed
column-wise with numpy so that long runs stay cheap.

Regret bookkeeping
------------------
For every scheme the cumulative regret against a fixed reference (p, q) is
affine in the reference::

    R_1(p) = c1 - <p, g1>        R_2(q) = <q, g2> - c2

so one pass over the trajectory yields the four running sums (c1, g1, g2, c2)
and any reference, or the best vertex reference, is evaluated from them.
The index conventions differ per scheme:

* alternating: the mover's own iterate enters as the midpoint
  (p_k + p_{k+1})/2 against q_k, and q's regret is taken against p_{k+1};
* forward: both players use step k;
* backward: both players use step k+1;
* continuous: trapezoidal quadrature on the RK4 grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Scheme, Trajectory, implicit_residual
from .errors import SchemeMismatchError, UnsupportedError
from .game import BilinearGame, duality_gap
from .mirror_maps import MapKind, MirrorMap

IDENTITY_TOL = 1e-9
REGRET_REL_TOL = 1e-8
MONOTONE_TOL = 1e-12
QUADRATURE_SLACK = 1e-4


@dataclass(frozen=True)
class DiagnosticsRow:
    step: int
    energy: float
    modified_energy: float
    commutator_step: float
    regret1: float
    regret2: float
    total_regret: float
    duality_gap_avg: float | None


@dataclass(frozen=True)
class BoundReport:
    """One checked inequality or identity.

    ``satisfied`` is derived: empirical <= bound * (1 + 1e-9) + 1e-9.
    """

    bound_name: str
    bound_value: float
    empirical_value: float
    context: str = ""
    note: str = ""
    satisfied: bool = field(init=False)

    def __post_init__(self):
        ok = bool(self.empirical_value <= self.bound_value * (1 + 1e-9) + 1e-9)
        object.__setattr__(self, "satisfied", ok)


# energies ---------------------------------------------------------------


def energy(game: BilinearGame, x, y):
    """H(x, y) = f(x) + g(y); rows of x and y are evaluated independently."""
    return game.map_p.dual_value(x) + game.map_q.dual_value(y)


def modified_energy(game: BilinearGame, x, y, eta: float):
    """H(z) - (eta / 2) <grad f(x), A grad g(y)>."""
    p = game.map_p.dual_gradient(x)
    q = game.map_q.dual_gradient(y)
    coupling = np.sum(p * (q @ game.payoff.T), axis=-1)
    return energy(game, x, y) - 0.5 * eta * coupling


def map_commutator(mmap: MirrorMap, x_new, x_old):
    """C_f(x', x) = f(x') - f(x) - <grad f(x') + grad f(x), x' - x> / 2."""
    x_new = np.asarray(x_new, dtype=float)
    x_old = np.asarray(x_old, dtype=float)
    g_sum = mmap.dual_gradient(x_new) + mmap.dual_gradient(x_old)
    return mmap.dual_value(x_new) - mmap.dual_value(x_old) - 0.5 * np.sum(g_sum * (x_new - x_old), axis=-1)


def bregman_commutator(game: BilinearGame, z_new, z_old):
    """C_H for the separable energy: C_f(x', x) + C_g(y', y).  ``z`` is an (x, y) pair."""
    (x1, y1), (x0, y0) = z_new, z_old
    return map_commutator(game.map_p, x1, x0) + map_commutator(game.map_q, y1, y0)


def energy_bregman(game: BilinearGame, z, z_ref):
    """D_H(z, z_ref) = D_f(x, x_ref) + D_g(y, y_ref)."""
    (x, y), (xr, yr) = z, z_ref
    return game.map_p.bregman_dual(x, xr) + game.map_q.bregman_dual(y, yr)


def reference_divergence(game: BilinearGame, x, y, ref_p, ref_q):
    """D_H(z, z_hat) where z_hat is the dual image of the primal reference (ref_p, ref_q).

    Evaluated through the Fenchel-Young gap so vertex references stay finite.
    """
    return game.map_p.fenchel_gap(x, ref_p) + game.map_q.fenchel_gap(y, ref_q)


# constants ----------------------------------------------------------------


def third_order_constant_logsumexp(dim: int) -> float:
    """Third-order smoothness of log-sum-exp w.r.t. the l_inf norm."""
    if dim < 2:
        raise ValueError("log-sum-exp needs at least two coordinates")
    return 8.0


def certified_constants(game: BilinearGame) -> dict[str, float | None]:
    """Analytic constants of H = f + g, or None where a block is unbounded.

    ``L1``/``L3`` are w.r.t. the l_inf norm (gradient measured in l1);
    ``L1_l2``/``L2_l2`` are w.r.t. the Euclidean norm.
    """
    a, b = game.map_p, game.map_q

    def both(u, v, combine):
        return None if u is None or v is None else combine(u, v)

    return {
        "L1": both(a.lipschitz, b.lipschitz, lambda u, v: u + v),
        "L3": both(a.third_order, b.third_order, lambda u, v: u + v),
        "L1_l2": both(a.lipschitz_l2, b.lipschitz_l2, math.hypot),
        "L2_l2": both(a.smoothness_l2, b.smoothness_l2, max),
    }


def domain_radius(game: BilinearGame, p0, q0) -> float | None:
    """Largest D_phi(vertex, p0) / D_psi(vertex, q0); maps with a configured bound use it."""
    radii = []
    for mmap, start in ((game.map_p, p0), (game.map_q, q0)):
        r = mmap.domain_bound if mmap.domain_bound is not None else mmap.default_domain_bound(start)
        if r is None:
            return None
        radii.append(r)
    return max(radii)


def regret_smooth_constant(game: BilinearGame, p0, q0) -> float | None:
    """Single constant M bounding both divergences and primal norms (l_inf)."""
    radius = domain_radius(game, p0, q0)
    if radius is None:
        return None
    norm_radius = max(
        float(np.max(np.abs(game.map_p.vertices()))), float(np.max(np.abs(game.map_q.vertices())))
    )
    return max(radius, norm_radius)


def bound_alt_smooth(game: BilinearGame, eta: float, k: int, L1: float, L3: float) -> float:
    """|H_eta(z_k) - H_eta(z_0)| <= alpha^3 L3 L1^3 eta^3 k / 12."""
    return game.alpha_max**3 * L3 * L1**3 * eta**3 * k / 12.0


def bound_regret_smooth(M: float, alpha_max: float, eta: float, K: int) -> float:
    """Total regret bound for alternating play: 2M/eta + (4/3) alpha^3 M^4 eta^2 K."""
    return 2.0 * M / eta + 4.0 * alpha_max**3 * M**4 * eta**2 * K / 3.0


def optimal_alternating_scale(M: float, alpha_max: float) -> float:
    """c minimizing the regret bound over eta = c K^(-1/3)."""
    return (3.0 * M / (4.0 * alpha_max**3 * M**4)) ** (1.0 / 3.0)


def bound_forward_regret(M: float, alpha_max: float, L1: float, L2: float, eta: float, K: int) -> float:
    return 0.5 * eta * alpha_max**2 * L1**2 * L2 * K + 2.0 * M / eta


def bound_backward_regret(M: float, eta: float) -> float:
    return 2.0 * M / eta


def bound_continuous_regret(M: float) -> float:
    return 2.0 * M


# regret ledgers -------------------------------------------------------------


@dataclass(frozen=True)
class RegretLedger:
    """Running sums; row k describes the first k steps (row 0 is all zeros)."""

    c1: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    c2: np.ndarray

    def at(self, k: int, ref_p, ref_q) -> tuple[float, float]:
        r1 = self.c1[k] - float(np.dot(ref_p, self.g1[k]))
        r2 = float(np.dot(ref_q, self.g2[k])) - self.c2[k]
        return float(r1), float(r2)


def _running(values: np.ndarray) -> np.ndarray:
    out = np.zeros((values.shape[0] + 1,) + values.shape[1:])
    np.cumsum(values, axis=0, out=out[1:])
    return out


def regret_ledger(traj: Trajectory) -> RegretLedger:
    A = traj.game.payoff
    p, q = traj.p, traj.q
    Aq = q @ A.T  # row k: A q_k
    Atp = p @ A  # row k: A^T p_k
    scheme = traj.scheme
    if scheme is Scheme.ALTERNATING:
        mid_p = 0.5 * (p[:-1] + p[1:])
        mid_q = 0.5 * (q[:-1] + q[1:])
        c1 = np.sum(mid_p * Aq[:-1], axis=1)
        g1 = Aq[:-1]
        g2 = Atp[1:]
        c2 = np.sum(Atp[1:] * mid_q, axis=1)
    elif scheme in (Scheme.FORWARD, Scheme.BACKWARD):
        sl = slice(None, -1) if scheme is Scheme.FORWARD else slice(1, None)
        play = np.sum(p[sl] * Aq[sl], axis=1)
        c1, g1, g2, c2 = play, Aq[sl], Atp[sl], play
    else:
        h = traj.eta
        play = np.sum(p * Aq, axis=1)

        def trap(v):
            return 0.5 * h * (v[:-1] + v[1:])

        c1, g1, g2, c2 = trap(play), trap(Aq), trap(Atp), trap(play)
    return RegretLedger(_running(c1), _running(g1), _running(g2), _running(c2))


def _require(traj: Trajectory, scheme: Scheme) -> None:
    if traj.scheme is not scheme:
        raise SchemeMismatchError(
            f"trajectory was produced by the {traj.scheme.value} scheme, not {scheme.value}"
        )


def cumulative_regret(traj: Trajectory, ref_p, ref_q) -> tuple[float, float]:
    """(R_1, R_2) after the whole run against a fixed reference, using the run's own scheme."""
    return regret_ledger(traj).at(traj.steps, np.atleast_1d(ref_p), np.atleast_1d(ref_q))


def regret_alternating(traj: Trajectory, ref_p, ref_q) -> tuple[float, float]:
    _require(traj, Scheme.ALTERNATING)
    return cumulative_regret(traj, ref_p, ref_q)


def regret_forward(traj: Trajectory, ref_p, ref_q) -> tuple[float, float]:
    _require(traj, Scheme.FORWARD)
    return cumulative_regret(traj, ref_p, ref_q)


def regret_backward(traj: Trajectory, ref_p, ref_q) -> tuple[float, float]:
    _require(traj, Scheme.BACKWARD)
    return cumulative_regret(traj, ref_p, ref_q)


def regret_continuous(traj: Trajectory, ref_p, ref_q) -> tuple[float, float]:
    _require(traj, Scheme.CONTINUOUS)
    return cumulative_regret(traj, ref_p, ref_q)


def _best_regrets(game: BilinearGame, ledger: RegretLedger) -> tuple[np.ndarray, np.ndarray]:
    # Max over the vertices of each bounded player; the origin (the
    # unconstrained equilibrium) for an unbounded player.
    vp, vq = game.map_p.vertices(), game.map_q.vertices()
    r1 = ledger.c1 - (np.min(ledger.g1 @ vp.T, axis=1) if vp is not None else 0.0)
    r2 = (np.max(ledger.g2 @ vq.T, axis=1) if vq is not None else 0.0) - ledger.c2
    return r1, r2


def total_regret(traj: Trajectory) -> float:
    """max over (p, q) of R_K(p, q); exact by vertex enumeration."""
    if not traj.game.bounded:
        raise UnsupportedError("total regret needs bounded strategy sets on both sides")
    r1, r2 = _best_regrets(traj.game, regret_ledger(traj))
    return float(r1[-1] + r2[-1])


def average_strategies(traj: Trajectory, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Scheme-appropriate averages of the first k steps (default: the whole run)."""
    k = traj.steps if k is None else k
    if k < 1:
        raise ValueError("averages need at least one step")
    p, q = traj.p, traj.q
    scheme = traj.scheme
    if scheme is Scheme.ALTERNATING:
        return p[1 : k + 1].mean(axis=0), q[:k].mean(axis=0)
    if scheme is Scheme.FORWARD:
        return p[:k].mean(axis=0), q[:k].mean(axis=0)
    if scheme is Scheme.BACKWARD:
        return p[1 : k + 1].mean(axis=0), q[1 : k + 1].mean(axis=0)
    w = np.full(k + 1, 1.0)
    w[0] = w[-1] = 0.5
    w /= w.sum()
    return w @ p[: k + 1], w @ q[: k + 1]


def duality_gap_of_averages(traj: Trajectory) -> float:
    if not traj.game.bounded:
        raise UnsupportedError("duality gap needs bounded strategy sets on both sides")
    p_bar, q_bar = average_strategies(traj)
    return duality_gap(traj.game, p_bar, q_bar)


def _running_gap(traj: Trajectory) -> np.ndarray:
    """dg of the averages after k steps, for every k (NaN at k = 0)."""
    game = traj.game
    K = traj.steps
    out = np.full(K + 1, np.nan)
    if K == 0:
        return out
    scheme = traj.scheme
    p, q = traj.p, traj.q
    ks = np.arange(1, K + 1)[:, None]
    if scheme is Scheme.ALTERNATING:
        p_bar = np.cumsum(p[1:], axis=0) / ks
        q_bar = np.cumsum(q[:-1], axis=0) / ks
    elif scheme is Scheme.FORWARD:
        p_bar = np.cumsum(p[:-1], axis=0) / ks
        q_bar = np.cumsum(q[:-1], axis=0) / ks
    elif scheme is Scheme.BACKWARD:
        p_bar = np.cumsum(p[1:], axis=0) / ks
        q_bar = np.cumsum(q[1:], axis=0) / ks
    else:
        trap_p = np.cumsum(0.5 * (p[:-1] + p[1:]), axis=0)
        trap_q = np.cumsum(0.5 * (q[:-1] + q[1:]), axis=0)
        p_bar, q_bar = trap_p / ks, trap_q / ks
    vp, vq = game.map_p.vertices(), game.map_q.vertices()
    A = game.payoff
    out[1:] = np.max((p_bar @ A) @ vq.T, axis=1) - np.min((q_bar @ A.T) @ vp.T, axis=1)
    return out


def diagnostics_table(traj: Trajectory) -> dict[str, np.ndarray]:
    """Column arrays for every step; see :class:`DiagnosticsRow` for the meaning."""
    game = traj.game
    H = np.atleast_1d(energy(game, traj.x, traj.y))
    H_mod = np.atleast_1d(modified_energy(game, traj.x, traj.y, traj.eta))
    comm = np.zeros(len(traj))
    if traj.steps > 0:
        comm[1:] = bregman_commutator(game, (traj.x[1:], traj.y[1:]), (traj.x[:-1], traj.y[:-1]))
    r1, r2 = _best_regrets(game, regret_ledger(traj))
    r1 = np.broadcast_to(r1, (len(traj),))
    r2 = np.broadcast_to(r2, (len(traj),))
    gap = _running_gap(traj) if game.bounded else np.full(len(traj), np.nan)
    return {
        "step": np.arange(len(traj)),
        "energy": H,
        "modified_energy": H_mod,
        "commutator": comm,
        "regret1": r1,
        "regret2": r2,
        "total_regret": r1 + r2,
        "duality_gap_avg": gap,
    }


def diagnostics_rows(traj: Trajectory):
    """Yield one :class:`DiagnosticsRow` per recorded step."""
    t = diagnostics_table(traj)
    for k in range(len(traj)):
        gap = t["duality_gap_avg"][k]
        yield DiagnosticsRow(
            step=k,
            energy=float(t["energy"][k]),
            modified_energy=float(t["modified_energy"][k]),
            commutator_step=float(t["commutator"][k]),
            regret1=float(t["regret1"][k]),
            regret2=float(t["regret2"][k]),
            total_regret=float(t["total_regret"][k]),
            duality_gap_avg=None if math.isnan(gap) else float(gap),
        )


# identity and bound checks ------------------------------------------------------


def _is_quadratic(game: BilinearGame) -> bool:
    return game.map_p.kind is MapKind.EUCLIDEAN and game.map_q.kind is MapKind.EUCLIDEAN


def reference_set(game: BilinearGame) -> list[tuple[np.ndarray, np.ndarray]]:
    """Vertex pairs for bounded players, the origin for unbounded ones."""
    vp = game.map_p.vertices()
    vq = game.map_q.vertices()
    ps = list(vp) if vp is not None else [np.zeros(game.map_p.dim)]
    qs = list(vq) if vq is not None else [np.zeros(game.map_q.dim)]
    return [(a, b) for a in ps for b in qs]


def regret_energy_gap(traj: Trajectory, ref_p, ref_q) -> tuple[float, float]:
    """(direct R_K(p, q), value predicted from the modified-energy identity) for an alternating run."""
    _require(traj, Scheme.ALTERNATING)
    game, eta, K = traj.game, traj.eta, traj.steps
    r1, r2 = regret_alternating(traj, ref_p, ref_q)
    d0 = reference_divergence(game, traj.x[0], traj.y[0], ref_p, ref_q)
    dK = reference_divergence(game, traj.x[K], traj.y[K], ref_p, ref_q)
    h0 = modified_energy(game, traj.x[0], traj.y[0], eta)
    hK = modified_energy(game, traj.x[K], traj.y[K], eta)
    return r1 + r2, float((d0 - dK + hK - h0) / eta)


def _energy_scale(H: np.ndarray) -> float:
    return max(1.0, abs(float(H[0])))


def _initial_primal(traj: Trajectory):
    return traj.p[0], traj.q[0]


def verify_identities(traj: Trajectory, context: str = "") -> list[BoundReport]:
    """Check every identity and bound that applies to this run.

    Failures are reported, never raised.
    """
    game, eta, K = traj.game, traj.eta, traj.steps
    table = diagnostics_table(traj)
    H, H_mod = table["energy"], table["modified_energy"]
    scale = _energy_scale(H)
    consts = certified_constants(game)
    reports: list[BoundReport] = []

    def add(name, bound, empirical, note=""):
        reports.append(BoundReport(name, float(bound), float(empirical), context, note))

    M = domain_radius(game, *_initial_primal(traj)) if game.bounded else None
    scheme = traj.scheme

    if scheme is Scheme.ALTERNATING:
        drift = np.diff(H_mod) - table["commutator"][1:]
        add("lemma_alt", IDENTITY_TOL * scale, np.max(np.abs(drift), initial=0.0))
        if _is_quadratic(game):
            add(
                "quadratic_energy",
                IDENTITY_TOL * scale,
                np.max(np.abs(H_mod - H_mod[0])),
            )
        worst = 0.0
        for ref_p, ref_q in reference_set(game):
            direct, predicted = regret_energy_gap(traj, ref_p, ref_q)
            worst = max(worst, abs(direct - predicted) / max(1.0, abs(direct)))
        add("regret_energy", REGRET_REL_TOL, worst, "relative")
        if game.bounded and K >= 1:
            lhs = duality_gap_of_averages(traj)
            rhs = total_regret(traj) / K - (
                game.value(traj.p[0], traj.q[0]) - game.value(traj.p[K], traj.q[K])
            ) / (2 * K)
            add("regret_duality_gap", IDENTITY_TOL, abs(lhs - rhs))
        if consts["L1"] is not None and consts["L3"] is not None and K >= 1:
            rate = bound_alt_smooth(game, eta, 1, consts["L1"], consts["L3"])
            ks = np.arange(1, K + 1)
            add(
                "alt_smooth_bound",
                rate,
                np.max(np.abs(H_mod[1:] - H_mod[0]) / ks),
                f"per-step rate, L1={consts['L1']:g}, L3={consts['L3']:g}",
            )
    elif scheme is Scheme.FORWARD:
        decrease = np.max(H[:-1] - H[1:], initial=-np.inf) if K else 0.0
        tol = MONOTONE_TOL * max(1.0, float(np.max(np.abs(H))))
        add("forward_monotone", tol, max(decrease, 0.0))
        if _is_quadratic(game) and K:
            ratio = H[1:] / H[:-1]
            lo = 1 + eta**2 * game.alpha_min**2
            hi = 1 + eta**2 * game.alpha_max**2
            excess = max(float(np.max(ratio - hi)), float(np.max(lo - ratio)), 0.0)
            add("forward_quadratic_growth", MONOTONE_TOL, excess)
        if game.bounded and K:
            RK = total_regret(traj)
            add("fwd_regret_dg", IDENTITY_TOL, abs(duality_gap_of_averages(traj) - RK / K))
            if consts["L1_l2"] is not None:
                bound = bound_forward_regret(M, game.alpha_max, consts["L1_l2"], consts["L2_l2"], eta, K)
                add("fwd_total_regret", bound, RK, f"M={M:.6g}")
    elif scheme is Scheme.BACKWARD:
        increase = np.max(H[1:] - H[:-1], initial=-np.inf) if K else 0.0
        tol = MONOTONE_TOL * scale
        add("backward_monotone", tol, max(increase, 0.0))
        worst = 0.0
        for k in range(K):
            zscale = max(1.0, float(np.max(np.abs(traj.x[k]))), float(np.max(np.abs(traj.y[k]))))
            res = implicit_residual(game, traj.state(k), traj.state(k + 1), eta) / zscale
            worst = max(worst, res)
        add("backward_residual", 10 * traj.spec.backward_tol, worst, "relative to max(1, |z_k|)")
        if _is_quadratic(game) and K:
            ratio = H[1:] / H[:-1]
            lo = 1 / (1 + eta**2 * game.alpha_max**2)
            hi = 1 / (1 + eta**2 * game.alpha_min**2)
            excess = max(float(np.max(ratio - hi)), float(np.max(lo - ratio)), 0.0)
            add("backward_quadratic_decay", MONOTONE_TOL, excess)
        if game.bounded and K:
            RK = total_regret(traj)
            add("bwd_regret_dg", IDENTITY_TOL, abs(duality_gap_of_averages(traj) - RK / K))
            add("bwd_total_regret", bound_backward_regret(M, eta), RK, f"M={M:.6g}")
    else:
        add("energy_conservation", IDENTITY_TOL * scale, np.max(np.abs(H - H[0])))
        if game.bounded and K:
            RT = total_regret(traj)
            T = K * eta
            add("cts_regret_dg", IDENTITY_TOL, abs(duality_gap_of_averages(traj) - RT / T))
            add("cts_total_regret", bound_continuous_regret(M) + QUADRATURE_SLACK, RT, f"M={M:.6g}")
    return reports


def sample_commutator_bound(
    mmap: MirrorMap, n_pairs: int = 10_000, box: float = 5.0, seed: int = 0, context: str = ""
) -> BoundReport:
    """Worst ratio |C_f(x', x)| / (L3/12 |x' - x|_inf^3) over random pairs in a box."""
    if mmap.third_order is None:
        raise UnsupportedError(f"{mmap.kind.value} has no third-order constant")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-box, box, size=(n_pairs, mmap.dim))
    b = rng.uniform(-box, box, size=(n_pairs, mmap.dim))
    c = np.abs(map_commutator(mmap, a, b))
    cap = mmap.third_order / 12.0 * np.max(np.abs(a - b), axis=1) ** 3
    return BoundReport(
        "commutator_third_order",
        0.0,
        float(np.max(c - cap)),
        context,
        f"max of |C| - (L3/12)|dx|^3, L3={mmap.third_order:g}",
    )
