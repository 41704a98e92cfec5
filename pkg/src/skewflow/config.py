"""Experiment configuration: JSON files and the bundled presets."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .diagnostics import optimal_alternating_scale, regret_smooth_constant
from .dynamics import Scheme, SchemeSpec
from .errors import ConfigError, SkewflowError
from .game import BilinearGame, JointState, lift_state, make_game
from .mirror_maps import MapKind, make_map

log = logging.getLogger(__name__)

ETA_RULES = ("K^{-1/3}", "K^{-1/2}", "fixed")
OUTPUT_KINDS = ("trajectory_csv", "diagnostics_csv", "svg_plot")

_KNOWN_KEYS = {
    "name", "description", "payoff", "map_p", "map_q", "p0", "q0", "x0", "y0",
    "scheme", "eta", "eta_rule", "eta_scale", "steps", "sweep_steps", "domain_bound",
    "backward_tol", "backward_max_iters", "outputs",
}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    payoff: object
    map_p: str
    map_q: str
    scheme: Scheme
    steps: int
    eta: float | None = None
    eta_rule: str | None = None
    eta_scale: float | None = None
    p0: tuple | None = None
    q0: tuple | None = None
    x0: tuple | None = None
    y0: tuple | None = None
    domain_bound: float | None = None
    backward_tol: float = 1e-12
    backward_max_iters: int = 500
    sweep_steps: tuple[int, ...] = ()
    outputs: tuple[str, ...] = OUTPUT_KINDS
    description: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def build_game(self) -> BilinearGame:
        payoff = self.payoff
        if isinstance(payoff, str):
            from .game import PAYOFF_PRESETS

            if payoff not in PAYOFF_PRESETS:
                raise ConfigError(f"unknown payoff preset {payoff!r}")
            payoff = PAYOFF_PRESETS[payoff]
        A = np.array(payoff, dtype=float, ndmin=2)
        m, n = A.shape
        mp = make_map(self.map_p, dim=m, domain_bound=self.domain_bound)
        mq = make_map(self.map_q, dim=n, domain_bound=self.domain_bound)
        return make_game(A, mp, mq)

    def initial_state(self, game: BilinearGame) -> JointState:
        if self.x0 is not None:
            return JointState.from_dual(game, self.x0, self.y0)
        m, n = game.shape
        p0 = self.p0 if self.p0 is not None else _default_primal(game.map_p.kind, m, "p0")
        q0 = self.q0 if self.q0 is not None else _default_primal(game.map_q.kind, n, "q0")
        return lift_state(game, p0, q0)

    def resolve_eta(self, game: BilinearGame, steps: int, initial: JointState) -> tuple[float, str]:
        """Step size for a run of ``steps`` steps plus a human-readable note on how it was chosen."""
        if self.eta is not None:
            return float(self.eta), f"eta={self.eta:g} (explicit)"
        if self.eta_rule == "fixed":
            return float(self.eta_scale), f"eta={self.eta_scale:g} (fixed rule)"
        if self.eta_rule == "K^{-1/3}":
            if self.eta_scale is not None:
                c, why = float(self.eta_scale), "configured"
            else:
                M = regret_smooth_constant(game, initial.p, initial.q) if game.bounded else None
                if M is not None and game.alpha_max > 0:
                    c, why = optimal_alternating_scale(M, game.alpha_max), f"certified, M={M:.6g}"
                else:
                    c, why = 1.0, "uncertified default"
            return c * steps ** (-1.0 / 3.0), f"eta=c*K^(-1/3), c={c:.6g} ({why})"
        c = float(self.eta_scale) if self.eta_scale is not None else 1.0
        return c * steps ** (-0.5), f"eta=c*K^(-1/2), c={c:.6g}"

    def scheme_spec(self, eta: float) -> SchemeSpec:
        return SchemeSpec(self.scheme, eta, self.backward_tol, self.backward_max_iters)


def _default_primal(kind: MapKind, dim: int, label: str):
    if kind is MapKind.ENTROPY:
        return np.full(dim, 1.0 / dim)
    raise ConfigError(f"{label} (or x0/y0) is required for the {kind.value} mirror map")


def _vector(raw, key):
    if raw is None:
        return None
    try:
        v = np.array(raw, dtype=float, ndmin=1)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number or a list of numbers") from None
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise ConfigError(f"{key} must be a finite 1-D vector")
    return tuple(v.tolist())


def parse_config(data: dict, source: str = "<config>") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    for key in ("payoff", "map_p", "map_q", "scheme"):
        if key not in data:
            raise ConfigError(f"{source}: missing required key {key!r}")

    for key in ("map_p", "map_q"):
        try:
            MapKind(data[key])
        except ValueError:
            raise ConfigError(f"{source}: {key} must be one of {[k.value for k in MapKind]}") from None
    try:
        scheme = Scheme(data["scheme"])
    except ValueError:
        raise ConfigError(f"{source}: scheme must be one of {[s.value for s in Scheme]}") from None

    has_eta, has_rule = "eta" in data, "eta_rule" in data
    if has_eta == has_rule:
        raise ConfigError(f"{source}: exactly one of 'eta' and 'eta_rule' must be given")
    eta = data.get("eta")
    if has_eta and (not isinstance(eta, (int, float)) or isinstance(eta, bool) or not eta > 0):
        raise ConfigError(f"{source}: eta must be a positive number")
    rule = data.get("eta_rule")
    if has_rule and rule not in ETA_RULES:
        raise ConfigError(f"{source}: eta_rule must be one of {list(ETA_RULES)}")
    scale = data.get("eta_scale")
    if scale is not None and (not isinstance(scale, (int, float)) or not scale > 0):
        raise ConfigError(f"{source}: eta_scale must be a positive number")
    if rule == "fixed" and scale is None:
        raise ConfigError(f"{source}: eta_rule 'fixed' needs eta_scale (the step size)")

    sweep = data.get("sweep_steps", [])
    if not isinstance(sweep, list) or not all(isinstance(k, int) and k >= 1 for k in sweep):
        raise ConfigError(f"{source}: sweep_steps must be a list of positive integers")
    steps = data.get("steps", max(sweep) if sweep else None)
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        raise ConfigError(f"{source}: steps must be an integer >= 1")

    if ("x0" in data) != ("y0" in data):
        raise ConfigError(f"{source}: x0 and y0 must be given together")
    if "x0" in data and ("p0" in data or "q0" in data):
        raise ConfigError(f"{source}: give either dual (x0, y0) or primal (p0, q0) initial points")

    outputs = data.get("outputs", list(OUTPUT_KINDS))
    if not isinstance(outputs, list) or any(o not in OUTPUT_KINDS for o in outputs):
        raise ConfigError(f"{source}: outputs must be a list drawn from {list(OUTPUT_KINDS)}")

    bound = data.get("domain_bound")
    if bound is not None and (not isinstance(bound, (int, float)) or not bound >= 0):
        raise ConfigError(f"{source}: domain_bound must be a nonnegative number")

    name = data.get("name", Path(source).stem)
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError(f"{source}: name must be a plain non-empty string")

    return ExperimentConfig(
        name=name,
        payoff=data["payoff"],
        map_p=data["map_p"],
        map_q=data["map_q"],
        scheme=scheme,
        steps=steps,
        eta=float(eta) if has_eta else None,
        eta_rule=rule,
        eta_scale=float(scale) if scale is not None else None,
        p0=_vector(data.get("p0"), "p0"),
        q0=_vector(data.get("q0"), "q0"),
        x0=_vector(data.get("x0"), "x0"),
        y0=_vector(data.get("y0"), "y0"),
        domain_bound=float(bound) if bound is not None else None,
        backward_tol=float(data.get("backward_tol", 1e-12)),
        backward_max_iters=int(data.get("backward_max_iters", 500)),
        sweep_steps=tuple(sweep),
        outputs=tuple(outputs),
        description=str(data.get("description", "")),
    )


def preset_names() -> list[str]:
    root = resources.files("skewflow") / "presets"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> ExperimentConfig:
    """Load a config from a file path or, failing that, a bundled preset name."""
    path = Path(ref)
    if path.is_file():
        text, source = path.read_text(encoding="utf-8"), str(path)
    else:
        res = resources.files("skewflow") / "presets" / f"{ref}.json"
        if not res.is_file():
            raise ConfigError(f"no config file or preset named {ref!r}")
        text, source = res.read_text(encoding="utf-8"), f"{ref}.json"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON ({exc})") from None
    cfg = parse_config(data, source)
    # catch inconsistent dimensions / bad initial points at load time
    try:
        game = cfg.build_game()
        cfg.initial_state(game)
    except ConfigError:
        raise
    except SkewflowError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def fit_loglog_slope(ks, values) -> float:
    """Least-squares slope of log(value) against log(K)."""
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=float)
    if ks.size < 2 or np.any(values <= 0):
        return math.nan
    slope, _ = np.polyfit(np.log(ks), np.log(values), 1)
    return float(slope)
