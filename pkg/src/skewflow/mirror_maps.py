"""Legendre regularizers and their convex conjugates.

Every map works in two coordinates: the primal point ``p`` (a strategy) and
the dual point ``x = grad phi(p)``.  The dual function ``f = phi*`` is the
object the dynamics actually integrate, so ``dual_value``/``dual_gradient``
accept batches (any leading shape, vector index on the last axis).

Four kinds are available, keyed by the strings used in config files:

========== ============================== ======================
key        dual function f(x)             primal domain
========== ============================== ======================
euclidean  0.5 * |x|^2                    R^m
entropy    log sum exp(x)                 open simplex
logcosh    log cosh(x)   (1-D)            (-1, 1)
cubic      |x|^3 / 3     (1-D)            R
========== ============================== ======================
"""

from __future__ import annotations

import math
import threading
from abc import ABC, abstractmethod
from enum import Enum

import numpy as np

from .errors import DimensionError, DomainError, UnsupportedError

LOG_FLOOR = 1e-300
VERTEX_SMOOTHING = 1e-6


class MapKind(str, Enum):
    EUCLIDEAN = "euclidean"
    ENTROPY = "entropy"
    LOGCOSH = "logcosh"
    CUBIC = "cubic"


class _ClampCounter:
    """Counts how often simplex points were floored before a log."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def bump(self, n: int = 1) -> None:
        with self._lock:
            self._count += n

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0


clamp_counter = _ClampCounter()


def _as_vector(v, dim: int) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] != dim:
        raise DimensionError(f"expected vectors of dimension {dim}, got shape {arr.shape}")
    return arr


class MirrorMap(ABC):
    """A Legendre regularizer bundle of fixed dimension.

    Instances are immutable; ``domain_bound`` is the constant M used by the
    regret bounds (``None`` for unbounded domains).
    """

    kind: MapKind
    #: sup of the l1 norm of grad f (Lipschitz constant w.r.t. l_inf); None if unbounded
    lipschitz: float | None = None
    #: sup of the l2 norm of grad f
    lipschitz_l2: float | None = None
    #: bound on the l2 operator norm of the Hessian of f
    smoothness_l2: float | None = None
    #: bound on |D^3 f[v,v,v]| for |v|_inf = 1
    third_order: float | None = None

    def __init__(self, dim: int, domain_bound: float | None = None):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {dim!r}")
        if domain_bound is not None and domain_bound < 0:
            raise ValueError("domain_bound must be nonnegative")
        self._dim = int(dim)
        self._domain_bound = None if domain_bound is None else float(domain_bound)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def domain_bound(self) -> float | None:
        return self._domain_bound

    @property
    def bounded(self) -> bool:
        return self.vertices() is not None

    def with_bound(self, domain_bound: float | None) -> "MirrorMap":
        return type(self)(self.dim, domain_bound)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, domain_bound={self.domain_bound})"

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and other.dim == self.dim
            and other.domain_bound == self.domain_bound
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.dim, self.domain_bound))

    # dual side ---------------------------------------------------------

    @abstractmethod
    def dual_value(self, x) -> np.ndarray | float:
        """f(x) = phi*(x), reduced over the last axis."""

    @abstractmethod
    def dual_gradient(self, x) -> np.ndarray:
        """grad f(x), the primal point p."""

    def bregman_dual(self, x, x_ref):
        x = _as_vector(x, self.dim)
        x_ref = _as_vector(x_ref, self.dim)
        g = self.dual_gradient(x_ref)
        return self.dual_value(x) - self.dual_value(x_ref) - np.sum(g * (x - x_ref), axis=-1)

    # primal side -------------------------------------------------------

    @abstractmethod
    def primal_value(self, p) -> float:
        """phi(p) at an interior point."""

    @abstractmethod
    def primal_gradient(self, p) -> np.ndarray:
        """grad phi(p); the inverse of :meth:`dual_gradient`."""

    def bregman_primal(self, p, p_ref) -> float:
        p = _as_vector(p, self.dim)
        p_ref = _as_vector(p_ref, self.dim)
        return float(
            self.primal_value(p)
            - self.primal_value(p_ref)
            - np.dot(self.primal_gradient(p_ref), p - p_ref)
        )

    def _closed_primal_value(self, p) -> float:
        # phi extended to the closure of the domain (vertices included).
        x = self.primal_gradient(p)
        return float(np.dot(p, x) - self.dual_value(x))

    def fenchel_gap(self, x, p_ref):
        """f(x) + phi(p_ref) - <p_ref, x>.

        Equals D_f(x, grad phi(p_ref)) = D_phi(p_ref, grad f(x)) and stays
        finite when ``p_ref`` is a vertex of a bounded domain.
        """
        x = _as_vector(x, self.dim)
        p_ref = _as_vector(p_ref, self.dim)
        return self.dual_value(x) + self._closed_primal_value(p_ref) - np.sum(p_ref * x, axis=-1)

    # domain ------------------------------------------------------------

    def vertices(self) -> np.ndarray | None:
        """Extreme points of the primal domain, one per row; None if unbounded."""
        return None

    def default_domain_bound(self, p0) -> float | None:
        """max over (slightly smoothed) vertices v of D_phi(v, p0)."""
        verts = self.vertices()
        if verts is None:
            return None
        center = verts.mean(axis=0)
        smoothed = (1.0 - VERTEX_SMOOTHING) * verts + VERTEX_SMOOTHING * center
        return max(self.bregman_primal(v, p0) for v in smoothed)


class EuclideanQuadratic(MirrorMap):
    kind = MapKind.EUCLIDEAN
    smoothness_l2 = 1.0
    third_order = 0.0

    def dual_value(self, x):
        x = _as_vector(x, self.dim)
        return 0.5 * np.sum(x * x, axis=-1)

    def dual_gradient(self, x):
        return np.array(_as_vector(x, self.dim), dtype=float, copy=True)

    def primal_value(self, p):
        p = _as_vector(p, self.dim)
        return float(0.5 * np.dot(p, p))

    def primal_gradient(self, p):
        return np.array(_as_vector(p, self.dim), dtype=float, copy=True)

    def _closed_primal_value(self, p):
        return self.primal_value(p)


class NegativeEntropySimplex(MirrorMap):
    kind = MapKind.ENTROPY
    lipschitz = 1.0
    lipschitz_l2 = 1.0
    smoothness_l2 = 0.5
    third_order = 8.0

    def dual_value(self, x):
        x = _as_vector(x, self.dim)
        m = np.max(x, axis=-1, keepdims=True)
        out = np.log(np.sum(np.exp(x - m), axis=-1)) + m[..., 0]
        return out

    def dual_gradient(self, x):
        x = _as_vector(x, self.dim)
        e = np.exp(x - np.max(x, axis=-1, keepdims=True))
        return e / np.sum(e, axis=-1, keepdims=True)

    def _check_simplex(self, p, strict: bool = True) -> np.ndarray:
        p = _as_vector(p, self.dim)
        if strict and np.any(p <= 0):
            raise DomainError(f"simplex point must be strictly positive, got {p}")
        if not strict and np.any(p < 0):
            raise DomainError(f"simplex point has a negative component: {p}")
        if np.any(np.abs(np.sum(p, axis=-1) - 1.0) > 1e-9):
            raise DomainError(f"simplex point must sum to 1, got {p}")
        return p

    @staticmethod
    def _floored_log(p: np.ndarray) -> np.ndarray:
        tiny = p < LOG_FLOOR
        if np.any(tiny):
            clamp_counter.bump(int(np.count_nonzero(tiny)))
            p = np.maximum(p, LOG_FLOOR)
        return np.log(p)

    def primal_value(self, p):
        p = self._check_simplex(p)
        return float(np.sum(p * self._floored_log(p), axis=-1))

    def primal_gradient(self, p):
        p = self._check_simplex(p)
        return self._floored_log(p)

    def bregman_primal(self, p, p_ref):
        p = self._check_simplex(p)
        p_ref = self._check_simplex(p_ref)
        return float(np.sum(p * (self._floored_log(p) - self._floored_log(p_ref))))

    def _closed_primal_value(self, p):
        p = self._check_simplex(p, strict=False)
        pos = p > 0
        return float(np.sum(p[pos] * np.log(p[pos])))

    def vertices(self):
        return np.eye(self.dim)


class LogCosh1D(MirrorMap):
    """Dual function log cosh on R; primal domain (-1, 1).

    This is the two-action simplex written in the coordinate p1 - p2 (with
    the dual coordinate halved), so the primal function is a shifted binary
    negative entropy.
    """

    kind = MapKind.LOGCOSH
    lipschitz = 1.0
    lipschitz_l2 = 1.0
    smoothness_l2 = 1.0
    third_order = 4.0 / (3.0 * math.sqrt(3.0))

    def __init__(self, dim: int = 1, domain_bound: float | None = None):
        if dim != 1:
            raise ValueError("logcosh is one-dimensional")
        super().__init__(dim, domain_bound)

    def dual_value(self, x):
        x = _as_vector(x, 1)
        a = np.abs(x[..., 0])
        return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)

    def dual_gradient(self, x):
        return np.tanh(_as_vector(x, 1))

    def _check_open(self, p, strict: bool = True) -> np.ndarray:
        p = _as_vector(p, 1)
        bad = np.abs(p) >= 1 if strict else np.abs(p) > 1
        if np.any(bad):
            raise DomainError(f"logcosh primal point must lie in (-1, 1), got {p}")
        return p

    def primal_value(self, p):
        p = self._check_open(p)
        return self._closed_primal_value(p)

    def _closed_primal_value(self, p):
        p = self._check_open(p, strict=False)
        total = math.log(2.0)
        for w in ((1.0 + p[0]) / 2.0, (1.0 - p[0]) / 2.0):
            if w > 0:
                total += w * math.log(w)
        return total

    def primal_gradient(self, p):
        return np.arctanh(self._check_open(p))

    def vertices(self):
        return np.array([[1.0], [-1.0]])


class Cubic1D(MirrorMap):
    """Dual function |x|^3 / 3 on R, given directly on the dual side."""

    kind = MapKind.CUBIC
    third_order = 2.0

    def __init__(self, dim: int = 1, domain_bound: float | None = None):
        if dim != 1:
            raise ValueError("cubic is one-dimensional")
        super().__init__(dim, domain_bound)

    def dual_value(self, x):
        x = _as_vector(x, 1)
        return np.abs(x[..., 0]) ** 3 / 3.0

    def dual_gradient(self, x):
        x = _as_vector(x, 1)
        return x * np.abs(x)

    def primal_value(self, p):
        raise UnsupportedError("cubic kind is defined on the dual side only")

    def primal_gradient(self, p):
        p = _as_vector(p, 1)
        return np.sign(p) * np.sqrt(np.abs(p))

    def bregman_primal(self, p, p_ref):
        raise UnsupportedError("cubic kind is defined on the dual side only")


_KINDS = {
    MapKind.EUCLIDEAN: EuclideanQuadratic,
    MapKind.ENTROPY: NegativeEntropySimplex,
    MapKind.LOGCOSH: LogCosh1D,
    MapKind.CUBIC: Cubic1D,
}


def make_map(kind: str | MapKind, dim: int = 1, domain_bound: float | None = None) -> MirrorMap:
    """Build a mirror map from its config key ("euclidean", "entropy", "logcosh", "cubic")."""
    try:
        cls = _KINDS[MapKind(kind)]
    except ValueError:
        raise ValueError(f"unknown mirror map kind {kind!r}; expected one of {[k.value for k in MapKind]}") from None
    return cls(dim, domain_bound)
