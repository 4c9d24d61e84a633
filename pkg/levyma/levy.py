"""Lévy densities and moving-average kernels.

A :class:`LevyModel` describes the Lévy density ``v0`` of the driving random
measure (Gamma or tabulated, no Gaussian part). A :class:`KernelFn` describes
the compactly supported integrand ``f`` together with the composite
Gauss-Legendre quadrature used for every integral over ``supp(f)``.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid
from scipy.special import gamma as gamma_fn

from .errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

#: Gauss-Legendre order per panel.
GL_ORDER = 16


def gauss_legendre(breaks, order: int = GL_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive panels.

    Args:
        breaks: Increasing panel endpoints.
        order: Nodes per panel.

    Returns:
        ``(nodes, weights)`` as flat arrays.
    """
    breaks = np.asarray(breaks, dtype=float)
    ref_x, ref_w = leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = (b - a) / 2
    nodes = (a + b) / 2 + half * ref_x[None, :]
    weights = half * ref_w[None, :]
    return nodes.ravel(), weights.ravel()


def _tensor_rule(rules):
    """Tensor product of one-dimensional rules."""
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=-1), axis=-1)
    return nodes, weights


# ============================================================================
# LEVY MODELS
# ============================================================================


@dataclass(frozen=True, eq=False)
class LevyModel:
    """Lévy density of the driving random measure, triplet ``(a0, 0, v0)``.

    Attributes:
        kind: ``"gamma"`` or ``"tabulated"``.
        b: Rate of the Gamma model.
        a0: Drift of the random measure (metadata; the Gamma law fixes it).
        tau: Declared moment exponent.
        eps: Declared exponent of the polynomial decay condition on ``psi``.
        table_x, table_v0: Grid and values of a tabulated density.
    """

    kind: str
    b: Optional[float] = None
    a0: float = 0.0
    tau: float = 1.0
    eps: float = 0.1
    table_x: Optional[np.ndarray] = field(default=None, repr=False)
    table_v0: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "gamma":
            if self.b is None or not self.b > 0:
                raise ConfigError(f"gamma rate b must be positive, got {self.b}", key="levy.b")
        elif self.kind == "tabulated":
            x = np.asarray(self.table_x, dtype=float)
            v = np.asarray(self.table_v0, dtype=float)
            if x.ndim != 1 or x.shape != v.shape or len(x) < 2:
                raise ConfigError("tabulated density needs matching 1-d x and v0 arrays")
            if np.any(np.diff(x) <= 0):
                raise ConfigError("tabulated x grid must be strictly increasing")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ConfigError("tabulated v0 must be finite and non-negative")
            small = trapezoid(np.minimum(1.0, x**2) * v, x)
            if not np.isfinite(small):
                raise ConfigError("tabulated v0 does not integrate min(1, x^2)")
            object.__setattr__(self, "table_x", x)
            object.__setattr__(self, "table_v0", v)
        else:
            raise ConfigError(f"unknown Lévy model kind {self.kind!r}", key="levy.kind")
        if self.tau < 0:
            raise ConfigError(f"tau must be non-negative, got {self.tau}", key="levy.tau")

    @classmethod
    def gamma(cls, b: float, tau: float = 1.0, eps: float = 0.1) -> "LevyModel":
        a0 = (1.0 - np.exp(-b)) / b if b > 0 else 0.0
        return cls("gamma", b=b, a0=a0, tau=tau, eps=eps)

    @classmethod
    def tabulated(cls, x, v0, a0: float = 0.0, tau: float = 1.0, eps: float = 0.1) -> "LevyModel":
        return cls("tabulated", a0=a0, tau=tau, eps=eps, table_x=x, table_v0=v0)

    @property
    def name(self) -> str:
        if self.kind == "gamma":
            return f"gamma(b={self.b:g})"
        return f"tabulated({len(self.table_x)})"

    @property
    def support(self) -> Tuple[float, float]:
        if self.kind == "gamma":
            return 0.0, np.inf
        return float(self.table_x[0]), float(self.table_x[-1])

    def _check_table(self, x):
        lo, hi = self.support
        bad = (x < lo) | (x > hi)
        if np.any(bad):
            worst = x[bad][np.argmax(np.abs(x[bad]))]
            raise DomainError(f"{self.name} queried at x={worst:g} outside [{lo:g}, {hi:g}]")

    def v0(self, x, strict: bool = True):
        """Evaluate the Lévy density.

        Tabulated models interpolate linearly and raise :class:`DomainError`
        outside their grid unless ``strict`` is false, in which case they
        vanish there.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == "gamma":
            out = np.zeros_like(x)
            pos = x > 0
            out[pos] = np.exp(-self.b * x[pos]) / x[pos]
            return out
        if strict:
            self._check_table(x)
        return np.interp(x, self.table_x, self.table_v0, left=0.0, right=0.0)

    def uv0(self, x, strict: bool = True):
        """``x * v0(x)``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gamma":
            return np.where(x > 0, np.exp(-self.b * np.maximum(x, 0.0)), 0.0)
        return x * self.v0(x, strict=strict)

    def uv0_ft(self, x):
        """``F+[u v0](x) = integral of exp(i x y) y v0(y) dy``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gamma":
            return 1.0 / (self.b - 1j * x)
        tx, tv = self.table_x, self.table_x * self.table_v0
        out = np.empty(x.shape, dtype=complex)
        flat = x.ravel()
        for start in range(0, flat.size, 256):
            chunk = flat[start : start + 256]
            out.flat[start : start + chunk.size] = trapezoid(
                np.exp(1j * chunk[:, None] * tx[None, :]) * tv[None, :], tx, axis=1
            )
        return out

    def moment(self, p: float) -> float:
        """``integral of |x|^p v0(x) dx`` for ``p >= 1``."""
        if self.kind == "gamma":
            return float(gamma_fn(p) / self.b**p)
        return float(trapezoid(np.abs(self.table_x) ** p * self.table_v0, self.table_x))

    def default_x_max(self, f_sup: float) -> float:
        """Truncation point for jump integrals of the transferred density."""
        if self.kind == "gamma":
            return 50.0 / self.b * f_sup
        lo, hi = self.support
        return max(abs(lo), abs(hi)) * f_sup


# ============================================================================
# KERNELS
# ============================================================================


@dataclass(frozen=True, eq=False)
class KernelFn:
    """Compactly supported moving-average kernel with its quadrature rule.

    Attributes:
        kind: ``"exp_window"``, ``"indicator_cube"`` or ``"tabulated"``.
        dim: Dimension ``d`` of the index space.
        diam: Sup-norm diameter of the declared support.
        nodes: Quadrature nodes of shape ``(q, d)``.
        weights: Quadrature weights of shape ``(q,)``.
        lam, theta: Exponential window parameters.
        sides: Side lengths of the indicator cube.
        table_s, table_f: Grid and values of a tabulated kernel (``d = 1``).
        panels: Number of panels of the one-dimensional rule.
    """

    kind: str
    dim: int
    diam: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    lam: Optional[float] = None
    theta: Optional[float] = None
    sides: Optional[Tuple[float, ...]] = None
    table_s: Optional[np.ndarray] = field(default=None, repr=False)
    table_f: Optional[np.ndarray] = field(default=None, repr=False)
    panels: int = 32

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def exp_window(cls, lam: float, theta: float, panels: int = 32) -> "KernelFn":
        """``f(s) = exp(-lam * s)`` on ``(0, theta)``, zero elsewhere."""
        if not (lam > 0 and theta > 0):
            raise ConfigError(
                f"exp_window needs lambda > 0 and theta > 0, got {lam}, {theta}",
                key="kernel",
            )
        x, w = gauss_legendre(np.linspace(0.0, theta, panels + 1))
        return cls(
            "exp_window", 1, float(theta), x[:, None], w,
            lam=float(lam), theta=float(theta), panels=panels,
        )

    @classmethod
    def indicator_cube(cls, sides, dim: Optional[int] = None) -> "KernelFn":
        """Indicator of ``[0, sides[0]] x ... x [0, sides[d-1]]``."""
        if np.isscalar(sides):
            sides = (float(sides),) * (dim or 1)
        sides = tuple(float(s) for s in sides)
        if dim is not None and len(sides) != dim:
            raise ConfigError(f"{len(sides)} sides given for dimension {dim}", key="kernel.sides")
        if not all(s > 0 for s in sides):
            raise ConfigError(f"cube sides must be positive, got {sides}", key="kernel.sides")
        panels = 32 if len(sides) == 1 else 4
        rules = [gauss_legendre(np.linspace(0.0, s, panels + 1)) for s in sides]
        nodes, weights = _tensor_rule(rules)
        return cls(
            "indicator_cube", len(sides), max(sides), nodes, weights,
            sides=sides, panels=panels,
        )

    @classmethod
    def tabulated(cls, s, f, panels: Optional[int] = None) -> "KernelFn":
        """Piecewise linear kernel on ``[s[0], s[-1]]``, zero outside."""
        s = np.asarray(s, dtype=float)
        f = np.asarray(f, dtype=float)
        if s.ndim != 1 or s.shape != f.shape or len(s) < 2 or np.any(np.diff(s) <= 0):
            raise ConfigError("tabulated kernel needs a strictly increasing 1-d grid")
        if not np.all(np.isfinite(f)):
            raise ConfigError("tabulated kernel values must be finite")
        panels = panels or max(32, len(s) - 1)
        breaks = np.union1d(np.linspace(s[0], s[-1], panels + 1), s)
        x, w = gauss_legendre(breaks, order=8)
        return cls(
            "tabulated", 1, float(s[-1] - s[0]), x[:, None], w,
            table_s=s, table_f=f, panels=len(breaks) - 1,
        )

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def __call__(self, s):
        """Evaluate ``f``; ``s`` has shape ``(..., d)`` or ``(...)`` when ``d = 1``."""
        s = np.asarray(s, dtype=float)
        if self.dim == 1 and (s.ndim == 0 or s.shape[-1] != 1):
            s = s[..., None]
        if self.kind == "exp_window":
            t = s[..., 0]
            return np.where((t > 0) & (t < self.theta), np.exp(-self.lam * t), 0.0)
        if self.kind == "indicator_cube":
            inside = np.ones(s.shape[:-1], dtype=bool)
            for axis, side in enumerate(self.sides):
                inside &= (s[..., axis] > 0) & (s[..., axis] <= side)
            return inside.astype(float)
        t = s[..., 0]
        return np.interp(t, self.table_s, self.table_f, left=0.0, right=0.0)

    @property
    def values(self) -> np.ndarray:
        """``f`` at the quadrature nodes (interior points of the support)."""
        if self.kind == "indicator_cube":
            return np.ones(len(self.weights))
        return self(self.nodes)

    @property
    def name(self) -> str:
        if self.kind == "exp_window":
            return f"exp_window(lambda={self.lam:g},theta={self.theta:g})"
        if self.kind == "indicator_cube":
            return "indicator_cube(" + ",".join(f"{s:g}" for s in self.sides) + ")"
        return f"tabulated({len(self.table_s)})"

    @property
    def sup(self) -> float:
        vals = self.values
        return float(np.max(np.abs(vals))) if vals.size else 0.0

    def lp_norm(self, p: float) -> float:
        """``(integral of |f|^p)^(1/p)`` by the kernel quadrature."""
        return float(np.sum(self.weights * np.abs(self.values) ** p) ** (1.0 / p))

    def log_range(self) -> float:
        """Spread of ``log|f|`` over the support, driving oscillation of ``m_f``."""
        vals = np.abs(self.values)
        vals = vals[vals > 0]
        if vals.size == 0:
            return 0.0
        logs = np.log(vals)
        return float(logs.max() - logs.min())

    def support_box(self) -> Tuple[Tuple[float, float], ...]:
        """Axis-aligned bounding box of the declared support."""
        if self.kind == "exp_window":
            return ((0.0, self.theta),)
        if self.kind == "indicator_cube":
            return tuple((0.0, side) for side in self.sides)
        return ((float(self.table_s[0]), float(self.table_s[-1])),)

    def refined(self, panels: int) -> "KernelFn":
        """Same kernel with a finer one-dimensional rule."""
        if panels <= self.panels or self.kind == "indicator_cube":
            return self
        if self.kind == "exp_window":
            return KernelFn.exp_window(self.lam, self.theta, panels=panels)
        return KernelFn.tabulated(self.table_s, self.table_f, panels=panels)

    def with_rule(self, nodes, weights) -> "KernelFn":
        return replace(self, nodes=np.asarray(nodes), weights=np.asarray(weights))

    def symbol_closed(self, x) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Closed-form ``(m_plus(x), m_minus(x))`` when the kernel has one."""
        x = np.asarray(x, dtype=float)
        if self.kind == "exp_window":
            z = self.lam * (0.5 - 1j * x)
            m = -np.expm1(-self.theta * z) / z
            return m, m.copy()
        if self.kind == "indicator_cube":
            m = np.full(x.shape, float(np.prod(self.sides)), dtype=complex)
            return m, m.copy()
        return None
