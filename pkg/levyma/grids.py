"""Sampled-function carriers shared by every numerical module.

Two carriers exist. :class:`GridFn` holds complex samples on a uniform grid of
the real line, and :class:`LogGridFn` holds a function on the punctured line
as two branches ``x = +e^s`` and ``x = -e^s`` over one shared uniform grid in
the logarithmic coordinate ``s = log|x|``. The origin never lies on a log grid.

Both are immutable; operations return new instances. Quadratures over the
grids are plain Riemann sums with uniform weights, which makes the discrete
transforms in :mod:`levyma.xform` exact adjoints of each other.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Union

import numpy as np

from .errors import NumericError, ShapeError

#: Relative tolerance used when deciding whether two grids coincide.
GRID_RTOL = 1e-12


def _as_values(values, n_pts, name):
    arr = np.array(values, dtype=complex)
    if arr.shape != (n_pts,):
        raise ShapeError(f"{name} has shape {arr.shape}, expected ({n_pts},)")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite samples")
    arr.setflags(write=False)
    return arr


def _same_axis(lo1, step1, n1, lo2, step2, n2):
    scale = max(abs(lo1), abs(step1) * n1, 1.0)
    return (
        n1 == n2
        and abs(lo1 - lo2) <= GRID_RTOL * scale
        and abs(step1 - step2) <= GRID_RTOL * abs(step1)
    )


@dataclass(frozen=True)
class RealGridSpec:
    """A uniform grid ``lo, lo + step, ..., hi`` on the real line."""

    lo: float
    hi: float
    n_pts: int

    def __post_init__(self):
        if self.n_pts < 2:
            raise ShapeError(f"a grid needs at least 2 points, got {self.n_pts}")
        if not self.hi > self.lo:
            raise ShapeError(f"grid end {self.hi} must exceed start {self.lo}")

    @classmethod
    def centered(cls, step: float, n_pts: int) -> "RealGridSpec":
        """The FFT-friendly grid ``k * step`` for ``k = -n//2, ..., n - n//2 - 1``."""
        lo = -(n_pts // 2) * step
        return cls(lo, lo + (n_pts - 1) * step, n_pts)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n_pts - 1)

    @property
    def x(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.n_pts)

    def conjugate(self) -> "RealGridSpec":
        """The centered frequency grid matched to this grid by the DFT."""
        return RealGridSpec.centered(2 * np.pi / (self.n_pts * self.step), self.n_pts)


@dataclass(frozen=True)
class LogGridSpec:
    """A uniform grid in ``s = log|x|`` shared by both branches."""

    s_lo: float = -12.0
    s_hi: float = 12.0
    n_pts: int = 2**14

    def __post_init__(self):
        if self.n_pts < 2:
            raise ShapeError(f"a grid needs at least 2 points, got {self.n_pts}")
        if not self.s_hi > self.s_lo:
            raise ShapeError(f"grid end {self.s_hi} must exceed start {self.s_lo}")

    @classmethod
    def centered(cls, step: float, n_pts: int) -> "LogGridSpec":
        lo = -(n_pts // 2) * step
        return cls(lo, lo + (n_pts - 1) * step, n_pts)

    @property
    def step(self) -> float:
        return (self.s_hi - self.s_lo) / (self.n_pts - 1)

    @property
    def s(self) -> np.ndarray:
        return self.s_lo + self.step * np.arange(self.n_pts)

    def conjugate(self) -> "LogGridSpec":
        return LogGridSpec.centered(2 * np.pi / (self.n_pts * self.step), self.n_pts)


@dataclass(frozen=True, eq=False)
class GridFn:
    """Complex samples on a uniform real grid.

    Attributes:
        lo, hi: Grid endpoints, both sampled.
        n_pts: Number of samples.
        values: Complex samples, read-only.
        diagnostics: Free-form numerical diagnostics attached by producers.
    """

    lo: float
    hi: float
    n_pts: int
    values: np.ndarray
    diagnostics: Dict[str, Any] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        RealGridSpec(self.lo, self.hi, self.n_pts)
        object.__setattr__(self, "values", _as_values(self.values, self.n_pts, "values"))

    @classmethod
    def on(cls, spec: RealGridSpec, values, **diagnostics) -> "GridFn":
        return cls(spec.lo, spec.hi, spec.n_pts, values, dict(diagnostics))

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], Any], spec: RealGridSpec) -> "GridFn":
        return cls.on(spec, fn(spec.x))

    @classmethod
    def zeros(cls, spec: RealGridSpec) -> "GridFn":
        return cls.on(spec, np.zeros(spec.n_pts))

    @property
    def spec(self) -> RealGridSpec:
        return RealGridSpec(self.lo, self.hi, self.n_pts)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n_pts - 1)

    @property
    def x(self) -> np.ndarray:
        return self.spec.x

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def aligned(self, other: "GridFn") -> bool:
        return _same_axis(self.lo, self.step, self.n_pts, other.lo, other.step, other.n_pts)

    def require_aligned(self, other: "GridFn") -> None:
        if not self.aligned(other):
            raise ShapeError(
                f"grids differ: [{self.lo}, {self.hi}]/{self.n_pts} "
                f"vs [{other.lo}, {other.hi}]/{other.n_pts}"
            )

    def with_values(self, values, **diagnostics) -> "GridFn":
        return GridFn(self.lo, self.hi, self.n_pts, values, dict(diagnostics))

    def map(self, fn: Callable[[np.ndarray], Any]) -> "GridFn":
        return self.with_values(fn(self.values))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.step))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def restrict_norm(self, lo: float, hi: float) -> float:
        """L2 norm over the samples with ``lo <= |x| <= hi``."""
        mask = (np.abs(self.x) >= lo) & (np.abs(self.x) <= hi)
        return float(np.sqrt(np.sum(np.abs(self.values[mask]) ** 2) * self.step))

    def __add__(self, other):
        if isinstance(other, GridFn):
            self.require_aligned(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFn):
            self.require_aligned(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, other):
        if isinstance(other, GridFn):
            self.require_aligned(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class LogGridFn:
    """A function on the punctured real line sampled on paired log grids.

    ``pos[k]`` is the value at ``x = +exp(s[k])`` and ``neg[k]`` the value at
    ``x = -exp(s[k])``. The same carrier holds transform outputs, in which
    case ``s`` is the conjugate log-frequency ``t = log|y|``.
    """

    s_lo: float
    s_hi: float
    n_pts: int
    pos: np.ndarray
    neg: np.ndarray
    diagnostics: Dict[str, Any] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        LogGridSpec(self.s_lo, self.s_hi, self.n_pts)
        object.__setattr__(self, "pos", _as_values(self.pos, self.n_pts, "pos"))
        object.__setattr__(self, "neg", _as_values(self.neg, self.n_pts, "neg"))

    @classmethod
    def on(cls, spec: LogGridSpec, pos, neg, **diagnostics) -> "LogGridFn":
        return cls(spec.s_lo, spec.s_hi, spec.n_pts, pos, neg, dict(diagnostics))

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], Any], spec: LogGridSpec) -> "LogGridFn":
        """Sample ``fn`` at ``+e^s`` and ``-e^s``."""
        r = np.exp(spec.s)
        return cls.on(spec, fn(r), fn(-r))

    @classmethod
    def zeros(cls, spec: LogGridSpec) -> "LogGridFn":
        return cls.on(spec, np.zeros(spec.n_pts), np.zeros(spec.n_pts))

    @property
    def spec(self) -> LogGridSpec:
        return LogGridSpec(self.s_lo, self.s_hi, self.n_pts)

    @property
    def step(self) -> float:
        return (self.s_hi - self.s_lo) / (self.n_pts - 1)

    @property
    def s(self) -> np.ndarray:
        return self.spec.s

    def aligned(self, other: "LogGridFn") -> bool:
        return _same_axis(
            self.s_lo, self.step, self.n_pts, other.s_lo, other.step, other.n_pts
        )

    def require_aligned(self, other: "LogGridFn") -> None:
        if not self.aligned(other):
            raise ShapeError(
                f"log grids differ: [{self.s_lo}, {self.s_hi}]/{self.n_pts} "
                f"vs [{other.s_lo}, {other.s_hi}]/{other.n_pts}"
            )

    def with_values(self, pos, neg, **diagnostics) -> "LogGridFn":
        return LogGridFn(self.s_lo, self.s_hi, self.n_pts, pos, neg, dict(diagnostics))

    def swap(self) -> "LogGridFn":
        return self.with_values(self.neg, self.pos)

    def l2_norm_haar(self) -> float:
        """Norm in L2 of the punctured line with measure dx/|x|."""
        mass = np.sum(np.abs(self.pos) ** 2 + np.abs(self.neg) ** 2) * self.step
        return float(np.sqrt(mass))

    def l2_norm(self) -> float:
        """Norm in L2 of the real line with Lebesgue measure."""
        w = np.exp(self.s)
        mass = np.sum((np.abs(self.pos) ** 2 + np.abs(self.neg) ** 2) * w) * self.step
        return float(np.sqrt(mass))

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.pos)), np.max(np.abs(self.neg))))

    def __add__(self, other):
        self.require_aligned(other)
        return self.with_values(self.pos + other.pos, self.neg + other.neg)

    def __sub__(self, other):
        self.require_aligned(other)
        return self.with_values(self.pos - other.pos, self.neg - other.neg)

    def __mul__(self, c):
        return self.with_values(self.pos * c, self.neg * c)

    __rmul__ = __mul__


Carrier = Union[GridFn, LogGridFn]


def inner(a: Carrier, b: Carrier) -> complex:
    """Lebesgue inner product ``integral of a * conj(b) dx``.

    Both arguments must be of the same carrier type on the same grid.
    """
    if isinstance(a, GridFn) and isinstance(b, GridFn):
        a.require_aligned(b)
        return complex(np.sum(a.values * np.conj(b.values)) * a.step)
    if isinstance(a, LogGridFn) and isinstance(b, LogGridFn):
        a.require_aligned(b)
        w = np.exp(a.s)
        total = np.sum((a.pos * np.conj(b.pos) + a.neg * np.conj(b.neg)) * w)
        return complex(total * a.step)
    raise ShapeError(
        f"cannot pair {type(a).__name__} with {type(b).__name__}; resample first"
    )


def inner_haar(a: LogGridFn, b: LogGridFn) -> complex:
    """Inner product in L2 of the punctured line with measure dx/|x|."""
    a.require_aligned(b)
    return complex(np.sum(a.pos * np.conj(b.pos) + a.neg * np.conj(b.neg)) * a.step)


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    """``||a - b|| / ||b||`` for sample arrays on the same uniform grid."""
    den = np.linalg.norm(b)
    num = np.linalg.norm(np.asarray(a) - np.asarray(b))
    if den == 0:
        return float(num)
    return float(num / den)
