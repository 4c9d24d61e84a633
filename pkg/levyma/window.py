"""Observation windows on the lattice Z^d.

This module covers the geometry the limit theorems are stated on:

- :class:`Window`: finite lattice sets, canonically boxes ``[0, L)^d``
- :func:`boundary`: lattice points at sup-norm distance one from a window
- :class:`WindowSequence` and :func:`regular_growth_report`: growing windows
  with vanishing boundary-to-volume ratio
- :class:`Box` and :func:`vh_blocks`: block counts of the Van Hove condition
- lag helpers used by every lag-window covariance sum
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, ShapeError

Lag = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Window:
    """A finite, duplicate-free set of lattice points.

    Attributes:
        dim: Dimension ``d``.
        points: Integer array of shape ``(n, d)`` in lexicographic order.
        shape: Side lengths when the window is the box ``[0, L_1) x ... x [0, L_d)``.
    """

    dim: int
    points: np.ndarray = field(repr=False)
    shape: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, self.dim)
        pts = np.unique(pts, axis=0)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def box(cls, sides: Union[int, Sequence[int]], dim: int = 1) -> "Window":
        """The box ``[0, L)^d`` (one side per axis, or a common side)."""
        if np.isscalar(sides):
            sides = (int(sides),) * dim
        sides = tuple(int(s) for s in sides)
        if any(s < 1 for s in sides):
            raise ConfigError(f"window sides must be at least 1, got {sides}", key="sim.window_side")
        grids = np.meshgrid(*[np.arange(s) for s in sides], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        return cls(len(sides), pts, shape=sides)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return self.n

    def as_set(self) -> set:
        return {tuple(int(c) for c in p) for p in self.points}

    def require_box(self) -> Tuple[int, ...]:
        if self.shape is None:
            raise ShapeError("operation needs a box window")
        return self.shape


def boundary(window: Window) -> Window:
    """Lattice points outside ``window`` at sup-norm distance exactly one."""
    members = window.as_set()
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=window.dim) if any(o)]
    ring = set()
    for p in members:
        for o in offsets:
            q = tuple(a + b for a, b in zip(p, o))
            if q not in members:
                ring.add(q)
    pts = np.array(sorted(ring), dtype=np.int64).reshape(-1, window.dim)
    return Window(window.dim, pts)


@dataclass(frozen=True)
class WindowSequence:
    """Boxes ``[0, L_k)^d`` for an increasing list of sides."""

    dim: int = 1
    sides: Tuple[int, ...] = tuple(2**k for k in range(1, 11))

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.sides, self.sides[1:])):
            raise ConfigError(f"window sides must increase strictly, got {self.sides}",
                              key="experiment.window_sides")

    def __iter__(self) -> Iterator[Window]:
        for side in self.sides:
            yield Window.box(side, self.dim)


def regular_growth_report(seq: WindowSequence, k_max: Optional[int] = None) -> Dict:
    """Tabulate ``|A_k|``, ``|dA_k|`` and their ratio; flag monotone decrease."""
    rows: List[Dict] = []
    for k, window in enumerate(seq):
        if k_max is not None and k >= k_max:
            break
        if window.shape is not None:
            # closed form for boxes: prod(L + 2) - prod(L)
            outer = int(np.prod([s + 2 for s in window.shape]))
            size_b = outer - window.n
        else:
            size_b = boundary(window).n
        rows.append({"k": k, "size": window.n, "boundary": size_b, "ratio": size_b / window.n})
    ratios = [r["ratio"] for r in rows]
    regular = all(b < a for a, b in zip(ratios, ratios[1:]))
    return {"rows": rows, "regular": bool(regular)}


# ============================================================================
# VAN HOVE BLOCKS
# ============================================================================


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` (``closed``) or ``(lo, hi]``."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    closed: bool = True

    def __post_init__(self):
        lo = tuple(np.atleast_1d(np.asarray(self.lo, dtype=float)).tolist())
        hi = tuple(np.atleast_1d(np.asarray(self.hi, dtype=float)).tolist())
        if len(lo) != len(hi) or any(b < a for a, b in zip(lo, hi)):
            raise ConfigError(f"invalid box [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def block(cls, a) -> "Box":
        """The reference block ``(0, a_1] x ... x (0, a_d]``."""
        a = tuple(np.atleast_1d(np.asarray(a, dtype=float)).tolist())
        return cls(tuple(0.0 for _ in a), a, closed=False)

    @property
    def dim(self) -> int:
        return len(self.lo)


_TOL = 1e-12


def _axis_counts(lo: float, hi: float, a: float, closed: bool) -> Tuple[int, int]:
    lo_a, hi_a = lo / a, hi / a
    first_in = int(np.ceil(lo_a - _TOL))
    last_in = int(np.floor(hi_a + _TOL)) - 1
    contained = max(0, last_in - first_in + 1)
    last_hit = int(np.ceil(hi_a - _TOL)) - 1
    if closed:
        first_hit = int(np.ceil(lo_a - 1 - _TOL))
    else:
        first_hit = int(np.floor(lo_a - 1 + _TOL)) + 1
    hit = max(0, last_hit - first_hit + 1)
    return contained, hit


def vh_blocks(U: Box, a) -> Dict:
    """Count blocks ``Pi_j(a) = (0, a] + j a`` inside and meeting ``U``.

    Returns:
        ``{"J_minus", "J_plus", "ratio"}`` where ``ratio`` is
        ``vol(U^-) / vol(U^+)``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.shape != (U.dim,) or np.any(a <= 0):
        raise ConfigError(f"block sides must be positive with dimension {U.dim}, got {a}")
    j_minus, j_plus = 1, 1
    for lo, hi, side in zip(U.lo, U.hi, a):
        contained, hit = _axis_counts(lo, hi, side, U.closed)
        j_minus *= contained
        j_plus *= hit
    return {
        "J_minus": j_minus,
        "J_plus": j_plus,
        "ratio": j_minus / j_plus if j_plus else 0.0,
    }


# ============================================================================
# LAGS
# ============================================================================


def half_space_lags(dim: int, max_lag: int) -> List[Lag]:
    """Nonzero lags with ``||l||_inf <= max_lag``, one from each pair ``+-l``."""
    lags = []
    for lag in itertools.product(range(-max_lag, max_lag + 1), repeat=dim):
        nonzero = [c for c in lag if c != 0]
        if nonzero and nonzero[0] > 0:
            lags.append(lag)
    return lags


def lag_norm(lag: Sequence[int]) -> int:
    return int(max(abs(c) for c in lag)) if len(lag) else 0


def overlap(a: np.ndarray, b: np.ndarray, lag: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Aligned views ``(a[i], b[i + lag])`` over all ``i`` with both inside the array."""
    if a.shape != b.shape or a.ndim != len(lag):
        raise ShapeError(f"cannot lag arrays of shapes {a.shape}, {b.shape} by {tuple(lag)}")
    left, right = [], []
    for size, l in zip(a.shape, lag):
        left.append(slice(max(0, -l), size - max(0, l)))
        right.append(slice(max(0, l), size - max(0, -l)))
    return a[tuple(left)], b[tuple(right)]


def lag_covariance(a: np.ndarray, b: np.ndarray, lag: Sequence[int]) -> float:
    """Mean of ``a[i] * b[i + lag]`` over the overlap (arrays assumed centered)."""
    x, y = overlap(a, b, lag)
    if x.size == 0:
        return 0.0
    return float(np.mean(x * y))


def lag_window_sum(a: np.ndarray, b: np.ndarray, m: int) -> float:
    """``sum over ||l||_inf <= m`` of the lag cross-covariances, symmetrized."""
    total = lag_covariance(a, b, (0,) * a.ndim)
    for lag in half_space_lags(a.ndim, m):
        total += lag_covariance(a, b, lag) + lag_covariance(b, a, lag)
    return total
