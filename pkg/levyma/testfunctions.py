"""Test functions ``v`` for the linear functional ``L v = <v, u v0>``."""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .grids import GridFn, LogGridFn, LogGridSpec, RealGridSpec


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A real test function with its declared admissibility index.

    Attributes:
        name: Label used in records and summaries.
        fn: Vectorized callable ``x -> v(x)``.
        xi: Declared decay index of ``F+[G^{-1*} v]``.
        beta2: Declared Sobolev order of the log-reparametrized branches.
        inverse_adjoint: Optional closed form of ``G^{-1*} v`` for a fixed kernel.
        zero: True when ``v`` vanishes identically.
    """

    __test__ = False

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    xi: float = 2.0
    beta2: float = 2.0
    inverse_adjoint: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    zero: bool = False

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def on(self, spec: RealGridSpec) -> GridFn:
        return GridFn.from_callable(self.fn, spec)

    def on_log(self, spec: LogGridSpec) -> LogGridFn:
        return LogGridFn.from_callable(self.fn, spec)

    def scaled(self, c: float) -> "TestFunction":
        inv = self.inverse_adjoint
        return TestFunction(
            f"{c:g}*{self.name}",
            lambda x: c * self.fn(x),
            xi=self.xi,
            beta2=self.beta2,
            inverse_adjoint=None if inv is None else (lambda x: c * inv(x)),
            zero=self.zero or c == 0,
        )


def zero() -> TestFunction:
    return TestFunction("zero", lambda x: np.zeros(np.shape(x)), xi=np.inf, beta2=np.inf, zero=True)


def gaussian_bump(center: float = 2.0, width: float = 0.5) -> TestFunction:
    """``exp(-(x - center)^2 / (2 width^2))``."""
    if not width > 0:
        raise ConfigError(f"bump width must be positive, got {width}", key="experiment.test_functions")
    return TestFunction(
        f"bump(c={center:g},w={width:g})",
        lambda x: np.exp(-((x - center) ** 2) / (2 * width**2)),
        xi=4.0,
        beta2=4.0,
    )


def box(lo: float, hi: float) -> TestFunction:
    """Indicator of ``[lo, hi]``; its transform decays like ``1/|x|``."""
    if not hi > lo:
        raise ConfigError(f"box needs hi > lo, got [{lo}, {hi}]", key="experiment.test_functions")
    return TestFunction(
        f"box({lo:g},{hi:g})",
        lambda x: ((x >= lo) & (x <= hi)).astype(float),
        xi=1.0,
        beta2=0.4,
    )


def reciprocal_tail(t: float = 1.0, lam: Optional[float] = None,
                    theta: Optional[float] = None) -> TestFunction:
    """``v(x) = 1/x`` for ``|x| > t``, zero on ``[-t, t]``.

    With ``lam`` and ``theta`` the closed form :func:`reciprocal_tail_displayed`
    for the exponential window is attached as ``inverse_adjoint``.
    """
    if not t > 0:
        raise ConfigError(f"tail threshold must be positive, got {t}", key="experiment.test_functions")

    def fn(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        far = np.abs(x) > t
        out[far] = 1.0 / x[far]
        return out

    inv = None
    if lam is not None and theta is not None:
        def inv(x):
            return reciprocal_tail_displayed(x, t, lam, theta)

    return TestFunction(f"tail(t={t:g})", fn, xi=1.0, beta2=0.25, inverse_adjoint=inv)


def reciprocal_tail_displayed(x, t: float, lam: float, theta: float) -> np.ndarray:
    """``(2x)^-1 log(|x|/t)`` on ``t < |x| <= t e^{lam theta}``, ``lam theta (2x)^-1`` beyond.

    This is ``(lam / 2) G* v`` for the exponential window, not ``G^{-1*} v``:
    the regularized inverse adjoint converges to the atoms of
    :func:`reciprocal_tail_atoms` instead.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    edge = t * np.exp(lam * theta)
    out = np.zeros(x.shape)
    mid = (ax > t) & (ax <= edge)
    far = ax > edge
    out[mid] = np.log(ax[mid] / t) / (2 * x[mid])
    out[far] = lam * theta / (2 * x[far])
    return out


def reciprocal_tail_atoms(t: float, lam: float, theta: float,
                          x_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """Atoms of ``G^{-1*} v`` for the reciprocal tail and the exponential window.

    ``G^{-1*} v = lam * sum_k (delta_{x_k} - delta_{-x_k})`` with
    ``x_k = t e^{k lam theta}``; returns ``(x_k, weights)`` for ``x_k <= x_max``.
    """
    k_max = int(np.floor(np.log(x_max / t) / (lam * theta))) if x_max > t else 0
    xk = t * np.exp(lam * theta * np.arange(k_max + 1))
    return xk, np.full(xk.shape, float(lam))


def from_spec(item: dict) -> TestFunction:
    """Build a test function from a config entry such as ``{"kind": "bump", "center": 2}``."""
    kind = item.get("kind")
    if kind == "bump":
        tf = gaussian_bump(item.get("center", 2.0), item.get("width", 0.5))
    elif kind == "box":
        tf = box(item.get("lo", 1.0), item.get("hi", 2.0))
    elif kind == "tail":
        tf = reciprocal_tail(item.get("t", 1.0))
    elif kind == "zero":
        tf = zero()
    else:
        raise ConfigError(f"unknown test function kind {kind!r}", key="experiment.test_functions")
    if "scale" in item:
        tf = tf.scaled(float(item["scale"]))
    return tf
