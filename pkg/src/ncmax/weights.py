"""Quasiconcave weight functions: a small closed catalog plus user polylines.

Every weight is checked on a log grid when constructed: it must be
nondecreasing with ``phi(t)/t`` nonincreasing.  Kinds know what they can
about themselves (closed-form integrals, limits at 0 and infinity) so the
improper integrals in :mod:`ncmax.spaces` can stay honest.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .quadrature import DivergenceError, adaptive_simpson, integral_to_zero

_PROBE = np.logspace(-8, 8, 161)
_RTOL = 1e-10


class WeightFunction:
    kind = "abstract"
    #: lim_{t->0+} phi(t)
    value_at_zero: float = 0.0
    #: lim_{t->inf} phi(t)
    value_at_infinity: float = math.inf
    #: lim_{t->inf} phi(t)/t
    slope_at_infinity: float = 0.0

    def __init__(self):
        self._validate()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self._eval(t)
        return out if np.ndim(out) else float(out)

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _validate(self) -> None:
        v = np.asarray(self._eval(_PROBE), dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError(f"{self!r}: weight must be positive and finite on (0, inf)")
        slack = _RTOL * np.abs(v[1:])
        if np.any(np.diff(v) < -slack):
            raise ValueError(f"{self!r} is not nondecreasing")
        ratio = v / _PROBE
        if np.any(np.diff(ratio) > _RTOL * np.abs(ratio[:-1])):
            raise ValueError(f"{self!r}: phi(t)/t is not nonincreasing")

    @property
    def is_concave(self) -> bool:
        v = np.asarray(self._eval(_PROBE), dtype=float)
        slopes = np.diff(v) / np.diff(_PROBE)
        return bool(np.all(np.diff(slopes) <= 1e-9 * np.abs(slopes[:-1]) + 1e-300))

    # hooks; None means "no closed form, use quadrature"
    def reciprocal_integral(self, t: float) -> float | None:
        """``int_0^t ds / phi(s)``."""
        return None

    def tail_moment(self, t: float) -> float | None:
        """``int_t^inf phi(s) / s^2 ds``."""
        return None

    def to_dict(self) -> dict:
        raise ValueError(f"{self.kind} weights are not serialisable")

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Power(WeightFunction):
    """``t**alpha`` with ``0 < alpha <= 1``."""

    kind = "power"

    def __init__(self, alpha: float):
        if not 0 < alpha <= 1:
            raise ValueError("power weight needs 0 < alpha <= 1")
        self.alpha = float(alpha)
        self.slope_at_infinity = 1.0 if self.alpha == 1 else 0.0
        super().__init__()

    def _eval(self, t):
        return np.power(t, self.alpha)

    def reciprocal_integral(self, t):
        if self.alpha >= 1:
            raise DivergenceError("int_0 ds/s diverges: 1/phi is not integrable at 0")
        return t ** (1 - self.alpha) / (1 - self.alpha)

    def tail_moment(self, t):
        if self.alpha >= 1:
            raise DivergenceError("int^inf ds/s diverges")
        return t ** (self.alpha - 1) / (1 - self.alpha)

    def to_dict(self):
        return {"kind": "power", "alpha": self.alpha}

    def __repr__(self):
        return f"Power({self.alpha:g})"


def _log1p_neg_power(t: np.ndarray, gamma: float) -> np.ndarray:
    """``log(1 + t**-gamma)`` without overflow for tiny t."""
    t = np.asarray(t, dtype=float)
    small = t < 1
    safe = np.where(small, t, 1.0)
    big = np.where(small, 1.0, t)
    return np.where(small,
                    -gamma * np.log(safe) + np.log1p(np.power(safe, gamma)),
                    np.log1p(np.power(big, -gamma)))


class LogType(WeightFunction):
    """``t * log(1 + t**-gamma)**beta``."""

    kind = "logtype"

    def __init__(self, beta: float, gamma: float):
        if not (beta > 0 and gamma > 0):
            raise ValueError("logtype weight needs beta > 0 and gamma > 0")
        self.beta = float(beta)
        self.gamma = float(gamma)
        bg = self.beta * self.gamma
        # phi(t) ~ t**(1 - beta*gamma) at infinity
        self.value_at_infinity = 1.0 if bg == 1 else (0.0 if bg > 1 else math.inf)
        super().__init__()

    def _eval(self, t):
        return t * np.power(_log1p_neg_power(t, self.gamma), self.beta)

    def reciprocal_integral(self, t):
        # in u = ln(1/s): int_U^inf du / L(u)**beta with L = g*u + log1p(exp(-g*u))
        if self.beta <= 1:
            raise DivergenceError(
                f"1/phi is not integrable at 0 for beta = {self.beta:g} <= 1 "
                "(int ds / (s log(1/s)**beta) diverges)")
        g, b = self.gamma, self.beta
        start = -math.log(t)
        stop = max(start, 0.0) + 40.0 / g

        def integrand(u):
            return np.power(g * u + np.log1p(np.exp(-g * u)), -b)

        body = adaptive_simpson(integrand, start, stop, rtol=1e-12)
        # past `stop` the log1p correction is below e^-40
        tail = g ** -b * stop ** (1 - b) / (b - 1)
        return body + tail

    def to_dict(self):
        return {"kind": "logtype", "beta": self.beta, "gamma": self.gamma}

    def __repr__(self):
        return f"LogType({self.beta:g}, {self.gamma:g})"


class MaxOne(WeightFunction):
    """``max(1, t)``."""

    kind = "maxone"
    value_at_zero = 1.0
    slope_at_infinity = 1.0

    def _eval(self, t):
        return np.maximum(1.0, t)

    def reciprocal_integral(self, t):
        return t if t <= 1 else 1.0 + math.log(t)

    def tail_moment(self, t):
        raise DivergenceError("max(1,t)/t does not tend to 0")

    def to_dict(self):
        return {"kind": "maxone"}


class MinOne(WeightFunction):
    """``min(1, t)``: the weight ``t / max(1, t)``."""

    kind = "minone"
    value_at_infinity = 1.0

    def _eval(self, t):
        return np.minimum(1.0, t)

    def reciprocal_integral(self, t):
        raise DivergenceError("1/min(1,s) = 1/s near 0 is not integrable")

    def tail_moment(self, t):
        return 1.0 / t if t >= 1 else 1.0 - math.log(t)

    def to_dict(self):
        return {"kind": "minone"}


class ReciprocalLog(WeightFunction):
    """``t / (1 + ln t)`` for ``t > 1`` and ``1`` on ``(0, 1]``."""

    kind = "reciprocallog"
    value_at_zero = 1.0

    def _eval(self, t):
        big = np.maximum(t, 1.0)
        return np.where(t > 1, big / (1.0 + np.log(big)), 1.0)

    def reciprocal_integral(self, t):
        if t <= 1:
            return t
        lt = math.log(t)
        return 1.0 + lt + 0.5 * lt * lt

    def tail_moment(self, t):
        raise DivergenceError("int^inf ds / (s (1 + ln s)) diverges")

    def to_dict(self):
        return {"kind": "reciprocallog"}


class PiecewiseLinear(WeightFunction):
    """Polyline through ``vertices`` from ``(0, 0)``, constant after the last vertex."""

    kind = "piecewiselinear"

    def __init__(self, vertices: Sequence[Sequence[float]]):
        pts = sorted((float(x), float(y)) for x, y in vertices)
        if not pts:
            raise ValueError("need at least one vertex")
        if pts[0][0] < 0:
            raise ValueError("vertices must lie in t >= 0")
        if pts[0][0] > 0:
            pts.insert(0, (0.0, 0.0))
        if pts[0][1] != 0:
            raise ValueError("a piecewise-linear weight must start at (0, 0)")
        xs = np.array([p[0] for p in pts])
        if np.any(np.diff(xs) <= 0):
            raise ValueError("vertex abscissae must be distinct")
        self.xs = xs
        self.ys = np.array([p[1] for p in pts])
        self.value_at_infinity = float(self.ys[-1])
        if len(xs) < 2:
            raise ValueError("need a vertex with t > 0")
        super().__init__()

    @property
    def vertices(self) -> list[tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def _eval(self, t):
        return np.interp(t, self.xs, self.ys)

    def _validate(self):
        if np.any(self.ys[1:] <= 0):
            raise ValueError(f"{self!r}: weight must be positive on (0, inf)")
        if np.any(np.diff(self.ys) < 0):
            raise ValueError(f"{self!r} is not nondecreasing")
        ratio = self.ys[1:] / self.xs[1:]
        if np.any(np.diff(ratio) > 0):
            raise ValueError(f"{self!r}: phi(t)/t is not nonincreasing")

    @property
    def is_concave(self) -> bool:
        slopes = np.diff(self.ys) / np.diff(self.xs)
        return bool(np.all(np.diff(slopes) <= 0))

    def reciprocal_integral(self, t):
        raise DivergenceError("a polyline from (0,0) has 1/phi ~ 1/(c s): not integrable at 0")

    def tail_moment(self, t):
        # on a segment phi = a + b s, so phi/s^2 integrates to -a/s + b ln s
        total = 0.0
        xs, ys = self.xs, self.ys
        for i in range(len(xs) - 1):
            lo, hi = max(xs[i], t), xs[i + 1]
            if hi <= lo:
                continue
            b = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            a = ys[i] - b * xs[i]
            total += a * (1 / lo - 1 / hi) + b * math.log(hi / lo)
        return total + ys[-1] / max(t, xs[-1])

    def to_dict(self):
        return {"kind": "piecewiselinear", "vertices": [list(v) for v in self.vertices[1:]]}

    def __repr__(self):
        return f"PiecewiseLinear({self.vertices!r})"


class Derived(WeightFunction):
    """A weight given only by an evaluation callback."""

    kind = "derived"

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], name: str = "derived",
                 value_at_zero: float = math.nan, value_at_infinity: float = math.nan,
                 slope_at_infinity: float = math.nan):
        self._func = func
        self.name = name
        self.value_at_zero = value_at_zero
        self.value_at_infinity = value_at_infinity
        self.slope_at_infinity = slope_at_infinity
        super().__init__()

    def _eval(self, t):
        return self._func(t)

    def __repr__(self):
        return f"Derived({self.name})"


def conjugate(phi: WeightFunction) -> WeightFunction:
    """``t / phi(t)``; quasiconcave whenever ``phi`` is."""
    if isinstance(phi, MaxOne):
        return MinOne()
    if isinstance(phi, MinOne):
        return MaxOne()
    return Derived(lambda t: t / phi(t), name=f"t/{phi!r}")


def weight_from_dict(data: dict) -> WeightFunction:
    kind = str(data.get("kind", "")).lower()
    try:
        if kind == "power":
            return Power(data["alpha"])
        if kind == "logtype":
            return LogType(data["beta"], data["gamma"])
        if kind == "maxone":
            return MaxOne()
        if kind == "minone":
            return MinOne()
        if kind == "reciprocallog":
            return ReciprocalLog()
        if kind == "piecewiselinear":
            return PiecewiseLinear(data["vertices"])
    except KeyError as exc:
        raise ValueError(f"weight {kind!r} is missing parameter {exc}") from exc
    raise ValueError(f"unknown weight kind {kind!r}")


def parse_weight(text: str) -> WeightFunction:
    """Parse ``power:0.5``, ``logtype:2,0.5``, ``maxone``, ``minone``, ``reciprocallog``."""
    kind, _, args = text.partition(":")
    nums = [float(a) for a in args.split(",") if a.strip()]
    kind = kind.strip().lower()
    if kind == "power" and len(nums) == 1:
        return Power(nums[0])
    if kind == "logtype" and len(nums) == 2:
        return LogType(*nums)
    if kind in ("maxone", "minone", "reciprocallog") and not nums:
        return weight_from_dict({"kind": kind})
    raise ValueError(f"cannot parse weight {text!r}")
