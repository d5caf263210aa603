"""Symmetric norms of spectral profiles and the range-space conditions."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .quadrature import DivergenceError, adaptive_simpson, integral_to_zero
from .rearrange import (CesaroCurve, SpectralProfile, StepFunction, mu_of_profile,
                        submajorized_by_cesaro)
from .weights import Derived, PiecewiseLinear, WeightFunction

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class NormResult:
    value: float
    space: str
    params: dict = field(default_factory=dict)
    maximizer_t: float | None = None
    method: str = "exact"

    def to_dict(self) -> dict:
        out = {"value": self.value, "space": self.space, "params": self.params,
               "method": self.method}
        if self.maximizer_t is not None:
            out["maximizerT"] = self.maximizer_t
        return out


@dataclass(frozen=True)
class LogGrid:
    lo: float = 1e-6
    hi: float = 1e6
    points: int = 241

    def __post_init__(self):
        if not (0 < self.lo < self.hi) or self.points < 2:
            raise ValueError("log grid needs 0 < lo < hi and at least 2 points")

    def values(self) -> np.ndarray:
        return np.logspace(math.log10(self.lo), math.log10(self.hi), self.points)


def norm_lp(p: SpectralProfile, exponent: float) -> NormResult:
    if not exponent >= 1:
        raise ValueError("L_p needs p >= 1")
    if math.isinf(exponent):
        return NormResult(p.max_value, "lp", {"p": "inf"})
    if len(p) == 0:
        return NormResult(0.0, "lp", {"p": exponent})
    top = p.max_value
    if top == 0:
        return NormResult(0.0, "lp", {"p": exponent})
    # factor out the top value to keep large exponents finite
    s = float(np.dot((p.values / top) ** exponent, p.weights))
    return NormResult(top * s ** (1 / exponent), "lp", {"p": exponent})


def norm_lpq(p: SpectralProfile, pp: float, qq: float) -> NormResult:
    """``(int (t^{1/p} mu(t))^q dt/t)^{1/q}``; for ``q = inf``, ``sup t^{1/p} mu(t)``."""
    if not pp >= 1 or not qq >= 1 or math.isinf(pp):
        raise ValueError("L_{p,q} needs 1 <= p < inf and 1 <= q <= inf")
    params = {"p": pp, "q": "inf" if math.isinf(qq) else qq}
    if len(p) == 0:
        return NormResult(0.0, "lpq", params)
    W = p.cumulative
    if math.isinf(qq):
        return NormResult(float(np.max(W ** (1 / pp) * p.values)), "lpq", params)
    Wprev = np.concatenate([[0.0], W[:-1]])
    r = qq / pp
    incr = (pp / qq) * (W ** r - Wprev ** r)
    return NormResult(float(np.dot(p.values ** qq, incr)) ** (1 / qq), "lpq", params)


def norm_l1_plus_linf(p: SpectralProfile) -> NormResult:
    return NormResult(float(mu_of_profile(p).integral(1.0)), "l1plusinf")


def norm_l1_cap_linf(p: SpectralProfile) -> NormResult:
    return NormResult(max(p.l1, p.max_value), "l1capinf")


def norm_lorentz(p: SpectralProfile, phi: WeightFunction) -> NormResult:
    """Stieltjes sum ``sum_i mu_i (phi(W_i) - phi(W_{i-1}))``."""
    if phi.value_at_zero != 0:
        raise ValueError(f"Lorentz weight must vanish at 0+, {phi!r} does not")
    if not phi.is_concave:
        warnings.warn(f"{phi!r} is quasiconcave but not concave; the Lorentz "
                      "functional is then only a quasinorm", stacklevel=2)
    params = {"phi": repr(phi)}
    if len(p) == 0:
        return NormResult(0.0, "lorentz", params)
    vals = np.concatenate([[0.0], np.asarray(phi(p.cumulative), dtype=float)])
    return NormResult(float(np.dot(p.values, np.diff(vals))), "lorentz", params)


def _golden_max(f, a: float, b: float, rtol: float = 1e-10):
    """Max of a unimodal-ish ``f`` on ``[a, b]``, endpoints always included."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rtol * max(abs(a), abs(b)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    cands = [(f(a), a), (fc, c), (fd, d), (f(b), b)]
    return max(cands)


def norm_marcinkiewicz(p: SpectralProfile, psi: WeightFunction, samples: int = 16) -> NormResult:
    """``sup_t psi(t)/t * int_0^t mu``.

    On a step of ``mu`` the prefix integral is ``a + v t``; each step is
    scanned on a small log grid and refined by golden section around the
    best sample.  Past the support the objective is ``mass * psi(t)/t``,
    nonincreasing, so the support end closes the search.  The ``t -> 0+``
    limit ``mu(0) * lim psi(t)`` only matters when ``psi(0+) > 0``.
    """
    params = {"psi": repr(psi)}
    if len(p) == 0:
        return NormResult(0.0, "marcinkiewicz", params, maximizer_t=0.0)
    f = mu_of_profile(p)

    def objective(t):
        return float(psi(t)) / t * float(f.integral(t))

    best_val, best_t = -math.inf, math.nan
    psi0 = psi.value_at_zero
    if psi0 > 0:
        # psi(t)/t * int_0^t mu -> psi(0+) * mu(0) as t -> 0+
        best_val, best_t = psi0 * p.max_value, 0.0
    bps = f.breakpoints
    for i in range(len(f.values)):
        lo, hi = bps[i], bps[i + 1]
        lo_eff = lo if lo > 0 else hi * 1e-12
        ts = np.geomspace(lo_eff, hi, samples) if lo_eff > 0 else np.array([hi])
        vals = [objective(t) for t in ts]
        j = int(np.argmax(vals))
        a, b = ts[max(j - 1, 0)], ts[min(j + 1, len(ts) - 1)]
        val, t = _golden_max(objective, a, b) if b > a else (vals[j], ts[j])
        if val > best_val:
            best_val, best_t = val, t
    return NormResult(best_val, "marcinkiewicz", params, maximizer_t=float(best_t),
                      method="golden-section(1e-10)")


def least_concave_majorant(phi: PiecewiseLinear) -> PiecewiseLinear:
    """Upper concave envelope of the vertices of ``phi`` (monotone chain)."""
    if not isinstance(phi, PiecewiseLinear):
        raise TypeError("least_concave_majorant needs a piecewise-linear weight")
    pts = phi.vertices
    hull: list[tuple[float, float]] = []
    for x, y in pts:
        # pop while the last turn is not strictly clockwise
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append((x, y))
    return PiecewiseLinear(hull)


def psi_from_phi_inv(phi: WeightFunction, closed_form: bool = True) -> WeightFunction:
    """``psi(t) = t / int_0^t ds/phi(s)``.

    Uses the weight's closed-form reciprocal integral when it has one,
    otherwise quadrature on a mesh graded toward 0.  Raises
    :class:`DivergenceError` when ``1/phi`` is not integrable at 0.
    """
    def inner(t: float) -> float:
        if closed_form:
            exact = phi.reciprocal_integral(t)
            if exact is not None:
                return exact
        return integral_to_zero(lambda s: 1.0 / phi(s), t, rtol=1e-12)

    # probe once so divergence is reported at construction
    inner(1e-3)

    def psi(t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t)
        out = np.array([x / inner(float(x)) for x in flat])
        return out.reshape(t.shape)

    name = f"psi[{phi!r}]" + ("" if closed_form else "(quadrature)")
    limit0 = 1.0 / phi.value_at_zero if phi.value_at_zero > 0 else math.nan
    return Derived(psi, name=name, value_at_zero=limit0)


class RangeCheck(NamedTuple):
    sup_ratio: float
    witness_t: float


def tail_moment(psi: WeightFunction, t: float) -> float:
    """``int_t^inf psi(s)/s^2 ds`` via ``u = 1/s``: ``int_0^{1/t} psi(1/u) du``."""
    exact = psi.tail_moment(t)
    if exact is not None:
        return exact
    if psi.slope_at_infinity > 0:
        raise DivergenceError(f"{psi!r}(s)/s does not tend to 0")
    lim = psi.value_at_infinity
    if math.isfinite(lim):
        # bounded integrand; the first skipped sliver is lim * floor
        floor = 1e-300
        return integral_to_zero(lambda u: psi(1.0 / u), 1.0 / t, lower_tail=lambda d: lim * d,
                                floor=min(floor, 1.0 / t))
    return integral_to_zero(lambda u: psi(1.0 / u), 1.0 / t)


def lorentz_range_condition(psi: WeightFunction, phi: WeightFunction,
                            grid: LogGrid = LogGrid()) -> RangeCheck:
    """Sup over the grid of ``int_t^inf psi(s)/s^2 ds`` divided by ``phi(t)/t``."""
    best, best_t = -math.inf, math.nan
    for t in grid.values():
        r = tail_moment(psi, float(t)) / (float(phi(t)) / t)
        if r > best:
            best, best_t = r, float(t)
    return RangeCheck(best, best_t)


class FloorCheck(NamedTuple):
    inf_ratio: float
    witness_t: float
    holds: bool


def _floor_ratio(phi: WeightFunction, ts: np.ndarray) -> np.ndarray:
    return np.asarray(phi(ts), dtype=float) / (ts * np.log1p(1.0 / ts))


def phi_floor_condition(phi: WeightFunction, grid: LogGrid = LogGrid()) -> FloorCheck:
    """Inf over the grid of ``phi(t) / (t log(1 + 1/t))``.

    ``holds`` asks that the infimum be positive and stable when the grid is
    widened by three decades on each side (a ratio drifting to 0 at either
    end shows up as a drop of more than 10%).
    """
    ts = grid.values()
    r = _floor_ratio(phi, ts)
    i = int(np.argmin(r))
    wide = LogGrid(grid.lo * 1e-3, grid.hi * 1e3, grid.points + 120).values()
    wide_inf = float(np.min(_floor_ratio(phi, wide)))
    holds = bool(r[i] > 0 and wide_inf >= 0.9 * r[i])
    return FloorCheck(float(r[i]), float(ts[i]), holds)


def f_space_witness(f: SpectralProfile, g: SpectralProfile) -> bool:
    """Is ``g`` a witness that ``f`` lies in the Cesàro range space of E?"""
    return submajorized_by_cesaro(mu_of_profile(f), g)


def _power_antiderivative(e: float, lo: float, hi: float) -> float:
    """``int_lo^hi t**(e-1) dt``."""
    if e == 0:
        return math.log(hi / lo)
    return (hi ** e - lo ** e) / e


def cesaro_norm_lpq(c: CesaroCurve, pp: float, qq: float, method: str = "auto",
                    rtol: float = 1e-12) -> float:
    """``L_{p,q}`` norm of a Cesàro curve (itself nonincreasing), ``p > 1``, ``q < inf``.

    The first piece is constant and the tail is ``tail/t``, both closed
    form.  For integer q the middle pieces ``(a/t + b)**q t**(q/p - 1)``
    are expanded binomially (all terms nonnegative); otherwise, or with
    ``method="quadrature"``, adaptive Simpson is used.
    """
    if not (pp > 1 and 1 <= qq < math.inf):
        raise ValueError("need p > 1 and 1 <= q < inf")
    if method not in ("auto", "quadrature"):
        raise ValueError("method must be 'auto' or 'quadrature'")
    if len(c.a) == 0:
        return 0.0
    bp = c.breakpoints
    r = qq / pp
    total = (c.b[0] ** qq) * (bp[1] ** r) / r
    integer_q = float(qq).is_integer() and method == "auto"
    for i in range(1, len(c.a)):
        a, b, lo, hi = c.a[i], c.b[i], bp[i], bp[i + 1]
        if integer_q:
            q = int(qq)
            total += sum(math.comb(q, k) * a ** k * b ** (q - k) * _power_antiderivative(r - k, lo, hi)
                         for k in range(q + 1))
        else:
            total += adaptive_simpson(lambda t: (a / t + b) ** qq * t ** (r - 1), lo, hi, rtol=rtol)
    T = bp[-1]
    total += c.tail ** qq * T ** (r - qq) / (qq - r)
    return total ** (1 / qq)


def step_norm_lpq(f: StepFunction, pp: float, qq: float) -> float:
    """``L_{p,q}`` norm of a nonincreasing nonnegative step function."""
    if not (pp >= 1 and 1 <= qq < math.inf):
        raise ValueError("need p >= 1 and 1 <= q < inf")
    r = qq / pp
    W = f.breakpoints
    return float(np.dot(f.values ** qq, (W[1:] ** r - W[:-1] ** r) / r)) ** (1 / qq)
