"""The spectral Hardy–Littlewood maximal function and its classical 1-d cousin."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .rearrange import SpectralProfile, cesaro, mu_of_profile


@dataclass(frozen=True)
class MaximalEvaluation:
    value: float
    witness_radius: float

    def to_dict(self) -> dict:
        return {"value": self.value, "witnessRadius": self.witness_radius}


def _window_maxima(values: np.ndarray, weights: np.ndarray, xs: np.ndarray):
    """Exact sup over closed windows ``[x-r, x+r]`` for every x in ``xs``.

    The windowed average only changes when ``r`` crosses a distance
    ``|x - lambda_j|``, so it suffices to sort atoms by distance and take
    prefix averages at the last atom of each distance group.
    """
    xs = np.asarray(xs, dtype=float)
    if len(values) == 0:
        return np.zeros(len(xs)), np.zeros(len(xs))
    dist = np.abs(xs[:, None] - values[None, :])
    order = np.argsort(dist, axis=1, kind="stable")
    d = np.take_along_axis(dist, order, axis=1)
    w = weights[order]
    lw = (values * weights)[order]
    avg = np.cumsum(lw, axis=1) / np.cumsum(w, axis=1)
    # only the last atom of an equal-distance group closes a real window
    closes = np.ones_like(d, dtype=bool)
    closes[:, :-1] = d[:, 1:] > d[:, :-1]
    avg = np.where(closes, avg, -np.inf)
    best = np.argmax(avg, axis=1)  # first maximum = smallest radius
    rows = np.arange(len(xs))
    return avg[rows, best], d[rows, best]


def ma_point(p: SpectralProfile, x: float) -> MaximalEvaluation:
    """``MA(x)``: largest trace-weighted spectral average over windows centred at x.

    Empty windows count as ``0/0 = 0``; with an empty profile the result is 0.
    """
    if x < 0:
        raise ValueError("the maximal function is defined for x >= 0")
    vals, radii = _window_maxima(p.values, p.weights, np.array([float(x)]))
    value = max(float(vals[0]), 0.0)
    return MaximalEvaluation(value, float(radii[0]) if value > 0 else 0.0)


def ma_values(p: SpectralProfile) -> np.ndarray:
    """``MA(lambda_i)`` for every atom of ``p``, in canonical atom order."""
    vals, _ = _window_maxima(p.values, p.weights, p.values)
    return vals


def ma_operator(p: SpectralProfile) -> SpectralProfile:
    """Functional calculus ``MA(|A|)``: each atom value replaced by ``MA(value)``."""
    return SpectralProfile.from_atoms(zip(ma_values(p), p.weights))


class BoundCheck(NamedTuple):
    holds: bool
    worst_ratio: float
    witness_t: float


def verify_16_bound(p: SpectralProfile, constant: float = 16.0, rtol: float = 1e-9) -> BoundCheck:
    """Check ``mu(t, MA(|A|)) <= 16 (C mu(A))(t)`` for every t > 0.

    The left side is a step function and the right side is continuous and
    nonincreasing, so the ratio peaks at the left limits of the step right
    endpoints.  Ties go to the largest such t.
    """
    if len(p) == 0:
        raise ValueError("profile must be nonempty")
    lhs = mu_of_profile(ma_operator(p))
    rhs = cesaro(mu_of_profile(p))
    ends = lhs.breakpoints[1:]
    ratios = lhs.values / rhs(ends)
    i = len(ratios) - 1 - int(np.argmax(ratios[::-1]))
    worst = float(ratios[i])
    return BoundCheck(worst <= constant * (1 + rtol), worst, float(ends[i]))


def weak_type_sup(p: SpectralProfile) -> tuple[float, float]:
    """``sup_t t * mu(t, MA(|A|))`` and the t attaining it (as a left limit)."""
    f = mu_of_profile(ma_operator(p))
    if len(f.values) == 0:
        return 0.0, 0.0
    prod = f.breakpoints[1:] * f.values
    i = int(np.argmax(prod))
    return float(prod[i]), float(f.breakpoints[i + 1])


class LineStep:
    """Compactly supported step function on the real line.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``; zero
    outside ``[breakpoints[0], breakpoints[-1])``.
    """

    def __init__(self, breakpoints: Sequence[float], values: Sequence[float]):
        bp = np.asarray(breakpoints, dtype=float)
        vals = np.asarray(values, dtype=float)
        if len(bp) < 1 or len(vals) != len(bp) - 1:
            raise ValueError("need exactly one value per interval")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        self.breakpoints = bp
        self.values = vals
        self._abs_prefix = np.concatenate([[0.0], np.cumsum(np.abs(vals) * np.diff(bp))])

    def abs_value(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right")
        padded = np.concatenate([[0.0], np.abs(self.values), [0.0]])
        return padded[idx]

    def abs_integral_to(self, x):
        """``int_{-inf}^x |f|``."""
        x = np.asarray(x, dtype=float)
        if len(self.values) == 0:
            return np.zeros_like(x)
        xc = np.clip(x, self.breakpoints[0], self.breakpoints[-1])
        i = np.clip(np.searchsorted(self.breakpoints, xc, side="right") - 1, 0, len(self.values) - 1)
        return self._abs_prefix[i] + np.abs(self.values[i]) * (xc - self.breakpoints[i])


def classical_max_point(f: LineStep, x: float) -> float:
    """Centred maximal function ``sup_r (1/2r) int_{x-r}^{x+r} |f|``.

    Between radii where ``x +- r`` meets a breakpoint the window mass is
    affine in r, so the average is monotone there; the sup is the larger of
    the ``r -> 0+`` limit and the values at those hitting radii.
    """
    x = float(x)
    radii = np.unique(np.abs(f.breakpoints - x))
    radii = radii[radii > 0]
    left_lim = float(f.abs_value(np.nextafter(x, -np.inf)))
    best = 0.5 * (float(f.abs_value(x)) + left_lim)
    if len(radii):
        mass = f.abs_integral_to(x + radii) - f.abs_integral_to(x - radii)
        best = max(best, float(np.max(mass / (2 * radii))))
    return best


def ma_grid_oracle(p: SpectralProfile, x: float, grid_size: int) -> float:
    """Brute force: best closed-window average over an evenly spaced radius grid."""
    if grid_size < 10:
        raise ValueError("grid_size must be at least 10")
    if len(p) == 0:
        return 0.0
    r_max = x + p.max_value
    if r_max <= 0:
        return 0.0
    radii = r_max * np.arange(1, grid_size + 1) / grid_size
    inside = np.abs(p.values[None, :] - x) <= radii[:, None]
    mass = inside @ (p.values * p.weights)
    weight = inside @ p.weights
    avg = np.divide(mass, weight, out=np.zeros_like(mass), where=weight > 0)
    return float(avg.max())
