"""Spectral profiles, singular value functions and the Cesàro operator.

A :class:`SpectralProfile` is the finite spectral data of ``|A|`` under the
trace: a list of eigenvalues with trace weights.  Everything else in the
package is computed from it in closed form.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MERGE_RTOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Canonical atom list: values strictly decreasing, weights positive.

    Construct through :meth:`from_atoms` (or the module helpers), which
    sorts, validates and merges values that agree to relative ``1e-12``.
    """

    values: np.ndarray
    weights: np.ndarray
    cumulative: np.ndarray = field(repr=False)

    @classmethod
    def from_atoms(cls, atoms: Iterable[Sequence[float]]) -> "SpectralProfile":
        pairs = [(float(v), float(w)) for v, w in atoms]
        for v, w in pairs:
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"atom value must be finite and >= 0, got {v!r}")
            if not (math.isfinite(w) and w > 0):
                raise ValueError(f"atom weight must be finite and > 0, got {w!r}")
        pairs.sort(key=lambda vw: -vw[0])
        merged: list[list[float]] = []
        for v, w in pairs:
            if merged:
                top = merged[-1]
                ref = top[0] if top[4] else top[1] / top[2]
                if abs(ref - v) <= MERGE_RTOL * max(ref, v):
                    # running sum of value*weight keeps the L1 mass exact-ish
                    top[1] += v * w
                    top[2] += w
                    top[3] += 1
                    top[4] = top[4] and v == top[0]
                    continue
            merged.append([v, v * w, w, 1, True])
        # groups of bit-identical values (singletons included) keep that value exactly
        values = [m[0] if m[4] else m[1] / m[2] for m in merged]
        weights = [m[2] for m in merged]
        return cls(_frozen(values), _frozen(weights), _frozen(np.cumsum(weights)))

    @classmethod
    def empty(cls) -> "SpectralProfile":
        return cls.from_atoms([])

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(zip(self.values.tolist(), self.weights.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectralProfile):
            return NotImplemented
        return (np.array_equal(self.values, other.values)
                and np.array_equal(self.weights, other.weights))

    def __repr__(self) -> str:
        return f"SpectralProfile({list(self)!r})"

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(self)

    @property
    def total_weight(self) -> float:
        return float(self.cumulative[-1]) if len(self) else 0.0

    @property
    def max_value(self) -> float:
        return float(self.values[0]) if len(self) else 0.0

    @property
    def l1(self) -> float:
        """Trace of ``|A|``: the sum of value times weight."""
        return float(np.dot(self.values, self.weights)) if len(self) else 0.0

    def scale(self, c: float) -> "SpectralProfile":
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return SpectralProfile.from_atoms((c * v, w) for v, w in self)

    def to_dict(self) -> dict:
        return {"atoms": [{"value": v, "weight": w} for v, w in self]}

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralProfile":
        try:
            atoms = data["atoms"]
            return cls.from_atoms((a["value"], a["weight"]) for a in atoms)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed profile JSON: {exc}") from exc


def profile(atoms: Iterable[Sequence[float]] = ()) -> SpectralProfile:
    return SpectralProfile.from_atoms(atoms)


def load_profile(text: str) -> SpectralProfile:
    return SpectralProfile.from_dict(json.loads(text))


def dump_profile(p: SpectralProfile) -> str:
    return json.dumps(p.to_dict())


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-open piecewise constant function on ``[0, inf)``.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``; the
    function vanishes from ``breakpoints[-1]`` on.  Prefix integrals at the
    breakpoints are cached in ``prefix``.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    prefix: np.ndarray = field(repr=False)

    def __init__(self, breakpoints: Sequence[float], values: Sequence[float]):
        bp = np.array(breakpoints, dtype=float)
        vals = np.array(values, dtype=float)
        if len(bp) == 0:
            bp = np.zeros(1)
        if bp[0] != 0.0:
            raise ValueError("first breakpoint must be 0")
        if len(vals) != len(bp) - 1:
            raise ValueError("need exactly one value per interval")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise ValueError("breakpoints and values must be finite")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        prefix = np.concatenate([[0.0], np.cumsum(vals * np.diff(bp))])
        object.__setattr__(self, "breakpoints", _frozen(bp))
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "prefix", _frozen(prefix))

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls([0.0], [])

    @property
    def support_end(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def total_integral(self) -> float:
        return float(self.prefix[-1])

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0)) and (
            len(self.values) == 0 or self.values[-1] >= 0)

    def __call__(self, t):
        """Right-continuous evaluation."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        padded = np.concatenate([[0.0], self.values, [0.0]])
        out = padded[idx]
        out = np.where(t < 0, 0.0, out)
        return out if out.ndim else float(out)

    def left_limit(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="left")
        padded = np.concatenate([[0.0], self.values, [0.0]])
        out = padded[idx]
        return out if out.ndim else float(out)

    def integral(self, t):
        """Exact ``int_0^t f``; piecewise linear in ``t``."""
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, self.support_end)
        k = len(self.values)
        if k == 0:
            out = np.zeros_like(tc)
        else:
            i = np.clip(np.searchsorted(self.breakpoints, tc, side="right") - 1, 0, k - 1)
            out = self.prefix[i] + self.values[i] * (tc - self.breakpoints[i])
        return out if out.ndim else float(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,v\n")
        for t, v in zip(self.breakpoints[1:], self.values):
            buf.write(f"{t:.17g},{v:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["t", "v"]:
            raise ValueError('step function CSV must start with header "t,v"')
        bps, vals = [0.0], []
        for row in rows[1:]:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"bad step function row: {row!r}")
            bps.append(float(row[0]))
            vals.append(float(row[1]))
        return cls(bps, vals)

    def __repr__(self) -> str:
        return f"StepFunction({self.breakpoints.tolist()!r}, {self.values.tolist()!r})"


@dataclass(frozen=True, eq=False)
class CesaroCurve:
    """``(Cf)(t) = a_i / t + b_i`` on ``[t_{i-1}, t_i)`` and ``tail / t`` beyond."""

    breakpoints: np.ndarray
    a: np.ndarray
    b: np.ndarray
    tail: float

    @property
    def support_end(self) -> float:
        return float(self.breakpoints[-1])

    def _piece(self, t):
        k = len(self.a)
        return np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1, 0, max(k - 1, 0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("Cesàro curve is defined for t >= 0")
        k = len(self.a)
        if k == 0:
            out = np.zeros_like(t)
        else:
            i = self._piece(t)
            safe = np.where(t > 0, t, 1.0)
            inside = self.a[i] / safe + self.b[i]
            # a_1 == 0, so the t -> 0+ limit is b_1
            inside = np.where(t > 0, inside, self.b[0])
            out = np.where(t < self.support_end, inside, self.tail / np.where(t > 0, t, 1.0))
        return out if out.ndim else float(out)

    def integral(self, t):
        """Exact ``int_0^t Cf`` from the per-piece antiderivative ``a ln s + b s``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("t must be >= 0")
        k = len(self.a)
        if k == 0:
            out = np.zeros_like(t)
            return out if out.ndim else float(out)
        bp = self.breakpoints
        lo, hi = bp[:-1], bp[1:]
        full = np.zeros(k)
        full[1:] = self.a[1:] * np.log(hi[1:] / lo[1:])
        full += self.b * (hi - lo)
        cum = np.concatenate([[0.0], np.cumsum(full)])
        tc = np.minimum(t, self.support_end)
        i = self._piece(tc)
        start = lo[i]
        safe_start = np.where(start > 0, start, 1.0)
        safe_tc = np.where(tc > 0, tc, 1.0)
        log_part = np.where(start > 0, self.a[i] * np.log(safe_tc / safe_start), 0.0)
        out = cum[i] + log_part + self.b[i] * (tc - start)
        beyond = t > self.support_end
        if np.any(beyond):
            out = np.where(beyond, cum[-1] + self.tail * np.log(np.where(beyond, t, 1.0) / self.support_end), out)
        return out if out.ndim else float(out)


def mu_of_profile(p: SpectralProfile) -> StepFunction:
    """Decreasing rearrangement: ``lambda_i`` on ``[W_{i-1}, W_i)``."""
    if len(p) == 0:
        return StepFunction.zero()
    bps = np.concatenate([[0.0], p.cumulative])
    return StepFunction(bps, p.values)


def distribution(p: SpectralProfile, s: float) -> float:
    """Trace of the spectral projection of ``|A|`` onto ``(s, inf)``."""
    # values are strictly decreasing: the atoms above s form a prefix
    n_above = int(np.count_nonzero(p.values > s))
    return float(p.cumulative[n_above - 1]) if n_above else 0.0


def mu_from_distribution(p: SpectralProfile, t: float) -> float:
    """``inf{s >= 0 : n(s) <= t}`` found among the jump points of ``n``."""
    if not t > 0:
        raise ValueError("t must be positive")
    # n is right-continuous and constant between atom values, so the
    # infimum is attained at 0 or at an atom value; scan ascending
    candidates = np.concatenate([[0.0], p.values[::-1]])
    lo, hi = 0, len(candidates) - 1
    if distribution(p, candidates[lo]) <= t:
        return 0.0
    # invariant: n(candidates[lo]) > t >= n(candidates[hi])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if distribution(p, candidates[mid]) <= t:
            hi = mid
        else:
            lo = mid
    return float(candidates[hi])


def integrate_mu(f: StepFunction, t: float) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    return f.integral(t)


def cesaro(f: StepFunction) -> CesaroCurve:
    bp = f.breakpoints
    a = f.prefix[:-1] - f.values * bp[:-1]
    if len(a):
        a[0] = 0.0
    return CesaroCurve(_frozen(bp), _frozen(a), _frozen(f.values), f.total_integral)


def integral_of_cesaro(c: CesaroCurve, t: float) -> float:
    if not t > 0:
        raise ValueError("t must be positive")
    return c.integral(t)


def _check_monotone(*fs: StepFunction) -> None:
    for f in fs:
        if not f.is_nonincreasing():
            raise ValueError("step function must be nonnegative and nonincreasing")


def submajorizes(g: StepFunction, f: StepFunction, rtol: float = 1e-12) -> bool:
    """True iff ``f`` is submajorized by ``g``: ``int_0^t f <= int_0^t g`` for all t."""
    _check_monotone(g, f)
    ts = np.union1d(g.breakpoints, f.breakpoints)
    F, G = f.integral(ts), g.integral(ts)
    return bool(np.all(F <= G + rtol * np.maximum(np.abs(F), np.abs(G))))


def submajorized_by_cesaro(f: StepFunction, g: SpectralProfile, rtol: float = 1e-12) -> bool:
    """True iff ``f`` is submajorized by the Cesàro transform of ``mu(g)``."""
    _check_monotone(f)
    c = cesaro(mu_of_profile(g))
    ts = np.union1d(f.breakpoints, c.breakpoints)
    ts = ts[ts > 0]
    # tangency points: slope v of the linear piece meets a/s + b
    extra = []
    for v in np.unique(f.values):
        for a, b in zip(c.a, c.b):
            if v > b and a > 0:
                extra.append(a / (v - b))
        if v > 0 and c.tail > 0:
            extra.append(c.tail / v)
    if extra:
        ts = np.union1d(ts, np.array(extra))
    if len(ts) == 0:
        return True
    F, G = f.integral(ts), c.integral(ts)
    return bool(np.all(F <= G + rtol * np.maximum(np.abs(F), np.abs(G))))


def split_at_value(p: SpectralProfile, v: float) -> tuple[SpectralProfile, SpectralProfile]:
    """Spectral cut: atoms above ``v`` and atoms at or below ``v``."""
    if v < 0:
        raise ValueError("cut value must be >= 0")
    head = [(x, w) for x, w in p if x > v]
    tail = [(x, w) for x, w in p if x <= v]
    return SpectralProfile.from_atoms(head), SpectralProfile.from_atoms(tail)
