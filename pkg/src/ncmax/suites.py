"""Randomised verification suites and worked examples, reported as JSON documents."""

from __future__ import annotations

import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import weights as W
from .ingest import GeneratorSpec, profile_from_matrix, random_matrix, random_profile
from .maximal import (ma_grid_oracle, ma_operator, ma_point, verify_16_bound,
                      weak_type_sup)
from .rearrange import (CesaroCurve, SpectralProfile, StepFunction, cesaro,
                        mu_from_distribution, mu_of_profile, split_at_value)
from .spaces import (LogGrid, cesaro_norm_lpq, lorentz_range_condition, norm_l1_cap_linf,
                     norm_l1_plus_linf, norm_lorentz, norm_lp, phi_floor_condition,
                     psi_from_phi_inv, step_norm_lpq)

SCHEMA = "ncmax/1"
SLACK = 1e-9


@dataclass
class ReportDocument:
    suite: str
    trials: int
    seed: int
    passed: bool
    violations: list = field(default_factory=list)
    extremal_ratio: float = 0.0
    extremal_witness: dict | None = None
    runtime_millis: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "suite": self.suite,
            "trials": self.trials,
            "seed": self.seed,
            "passed": self.passed,
            "violations": self.violations,
            "extremalRatio": self.extremal_ratio,
            "extremalWitness": self.extremal_witness,
            "runtimeMillis": self.runtime_millis,
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


@dataclass
class Trial:
    ratio: float
    witness: dict
    violations: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)


def _violation(index: int, witness, lhs: float, rhs: float, payload: dict) -> dict:
    return {"trialIndex": index, "witness": witness, "lhs": lhs, "rhs": rhs, "input": payload}


def _gen(seed: int) -> GeneratorSpec:
    return GeneratorSpec(seed=seed)


# -- individual trials --------------------------------------------------------

def _theorem16(seed: int, i: int) -> Trial:
    p = random_profile(_gen(seed), i)
    check = verify_16_bound(p, rtol=SLACK)
    wit = {"t": check.witness_t, "profile": p.to_dict()}
    viol = []
    if not check.holds:
        lhs = float(mu_of_profile(ma_operator(p)).left_limit(check.witness_t))
        rhs = 16 * float(cesaro(mu_of_profile(p))(check.witness_t))
        viol.append(_violation(i, check.witness_t, lhs, rhs, p.to_dict()))
    return Trial(check.worst_ratio, wit, viol)


def _probe_ts(rng: np.random.Generator, p: SpectralProfile, n: int = 16) -> np.ndarray:
    W = p.total_weight
    half = n // 2
    at_breaks = rng.choice(p.cumulative, size=half)
    free = np.exp(rng.uniform(math.log(W * 1e-3), math.log(2 * W), n - half))
    return np.concatenate([at_breaks, free])


def _decomposition(seed: int, i: int) -> Trial:
    g = _gen(seed)
    p = random_profile(g, i)
    rng = g.rng(i, stream=7)
    f, c = mu_of_profile(p), cesaro(mu_of_profile(p))
    worst, wit, viol = 0.0, None, []
    for t in _probe_ts(rng, p):
        head, tail = split_at_value(p, float(f(t)))
        lhs = head.l1 + t * tail.max_value
        rhs = 2 * t * float(c(t))
        r = lhs / rhs
        if r > worst:
            worst, wit = r, {"t": float(t), "profile": p.to_dict()}
        if lhs > rhs * (1 + SLACK):
            viol.append(_violation(i, float(t), lhs, rhs, p.to_dict()))
    return Trial(worst, wit, viol)


def _sublinearity(seed: int, i: int) -> Trial:
    g = _gen(seed)
    p = random_profile(g, i)
    rng = g.rng(i, stream=8)
    t_cut = float(np.exp(rng.uniform(math.log(p.total_weight * 1e-3), math.log(p.total_weight))))
    v = float(mu_of_profile(p)(t_cut))
    head, tail = split_at_value(p, v)
    xs = np.concatenate([rng.choice(p.values, size=8),
                         rng.uniform(0, 1.2 * p.max_value, size=8)])
    worst, wit, viol = 0.0, None, []
    for x in xs:
        lhs = ma_point(p, x).value
        rhs = ma_point(head, x).value + ma_point(tail, x).value
        r = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
        if r > worst:
            worst, wit = r, {"x": float(x), "cut": v, "profile": p.to_dict()}
        if lhs > rhs * (1 + SLACK):
            viol.append(_violation(i, {"x": float(x), "cut": v}, lhs, rhs, p.to_dict()))
    return Trial(worst, wit, viol)


TRIANGLE_GRID = np.arange(1, 17) / 2.0


def _matrix_pair(seed: int, i: int):
    g = _gen(seed)
    a = random_matrix(g, i, symmetric=True, stream=1)
    b = random_matrix(g, i, symmetric=True, stream=2)
    return a, b


def _triangle_svf(seed: int, i: int) -> Trial:
    a, b = _matrix_pair(seed, i)
    fa, fb = mu_of_profile(profile_from_matrix(a)), mu_of_profile(profile_from_matrix(b))
    fab = mu_of_profile(profile_from_matrix(a + b))
    T, S = np.meshgrid(TRIANGLE_GRID, TRIANGLE_GRID, indexing="ij")
    lhs = fab(T + S)
    rhs = fa(T) + fb(S)
    ratio = np.divide(lhs, rhs, out=np.zeros_like(lhs), where=rhs > 0)
    ratio = np.where((rhs == 0) & (lhs > 0), np.inf, ratio)
    k = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    payload = {"A": a.to_array().tolist(), "B": b.to_array().tolist()}
    viol = [_violation(i, {"t": float(T[j]), "s": float(S[j])}, float(lhs[j]), float(rhs[j]), payload)
            for j in zip(*np.nonzero(lhs > rhs * (1 + SLACK)))]
    return Trial(float(ratio[k]), {"t": float(T[k]), "s": float(S[k]), **payload}, viol)


def _weak_type(seed: int, i: int) -> Trial:
    p = random_profile(_gen(seed), i)
    sup, t = weak_type_sup(p)
    ratio = sup / p.l1
    viol = [] if sup <= 16 * p.l1 * (1 + SLACK) else [_violation(i, t, sup, 16 * p.l1, p.to_dict())]
    return Trial(ratio, {"t": t, "profile": p.to_dict()}, viol)


def _linf_contraction(seed: int, i: int) -> Trial:
    p = random_profile(_gen(seed), i)
    top = ma_operator(p).max_value
    ratio = top / p.max_value
    viol = [] if ratio <= 1 + 1e-12 else [_violation(i, None, top, p.max_value, p.to_dict())]
    return Trial(ratio, {"profile": p.to_dict()}, viol)


HARDY_PAIRS = ((2.0, 2.0), (2.0, 1.0), (1.5, 3.0))


def hardy_ratio(f: StepFunction, pp: float, qq: float, method: str = "auto") -> float:
    return cesaro_norm_lpq(cesaro(f), pp, qq, method=method) / step_norm_lpq(f, pp, qq)


def _hardy(seed: int, i: int) -> Trial:
    p = random_profile(_gen(seed), i)
    f = mu_of_profile(p)
    ratios = {f"{pp:g},{qq:g}": hardy_ratio(f, pp, qq) for pp, qq in HARDY_PAIRS}
    r22 = ratios["2,2"]
    viol = []
    if not r22 <= 2 + SLACK:
        viol.append(_violation(i, None, r22, 2.0, p.to_dict()))
    for key, r in ratios.items():
        if not math.isfinite(r):
            viol.append(_violation(i, key, r, math.inf, p.to_dict()))
    return Trial(r22, {"profile": p.to_dict()}, viol, extras=ratios)


def _norm_family():
    return {
        "lp:1": lambda q: norm_lp(q, 1).value,
        "lp:2": lambda q: norm_lp(q, 2).value,
        "lp:3": lambda q: norm_lp(q, 3).value,
        "lorentz:power:0.5": lambda q: norm_lorentz(q, W.Power(0.5)).value,
        "l1plusinf": lambda q: norm_l1_plus_linf(q).value,
        "l1capinf": lambda q: norm_l1_cap_linf(q).value,
    }


def _norms_triangle(seed: int, i: int) -> Trial:
    a, b = _matrix_pair(seed, i)
    pa, pb, pab = (profile_from_matrix(m) for m in (a, b, a + b))
    worst, wit, viol = 0.0, None, []
    payload = {"A": a.to_array().tolist(), "B": b.to_array().tolist()}
    for name, norm in _norm_family().items():
        lhs, rhs = norm(pab), norm(pa) + norm(pb)
        r = lhs / rhs
        if r > worst:
            worst, wit = r, {"norm": name, **payload}
        if lhs > rhs * (1 + SLACK):
            viol.append(_violation(i, name, lhs, rhs, payload))
    return Trial(worst, wit, viol)


ORACLE_GRID = 10_000


def _oracle_ma(seed: int, i: int) -> Trial:
    g = _gen(seed)
    p = random_profile(g, i)
    rng = g.rng(i, stream=9)
    x = float(rng.choice(p.values)) if rng.random() < 0.5 else float(rng.uniform(0, 1.5 * p.max_value))
    exact = ma_point(p, x).value
    brute = ma_grid_oracle(p, x, ORACLE_GRID)
    ratio = brute / exact
    viol = [] if ratio <= 1 + 1e-12 else [_violation(i, x, brute, exact, p.to_dict())]
    return Trial(ratio, {"x": x, "profile": p.to_dict()}, viol)


def _oracle_mu(seed: int, i: int) -> Trial:
    g = _gen(seed)
    p = random_profile(g, i)
    rng = g.rng(i, stream=10)
    f = mu_of_profile(p)
    ts = np.concatenate([rng.choice(p.cumulative, size=5),
                         rng.uniform(0, 1.1 * p.total_weight, size=5)])
    ts = ts[ts > 0]
    worst, wit, viol = 0.0, None, []
    for t in ts:
        a, b = mu_from_distribution(p, float(t)), float(f(t))
        diff = abs(a - b)
        if diff > worst or wit is None:
            worst, wit = diff, {"t": float(t), "profile": p.to_dict()}
        if a != b:
            viol.append(_violation(i, float(t), a, b, p.to_dict()))
    return Trial(worst, wit, viol)


SUITES: dict[str, Callable[[int, int], Trial]] = {
    "theorem-16": _theorem16,
    "decomposition": _decomposition,
    "sublinearity": _sublinearity,
    "triangle-svf": _triangle_svf,
    "weak-type": _weak_type,
    "linf-contraction": _linf_contraction,
    "hardy-constants": _hardy,
    "norms-triangle": _norms_triangle,
    "oracle-ma": _oracle_ma,
    "oracle-mu": _oracle_mu,
}


def _run_chunk(name: str, seed: int, indices: range) -> list[Trial]:
    fn = SUITES[name]
    return [fn(seed, i) for i in indices]


def run_suite(name: str, trials: int, seed: int, jobs: int = 1) -> ReportDocument:
    """Run ``trials`` seeded trials of a suite.

    Trial ``i`` draws its inputs from ``(seed, i)`` only, and the report
    keeps the first maximum in trial order, so ``jobs`` never changes it.
    """
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if trials < 0:
        raise ValueError("trials must be >= 0")
    start = time.perf_counter()
    if jobs > 1 and trials > 1:
        step = math.ceil(trials / jobs)
        chunks = [range(k, min(k + step, trials)) for k in range(0, trials, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_run_chunk, [name] * len(chunks), [seed] * len(chunks), chunks)
            results = [t for part in parts for t in part]
    else:
        results = _run_chunk(name, seed, range(trials))
    violations = [v for t in results for v in t.violations]
    extremal, witness = 0.0, None
    for t in results:
        if t.ratio > extremal or witness is None:
            extremal, witness = t.ratio, t.witness
    extras = {}
    for t in results:
        for k, v in t.extras.items():
            extras[f"max_ratio[{k}]"] = max(extras.get(f"max_ratio[{k}]", -math.inf), v)
    ms = int(round((time.perf_counter() - start) * 1000))
    return ReportDocument(name, trials, seed, not violations, violations, float(extremal),
                          witness, ms, extras)


# -- worked examples ------------------------------------------------------------

EXAMPLE1_RANGE = W.LogType(1.0, 1.0)     # t log(1 + 1/t)
EXAMPLE1_DOMAIN = W.LogType(2.0, 0.5)    # t log^2(1 + 1/sqrt t)


def reciprocal_log_closed_form(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.where(t <= 1, 1.0, t / (1 + np.log(np.maximum(t, 1.0))))


def run_example(example: int, grid: LogGrid = LogGrid()) -> ReportDocument:
    start = time.perf_counter()
    ts = grid.values()
    violations: list = []
    if example == 1:
        floor = phi_floor_condition(EXAMPLE1_DOMAIN, grid)
        rng = lorentz_range_condition(EXAMPLE1_RANGE, EXAMPLE1_DOMAIN, grid)
        if not floor.holds:
            violations.append(_violation(0, floor.witness_t, floor.inf_ratio, 0.0,
                                         {"condition": "phi floor"}))
        if not math.isfinite(rng.sup_ratio):
            violations.append(_violation(0, rng.witness_t, rng.sup_ratio, math.inf,
                                         {"condition": "range"}))
        extras = {"supRatio": rng.sup_ratio, "supWitnessT": rng.witness_t,
                  "infRatio": floor.inf_ratio, "infWitnessT": floor.witness_t,
                  "floorHolds": floor.holds, "psi": EXAMPLE1_RANGE.to_dict(),
                  "phi": EXAMPLE1_DOMAIN.to_dict()}
        extremal, witness = rng.sup_ratio, {"t": rng.witness_t}
    elif example == 2:
        phi = W.MaxOne()
        closed = reciprocal_log_closed_form(ts)
        worst_err = {}
        for label, psi in (("hook", psi_from_phi_inv(phi)),
                           ("quadrature", psi_from_phi_inv(phi, closed_form=False))):
            vals = np.asarray(psi(ts), dtype=float)
            err = np.abs(vals - closed) / closed
            worst_err[label] = float(err.max())
            for j in np.nonzero(err > 1e-8)[0]:
                violations.append(_violation(int(j), float(ts[j]), float(vals[j]),
                                             float(closed[j]), {"path": label}))
        psi_vals = np.asarray(psi_from_phi_inv(phi)(ts), dtype=float)
        band = psi_vals * np.log1p(ts) / ts
        extras = {"c1": float(band.min()), "c2": float(band.max()),
                  "c1WitnessT": float(ts[np.argmin(band)]), "c2WitnessT": float(ts[np.argmax(band)]),
                  "maxRelErr": worst_err, "phi": phi.to_dict()}
        extremal, witness = float(band.max()), {"t": float(ts[np.argmax(band)])}
    else:
        raise ValueError("example must be 1 or 2")
    extras["grid"] = {"lo": grid.lo, "hi": grid.hi, "points": grid.points}
    ms = int(round((time.perf_counter() - start) * 1000))
    return ReportDocument(f"example-{example}", grid.points, 0, not violations, violations,
                          float(extremal), witness, ms, extras)


# -- curve emission -------------------------------------------------------------

def emit_curve(obj, samples: int, t_range: tuple[float, float]) -> str:
    """CSV ``t,value`` at log-spaced t plus every breakpoint in range.

    Step functions (and profiles, via their rearrangement) get an extra
    ``t-`` row with the left limit just before each breakpoint.
    """
    lo, hi = t_range
    if samples < 2:
        raise ValueError("need at least 2 samples")
    if not (0 < lo < hi):
        raise ValueError("log spacing needs 0 < t_lo < t_hi")
    if isinstance(obj, SpectralProfile):
        obj = mu_of_profile(obj)
    if not isinstance(obj, (StepFunction, CesaroCurve)):
        raise TypeError("emit_curve takes a StepFunction, CesaroCurve or SpectralProfile")
    ts = np.geomspace(lo, hi, samples)
    bps = obj.breakpoints[(obj.breakpoints >= lo) & (obj.breakpoints <= hi)]
    ts = np.union1d(ts, bps)
    breaks = set(bps.tolist())
    buf = io.StringIO()
    buf.write("t,value\n")
    for t in ts:
        if isinstance(obj, StepFunction) and t in breaks:
            buf.write(f"{t:.17g}-,{float(obj.left_limit(t)):.17g}\n")
        buf.write(f"{t:.17g},{float(obj(t)):.17g}\n")
    return buf.getvalue()
