"""Adaptive Simpson quadrature, vectorised over the active subintervals."""

from __future__ import annotations

import math

import numpy as np

_EPS = np.finfo(float).eps


class DivergenceError(ValueError):
    """An improper integral does not converge (or cannot be shown to)."""


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-10, atol: float = 0.0,
                     max_depth: int = 40) -> float:
    """Integrate a vectorised ``f`` over ``[a, b]``.

    Starts from 16 panels; a panel is accepted once the Richardson error
    estimate ``|S2 - S1| / 15`` is within its share of the tolerance.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = np.linspace(a, b, 17)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    f_all = np.asarray(f(np.concatenate([edges, mid])), dtype=float)
    fe, fm = f_all[:17], f_all[17:]
    fa, fb = fe[:-1], fe[1:]
    whole = (hi - lo) / 6 * (fa + 4 * fm + fb)
    total_guess = abs(whole.sum())
    tol_total = max(atol, rtol * total_guess)
    tol = np.full(len(lo), tol_total / len(lo))
    acc = 0.0
    depth = 0
    while len(lo):
        m = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + m), 0.5 * (m + hi)
        vals = np.asarray(f(np.concatenate([lm, rm])), dtype=float)
        flm, frm = vals[: len(lo)], vals[len(lo):]
        left = (m - lo) / 6 * (fa + 4 * flm + fm)
        right = (hi - m) / 6 * (fm + 4 * frm + fb)
        err = left + right - whole
        # below roundoff the estimate cannot improve; accept
        ok = np.abs(err) <= np.maximum(15 * tol, 64 * _EPS * (np.abs(left) + np.abs(right)))
        if depth >= max_depth or len(lo) > 200_000:
            ok[:] = True
        acc += float(np.sum((left + right + err / 15)[ok]))
        keep = ~ok
        if not keep.any():
            break
        lo_k, m_k, hi_k = lo[keep], m[keep], hi[keep]
        lo = np.concatenate([lo_k, m_k])
        hi = np.concatenate([m_k, hi_k])
        fa_n = np.concatenate([fa[keep], fm[keep]])
        fb_n = np.concatenate([fm[keep], fb[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        tol = np.concatenate([tol[keep], tol[keep]]) / 2
        fa, fb = fa_n, fb_n
        depth += 1
    return sign * acc


def integral_to_zero(h, upper: float, rtol: float = 1e-10, chunk: float = 4.0,
                     max_chunks: int = 170, lower_tail=None, floor: float | None = None) -> float:
    """``int_0^upper h(s) ds`` on a mesh graded geometrically toward 0.

    Works in ``v = ln s`` and integrates ``h(e^v) e^v`` in chunks of width
    ``chunk`` moving toward ``-inf``.  Stops once a chunk adds less than
    ``1e-15`` of the running total twice in a row; if ``lower_tail`` is
    given, integration stops at ``floor`` and ``lower_tail(floor)`` supplies
    ``int_0^floor h``.  Raises :class:`DivergenceError` when the chunks do
    not die out before ``e^(-chunk * max_chunks)``.
    """
    if upper <= 0:
        return 0.0

    def g(v):
        s = np.exp(v)
        return np.asarray(h(s), dtype=float) * s

    top = math.log(upper)
    if lower_tail is not None:
        bottom = math.log(min(floor, upper))
        body = adaptive_simpson(g, bottom, top, rtol=rtol) if bottom < top else 0.0
        return body + float(lower_tail(math.exp(bottom)))
    total = 0.0
    quiet = 0
    for k in range(max_chunks):
        b = top - k * chunk
        piece = adaptive_simpson(g, b - chunk, b, rtol=rtol)
        if not math.isfinite(piece):
            raise DivergenceError("integrand is not finite near 0")
        total += piece
        if abs(piece) <= 1e-15 * abs(total) or (total == 0 and piece == 0 and k > 2):
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
    raise DivergenceError(
        f"improper integral near 0 not converging (running total {total:.6g} after "
        f"{max_chunks} chunks down to s = exp({top - max_chunks * chunk:.0f}))")
