"""Small numerical kernels shared across modules: golden-section search and
dyadic improper-integral quadrature near a singular left endpoint."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_min(f: Callable[[float], float], a: float, b: float,
                       xtol: float = 1e-10, max_iter: int = 200) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    a, b = min(a, b), max(a, b)
    c = a + INV_PHI_SQ * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI_SQ * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


@dataclass(frozen=True)
class DyadicResult:
    value: float
    refinements: int
    converged: bool


def dyadic_integral(f: Callable[[float], float], upper: float, *, tol: float = 1e-8,
                    max_refinements: int = 40, piece_rtol: float = 1e-11) -> DyadicResult:
    """Integrate ``f`` over ``(0, upper]`` when ``f`` may blow up at 0.

    The interval is split into dyadic shells ``[upper 2^-(k+1), upper 2^-k]``.
    Partial sums are accelerated with Aitken's delta-squared (a geometric tail
    extrapolation); the integral is declared convergent once consecutive
    accelerated partial sums agree twice in a row to ``tol`` relative.
    ``converged`` is False after ``max_refinements`` shells without agreement.
    """
    if upper <= 0.0:
        return DyadicResult(0.0, 0, True)

    def shell(lo: float, hi: float) -> float:
        val, _ = quad(f, lo, hi, epsabs=0.0, epsrel=piece_rtol, limit=200)
        return val

    partial = shell(upper / 2.0, upper)
    prev_piece = partial
    prev_acc = None
    agreements = 0
    hi = upper / 2.0
    for k in range(1, max_refinements + 1):
        piece = shell(hi / 2.0, hi)
        hi /= 2.0
        partial += piece
        if not math.isfinite(partial):
            return DyadicResult(partial, k, False)
        if piece == 0.0:
            return DyadicResult(partial, k, True)
        ratio = piece / prev_piece if prev_piece != 0.0 else math.inf
        if 0.0 <= ratio < 1.0:
            acc = partial + piece * ratio / (1.0 - ratio)
            scale = max(abs(acc), 1e-300)
            if prev_acc is not None and abs(acc - prev_acc) <= tol * scale:
                agreements += 1
                if agreements >= 2:
                    return DyadicResult(acc, k, True)
            else:
                agreements = 0
            prev_acc = acc
        else:
            prev_acc = None
            agreements = 0
        prev_piece = piece
    return DyadicResult(partial, max_refinements, False)
