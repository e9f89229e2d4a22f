"""Threshold machinery for the simplex relay closed forms.

With the relay joining after the block fraction x, layer decodability at the
destination reduces to nu_r exceeding a threshold curve in nu_s.  This module
provides those curves: the auxiliary factor t, the layer-1 thresholds (the
F family for equal and K for unequal relay allocation), the layer-2 threshold
U, the point below which layer 1 is undecodable for any nu_r, and the
scanner that partitions [v_lo, eta1] by which threshold dominates.

For the derivation of t and the thresholds from the phase-wise mutual
information balance see docs/conformance.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import PowerConfig, TwoLayerAllocation, decoding_times, layer_rates

__all__ = [
    "BoundContext",
    "IntervalPartition",
    "t_factor",
    "relay_threshold_bound",
    "u_bound",
    "discontinuity_point",
    "find_intersections",
]

_EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class BoundContext:
    """Frozen inputs of the threshold curves.

    ``x`` is the effective relay decoding time used in all bounds (the
    layer-2 time, which already dominates the layer-1 time by construction);
    x = 1 is the no-relay degenerate case and is rejected here because the
    callers route it to direct transmission.
    """

    alloc: TwoLayerAllocation
    cfg: PowerConfig
    x: float
    r1: float
    r2: float

    def __post_init__(self):
        if not 0.0 <= self.x < 1.0:
            raise ValueError(f"x must lie in [0, 1), got {self.x!r}")

    @classmethod
    def from_config(cls, alloc: TwoLayerAllocation, cfg: PowerConfig) -> "BoundContext":
        r1, r2 = layer_rates(alloc, cfg.p_s)
        x = decoding_times(alloc, cfg).eps2
        return cls(alloc=alloc, cfg=cfg, x=x, r1=r1, r2=r2)

    @property
    def eta1(self) -> float:
        return self.alloc.eta1

    @property
    def eta2(self) -> float:
        return self.alloc.eta2


def _log_g(v_s, alloc: TwoLayerAllocation, p_s: float):
    """log of G = (1 + S) / (1 + alpha_bar*S), the solo layer-1 SINR term."""
    s = np.asarray(v_s, dtype=float) * p_s
    return np.log1p(s) - np.log1p(alloc.alpha_bar * s)


def _t_values(v_s, ctx: BoundContext):
    """t = exp((r1 - x*log G)/(1 - x)); the layer-1 balance solved for the
    combined-phase SINR.  Monotone decreasing in v_s, equal to e^{r1} at eta1."""
    log_t = (ctx.r1 - ctx.x * _log_g(v_s, ctx.alloc, ctx.cfg.p_s)) / (1.0 - ctx.x)
    with np.errstate(over="ignore"):
        return np.where(log_t > _EXP_OVERFLOW, np.inf, np.exp(log_t))


def t_factor(v_s: float, ctx: BoundContext) -> float:
    return float(_t_values(v_s, ctx))


def _k_values(v_s, ctx: BoundContext):
    """Layer-1 threshold on nu_r (K family; equals F when beta = alpha).

    nu_r >= (-S (1 - t*alpha_bar) - (1 - t)) / ((1 - t*beta_bar) P_r),
    valid where 1 - t*beta_bar > 0.  Returns +inf where the denominator is
    nonpositive (the pre-discontinuity region: undecodable for any nu_r).
    """
    t = _t_values(v_s, ctx)
    s = np.asarray(v_s, dtype=float) * ctx.cfg.p_s
    ab = ctx.alloc.alpha_bar
    bb = ctx.alloc.beta_bar
    denom = 1.0 - t * bb
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (-s * (1.0 - t * ab) - (1.0 - t)) / (denom * ctx.cfg.p_r)
    return np.where(denom > 0.0, val, np.inf)


def relay_threshold_bound(v_s: float, ctx: BoundContext) -> float:
    """Scalar layer-1 threshold; raises in the pre-discontinuity region."""
    t = t_factor(v_s, ctx)
    if 1.0 - t * ctx.alloc.beta_bar <= 0.0:
        raise ValueError(
            f"v_s={v_s!r} lies before the layer-1 discontinuity (1 - t*beta_bar <= 0)")
    return float(_k_values(v_s, ctx))


def _u_values(v_s, ctx: BoundContext, denom_fraction: float):
    """Layer-2 threshold U = Z ((Z e^{-r2})^{1/(x-1)} - 1) / (fraction * P_r),
    with Z = 1 + v_s*alpha_bar*P_s.  Zero at eta2, negative beyond."""
    z = 1.0 + np.asarray(v_s, dtype=float) * ctx.alloc.alpha_bar * ctx.cfg.p_s
    log_pow = (np.log(z) - ctx.r2) / (ctx.x - 1.0)
    with np.errstate(over="ignore"):
        powed = np.where(log_pow > _EXP_OVERFLOW, np.inf, np.exp(log_pow))
    numer = z * (powed - 1.0)
    if denom_fraction > 0.0:
        return numer / (denom_fraction * ctx.cfg.p_r)
    # all relay power on layer 1: the relay cannot help layer 2 at all
    return np.where(numer > 0.0, np.inf, np.where(numer < 0.0, -np.inf, 0.0))


def u_bound(v_s: float, ctx: BoundContext, denom_fraction: float) -> float:
    return float(_u_values(v_s, ctx, denom_fraction))


def discontinuity_point(ctx: BoundContext, fraction: float | None = None) -> float:
    """The nu_s below which layer 1 is undecodable regardless of nu_r.

    Solves t(v) = 1/fraction for the allocation fraction whose residual
    interferes with layer 1 (beta_bar in general, alpha_bar when the relay
    copies the source split); returns 0 when t(0) = e^{r1/(1-x)} never
    reaches 1/fraction.  Found by bisection on the monotone t and
    cross-checked against the closed form.
    """
    if fraction is None:
        fraction = ctx.alloc.beta_bar
    if fraction <= 0.0:
        return 0.0
    # existence: r1/(1-x) > -log(fraction)
    if ctx.r1 <= -(1.0 - ctx.x) * math.log(fraction):
        return 0.0
    lo, hi = 0.0, ctx.eta1
    target = 1.0 / fraction
    if t_factor(hi, ctx) >= target:  # cannot happen for beta >= alpha
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_factor(mid, ctx) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    v = 0.5 * (lo + hi)
    if ctx.x > 0.0:
        # closed form: G(v) = chi with log chi = (r1 + (1-x) log(fraction)) / x
        chi = math.exp((ctx.r1 + (1.0 - ctx.x) * math.log(fraction)) / ctx.x)
        v_closed = (chi - 1.0) / (ctx.cfg.p_s * (1.0 - ctx.alloc.alpha_bar * chi))
        if abs(v_closed - v) > 1e-8 * max(1.0, ctx.eta1):
            raise RuntimeError(
                f"discontinuity point mismatch: bisection {v!r} vs closed form {v_closed!r}")
        v = v_closed
    return v


@dataclass(frozen=True)
class IntervalPartition:
    """Dominance pattern of the layer-1 and layer-2 thresholds on [v_lo, eta1].

    ``crossings`` are the interior points where the curves meet, strictly
    increasing; dominance alternates between consecutive subintervals,
    starting with ``leading_function`` ("F" for the layer-1 curve, "U" for
    the layer-2 curve) on the first one.
    """

    crossings: tuple[float, ...]
    v_lo: float
    upper: float
    leading_function: Literal["F", "U"]

    def segments(self):
        """Yield (lo, hi, dominant) triples covering [v_lo, upper]."""
        edges = (self.v_lo, *self.crossings, self.upper)
        which = self.leading_function
        for lo, hi in zip(edges[:-1], edges[1:]):
            yield lo, hi, which
            which = "U" if which == "F" else "F"


def _bisect_crossing(diff, lo: float, hi: float) -> float:
    # refine to 1e-12 and then on to float resolution: the curves can be
    # near-vertical close to the discontinuity, where a fixed-width bracket
    # would leave a visible residual
    f_lo = diff(lo)
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = diff(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_intersections(ctx: BoundContext, n_scan: int = 10_000) -> IntervalPartition:
    """Locate the crossings of the layer-1 and layer-2 thresholds on [v_lo, eta1].

    Dense sign scan of F - U followed by bisection refinement of each sign
    change.  The crossing count must match the parity implied by which curve
    dominates at the left end (even when U leads, odd when F leads, since U
    always dominates at eta1); a mismatch triggers one rescan at 10x density
    before erroring.
    """
    v_lo = discontinuity_point(ctx)
    eta1 = ctx.eta1
    if eta1 - v_lo <= 0.0:
        return IntervalPartition(crossings=(), v_lo=v_lo, upper=eta1,
                                 leading_function="U")
    if ctx.alloc.alpha_bar == 0.0:
        # zero-rate layer 2: U vanishes identically and merely ties F at
        # eta1, so the layer-1 curve dominates the whole interval
        return IntervalPartition(crossings=(), v_lo=v_lo, upper=eta1,
                                 leading_function="F")

    fraction = ctx.alloc.beta_bar

    def diff_scalar(v: float) -> float:
        return float(_k_values(v, ctx) - _u_values(v, ctx, fraction))

    def attempt(n: int):
        span = eta1 - v_lo
        grid = np.linspace(v_lo, eta1, n + 1)
        grid[0] += 1e-9 * span   # dodge the pole at v_lo
        grid[-1] -= 1e-12 * span
        with np.errstate(invalid="ignore"):
            d = np.asarray(_k_values(grid, ctx) - _u_values(grid, ctx, fraction))
        d = np.where(np.isnan(d), np.inf, d)  # inf - inf at the pole: F side wins
        signs = d > 0.0
        crossings = []
        for i in np.nonzero(signs[:-1] != signs[1:])[0]:
            crossings.append(_bisect_crossing(diff_scalar, grid[i], grid[i + 1]))
        leading = "F" if signs[0] else "U"
        parity_ok = (len(crossings) % 2 == 0) == (leading == "U")
        return crossings, leading, parity_ok

    crossings, leading, parity_ok = attempt(n_scan)
    if not parity_ok:
        crossings, leading, parity_ok = attempt(10 * n_scan)
    if not parity_ok:
        raise RuntimeError("threshold crossing count violates the dominance parity; "
                           "scan resolution exhausted")
    return IntervalPartition(crossings=tuple(crossings), v_lo=v_lo, upper=eta1,
                             leading_function=leading)
