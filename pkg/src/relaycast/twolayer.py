"""Closed-form layered throughputs: direct, MISO (equal and unequal relay
power split), simplex relay, and the duplex-gain condition.

The MISO results come from the decode-region geometry in the (nu_s, nu_r)
plane: each layer is decodable above a straight threshold line, and the
average throughput is a sum of closed-form exponential integrals over the
regions between those lines.  The simplex results replace the lines by the
curved thresholds of :mod:`relaycast.bounds` and integrate numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy import integrate

from .bounds import BoundContext, _k_values, _u_values, find_intersections
from .model import (PowerConfig, ThroughputResult, TwoLayerAllocation,
                    decoding_times, layer_rates)
from .outage import y_sum_tail

__all__ = [
    "direct_multilayer_throughput",
    "miso_equal_throughput",
    "miso_unequal_throughput",
    "miso_max_throughput",
    "simplex_equal_throughput",
    "simplex_unequal_throughput",
    "DuplexVerdict",
    "duplex_gain_condition",
    "discretize_power_density",
]

_QUAD_OPTS = dict(epsabs=1e-9, epsrel=1e-9, limit=200)


def _layer_rate_list(thresholds: Sequence[float], fractions: Sequence[float],
                     p_s: float) -> list[float]:
    """Per-layer rates R_i = log(1 + eta_i*frac_i*P / (1 + eta_i*resid_i*P))."""
    if len(thresholds) != len(fractions):
        raise ValueError("thresholds and fractions must have equal length")
    if any(f < -1e-12 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must be nonnegative and sum to 1")
    if any(b < a for a, b in zip(thresholds[:-1], thresholds[1:])):
        raise ValueError("thresholds must be nondecreasing")
    rates = []
    resid = 1.0  # power fraction on this layer and above
    for eta, frac in zip(thresholds, fractions):
        resid_next = max(resid - frac, 0.0)
        rates.append(math.log1p(eta * resid * p_s) - math.log1p(eta * resid_next * p_s))
        resid = resid_next
    return rates


def _layered_result(thresholds: Sequence[float], fractions: Sequence[float],
                    p_s: float, tail: Callable[[float], float]) -> ThroughputResult:
    """Sum R_i * tail(eta_i) packaged as a ThroughputResult.

    For more than two layers r2/p_both aggregate the upper layers
    (rate-weighted), preserving r_av = r1*p1 + r2*p_both exactly.
    """
    rates = _layer_rate_list(thresholds, fractions, p_s)
    tails = [min(max(tail(eta), 0.0), 1.0) for eta in thresholds]
    r1, p1 = rates[0], tails[0]
    r_hi = sum(rates[1:])
    if r_hi > 0.0:
        p_hi = sum(r * t for r, t in zip(rates[1:], tails[1:])) / r_hi
    else:
        p_hi = p1
    return ThroughputResult.build(r1, r_hi, p1, p_hi)


def direct_multilayer_throughput(thresholds: Sequence[float],
                                 fractions: Sequence[float],
                                 p_s: float) -> ThroughputResult:
    """No-relay layered transmission: R_av = sum_i R_i e^{-eta_i}."""
    return _layered_result(thresholds, fractions, p_s, lambda eta: math.exp(-eta))


def miso_equal_throughput(thresholds: Sequence[float], fractions: Sequence[float],
                          p_s: float, p_r: float) -> ThroughputResult:
    """Always-on relay reusing the source split: R_av = sum_i R_i P(Y > eta_i P_s)."""
    return _layered_result(thresholds, fractions, p_s,
                           lambda eta: y_sum_tail(eta * p_s, p_s, p_r))


def _seg(lo: float, hi: float, slope: float, anchor: float) -> float:
    """int_lo^hi exp(-v - slope*(anchor - v)) dv for a threshold line
    slope*(anchor - v); evaluated endpoint-wise so large slopes underflow
    cleanly instead of overflowing."""
    if hi <= lo:
        return 0.0
    if math.isinf(slope):
        return 0.0

    def point(v: float) -> float:
        expo = -v - slope * (anchor - v)
        return math.exp(expo) if expo > -745.0 else 0.0

    if abs(slope - 1.0) < 1e-9:
        return math.exp(-anchor) * (hi - lo)
    return (point(hi) - point(lo)) / (slope - 1.0)


def miso_unequal_throughput(alloc: TwoLayerAllocation, p_s: float,
                            p_r: float) -> ThroughputResult:
    """Two-layer MISO with an independent relay power split beta.

    Layer 1 is decodable where nu_r*P_r*(1 - e^{r1}*beta_bar) exceeds
    (e^{r1}-1) - nu_s*P_s*(1 - e^{r1}*alpha_bar), layer 2 (after
    cancellation) where nu_s*alpha_bar*P_s + nu_r*beta_bar*P_r >= eta2*
    alpha_bar*P_s.  The sign of d = beta + eta1*P_s*(beta - alpha), i.e. of
    1 - e^{r1}*beta_bar, selects whether relay power helps or hurts layer 1;
    d < 0 is reachable only for beta < alpha and flips the layer-1 region
    below its threshold line.  Slopes within 1e-9 of 1 use the limit forms.
    """
    r1, r2 = layer_rates(alloc, p_s)
    if p_r == 0.0:
        return direct_multilayer_throughput(
            (alloc.eta1, alloc.eta2), (alloc.alpha, alloc.alpha_bar), p_s)
    e1, e2 = alloc.eta1, alloc.eta2
    ab, bb = alloc.alpha_bar, alloc.beta_bar
    d = alloc.beta + e1 * p_s * (alloc.beta - alloc.alpha)
    n = ab * p_s / (bb * p_r) if bb > 0.0 else math.inf
    d_scale = max(1.0, alloc.beta + e1 * p_s * (alloc.beta + alloc.alpha))

    if abs(d) <= 1e-12 * d_scale:
        # layer-1 threshold line is vertical at eta1: relay power neither
        # helps nor hurts layer 1
        p1 = math.exp(-e1)
        p_both = math.exp(-e2) + _seg(e1, e2, n, e2)
        return ThroughputResult.build(r1, r2, p1, min(p_both, p1))

    k = alloc.alpha * p_s / (d * p_r)
    if d > 0.0:
        p1 = math.exp(-e1) + _seg(0.0, e1, k, e1)
        if math.isinf(n) or k * e1 <= n * e2:
            v1 = 0.0  # layer-2 line dominates all of [0, eta1]
        else:
            v1 = (n * e2 - k * e1) / (n - k)
        p_both = math.exp(-e2) + _seg(v1, e2, n, e2) + _seg(0.0, v1, k, e1)
    else:
        # layer 1 decodable only for nu_s > eta1 with nu_r BELOW |k|(nu_s-eta1)
        kk = -k
        p1 = math.exp(-e1) * kk / (1.0 + kk)
        v2 = (n * e2 - k * e1) / (n - k)  # crossing in [eta1, eta2]
        expo = -v2 - kk * (v2 - e1)
        tail_above = math.exp(expo) / (1.0 + kk) if expo > -745.0 else 0.0
        p_both = math.exp(-e2) + _seg(v2, e2, n, e2) - tail_above
    return ThroughputResult.build(r1, r2, p1, min(max(p_both, 0.0), p1))


def miso_max_throughput(alloc: TwoLayerAllocation, p_s: float) -> ThroughputResult:
    """Unit-slope optimum of the unequal MISO over n, k >= 1:
    R_av = R1 e^{-eta1}(1+eta1) + R2 e^{-eta2}(1+eta2)."""
    r1, r2 = layer_rates(alloc, p_s)
    p1 = math.exp(-alloc.eta1) * (1.0 + alloc.eta1)
    p_both = math.exp(-alloc.eta2) * (1.0 + alloc.eta2)
    return ThroughputResult.build(r1, r2, p1, min(p_both, p1))


def _simplex_throughput(alloc: TwoLayerAllocation, cfg: PowerConfig,
                        x: float | None = None) -> ThroughputResult:
    """Simplex assembly; ``x`` overrides the relay decoding time (used for
    limit analyses such as the infinite collocation gain)."""
    r1, r2 = layer_rates(alloc, cfg.p_s)
    if x is None:
        x = decoding_times(alloc, cfg).eps2
    if x >= 1.0:  # relay never decodes within the block
        return direct_multilayer_throughput(
            (alloc.eta1, alloc.eta2), (alloc.alpha, alloc.alpha_bar), cfg.p_s)
    if x <= 0.0:
        return miso_unequal_throughput(alloc, cfg.p_s, cfg.p_r)

    ctx = BoundContext(alloc=alloc, cfg=cfg, x=x, r1=r1, r2=r2)
    part = find_intersections(ctx)
    bb = alloc.beta_bar

    def exp_k(v: float) -> float:
        if v <= part.v_lo:
            return 0.0
        thr = max(float(_k_values(v, ctx)), 0.0)
        expo = -thr - v
        return math.exp(expo) if expo > -745.0 else 0.0

    def exp_u(v: float) -> float:
        thr = max(float(_u_values(v, ctx, bb)), 0.0)
        expo = -thr - v
        return math.exp(expo) if expo > -745.0 else 0.0

    p1 = math.exp(-alloc.eta1)
    p1 += integrate.quad(exp_k, part.v_lo, alloc.eta1, **_QUAD_OPTS)[0]

    p_both = math.exp(-alloc.eta2)
    p_both += integrate.quad(exp_u, alloc.eta1, alloc.eta2, **_QUAD_OPTS)[0]
    for lo, hi, dominant in part.segments():
        f = exp_k if dominant == "F" else exp_u
        p_both += integrate.quad(f, lo, hi, **_QUAD_OPTS)[0]
    return ThroughputResult.build(r1, r2, p1, min(p_both, p1))


def simplex_equal_throughput(alloc: TwoLayerAllocation, cfg: PowerConfig) -> ThroughputResult:
    """Relay decodes both layers before forwarding, reusing the source split."""
    if alloc.beta != alloc.alpha:
        raise ValueError("equal allocation requires beta == alpha")
    return _simplex_throughput(alloc, cfg)


def simplex_unequal_throughput(alloc: TwoLayerAllocation, cfg: PowerConfig) -> ThroughputResult:
    """Relay decodes both layers before forwarding with its own split beta >= alpha."""
    if alloc.beta < alloc.alpha:
        raise ValueError("beta >= alpha required; beta < alpha degrades layer 1 "
                         "irrespective of relay power (use the Monte-Carlo module "
                         "to explore it)")
    return _simplex_throughput(alloc, cfg)


@dataclass(frozen=True)
class DuplexVerdict:
    """Outcome of the full-duplex gain check.

    ``simplex_sufficient`` means 1 < 2*alpha_bar + Q*alpha_bar^2*P_s, which
    guarantees no full-duplex gain only under the (numerically observed,
    unproven) ordering r1_opt > r2_opt of the optimal single-user rates;
    ``assumes_rate_ordering`` records that caveat.
    """

    simplex_sufficient: bool
    margin: float
    assumes_rate_ordering: bool = True

    @property
    def verdict(self) -> str:
        return "simplex-sufficient" if self.simplex_sufficient else "condition-not-met"


def duplex_gain_condition(alloc: TwoLayerAllocation, cfg: PowerConfig) -> DuplexVerdict:
    """Sufficient condition for the simplex relay to match the full-duplex one."""
    ab = alloc.alpha_bar
    margin = 2.0 * ab + cfg.q * ab * ab * cfg.p_s - 1.0
    return DuplexVerdict(simplex_sufficient=margin > 0.0, margin=margin)


def discretize_power_density(density, dist, n_layers: int,
                             grid_points: int = 20001) -> tuple[list[float], list[float]]:
    """Quantize a continuous layering profile into an n-layer plan.

    Thresholds are placed at equal increments of the cumulative continuous
    rate over [u0, u1]; the fraction of layer i is the share of the total
    power released up to the next threshold, so the discrete residual
    interference matches I at every threshold.
    """
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    import numpy as np

    us = np.linspace(density.u0, density.u1, grid_points)
    inner = us[1:-1]
    if density.rho_of_u is not None:
        rho = np.asarray(density.rho_of_u(inner), dtype=float)
        i_vals = np.asarray(density.i_of_u(inner), dtype=float)
        cdf_vals = np.asarray(dist.cdf(inner), dtype=float)
    else:
        from .broadcast import _numeric_rho
        rho_fn = _numeric_rho(density)
        rho = np.array([rho_fn(u) for u in inner])
        i_vals = np.array([float(density.i_of_u(u)) for u in inner])
        cdf_vals = np.array([float(dist.cdf(u)) for u in inner])
    g = np.zeros_like(us)
    g[1:-1] = (1.0 - cdf_vals) * inner * rho / (1.0 + inner * i_vals)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(us))))
    total = cum[-1]
    targets = total * (np.arange(n_layers) + 0.5) / n_layers
    thresholds = np.interp(targets, cum, us)

    # residual after layer i copies the continuous residual at eta_i;
    # the last layer absorbs whatever the continuous profile keeps above eta_N
    p = density.total_power
    resids = [float(density.i_of_u(u)) / p for u in thresholds[:-1]] + [0.0]
    fractions = []
    prev = 1.0
    for resid in resids:
        fractions.append(max(prev - resid, 0.0))
        prev = resid
    return [float(t) for t in thresholds], fractions
