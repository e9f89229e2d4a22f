"""Continuous (infinite-layer) broadcasting rates.

The transmitter spreads its power over a continuum of code layers indexed by
the fading level u; I(u) is the power left to layers above u and
rho(u) = -dI/du the layering density.  This module builds the optimal I for
a given fading distribution, evaluates the resulting average rate, and forms
the two relay-channel lower bounds in which the relay layers its power
proportionally to the source (I_r = (P_r/P_s) I_s), so decodability is
governed by the combined fading s = nu_s + (P_r/P_s) nu_r.

With the proportional relay density the received signal and interference of
every layer scale by the same factor s, so the rate functional keeps its
single-user form with the source density I_s in the denominator and only the
fading distribution replaced by that of s (see docs/conformance.md).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import integrate, optimize

from .model import PowerConfig

__all__ = [
    "FadingDistribution",
    "PowerDensity",
    "rayleigh_distribution",
    "sum_fading_distribution",
    "optimal_power_density",
    "broadcast_rate",
    "siso_broadcast_rate",
    "relay_or_miso_broadcast_bound",
]

_BRACKET_LO = 1e-8
_BRACKET_HI = 1e4
_SUM_FADING_EQUAL_ATOL = 1e-6


@dataclass(frozen=True)
class FadingDistribution:
    """CDF/PDF pair of the decode-governing fading variable.

    All callables accept scalars or numpy arrays.  ``pdf_prime`` is optional;
    when present it enables the closed-form layering density.
    """

    cdf: Callable
    pdf: Callable
    label: str
    pdf_prime: Callable | None = None


@dataclass(frozen=True)
class PowerDensity:
    """Residual interference profile I(u) with its active range [u0, u1].

    I(u0) = total_power, I(u1) = 0 and I is nonincreasing in between.
    ``rho_of_u`` is -dI/du when available in closed form.
    """

    i_of_u: Callable
    u0: float
    u1: float
    total_power: float
    rho_of_u: Callable | None = None


def rayleigh_distribution() -> FadingDistribution:
    """Unit-mean exponential fading power (Rayleigh amplitude)."""
    return FadingDistribution(
        cdf=lambda s: -np.expm1(-np.asarray(s, dtype=float)),
        pdf=lambda s: np.exp(-np.asarray(s, dtype=float)),
        pdf_prime=lambda s: -np.exp(-np.asarray(s, dtype=float)),
        label="rayleigh",
    )


def sum_fading_distribution(a: float) -> FadingDistribution:
    """Distribution of s = nu_s + a*nu_r for independent unit-mean exponentials.

    a != 1:  f(s) = e^{-s/a}/(a-1) + e^{-s}/(1-a),
             F(s) = 1 + e^{-s}/(a-1) + a e^{-s/a}/(1-a)
    a  = 1:  f(s) = s e^{-s},  F(s) = 1 - e^{-s} - s e^{-s}
    Ratios within 1e-6 of unity are routed to the a = 1 branch.
    """
    if a <= 0.0:
        raise ValueError(f"power ratio must be positive, got {a!r}")
    if abs(a - 1.0) < _SUM_FADING_EQUAL_ATOL:
        return FadingDistribution(
            cdf=lambda s: np.where(np.asarray(s) <= 0, 0.0,
                                   -np.expm1(-np.asarray(s, dtype=float))
                                   - np.asarray(s, dtype=float) * np.exp(-np.asarray(s, dtype=float))),
            pdf=lambda s: np.asarray(s, dtype=float) * np.exp(-np.asarray(s, dtype=float)),
            pdf_prime=lambda s: (1.0 - np.asarray(s, dtype=float)) * np.exp(-np.asarray(s, dtype=float)),
            label="sum-fading(a=1)",
        )

    def pdf(s):
        s = np.asarray(s, dtype=float)
        return np.exp(-s / a) / (a - 1.0) + np.exp(-s) / (1.0 - a)

    def cdf(s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 0, 0.0,
                        1.0 + np.exp(-s) / (a - 1.0) + a * np.exp(-s / a) / (1.0 - a))

    def pdf_prime(s):
        s = np.asarray(s, dtype=float)
        return -np.exp(-s / a) / (a * (a - 1.0)) - np.exp(-s) / (1.0 - a)

    return FadingDistribution(cdf=cdf, pdf=pdf, pdf_prime=pdf_prime,
                              label=f"sum-fading(a={a:g})")


def optimal_power_density(total_power: float, dist: FadingDistribution) -> PowerDensity:
    """Rate-optimal residual interference for the given fading distribution.

    On the active range the unclipped profile is
    I(u) = (1 - F(u) - u f(u)) / (u^2 f(u)); u1 solves I(u1) = 0 and u0
    solves I(u0) = total_power, both by bracketing root search.  Outside the
    range I is clipped to total_power (below u0) and 0 (above u1).
    """
    if total_power <= 0.0:
        raise ValueError("total_power must be positive")
    cdf, pdf = dist.cdf, dist.pdf

    def survival_excess(u):  # numerator 1 - F - u f, root gives u1
        return float(1.0 - cdf(u) - u * pdf(u))

    def i_raw(u):
        return float((1.0 - cdf(u) - u * pdf(u)) / (u * u * pdf(u)))

    hi = 1.0
    while survival_excess(hi) > 0.0 and hi < _BRACKET_HI:
        hi *= 2.0
    if survival_excess(hi) > 0.0:
        warnings.warn(f"upper layering boundary beyond {_BRACKET_HI:g}; clamped")
        u1 = _BRACKET_HI
    else:
        u1 = optimize.brentq(survival_excess, min(hi / 2.0, _BRACKET_LO), hi,
                             xtol=1e-14, rtol=8.9e-16)

    lo = u1 / 2.0
    while i_raw(lo) < total_power and lo > _BRACKET_LO:
        lo /= 2.0
    if i_raw(lo) < total_power:
        warnings.warn(f"lower layering boundary below {_BRACKET_LO:g}; clamped")
        u0 = _BRACKET_LO
    else:
        u0 = optimize.brentq(lambda u: i_raw(u) - total_power, lo, u1,
                             xtol=1e-14, rtol=8.9e-16)
    if not u0 < u1:
        raise ValueError(f"unsupported distribution shape: no layering range "
                         f"found for {dist.label}")

    def i_of_u(u):
        u_arr = np.asarray(u, dtype=float)
        mid = (1.0 - cdf(u_arr) - u_arr * pdf(u_arr)) / (u_arr * u_arr * pdf(u_arr))
        out = np.where(u_arr <= u0, total_power,
                       np.where(u_arr >= u1, 0.0, np.clip(mid, 0.0, total_power)))
        return out if out.ndim else float(out)

    rho_of_u = None
    if dist.pdf_prime is not None:
        fprime = dist.pdf_prime

        def rho_of_u(u):
            # -d/du of the unclipped profile: (1-F)(2f + u f') / (u^3 f^2)
            u_arr = np.asarray(u, dtype=float)
            f = pdf(u_arr)
            val = (1.0 - cdf(u_arr)) * (2.0 * f + u_arr * fprime(u_arr)) / (u_arr ** 3 * f * f)
            out = np.where((u_arr > u0) & (u_arr < u1), val, 0.0)
            return out if out.ndim else float(out)

    return PowerDensity(i_of_u=i_of_u, u0=u0, u1=u1, total_power=total_power,
                        rho_of_u=rho_of_u)


def _numeric_rho(density: PowerDensity) -> Callable:
    span = density.u1 - density.u0
    i_of_u = density.i_of_u

    def rho(u: float) -> float:
        # central difference, step balancing roundoff against curvature,
        # with the stencil kept inside the active range
        h = 6e-6 * max(abs(u), span)
        a = max(density.u0, u - h)
        b = min(density.u1, u + h)
        return -(i_of_u(b) - i_of_u(a)) / (b - a)

    return rho


def broadcast_rate(density: PowerDensity, dist: FadingDistribution) -> float:
    """Average decoded rate int_{u0}^{u1} (1 - F(u)) u rho(u) / (1 + u I(u)) du."""
    rho = density.rho_of_u if density.rho_of_u is not None else _numeric_rho(density)
    cdf, i_of_u = dist.cdf, density.i_of_u

    def integrand(u: float) -> float:
        return (1.0 - float(cdf(u))) * u * float(rho(u)) / (1.0 + u * float(i_of_u(u)))

    val, _ = integrate.quad(integrand, density.u0, density.u1,
                            epsabs=1e-10, epsrel=1e-10, limit=400)
    return val


def siso_broadcast_rate(p_s: float) -> float:
    """Continuous broadcasting rate of the plain Rayleigh point-to-point channel."""
    dist = rayleigh_distribution()
    return broadcast_rate(optimal_power_density(p_s, dist), dist)


def relay_or_miso_broadcast_bound(cfg: PowerConfig,
                                  mode: Literal["relay", "miso"]) -> float:
    """Continuous-broadcasting lower bounds with a proportionally layered relay.

    ``relay``: the source keeps its point-to-point (Rayleigh-matched) density,
    unaware of the relay; only the fading distribution changes to that of
    s = nu_s + (P_r/P_s) nu_r.  ``miso``: the source matches its density to
    the combined fading, i.e. the density is re-optimized against the sum
    distribution.  Both assume the relay already knows the message (informed
    operation, negligible relay decoding time) and are lower bounds.
    """
    if cfg.p_s <= 0.0:
        raise ValueError("p_s must be positive")
    a = cfg.p_r / cfg.p_s
    if a < 1e-12:
        return siso_broadcast_rate(cfg.p_s)
    dist = sum_fading_distribution(a)
    if mode == "relay":
        density = optimal_power_density(cfg.p_s, rayleigh_distribution())
    elif mode == "miso":
        density = optimal_power_density(cfg.p_s, dist)
    else:
        raise ValueError(f"mode must be 'relay' or 'miso', got {mode!r}")
    return broadcast_rate(density, dist)
