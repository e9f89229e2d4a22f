"""Preset CSV sweeps (figure subcommand).

Each preset returns (fieldnames, rows, grid) where ``grid`` echoes the
resolved parameter grid for the run manifest.  Every preset exposes its
grid as overridable defaults; rates are nats/channel use, powers dB.
"""

from __future__ import annotations

import math

import numpy as np

from . import broadcast, twolayer
from .model import PowerConfig
from .montecarlo import SimConfig, simulate_strategy
from .optimize import golden_section_max, maximize_throughput, oblivious_rate_plan
from .outage import (ergodic_miso_capacity, optimal_single_user_rate,
                     single_user_throughput, y_sum_tail)

__all__ = ["PRESETS", "run_preset"]


def _db2lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _ps_grid(start=0.0, stop=25.0, step=2.5) -> list[float]:
    n = int(round((stop - start) / step))
    return [start + i * step for i in range(n + 1)]


def optimal_single_layer_miso_rate(p_s: float, p_r: float) -> float:
    """max_R R * P(Y > e^R - 1): coarse scan plus golden refinement."""
    hi = math.log1p(10.0 * (p_s + p_r)) + 1.0
    grid = np.linspace(0.0, hi, 64)
    vals = [r * y_sum_tail(math.expm1(r), p_s, p_r) for r in grid]
    i = int(np.argmax(vals))
    lo_b = grid[max(i - 1, 0)]
    hi_b = grid[min(i + 1, len(grid) - 1)]
    _, best = golden_section_max(
        lambda r: r * y_sum_tail(math.expm1(r), p_s, p_r), lo_b, hi_b, tol=1e-7)
    return best


def _refined_layered(p_s: float, tail, n_layers: int, density, dist,
                     passes: int = 4):
    """Quantize the continuous profile into n layers and polish by coordinate
    golden-section over thresholds and residual power fractions."""
    thresholds, fractions = twolayer.discretize_power_density(density, dist, n_layers)
    resids = list(np.clip(1.0 - np.cumsum(fractions), 0.0, 1.0))
    resids[-1] = 0.0

    def rate(thr, res) -> float:
        total, prev = 0.0, 1.0
        for eta, r_i in zip(thr, res):
            total += (math.log1p(eta * prev * p_s) - math.log1p(eta * r_i * p_s)) * tail(eta)
            prev = r_i
        return total

    thr = list(thresholds)
    for _ in range(passes):
        for i in range(n_layers):
            lo = thr[i - 1] if i else 1e-6
            hi = thr[i + 1] if i + 1 < n_layers else max(4.0, thr[-1] * 2.0)

            def line(x, _i=i):
                trial = list(thr)
                trial[_i] = x
                return rate(trial, resids)

            x, val = golden_section_max(line, lo, hi, tol=1e-6)
            if val >= rate(thr, resids):
                thr[i] = x
        for i in range(n_layers - 1):  # last residual is pinned at 0
            lo = resids[i + 1]
            hi = resids[i - 1] if i else 1.0

            def line(x, _i=i):
                trial = list(resids)
                trial[_i] = x
                return rate(thr, trial)

            x, val = golden_section_max(line, lo, hi, tol=1e-6)
            if val >= rate(thr, resids):
                resids[i] = x
    return rate(thr, resids)


def fig2(ps_db=None, ratios=(0.5, 1.0, 2.0), **_):
    """Continuous broadcasting bounds and single-layer rates vs source power."""
    ps_db = ps_db or _ps_grid()
    rows = []
    for db in ps_db:
        p_s = _db2lin(db)
        r_siso_bc = broadcast.siso_broadcast_rate(p_s)
        r_su = single_user_throughput(optimal_single_user_rate(p_s), p_s).r_av
        for ratio in ratios:
            p_r = ratio * p_s
            cfg = PowerConfig(p_s=p_s, p_r=p_r, q=1.0)
            for scheme, value in (
                ("continuous-relay", broadcast.relay_or_miso_broadcast_bound(cfg, "relay")),
                ("continuous-miso", broadcast.relay_or_miso_broadcast_bound(cfg, "miso")),
                ("continuous-siso", r_siso_bc),
                ("single-layer-miso", optimal_single_layer_miso_rate(p_s, p_r)),
                ("single-layer-siso", r_su),
            ):
                rows.append({"ps_db": db, "pr_over_ps": ratio, "scheme": scheme,
                             "throughput_nats": value})
    return ["ps_db", "pr_over_ps", "scheme", "throughput_nats"], rows, \
        {"ps_db": ps_db, "ratios": list(ratios)}


def fig3(ps_db=None, **_):
    """SISO: optimal 1-, 2-, 8-layer and continuous broadcasting rates."""
    ps_db = ps_db or _ps_grid()
    dist = broadcast.rayleigh_distribution()
    rows = []
    for db in ps_db:
        p_s = _db2lin(db)
        density = broadcast.optimal_power_density(p_s, dist)
        plan = oblivious_rate_plan(p_s, 2)
        values = {
            1: single_user_throughput(optimal_single_user_rate(p_s), p_s).r_av,
            2: twolayer.direct_multilayer_throughput(
                (plan.eta1, plan.eta2), (plan.alpha, plan.alpha_bar), p_s).r_av,
            8: _refined_layered(p_s, lambda eta: math.exp(-eta), 8, density, dist),
        }
        for n, value in values.items():
            rows.append({"ps_db": db, "scheme": f"direct-{n}-layer", "n_layers": n,
                         "throughput_nats": value})
        rows.append({"ps_db": db, "scheme": "continuous-siso", "n_layers": 0,
                     "throughput_nats": broadcast.broadcast_rate(density, dist)})
    return ["ps_db", "scheme", "n_layers", "throughput_nats"], rows, {"ps_db": ps_db}


def fig4(ps_db=None, ratios=(0.5, 1.0, 2.0), **_):
    """2x1 MISO: equal/unequal layering for N = 1, 2, 8, continuous, ergodic."""
    ps_db = ps_db or _ps_grid(step=5.0)
    rows = []
    for db in ps_db:
        p_s = _db2lin(db)
        for ratio in ratios:
            p_r = ratio * p_s
            cfg = PowerConfig(p_s=p_s, p_r=p_r, q=1.0)
            dist = broadcast.sum_fading_distribution(ratio)
            density = broadcast.optimal_power_density(p_s, dist)
            eq2 = maximize_throughput("miso-equal", ("alpha", "eta1", "eta2"), {}, cfg,
                                      coarse_points=24)
            uneq2 = maximize_throughput("miso-unequal",
                                        ("alpha", "beta", "eta1", "eta2"), {}, cfg,
                                        coarse_points=12)
            entries = (
                ("miso-1-layer", 1, optimal_single_layer_miso_rate(p_s, p_r)),
                ("miso-2-equal", 2, eq2.value),
                ("miso-2-unequal", 2, uneq2.value),
                ("miso-8-equal", 8, _refined_layered(
                    p_s, lambda eta: y_sum_tail(eta * p_s, p_s, p_r), 8, density, dist)),
                ("continuous-miso", 0, broadcast.broadcast_rate(density, dist)),
                ("ergodic-miso", 0, ergodic_miso_capacity(p_s, p_r)),
            )
            for scheme, n, value in entries:
                rows.append({"ps_db": db, "pr_over_ps": ratio, "scheme": scheme,
                             "n_layers": n, "throughput_nats": value})
    return ["ps_db", "pr_over_ps", "scheme", "n_layers", "throughput_nats"], rows, \
        {"ps_db": ps_db, "ratios": list(ratios)}


def fig5(pr_db=None, ps_db=40.0, **_):
    """MISO equal vs unequal layering as the relay power varies."""
    pr_db = pr_db or _ps_grid(0.0, 40.0, 4.0)
    p_s = _db2lin(ps_db)
    rows = []
    for db in pr_db:
        cfg = PowerConfig(p_s=p_s, p_r=_db2lin(db), q=1.0)
        eq2 = maximize_throughput("miso-equal", ("alpha", "eta1", "eta2"), {}, cfg,
                                  coarse_points=24)
        uneq2 = maximize_throughput("miso-unequal", ("alpha", "beta", "eta1", "eta2"),
                                    {}, cfg, coarse_points=12)
        for scheme, value in (("miso-2-equal", eq2.value), ("miso-2-unequal", uneq2.value)):
            rows.append({"pr_db": db, "ps_db": ps_db, "scheme": scheme,
                         "throughput_nats": value})
    return ["pr_db", "ps_db", "scheme", "throughput_nats"], rows, \
        {"pr_db": pr_db, "ps_db": ps_db}


def _oblivious_rows(ps_db, q_db_list, ratios, schemes):
    """Shared sweep core for the oblivious relay figures: the source plan
    depends only on P_s and is reused across relay parameters."""
    rows = []
    for db in ps_db:
        p_s = _db2lin(db)
        plan = oblivious_rate_plan(p_s, 2)
        direct = twolayer.direct_multilayer_throughput(
            (plan.eta1, plan.eta2), (plan.alpha, plan.alpha_bar), p_s).r_av
        for q_db in q_db_list:
            for ratio in ratios:
                cfg = PowerConfig(p_s=p_s, p_r=ratio * p_s, q=_db2lin(q_db))
                base = {"ps_db": db, "q_db": q_db, "pr_over_ps": ratio}
                if "direct-2" in schemes:
                    rows.append({**base, "scheme": "direct-2", "throughput_nats": direct})
                if "simplex-equal" in schemes:
                    rows.append({**base, "scheme": "simplex-equal",
                                 "throughput_nats":
                                     twolayer.simplex_equal_throughput(plan, cfg).r_av})
                if "simplex-unequal-opt" in schemes:
                    opt = maximize_throughput(
                        "simplex-unequal", ("beta",),
                        {"alpha": plan.alpha, "eta1": plan.eta1, "eta2": plan.eta2},
                        cfg, coarse_points=12)
                    rows.append({**base, "scheme": "simplex-unequal-opt",
                                 "throughput_nats": opt.value})
                if "miso-equal" in schemes:
                    rows.append({**base, "scheme": "miso-equal",
                                 "throughput_nats": twolayer.miso_equal_throughput(
                                     (plan.eta1, plan.eta2), (plan.alpha, plan.alpha_bar),
                                     cfg.p_s, cfg.p_r).r_av})
    return rows


def fig6(ps_db=None, q_db=(15.0, 20.0), ratios=(1.0,), **_):
    """Oblivious simplex relay vs direct transmission over P_s and Q."""
    ps_db = ps_db or _ps_grid()
    rows = _oblivious_rows(ps_db, q_db, ratios, ("direct-2", "simplex-equal"))
    return ["ps_db", "q_db", "pr_over_ps", "scheme", "throughput_nats"], rows, \
        {"ps_db": ps_db, "q_db": list(q_db), "ratios": list(ratios)}


def fig7(ratios=(0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0), q_db=(10.0, 20.0),
         ps_db=(10.0, 20.0), **_):
    """Oblivious simplex relay vs relay power ratio at fixed source powers."""
    rows = _oblivious_rows(ps_db, q_db, ratios, ("direct-2", "simplex-equal"))
    return ["ps_db", "q_db", "pr_over_ps", "scheme", "throughput_nats"], rows, \
        {"ps_db": list(ps_db), "q_db": list(q_db), "ratios": list(ratios)}


def fig8(ps_db=None, q_db=(20.0,), ratios=(1.0,), **_):
    """Optimized-beta simplex relay vs the equal split and the MISO bound."""
    ps_db = ps_db or _ps_grid()
    rows = _oblivious_rows(ps_db, q_db, ratios,
                           ("simplex-equal", "simplex-unequal-opt", "miso-equal"))
    return ["ps_db", "q_db", "pr_over_ps", "scheme", "throughput_nats"], rows, \
        {"ps_db": ps_db, "q_db": list(q_db), "ratios": list(ratios)}


def fig9(ps_db=(0.0, 5.0, 10.0, 15.0, 20.0), q_db=(0.0, 5.0, 10.0, 20.0),
         ratios=(1.0,), blocks=100_000, seed=20_240_001, workers=1, **_):
    """Full-duplex vs simplex relay by simulation, with the duplex condition."""
    rows = []
    for db in ps_db:
        p_s = _db2lin(db)
        plan = oblivious_rate_plan(p_s, 2)
        for q in q_db:
            for ratio in ratios:
                cfg = PowerConfig(p_s=p_s, p_r=ratio * p_s, q=_db2lin(q))
                verdict = twolayer.duplex_gain_condition(plan, cfg).verdict
                for strategy in ("simplex-equal", "full-duplex"):
                    est = simulate_strategy(
                        SimConfig(blocks=blocks, seed=seed, strategy=strategy,
                                  params=plan), cfg, workers=workers)
                    rows.append({"ps_db": db, "q_db": q, "pr_over_ps": ratio,
                                 "scheme": strategy, "throughput_nats": est.mean,
                                 "stderr_nats": est.stderr,
                                 "duplex_condition": verdict})
    fields = ["ps_db", "q_db", "pr_over_ps", "scheme", "throughput_nats",
              "stderr_nats", "duplex_condition"]
    return fields, rows, {"ps_db": list(ps_db), "q_db": list(q_db),
                          "ratios": list(ratios), "blocks": blocks, "seed": seed}


PRESETS = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5,
           "fig6": fig6, "fig7": fig7, "fig8": fig8, "fig9": fig9}


def run_preset(name: str, **overrides):
    if name not in PRESETS:
        raise ValueError(f"unknown figure preset {name!r}; "
                         f"choose from {', '.join(sorted(PRESETS))}")
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    return PRESETS[name](**kwargs)
