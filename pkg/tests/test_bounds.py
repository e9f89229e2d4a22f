import math

import numpy as np
import pytest

from conftest import draw_alloc, draw_powers
from relaycast import (BoundContext, PowerConfig, TwoLayerAllocation,
                       conditional_layer_probability, discontinuity_point,
                       find_intersections, layer_rates, relay_threshold_bound,
                       t_factor, u_bound)
from relaycast.bounds import _k_values, _u_values


def make_ctx(alpha=0.6, beta=None, eta1=0.4, eta2=1.4, p_s=8.0, p_r=5.0, x=0.5):
    """Context with an explicitly chosen decoding time (q is irrelevant then)."""
    alloc = TwoLayerAllocation(alpha=alpha, eta1=eta1, eta2=eta2,
                               beta=alpha if beta is None else beta)
    cfg = PowerConfig(p_s=p_s, p_r=p_r, q=1.0)
    r1, r2 = layer_rates(alloc, p_s)
    return BoundContext(alloc=alloc, cfg=cfg, x=x, r1=r1, r2=r2)


def try_ctx(alloc, cfg):
    """from_config, or None when the relay never decodes (x = 1)."""
    try:
        return BoundContext.from_config(alloc, cfg)
    except ValueError:
        return None


def interior_grid(ctx, n=1000):
    v_lo = discontinuity_point(ctx)
    span = ctx.eta1 - v_lo
    return np.linspace(v_lo + 1e-6 * span, ctx.eta1 - 1e-9 * span, n)


class TestTFactor:
    def test_value_at_eta1(self):
        ctx = make_ctx()
        assert t_factor(ctx.eta1, ctx) == pytest.approx(math.exp(ctx.r1), rel=1e-12)

    def test_value_at_zero(self):
        ctx = make_ctx()
        assert t_factor(0.0, ctx) == pytest.approx(
            math.exp(ctx.r1 / (1.0 - ctx.x)), rel=1e-12)

    def test_strictly_decreasing(self, param_rng):
        checked = 0
        for _ in range(30):
            ctx = try_ctx(draw_alloc(param_rng), draw_powers(param_rng))
            if ctx is None:
                continue
            ts = [t_factor(v, ctx) for v in np.linspace(0.0, ctx.eta1, 1000)]
            assert all(b < a for a, b in zip(ts, ts[1:]))
            checked += 1
        assert checked >= 10

    def test_increasing_in_x(self):
        base = make_ctx(x=0.4)
        hi = make_ctx(x=0.6)
        for v in np.linspace(0.0, 0.99 * base.eta1, 50):
            assert t_factor(v, hi) > t_factor(v, base)

    def test_rejects_degenerate_time(self):
        with pytest.raises(ValueError):
            make_ctx(x=1.0)


class TestRelayThreshold:
    def test_zero_at_eta1(self):
        ctx = make_ctx()
        assert relay_threshold_bound(ctx.eta1, ctx) == pytest.approx(0.0, abs=1e-12)

    def test_equal_reduces_exactly(self, param_rng):
        for _ in range(10):
            alloc = draw_alloc(param_rng)
            x = float(param_rng.uniform(0.1, 0.9))
            ctx_f = make_ctx(alpha=alloc.alpha, eta1=alloc.eta1, eta2=alloc.eta2, x=x)
            ctx_k = make_ctx(alpha=alloc.alpha, beta=alloc.alpha,
                             eta1=alloc.eta1, eta2=alloc.eta2, x=x)
            for v in interior_grid(ctx_f, 100):
                assert relay_threshold_bound(v, ctx_k) == pytest.approx(
                    relay_threshold_bound(v, ctx_f), abs=1e-12)

    def test_sign_rule_and_prediscontinuity_error(self):
        ctx = make_ctx(alpha=0.35, eta1=1.1, eta2=2.0, p_s=30.0, x=0.5)
        v_dc = discontinuity_point(ctx)
        assert v_dc > 0.0
        for v in interior_grid(ctx, 200):
            t = t_factor(v, ctx)
            assert (1.0 - t * ctx.alloc.alpha_bar) > 0.0
            assert relay_threshold_bound(v, ctx) >= -1e-12
        with pytest.raises(ValueError):
            relay_threshold_bound(0.5 * v_dc, ctx)

    def test_unequal_lowers_threshold(self, param_rng):
        for _ in range(10):
            alloc = draw_alloc(param_rng, beta_mode="ge")
            x = float(param_rng.uniform(0.1, 0.9))
            ctx_k = make_ctx(alpha=alloc.alpha, beta=alloc.beta,
                             eta1=alloc.eta1, eta2=alloc.eta2, x=x)
            ctx_f = make_ctx(alpha=alloc.alpha, eta1=alloc.eta1,
                             eta2=alloc.eta2, x=x)
            v_lo = max(discontinuity_point(ctx_f), discontinuity_point(ctx_k))
            span = alloc.eta1 - v_lo
            for v in np.linspace(v_lo + 1e-6 * span, alloc.eta1, 60):
                assert relay_threshold_bound(v, ctx_k) <= \
                    relay_threshold_bound(v, ctx_f) + 1e-12

    def test_conditional_simulation_oracle(self):
        alloc = TwoLayerAllocation(alpha=0.55, eta1=0.5, eta2=1.6)
        cfg = PowerConfig(p_s=6.0, p_r=4.0, q=25.0)
        ctx = BoundContext.from_config(alloc, cfg)
        v_lo = discontinuity_point(ctx)
        for frac in (0.3, 0.6, 0.9):
            v = v_lo + frac * (ctx.eta1 - v_lo)
            want = math.exp(-relay_threshold_bound(v, ctx))
            est = conditional_layer_probability(v, 1, ctx, blocks=200_000, seed=61)
            assert abs(want - est.mean) < 3 * max(est.stderr, 1e-4)


class TestUBound:
    def test_zero_at_eta2(self):
        ctx = make_ctx()
        assert u_bound(ctx.eta2, ctx, ctx.alloc.beta_bar) == pytest.approx(0.0, abs=1e-9)
        assert u_bound(ctx.eta2 + 0.2, ctx, ctx.alloc.beta_bar) < 0.0

    def test_decreasing_and_convex(self, param_rng):
        for _ in range(20):
            alloc = draw_alloc(param_rng, beta_mode="ge")
            ctx = make_ctx(alpha=alloc.alpha, beta=alloc.beta, eta1=alloc.eta1,
                           eta2=alloc.eta2, x=float(param_rng.uniform(0.05, 0.95)))
            vs = np.linspace(0.0, 0.999 * ctx.eta2, 1000)
            u = np.array([u_bound(v, ctx, ctx.alloc.beta_bar) for v in vs])
            assert np.all(np.diff(u) < 0.0)
            assert np.all(np.diff(u, 2) >= -1e-9)

    def test_increasing_in_x(self):
        base = make_ctx(x=0.4)
        hi = make_ctx(x=0.6)
        for v in np.linspace(0.0, 0.99 * base.eta2, 50):
            assert u_bound(v, hi, base.alloc.beta_bar) > \
                u_bound(v, base, base.alloc.beta_bar)

    def test_conditional_simulation_oracle(self):
        alloc = TwoLayerAllocation(alpha=0.55, eta1=0.5, eta2=1.6, beta=0.7)
        cfg = PowerConfig(p_s=6.0, p_r=4.0, q=25.0)
        ctx = BoundContext.from_config(alloc, cfg)
        for v in (0.7, 1.0, 1.4):
            want = math.exp(-u_bound(v, ctx, ctx.alloc.beta_bar))
            est = conditional_layer_probability(v, 2, ctx, blocks=200_000, seed=62)
            assert abs(want - est.mean) < 3 * max(est.stderr, 1e-4)

    def test_probability_one_beyond_eta2(self):
        alloc = TwoLayerAllocation(alpha=0.6, eta1=0.4, eta2=1.4)
        ctx = BoundContext.from_config(alloc, PowerConfig(p_s=8.0, p_r=5.0, q=30.0))
        est = conditional_layer_probability(ctx.eta2 * 1.05, 2, ctx,
                                            blocks=10_000, seed=63)
        assert est.mean == 1.0


class TestDiscontinuityPoint:
    def test_absent_when_condition_fails(self):
        ctx = make_ctx(alpha=0.9, eta1=0.1, eta2=0.5, x=0.3)
        assert math.exp(ctx.r1 / (1.0 - ctx.x)) <= 1.0 / ctx.alloc.alpha_bar
        assert discontinuity_point(ctx) == 0.0

    def test_defining_equation_and_location(self):
        ctx = make_ctx(alpha=0.35, eta1=1.1, eta2=2.0, p_s=30.0, x=0.5)
        v_dc = discontinuity_point(ctx)
        assert 0.0 < v_dc < ctx.eta1
        assert abs(t_factor(v_dc, ctx) * ctx.alloc.alpha_bar - 1.0) < 1e-9

    def test_unequal_uses_beta_fraction(self):
        ctx = make_ctx(alpha=0.35, beta=0.55, eta1=1.1, eta2=2.0, p_s=30.0, x=0.5)
        v_dcv = discontinuity_point(ctx)
        if v_dcv > 0.0:
            assert abs(t_factor(v_dcv, ctx) * ctx.alloc.beta_bar - 1.0) < 1e-9
        # the K family switches sign later than the F family
        assert v_dcv <= discontinuity_point(ctx, fraction=ctx.alloc.alpha_bar)


class TestThresholdComparisons:
    def test_max_rule_over_x(self, param_rng):
        # the bound evaluated at the larger decoding time dominates pointwise
        for _ in range(15):
            alloc = draw_alloc(param_rng)
            x = float(param_rng.uniform(0.05, 0.85))
            lo = make_ctx(alpha=alloc.alpha, eta1=alloc.eta1, eta2=alloc.eta2, x=x)
            hi = make_ctx(alpha=alloc.alpha, eta1=alloc.eta1, eta2=alloc.eta2,
                          x=x + 0.09)
            v_start = max(discontinuity_point(lo), discontinuity_point(hi))
            span = alloc.eta1 - v_start
            for v in np.linspace(v_start + 1e-6 * span, alloc.eta1, 200):
                assert relay_threshold_bound(v, hi) >= \
                    relay_threshold_bound(v, lo) - 1e-12

    def test_k_decreasing_where_signs_match(self, param_rng):
        for _ in range(15):
            alloc = draw_alloc(param_rng, beta_mode="ge")
            ctx = make_ctx(alpha=alloc.alpha, beta=alloc.beta, eta1=alloc.eta1,
                           eta2=alloc.eta2, x=float(param_rng.uniform(0.05, 0.95)))
            vs = interior_grid(ctx, 1000)
            t = np.array([t_factor(v, ctx) for v in vs])
            k = np.asarray(_k_values(vs, ctx))
            match = (np.sign(1.0 - t * ctx.alloc.alpha_bar)
                     == np.sign(1.0 - t * ctx.alloc.beta_bar))
            both = match[:-1] & match[1:]
            assert np.all(np.diff(k)[both] <= 1e-10)


class TestFindIntersections:
    def test_partition_structure(self, param_rng):
        checked = 0
        for _ in range(40):
            alloc = draw_alloc(param_rng, beta_mode="ge")
            ctx = make_ctx(alpha=alloc.alpha, beta=alloc.beta, eta1=alloc.eta1,
                           eta2=alloc.eta2, x=float(param_rng.uniform(0.05, 0.95)))
            part = find_intersections(ctx)
            checked += 1
            assert part.upper == ctx.eta1
            assert all(b > a for a, b in zip(part.crossings, part.crossings[1:]))
            # parity: U leading <=> even crossing count
            assert (len(part.crossings) % 2 == 0) == (part.leading_function == "U")
            segs = list(part.segments())
            assert segs[0][0] == part.v_lo and segs[-1][1] == part.upper
            assert all(s0[2] != s1[2] for s0, s1 in zip(segs, segs[1:]))
            for v in part.crossings:
                f = float(_k_values(v, ctx))
                u = float(_u_values(v, ctx, ctx.alloc.beta_bar))
                if abs(f) < 745.0:
                    # thresholds large enough to underflow exp(-f) cannot
                    # affect any integral, and near its pole the evaluation
                    # noise of the curve itself exceeds any fixed tolerance
                    assert abs(f - u) < 1e-9 * max(1.0, abs(f))
        assert checked == 40

    def test_miso_like_counts(self, param_rng):
        # at zero decoding time the threshold curves are the MISO lines:
        # only 0, 1 or 2 crossings can occur
        for _ in range(40):
            alloc = draw_alloc(param_rng, beta_mode="ge")
            ctx = make_ctx(alpha=alloc.alpha, beta=alloc.beta, eta1=alloc.eta1,
                           eta2=alloc.eta2, x=0.0)
            part = find_intersections(ctx)
            assert len(part.crossings) in (0, 1, 2)
