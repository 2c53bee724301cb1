import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_policy
from oracles import feedback_profile, nofeedback_profile, profile_distance
from twoway_secrecy import (
    GridSpec,
    InputPolicy,
    Pmf,
    RatePoint,
    RateRegion,
    TwoWayChannel,
    builtin_adder,
    builtin_bmc,
    builtin_xor,
    convex_hull,
    inner_point,
    joint_from_policy,
    mutual_info,
    nofeedback_point,
    outer_common_output_point,
    outer_general_point,
    region_contains,
    sweep,
)
from twoway_secrecy.errors import DimensionMismatch, MarkovViolation, NotCommonOutput, ValidationError
from twoway_secrecy.regions import INNER_FEEDBACK, INNER_NOFEEDBACK, OUTER, default_workers, policy_terms

UNIFORM = InputPolicy.identity([0.5, 0.5], [0.5, 0.5])


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


# ---------------------------------------------------------------------------
# single-policy bounds


def test_inner_xor_uniform():
    b = inner_point(builtin_xor(), UNIFORM)
    assert b.r1s_max == pytest.approx(1.0, abs=1e-12)
    assert b.r2_bound == pytest.approx(1.0, abs=1e-12)
    assert b.feasible


def test_inner_bmc_uniform():
    b = inner_point(builtin_bmc(), UNIFORM)
    assert b.r1s_sum_bound == pytest.approx(1 - h2(0.25), abs=1e-12)
    assert b.r1s_key_bound == pytest.approx(0.5 - (h2(0.25) - 0.5), abs=1e-12)
    assert b.r1s_max == pytest.approx(0.18872, abs=1e-5)
    assert b.r2_bound == pytest.approx(0.5, abs=1e-12)


def test_inner_adder_uniform():
    b = inner_point(builtin_adder(), UNIFORM)
    assert b.r1s_max == pytest.approx(0.5, abs=1e-12)
    assert b.r2_bound == pytest.approx(1.0, abs=1e-12)


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        inner_point(builtin_xor(), InputPolicy.identity([1 / 3] * 3, [0.5, 0.5]))


def test_negative_bounds_clamp_to_zero():
    # user 1 is invisible to user 2 but fully visible to the eavesdropper
    w = np.zeros((2, 2, 1, 1, 2))
    for x1 in range(2):
        w[x1, :, 0, 0, x1] = 1.0
    b = inner_point(TwoWayChannel(w), UNIFORM)
    assert b.r1s_key_bound < 0
    assert b.corner() == RatePoint(0.0, 0.0)


def test_nofeedback_xor_uniform():
    poly = nofeedback_point(builtin_xor(), UNIFORM)
    assert poly.max_r1s(0.0) == pytest.approx(1.0, abs=1e-12)
    assert poly.max_r1s(1.0) == pytest.approx(0.0, abs=1e-12)
    assert poly.public_only_point() == RatePoint(0.0, 1.0)


def test_nofeedback_vertices():
    poly = nofeedback_point(builtin_bmc(), InputPolicy.bernoulli(0.6, 0.6))
    verts = poly.vertices()
    assert RatePoint(0.0, 0.0) in verts
    for v in verts:
        assert poly.contains(v)
    assert math.isnan(poly.max_r1s(poly.c + 0.1))


@pytest.mark.parametrize("seed", range(5))
def test_nofeedback_inside_feedback_rectangle(builtin, seed):
    rng = np.random.default_rng(seed)
    pol = random_policy(rng, builtin.x1_size, builtin.x2_size)
    rect = inner_point(builtin, pol)
    poly = nofeedback_point(builtin, pol)
    for v in poly.vertices():
        assert rect.feasible
        assert v.r1s <= rect.r1s_max + 1e-9 and v.r2 <= rect.r2_bound + 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_common_output_branch_formula(builtin, seed):
    # with Y1 = Y2 = Z and no time sharing, min(sum, key) equals the
    # two-branch expression selected by I(U2;Z|X1) < I(U2;Z|U1)
    rng = np.random.default_rng(seed)
    pol = random_policy(rng, q_card=1)
    p = joint_from_policy(builtin, pol)
    i1 = mutual_info(p, "U1", "Z", "X2")
    i2 = mutual_info(p, "U2", "Z", "X1")
    if i2 < mutual_info(p, "U2", "Z", "U1"):
        expected = i1 + i2 - mutual_info(p, ("U1", "U2"), "Z")
    else:
        expected = i1 - mutual_info(p, "U1", "Z")
    b = inner_point(builtin, pol)
    assert min(b.r1s_sum_bound, b.r1s_key_bound) == pytest.approx(expected, abs=1e-12)


def test_outer_common_output_examples():
    u = np.full((2, 2), 0.25)
    assert outer_common_output_point(builtin_xor(), u) == RatePoint(1.0, 1.0)
    assert outer_common_output_point(builtin_adder(), u).r1s == pytest.approx(0.5, abs=1e-12)
    point_mass = np.array([[0.0, 0.0], [1.0, 0.0]])
    for ch in (builtin_xor(), builtin_bmc(), builtin_adder()):
        assert outer_common_output_point(ch, point_mass) == RatePoint(0.0, 0.0)


def test_outer_accepts_pmf():
    px = Pmf([("X1", 2), ("X2", 2)], np.full((2, 2), 0.25))
    assert outer_common_output_point(builtin_xor(), px) == RatePoint(1.0, 1.0)
    with pytest.raises(DimensionMismatch):
        outer_common_output_point(builtin_xor(), Pmf([("A", 2), ("B", 2)], np.full((2, 2), 0.25)))


def test_outer_requires_common_output():
    w = np.zeros((2, 2, 2, 2, 2))
    w[..., 0, 0, :] = 0.5
    with pytest.raises(NotCommonOutput):
        outer_common_output_point(TwoWayChannel(w), np.full((2, 2), 0.25))


def _aux_v_is_inputs(px):
    # Q, U constant; V = (X1, X2) indexed as 2*x1 + x2
    t = np.zeros((1, 1, 4, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            t[0, 0, 2 * x1 + x2, x1, x2] = px[x1, x2]
    return Pmf([("Q", 1), ("U", 1), ("V", 4), ("X1", 2), ("X2", 2)], t)


def test_outer_general_examples():
    aux = _aux_v_is_inputs(np.full((2, 2), 0.25))
    assert outer_general_point(builtin_xor(), aux).r1s == pytest.approx(1.0, abs=1e-12)
    assert outer_general_point(builtin_adder(), aux).r1s == pytest.approx(0.5, abs=1e-12)
    const = Pmf([("Q", 1), ("U", 1), ("V", 1), ("X1", 2), ("X2", 2)], np.full((1, 1, 1, 2, 2), 0.25))
    assert outer_general_point(builtin_xor(), const).r1s == 0.0


def test_outer_general_markov_violation():
    # Q carries X1 while V is constant: Q -> U -> V -> X broken
    t = np.zeros((2, 1, 1, 2, 2))
    for q in range(2):
        t[q, 0, 0, q, :] = 0.25
    with pytest.raises(MarkovViolation):
        outer_general_point(builtin_xor(), Pmf([("Q", 2), ("U", 1), ("V", 1), ("X1", 2), ("X2", 2)], t))


@pytest.mark.parametrize("seed", range(10))
def test_common_output_form_matches_general_bound(builtin, seed):
    # with V = (X1, X2) the general bound reduces to the common-output one
    rng = np.random.default_rng(seed)
    px = rng.dirichlet(np.ones(4)).reshape(2, 2)
    general = outer_general_point(builtin, _aux_v_is_inputs(px))
    closed = outer_common_output_point(builtin, px)
    assert general.r1s == pytest.approx(closed.r1s, abs=1e-12)
    assert general.r2 == pytest.approx(closed.r2, abs=1e-12)


@pytest.mark.parametrize("seed", range(40))
def test_inner_inside_outer(builtin, seed):
    rng = np.random.default_rng(1000 + seed)
    pol = random_policy(rng)
    b = inner_point(builtin, pol)
    outer = outer_common_output_point(builtin, pol.input_law())
    assert b.r1s_max <= outer.r1s + 1e-9
    assert b.r2_bound <= outer.r2 + 1e-9


# ---------------------------------------------------------------------------
# sub-rate elimination


def _terms(ch, pol):
    t = policy_terms(ch, pol)
    return t.i1, t.i2, t.iz, t.iz1, t.iz2


@pytest.mark.parametrize("seed", range(3))
def test_nofeedback_matches_enumeration(builtin, seed):
    rng = np.random.default_rng(seed)
    pol = InputPolicy.bernoulli(*rng.uniform(0.05, 0.95, 2), *rng.uniform(0, 0.3, 2))
    poly = nofeedback_point(builtin, pol)
    r2, best = nofeedback_profile(_terms(builtin, pol), step=0.01)
    if poly.empty:
        assert len(r2) == 0
        return
    d = profile_distance(r2, best, poly.max_r1s, min(poly.c, poly.s))
    assert d <= 0.02


@pytest.mark.parametrize("seed", range(3))
def test_feedback_matches_enumeration(builtin, seed):
    rng = np.random.default_rng(seed)
    pol = InputPolicy.bernoulli(*rng.uniform(0.05, 0.95, 2))
    b = inner_point(builtin, pol)
    r2, best = feedback_profile(_terms(builtin, pol), step=0.05)
    if min(b.r1s_sum_bound, b.r1s_key_bound) < 0 or not b.feasible:
        pytest.skip("policy outside the clamped regime")

    def rect(v):
        return b.r1s_max if v <= b.r2_bound + 1e-12 else math.nan

    assert profile_distance(r2, best, rect, b.r2_bound) <= 0.1


# ---------------------------------------------------------------------------
# hulls and regions


def test_hull_time_sharing_line():
    h = convex_hull([RatePoint(1, 0), RatePoint(0, 1)])
    assert h == [RatePoint(1, 0), RatePoint(0, 1)]


def test_hull_of_single_point():
    assert convex_hull([RatePoint(1, 1)]) == [RatePoint(1, 0), RatePoint(1, 1), RatePoint(0, 1)]


def test_hull_drops_collinear_points():
    h = convex_hull([RatePoint(1, 0), RatePoint(0.5, 0.5), RatePoint(0, 1)])
    assert h == [RatePoint(1, 0), RatePoint(0, 1)]


def test_hull_of_origin():
    assert convex_hull([RatePoint(0, 0)]) == [RatePoint(0, 0)]


def test_hull_ignores_rounding_noise():
    pts = [RatePoint(1.0000000000000002, 0.97), RatePoint(1.0, 1.0), RatePoint(1.0, 0.97)]
    assert RatePoint(1.0, 1.0) in convex_hull(pts)


points = st.lists(
    st.tuples(st.floats(0, 2, allow_nan=False), st.floats(0, 2, allow_nan=False)), min_size=1, max_size=25
)


@given(points)
def test_hull_idempotent_and_monotone(raw):
    pts = [RatePoint(*p) for p in raw]
    h = convex_hull(pts)
    assert convex_hull(h) == h
    r1s = [p.r1s for p in h]
    r2 = [p.r2 for p in h]
    assert r2 == sorted(r2)
    assert r1s == sorted(r1s, reverse=True)
    reg = RateRegion.from_points(pts, "t")
    for p in pts:
        assert reg.contains(p)


@given(points)
def test_hull_is_convex(raw):
    h = [p.as_tuple() for p in convex_hull([RatePoint(*p) for p in raw])]
    for a, b, c in zip(h, h[1:], h[2:]):
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        assert cross > 0


def test_region_contains_examples():
    reg = sweep(builtin_xor(), GridSpec(step=0.25), INNER_FEEDBACK)
    assert region_contains(reg, RatePoint(0.5, 0.5))
    assert region_contains(reg, (1.0, 1.0))
    assert not region_contains(reg, (1.0 + 1e-3, 0.0))
    assert not region_contains(reg, (-0.1, 0.0))
    origin = RateRegion.from_points([RatePoint(0, 0)], "t")
    assert region_contains(origin, (0.0, 0.0))
    assert not region_contains(origin, (0.1, 0.0))
    segment = RateRegion.from_points([RatePoint(0.5, 0)], "t")
    assert region_contains(segment, (0.25, 0.0))
    assert not region_contains(segment, (0.25, 0.1))


def test_r1s_at_and_sample():
    reg = RateRegion.from_points([RatePoint(1, 0.5), RatePoint(0.5, 1)], "t")
    np.testing.assert_allclose(reg.r1s_at([0.0, 0.5, 0.75, 1.0]), [1.0, 1.0, 0.75, 0.5])
    assert np.isnan(reg.r1s_at(1.5)[0])
    r2, r1s = reg.sample()
    assert len(r2) == 201 and r2[-1] == 1.0
    assert not np.isnan(r1s).any()


def test_rate_point_validation():
    assert RatePoint(-1e-14, 0.0).r1s == 0.0
    with pytest.raises(ValueError):
        RatePoint(-0.1, 0.0)
    with pytest.raises(ValueError):
        RatePoint(math.inf, 0.0)


# ---------------------------------------------------------------------------
# sweeps


def test_sweep_xor():
    reg = sweep(builtin_xor(), GridSpec(step=0.05), INNER_FEEDBACK)
    assert reg.contains((1.0, 1.0), tol=1e-9)
    outer = sweep(builtin_xor(), GridSpec(step=0.05), OUTER)
    assert outer.max_r1s == pytest.approx(1.0, abs=1e-9)
    assert outer.contains((1.0, 1.0))


def test_sweep_adder():
    reg = sweep(builtin_adder(), GridSpec(step=0.05), INNER_FEEDBACK)
    assert reg.max_r1s == pytest.approx(0.5, abs=1e-6)
    assert reg.max_r2 == pytest.approx(1.0, abs=1e-6)


def test_bmc_feedback_beats_nofeedback():
    g = GridSpec(step=0.05)
    fb = sweep(builtin_bmc(), g, INNER_FEEDBACK)
    nf = sweep(builtin_bmc(), g, INNER_NOFEEDBACK)
    r2 = np.linspace(0, nf.max_r2, 101)
    gap = fb.r1s_at(r2) - nf.r1s_at(r2)
    assert np.all(gap >= -1e-9)
    assert gap.max() > 0.01


def test_grid_refinement_never_shrinks(builtin):
    coarse = sweep(builtin, GridSpec(step=0.1), INNER_FEEDBACK)
    fine = sweep(builtin, GridSpec(step=0.05), INNER_FEEDBACK)
    for p in coarse.hull:
        assert fine.contains(p, tol=1e-9)


def test_prefix_and_time_sharing_grids_extend_region():
    base = sweep(builtin_bmc(), GridSpec(step=0.25), INNER_FEEDBACK)
    prefixed = sweep(builtin_bmc(), GridSpec(step=0.25, prefix_step=0.25), INNER_FEEDBACK)
    shared = sweep(builtin_bmc(), GridSpec(step=0.5, q_card=2, q_weight_step=0.25), INNER_FEEDBACK)
    for p in base.hull:
        assert prefixed.contains(p)
    assert shared.grid == {"step": 0.5, "q_card": 2, "prefix": None}


def test_parallel_sweep_matches_serial():
    g = GridSpec(step=0.1)
    serial = sweep(builtin_bmc(), g, INNER_NOFEEDBACK, workers=1)
    parallel = sweep(builtin_bmc(), g, INNER_NOFEEDBACK, workers=2)
    assert serial.hull == parallel.hull
    assert serial.points == parallel.points


def test_grid_validation():
    for bad in (dict(step=0.0), dict(step=0.7), dict(q_card=3), dict(prefix_step=0.0)):
        with pytest.raises(ValidationError):
            GridSpec(**bad)
    with pytest.raises(ValidationError):
        sweep(builtin_xor(), GridSpec(step=0.5), "bogus")


def test_grid_enumeration_sizes():
    g = GridSpec(step=0.5)
    assert len(list(g.policies(builtin_xor()))) == 9
    assert len(list(g.input_laws(builtin_xor()))) == 10
    for law in g.input_laws(builtin_adder()):
        assert law.sum() == pytest.approx(1.0)


def test_outer_sweep_needs_common_output():
    w = np.zeros((2, 2, 2, 2, 2))
    w[..., 0, 0, :] = 0.5
    with pytest.raises(NotCommonOutput):
        sweep(TwoWayChannel(w), GridSpec(step=0.5), OUTER)


def test_region_serialisation():
    reg = sweep(builtin_xor(), GridSpec(step=0.5), INNER_FEEDBACK)
    d = reg.to_dict()
    assert d["label"] == INNER_FEEDBACK
    assert d["grid"] == {"step": 0.5, "q_card": 1, "prefix": None}
    assert d["hull"][1] == {"r1s": 1.0, "r2": 1.0}


def test_default_workers(monkeypatch):
    monkeypatch.setenv("SECRECY_REGIONS_THREADS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("SECRECY_REGIONS_THREADS", "0")
    assert default_workers() >= 1
    monkeypatch.setenv("SECRECY_REGIONS_THREADS", "junk")
    assert default_workers() == 1
    monkeypatch.delenv("SECRECY_REGIONS_THREADS")
    assert default_workers() == 1
