import math
import random
from collections import Counter
from fractions import Fraction

import pytest

from prodfree import (
    DomainMismatchError,
    InvariantViolationError,
    MultSet,
    PreconditionError,
    SearchExhaustedError,
    StageFailedError,
    build_group,
    compute_bounds_profile,
    find_homogeneous_tuple,
    generate,
    localize_small_triple,
    petridis_subset,
    product_free_extract,
    product_set,
    seh_halving,
    verify_certificate,
)
from conftest import (
    naive_is_product_free,
    naive_product_keys,
    naive_triple_product_keys,
)

HALF = Fraction(1, 2)
TWO_FIFTHS = Fraction(2, 5)


# ---------------------------------------------------------------------------
# constants chain


def test_bounds_profile_half_half():
    p = compute_bounds_profile(HALF, HALF)
    # delta = alpha = 1/2: every derived constant is a power of two, so
    # float equality is exact
    assert p.c0 == 1.0
    assert p.eps0 == 0.25
    assert p.c1 == 3.0
    assert p.eps1 == 0.0625
    assert p.c2 == 13.0
    assert p.eps2 == 0.03125


def test_bounds_profile_chain_relations():
    p = compute_bounds_profile(TWO_FIFTHS, HALF)
    assert p.c0 == math.log2(5) - math.log2(2)
    assert p.eps0 == float(TWO_FIFTHS) * 0.5**p.c0
    assert p.c1 == 3 * p.c0
    assert p.eps1 == 4 * p.eps0**3
    assert p.c2 == 3 * p.c1 + 4
    assert p.eps2 == min(p.eps1 / 2, 1 / 16)
    assert compute_bounds_profile(Fraction(1, 4), HALF).c0 == 2.0


def test_bounds_profile_c0_ignores_alpha():
    weird = compute_bounds_profile(HALF, Fraction(99, 100))
    assert weird.c0 == 1.0


@pytest.mark.parametrize("delta,alpha", [(0, HALF), (1, HALF), (HALF, 0), (HALF, 1), (2, HALF)])
def test_bounds_profile_range_checks(delta, alpha):
    with pytest.raises(PreconditionError):
        compute_bounds_profile(delta, alpha)


# ---------------------------------------------------------------------------
# tripling subsets


def test_petridis_whole_set_qualifies(int_group):
    x = MultSet(int_group, range(1, 13))
    x2 = naive_product_keys(int_group, x.keys, x.keys)
    k = Fraction(len(x2), len(x))
    y = petridis_subset(x, k)
    assert y == x
    y3 = naive_triple_product_keys(int_group, y.keys, y.keys, y.keys)
    assert len(y3) * k.denominator**3 <= k.numerator**3 * len(y)


def test_petridis_size_bound_exact(int_group):
    rng = random.Random(4)
    for _ in range(30):
        ks = rng.sample(range(-25, 26), rng.randint(1, 12))
        x = MultSet(int_group, ks)
        x2 = naive_product_keys(int_group, ks, ks)
        k = Fraction(len(x2), len(x))
        y = petridis_subset(x, k)
        assert y.key_set() <= x.key_set()
        assert len(y) * k.numerator >= len(x) * k.denominator


def test_petridis_preconditions(int_group):
    x = MultSet(int_group, [1, 2])
    with pytest.raises(PreconditionError):
        petridis_subset(x, Fraction(1, 2))  # k below 1
    with pytest.raises(PreconditionError):
        petridis_subset(x, 1)  # |X^2| = 3 > 1 * |X|
    with pytest.raises(PreconditionError):
        petridis_subset(MultSet(int_group, []), 2)


def test_petridis_accepts_generous_k(int_group):
    x = MultSet(int_group, [0, 1, 5])
    assert petridis_subset(x, 10) == x


# ---------------------------------------------------------------------------
# homogeneous tuples


def test_finder_threshold_split_on_integers(int_group):
    s = MultSet(int_group, range(1, 17))
    tup = find_homogeneous_tuple(s, s, s, s, s, s, HALF)
    assert all(p.keys == tuple(range(1, 9)) for p in tup.u_parts)
    assert all(p.keys == tuple(range(9, 17)) for p in tup.v_parts)
    up = naive_triple_product_keys(int_group, *[p.keys for p in tup.u_parts])
    vp = naive_triple_product_keys(int_group, *[p.keys for p in tup.v_parts])
    assert not (up & vp)
    assert tup.u_product_size == len(up) == 22
    assert tup.v_product_size == len(vp) == 22
    assert tup.side == "u"  # tie resolves to u
    assert tup.achieved_density == HALF
    assert tup.chosen() == tup.u_parts
    assert tup.chosen_product_size() == 22


def test_finder_density_floor_of_two(int_group):
    a = MultSet(int_group, [0, 1, 2])
    b = MultSet(int_group, [100, 101, 102])
    tup = find_homogeneous_tuple(a, a, a, b, b, b, Fraction(1, 10))
    # ceil(3/10) = 1 would be degenerate; the floor keeps 2 per part
    assert all(len(p) == 2 for p in tup.u_parts + tup.v_parts)


def test_finder_sampled_path_in_cyclic_group():
    g = build_group("cyclic:1000")
    a = MultSet(g, range(1, 6))
    b = MultSet(g, range(401, 406))
    tup = find_homogeneous_tuple(a, a, a, b, b, b, TWO_FIFTHS)
    up = naive_triple_product_keys(g, *[p.keys for p in tup.u_parts])
    vp = naive_triple_product_keys(g, *[p.keys for p in tup.v_parts])
    assert not (up & vp)
    assert tup.achieved_density >= TWO_FIFTHS


def test_finder_exhausts_on_identical_two_point_inputs(int_group):
    s = MultSet(int_group, [0, 1])
    with pytest.raises(SearchExhaustedError):
        find_homogeneous_tuple(s, s, s, s, s, s, HALF)


def test_finder_input_validation(int_group):
    s = MultSet(int_group, range(4))
    tiny = MultSet(int_group, [1])
    with pytest.raises(PreconditionError):
        find_homogeneous_tuple(tiny, s, s, s, s, s, HALF)
    with pytest.raises(PreconditionError):
        find_homogeneous_tuple(s, s, s, s, s, s, Fraction(3, 2))
    other = MultSet(build_group("cyclic:9"), range(4))
    with pytest.raises(DomainMismatchError):
        find_homogeneous_tuple(s, s, s, s, s, other, HALF)


def test_finder_is_deterministic(int_group):
    s = MultSet(int_group, range(-10, 11, 2))
    t1 = find_homogeneous_tuple(s, s, s, s, s, s, TWO_FIFTHS)
    t2 = find_homogeneous_tuple(s, s, s, s, s, s, TWO_FIFTHS)
    assert [p.keys for p in t1.u_parts] == [p.keys for p in t2.u_parts]
    assert [p.keys for p in t1.v_parts] == [p.keys for p in t2.v_parts]


# ---------------------------------------------------------------------------
# iterated halving


def test_halving_worked_example(int_group):
    """{1..16} at alpha = delta = 1/2 halves three times: 46, 22, 10, 4."""
    y = MultSet(int_group, range(1, 17))
    res = seh_halving(y, HALF, HALF)
    assert not res.used_fallback
    assert [s.product_size for s in res.stages] == [46, 22, 10, 4]
    assert res.planned_steps == 4
    assert res.u.keys == res.v.keys == res.w.keys == (1, 2)
    for stage in res.stages:
        want = naive_triple_product_keys(
            int_group, stage.u.keys, stage.v.keys, stage.w.keys
        )
        assert stage.product_size == len(want)
    for prev, nxt in zip(res.stages, res.stages[1:]):
        assert nxt.u.key_set() <= prev.u.key_set()
        assert nxt.v.key_set() <= prev.v.key_set()
        assert nxt.w.key_set() <= prev.w.key_set()
        assert 2 * len(nxt.u) >= len(prev.u)
        assert 2 * nxt.product_size <= prev.product_size
    assert 2 * res.stages[-1].product_size <= len(y)


def test_halving_needs_enough_points(int_group):
    with pytest.raises(PreconditionError):
        seh_halving(MultSet(int_group, range(15)), HALF, HALF)


def test_halving_fallback_on_high_tripling_gap(int_group):
    """Rank-3 progression: tripling ratio ~7, planned steps overshoot."""
    y = generate("gap:3:1,1,1:1,5,25")
    assert len(y) == 27
    y3 = naive_triple_product_keys(int_group, y.keys, y.keys, y.keys)
    t = 0
    while (len(y) << t) < 2 * len(y3):  # 2^t * |Y|/2 < |Y^3|
        t += 1
    n = t + 1
    assert (n, 2 * 5 ** (n - 2) > 2 ** (n - 2) * 27) == (5, True)
    res = seh_halving(y, HALF, TWO_FIFTHS)
    assert res.used_fallback
    assert res.planned_steps == 5
    assert len(res.u) == len(res.v) == len(res.w) == 2
    assert res.stages[-1].product_size <= 8
    assert 2 * res.stages[-1].product_size <= len(y)


def test_halving_stops_early_once_alpha_is_met(int_group):
    y = MultSet(int_group, range(1, 41))
    res = seh_halving(y, HALF, TWO_FIFTHS)
    assert len(res.stages) - 1 < res.planned_steps
    assert 2 * res.stages[-1].product_size <= len(y)


def test_halving_is_deterministic(int_group):
    y = MultSet(int_group, range(-20, 21))
    a = seh_halving(y, HALF, TWO_FIFTHS)
    b = seh_halving(y, HALF, TWO_FIFTHS)
    assert [s.product_size for s in a.stages] == [s.product_size for s in b.stages]
    assert a.u.keys == b.u.keys


# ---------------------------------------------------------------------------
# localization


def _naive_buckets(g, u_keys, v_keys, w_keys):
    kmul = g.kmul
    buckets = Counter()
    for z in v_keys:
        for a in u_keys:
            for b in w_keys:
                buckets[(kmul(a, z), kmul(z, b))] += 1
    return buckets


def test_localize_worked_example(int_group):
    y = MultSet(int_group, range(1, 17))
    part = MultSet(int_group, [1, 2])
    buckets = _naive_buckets(int_group, part.keys, part.keys, part.keys)
    best = max(buckets.values())
    assert sum(buckets.values()) == 8
    assert min(gh for gh, c in buckets.items() if c == best) == (3, 3)
    res = localize_small_triple(y, part, part, part)
    assert (res.g.key, res.h.key) == (3, 3)
    assert res.z.keys == (1, 2)
    assert res.pair_total == 8
    assert res.zzz.keys == (-3, -2, -1, 0)
    assert len(res.z) * len(y) ** 2 >= 4 * len(part) ** 3
    assert 2 * len(res.zzz) <= len(y)


def test_localize_matches_naive_buckets_random(int_group):
    rng = random.Random(12)
    for _ in range(15):
        y_keys = sorted(rng.sample(range(-60, 61), 40))
        y = MultSet(int_group, y_keys)
        parts = []
        for _ in range(3):
            parts.append(MultSet(int_group, rng.sample(y_keys, 2)))
        u, v, w = parts
        uvw = naive_triple_product_keys(int_group, u.keys, v.keys, w.keys)
        if 2 * len(uvw) > len(y):
            continue
        buckets = _naive_buckets(int_group, u.keys, v.keys, w.keys)
        best = max(buckets.values())
        want_gh = min(gh for gh, c in buckets.items() if c == best)
        res = localize_small_triple(y, u, v, w)
        assert (res.g.key, res.h.key) == want_gh
        assert len(res.z) == best
        assert res.pair_total == len(u) * len(v) * len(w)


def test_localize_generic_path_heisenberg():
    g = build_group("heisenberg:3")
    y = MultSet(g, g.enum_keys)
    e = g.identity_key
    u = MultSet(g, [e, (1, 1, 0, 0, 1, 0, 0, 0, 1)])
    v = MultSet(g, [e, (1, 0, 0, 0, 1, 1, 0, 0, 1)])
    w = MultSet(g, [e, (1, 0, 1, 0, 1, 0, 0, 0, 1)])
    buckets = _naive_buckets(g, u.keys, v.keys, w.keys)
    res = localize_small_triple(y, u, v, w)
    assert res.pair_total == sum(buckets.values()) == 8
    best = max(buckets.values())
    assert len(res.z) == best
    assert (res.g.key, res.h.key) == min(
        gh for gh, c in buckets.items() if c == best
    )
    zzz = naive_product_keys(
        g, naive_product_keys(g, [g.kinv(k) for k in res.z.keys], res.z.keys),
        [g.kinv(k) for k in res.z.keys],
    )
    assert res.zzz.key_set() == frozenset(zzz)


def test_localize_preconditions(int_group):
    y = MultSet(int_group, range(1, 17))
    fat = MultSet(int_group, range(1, 5))
    with pytest.raises(PreconditionError):
        localize_small_triple(y, fat, fat, fat)  # |UVW| = 10 > 8
    outside = MultSet(int_group, [99])
    with pytest.raises(PreconditionError):
        localize_small_triple(y, outside, fat, fat)
    with pytest.raises(PreconditionError):
        localize_small_triple(y, MultSet(int_group, []), fat, fat)
    other = MultSet(build_group("cyclic:20"), [1])
    with pytest.raises(DomainMismatchError):
        localize_small_triple(y, other, fat, fat)


# ---------------------------------------------------------------------------
# end-to-end extraction


def test_extract_two_point_set_takes_singleton(int_group):
    x = MultSet(int_group, [0, 1])
    cert = product_free_extract(x)
    assert cert.params["branch"] == "singleton"
    assert cert.witness == ["1"]
    assert cert.verified_product_free
    assert cert.guarantee is not None and 0 < cert.guarantee < 1


def test_extract_singleton_branch_condition(int_group):
    x = MultSet(int_group, range(-8, 9))
    x2 = naive_product_keys(int_group, x.keys, x.keys)
    assert len(x) ** 2 < 16 * len(x2)  # 289 < 528
    cert = product_free_extract(x)
    assert cert.params["branch"] == "singleton"
    assert cert.witness == ["-8"]
    assert cert.trace[0].stage == "singleton-branch"
    ok, problems = verify_certificate(cert, x)
    assert ok and problems == []


def test_extract_main_branch_full_trace(int_group):
    x = MultSet(int_group, range(-50, 51))
    x2 = naive_product_keys(int_group, x.keys, x.keys)
    assert len(x) ** 2 >= 16 * len(x2)  # main branch territory
    cert = product_free_extract(x)
    assert cert.params["branch"] == "main"
    stages = [t.stage for t in cert.trace]
    assert stages[0] == "petridis-size"
    assert stages[1] == "petridis-tripling"
    assert "halving-final" in stages
    assert stages[-2] == "pigeonhole"
    assert stages[-1] == "product-free-shift"
    assert all(t.holds for t in cert.trace)
    witness_keys = [int(t) for t in cert.witness]
    assert set(witness_keys) <= set(x.keys)
    assert naive_is_product_free(int_group, witness_keys)
    assert cert.guarantee is not None
    assert cert.achieved_size >= math.ceil(cert.guarantee)
    ok, problems = verify_certificate(cert, x)
    assert ok and problems == []


def test_extract_guarantee_is_floored_rational(int_group):
    x = MultSet(int_group, range(-50, 51))
    cert = product_free_extract(x)
    p = compute_bounds_profile(TWO_FIFTHS, HALF)
    k = Fraction(201, 101)
    exact = p.eps2 * len(x) / float(k) ** p.c2
    assert cert.guarantee.denominator <= 10**9
    assert float(cert.guarantee) <= exact < float(cert.guarantee) + 2e-9


def test_extract_is_deterministic(int_group):
    x = MultSet(int_group, range(-60, 61))
    a = product_free_extract(x)
    b = product_free_extract(x)
    assert a.to_json() == b.to_json()


def test_extract_respects_custom_profile(int_group):
    x = MultSet(int_group, range(-50, 51))
    profile = compute_bounds_profile(Fraction(1, 3), HALF)
    cert = product_free_extract(x, profile)
    assert cert.params["delta"] == "1/3"
    assert cert.verified_product_free


def test_extract_stage_failure_carries_partial_certificate():
    # the full cyclic group has doubling 1 but no split survives wraparound
    g = build_group("cyclic:40")
    x = MultSet(g, range(40))
    with pytest.raises(StageFailedError) as info:
        product_free_extract(x)
    cert = info.value.certificate
    assert cert is not None
    assert cert.params["status"] == "incomplete:halving"
    assert cert.witness == []
    assert not cert.verified_product_free
    ok, problems = verify_certificate(cert, x)
    assert not ok


def test_extract_rejects_degenerate_inputs(int_group):
    with pytest.raises(PreconditionError):
        product_free_extract(MultSet(int_group, []))
    with pytest.raises(PreconditionError):
        product_free_extract(MultSet(int_group, [0]))


def test_extract_cyclic_small_set_singleton():
    g = build_group("cyclic:30")
    x = MultSet(g, [3, 7, 11, 29])
    cert = product_free_extract(x)
    assert cert.params["branch"] == "singleton"
    assert cert.witness == ["3"]
    assert cert.verified_product_free
