"""Iterated halving, triple localization, and the coset-pigeonhole extraction.

The chain of stages, each consuming the previous one's output:

* ``petridis_subset``: from a set of doubling k, a subset with tripling at
  most k^3 and at least a 1/k fraction of the points,
* ``seh_halving``: iterated density splitting until the triple product of
  three nested subsets drops below alpha |Y|,
* ``localize_small_triple``: a bucket argument turning the small triple
  product into one set Z with |Z^-1 Z Z^-1| <= |Y| / 2,
* ``product_free_extract``: a final pigeonhole over shifts g of Z picking
  a product-free gZ whose intersection with Y is the witness.

Every stage re-verifies its own output bounds with exact integer
arithmetic; bounds that are theorems raise InvariantViolationError when
they fail, bounds that depend on honest search raise SearchExhaustedError.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .certificates import build_certificate, record
from .errors import (
    BudgetExceededError,
    DomainMismatchError,
    InvariantViolationError,
    PreconditionError,
    SearchExhaustedError,
    StageFailedError,
)
from .groups import Element, GroupOracle
from .sets import (
    DEFAULT_PRODUCT_BUDGET,
    MultSet,
    frac_str,
    inverse_set,
    is_product_free,
    power_set,
    product_set,
)

PETRIDIS_EXHAUSTIVE_MAX = 16
PETRIDIS_MOVE_BUDGET = 10**4
FINDER_TRIALS = 64
FINDER_EXHAUSTIVE_MAX = 8
FINDER_EXHAUSTIVE_CHECKS = 10**5


@dataclass(frozen=True)
class BoundsProfile:
    """The constant chain driving the halving loop and the final bound.

    delta is the density the tuple finder is asked to achieve, alpha the
    target shrink factor of the halving loop.  The derived constants feed
    the final guarantee eps2 |X| / k^c2.
    """

    delta: Fraction
    alpha: Fraction
    c0: float
    eps0: float
    c1: float
    eps1: float
    c2: float
    eps2: float


def compute_bounds_profile(delta, alpha) -> BoundsProfile:
    delta = Fraction(delta)
    alpha = Fraction(alpha)
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0,1), got {delta}")
    if not 0 < alpha < 1:
        raise PreconditionError(f"alpha must lie in (0,1), got {alpha}")
    c0 = math.log2(delta.denominator) - math.log2(delta.numerator)
    eps0 = float(delta) * float(alpha) ** c0
    c1 = 3.0 * c0
    eps1 = 4.0 * eps0**3
    c2 = 3.0 * c1 + 4.0
    eps2 = min(eps1 / 2.0, 1.0 / 16.0)
    for name, val in (("eps0", eps0), ("eps1", eps1), ("eps2", eps2)):
        if not 0.0 < val < 1.0:
            raise InvariantViolationError(f"{name} = {val} escaped (0,1)")
    return BoundsProfile(delta, alpha, c0, eps0, c1, eps1, c2, eps2)


def _digest_seed(*sets: MultSet, extra: str = "") -> int:
    h = hashlib.sha256()
    for s in sets:
        h.update(s.oracle.domain.encode())
        for k in s.keys:
            h.update(b"\x00")
            h.update(s.oracle.kencode(k).encode())
        h.update(b"\x01")
    h.update(extra.encode())
    return int(h.hexdigest()[:16], 16)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def petridis_subset(
    x: MultSet, k, *, budget: int = DEFAULT_PRODUCT_BUDGET
) -> MultSet:
    """A subset Y of X with |Y| >= |X|/k and |Y^3| <= k^3 |Y|.

    Tries Y = X, then an exhaustive subset scan for |X| <= 16 (largest
    subsets first, lexicographic within a size), then a seeded local
    search.  Existence is a theorem whenever |X^2| <= k |X|, but the
    search here is not complete above 16 elements, so a miss raises
    SearchExhaustedError rather than pretending.
    """
    k = Fraction(k)
    if k < 1:
        raise PreconditionError(f"doubling parameter must be >= 1, got {k}")
    if len(x) == 0:
        raise PreconditionError("cannot take a subset of the empty set")
    x2 = product_set(x, x, budget=budget)
    if len(x2) * k.denominator > k.numerator * len(x):
        raise PreconditionError(
            f"|X^2| = {len(x2)} exceeds k |X| = {k} * {len(x)}"
        )
    kn3 = k.numerator**3
    kd3 = k.denominator**3
    min_size = _ceil_div(len(x) * k.denominator, k.numerator)

    def qualifies(y: MultSet) -> bool:
        if len(y) * k.numerator < len(x) * k.denominator:
            return False
        y3 = power_set(y, 3, budget=budget)
        return len(y3) * kd3 <= kn3 * len(y)

    if qualifies(x):
        return x

    if len(x) <= PETRIDIS_EXHAUSTIVE_MAX:
        for size in range(len(x) - 1, min_size - 1, -1):
            for combo in itertools.combinations(x.keys, size):
                y = MultSet(x.oracle, combo)
                if qualifies(y):
                    return y
        raise SearchExhaustedError(
            f"no qualifying subset of the {len(x)}-point set exists at k = {k}"
        )

    rng = np.random.Generator(np.random.Philox(key=_digest_seed(x, extra=str(k))))
    current = list(x.keys)
    cur_ratio = Fraction(len(power_set(x, 3, budget=budget)), len(x))
    for _ in range(PETRIDIS_MOVE_BUDGET):
        removable = len(current) > min_size
        grow = len(current) < len(x) and (not removable or rng.integers(4) == 0)
        if grow:
            absent = sorted(set(x.keys) - set(current))
            cand = current + [absent[int(rng.integers(len(absent)))]]
        else:
            drop = int(rng.integers(len(current)))
            cand = current[:drop] + current[drop + 1 :]
        y = MultSet(x.oracle, cand)
        try:
            ratio = Fraction(len(power_set(y, 3, budget=budget)), len(y))
        except BudgetExceededError:
            continue
        if ratio <= cur_ratio:
            current, cur_ratio = cand, ratio
            if cur_ratio * kd3 <= Fraction(kn3):
                y = MultSet(x.oracle, current)
                if qualifies(y):
                    return y
    raise SearchExhaustedError(
        f"local search exhausted {PETRIDIS_MOVE_BUDGET} moves without a "
        f"subset meeting tripling {k}^3"
    )


@dataclass(frozen=True)
class HomogeneousTuple:
    """Two triples of dense subsets whose triple products do not meet."""

    u_parts: tuple[MultSet, MultSet, MultSet]
    v_parts: tuple[MultSet, MultSet, MultSet]
    achieved_density: Fraction
    u_product_size: int
    v_product_size: int
    side: str  # "u" or "v": the triple whose product came out smaller

    def chosen(self) -> tuple[MultSet, MultSet, MultSet]:
        return self.u_parts if self.side == "u" else self.v_parts

    def chosen_product_size(self) -> int:
        return self.u_product_size if self.side == "u" else self.v_product_size


def find_homogeneous_tuple(
    u1: MultSet,
    u2: MultSet,
    u3: MultSet,
    v1: MultSet,
    v2: MultSet,
    v3: MultSet,
    target_delta,
    *,
    trials: int = FINDER_TRIALS,
    pair_budget: int = DEFAULT_PRODUCT_BUDGET,
) -> HomogeneousTuple:
    """Subsets of six input sets, each of density >= target_delta and size
    >= 2, whose two triple products are disjoint (verified directly).

    Strategies, in order: threshold splitting on integer sets (low block
    against high block), seeded random sampling, and a budgeted exhaustive
    scan when every input has at most 8 points.
    """
    inputs = (u1, u2, u3, v1, v2, v3)
    oracle = u1.oracle
    for s in inputs:
        if s.oracle.domain != oracle.domain:
            raise DomainMismatchError("all six inputs must share a group")
        if len(s) < 2:
            raise PreconditionError("every input needs at least 2 elements")
    delta = Fraction(target_delta)
    if not 0 < delta < 1:
        raise PreconditionError(f"target density must lie in (0,1), got {delta}")
    need = [
        max(2, _ceil_div(len(s) * delta.numerator, delta.denominator))
        for s in inputs
    ]

    def attempt(u_keys, v_keys) -> HomogeneousTuple | None:
        u_sets = tuple(MultSet(oracle, ks) for ks in u_keys)
        v_sets = tuple(MultSet(oracle, ks) for ks in v_keys)
        try:
            up = product_set(
                product_set(u_sets[0], u_sets[1], budget=pair_budget),
                u_sets[2],
                budget=pair_budget,
            )
            vp = product_set(
                product_set(v_sets[0], v_sets[1], budget=pair_budget),
                v_sets[2],
                budget=pair_budget,
            )
        except BudgetExceededError:
            return None
        if up.key_set() & vp.key_set():
            return None
        density = min(
            Fraction(len(part), len(inp))
            for part, inp in zip(u_sets + v_sets, inputs)
        )
        side = "u" if len(up) <= len(vp) else "v"
        return HomogeneousTuple(u_sets, v_sets, density, len(up), len(vp), side)

    if oracle.kind == "int":
        u_keys = tuple(s.keys[:m] for s, m in zip(inputs[:3], need[:3]))
        v_keys = tuple(s.keys[-m:] for s, m in zip(inputs[3:], need[3:]))
        if sum(ks[-1] for ks in u_keys) < sum(ks[0] for ks in v_keys):
            got = attempt(u_keys, v_keys)
            if got is not None:
                return got

    seed = _digest_seed(*inputs, extra=f"homog:{delta}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(trials):
        picks = []
        for s, m in zip(inputs, need):
            idx = sorted(rng.choice(len(s.keys), size=m, replace=False).tolist())
            picks.append(tuple(s.keys[i] for i in idx))
        got = attempt(tuple(picks[:3]), tuple(picks[3:]))
        if got is not None:
            return got

    if all(len(s) <= FINDER_EXHAUSTIVE_MAX for s in inputs):
        checks = 0
        u_combos = itertools.product(
            *(itertools.combinations(s.keys, m) for s, m in zip(inputs[:3], need[:3]))
        )
        for u_keys in u_combos:
            v_combos = itertools.product(
                *(
                    itertools.combinations(s.keys, m)
                    for s, m in zip(inputs[3:], need[3:])
                )
            )
            for v_keys in v_combos:
                checks += 1
                if checks > FINDER_EXHAUSTIVE_CHECKS:
                    raise SearchExhaustedError(
                        f"homogeneous-tuple scan hit its {FINDER_EXHAUSTIVE_CHECKS}"
                        f"-pair budget at density {delta}"
                    )
                got = attempt(u_keys, v_keys)
                if got is not None:
                    return got
    raise SearchExhaustedError(
        f"no homogeneous tuple of density {delta} found "
        f"({trials} sampled candidates)"
    )


@dataclass(frozen=True)
class SehStage:
    u: MultSet
    v: MultSet
    w: MultSet
    product_size: int


@dataclass(frozen=True)
class SehHalvingResult:
    u: MultSet
    v: MultSet
    w: MultSet
    profile: BoundsProfile
    stages: tuple[SehStage, ...]
    used_fallback: bool
    planned_steps: int


def seh_halving(
    y: MultSet,
    alpha=Fraction(1, 2),
    finder_delta=Fraction(1, 2),
    *,
    budget: int = DEFAULT_PRODUCT_BUDGET,
    finder_trials: int = FINDER_TRIALS,
) -> SehHalvingResult:
    """Nested triples U, V, W inside Y with |UVW| <= alpha |Y|.

    Starts from U = V = W = Y and repeatedly replaces the triple by a
    denser-than-delta sub-triple whose product is at most half the
    previous one.  Three invariants are recomputed every step: containment
    in the previous triple, size at least delta times the previous size,
    and product at most half the previous product.  When the planned
    number of steps would push sizes below 2, a two-point triple is
    returned instead, whose product has at most 8 <= alpha |Y| points.
    """
    alpha = Fraction(alpha)
    delta = Fraction(finder_delta)
    profile = compute_bounds_profile(delta, alpha)
    if len(y) * alpha.numerator < 8 * alpha.denominator:
        raise PreconditionError(
            f"need |Y| >= 8/alpha = {Fraction(8 * alpha.denominator, alpha.numerator)}, "
            f"got {len(y)}"
        )
    y3 = power_set(y, 3, budget=budget)
    ratio_num = len(y3) * alpha.denominator
    ratio_den = alpha.numerator * len(y)
    t = 0
    while (ratio_den << t) < ratio_num:
        t += 1
    n = t + 1
    stages = [SehStage(y, y, y, len(y3))]

    if n >= 2 and 2 * delta.denominator ** (n - 2) > delta.numerator ** (n - 2) * len(y):
        small = MultSet(y.oracle, y.keys[:2])
        prod = power_set(small, 3, budget=budget)
        if len(prod) * alpha.denominator > alpha.numerator * len(y):
            raise InvariantViolationError(
                "8-point fallback product exceeded alpha |Y|"
            )
        stages.append(SehStage(small, small, small, len(prod)))
        return SehHalvingResult(
            small, small, small, profile, tuple(stages), True, n
        )

    u = v = w = y
    cur = y3
    transitions = 0
    while len(cur) * alpha.denominator > alpha.numerator * len(y):
        if transitions >= t:
            raise InvariantViolationError("halving exceeded its planned step count")
        tup = find_homogeneous_tuple(
            u, v, w, u, v, w, delta, trials=finder_trials, pair_budget=budget
        )
        nu, nv, nw = tup.chosen()
        nxt = product_set(product_set(nu, nv, budget=budget), nw, budget=budget)
        for new, old in ((nu, u), (nv, v), (nw, w)):
            if not new.key_set() <= old.key_set():
                raise InvariantViolationError("halving step escaped containment")
            if len(new) * delta.denominator < delta.numerator * len(old):
                raise InvariantViolationError("halving step lost its density bound")
        if 2 * len(nxt) > len(cur):
            raise InvariantViolationError("triple product failed to halve")
        u, v, w, cur = nu, nv, nw, nxt
        stages.append(SehStage(u, v, w, len(cur)))
        transitions += 1
    return SehHalvingResult(u, v, w, profile, tuple(stages), False, n)


@dataclass(frozen=True)
class LocalizeResult:
    z: MultSet
    g: Element
    h: Element
    zzz: MultSet  # Z^-1 Z Z^-1
    uvw_size: int
    pair_total: int


def _bucket_best(
    oracle: GroupOracle, u: MultSet, v: MultSet, w: MultSet
) -> tuple[object, object, int, int]:
    """Best (g, h) bucket of the (u z, z w) decomposition and the exact
    total count, which group cancellation makes equal to |U||V||W|."""
    if oracle.kind in ("int", "cyclic"):
        ua = np.asarray(u.keys, dtype=np.int64)
        va = np.asarray(v.keys, dtype=np.int64)
        wa = np.asarray(w.keys, dtype=np.int64)
        if oracle.kind == "cyclic":
            g_grid = (ua[:, None] + va[None, :]) % oracle.order
            h_grid = (va[:, None] + wa[None, :]) % oracle.order
        else:
            g_grid = ua[:, None] + va[None, :]
            h_grid = va[:, None] + wa[None, :]
        g_lo = int(g_grid.min())
        h_lo, h_hi = int(h_grid.min()), int(h_grid.max())
        span = h_hi - h_lo + 1
        if (int(g_grid.max()) - g_lo + 1) * span < 2**62:
            parts = []
            for j in range(len(va)):
                comp = (g_grid[:, j, None] - g_lo) * span + (h_grid[j, None, :] - h_lo)
                parts.append(comp.ravel())
            allc = np.concatenate(parts)
            vals, counts = np.unique(allc, return_counts=True)
            total = int(counts.sum())
            best_count = int(counts.max())
            best_val = int(vals[counts == best_count].min())
            return best_val // span + g_lo, best_val % span + h_lo, best_count, total
    kmul = oracle.kmul
    buckets: Counter = Counter()
    for zk in v.keys:
        gs = [kmul(uk, zk) for uk in u.keys]
        hs = [kmul(zk, wk) for wk in w.keys]
        buckets.update((g, h) for g in gs for h in hs)
    total = sum(buckets.values())
    best_count = max(buckets.values())
    g, h = min(gh for gh, c in buckets.items() if c == best_count)
    return g, h, best_count, total


def localize_small_triple(
    y: MultSet,
    u: MultSet,
    v: MultSet,
    w: MultSet,
    *,
    budget: int = DEFAULT_PRODUCT_BUDGET,
) -> LocalizeResult:
    """The largest Z(g,h) = U^-1 g  meet  V  meet  h W^-1 over g, h.

    Requires |UVW| <= |Y|/2.  Validates the exact counting identity
    sum |Z(g,h)| = |U||V||W|, the averaging bound
    |Z| >= 4 |U||V||W| / |Y|^2, and |Z^-1 Z Z^-1| <= |UVW| <= |Y|/2.
    Ties between equally large buckets resolve to the least (g, h).
    """
    oracle = y.oracle
    for s in (u, v, w):
        if s.oracle.domain != oracle.domain:
            raise DomainMismatchError("U, V, W must live in Y's group")
        if len(s) == 0:
            raise PreconditionError("U, V, W must be nonempty")
        if not s.key_set() <= y.key_set():
            raise PreconditionError("U, V, W must sit inside Y")
    uvw = product_set(product_set(u, v, budget=budget), w, budget=budget)
    if 2 * len(uvw) > len(y):
        raise PreconditionError(
            f"|UVW| = {len(uvw)} exceeds |Y|/2 = {len(y)}/2"
        )

    g, h, best_count, total = _bucket_best(oracle, u, v, w)
    if total != len(u) * len(v) * len(w):
        raise InvariantViolationError(
            f"bucket counting identity broke: {total} != |U||V||W|"
        )

    kmul, kinv = oracle.kmul, oracle.kinv
    u_set, w_set = u.key_set(), w.key_set()
    z_keys = [
        zk
        for zk in v.keys
        if kmul(g, kinv(zk)) in u_set and kmul(kinv(zk), h) in w_set
    ]
    if len(z_keys) != best_count:
        raise InvariantViolationError("bucket reconstruction mismatch")
    z = MultSet(oracle, z_keys)

    if len(z) * len(y) ** 2 < 4 * len(u) * len(v) * len(w):
        raise InvariantViolationError("localization averaging bound failed")
    z_inv = inverse_set(z)
    zzz = product_set(product_set(z_inv, z, budget=budget), z_inv, budget=budget)
    if len(zzz) > len(uvw):
        raise InvariantViolationError("|Z^-1 Z Z^-1| exceeded |UVW|")
    if 2 * len(zzz) > len(y):
        raise InvariantViolationError("|Z^-1 Z Z^-1| exceeded |Y|/2")
    return LocalizeResult(z, Element(oracle.domain, g), Element(oracle.domain, h), zzz, len(uvw), total)


def _theorem_guarantee(profile: BoundsProfile, x_size: int, k: Fraction) -> Fraction:
    val = profile.eps2 * x_size / float(k) ** profile.c2
    return Fraction(math.floor(val * 10**9), 10**9)


def product_free_extract(
    x: MultSet,
    profile: BoundsProfile | None = None,
    *,
    budget: int = DEFAULT_PRODUCT_BUDGET,
    finder_trials: int = FINDER_TRIALS,
):
    """End-to-end product-free extraction with a certificate.

    With k = |X^2|/|X|: sets with |X| < 16k get a singleton witness (the
    least non-identity element); otherwise the full chain runs and the
    witness is the largest Y meet gZ over admissible shifts g.  Every
    stage inequality lands in the certificate trace.  A stage that fails
    its search raises StageFailedError carrying the partial certificate.
    """
    oracle = x.oracle
    if len(x) == 0:
        raise PreconditionError("cannot extract from the empty set")
    if x.keys == (oracle.identity_key,):
        raise PreconditionError("the one-point set at the identity has no product-free subset")
    if profile is None:
        # delta = 1/2 is infeasible on arithmetic progressions: two triple
        # products of ceil(s/2)-subsets cannot be disjoint inside a window
        # of 3s - 2 sums.  2/5 keeps the low/high split workable.
        profile = compute_bounds_profile(Fraction(2, 5), Fraction(1, 2))

    x2 = product_set(x, x, budget=budget)
    k = Fraction(len(x2), len(x))
    params = {
        "delta": frac_str(profile.delta),
        "alpha": frac_str(profile.alpha),
        "k": frac_str(k),
    }
    guarantee = _theorem_guarantee(profile, len(x), k)
    trace = []

    if len(x) ** 2 < 16 * len(x2):
        trace.append(
            record("singleton-branch", {"x": len(x), "x2": len(x2)}, "x * x < 16 * x2")
        )
        zk = next(kk for kk in x.keys if kk != oracle.identity_key)
        witness = MultSet(oracle, (zk,))
        claimed = guarantee if 1 >= math.ceil(guarantee) else None
        return build_certificate(
            x, "thm33", {**params, "branch": "singleton"}, witness, claimed, trace
        )

    stage = "petridis"
    try:
        y = petridis_subset(x, k, budget=budget)
        y3 = power_set(y, 3, budget=budget)
        trace.append(
            record(
                "petridis-size",
                {"x": len(x), "y": len(y)},
                f"y * {k.numerator} >= x * {k.denominator}",
            )
        )
        trace.append(
            record(
                "petridis-tripling",
                {"y": len(y), "y3": len(y3)},
                f"y3 * {k.denominator ** 3} <= {k.numerator ** 3} * y",
            )
        )

        stage = "halving"
        halv = seh_halving(
            y,
            profile.alpha,
            profile.delta,
            budget=budget,
            finder_trials=finder_trials,
        )
        if halv.used_fallback:
            trace.append(
                record(
                    "halving-fallback",
                    {"uvw": halv.stages[-1].product_size, "y": len(y)},
                    "uvw <= 8",
                )
            )
        else:
            for i in range(1, len(halv.stages)):
                trace.append(
                    record(
                        f"halving-{i}",
                        {
                            "prev": halv.stages[i - 1].product_size,
                            "next": halv.stages[i].product_size,
                        },
                        "2 * next <= prev",
                    )
                )
        trace.append(
            record(
                "halving-final",
                {"uvw": halv.stages[-1].product_size, "y": len(y)},
                f"uvw * {profile.alpha.denominator} <= {profile.alpha.numerator} * y",
            )
        )

        stage = "localize"
        loc = localize_small_triple(y, halv.u, halv.v, halv.w, budget=budget)
        trace.append(
            record(
                "localize-count",
                {
                    "pair_sum": loc.pair_total,
                    "u": len(halv.u),
                    "v": len(halv.v),
                    "w": len(halv.w),
                },
                "pair_sum == u * v * w",
            )
        )
        trace.append(
            record(
                "localize-density",
                {
                    "z": len(loc.z),
                    "y": len(y),
                    "u": len(halv.u),
                    "v": len(halv.v),
                    "w": len(halv.w),
                },
                "z * y * y >= 4 * u * v * w",
            )
        )
        trace.append(
            record("localize-compress", {"zzz": len(loc.zzz), "y": len(y)}, "2 * zzz <= y")
        )

        stage = "pigeonhole"
        kmul, kinv = oracle.kmul, oracle.kinv
        zzz_set = loc.zzz.key_set()
        shifts: Counter = Counter()
        z_inv_keys = [kinv(zk) for zk in loc.z.keys]
        for yk in y.keys:
            for zik in z_inv_keys:
                gk = kmul(yk, zik)
                if gk not in zzz_set:
                    shifts[gk] += 1
        if not shifts:
            raise InvariantViolationError(
                "every shift bucket fell inside Z^-1 Z Z^-1"
            )
        best = max(shifts.values())
        gk = min(cand for cand, c in shifts.items() if c == best)
        g_translate = MultSet(oracle, (kmul(gk, zk) for zk in loc.z.keys))
        if not is_product_free(g_translate, budget=budget):
            raise InvariantViolationError(
                "shifted copy of Z lost product-freeness despite g outside Z^-1 Z Z^-1"
            )
        witness_keys = g_translate.key_set() & y.key_set()
        if len(witness_keys) != best:
            raise InvariantViolationError("pigeonhole bucket recount mismatch")
        witness = MultSet(oracle, witness_keys)
        trace.append(
            record(
                "pigeonhole",
                {"yg": len(witness), "z": len(loc.z)},
                f"yg * 2 * {k.numerator ** 3} >= z * {k.denominator ** 3}",
            )
        )
        trace.append(
            record(
                "product-free-shift",
                {"overlap": 1 if gk in zzz_set else 0},
                "overlap == 0",
            )
        )
        if not trace[-2].holds:
            partial = build_certificate(
                x,
                "thm33",
                {**params, "branch": "main", "status": "incomplete:pigeonhole"},
                witness,
                None,
                trace,
            )
            raise StageFailedError(
                f"pigeonhole bucket of size {len(witness)} misses |Z|/(2 k^3)",
                certificate=partial,
            )
        claimed = (
            guarantee
            if all(r.holds for r in trace) and len(witness) >= math.ceil(guarantee)
            else None
        )
        return build_certificate(
            x,
            "thm33",
            {**params, "branch": "main", "g": oracle.kencode(gk)},
            witness,
            claimed,
            trace,
        )
    except StageFailedError:
        raise
    except SearchExhaustedError as exc:
        partial = build_certificate(
            x,
            "thm33",
            {**params, "branch": "main", "status": f"incomplete:{stage}"},
            MultSet(oracle, ()),
            None,
            trace,
        )
        raise StageFailedError(f"stage {stage!r} failed: {exc}", certificate=partial) from exc
