"""Finite subsets of a group and the basic product-set calculus.

A :class:`MultSet` is an immutable finite subset of one ambient oracle.
Internally it stores sorted raw payload keys; elements materialise on
demand.  Heavy product loops have a numpy fast path for integer and
cyclic domains, everything else runs through the oracle key functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator

from .errors import (
    BudgetExceededError,
    DomainMismatchError,
    PreconditionError,
)
from .groups import Element, GroupOracle

DEFAULT_PRODUCT_BUDGET = 10**7
NUMPY_MIN_PAIRS = 4096
EXACT_COVER_UNIVERSE = 4096


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class MultSet:
    """Immutable subset of a group, canonically ordered."""

    __slots__ = ("oracle", "keys", "_keyset")

    def __init__(self, oracle: GroupOracle, keys: Iterable[Any]):
        ks = sorted(set(keys))
        self.oracle = oracle
        self.keys = tuple(ks)
        self._keyset = frozenset(ks)

    @classmethod
    def from_elements(cls, oracle: GroupOracle, elements: Iterable[Element]) -> "MultSet":
        keys = []
        for e in elements:
            if e.domain != oracle.domain:
                raise DomainMismatchError(
                    f"element from {e.domain!r} in a {oracle.domain!r} set"
                )
            keys.append(e.key)
        return cls(oracle, keys)

    # -- container protocol ---------------------------------------------
    def __len__(self) -> int:
        return len(self.keys)

    def __iter__(self) -> Iterator[Element]:
        d = self.oracle.domain
        return (Element(d, k) for k in self.keys)

    def __contains__(self, item) -> bool:
        if isinstance(item, Element):
            return item.domain == self.oracle.domain and item.key in self._keyset
        return item in self._keyset

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultSet)
            and self.oracle.domain == other.oracle.domain
            and self.keys == other.keys
        )

    def __hash__(self) -> int:
        return hash((self.oracle.domain, self.keys))

    def __repr__(self) -> str:
        shown = ", ".join(self.oracle.kencode(k) for k in self.keys[:6])
        more = ", ..." if len(self.keys) > 6 else ""
        return f"MultSet({self.oracle.domain!r}, {{{shown}{more}}})"

    # -- conveniences ----------------------------------------------------
    def elements(self) -> tuple[Element, ...]:
        d = self.oracle.domain
        return tuple(Element(d, k) for k in self.keys)

    def key_set(self) -> frozenset:
        return self._keyset

    def encoded(self) -> list[str]:
        return [self.oracle.kencode(k) for k in self.keys]

    def restrict(self, keys: Iterable[Any]) -> "MultSet":
        return MultSet(self.oracle, (k for k in keys if k in self._keyset))

    def union(self, other: "MultSet") -> "MultSet":
        _require_same(self, other)
        return MultSet(self.oracle, self._keyset | other._keyset)

    def intersect_keys(self, keys) -> "MultSet":
        return MultSet(self.oracle, self._keyset & set(keys))

    def minus_keys(self, keys) -> "MultSet":
        return MultSet(self.oracle, self._keyset - set(keys))


def _require_same(x: MultSet, y: MultSet) -> None:
    if x.oracle.domain != y.oracle.domain:
        raise DomainMismatchError(
            f"mismatched domains {x.oracle.domain!r} and {y.oracle.domain!r}"
        )


def _numpy_pair_keys(x: MultSet, y: MultSet):
    """Pairwise product keys via numpy when the domain is int or cyclic."""
    import numpy as np

    kind = x.oracle.kind
    xs = np.fromiter(x.keys, dtype=np.int64, count=len(x.keys))
    ys = np.fromiter(y.keys, dtype=np.int64, count=len(y.keys))
    sums = np.add.outer(xs, ys)
    if kind == "cyclic":
        sums %= x.oracle.order
    return np.unique(sums)


def _int_like(x: MultSet) -> bool:
    if x.oracle.kind == "int":
        # stay clear of int64 overflow for exotic inputs
        return all(abs(k) < 2**60 for k in (x.keys[:1] + x.keys[-1:]))
    return x.oracle.kind == "cyclic"


def product_set(
    x: MultSet, y: MultSet, budget: int = DEFAULT_PRODUCT_BUDGET
) -> MultSet:
    """Pointwise product {a b : a in X, b in Y} in the shared ambient group."""
    _require_same(x, y)
    if len(x) == 0 or len(y) == 0:
        return MultSet(x.oracle, ())
    if _int_like(x) and len(x) * len(y) >= NUMPY_MIN_PAIRS:
        if len(x) * len(y) > budget:
            raise BudgetExceededError(
                f"product pairs {len(x) * len(y)} exceed budget {budget}"
            )
        return MultSet(x.oracle, _numpy_pair_keys(x, y).tolist())
    kmul = x.oracle.kmul
    out: set = set()
    for a in x.keys:
        for b in y.keys:
            out.add(kmul(a, b))
        if len(out) > budget:
            raise BudgetExceededError(
                f"product set grew past budget {budget}"
            )
    return MultSet(x.oracle, out)


def inverse_set(x: MultSet) -> MultSet:
    kinv = x.oracle.kinv
    return MultSet(x.oracle, (kinv(k) for k in x.keys))


def power_set(x: MultSet, n: int, budget: int = DEFAULT_PRODUCT_BUDGET) -> MultSet:
    """n-fold product set X^n for n >= 1."""
    if n < 1:
        raise PreconditionError(f"power must be >= 1, got {n}")
    acc = x
    for _ in range(n - 1):
        acc = product_set(acc, x, budget=budget)
    return acc


def is_product_free(x: MultSet, budget: int = DEFAULT_PRODUCT_BUDGET) -> bool:
    """Whether no product of two elements of X lands back in X."""
    n = len(x)
    if n * n > budget:
        raise BudgetExceededError(f"{n}^2 pairs exceed budget {budget}")
    if _int_like(x) and n * n >= NUMPY_MIN_PAIRS:
        import numpy as np

        xs = np.fromiter(x.keys, dtype=np.int64, count=n)
        sums = np.add.outer(xs, xs).ravel()
        if x.oracle.kind == "cyclic":
            sums %= x.oracle.order
        return not np.isin(sums, xs).any()
    kmul = x.oracle.kmul
    member = x._keyset
    for a in x.keys:
        for b in x.keys:
            if kmul(a, b) in member:
                return False
    return True


def count_incident_pairs(x: MultSet, budget: int = DEFAULT_PRODUCT_BUDGET) -> int:
    """Number of ordered pairs (a, b) in X^2 with a b again in X."""
    n = len(x)
    if n * n > budget:
        raise BudgetExceededError(f"{n}^2 pairs exceed budget {budget}")
    if _int_like(x) and n * n >= NUMPY_MIN_PAIRS:
        import numpy as np

        xs = np.fromiter(x.keys, dtype=np.int64, count=n)
        sums = np.add.outer(xs, xs).ravel()
        if x.oracle.kind == "cyclic":
            sums %= x.oracle.order
        return int(np.isin(sums, xs).sum())
    kmul = x.oracle.kmul
    member = x._keyset
    return sum(
        1 for a in x.keys for b in x.keys if kmul(a, b) in member
    )


# ---------------------------------------------------------------------------
# covering numbers and the approximate-group report


def _greedy_cover(universe: frozenset, candidates: list[tuple[Any, frozenset]]):
    """Greedy set cover; candidates are (label, covered-keys) pairs.

    Candidates must jointly cover the universe.  Ties break on the label's
    canonical order (the list is pre-sorted).
    """
    remaining = set(universe)
    picks = []
    while remaining:
        best = None
        best_gain = 0
        for label, covered in candidates:
            gain = len(remaining & covered)
            if gain > best_gain:
                best, best_gain = (label, covered), gain
        if best is None:
            raise PreconditionError("candidates do not cover the universe")
        picks.append(best[0])
        remaining -= best[1]
    return picks


def _exact_cover_size(
    universe: frozenset,
    candidates: list[tuple[Any, frozenset]],
    upper: int,
    node_budget: int = 10**6,
) -> int | None:
    """Branch-and-bound minimum cover size, or None if the budget runs out."""
    index = {k: i for i, k in enumerate(sorted(universe))}
    full = (1 << len(index)) - 1
    masks = []
    for _, covered in candidates:
        m = 0
        for k in covered & universe:
            m |= 1 << index[k]
        masks.append(m)
    # which candidates hit each universe point
    hitters: list[list[int]] = [[] for _ in index]
    for ci, m in enumerate(masks):
        mm = m
        while mm:
            low = mm & -mm
            hitters[low.bit_length() - 1].append(ci)
            mm ^= low
    if any(not h for h in hitters):
        raise PreconditionError("candidates do not cover the universe")
    best = upper
    nodes = 0
    max_cover = max((m.bit_count() for m in masks), default=0)
    aborted = False

    def dfs(covered: int, used: int) -> None:
        nonlocal best, nodes, aborted
        nodes += 1
        if aborted or nodes > node_budget:
            aborted = True
            return
        if covered == full:
            if used < best:
                best = used
            return
        missing = full & ~covered
        lacking = missing.bit_count()
        if used + (lacking + max_cover - 1) // max_cover >= best:
            return
        # branch on the uncovered point with fewest candidates
        pick, pick_count = -1, 1 << 30
        mm = missing
        while mm:
            low = mm & -mm
            bit = low.bit_length() - 1
            cnt = sum(1 for ci in hitters[bit] if masks[ci] & ~covered)
            if cnt < pick_count:
                pick, pick_count = bit, cnt
            mm ^= low
        for ci in hitters[pick]:
            dfs(covered | masks[ci], used + 1)

    dfs(0, 0)
    return None if aborted else best


@dataclass
class ApproxGroupReport:
    """Summary used to judge how close X is to a k-approximate group."""

    size: int
    doubling: Fraction
    tripling: Fraction
    symmetric: bool
    has_identity: bool
    covering_upper: int
    covering_exact: int | None
    k: Fraction | None = None
    is_k_approx: bool | None = None

    def to_json_dict(self) -> dict:
        return {
            "size": self.size,
            "doubling": frac_str(self.doubling),
            "tripling": frac_str(self.tripling),
            "symmetric": self.symmetric,
            "has_identity": self.has_identity,
            "covering_upper": self.covering_upper,
            "covering_exact": self.covering_exact,
            "k": frac_str(self.k) if self.k is not None else None,
            "is_k_approx": self.is_k_approx,
        }


def _translate_candidates(x: MultSet, square: MultSet, side: str):
    kmul = x.oracle.kmul
    sq = square.key_set()
    cands = []
    for t in x.keys:
        if side in ("left", "two-sided"):
            cands.append((("L", t), frozenset(kmul(t, b) for b in x.keys) & sq))
        if side in ("right", "two-sided"):
            cands.append((("R", t), frozenset(kmul(b, t) for b in x.keys) & sq))
    return cands


def approx_report(
    x: MultSet,
    k: Fraction | int | None = None,
    *,
    budget: int = DEFAULT_PRODUCT_BUDGET,
    translate_side: str = "left",
) -> ApproxGroupReport:
    """Doubling, tripling, symmetry, identity, and covering diagnostics.

    The covering search uses translates t X with t drawn from X itself;
    X^2 is always a union of such translates, so the search is feasible and
    any bound it certifies is a genuine covering bound.  ``translate_side``
    may be ``left``, ``right``, or ``two-sided``.
    """
    if len(x) == 0:
        raise PreconditionError("approx_report needs a nonempty set")
    if translate_side not in ("left", "right", "two-sided"):
        raise PreconditionError(f"bad translate side {translate_side!r}")
    square = product_set(x, x, budget=budget)
    cube = product_set(square, x, budget=budget)
    doubling = Fraction(len(square), len(x))
    tripling = Fraction(len(cube), len(x))
    symmetric = inverse_set(x).key_set() == x.key_set()
    has_identity = x.oracle.identity_key in x.key_set()

    cands = _translate_candidates(x, square, translate_side)
    picks = _greedy_cover(square.key_set(), cands)
    upper = len(picks)
    # sanity: the greedy picks really do cover X^2
    covered: set = set()
    lookup = dict(cands)
    for label in picks:
        covered |= lookup[label]
    if covered != set(square.key_set()):
        raise PreconditionError("greedy cover failed to cover X^2")

    exact = None
    if len(square) <= EXACT_COVER_UNIVERSE:
        exact = _exact_cover_size(square.key_set(), cands, upper)

    report = ApproxGroupReport(
        size=len(x),
        doubling=doubling,
        tripling=tripling,
        symmetric=symmetric,
        has_identity=has_identity,
        covering_upper=upper,
        covering_exact=exact,
    )
    if k is not None:
        k = Fraction(k)
        report.k = k
        covering = exact if exact is not None else upper
        report.is_k_approx = bool(
            has_identity and symmetric and Fraction(covering) <= k
        )
    return report
