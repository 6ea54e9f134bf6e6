"""Group oracles and canonical element encodings.

An ambient group is presented as a :class:`GroupOracle`: a domain tag, a
multiplication and inversion on raw payload keys, an identity, and optional
finite enumeration plus abelian metadata.  Elements travel as ``Element``
named tuples ``(domain, key)`` so that equality and the canonical total
order are plain tuple comparisons.

Payload conventions:

* ``int``          arbitrary-precision integers under addition
* ``cyclic:n``     least non-negative residues ``0..n-1``
* ``abelian:...``  vectors of residues, one per listed modulus
* ``sym:n``        permutations as image words ``(p(0), ..., p(n-1))``
* ``dihedral:n``   the 2n symmetries of an n-gon, stored as image words
* ``heisenberg:p`` unitriangular 3x3 matrices mod p, flattened row-major
* ``matrix:d:m``   invertible d x d matrices mod m, flattened row-major
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple

from .errors import (
    DomainMismatchError,
    GroupAxiomError,
    GroupSpecError,
    NotASubgroupError,
    NotEnumerableError,
    NotNormalError,
    NotSolvableError,
    PreconditionError,
)

ENUM_CAP = 10**6
SYM_MAX = 8
DIHEDRAL_MAX = 1024
SERIES_ORDER_CAP = 10**4
COORDS_ORDER_CAP = 4096


class Element(NamedTuple):
    """A group element: domain tag plus canonical payload key.

    Two elements are equal iff both the tag and the payload agree, and the
    derived tuple order gives a strict total order inside each domain.
    """

    domain: str
    key: Any

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return f"{self.domain}:{self.key}"


# ---------------------------------------------------------------------------
# small arithmetic helpers


def _factorint(n: int) -> dict[int, int]:
    """Prime factorisation by trial division; fine for desk-scale moduli."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _is_prime(n: int) -> bool:
    return n >= 2 and _factorint(n) == {n: 1}


def invariant_factors_of(moduli: Iterable[int]) -> tuple[int, ...]:
    """Invariant factors of a direct product of cyclic groups.

    Returned ascending, each dividing the next.
    """
    per_prime: dict[int, list[int]] = {}
    for m in moduli:
        if m < 1:
            raise GroupSpecError(f"modulus must be positive, got {m}")
        for p, e in _factorint(m).items():
            per_prime.setdefault(p, []).append(e)
    width = max((len(v) for v in per_prime.values()), default=0)
    factors = []
    for j in range(width):
        d = 1
        for p, exps in per_prime.items():
            exps_sorted = sorted(exps, reverse=True)
            if j < len(exps_sorted):
                d *= p ** exps_sorted[j]
        factors.append(d)
    return tuple(sorted(factors))


def _mat_mul(a: tuple, b: tuple, d: int, m: int) -> tuple:
    return tuple(
        sum(a[i * d + t] * b[t * d + j] for t in range(d)) % m
        for i in range(d)
        for j in range(d)
    )


def _mat_det(a: tuple, d: int) -> int:
    if d == 1:
        return a[0]
    if d == 2:
        return a[0] * a[3] - a[1] * a[2]
    total = 0
    for j in range(d):
        minor = tuple(
            a[i * d + c] for i in range(1, d) for c in range(d) if c != j
        )
        total += (-1) ** j * a[j] * _mat_det(minor, d - 1)
    return total


def _mat_inv(a: tuple, d: int, m: int) -> tuple:
    det = _mat_det(a, d) % m
    try:
        det_inv = pow(det, -1, m)
    except ValueError:
        raise PreconditionError(f"matrix not invertible mod {m}: det={det}")
    if d == 1:
        return (det_inv % m,)
    # adjugate via cofactors; d stays small in practice
    adj = [0] * (d * d)
    for i in range(d):
        for j in range(d):
            minor = tuple(
                a[r * d + c]
                for r in range(d)
                if r != i
                for c in range(d)
                if c != j
            )
            adj[j * d + i] = (-1) ** (i + j) * _mat_det(minor, d - 1)
    return tuple((det_inv * v) % m for v in adj)


# ---------------------------------------------------------------------------
# the oracle record


@dataclass(eq=False)
class GroupOracle:
    """Black-box group with canonical element codec.

    ``enum_keys`` is populated iff the group is finite with order within
    :data:`ENUM_CAP` (and the builder can enumerate at all); ``order`` is
    ``None`` for groups handled purely as oracles.
    """

    domain: str
    kind: str
    kmul: Callable[[Any, Any], Any]
    kinv: Callable[[Any], Any]
    identity_key: Any
    abelian: bool
    order: int | None = None
    enum_keys: tuple | None = None
    invariant_factors: tuple[int, ...] | None = None
    component_moduli: tuple[int, ...] | None = None
    kencode: Callable[[Any], str] = str
    kdecode: Callable[[str], Any] | None = None
    ksample: Callable[[Any], Any] | None = None
    _coords: tuple | None = field(default=None, repr=False)

    # -- element-level conveniences -------------------------------------
    @property
    def identity(self) -> Element:
        return Element(self.domain, self.identity_key)

    def wrap(self, key: Any) -> Element:
        return Element(self.domain, key)

    def mul(self, a: Element, b: Element) -> Element:
        if a.domain != self.domain or b.domain != self.domain:
            raise DomainMismatchError(
                f"operands from {a.domain!r}/{b.domain!r}, oracle {self.domain!r}"
            )
        return Element(self.domain, self.kmul(a.key, b.key))

    def inv(self, a: Element) -> Element:
        if a.domain != self.domain:
            raise DomainMismatchError(
                f"operand from {a.domain!r}, oracle {self.domain!r}"
            )
        return Element(self.domain, self.kinv(a.key))

    def elements(self) -> tuple[Element, ...]:
        if self.enum_keys is None:
            raise NotEnumerableError(f"{self.domain!r} has no finite enumeration")
        return tuple(Element(self.domain, k) for k in self.enum_keys)

    def encode(self, a: Element) -> str:
        return self.kencode(a.key)

    def decode(self, text: str) -> Element:
        if self.kdecode is None:
            raise GroupSpecError(f"{self.domain!r} has no decoder")
        return Element(self.domain, self.kdecode(text))

    def same_group_as(self, other: "GroupOracle") -> bool:
        return self.domain == other.domain


# ---------------------------------------------------------------------------
# builders


def _int_codec():
    return str, int


def _vector_encode(key: tuple) -> str:
    return ",".join(str(v) for v in key)


def _vector_decode_factory(moduli: tuple[int, ...]):
    def dec(text: str) -> tuple:
        parts = [int(t) for t in text.split(",")]
        if len(parts) != len(moduli):
            raise GroupSpecError(f"expected {len(moduli)} components: {text!r}")
        for v, m in zip(parts, moduli):
            if not 0 <= v < m:
                raise GroupSpecError(f"component {v} out of range mod {m}")
        return tuple(parts)

    return dec


def _perm_decode_factory(n: int):
    def dec(text: str) -> tuple:
        parts = tuple(int(t) for t in text.split(","))
        if sorted(parts) != list(range(n)):
            raise GroupSpecError(f"not an image word on 0..{n - 1}: {text!r}")
        return parts

    return dec


def _matrix_encode_factory(d: int):
    def enc(key: tuple) -> str:
        rows = [key[i * d : (i + 1) * d] for i in range(d)]
        return ";".join(",".join(str(v) for v in row) for row in rows)

    return enc


def _matrix_decode_factory(d: int, m: int, unitriangular: bool):
    def dec(text: str) -> tuple:
        rows = [r for r in text.split(";") if r]
        if len(rows) != d:
            raise GroupSpecError(f"expected {d} matrix rows: {text!r}")
        flat = []
        for r in rows:
            vals = [int(t) % m for t in r.split(",")]
            if len(vals) != d:
                raise GroupSpecError(f"ragged matrix row: {r!r}")
            flat.extend(vals)
        key = tuple(flat)
        if unitriangular:
            for i in range(d):
                for j in range(d):
                    if i == j and key[i * d + j] != 1:
                        raise GroupSpecError("diagonal must be 1")
                    if i > j and key[i * d + j] != 0:
                        raise GroupSpecError("lower triangle must be 0")
        else:
            if math.gcd(_mat_det(key, d) % m, m) != 1:
                raise GroupSpecError(f"matrix not invertible mod {m}: {text!r}")
        return key

    return dec


def _build_int() -> GroupOracle:
    enc, dec = _int_codec()
    return GroupOracle(
        domain="int",
        kind="int",
        kmul=lambda a, b: a + b,
        kinv=lambda a: -a,
        identity_key=0,
        abelian=True,
        order=None,
        kencode=enc,
        kdecode=dec,
        ksample=lambda rng: int(rng.integers(-(10**6), 10**6 + 1)),
    )


def _build_cyclic(n: int) -> GroupOracle:
    if n < 1:
        raise GroupSpecError(f"cyclic order must be >= 1, got {n}")
    enum = tuple(range(n)) if n <= ENUM_CAP else None

    def dec(text: str) -> int:
        v = int(text)
        if not 0 <= v < n:
            raise GroupSpecError(f"residue {v} out of range mod {n}")
        return v

    return GroupOracle(
        domain=f"cyclic:{n}",
        kind="cyclic",
        kmul=lambda a, b: (a + b) % n,
        kinv=lambda a: (-a) % n,
        identity_key=0,
        abelian=True,
        order=n,
        enum_keys=enum,
        invariant_factors=(n,) if n > 1 else (),
        component_moduli=(n,),
        kencode=str,
        kdecode=dec,
        ksample=lambda rng: int(rng.integers(0, n)),
    )


def _build_abelian(moduli: tuple[int, ...]) -> GroupOracle:
    if not moduli or any(m < 1 for m in moduli):
        raise GroupSpecError(f"bad abelian moduli {moduli}")
    order = math.prod(moduli)
    enum = None
    if order <= ENUM_CAP:
        enum = tuple(itertools.product(*(range(m) for m in moduli)))

    def kmul(a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, moduli))

    return GroupOracle(
        domain="abelian:" + ",".join(str(m) for m in moduli),
        kind="abelian",
        kmul=kmul,
        kinv=lambda a: tuple((-x) % m for x, m in zip(a, moduli)),
        identity_key=tuple(0 for _ in moduli),
        abelian=True,
        order=order,
        enum_keys=enum,
        invariant_factors=invariant_factors_of(moduli),
        component_moduli=moduli,
        kencode=_vector_encode,
        kdecode=_vector_decode_factory(moduli),
        ksample=lambda rng: tuple(int(rng.integers(0, m)) for m in moduli),
    )


def _perm_mul(a: tuple, b: tuple) -> tuple:
    # (a * b)(i) = a(b(i)): apply b first
    return tuple(a[v] for v in b)


def _perm_inv(a: tuple) -> tuple:
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v] = i
    return tuple(out)


def _build_sym(n: int) -> GroupOracle:
    if not 1 <= n <= SYM_MAX:
        raise GroupSpecError(f"sym:n supports 1 <= n <= {SYM_MAX}, got {n}")
    enum = tuple(itertools.permutations(range(n)))
    return GroupOracle(
        domain=f"sym:{n}",
        kind="perm",
        kmul=_perm_mul,
        kinv=_perm_inv,
        identity_key=tuple(range(n)),
        abelian=n <= 2,
        order=math.factorial(n),
        enum_keys=enum,
        kencode=_vector_encode,
        kdecode=_perm_decode_factory(n),
    )


def _build_dihedral(n: int) -> GroupOracle:
    if not 3 <= n <= DIHEDRAL_MAX:
        raise GroupSpecError(
            f"dihedral:n supports 3 <= n <= {DIHEDRAL_MAX}, got {n}"
        )
    keys = set()
    for k in range(n):
        keys.add(tuple((i + k) % n for i in range(n)))  # rotations
        keys.add(tuple((k - i) % n for i in range(n)))  # reflections
    if len(keys) != 2 * n:
        raise GroupSpecError(f"dihedral construction degenerate for n={n}")
    return GroupOracle(
        domain=f"dihedral:{n}",
        kind="perm",
        kmul=_perm_mul,
        kinv=_perm_inv,
        identity_key=tuple(range(n)),
        abelian=False,
        order=2 * n,
        enum_keys=tuple(sorted(keys)),
        kencode=_vector_encode,
        kdecode=_perm_decode_factory(n),
    )


def _build_heisenberg(p: int) -> GroupOracle:
    if not _is_prime(p):
        raise GroupSpecError(f"heisenberg:p needs a prime, got {p}")

    def kmul(x, y):
        return _mat_mul(x, y, 3, p)

    def kinv(x):
        a, c, b = x[1], x[2], x[5]
        return (1, (-a) % p, (a * b - c) % p, 0, 1, (-b) % p, 0, 0, 1)

    enum = None
    if p**3 <= ENUM_CAP:
        enum = tuple(
            sorted(
                (1, a, c, 0, 1, b, 0, 0, 1)
                for a in range(p)
                for b in range(p)
                for c in range(p)
            )
        )
    return GroupOracle(
        domain=f"heisenberg:{p}",
        kind="matrix",
        kmul=kmul,
        kinv=kinv,
        identity_key=(1, 0, 0, 0, 1, 0, 0, 0, 1),
        abelian=False,
        order=p**3,
        enum_keys=enum,
        kencode=_matrix_encode_factory(3),
        kdecode=_matrix_decode_factory(3, p, unitriangular=True),
        ksample=lambda rng: (
            1,
            int(rng.integers(0, p)),
            int(rng.integers(0, p)),
            0,
            1,
            int(rng.integers(0, p)),
            0,
            0,
            1,
        ),
    )


def _build_matrix(d: int, m: int) -> GroupOracle:
    if d < 1 or m < 2:
        raise GroupSpecError(f"matrix:d:m needs d >= 1 and m >= 2, got {d},{m}")

    def sample(rng):
        for _ in range(1000):
            cand = tuple(int(rng.integers(0, m)) for _ in range(d * d))
            if math.gcd(_mat_det(cand, d) % m, m) == 1:
                return cand
        raise GroupAxiomError(f"could not sample invertible matrix mod {m}")

    ident = tuple(1 if i == j else 0 for i in range(d) for j in range(d))
    return GroupOracle(
        domain=f"matrix:{d}:{m}",
        kind="matrix",
        kmul=lambda a, b: _mat_mul(a, b, d, m),
        kinv=lambda a: _mat_inv(a, d, m),
        identity_key=ident,
        abelian=d == 1,
        order=None,
        kencode=_matrix_encode_factory(d),
        kdecode=_matrix_decode_factory(d, m, unitriangular=False),
        ksample=sample,
    )


def build_group(spec: str) -> GroupOracle:
    """Build an oracle from a group spec string such as ``cyclic:12``."""
    parts = spec.strip().split(":")
    name = parts[0]
    try:
        if name == "int":
            if len(parts) != 1:
                raise GroupSpecError(f"int takes no parameters: {spec!r}")
            return _build_int()
        if name == "cyclic" and len(parts) == 2:
            return _build_cyclic(int(parts[1]))
        if name == "abelian" and len(parts) == 2:
            moduli = tuple(int(t) for t in parts[1].split(",") if t)
            return _build_abelian(moduli)
        if name == "sym" and len(parts) == 2:
            return _build_sym(int(parts[1]))
        if name == "dihedral" and len(parts) == 2:
            return _build_dihedral(int(parts[1]))
        if name == "heisenberg" and len(parts) == 2:
            return _build_heisenberg(int(parts[1]))
        if name == "matrix" and len(parts) == 3:
            return _build_matrix(int(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise GroupSpecError(f"bad group spec {spec!r}: {exc}") from None
    raise GroupSpecError(f"unknown group spec {spec!r}")


def group_spec_token_count(name: str) -> int:
    """How many ':'-separated tokens a group spec starting with *name* uses."""
    if name == "int":
        return 1
    if name in ("cyclic", "abelian", "sym", "dihedral", "heisenberg"):
        return 2
    if name == "matrix":
        return 3
    raise GroupSpecError(f"unknown group spec head {name!r}")


# ---------------------------------------------------------------------------
# subgroup machinery


def closure_keys(oracle: GroupOracle, seeds: Iterable[Any], cap: int = ENUM_CAP) -> frozenset:
    """Subgroup generated by *seeds* (finite ambient assumed)."""
    seeds = [s for s in seeds]
    done = {oracle.identity_key}
    frontier = [oracle.identity_key]
    kmul = oracle.kmul
    while frontier:
        nxt = []
        for t in frontier:
            for s in seeds:
                p = kmul(t, s)
                if p not in done:
                    done.add(p)
                    nxt.append(p)
        if len(done) > cap:
            raise PreconditionError(f"closure exceeded cap {cap}")
        frontier = nxt
    return frozenset(done)


def generating_keys(oracle: GroupOracle, keys: Iterable[Any] | None = None) -> list:
    """A small generating set, found greedily in canonical order."""
    pool = sorted(keys) if keys is not None else list(oracle.enum_keys or ())
    if not pool:
        raise NotEnumerableError("no keys to generate from")
    gens: list = []
    generated = {oracle.identity_key}
    for k in pool:
        if k not in generated:
            gens.append(k)
            generated = set(closure_keys(oracle, gens))
            if len(generated) == len(pool):
                break
    return gens


def _check_subgroup(oracle: GroupOracle, keys: frozenset) -> None:
    if oracle.identity_key not in keys:
        raise NotASubgroupError("identity missing")
    for k in keys:
        if oracle.kinv(k) not in keys:
            raise NotASubgroupError(f"inverse of {k!r} missing")
    gens = generating_keys(oracle, keys)
    if closure_keys(oracle, gens) != keys:
        raise NotASubgroupError("not closed under multiplication")


def _pairwise_commute(oracle: GroupOracle, keys: Iterable[Any]) -> bool:
    ks = list(keys)
    kmul = oracle.kmul
    return all(
        kmul(a, b) == kmul(b, a) for a, b in itertools.combinations(ks, 2)
    )


def subgroup_view(
    parent: GroupOracle, members: Iterable, *, verify: bool = True
) -> GroupOracle:
    """Oracle for a subgroup of *parent*, sharing domain and codec.

    The enumeration is restricted to *members*; multiplication is inherited,
    so `MultSet` values move freely between the view and the parent.
    """
    keys = frozenset(
        m.key if isinstance(m, Element) else m for m in members
    )
    if verify:
        _check_subgroup(parent, keys)
    gens = generating_keys(parent, keys) if len(keys) > 1 else []
    return GroupOracle(
        domain=parent.domain,
        kind=parent.kind,
        kmul=parent.kmul,
        kinv=parent.kinv,
        identity_key=parent.identity_key,
        abelian=_pairwise_commute(parent, gens),
        order=len(keys),
        enum_keys=tuple(sorted(keys)),
        component_moduli=None,
        kencode=parent.kencode,
        kdecode=parent.kdecode,
    )


def generated_subgroup(parent: GroupOracle, generators: Iterable) -> GroupOracle:
    """Closure of *generators* inside *parent*, as a subgroup view."""
    seeds = [g.key if isinstance(g, Element) else g for g in generators]
    return subgroup_view(parent, closure_keys(parent, seeds), verify=False)


class ProjectionMap:
    """Quotient map G -> G/H as an element-level callable."""

    def __init__(self, domain_from: str, domain_to: str, key_map: dict):
        self.domain_from = domain_from
        self.domain_to = domain_to
        self.key_map = key_map

    def map_key(self, k):
        return self.key_map[k]

    def __call__(self, a: Element) -> Element:
        if a.domain != self.domain_from:
            raise DomainMismatchError(
                f"element from {a.domain!r}, projection from {self.domain_from!r}"
            )
        return Element(self.domain_to, self.key_map[a.key])


def _subset_digest(oracle: GroupOracle, keys: Iterable[Any]) -> str:
    text = "\n".join(oracle.kencode(k) for k in sorted(keys))
    return hashlib.sha256(text.encode()).hexdigest()[:8]


def _quotient_build(
    parent: GroupOracle, h_keys: frozenset, *, verify: bool
) -> tuple[GroupOracle, ProjectionMap]:
    if parent.enum_keys is None:
        raise NotEnumerableError("quotient needs a finite parent enumeration")
    all_keys = parent.enum_keys
    if not h_keys <= set(all_keys):
        raise NotASubgroupError("subgroup not contained in parent enumeration")
    if verify:
        _check_subgroup(parent, h_keys)
        gens = generating_keys(parent)
        for g in gens:
            ginv = parent.kinv(g)
            for h in h_keys:
                if parent.kmul(parent.kmul(g, h), ginv) not in h_keys:
                    raise NotNormalError(
                        f"subgroup not normal: conjugate of {h!r} escapes"
                    )

    kmul = parent.kmul
    rep_of: dict = {}
    reps = []
    for a in all_keys:  # canonical order, so each rep is its coset minimum
        if a in rep_of:
            continue
        coset = sorted(kmul(a, h) for h in h_keys)
        if len(set(coset)) != len(h_keys):
            raise NotASubgroupError("coset size mismatch; H is not a subgroup")
        rep = coset[0]
        for c in coset:
            rep_of[c] = rep
        reps.append(rep)
    reps.sort()

    qdomain = f"{parent.domain}/{_subset_digest(parent, h_keys)}"

    def qmul(a, b):
        return rep_of[kmul(a, b)]

    def qinv(a):
        return rep_of[parent.kinv(a)]

    enc = parent.kencode
    dec_parent = parent.kdecode

    def qdec(text: str):
        if dec_parent is None:
            raise GroupSpecError("no decoder on parent")
        k = dec_parent(text)
        if rep_of.get(k) != k:
            raise GroupSpecError(f"{text!r} is not a canonical coset representative")
        return k

    gens_q = generating_keys_from(qmul, rep_of[parent.identity_key], reps)
    quotient = GroupOracle(
        domain=qdomain,
        kind="quotient",
        kmul=qmul,
        kinv=qinv,
        identity_key=rep_of[parent.identity_key],
        abelian=_pairwise_commute_fn(qmul, gens_q),
        order=len(reps),
        enum_keys=tuple(reps),
        kencode=enc,
        kdecode=qdec,
    )
    proj = ProjectionMap(parent.domain, qdomain, rep_of)
    return quotient, proj


def generating_keys_from(kmul, identity_key, pool: list) -> list:
    gens: list = []
    generated = {identity_key}
    for k in sorted(pool):
        if k not in generated:
            gens.append(k)
            # closure under the quotient multiplication
            done = {identity_key}
            frontier = [identity_key]
            while frontier:
                nxt = []
                for t in frontier:
                    for s in gens:
                        p = kmul(t, s)
                        if p not in done:
                            done.add(p)
                            nxt.append(p)
                frontier = nxt
            generated = done
            if len(generated) == len(pool):
                break
    return gens


def _pairwise_commute_fn(kmul, keys: Iterable[Any]) -> bool:
    ks = list(keys)
    return all(
        kmul(a, b) == kmul(b, a) for a, b in itertools.combinations(ks, 2)
    )


def quotient_projection(
    parent: GroupOracle, subgroup: Iterable
) -> tuple[GroupOracle, ProjectionMap]:
    """Quotient of a finite group by a verified normal subgroup.

    Verifies subgroup-ness and normality, checks that all fibers have size
    ``|H|``, and spot-checks the homomorphism property (exhaustively when
    the parent order is at most 200, on 10^4 sampled pairs otherwise).
    """
    h_keys = frozenset(
        m.key if isinstance(m, Element) else m for m in subgroup
    )
    quotient, proj = _quotient_build(parent, h_keys, verify=True)

    n = len(parent.enum_keys)
    if n <= 200:
        pairs = itertools.product(parent.enum_keys, repeat=2)
    else:
        import numpy as np

        seed = int(_subset_digest(parent, h_keys), 16)
        rng = np.random.Generator(np.random.Philox(key=seed))
        idx = rng.integers(0, n, size=(10**4, 2))
        pairs = ((parent.enum_keys[i], parent.enum_keys[j]) for i, j in idx)
    key_map = proj.key_map
    for a, b in pairs:
        if key_map[parent.kmul(a, b)] != quotient.kmul(key_map[a], key_map[b]):
            raise GroupAxiomError("projection is not a homomorphism")
    if quotient.abelian and quotient.order <= COORDS_ORDER_CAP:
        abelian_coords(quotient)
    return quotient, proj


# ---------------------------------------------------------------------------
# element orders and abelian structure


def key_power(oracle: GroupOracle, k, e: int):
    if e < 0:
        return key_power(oracle, oracle.kinv(k), -e)
    acc = oracle.identity_key
    base = k
    while e:
        if e & 1:
            acc = oracle.kmul(acc, base)
        base = oracle.kmul(base, base)
        e >>= 1
    return acc


def element_order(oracle: GroupOracle, k) -> int:
    if oracle.component_moduli is not None:
        comps = oracle.component_moduli
        vec = (k,) if len(comps) == 1 and not isinstance(k, tuple) else k
        return math.lcm(
            *(m // math.gcd(m, int(x)) for x, m in zip(vec, comps))
        ) if comps else 1
    if oracle.order is None:
        raise NotEnumerableError("element order undefined for infinite oracle")
    acc = k
    n = 1
    while acc != oracle.identity_key:
        acc = oracle.kmul(acc, k)
        n += 1
        if n > oracle.order:
            raise GroupAxiomError("element order exceeds group order")
    return n


def abelian_basis(oracle: GroupOracle) -> list[tuple[Any, int]]:
    """Basis of a finite abelian oracle: keys with orders, orders descending.

    Classic structure-theorem recursion: peel off a maximal-order element,
    quotient by it, lift a basis of the quotient with order-preserving
    corrections.
    """
    if not oracle.abelian:
        raise PreconditionError(f"{oracle.domain!r} is not abelian")
    if oracle.order is None or oracle.enum_keys is None:
        raise NotEnumerableError("abelian basis needs a finite enumeration")
    if oracle.order > COORDS_ORDER_CAP:
        raise PreconditionError(
            f"order {oracle.order} above structure cap {COORDS_ORDER_CAP}"
        )
    if oracle.order == 1:
        return []

    best_key, best_ord = None, 0
    for k in oracle.enum_keys:
        o = element_order(oracle, k)
        if o > best_ord:
            best_key, best_ord = k, o
    g, m = best_key, best_ord

    powers = [oracle.identity_key]
    while len(powers) < m:
        powers.append(oracle.kmul(powers[-1], g))
    dlog = {k: i for i, k in enumerate(powers)}
    if len(dlog) != m:
        raise GroupAxiomError("repeated powers below the element order")

    if m == oracle.order:
        return [(g, m)]

    quotient, proj = _quotient_build(oracle, frozenset(powers), verify=False)
    basis = [(g, m)]
    for qk, t in abelian_basis(quotient):
        # qk is its own coset representative, hence a parent key
        ht = key_power(oracle, qk, t)
        u = dlog[ht]
        if u % t != 0:
            raise GroupAxiomError("lift correction failed; group not abelian?")
        h = oracle.kmul(qk, key_power(oracle, g, (m - u // t) % m))
        if element_order(oracle, h) != t or proj.key_map[h] != qk:
            raise GroupAxiomError("basis lift lost its order")
        basis.append((h, t))
    total = math.prod(o for _, o in basis)
    if total != oracle.order:
        raise GroupAxiomError("basis orders do not multiply to the group order")
    return basis


def abelian_coords(oracle: GroupOracle):
    """Invariant-factor coordinates ``(moduli, lookup)`` for a finite abelian oracle.

    ``moduli`` is descending (largest first, so ``moduli[0]`` is the group
    exponent); ``lookup(key)`` returns the coordinate vector.  Cached on the
    oracle.  Cyclic groups short-circuit without building tables.
    """
    if oracle._coords is not None:
        return oracle._coords
    if oracle.kind == "cyclic":
        n = oracle.order
        moduli = (n,) if n > 1 else ()
        res = (moduli, (lambda k: (k,) if n > 1 else ()))
        oracle._coords = res
        return res
    basis = abelian_basis(oracle)
    moduli = tuple(o for _, o in basis)
    table: dict = {}
    if not basis:
        table[oracle.identity_key] = ()
    else:
        pow_tables = []
        for k, o in basis:
            row = [oracle.identity_key]
            while len(row) < o:
                row.append(oracle.kmul(row[-1], k))
            pow_tables.append(row)
        for combo in itertools.product(*(range(o) for o in moduli)):
            acc = oracle.identity_key
            for row, e in zip(pow_tables, combo):
                acc = oracle.kmul(acc, row[e])
            table[acc] = combo
    if len(table) != oracle.order:
        raise GroupAxiomError("abelian coordinates are not bijective")
    # descending divisibility means ascending once reversed
    asc = tuple(reversed(moduli))
    for a, b in zip(asc, asc[1:]):
        if b % a != 0:
            raise GroupAxiomError(f"invariant factor chain broken: {asc}")
    if oracle.invariant_factors is None:
        oracle.invariant_factors = asc
    res = (moduli, table.__getitem__)
    oracle._coords = res
    return res


# ---------------------------------------------------------------------------
# subnormal series


@dataclass
class QuotientStep:
    quotient: GroupOracle
    project: ProjectionMap


@dataclass
class SubnormalSeries:
    """Chain G = L0 > L1 > ... > {1} with abelian factor oracles.

    ``exponent`` is the n of the size bound alpha |C| / 2^n: one less than
    the number of steps.
    """

    levels: tuple[GroupOracle, ...]
    steps: tuple[QuotientStep, ...]

    @property
    def exponent(self) -> int:
        return len(self.steps) - 1

    def validate(self) -> None:
        if len(self.levels) != len(self.steps) + 1:
            raise PreconditionError("levels/steps length mismatch")
        if self.levels[-1].order != 1:
            raise PreconditionError("series must end at the trivial subgroup")
        for step in self.steps:
            if not step.quotient.abelian:
                raise PreconditionError(
                    f"factor {step.quotient.domain!r} is not abelian"
                )


def derived_subgroup_keys(oracle: GroupOracle) -> frozenset:
    """Commutator subgroup of a finite oracle (with enumeration)."""
    if oracle.enum_keys is None:
        raise NotEnumerableError("derived subgroup needs an enumeration")
    gens = generating_keys(oracle)
    kmul, kinv = oracle.kmul, oracle.kinv
    seeds = set()
    for a in gens:
        for b in gens:
            seeds.add(kmul(kmul(kinv(a), kinv(b)), kmul(a, b)))
    seeds.discard(oracle.identity_key)
    if not seeds:
        return frozenset({oracle.identity_key})
    while True:
        n_keys = closure_keys(oracle, sorted(seeds))
        extra = set()
        for g in gens:
            ginv = kinv(g)
            for h in n_keys:
                c = kmul(kmul(g, h), ginv)
                if c not in n_keys:
                    extra.add(c)
        if not extra:
            return n_keys
        seeds = set(n_keys) | extra


def derived_subnormal_series(oracle: GroupOracle) -> SubnormalSeries:
    """Derived series of a finite solvable group, with abelian quotients."""
    if oracle.order is None or oracle.enum_keys is None:
        raise NotEnumerableError("series needs a finite enumeration")
    if oracle.order > SERIES_ORDER_CAP:
        raise PreconditionError(
            f"order {oracle.order} above series cap {SERIES_ORDER_CAP}"
        )
    chain = [frozenset(oracle.enum_keys)]
    current = subgroup_view(oracle, oracle.enum_keys, verify=False)
    levels = [current]
    while current.order > 1:
        d_keys = derived_subgroup_keys(current)
        if len(d_keys) == current.order:
            raise NotSolvableError(
                f"derived series of {oracle.domain!r} stabilised at order {current.order}"
            )
        chain.append(d_keys)
        current = subgroup_view(oracle, d_keys, verify=False)
        levels.append(current)
    steps = []
    for lvl, nxt in zip(levels, chain[1:]):
        q, p = quotient_projection(lvl, nxt)
        steps.append(QuotientStep(q, p))
    series = SubnormalSeries(tuple(levels), tuple(steps))
    series.validate()
    return series


def subnormal_series_from_chain(
    oracle: GroupOracle, chain: list[Iterable]
) -> SubnormalSeries:
    """Build a series from an explicit subgroup chain (verified throughout)."""
    key_chain = [
        frozenset(m.key if isinstance(m, Element) else m for m in part)
        for part in chain
    ]
    if not key_chain or key_chain[0] != set(oracle.enum_keys or ()):
        raise PreconditionError("chain must start at the whole group")
    if key_chain[-1] != {oracle.identity_key}:
        raise PreconditionError("chain must end at the trivial subgroup")
    for big, small in zip(key_chain, key_chain[1:]):
        if not small < big:
            raise PreconditionError("chain must strictly decrease")
    levels = [subgroup_view(oracle, ks, verify=True) for ks in key_chain]
    steps = []
    for lvl, nxt in zip(levels, key_chain[1:]):
        q, p = quotient_projection(lvl, nxt)
        if not q.abelian:
            raise PreconditionError(f"factor {q.domain!r} is not abelian")
        steps.append(QuotientStep(q, p))
    series = SubnormalSeries(tuple(levels), tuple(steps))
    series.validate()
    return series


def cyclic_subgroups(oracle: GroupOracle) -> list[tuple[Element, ...]]:
    """All subgroups of a cyclic group, ordered by size."""
    if oracle.kind != "cyclic":
        raise PreconditionError(f"{oracle.domain!r} is not a built cyclic group")
    n = oracle.order
    subs = []
    for d in sorted(_divisors(n)):
        step = n // d
        subs.append(tuple(oracle.wrap(v) for v in range(0, n, step)))
    return subs


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


# ---------------------------------------------------------------------------
# axiom verification


def verify_group_axioms(
    oracle: GroupOracle,
    *,
    seed: int = 0,
    samples: int = 10**4,
    exhaustive_cap: int = 200,
) -> int:
    """Check associativity, identity, and inverses; returns triples tested.

    Exhaustive over all triples when the order is at most *exhaustive_cap*,
    sampled (at least *samples* random triples) otherwise.  Also checks the
    abelian flag and, when present, the invariant-factor metadata.
    """
    kmul, kinv, e = oracle.kmul, oracle.kinv, oracle.identity_key

    def check_triple(a, b, c):
        if kmul(kmul(a, b), c) != kmul(a, kmul(b, c)):
            raise GroupAxiomError(f"associativity fails on {(a, b, c)!r}")

    def check_element(a):
        if kmul(a, e) != a or kmul(e, a) != a:
            raise GroupAxiomError(f"identity fails on {a!r}")
        if kmul(a, kinv(a)) != e or kmul(kinv(a), a) != e:
            raise GroupAxiomError(f"inverse fails on {a!r}")

    tested = 0
    if oracle.order is not None and oracle.enum_keys is not None and oracle.order <= exhaustive_cap:
        ks = oracle.enum_keys
        commutes = True
        for a in ks:
            check_element(a)
        for a in ks:
            for b in ks:
                ab = kmul(a, b)
                if ab != kmul(b, a):
                    commutes = False
                    if oracle.abelian:
                        raise GroupAxiomError(f"abelian flag wrong on {(a, b)!r}")
                for c in ks:
                    if kmul(ab, c) != kmul(a, kmul(b, c)):
                        raise GroupAxiomError(
                            f"associativity fails on {(a, b, c)!r}"
                        )
                    tested += 1
        if commutes and not oracle.abelian:
            raise GroupAxiomError("group commutes but abelian flag is False")
    else:
        import numpy as np

        rng = np.random.Generator(np.random.Philox(key=seed))
        if oracle.enum_keys is not None:
            n = len(oracle.enum_keys)
            draw = lambda: oracle.enum_keys[int(rng.integers(0, n))]
        elif oracle.ksample is not None:
            draw = lambda: oracle.ksample(rng)
        else:
            raise NotEnumerableError(
                f"{oracle.domain!r} has neither enumeration nor sampler"
            )
        for _ in range(samples):
            a, b, c = draw(), draw(), draw()
            check_triple(a, b, c)
            check_element(a)
            if oracle.abelian and kmul(a, b) != kmul(b, a):
                raise GroupAxiomError(f"abelian flag wrong on {(a, b)!r}")
            tested += 1

    facs = oracle.invariant_factors
    if facs:
        for a, b in zip(facs, facs[1:]):
            if b % a != 0:
                raise GroupAxiomError(f"invariant factors not a chain: {facs}")
        if oracle.order is not None and math.prod(facs) != oracle.order:
            raise GroupAxiomError(
                f"invariant factors {facs} inconsistent with order {oracle.order}"
            )
    return tested
