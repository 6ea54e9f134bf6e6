"""Machine-checkable extraction certificates.

A certificate records the input digest, the algorithm and its parameters,
the witness subset, and a trace of stage inequalities.  Each trace entry
states its inequality over the entry's own ``sizes`` dictionary, so a
verifier can re-evaluate every comparison from the stored numbers without
rerunning the search.

Inequality grammar (exact rational arithmetic):

    expr    :=  product CMP product
    product :=  factor ('*' factor)*
    factor  :=  integer | rational 'p/q' | size-key identifier
    CMP     :=  '<=' | '>=' | '==' | '<' | '>'
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CertificateError
from .sets import MultSet, frac_str, is_product_free

_TOKEN = re.compile(r"\s*(<=|>=|==|<|>|\*|-?\d+/\d+|-?\d+|[A-Za-z_][A-Za-z0-9_]*)")
_CMP_OPS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def _tokenize(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise CertificateError(f"bad inequality token at {text[pos:]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


def eval_inequality(text: str, sizes: dict[str, int]) -> bool:
    """Evaluate a product-comparison inequality against a sizes table."""
    tokens = _tokenize(text)
    cmp_positions = [i for i, t in enumerate(tokens) if t in _CMP_OPS]
    if len(cmp_positions) != 1:
        raise CertificateError(f"need exactly one comparison in {text!r}")
    cut = cmp_positions[0]

    def product(toks: list[str]) -> Fraction:
        if not toks or any(toks[i] == "*" for i in (0, len(toks) - 1)):
            raise CertificateError(f"malformed product in {text!r}")
        acc = Fraction(1)
        expect_factor = True
        for t in toks:
            if expect_factor:
                if t == "*":
                    raise CertificateError(f"malformed product in {text!r}")
                if "/" in t:
                    acc *= Fraction(t)
                elif re.fullmatch(r"-?\d+", t):
                    acc *= int(t)
                else:
                    if t not in sizes:
                        raise CertificateError(f"unknown size key {t!r} in {text!r}")
                    acc *= int(sizes[t])
                expect_factor = False
            else:
                if t != "*":
                    raise CertificateError(f"expected '*' in {text!r}")
                expect_factor = True
        if expect_factor:
            raise CertificateError(f"dangling '*' in {text!r}")
        return acc

    lhs = product(tokens[:cut])
    rhs = product(tokens[cut + 1 :])
    return _CMP_OPS[tokens[cut]](lhs, rhs)


@dataclass
class TraceRecord:
    stage: str
    sizes: dict[str, int]
    inequality: str
    holds: bool

    def to_json_dict(self) -> dict:
        return {
            "stage": self.stage,
            "sizes": dict(self.sizes),
            "inequality": self.inequality,
            "holds": self.holds,
        }


def record(stage: str, sizes: dict[str, int], inequality: str) -> TraceRecord:
    """Build a trace record, evaluating the inequality on the spot."""
    return TraceRecord(
        stage=stage,
        sizes={k: int(v) for k, v in sizes.items()},
        inequality=inequality,
        holds=eval_inequality(inequality, sizes),
    )


def input_digest(x: MultSet) -> str:
    """Content hash of (domain tag, canonical element encodings)."""
    lines = [x.oracle.domain]
    lines.extend(x.oracle.kencode(k) for k in x.keys)
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


@dataclass
class ExtractionCertificate:
    input_digest: str
    algorithm: str
    params: dict[str, str]
    witness: list[str]
    verified_product_free: bool
    achieved_size: int
    guarantee: Fraction | None
    trace: list[TraceRecord] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "input_digest": self.input_digest,
            "algorithm": self.algorithm,
            "params": dict(self.params),
            "witness": list(self.witness),
            "verified_product_free": self.verified_product_free,
            "achieved_size": self.achieved_size,
            "guarantee": frac_str(self.guarantee) if self.guarantee is not None else None,
            "trace": [t.to_json_dict() for t in self.trace],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExtractionCertificate":
        try:
            guarantee = data["guarantee"]
            trace = [
                TraceRecord(
                    stage=t["stage"],
                    sizes={k: int(v) for k, v in t["sizes"].items()},
                    inequality=t["inequality"],
                    holds=bool(t["holds"]),
                )
                for t in data["trace"]
            ]
            return cls(
                input_digest=data["input_digest"],
                algorithm=data["algorithm"],
                params={str(k): str(v) for k, v in data["params"].items()},
                witness=[str(w) for w in data["witness"]],
                verified_product_free=bool(data["verified_product_free"]),
                achieved_size=int(data["achieved_size"]),
                guarantee=Fraction(guarantee) if guarantee is not None else None,
                trace=trace,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CertificateError(f"malformed certificate: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExtractionCertificate":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CertificateError(f"cannot read certificate: {exc}") from None
        return cls.from_json_dict(data)


def build_certificate(
    x: MultSet,
    algorithm: str,
    params: dict[str, str],
    witness: MultSet,
    guarantee: Fraction | None,
    trace: list[TraceRecord],
) -> ExtractionCertificate:
    """Assemble a certificate, re-verifying product-freeness of the witness."""
    verified = is_product_free(witness) if len(witness) else False
    return ExtractionCertificate(
        input_digest=input_digest(x),
        algorithm=algorithm,
        params=params,
        witness=witness.encoded(),
        verified_product_free=verified,
        achieved_size=len(witness),
        guarantee=guarantee,
        trace=trace,
    )


def verify_certificate(
    cert: ExtractionCertificate, x: MultSet
) -> tuple[bool, list[str]]:
    """Re-check a certificate against the claimed input set.

    Recomputed from scratch: the input digest, witness membership and
    product-freeness, the achieved size, every trace inequality, and the
    guarantee ceiling.  Returns (ok, problems).
    """
    problems: list[str] = []

    if cert.input_digest != input_digest(x):
        problems.append("input digest mismatch")

    witness_keys = []
    seen = set()
    for text in cert.witness:
        try:
            el = x.oracle.decode(text)
        except Exception as exc:
            problems.append(f"witness element {text!r} does not parse: {exc}")
            continue
        if el.key in seen:
            problems.append(f"witness element {text!r} repeated")
        seen.add(el.key)
        if el.key not in x.key_set():
            problems.append(f"witness element {text!r} not in the input set")
        witness_keys.append(el.key)

    witness = MultSet(x.oracle, witness_keys)
    if cert.achieved_size != len(cert.witness):
        problems.append(
            f"achieved_size {cert.achieved_size} != witness length {len(cert.witness)}"
        )
    recomputed_free = bool(len(witness)) and is_product_free(witness)
    if not cert.verified_product_free:
        problems.append("certificate does not claim product-freeness")
    if not recomputed_free:
        problems.append("witness is not product-free on recomputation")

    for i, t in enumerate(cert.trace):
        try:
            value = eval_inequality(t.inequality, t.sizes)
        except CertificateError as exc:
            problems.append(f"trace[{i}] {t.stage}: {exc}")
            continue
        if value != t.holds:
            problems.append(
                f"trace[{i}] {t.stage}: inequality {t.inequality!r} evaluates "
                f"{value}, certificate says {t.holds}"
            )
        if not t.holds:
            problems.append(f"trace[{i}] {t.stage}: stage bound failed")

    if cert.guarantee is not None:
        need = math.ceil(cert.guarantee)
        if cert.achieved_size < need:
            problems.append(
                f"achieved size {cert.achieved_size} below guarantee ceiling {need}"
            )

    return (not problems, problems)
