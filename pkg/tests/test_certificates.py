import json
from fractions import Fraction

import pytest

from prodfree import (
    CertificateError,
    ExtractionCertificate,
    MultSet,
    build_certificate,
    build_group,
    eval_inequality,
    input_digest,
    record,
    verify_certificate,
)


def test_eval_inequality_basic():
    assert eval_inequality("2 * next <= prev", {"next": 3, "prev": 6})
    assert not eval_inequality("2 * next <= prev", {"next": 4, "prev": 6})
    assert eval_inequality("a == b", {"a": 5, "b": 5})
    assert eval_inequality("a < b", {"a": 5, "b": 6})
    assert eval_inequality("a > b", {"a": 7, "b": 6})
    assert eval_inequality("4 * a >= c", {"a": 2, "c": 8})


def test_eval_inequality_rational_and_negative_factors():
    assert eval_inequality("1/2 * a >= b", {"a": 10, "b": 5})
    assert eval_inequality("-1 * a <= 0", {"a": 3})
    assert eval_inequality("21 <= 3 * 7", {})


def test_eval_inequality_rejects_malformed():
    with pytest.raises(CertificateError):
        eval_inequality("a <= b <= c", {"a": 1, "b": 2, "c": 3})
    with pytest.raises(CertificateError):
        eval_inequality("a b <= c", {"a": 1, "b": 2, "c": 3})
    with pytest.raises(CertificateError):
        eval_inequality("a * <= c", {"a": 1, "c": 3})
    with pytest.raises(CertificateError):
        eval_inequality("a <= missing", {"a": 1})
    with pytest.raises(CertificateError):
        eval_inequality("a + b <= c", {"a": 1, "b": 1, "c": 3})
    with pytest.raises(CertificateError):
        eval_inequality("a", {"a": 1})


def test_record_evaluates_on_the_spot():
    r = record("stage", {"x": 4, "y": 9}, "2 * x <= y")
    assert r.holds is True
    assert record("stage", {"x": 5, "y": 9}, "2 * x <= y").holds is False


def test_input_digest_is_order_independent(int_group):
    a = MultSet(int_group, [3, 1, 2])
    b = MultSet(int_group, [2, 3, 1])
    assert input_digest(a) == input_digest(b)
    assert input_digest(a) != input_digest(MultSet(int_group, [1, 2]))
    # same keys in a different group must not collide
    c = MultSet(build_group("cyclic:7"), [1, 2, 3])
    assert input_digest(a) != input_digest(c)


def _sample_cert(int_group):
    x = MultSet(int_group, [1, 2, 3, 5])
    witness = MultSet(int_group, [2, 3])
    trace = [record("pick", {"w": 2, "x": 4}, "4 * w >= x")]
    return x, build_certificate(
        x, "demo", {"note": "t"}, witness, Fraction(1, 1), trace
    )


def test_build_certificate_fields(int_group):
    x, cert = _sample_cert(int_group)
    assert cert.algorithm == "demo"
    assert cert.witness == ["2", "3"]
    assert cert.achieved_size == 2
    assert cert.verified_product_free is True
    assert cert.guarantee == 1
    assert cert.input_digest == input_digest(x)


def test_empty_witness_never_counts_as_verified(int_group):
    x = MultSet(int_group, [1, 2])
    cert = build_certificate(x, "demo", {}, MultSet(int_group, []), None, [])
    assert cert.verified_product_free is False
    ok, problems = verify_certificate(cert, x)
    assert not ok and problems


def test_round_trip_through_json(tmp_path, int_group):
    x, cert = _sample_cert(int_group)
    path = tmp_path / "cert.json"
    cert.save(path)
    loaded = ExtractionCertificate.load(path)
    assert loaded.to_json_dict() == cert.to_json_dict()
    assert loaded.guarantee == Fraction(1, 1)
    ok, problems = verify_certificate(loaded, x)
    assert ok and problems == []


def test_load_rejects_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(CertificateError):
        ExtractionCertificate.load(path)
    path.write_text(json.dumps({"witness": []}))
    with pytest.raises(CertificateError):
        ExtractionCertificate.load(path)


def test_verify_flags_digest_mismatch(int_group):
    x, cert = _sample_cert(int_group)
    other = MultSet(int_group, [1, 2, 3])
    ok, problems = verify_certificate(cert, other)
    assert not ok
    assert any("digest" in p for p in problems)


def test_verify_flags_foreign_witness(int_group):
    x, cert = _sample_cert(int_group)
    cert.witness[0] = "99"
    cert.achieved_size = 2
    ok, problems = verify_certificate(cert, x)
    assert not ok
    assert any("not in the input set" in p for p in problems)


def test_verify_flags_duplicate_witness(int_group):
    x, cert = _sample_cert(int_group)
    cert.witness = ["2", "2"]
    ok, problems = verify_certificate(cert, x)
    assert not ok
    assert any("repeated" in p for p in problems)


def test_verify_flags_size_mismatch(int_group):
    x, cert = _sample_cert(int_group)
    cert.achieved_size = 3
    ok, problems = verify_certificate(cert, x)
    assert not ok
    assert any("achieved_size" in p for p in problems)


def test_verify_flags_product_free_break(int_group):
    # 2 + 3 = 5, so {2,3,5} is not product-free
    x = MultSet(int_group, [1, 2, 3, 5])
    cert = build_certificate(x, "demo", {}, MultSet(int_group, [2, 3]), None, [])
    cert.witness = ["2", "3", "5"]
    cert.achieved_size = 3
    ok, problems = verify_certificate(cert, x)
    assert not ok
    assert any("not product-free" in p for p in problems)


def test_verify_reevaluates_trace(int_group):
    x, cert = _sample_cert(int_group)
    cert.trace[0].holds = False  # stored verdict contradicts the numbers
    ok, problems = verify_certificate(cert, x)
    assert not ok
    assert any("evaluates" in p for p in problems)

    x2, cert2 = _sample_cert(int_group)
    cert2.trace[0].inequality = "5 * w >= x"  # rewritten bound now fails
    ok2, problems2 = verify_certificate(cert2, x2)
    assert ok2 is True  # 5 * 2 >= 4 still holds, verdict matches
    cert2.trace[0].inequality = "w >= x"
    ok3, problems3 = verify_certificate(cert2, x2)
    assert not ok3


def test_verify_flags_guarantee_above_achieved(int_group):
    x, cert = _sample_cert(int_group)
    cert.guarantee = Fraction(7, 2)  # ceiling 4 > witness size 2
    ok, problems = verify_certificate(cert, x)
    assert not ok
    assert any("guarantee" in p for p in problems)


def test_verify_flags_failed_stage(int_group):
    x = MultSet(int_group, [1, 2, 3, 5])
    bad = record("pick", {"w": 1, "x": 40}, "4 * w >= x")
    assert bad.holds is False
    cert = build_certificate(x, "demo", {}, MultSet(int_group, [2, 3]), None, [bad])
    ok, problems = verify_certificate(cert, x)
    assert not ok
    assert any("stage bound failed" in p for p in problems)
