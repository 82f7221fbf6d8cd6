"""Certificate issue, recheck, and tamper detection."""

import pytest

from permcontract.certify import (
    Certificate,
    ClaimRefuted,
    HashMismatch,
    canonical_hash,
    certify_bound,
    issue,
    recheck,
)
from permcontract.gf import Field
from permcontract.indep import agl_bound_array
from permcontract.perm import ParseError


@pytest.fixture(scope="module")
def agl7(tmp_path_factory):
    path = tmp_path_factory.mktemp("arrays") / "agl7.parr"
    bound = agl_bound_array(Field(7))
    bound.array.write(path)
    return path


def test_issue_and_round_trip(agl7, tmp_path):
    cert = issue(agl7, 6, 4, method="agl-contract", field=Field(7), seed=0)
    assert cert.size == 24
    assert cert.min_hd >= 4
    assert recheck(cert, agl7) is True
    cpath = tmp_path / "agl7.json"
    cert.write(cpath)
    again = Certificate.read(cpath)
    assert again == cert
    assert again.to_json() == cert.to_json()


def test_issue_refutes_inflated_claim(agl7):
    # the construction attains q-3 somewhere, so d=5 must be refused
    with pytest.raises(ClaimRefuted, match="min hd 4"):
        issue(agl7, 6, 5)


def test_issue_rejects_wrong_symbol_count(agl7):
    with pytest.raises(ClaimRefuted, match="6 symbols"):
        issue(agl7, 7, 4)


def test_issue_empty_file(tmp_path):
    empty = tmp_path / "empty.parr"
    empty.write_text("")
    with pytest.raises(ParseError):
        issue(empty, 6, 4)


def test_hash_ignores_row_order(agl7, tmp_path):
    lines = agl7.read_text().splitlines()
    shuffled = tmp_path / "shuffled.parr"
    shuffled.write_text("\n".join([lines[0]] + list(reversed(lines[1:]))) + "\n")
    assert canonical_hash(agl7) == canonical_hash(shuffled)


def test_recheck_detects_edit(agl7, tmp_path):
    cert = issue(agl7, 6, 4)
    text = agl7.read_text()
    tampered = tmp_path / "tampered.parr"
    tampered.write_text(text.replace("\n0 ", "\n1 ", 1))
    with pytest.raises(HashMismatch):
        recheck(cert, tampered)


def test_recheck_detects_refitted_hash(agl7, tmp_path):
    # duplicate a permutation, then forge a certificate with the new hash
    lines = agl7.read_text().splitlines()
    n, count = 6, 25
    forged = tmp_path / "forged.parr"
    forged.write_text("\n".join([f"n={n} count={count}", lines[1], *lines[1:]]) + "\n")
    cert = issue(agl7, 6, 4)
    fixed = Certificate(
        n=cert.n,
        d=cert.d,
        size=count,
        min_hd=cert.min_hd,
        method=cert.method,
        field=cert.field,
        seed=cert.seed,
        hash_hex=canonical_hash(forged),
    )
    with pytest.raises(ClaimRefuted):
        recheck(fixed, forged)


def test_certificate_rejects_internal_contradiction():
    with pytest.raises(ClaimRefuted):
        Certificate(6, 5, 24, 4, "manual", None, None, "00" * 32)


def test_json_is_deterministic_and_compact(agl7):
    a = issue(agl7, 6, 4, method="agl-contract", field=Field(7), seed=3)
    b = issue(agl7, 6, 4, method="agl-contract", field=Field(7), seed=3)
    assert a.to_json() == b.to_json()
    assert "\n" not in a.to_json() and ": " not in a.to_json()
    keys = sorted(["n", "d", "size", "min_hd", "method", "field", "seed", "hash_hex"])
    parsed = __import__("json").loads(a.to_json())
    assert sorted(parsed) == keys
    assert parsed["field"] == {"p": 7, "m": 1, "modulus": [0, 1]}


def test_certify_bound_writes_pair(tmp_path):
    bound = agl_bound_array(Field(7))
    apath = tmp_path / "a.parr"
    cpath = tmp_path / "a.json"
    cert = certify_bound(bound, apath, cpath, field=Field(7))
    assert apath.exists() and cpath.exists()
    assert recheck(Certificate.read(cpath), apath) is True
    assert cert.method == "agl-contract"


def test_singleton_file_is_vacuous(tmp_path):
    p = tmp_path / "one.parr"
    p.write_text("n=4 count=1\n0 1 2 3\n")
    cert = issue(p, 4, 3)
    assert cert.size == 1 and cert.min_hd == 4
    assert recheck(cert, p) is True


def test_bad_certificate_json():
    with pytest.raises(ParseError):
        Certificate.from_json('{"n": 5}')
