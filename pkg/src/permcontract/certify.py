"""Tamper-evident lower-bound certificates for permutation array files.

A certificate ties a claim M(n,d) >= size to the exact bytes of an array
file: issuing one runs the full exhaustive distance sweep and records the
verified minimum plus a hash of the canonicalized file.  Re-checking runs
the same sweep again, so a certificate never outlives the evidence.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional

from .gf import Field
from .perm import PArray, ParseError


class ClaimRefuted(AssertionError):
    """The array does not support the claimed distance or size."""


class HashMismatch(AssertionError):
    """The array file no longer matches the certified bytes."""


def canonical_hash(path: str | os.PathLike) -> str:
    """SHA-256 over the file's sorted lines.

    Sorting makes row order immaterial: two files holding the same
    permutations hash identically.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    lines = [ln for ln in raw.split(b"\n") if ln]
    return hashlib.sha256(b"\n".join(sorted(lines))).hexdigest()


@dataclass(frozen=True)
class Certificate:
    n: int
    d: int
    size: int
    min_hd: int
    method: str
    field: Optional[Field]
    seed: Optional[int]
    hash_hex: str

    def __post_init__(self):
        if self.min_hd < self.d:
            raise ClaimRefuted(f"certificate carries min_hd {self.min_hd} < d {self.d}")

    def to_json(self) -> str:
        field = None
        if self.field is not None:
            field = {"p": self.field.p, "m": self.field.m, "modulus": list(self.field.modulus)}
        obj = {
            "n": self.n,
            "d": self.d,
            "size": self.size,
            "min_hd": self.min_hd,
            "method": self.method,
            "field": field,
            "seed": self.seed,
            "hash_hex": self.hash_hex,
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        try:
            obj = json.loads(text)
            field = None
            if obj["field"] is not None:
                field = Field(obj["field"]["p"], obj["field"]["m"], obj["field"]["modulus"])
            return cls(
                n=obj["n"],
                d=obj["d"],
                size=obj["size"],
                min_hd=obj["min_hd"],
                method=obj["method"],
                field=field,
                seed=obj["seed"],
                hash_hex=obj["hash_hex"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad certificate: {exc}") from exc

    def write(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def read(cls, path: str | os.PathLike) -> "Certificate":
        with open(path, encoding="ascii") as fh:
            return cls.from_json(fh.read())


def _sweep(arr: PArray) -> int:
    # a single row has no pairs; the claim is vacuous at the maximum
    if len(arr) < 2:
        return arr.n
    return arr.min_hd(mode="full").min_hd


def issue(
    path: str | os.PathLike,
    n: int,
    d: int,
    method: str = "unspecified",
    field: Optional[Field] = None,
    seed: Optional[int] = None,
) -> Certificate:
    """Exhaustively verify an array file and certify M(n,d) >= size."""
    arr = PArray.read(path)
    if arr.n != n:
        raise ClaimRefuted(f"file is on {arr.n} symbols, claim says {n}")
    if len(arr) >= 2:
        rep = arr.min_hd(mode="full")
        if rep.min_hd < d:
            raise ClaimRefuted(f"min hd {rep.min_hd} < claimed {d} at pair {rep.witness}")
        verified = rep.min_hd
    else:
        verified = arr.n
    return Certificate(
        n=n,
        d=d,
        size=len(arr),
        min_hd=verified,
        method=method,
        field=field,
        seed=seed,
        hash_hex=canonical_hash(path),
    )


def recheck(cert: Certificate, path: str | os.PathLike) -> bool:
    """Hash comparison plus a full re-verification of the claim."""
    actual = canonical_hash(path)
    if actual != cert.hash_hex:
        raise HashMismatch(f"file hash {actual[:16]}.. != certified {cert.hash_hex[:16]}..")
    arr = PArray.read(path)
    if arr.n != cert.n or len(arr) != cert.size:
        raise ClaimRefuted(f"file holds {len(arr)} perms on {arr.n} symbols, certificate says {cert.size} on {cert.n}")
    verified = _sweep(arr)
    if verified != cert.min_hd:
        raise ClaimRefuted(f"recomputed min hd {verified} != certified {cert.min_hd}")
    if verified < cert.d:
        raise ClaimRefuted(f"min hd {verified} < claimed {cert.d}")
    return True


def certify_bound(bound, array_path: str | os.PathLike, cert_path: str | os.PathLike, field: Optional[Field] = None) -> Certificate:
    """Write a BoundResult's array and issue its certificate in one step."""
    bound.array.write(array_path)
    cert = issue(
        array_path,
        bound.n,
        bound.d,
        method=bound.method,
        field=field,
        seed=None,
    )
    cert.write(cert_path)
    return cert
