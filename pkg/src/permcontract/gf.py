"""Arithmetic in GF(p^m) with a canonical integer encoding of elements.

An element sum(c_i * x**i) is encoded as the integer sum(c_i * p**i), so the
elements of GF(q) are exactly 0..q-1 and the prime subfield occupies 0..p-1.
The modulus is the lexicographically first monic irreducible polynomial of
degree m, ordered by (constant term, next coefficient, ...).

Multiplication, inversion and powers run on exp/log tables over a fixed
primitive element; addition runs on a Zech logarithm table.  Everything is
precomputed at construction, so all scalar operations are deterministic table
lookups.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Iterable, Optional, Sequence

import numpy as np


class NonPrimeP(ValueError):
    """Field characteristic must be prime."""


class DegreeTooLarge(ValueError):
    """q = p^m exceeds the table-backed budget of 2^20."""


class DivideByZero(ZeroDivisionError):
    """Division or inversion of the zero element."""


class NoGeneratorOutsideAvoid(ValueError):
    """Every multiplicative generator is in the avoid set."""


class EvenOrNonPrimeP(ValueError):
    """Legendre symbol needs an odd prime modulus."""


class NotASquare(ArithmeticError):
    """-3 has no square root here (q is not 1 mod 3)."""


class OddCharacteristic(ValueError):
    """Absolute trace over GF(2) needs characteristic 2."""


class EvenCharacteristic(ValueError):
    """Operation needs an odd characteristic."""


class NoRoots(ArithmeticError):
    """t^2 + t + 1 has no roots here (q is not 1 mod 3)."""


class EqualInputs(ValueError):
    """The two field inputs must be distinct."""


class ParseError(ValueError):
    """Malformed textual serialization."""


_Q_CAP = 1 << 20
_DENSE_CAP = 2048


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _poly_eval(coeffs: Sequence[int], a: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * a + c) % p
    return acc


def _poly_rem(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    # remainder of f modulo monic g, little-endian coefficient lists
    r = list(f)
    dg = len(g) - 1
    for k in range(len(r) - 1, dg - 1, -1):
        c = r[k]
        if c:
            for i in range(dg + 1):
                r[k - dg + i] = (r[k - dg + i] - c * g[i]) % p
    return r[:dg]


def _is_irreducible(poly: Sequence[int], p: int) -> bool:
    m = len(poly) - 1
    if m < 1 or poly[m] != 1:
        return False
    if m == 1:
        return True
    for a in range(p):
        if _poly_eval(poly, a, p) == 0:
            return False
    # any nontrivial factorization has a factor of degree <= m // 2;
    # degree-1 factors were already ruled out by the root scan
    for d in range(2, m // 2 + 1):
        for tail in product(range(p), repeat=d):
            g = list(tail) + [1]
            if not any(_poly_rem(poly, g, p)):
                return False
    return True


def _lex_first_irreducible(p: int, m: int) -> tuple[int, ...]:
    if m == 1:
        return (0, 1)
    for low in product(range(p), repeat=m):
        # product() varies the last position fastest, so the constant term
        # low[0] is the primary sort key, as required
        poly = list(low) + [1]
        if _is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError(f"no irreducible polynomial of degree {m} over GF({p})")


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


class Field:
    """GF(p^m) with table-backed arithmetic on integer-encoded elements."""

    def __init__(self, p: int, m: int = 1, modulus: Optional[Sequence[int]] = None):
        if not is_prime(p):
            raise NonPrimeP(f"p={p} is not prime")
        if m < 1 or p**m > _Q_CAP:
            raise DegreeTooLarge(f"p^m = {p}^{m} outside [p, 2^20]")
        self.p = p
        self.m = m
        self.q = p**m
        if modulus is None:
            self.modulus = _lex_first_irreducible(p, m)
        else:
            self.modulus = tuple(int(c) % p for c in modulus)
            if len(self.modulus) != m + 1 or not _is_irreducible(self.modulus, p):
                raise ParseError(f"modulus {modulus} is not monic irreducible of degree {m}")
        self._mod_mask = sum(c << i for i, c in enumerate(self.modulus)) if p == 2 else 0
        self._build_log_tables()
        self._dense: Optional[tuple[np.ndarray, ...]] = None
        self._cache: dict[str, object] = {}

    # -- construction internals -------------------------------------------

    def _digits(self, x: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.m):
            x, r = divmod(x, p)
            out.append(r)
        return out

    def _raw_add(self, x: int, y: int) -> int:
        if self.p == 2:
            return x ^ y
        p = self.p
        out = 0
        pk = 1
        for _ in range(self.m):
            x, a = divmod(x, p)
            y, b = divmod(y, p)
            out += ((a + b) % p) * pk
            pk *= p
        return out

    def _raw_mul(self, x: int, y: int) -> int:
        if self.p == 2:
            m, mask = self.m, self._mod_mask
            r = 0
            while y:
                if y & 1:
                    r ^= x
                y >>= 1
                x <<= 1
                if x >> m:
                    x ^= mask
            return r
        p = self.p
        xd, yd = self._digits(x), self._digits(y)
        prod = [0] * (2 * self.m - 1)
        for i, a in enumerate(xd):
            if a:
                for j, b in enumerate(yd):
                    prod[i + j] += a * b
        mod = self.modulus
        for k in range(len(prod) - 1, self.m - 1, -1):
            c = prod[k] % p
            if c:
                for i in range(self.m):
                    prod[k - self.m + i] -= c * mod[i]
            prod[k] = 0
        out = 0
        for d in reversed(prod[: self.m]):
            out = out * p + d % p
        return out

    def _raw_pow(self, x: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._raw_mul(r, x)
            x = self._raw_mul(x, x)
            e >>= 1
        return r

    def _build_log_tables(self) -> None:
        q = self.q
        if q == 2:
            prim = 1
        else:
            checks = [(q - 1) // ell for ell in _prime_factors(q - 1)]
            prim = 0
            for g in range(2, q):
                if all(self._raw_pow(g, e) != 1 for e in checks):
                    prim = g
                    break
            assert prim, "no primitive element found"
        exp = [0] * (q - 1)
        log = [-1] * q
        acc = 1
        for k in range(q - 1):
            exp[k] = acc
            log[acc] = k
            acc = self._raw_mul(acc, prim)
        assert acc == 1, "primitive element order mismatch"
        zech = [-1] * (q - 1)
        for k in range(q - 1):
            s = self._raw_add(1, exp[k])
            zech[k] = log[s] if s else -1
        self._exp = exp
        self._log = log
        self._zech = zech

    # -- scalar arithmetic --------------------------------------------------

    def add(self, x: int, y: int) -> int:
        if x == 0:
            return y
        if y == 0:
            return x
        qm1 = self.q - 1
        lx = self._log[x]
        d = self._log[y] - lx
        if d < 0:
            d += qm1
        z = self._zech[d]
        if z < 0:
            return 0
        s = lx + z
        if s >= qm1:
            s -= qm1
        return self._exp[s]

    def neg(self, x: int) -> int:
        if self.p == 2 or x == 0:
            return x
        # -1 = g^((q-1)/2)
        qm1 = self.q - 1
        return self._exp[(self._log[x] + qm1 // 2) % qm1]

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        qm1 = self.q - 1
        s = self._log[x] + self._log[y]
        if s >= qm1:
            s -= qm1
        return self._exp[s]

    def inv(self, x: int) -> int:
        if x == 0:
            raise DivideByZero("inverse of 0")
        return self._exp[-self._log[x] % (self.q - 1)]

    def div(self, x: int, y: int) -> int:
        if y == 0:
            raise DivideByZero("division by 0")
        return self.mul(x, self.inv(y))

    def pow(self, x: int, e: int) -> int:
        if x == 0:
            if e == 0:
                return 1
            if e < 0:
                raise DivideByZero("negative power of 0")
            return 0
        return self._exp[self._log[x] * e % (self.q - 1)]

    def of_int(self, k: int) -> int:
        return k % self.p

    def order(self, x: int) -> int:
        if x == 0:
            raise DivideByZero("0 has no multiplicative order")
        return (self.q - 1) // math.gcd(self._log[x], self.q - 1)

    def elements(self) -> range:
        return range(self.q)

    def units(self) -> range:
        return range(1, self.q)

    # -- vectorized tables ---------------------------------------------------

    def np_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Dense (add, mul, inv, neg) numpy tables; only for q <= 2048."""
        if self._dense is not None:
            return self._dense
        q = self.q
        assert q <= _DENSE_CAP, f"dense tables capped at q={_DENSE_CAP}"
        p_digits = np.zeros((q, self.m), dtype=np.int64)
        x = np.arange(q)
        for i in range(self.m):
            x, r = np.divmod(x, self.p)
            p_digits[:, i] = r
        powers = self.p ** np.arange(self.m)
        add = np.zeros((q, q), dtype=np.int32)
        for v in range(q):
            add[v] = ((p_digits + p_digits[v]) % self.p) @ powers
        exp = np.array(self._exp, dtype=np.int64)
        log = np.array(self._log, dtype=np.int64)
        lg = np.where(log < 0, 0, log)
        mul = exp[(lg[:, None] + lg[None, :]) % (q - 1)].astype(np.int32)
        mul[0, :] = 0
        mul[:, 0] = 0
        inv = np.zeros(q, dtype=np.int32)
        inv[1:] = exp[(-log[1:]) % (q - 1)]
        neg = np.array([self.neg(v) for v in range(q)], dtype=np.int32)
        self._dense = (add, mul, inv, neg)
        return self._dense

    # -- serialization ---------------------------------------------------------

    def serialize(self) -> str:
        mod = ",".join(str(c) for c in self.modulus)
        return f"p={self.p} m={self.m} modulus={mod}"

    @classmethod
    def parse(cls, text: str) -> "Field":
        fields = {}
        for tok in text.split():
            if "=" not in tok:
                raise ParseError(f"bad field token {tok!r}")
            k, v = tok.split("=", 1)
            fields[k] = v
        try:
            p = int(fields["p"])
            m = int(fields["m"])
            modulus = [int(c) for c in fields["modulus"].split(",")]
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad field serialization {text!r}") from exc
        return cls(p, m, modulus)

    def __repr__(self) -> str:
        return f"Field(p={self.p}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Field)
            and (self.p, self.m, self.modulus) == (other.p, other.m, other.modulus)
        )

    def __hash__(self) -> int:
        return hash((self.p, self.m, self.modulus))


def find_generator(field: Field, avoid: Iterable[int] = ()) -> int:
    """Smallest-index multiplicative generator of GF(q)* outside `avoid`."""
    banned = set(avoid)
    for x in field.units():
        if x not in banned and field.order(x) == field.q - 1:
            return x
    raise NoGeneratorOutsideAvoid(
        f"all generators of GF({field.q})* lie in avoid set {sorted(banned)}"
    )


def legendre(r: int, p: int) -> int:
    """Legendre symbol (r/p) in {-1, 0, 1} by Euler's criterion."""
    if p == 2 or not is_prime(p):
        raise EvenOrNonPrimeP(f"p={p} must be an odd prime")
    e = pow(r % p, (p - 1) // 2, p)
    return -1 if e == p - 1 else e


def sqrt_minus3(field: Field) -> int:
    """A square root of -3 in GF(q), the smaller of the two by index.

    Exists exactly when q = 1 (mod 3); characteristic 2 is rejected since
    -3 = 1 there and the quadratic-formula callers all need odd q.
    """
    if field.p == 2:
        raise EvenCharacteristic("sqrt_minus3 needs odd q")
    cached = field._cache.get("sqrt_minus3")
    if cached is not None:
        return cached  # type: ignore[return-value]
    if field.q % 3 != 1:
        raise NotASquare(f"-3 is not a unit square in GF({field.q})")
    m3 = field.neg(field.of_int(3))
    for s in field.units():
        if field.mul(s, s) == m3:
            field._cache["sqrt_minus3"] = s
            return s
    raise AssertionError("q = 1 (mod 3) but -3 has no root")


def trace_gf2(field: Field, x: int) -> int:
    """Absolute trace x + x^2 + x^4 + ... + x^(2^(m-1)) over GF(2)."""
    if field.p != 2:
        raise OddCharacteristic("trace over GF(2) needs characteristic 2")
    acc = 0
    term = x
    for _ in range(field.m):
        acc = field.add(acc, term)
        term = field.mul(term, term)
    assert acc in (0, 1), "trace landed outside the prime subfield"
    return acc


def solve_unit_quadratic(field: Field) -> tuple[int, int]:
    """Both roots of t^2 + t + 1 = 0 in GF(q), ascending by index.

    Roots exist exactly when q = 1 (mod 3); they are inverses of each other.
    """
    cached = field._cache.get("unit_quadratic")
    if cached is not None:
        return cached  # type: ignore[return-value]
    if field.q % 3 != 1:
        raise NoRoots(f"t^2+t+1 has no roots in GF({field.q})")
    if field.p == 2:
        roots = [
            t
            for t in field.units()
            if field.add(field.add(field.mul(t, t), t), 1) == 0
        ]
        assert len(roots) == 2, "expected exactly two roots in even characteristic"
        t1, t2 = sorted(roots)
    else:
        s = sqrt_minus3(field)
        half = field.inv(field.of_int(2))
        r1 = field.mul(half, field.sub(s, 1))
        r2 = field.mul(half, field.neg(field.add(s, 1)))
        t1, t2 = sorted((r1, r2))
    assert t2 == field.inv(t1) and t1 != t2
    assert field.pow(t1, 3) == 1 and t1 != 1
    field._cache["unit_quadratic"] = (t1, t2)
    return t1, t2


def solve_agreement_quadratic(field: Field, i: int, j: int) -> tuple[int, int]:
    """Both roots of x^2 - (i+j)x + (ij + (i-j)^2) = 0, ascending by index.

    Closed form: x = [i(1 +/- s) + j(1 -/+ s)] / 2 with s = sqrt(-3).
    The roots are distinct whenever i != j and q = 1 (mod 3).
    """
    if i == j:
        raise EqualInputs(f"i == j == {i}")
    if field.p == 2:
        raise EvenCharacteristic("agreement quadratic needs odd q")
    s = sqrt_minus3(field)
    half = field.inv(field.of_int(2))
    up = field.add(1, s)
    dn = field.sub(1, s)
    x1 = field.mul(half, field.add(field.mul(i, up), field.mul(j, dn)))
    x2 = field.mul(half, field.add(field.mul(i, dn), field.mul(j, up)))
    b = field.add(i, j)
    c = field.add(field.mul(i, j), field.mul(field.sub(i, j), field.sub(i, j)))
    for x in (x1, x2):
        val = field.add(field.sub(field.mul(x, x), field.mul(b, x)), c)
        assert val == 0, "closed-form root failed substitution"
    assert x1 != x2
    return (x1, x2) if x1 < x2 else (x2, x1)


def split_prime_power(q: int) -> Optional[tuple[int, int]]:
    """Factor q as p^m for prime p, or None if q is not a prime power."""
    if q < 2:
        return None
    p = 2
    while p * p <= q:
        if q % p == 0:
            break
        p += 1
    else:
        return (q, 1)
    m = 0
    x = q
    while x % p == 0:
        x //= p
        m += 1
    return (p, m) if x == 1 else None


def residue_identity_report(
    pair_limit: int = 97,
    prime_limit: int = 500,
    qs: Sequence[int] = (4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 31, 64),
) -> dict[str, tuple[bool, int]]:
    """Empirical sweeps of the three residue identities the constructions
    lean on, each against a brute-force oracle.

    Returns {check: (passed, cases)} for: the reciprocity product identity
    over odd prime pairs, the -3 residue dichotomy mod 6, and existence of
    distinct unit-quadratic roots exactly when q = 1 (mod 3).
    """
    primes = [n for n in range(3, max(pair_limit, prime_limit) + 1) if is_prime(n)]

    ok = True
    cases = 0
    small = [p for p in primes if p <= pair_limit]
    for a_i, p in enumerate(small):
        for p2 in small[a_i + 1 :]:
            sign = (-1) ** (((p - 1) // 2) * ((p2 - 1) // 2))
            ok &= legendre(p, p2) * legendre(p2, p) == sign
            cases += 1
    reciprocity = (ok, cases)

    ok = True
    cases = 0
    for p in primes:
        if p <= 3 or p > prime_limit:
            continue
        ok &= legendre(-3, p) == (1 if p % 6 == 1 else -1)
        cases += 1
    dichotomy = (ok, cases)

    ok = True
    for q in qs:
        split = split_prime_power(q)
        if split is None:
            ok = False
            continue
        f = Field(*split)
        roots = [t for t in f.elements() if f.add(f.add(f.mul(t, t), t), 1) == 0]
        if q % 3 == 1:
            try:
                ok &= tuple(sorted(roots)) == solve_unit_quadratic(f)
            except NoRoots:
                ok = False
            ok &= len(roots) == 2
        else:
            try:
                solve_unit_quadratic(f)
                ok = False
            except NoRoots:
                pass
            # char 3 keeps the single repeated root t = 1
            ok &= len(roots) == (1 if q % 3 == 0 else 0)
    unit = (bool(ok), len(qs))

    return {
        "reciprocity": reciprocity,
        "residue_dichotomy": dichotomy,
        "unit_quadratic_dichotomy": unit,
    }
