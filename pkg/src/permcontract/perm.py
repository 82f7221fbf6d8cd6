"""Permutations as image strings, contraction, and pairwise distance sweeps.

A permutation on n symbols is a tuple/list of its images (perm[x] is the image
of x).  Composition is left to right: compose(p, q) applies p first, then q.
Arrays of permutations are held as dense uint8 matrices (n <= 256), with the
pairwise minimum Hamming distance computed by a packed 8-bit-per-symbol sweep
so one uint64 word compares 8 positions at a time.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from numba import njit, prange

from .gf import ParseError


class MismatchedN(ValueError):
    """Operands live on different symbol counts."""


class TooFewPerms(ValueError):
    """A pairwise sweep needs at least two rows."""


MAX_SYMBOLS = 256


def identity(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """Left-to-right product: apply p, then q."""
    if len(p) != len(q):
        raise MismatchedN(f"compose on {len(p)} vs {len(q)} symbols")
    return tuple(q[v] for v in p)


def inverse(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for x, y in enumerate(p):
        out[y] = x
    return tuple(out)


def cycle_type(p: Sequence[int]) -> tuple[int, ...]:
    """Multiset of cycle lengths, ascending, fixed points included."""
    seen = [False] * len(p)
    lengths = []
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = p[x]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths))


def fixed_points(p: Sequence[int]) -> int:
    return sum(1 for x, y in enumerate(p) if x == y)


def hd(p: Sequence[int], q: Sequence[int]) -> int:
    """Hamming distance: number of positions where the images differ."""
    if len(p) != len(q):
        raise MismatchedN(f"hd on {len(p)} vs {len(q)} symbols")
    return sum(1 for a, b in zip(p, q) if a != b)


def contract_full(p: Sequence[int]) -> tuple[int, ...]:
    """Swap the symbols F and p(F) in the image string, F being n-1.

    Fixes p when p(F) = F; otherwise the result maps F -> F and the old
    preimage of F to p(F).  Same symbol count as the input.
    """
    n = len(p)
    f = n - 1
    pf = p[f]
    if pf == f:
        return tuple(p)
    out = list(p)
    out[out.index(f)] = pf
    out[f] = f
    return tuple(out)


def contract_drop(p: Sequence[int]) -> tuple[int, ...]:
    """contract_full followed by dropping the final symbol F = n-1."""
    return contract_full(p)[:-1]


# -- packed pairwise sweeps ----------------------------------------------------

_M7 = np.uint64(0x7F7F7F7F7F7F7F7F)
_M8 = np.uint64(0x8080808080808080)
_M1 = np.uint64(0x0101010101010101)


def _pack(mat: np.ndarray) -> np.ndarray:
    n_rows, n = mat.shape
    words = (n + 7) // 8
    buf = np.zeros((n_rows, words * 8), dtype=np.uint8)
    buf[:, :n] = mat
    return np.ascontiguousarray(buf).view(np.uint64)


@njit(cache=True)
def _byte_ne_count(x: np.uint64) -> np.int64:
    # one bit per nonzero byte of x, then a byte-sum via multiply
    y = (((x & _M7) + _M7) | x) & _M8
    return np.int64(((y >> 7) * _M1) >> 56)


@njit(parallel=True, cache=True)
def _row_min_sweep(packed: np.ndarray) -> np.ndarray:
    n_rows, words = packed.shape
    row_min = np.full(n_rows, 1 << 30, dtype=np.int64)
    for i in prange(n_rows - 1):
        best = np.int64(1 << 30)
        for j in range(i + 1, n_rows):
            d = np.int64(0)
            for w in range(words):
                d += _byte_ne_count(packed[i, w] ^ packed[j, w])
            if d < best:
                best = d
        row_min[i] = best
    return row_min


@njit(cache=True)
def _first_pair_at(packed: np.ndarray, target: np.int64) -> tuple[int, int]:
    n_rows, words = packed.shape
    for i in range(n_rows - 1):
        for j in range(i + 1, n_rows):
            d = np.int64(0)
            for w in range(words):
                d += _byte_ne_count(packed[i, w] ^ packed[j, w])
            if d == target:
                return i, j
    return -1, -1


def _splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Stateless splitmix64 stream: word k of the stream for the given seed."""
    gamma = np.uint64(0x9E3779B97F4A7C15)
    k = np.arange(offset, offset + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + (k + np.uint64(1)) * gamma
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def splitmix64_stream(seed: int, count: int, offset: int = 0) -> np.ndarray:
    return _splitmix64(seed, count, offset)


def thread_count(requested: Optional[int] = None) -> int:
    if requested is None:
        env = os.environ.get("PERMCONTRACT_THREADS", "")
        requested = int(env) if env.isdigit() and int(env) > 0 else 0
    cores = os.cpu_count() or 1
    if not requested or requested < 1:
        return cores
    return min(requested, cores)


@dataclass(frozen=True)
class HdReport:
    min_hd: int
    witness: tuple[int, int]
    pairs_checked: int
    mode: str
    seed: Optional[int] = None


class PArray:
    """A permutation array: N image strings on the symbols 0..n-1."""

    def __init__(self, rows: Iterable[Sequence[int]] | np.ndarray, n: Optional[int] = None, validate: bool = True):
        if isinstance(rows, np.ndarray) and rows.dtype == np.uint8 and rows.ndim == 2:
            mat = rows
        else:
            rows = list(rows)
            if not rows:
                raise TooFewPerms("empty permutation array")
            mat = np.array(rows, dtype=np.uint8)
        if n is not None and mat.shape[1] != n:
            raise MismatchedN(f"rows have {mat.shape[1]} symbols, expected {n}")
        self.n = int(mat.shape[1])
        if self.n > MAX_SYMBOLS:
            raise MismatchedN(f"n={self.n} exceeds the packed limit {MAX_SYMBOLS}")
        self.mat = np.ascontiguousarray(mat)
        if validate:
            srt = np.sort(self.mat, axis=1)
            bad = np.nonzero((srt != np.arange(self.n, dtype=np.uint8)).any(axis=1))[0]
            if bad.size:
                raise ParseError(f"row {bad[0]} is not a permutation of 0..{self.n - 1}")
        self._packed: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.mat.shape[0]

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.mat[i])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PArray) and self.n == other.n and np.array_equal(self.mat, other.mat)

    def rows(self) -> Iterable[tuple[int, ...]]:
        for i in range(len(self)):
            yield self[i]

    def packed(self) -> np.ndarray:
        if self._packed is None:
            self._packed = _pack(self.mat)
        return self._packed

    # -- distance sweeps ------------------------------------------------------

    def min_hd(self, mode: str = "full", pairs: int = 10_000_000, seed: int = 0, threads: Optional[int] = None) -> HdReport:
        """Minimum pairwise Hamming distance with a witness pair.

        mode="full" sweeps all N(N-1)/2 pairs exactly; mode="sampled" checks
        `pairs` seeded random pairs, giving an upper bound on the minimum.
        The witness is the lexicographically first pair attaining the reported
        minimum (full mode) or the first sampled pair attaining it.
        """
        n_rows = len(self)
        if n_rows < 2:
            raise TooFewPerms("min_hd needs at least two rows")
        if mode == "full":
            import numba

            # numba rejects requests above its own launch-time cap
            cap = numba.config.NUMBA_NUM_THREADS
            numba.set_num_threads(min(thread_count(threads), cap))
            row_min = _row_min_sweep(self.packed())
            best = int(row_min.min())
            i, j = _first_pair_at(self.packed(), np.int64(best))
            return HdReport(best, (int(i), int(j)), n_rows * (n_rows - 1) // 2, "full")
        if mode != "sampled":
            raise ValueError(f"unknown mode {mode!r}")
        packed = self.packed()
        best = 1 << 30
        witness = (-1, -1)
        done = 0
        chunk = 1 << 20
        offset = 0
        while done < pairs:
            take = min(chunk, pairs - done)
            raw_i = _splitmix64(seed, take, offset)
            raw_j = _splitmix64(seed ^ 0x5851F42D4C957F2D, take, offset)
            offset += take
            ii = (raw_i % np.uint64(n_rows)).astype(np.int64)
            jj = (raw_j % np.uint64(n_rows - 1)).astype(np.int64)
            jj = np.where(jj >= ii, jj + 1, jj)
            x = packed[ii] ^ packed[jj]
            y = (((x & _M7) + _M7) | x) & _M8
            dists = (((y >> np.uint64(7)) * _M1) >> np.uint64(56)).sum(axis=1).astype(np.int64)
            k = int(dists.argmin())
            if int(dists[k]) < best:
                best = int(dists[k])
                witness = (int(ii[k]), int(jj[k]))
            done += take
        return HdReport(best, witness, pairs, "sampled", seed=seed)

    # -- structure helpers ------------------------------------------------------

    def partition_by_position(self, pos: int) -> dict[int, "PArray"]:
        """Split rows by their symbol at the given position."""
        out: dict[int, PArray] = {}
        col = self.mat[:, pos]
        for sym in sorted(set(int(v) for v in col)):
            out[sym] = PArray(self.mat[col == sym], validate=False)
        return out

    # -- text format ------------------------------------------------------------

    def write(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(f"n={self.n} count={len(self)}\n")
            for i in range(len(self)):
                fh.write(" ".join(str(int(v)) for v in self.mat[i]))
                fh.write("\n")

    @classmethod
    def read(cls, path: str | os.PathLike) -> "PArray":
        with open(path) as fh:
            header = fh.readline().strip()
            m = re.fullmatch(r"n=(\d+) count=(\d+)", header)
            if not m:
                raise ParseError(f"bad header {header!r}")
            n, count = int(m.group(1)), int(m.group(2))
            rows = []
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = [int(tok) for tok in line.split()]
                except ValueError as exc:
                    raise ParseError(f"line {lineno}: non-integer symbol") from exc
                if len(row) != n:
                    raise MismatchedN(f"line {lineno}: {len(row)} symbols, expected {n}")
                if any(v < 0 or v >= n for v in row):
                    raise ParseError(f"line {lineno}: symbol out of range")
                rows.append(row)
        if len(rows) != count:
            raise ParseError(f"header promised {count} rows, file has {len(rows)}")
        return cls(rows, n=n)


def contract_array(a: PArray, drop: bool = True) -> PArray:
    """Contract every row of the array (vectorized), optionally dropping F."""
    mat = a.mat.copy()
    f = a.n - 1
    fcol = mat[:, f].copy()
    moved = fcol != f
    pos_of_f = np.argmax(mat == f, axis=1)
    rows_moved = np.nonzero(moved)[0]
    mat[rows_moved, pos_of_f[rows_moved]] = fcol[rows_moved]
    mat[rows_moved, f] = f
    if drop:
        mat = np.ascontiguousarray(mat[:, :-1])
    return PArray(mat, validate=False)


# -- cycle notation ---------------------------------------------------------------

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, n: int) -> tuple[int, ...]:
    """Parse 1-based disjoint cycle notation like "(1,4)(3,10,5)" on n points."""
    stripped = text.replace(" ", "")
    if stripped in ("()", "id", ""):
        return identity(n)
    if not re.fullmatch(r"(\([^()]+\))+", stripped):
        raise ParseError(f"bad cycle notation {text!r}")
    images = list(range(n))
    touched = set()
    for body in _CYCLE_RE.findall(stripped):
        try:
            pts = [int(tok) - 1 for tok in body.split(",")]
        except ValueError as exc:
            raise ParseError(f"bad cycle {body!r}") from exc
        if any(v < 0 or v >= n for v in pts) or len(set(pts)) != len(pts):
            raise ParseError(f"cycle {body!r} out of range or repeats a point")
        if any(v in touched for v in pts):
            raise ParseError(f"cycle {body!r} overlaps an earlier cycle")
        touched.update(pts)
        for k, v in enumerate(pts):
            images[v] = pts[(k + 1) % len(pts)]
    return tuple(images)


def format_cycles(p: Sequence[int]) -> str:
    """1-based disjoint cycle notation; fixed points omitted, identity is "()"."""
    seen = [False] * len(p)
    parts = []
    for start in range(len(p)):
        if seen[start] or p[start] == start:
            seen[start] = True
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x + 1)
            x = p[x]
        parts.append("(" + ",".join(map(str, cyc)) + ")")
    return "".join(parts) if parts else "()"
