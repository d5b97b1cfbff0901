"""A graph of chains recording the limits of a 0/1 function by exponent parity.

Layout of the universe (one sort, naturals):

* odd ``2m + 1`` with ``unpair(m) = (fam, pos)``: ``fam = 2i`` puts it at
  position ``pos`` of the N-chain ``N_i``; ``fam = 2i + 1`` puts it at the
  integer ``unzigzag(pos)`` of the Z-chain ``Z_i``;
* even ``2m`` is the m-th element of F. Only the prefix of F consumed by
  the stages run so far belongs to the universe.

Stage ``2s + 1`` builds a chain of order ``p_s ** (2 + f(s, s))`` from the
next free F elements. Stage ``2s + 2`` extends, for each n <= s with
``f(n, s) != f(n, s + 1)``, the chain of ``p_n`` to the least larger
exponent whose parity is ``f(n, s + 1)``. F chains are stored as lists of
contiguous blocks, so very long chains cost nothing until walked.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Optional

from ..structures import RuleStructure, Structure
from ..syntax import Signature
from .layout import pair, unpair, unzigzag, zigzag

LimitFn = Callable[[int, int], object]


def nth_prime(n: int) -> int:
    """p_0 = 2, p_1 = 3, ..."""
    return _primes_upto_count(n + 1)[n]


@lru_cache(maxsize=None)
def _primes_upto_count(count: int) -> tuple[int, ...]:
    found: list[int] = []
    for c in itertools.count(2):
        if all(c % p for p in found if p * p <= c):
            found.append(c)
            if len(found) == count:
                return tuple(found)
    raise AssertionError


def _least_factor(n: int) -> int:
    for d in itertools.chain([2], itertools.count(3, 2)):
        if d * d > n:
            return n
        if n % d == 0:
            return d
    raise AssertionError


def prime_power(order: int) -> Optional[tuple[int, int]]:
    """(p, j) with order = p ** j and j >= 1, or None."""
    if order < 2:
        return None
    p = _least_factor(order)
    j = 0
    while order % p == 0:
        order //= p
        j += 1
    return (p, j) if order == 1 else None


@dataclass
class ChainRecord:
    n: int
    prime: int
    exponents: list[tuple[int, int]]  # (stage, exponent) after each change
    blocks: list[tuple[int, int]] = field(default_factory=list)  # (first F index, length), path order

    @property
    def exponent(self) -> int:
        return self.exponents[-1][1]

    @property
    def order(self) -> int:
        return sum(length for _, length in self.blocks)

    @property
    def parity(self) -> int:
        return self.exponent % 2

    def f_indices(self) -> Iterator[int]:
        for start, length in self.blocks:
            yield from range(start, start + length)

    def max_vertex(self) -> int:
        return max(2 * (start + length - 1) for start, length in self.blocks)


@dataclass
class ChainInventory:
    records: dict[int, ChainRecord] = field(default_factory=dict)
    snapshots: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)  # (stage, all F-chain orders)
    consumed: int = 0
    stages: int = 0

    def export_lines(self) -> list[str]:
        return [
            f"prime={r.prime} order={r.order} parity={r.parity}"
            for r in sorted(self.records.values(), key=lambda r: r.prime)
        ]

    def visible(self, n: int, horizon: int) -> bool:
        """Is the whole chain of p_n below ``horizon``?"""
        r = self.records.get(n)
        return r is not None and r.max_vertex() < horizon

    def infinite_chain_counts(self, horizon: int) -> tuple[int, int]:
        """How many N-chains and Z-chains have a vertex below ``horizon``."""
        n_count = sum(1 for _ in itertools.takewhile(lambda i: _family_vertex(2 * i, 0) < horizon, itertools.count()))
        z_count = sum(1 for _ in itertools.takewhile(lambda i: _family_vertex(2 * i + 1, 0) < horizon, itertools.count()))
        return n_count, z_count


def _family_vertex(fam: int, pos: int) -> int:
    return 2 * pair(fam, pos) + 1


def _bit(f: LimitFn, n: int, s: int) -> int:
    v = f(n, s)
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int) and v in (0, 1):
        return v
    raise TypeError(f"limit function returned {v!r} at ({n}, {s}); expected 0 or 1")


class ChainGraph(RuleStructure):
    """The chain graph after a fixed number of stages."""

    def __init__(self, inventory: ChainInventory):
        self.inventory = inventory
        # global block index: sorted by F start
        rows = []
        for r in inventory.records.values():
            offset = 0
            for start, length in r.blocks:
                rows.append((start, length, r.n, offset))
                offset += length
        rows.sort()
        self._starts = [row[0] for row in rows]
        self._rows = rows
        self._chain_offsets = {
            r.n: list(itertools.accumulate([0] + [length for _, length in r.blocks[:-1]]))
            for r in inventory.records.values()
        }
        sig = Signature(("V",), (("E", (0, 0)),))
        super().__init__(
            sig,
            self._in_universe,
            {"E": lambda args: args[1] in self.neighbors(args[0])},
            {"E": self._support},
            enumerators={"E": self._enumerate},
        )

    def _in_universe(self, sort, k):
        return k >= 0 and (k % 2 == 1 or k // 2 < self.inventory.consumed)

    def _f_position(self, m: int) -> tuple[int, int]:
        i = bisect.bisect_right(self._starts, m) - 1
        start, length, n, offset = self._rows[i]
        return n, offset + (m - start)

    def _f_at(self, n: int, pos: int) -> int:
        rec = self.inventory.records[n]
        offs = self._chain_offsets[n]
        i = bisect.bisect_right(offs, pos) - 1
        start, _ = rec.blocks[i]
        return start + (pos - offs[i])

    def neighbors(self, u: int) -> list[int]:
        if not self._in_universe(0, u):
            return []
        if u % 2:
            fam, pos = unpair((u - 1) // 2)
            if fam % 2 == 0:
                nbrs = [pos - 1, pos + 1] if pos > 0 else [pos + 1]
                return sorted(_family_vertex(fam, q) for q in nbrs)
            z = unzigzag(pos)
            return sorted(_family_vertex(fam, zigzag(w)) for w in (z - 1, z + 1))
        n, pos = self._f_position(u // 2)
        order = self.inventory.records[n].order
        return sorted(2 * self._f_at(n, q) for q in (pos - 1, pos + 1) if 0 <= q < order)

    def _support(self, binding):
        u, v = binding
        if u is not None:
            return [(u, w) for w in self.neighbors(u) if v is None or w == v]
        if v is not None:
            return [(w, v) for w in self.neighbors(v)]
        return None

    def _enumerate(self, horizon):
        return [(u, w) for u in range(horizon) for w in self.neighbors(u) if w < horizon]


def build_chain_graph(f: LimitFn, stages: int) -> tuple[ChainGraph, ChainInventory]:
    """Run stages 1..``stages`` (stage 0 only fixes the layout)."""
    if stages < 0:
        raise ValueError("stages must be a natural number")
    bit = lru_cache(maxsize=None)(lambda n, s: _bit(f, n, s))
    inv = ChainInventory(stages=stages)

    def take(count: int) -> tuple[int, int]:
        start = inv.consumed
        inv.consumed += count
        return start, count

    for t in range(1, stages + 1):
        if t % 2 == 1:
            s = (t - 1) // 2
            p = nth_prime(s)
            exp = 2 + bit(s, s)
            inv.records[s] = ChainRecord(s, p, [(t, exp)], [take(p ** exp)])
        else:
            s = t // 2 - 1
            for n in range(s + 1):
                new = bit(n, s + 1)
                if bit(n, s) == new:
                    continue
                rec = inv.records[n]
                k = rec.exponent
                k2 = k + 1 if (k + 1) % 2 == new else k + 2
                rec.blocks.append(take(rec.prime ** k2 - rec.prime ** k))
                rec.exponents.append((t, k2))
        inv.snapshots.append((t, tuple(r.order for r in sorted(inv.records.values(), key=lambda r: r.n))))
    return ChainGraph(inv), inv


def decode_parities(s: Structure, horizon: int) -> dict[int, int]:
    """Exponent parities of the finite chains visible below ``horizon``.

    A finite chain is found from a vertex of degree one and walked to its
    other end; any chain that leaves the horizon is skipped. Returns
    ``{n: exponent mod 2}`` keyed by the prime's index.
    """
    if horizon < 1:
        raise ValueError("horizon must be positive")

    def nbrs(u):
        rows = s.support("E", (u, None))
        if rows is None:
            raise ValueError("decoding needs a support hint for E")
        return sorted({w for _, w in rows})

    found: dict[int, int] = {}
    ends: set[int] = set()
    for v in range(horizon):
        if v in ends or not s.in_sort(0, v):
            continue
        first = nbrs(v)
        if len(first) != 1:
            continue
        prev, cur, order = v, first[0], 1
        while cur < horizon:
            order += 1
            nb = nbrs(cur)
            if len(nb) == 1:
                ends.add(cur)
                pp = prime_power(order)
                if pp is None:
                    raise ValueError(f"finite chain of order {order} at vertex {v} is not a prime power")
                p, j = pp
                n = _primes_upto_count(_prime_count_bound(p)).index(p)
                if n in found:
                    raise ValueError(f"two finite chains with orders powers of {p}")
                found[n] = j % 2
                break
            prev, cur = cur, nb[1] if nb[0] == prev else nb[0]
    return dict(sorted(found.items()))


def _prime_count_bound(p: int) -> int:
    count = 1
    while _primes_upto_count(count)[-1] < p:
        count *= 2
    return count
