"""The effective minimum-theory graph model, componentwise.

Finite partial pairs with carrier inside the naturals are put in bijection
with the naturals: pairs are grouped by carrier bitmask (ascending), and the
codings over one carrier are ordered by size and then lexicographically over
their sorted entry lists.  The k-th pair is relocated onto powers of the k-th
prime, which makes all component carriers pairwise disjoint; the union of the
relocated codings is a computable total-on-keys partial coding of a decidable
subset of the naturals, and its completion interprets every closed term as in
each component separately.  An inequation refutable in any completion of a
finite pair is therefore refutable in some component, which the search here
scans for.

Primes come from a small incremental sieve (1-indexed: prime(1) = 2; index 0
belongs to the empty pair, which has no atoms and needs no prime).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Iterable, Optional

from .approximation import Evaluator, Verdict, approx_interpret, check_inequation
from .completion import CeilingExceeded, DEFAULT_CEILING, elements_up_to, support_atoms
from .pairs import Morphism, PartialPair, union
from .terms import LambdaTerm, _cantor_pair, _cantor_unpair, is_closed

logger = logging.getLogger(__name__)

Entry = tuple[tuple[frozenset[int], int], int]  # ((args, res), val)


# ---------------------------------------------------------------------------
# Primes


_PRIMES: list[int] = [2, 3]


def _extend_primes() -> None:
    candidate = _PRIMES[-1] + 2
    while True:
        if all(candidate % p for p in _PRIMES if p * p <= candidate):
            _PRIMES.append(candidate)
            return
        candidate += 2


def kth_prime(k: int) -> int:
    """The k-th prime, 1-indexed: kth_prime(1) = 2."""
    if k < 1:
        raise ValueError("prime indices start at 1")
    while len(_PRIMES) < k:
        _extend_primes()
    return _PRIMES[k - 1]


def prime_index(p: int) -> Optional[int]:
    """1-based position of p in the primes, or None if p is not prime."""
    if p < 2:
        return None
    while _PRIMES[-1] < p:
        _extend_primes()
    lo, hi = 0, len(_PRIMES)
    while lo < hi:
        mid = (lo + hi) // 2
        if _PRIMES[mid] < p:
            lo = mid + 1
        else:
            hi = mid
    return lo + 1 if lo < len(_PRIMES) and _PRIMES[lo] == p else None


def _prime_power(n: int) -> Optional[tuple[int, int]]:
    """(p, e) with n = p**e and e >= 1, or None."""
    if n < 2:
        return None
    i = 1
    while True:
        p = kth_prime(i)
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            return (p, e) if n == 1 else None
        i += 1
    return (n, 1)  # n itself is prime


# ---------------------------------------------------------------------------
# Numeration of finite partial pairs


def _carrier_of_mask(mask: int) -> tuple[int, ...]:
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return tuple(out)


def _mask_of_carrier(atoms: Iterable[int]) -> int:
    mask = 0
    for x in atoms:
        if x < 0:
            raise ValueError("carrier atoms must be naturals")
        mask |= 1 << x
    return mask


def _entry_key(entry: Entry) -> tuple[int, int, int]:
    (args, res), val = entry
    return (_mask_of_carrier(args), res, val)


def _entry_universe(carrier: tuple[int, ...]) -> list[Entry]:
    entries: list[Entry] = []
    for m in range(len(carrier) + 1):
        for args in itertools.combinations(carrier, m):
            for res in carrier:
                for val in carrier:
                    entries.append(((frozenset(args), res), val))
    entries.sort(key=_entry_key)
    return entries


def _is_coding(combo: tuple[Entry, ...]) -> bool:
    keys = {key for key, _ in combo}
    vals = {val for _, val in combo}
    return len(keys) == len(combo) and len(vals) == len(combo)


def _codings_of_size(b: int, m: int) -> int:
    """How many codings with m entries a b-atom carrier admits: pick m
    distinct keys among the 2^b * b candidates and assign m distinct values."""
    domain = (2**b) * b
    perms = 1
    for i in range(m):
        perms *= b - i
    return comb(domain, m) * perms


def pair_count_for_size(b: int) -> int:
    """Total number of partial pairs over a fixed b-atom carrier."""
    return sum(_codings_of_size(b, m) for m in range(b + 1))


class _CodingEnumeration:
    """Lazily materialized list of the valid codings over one carrier, in
    size-then-lexicographic order over sorted entry tuples."""

    def __init__(self, carrier: tuple[int, ...]):
        self.carrier = carrier
        self._found: list[tuple[Entry, ...]] = []
        self._source = self._generate()

    def _generate(self):
        entries = _entry_universe(self.carrier)
        for m in range(len(self.carrier) + 1):
            for combo in itertools.combinations(entries, m):
                if _is_coding(combo):
                    yield combo

    def at(self, j: int) -> tuple[Entry, ...]:
        while len(self._found) <= j:
            try:
                self._found.append(next(self._source))
            except StopIteration:
                raise ValueError("coding index out of range") from None
        return self._found[j]

    def index(self, coding: dict) -> int:
        m = len(coding)
        if m > len(self.carrier):
            raise ValueError("not a valid coding: more entries than atoms")
        target = tuple(sorted(((key, val) for key, val in coding.items()), key=_entry_key))
        j = sum(_codings_of_size(len(self.carrier), s) for s in range(m))
        while True:
            combo = self.at(j)
            if combo == target:
                return j
            if len(combo) > m:
                raise ValueError("coding not reachable over this carrier")
            j += 1


_CODINGS_BY_CARRIER: dict[tuple[int, ...], _CodingEnumeration] = {}


def _codings_over(carrier: tuple[int, ...]) -> _CodingEnumeration:
    got = _CODINGS_BY_CARRIER.get(carrier)
    if got is None:
        got = _CODINGS_BY_CARRIER.setdefault(carrier, _CodingEnumeration(carrier))
    return got


def _unrank_coding(carrier: tuple[int, ...], j: int) -> dict:
    return {key: val for key, val in _codings_over(carrier).at(j)}


def _rank_coding(carrier: tuple[int, ...], coding: dict) -> int:
    return _codings_over(carrier).index(coding)


def _count_below_with_popcount(limit: int, b: int) -> int:
    """Naturals strictly below `limit` whose binary weight is b."""
    count = 0
    ones = 0
    for i in range(limit.bit_length() - 1, -1, -1):
        if limit >> i & 1:
            count += comb(i, b - ones) if b - ones >= 0 else 0
            ones += 1
            if ones > b:
                break
    return count


_PAIR_CACHE: dict[int, PartialPair] = {}


def enumerate_pair(k: int) -> PartialPair:
    """The k-th finite partial pair; inverse of encode_pair."""
    if k < 0:
        raise ValueError("pair indices are naturals")
    cached = _PAIR_CACHE.get(k)
    if cached is not None:
        return cached
    n = k
    for mask in itertools.count():
        carrier = _carrier_of_mask(mask)
        block = pair_count_for_size(len(carrier))
        if n < block:
            out = PartialPair(carrier, _unrank_coding(carrier, n))
            _PAIR_CACHE[k] = out
            return out
        n -= block
    raise AssertionError


def encode_pair(p: PartialPair) -> int:
    """Index of a finite partial pair in the numeration."""
    mask = _mask_of_carrier(p.atoms)
    b = len(p.atoms)
    before = sum(
        pair_count_for_size(weight) * _count_below_with_popcount(mask, weight)
        for weight in range(mask.bit_length() + 1)
    )
    carrier = tuple(sorted(p.atoms))
    return before + _rank_coding(carrier, dict(p.coding))


# ---------------------------------------------------------------------------
# Prime relocation


def relocate(k: int) -> PartialPair:
    """The k-th pair moved onto powers of the k-th prime: atom x becomes
    p_k**(x+1) and the coding is transported along.  Carriers of distinct
    components are disjoint."""
    source = enumerate_pair(k)
    if not source.atoms:
        return source
    p = kth_prime(k)

    def move(x: int) -> int:
        return p ** (x + 1)

    atoms = {move(x) for x in source.atoms}
    coding = {
        (frozenset(move(x) for x in a), move(alpha)): move(v)
        for (a, alpha), v in source.coding.items()
    }
    return PartialPair(atoms, coding)


def relocation_morphism(k: int) -> Morphism:
    """The isomorphism from the k-th pair onto its relocated copy."""
    source = enumerate_pair(k)
    target = relocate(k)
    if not source.atoms:
        return Morphism(source, target, {})
    p = kth_prime(k)
    return Morphism(source, target, {x: p ** (x + 1) for x in source.atoms})


def is_in_P(n: int) -> bool:
    """Membership in the union of the relocated carriers, by factoring."""
    pe = _prime_power(n)
    if pe is None:
        return False
    p, e = pe
    k = prime_index(p)
    if k is None:
        return False
    return (e - 1) in enumerate_pair(k).atoms


def component_of(n: int) -> int:
    """The component index whose carrier contains n."""
    if n < 1:
        raise ValueError("carrier members are positive naturals")
    pe = _prime_power(n)
    if pe is None or not is_in_P(n):
        raise ValueError(f"{n} is not in the model carrier")
    return prime_index(pe[0])


def _decompose(n: int) -> tuple[int, int]:
    """(component index, original atom) for a carrier member."""
    p, e = _prime_power(n)
    return prime_index(p), e - 1


# ---------------------------------------------------------------------------
# Elements of the big model and the universal coding


@dataclass(frozen=True)
class AtomCode:
    """A carrier member p_k**(x+1); decidable by factoring."""

    n: int

    def sort_key(self) -> tuple:
        return (0, self.n)

    def __str__(self) -> str:
        return str(self.n)


@dataclass(frozen=True)
class PairCode:
    """An uncoded (args, res) element of the completion of the big model."""

    args: frozenset
    res: "CodedElement"

    def sort_key(self) -> tuple:
        return (1, tuple(sorted(e.sort_key() for e in self.args)), self.res.sort_key())

    def __str__(self) -> str:
        inner = ",".join(str(e) for e in sorted(self.args, key=lambda e: e.sort_key()))
        return f"({{{inner}}},{self.res})"


CodedElement = AtomCode | PairCode


def universal_coding(args: Iterable[CodedElement], res: CodedElement) -> CodedElement:
    """Total injective coding of the big model: keys living inside a single
    component and coded there collapse to the coded atom; everything else
    (mixed components included) codes as a fresh pair."""
    args = frozenset(args)
    if isinstance(res, AtomCode) and all(isinstance(a, AtomCode) for a in args):
        parts = [_decompose(a.n) for a in args]
        res_k, res_x = _decompose(res.n)
        if all(k == res_k for k, _ in parts):
            component = enumerate_pair(res_k)
            key = (frozenset(x for _, x in parts), res_x)
            if key in component.coding:
                return AtomCode(kth_prime(res_k) ** (component.coding[key] + 1))
    return PairCode(args, res)


class UniversalCoding:
    """Coding handle over the big model's elements."""

    def atom(self, n: int) -> AtomCode:
        if not is_in_P(n):
            raise ValueError(f"{n} is not in the model carrier")
        return AtomCode(n)

    def code(self, args: frozenset, res: CodedElement) -> CodedElement:
        return universal_coding(args, res)

    def extends(self, a: PartialPair) -> bool:
        try:
            for (args, alpha), v in a.coding.items():
                image = self.code(frozenset(self.atom(x) for x in args), self.atom(alpha))
                if image != self.atom(v):
                    return False
        except ValueError:
            return False
        return True


def element_code(e: CodedElement) -> int:
    """Injective natural-number code: even codes are carrier atoms (tag bit
    0), odd codes pair a bitmask of member codes with the result code."""
    if isinstance(e, AtomCode):
        return 2 * e.n
    mask = 0
    for a in e.args:
        mask |= 1 << element_code(a)
    return 2 * _cantor_pair(mask, element_code(e.res)) + 1


def element_decode(code: int) -> CodedElement:
    """Inverse of element_code on its range."""
    if code < 0:
        raise ValueError("codes are naturals")
    if code % 2 == 0:
        n = code // 2
        if not is_in_P(n):
            raise ValueError(f"{code} does not code an element: {n} is outside the carrier")
        return AtomCode(n)
    mask, res_code = _cantor_unpair((code - 1) // 2)
    args = []
    bit = 0
    while mask:
        if mask & 1:
            args.append(element_decode(bit))
        mask >>= 1
        bit += 1
    return PairCode(frozenset(args), element_decode(res_code))


# ---------------------------------------------------------------------------
# Search and the componentwise restriction property


def search_counterexample(
    lhs: LambdaTerm,
    rhs: LambdaTerm,
    max_index: int,
    k_lhs: int = 2,
    k_rhs: int = 4,
    ceiling: int = DEFAULT_CEILING,
) -> Optional[tuple[int, Verdict]]:
    """Scan components 0..max_index for one whose completion separates the
    inequation lhs <= rhs; the least failing component wins.

    A failure in any completion of a finite pair shows up in some component,
    so this scan refutes everything the minimum order theory refutes, given
    enough index and rank budget.  Components whose check exceeds the element
    ceiling are skipped with a logged notice.
    """
    if not is_closed(lhs) or not is_closed(rhs):
        raise ValueError("counterexample search expects closed terms")
    for k in range(max_index + 1):
        component = enumerate_pair(k)
        try:
            verdict = check_inequation(lhs, rhs, component, k_lhs, k_rhs, ceiling)
        except CeilingExceeded as exc:
            logger.warning("component %d skipped: %s", k, exc)
            continue
        if verdict.failed:
            return (k, verdict)
    return None


def restriction_property_check(
    q: LambdaTerm,
    k: int,
    r: int,
    indices: Iterable[int] | None = None,
    ceiling: int = DEFAULT_CEILING,
) -> bool:
    """Bounded check that interpreting q over a finite union of components
    and keeping only the material of component k gives exactly component k's
    own interpretation, at every rank up to r.

    The two sides are enumerated outright when feasible; otherwise every
    component-material element up to rank r is compared by membership query.
    """
    if not is_closed(q):
        raise ValueError("the restriction property concerns closed terms")
    if indices is None:
        indices = range(0, max(k, 5) + 1)
    indices = sorted(set(indices) | {k})
    component = relocate(k)
    ambient = PartialPair(())
    for j in indices:
        ambient = union(ambient, relocate(j))
    try:
        own = approx_interpret(q, component, k=r, ceiling=ceiling)
        big = approx_interpret(q, ambient, k=r, ceiling=ceiling)
        material = frozenset(e for e in big if support_atoms(e) <= component.atoms)
        return own == material
    except CeilingExceeded:
        pass
    universe = elements_up_to(component, r, ceiling)
    ev_component = Evaluator(component, r, ceiling)
    ev_ambient = Evaluator(ambient, r, ceiling)
    return all(
        ev_component.contains(q, {}, e) == ev_ambient.contains(q, {}, e)
        for e in universe
    )
