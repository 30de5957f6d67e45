"""Free completion of a partial pair.

On top of a partial pair A, the completion adjoins every uncoded
(finite set, element) pair as a fresh element, level by level:

    E_0 = A,   E_{n+1} = E_n  union  ((E_n* x E_n) - coded keys of A)

and extends the coding totally: a key evaluates to its coded atom when A
codes it, and to itself (as a pair element) otherwise.  Atoms have rank 0; a
pair element has rank one more than the largest rank among its parts.

Elements are interned through structural hashing, so equality is identity
and sets of elements behave canonically.  The interning table is a simple
content-addressed dict and is safe under CPython's atomic dict operations.
Level sizes grow doubly exponentially; enumeration past a configurable
element ceiling raises CeilingExceeded.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterable

from .pairs import Morphism, PartialPair

logger = logging.getLogger(__name__)

DEFAULT_CEILING = 10**6


class CeilingExceeded(RuntimeError):
    """A rank-bounded enumeration would exceed the configured element ceiling."""


class CompletionElement:
    """Either a carrier atom or a nested (args, res) pair.  Use base()/pair_of()."""

    __slots__ = ("rank", "_key")

    def sort_key(self) -> tuple:
        raise NotImplementedError


class BaseElement(CompletionElement):
    __slots__ = ("atom",)

    def __init__(self, atom: int):
        object.__setattr__(self, "atom", atom)
        object.__setattr__(self, "rank", 0)
        object.__setattr__(self, "_key", (0, atom))

    def __setattr__(self, name, value):
        raise AttributeError("elements are immutable")

    def sort_key(self) -> tuple:
        return self._key

    def __repr__(self) -> str:
        return f"base({self.atom})"

    def __str__(self) -> str:
        return element_str(self)

    def __lt__(self, other: "CompletionElement") -> bool:
        return self._key < other._key


class PairElement(CompletionElement):
    __slots__ = ("args", "res", "args_sorted")

    def __init__(self, args_sorted: tuple[CompletionElement, ...], res: CompletionElement):
        object.__setattr__(self, "args_sorted", args_sorted)
        object.__setattr__(self, "args", frozenset(args_sorted))
        object.__setattr__(self, "res", res)
        ranks = [e.rank for e in args_sorted]
        ranks.append(res.rank)
        object.__setattr__(self, "rank", 1 + max(ranks))
        object.__setattr__(
            self, "_key", (1, tuple(e._key for e in args_sorted), res._key)
        )

    def __setattr__(self, name, value):
        raise AttributeError("elements are immutable")

    def sort_key(self) -> tuple:
        return self._key

    def __repr__(self) -> str:
        return f"pair_of([{', '.join(map(repr, self.args_sorted))}], {self.res!r})"

    def __str__(self) -> str:
        return element_str(self)

    def __lt__(self, other: "CompletionElement") -> bool:
        return self._key < other._key


_BASE_INTERN: dict[int, BaseElement] = {}
_PAIR_INTERN: dict[tuple, PairElement] = {}


def base(atom: int) -> BaseElement:
    got = _BASE_INTERN.get(atom)
    if got is None:
        got = _BASE_INTERN.setdefault(atom, BaseElement(atom))
    return got


def pair_of(args: Iterable[CompletionElement], res: CompletionElement) -> PairElement:
    args_sorted = tuple(sorted(set(args), key=lambda e: e.sort_key()))
    key = (tuple(id(e) for e in args_sorted), id(res))
    got = _PAIR_INTERN.get(key)
    if got is None:
        got = _PAIR_INTERN.setdefault(key, PairElement(args_sorted, res))
    return got


def rank(e: CompletionElement) -> int:
    """Least level of the completion hierarchy containing e."""
    return e.rank


def support_atoms(e: CompletionElement) -> frozenset[int]:
    """All carrier atoms an element is built from."""
    if isinstance(e, BaseElement):
        return frozenset((e.atom,))
    out = support_atoms(e.res)
    for a in e.args_sorted:
        out |= support_atoms(a)
    return out


def element_valid(p: PartialPair, e: CompletionElement) -> bool:
    """e is a genuine element of the completion of p: base atoms lie in the
    carrier and no sub-pair duplicates a coded key (those collapse)."""
    if isinstance(e, BaseElement):
        return e.atom in p.atoms
    if not all(element_valid(p, a) for a in e.args_sorted) or not element_valid(p, e.res):
        return False
    key = _atom_key(e.args, e.res)
    return key is None or key not in p.coding


def _atom_key(args: frozenset, res: CompletionElement) -> tuple[frozenset[int], int] | None:
    """The (atom set, atom) view of a key when every part is a base element."""
    if isinstance(res, BaseElement) and all(isinstance(a, BaseElement) for a in args):
        return (frozenset(a.atom for a in args), res.atom)
    return None


def apply_coding(
    p: PartialPair, args: Iterable[CompletionElement], res: CompletionElement
) -> CompletionElement:
    """The completion's total injective coding: coded keys collapse to their
    atom, everything else codes as itself."""
    args = frozenset(args)
    key = _atom_key(args, res)
    if key is not None and key in p.coding:
        return base(p.coding[key])
    return pair_of(args, res)


def coding_preimage(p: PartialPair, e: CompletionElement):
    """Inverse of apply_coding on its range: the unique (args, res) key with
    value e, or None when e is an atom outside the coded range."""
    if isinstance(e, PairElement):
        return (e.args, e.res)
    for (a, alpha), v in p.coding.items():
        if v == e.atom:
            return (frozenset(map(base, a)), base(alpha))
    return None


# ---------------------------------------------------------------------------
# Rank-bounded enumeration


_LEVELS_CACHE: dict[tuple[PartialPair, int], tuple[CompletionElement, ...]] = {}


def predicted_level_size(p: PartialPair, current_size: int) -> int:
    """Size of the next level given the current one: every (subset, element)
    key either collapses to a coded atom or is a pair element, and the carrier
    atoms come along unchanged."""
    return len(p.atoms) + (2**current_size) * current_size - len(p.coding)


def elements_up_to(p: PartialPair, k: int, ceiling: int = DEFAULT_CEILING) -> tuple[CompletionElement, ...]:
    """Exactly the elements of rank at most k, in (rank, structural) order."""
    if k < 0:
        raise ValueError("rank bound must be non-negative")
    cached = _LEVELS_CACHE.get((p, k))
    if cached is not None:
        return cached
    if k == 0:
        out = tuple(sorted(map(base, p.atoms), key=lambda e: e.sort_key()))
        _LEVELS_CACHE[(p, 0)] = out
        return out
    prev = elements_up_to(p, k - 1, ceiling)
    predicted = predicted_level_size(p, len(prev))
    if predicted > ceiling:
        logger.warning("completion level %d would hold %d elements (ceiling %d)", k, predicted, ceiling)
        raise CeilingExceeded(f"level {k} would hold {predicted} elements, ceiling is {ceiling}")
    current = set(prev)
    fresh = []
    for m in range(len(prev) + 1):
        for args in itertools.combinations(prev, m):
            for res in prev:
                e = apply_coding(p, frozenset(args), res)
                if e not in current and isinstance(e, PairElement):
                    fresh.append(e)
                    current.add(e)
    fresh.sort(key=lambda e: e.sort_key())
    out = prev + tuple(fresh)
    _LEVELS_CACHE[(p, k)] = out
    return out


# ---------------------------------------------------------------------------
# Finite restrictions
#
# The rank-k restriction is the finite partial pair whose carrier is E_k and
# whose coding keeps exactly the keys over E_k whose value stays inside E_k.
# Rank-0 elements keep their original atom number; higher elements receive
# stable fresh numbers (by rank, then structural order), so restrictions form
# an increasing subpair chain as k grows.


@dataclass(frozen=True)
class Restriction:
    pair: PartialPair
    elements: tuple[CompletionElement, ...]
    atom_of: dict
    of_atom: dict
    rank_bound: int

    def to_atoms(self, elems: Iterable[CompletionElement]) -> frozenset[int]:
        return frozenset(self.atom_of[e] for e in elems)

    def to_elements(self, atoms: Iterable[int]) -> frozenset[CompletionElement]:
        return frozenset(self.of_atom[a] for a in atoms)


def restrict(p: PartialPair, k: int, ceiling: int = DEFAULT_CEILING) -> Restriction:
    elements = elements_up_to(p, k, ceiling)
    next_id = max(p.atoms, default=-1) + 1
    atom_of: dict[CompletionElement, int] = {}
    for e in elements:
        if isinstance(e, BaseElement):
            atom_of[e] = e.atom
        else:
            atom_of[e] = next_id
            next_id += 1
    coding: dict[tuple[frozenset[int], int], int] = {}
    for (a, alpha), v in p.coding.items():
        coding[(frozenset(a), alpha)] = v
    for e in elements:
        if isinstance(e, PairElement):
            coding[(frozenset(atom_of[x] for x in e.args), atom_of[e.res])] = atom_of[e]
    labels = {atom_of[e]: element_str(e, p) for e in elements}
    pair = PartialPair(atom_of.values(), coding, labels=labels)
    return Restriction(pair, elements, atom_of, {v: e for e, v in atom_of.items()}, k)


# ---------------------------------------------------------------------------
# Coding handles and the canonical morphism


class CompletionCoding:
    """Total coding handle of the completion of a pair (elements universe)."""

    def __init__(self, pair: PartialPair):
        self.pair = pair

    def atom(self, x: int) -> CompletionElement:
        if x not in self.pair.atoms:
            raise ValueError(f"atom {x} outside carrier")
        return base(x)

    def code(self, args: frozenset, res: CompletionElement) -> CompletionElement:
        return apply_coding(self.pair, args, res)

    def extends(self, a: PartialPair) -> bool:
        try:
            for (args, alpha), v in a.coding.items():
                image = self.code(frozenset(self.atom(x) for x in args), self.atom(alpha))
                if image != self.atom(v):
                    return False
        except ValueError:
            return False
        return True

    def preimage(self, value: CompletionElement):
        return coding_preimage(self.pair, value)


def canonical_morphism(a: PartialPair, target, e: CompletionElement):
    """Image of e under the rank-recursive morphism out of the completion of a.

    `target` is a total coding handle whose coding extends a's; atoms map to
    themselves and a pair element maps to the coded image of its parts.
    """
    if not target.extends(a):
        raise ValueError("target coding does not extend the source pair")

    memo: dict[int, object] = {}

    def go(e: CompletionElement):
        got = memo.get(id(e))
        if got is not None:
            return got
        if isinstance(e, BaseElement):
            out = target.atom(e.atom)
        else:
            out = target.code(frozenset(go(x) for x in e.args_sorted), go(e.res))
        memo[id(e)] = out
        return out

    return go(e)


def lift_automorphism(p: PartialPair, theta: Morphism) -> Callable[[CompletionElement], CompletionElement]:
    """Rank-preserving extension of a pair automorphism to completion elements."""

    def go(e: CompletionElement) -> CompletionElement:
        if isinstance(e, BaseElement):
            return base(theta.mapping[e.atom])
        return apply_coding(p, frozenset(go(x) for x in e.args_sorted), go(e.res))

    return go


# ---------------------------------------------------------------------------
# Textual element syntax:  atoms print as their labels, pairs as
# ({e1,e2,...},e) with arguments in structural order.


def element_str(e: CompletionElement, pair: PartialPair | None = None) -> str:
    if isinstance(e, BaseElement):
        return pair.label(e.atom) if pair is not None else str(e.atom)
    inner = ",".join(element_str(a, pair) for a in e.args_sorted)
    return f"({{{inner}}},{element_str(e.res, pair)})"


def parse_element(text: str, pair: PartialPair | None = None) -> CompletionElement:
    """Parse the textual element syntax back; labels resolve via `pair`."""
    label_map: dict[str, int] = {}
    if pair is not None:
        label_map = {pair.label(a): a for a in pair.atoms}

    s = text.replace(" ", "")
    pos = 0

    def fail(msg: str):
        raise ValueError(f"{msg} in element {text!r} (offset {pos})")

    def at(expected: str) -> bool:
        return pos < len(s) and s[pos] == expected

    def eat(expected: str) -> None:
        nonlocal pos
        if not at(expected):
            fail(f"expected {expected!r}")
        pos += 1

    def parse_one() -> CompletionElement:
        nonlocal pos
        if at("("):
            eat("(")
            eat("{")
            args = []
            if not at("}"):
                while True:
                    args.append(parse_one())
                    if at(","):
                        eat(",")
                        continue
                    break
            eat("}")
            eat(",")
            res = parse_one()
            eat(")")
            if pair is not None:
                return apply_coding(pair, frozenset(args), res)
            return pair_of(args, res)
        start = pos
        while pos < len(s) and s[pos] not in "(){},":
            pos += 1
        name = s[start:pos]
        if not name:
            fail("expected an atom label")
        if name in label_map:
            return base(label_map[name])
        try:
            return base(int(name))
        except ValueError:
            fail(f"unknown atom label {name!r}")

    e = parse_one()
    if pos != len(s):
        fail("trailing input")
    return e
