"""
Edge guards.

A guard is a propositional formula over named symbols, represented as a BDD of
the process-wide manager below. Symbols are declared on first use, so plain
atomic propositions ("x") and zipped symbols ("x@t1") live side by side.

The manager is not thread-safe: parallel work must happen in separate
processes (see corpkit.benchmarks).
"""
import itertools
import logging

from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Sequence, Tuple

from dd import autoref

logger = logging.getLogger(__name__)

Guard = autoref.Function
Letter = FrozenSet[str]

BDD = autoref.BDD()

# Node ids are only stable while the node is referenced, so every cache entry keeps its guard alive.
# Long runs call clear_caches() between problems.
_support_cache: Dict[int, Tuple[Guard, FrozenSet[str]]] = dict()
_evaluation_cache: Dict[Tuple[int, Letter], Tuple[Guard, bool]] = dict()


def clear_caches() -> int:
    """Drop the support and evaluation caches with the guards they keep alive; returns the number of entries dropped."""
    dropped = len(_support_cache) + len(_evaluation_cache)
    _support_cache.clear()
    _evaluation_cache.clear()
    logger.debug('dropped %d cached guard entries', dropped)
    return dropped


def declare(symbols: Iterable[str]) -> None:
    missing = [symbol for symbol in symbols if symbol not in BDD.vars]
    if missing:
        BDD.declare(*missing)


def true() -> Guard:
    return BDD.true


def false() -> Guard:
    return BDD.false


def var(symbol: str) -> Guard:
    declare((symbol,))
    return BDD.var(symbol)


def key(guard: Guard) -> int:
    """Canonical integer of a guard: equal guards have equal keys."""
    return int(guard)


def is_true(guard: Guard) -> bool:
    return guard == BDD.true


def is_false(guard: Guard) -> bool:
    return guard == BDD.false


def cube(assignment: Mapping[str, bool]) -> Guard:
    result = BDD.true
    for symbol, value in assignment.items():
        literal = var(symbol)
        result &= literal if value else ~literal
    return result


def letter_cube(letter: Iterable[str], symbols: Sequence[str]) -> Guard:
    """The guard admitting exactly `letter` when restricted to `symbols`."""
    letter = frozenset(letter)
    return cube({symbol: symbol in letter for symbol in symbols})


def support(guard: Guard) -> FrozenSet[str]:
    cached = _support_cache.get(key(guard))
    if cached is None:
        cached = (guard, frozenset(BDD.support(guard)))
        _support_cache[key(guard)] = cached
    return cached[1]


def restrict(guard: Guard, assignment: Mapping[str, bool]) -> Guard:
    """Cofactor: fix the given symbols to constants."""
    relevant = {symbol: value for symbol, value in assignment.items() if symbol in support(guard)}
    if not relevant:
        return guard
    return BDD.let(relevant, guard)


def evaluate(guard: Guard, letter: Iterable[str]) -> bool:
    """Whether the letter (the set of symbols that hold) satisfies the guard."""
    relevant = support(guard) & frozenset(letter)
    cache_key = (key(guard), relevant)
    cached = _evaluation_cache.get(cache_key)
    if cached is None:
        value = is_true(restrict(guard, {symbol: symbol in relevant for symbol in support(guard)}))
        cached = (guard, value)
        _evaluation_cache[cache_key] = cached
    return cached[1]


def exist(symbols: Iterable[str], guard: Guard) -> Guard:
    quantified = set(symbols) & support(guard)
    if not quantified:
        return guard
    return BDD.exist(quantified, guard)


def rename(guard: Guard, mapping: Mapping[str, str]) -> Guard:
    """Simultaneous substitution of symbols by symbols."""
    relevant = {source: target for source, target in mapping.items() if source in support(guard) and source != target}
    if not relevant:
        return guard
    declare(relevant.values())
    return BDD.let({source: BDD.var(target) for source, target in relevant.items()}, guard)


def disjunction(guards: Iterable[Guard]) -> Guard:
    result = BDD.false
    for guard in guards:
        result |= guard
    return result


def pick_letter(guard: Guard) -> Letter:
    """A satisfying letter; symbols outside the support are left false."""
    assignment = BDD.pick(guard)
    if assignment is None:
        raise ValueError('cannot pick a letter from an unsatisfiable guard')
    return frozenset(symbol for symbol, value in assignment.items() if value)


def assignments(symbols: Sequence[str]) -> Iterator[Dict[str, bool]]:
    for values in itertools.product((False, True), repeat=len(symbols)):
        yield dict(zip(symbols, values))


def cover(guard: Guard, order: Sequence[str]) -> List[Dict[str, bool]]:
    """
    Split a guard into a disjunction of cubes, branching on symbols in `order`.
    The result is deterministic for a given guard and order.
    """
    if is_false(guard):
        return []
    if is_true(guard):
        return [dict()]

    rank = {symbol: index for index, symbol in enumerate(order)}
    pivot = min(support(guard), key=lambda symbol: (rank.get(symbol, len(rank)), symbol))
    high = restrict(guard, {pivot: True})
    low = restrict(guard, {pivot: False})
    if high == low:
        return cover(high, order)

    cubes = cover(high & low, order)
    cubes += [{**c, pivot: True} for c in cover(high & ~low, order)]
    cubes += [{**c, pivot: False} for c in cover(low & ~high, order)]
    return cubes


def to_text(guard: Guard,
            order: Sequence[str],
            name: Callable[[str], str] = str,
            true_text: str = 'true',
            false_text: str = 'false') -> str:
    """Render a guard as a disjunction of conjunctions of literals."""
    if is_false(guard):
        return false_text
    if is_true(guard):
        return true_text

    rank = {symbol: index for index, symbol in enumerate(order)}
    terms = []
    for c in cover(guard, order):
        literals = [('' if c[symbol] else '!') + name(symbol) for symbol in sorted(c, key=lambda s: (rank.get(s, len(rank)), s))]
        terms.append(' & '.join(literals))
    return ' | '.join(terms)
