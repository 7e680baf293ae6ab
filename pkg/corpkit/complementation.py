"""
Büchi complementation.

complement() prunes its input and then picks the cheapest construction that
applies:

- empty language: the universal automaton;
- weak automata (every cycle of an SCC is accepting or none is, once acceptance
  is normalized per SCC): the breakpoint construction;
- deterministic automata: a co-Büchi guess of the point after which the unique
  run avoids accepting states;
- otherwise: rank-based complementation restricted to tight level rankings.

Letters are never enumerated over the whole alphabet: only the symbols that
some guard mentions are expanded, and letters with the same successor
behaviour are grouped into one symbolic class.
"""
import itertools
import logging
import math

from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import networkx as nx

from . import guards
from .automata import Nba, build_nba, merge_equivalent_states, trim, universal
from .guards import Guard

logger = logging.getLogger(__name__)

# A class of letters: the guard covering them and, per state, the bitmask of successors.
LetterClass = Tuple[Guard, Tuple[int, ...]]


def size_bound(states: int) -> int:
    """Upper bound on the number of states any construction below can produce."""
    return 2 ** (states * (3 + math.ceil(math.log2(states + 1))))


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mask(states) -> int:
    result = 0
    for q in states:
        result |= 1 << q
    return result


def _image(mask: int, row: Tuple[int, ...]) -> int:
    result = 0
    for q in _bits(mask):
        result |= row[q]
    return result


def letter_classes(automaton: Nba) -> List[LetterClass]:
    order = {symbol: index for index, symbol in enumerate(automaton.alphabet)}
    symbols = sorted(set().union(*(guards.support(edge.guard) for edge in automaton.edges)), key=order.get)
    if len(symbols) > 16:
        logger.warning('expanding %d symbols into letters, this may take a while', len(symbols))

    classes: Dict[Tuple[int, ...], Guard] = dict()
    for assignment in guards.assignments(symbols):
        letter = frozenset(symbol for symbol, value in assignment.items() if value)
        row = [0] * automaton.num_states
        for edge in automaton.edges:
            if guards.evaluate(edge.guard, letter):
                row[edge.source] |= 1 << edge.target
        row = tuple(row)
        cube = guards.cube(assignment)
        classes[row] = classes[row] | cube if row in classes else cube

    logger.debug('%d symbols, %d letter classes', len(symbols), len(classes))
    return [(guard, row) for row, guard in classes.items()]


def weak_acceptance(automaton: Nba) -> Optional[FrozenSet[int]]:
    """
    Accepting set of an equivalent weak acceptance condition, or None when the
    automaton is not weak. An SCC becomes accepting when every cycle in it
    visits an accepting state.
    """
    graph = automaton.graph
    accepting = set()
    for component in nx.strongly_connected_components(graph):
        inside = component & automaton.accepting
        if not inside:
            continue
        if nx.is_directed_acyclic_graph(graph.subgraph(component - inside)):
            accepting |= component
        else:
            return None
    return frozenset(accepting)


def is_deterministic(automaton: Nba) -> bool:
    if len(automaton.initial) > 1:
        return False
    for row in automaton.outgoing:
        for first, second in itertools.combinations(row, 2):
            if first.target != second.target and not guards.is_false(first.guard & second.guard):
                return False
    return True


def complement_weak(automaton: Nba, accepting: FrozenSet[int]) -> Nba:
    """
    Breakpoint construction: a word is rejected by a weak automaton iff every run
    keeps visiting rejecting states. The second component holds the states
    that have not visited a rejecting state since the last breakpoint.
    """
    classes = letter_classes(automaton)
    rejecting = _mask(set(range(automaton.num_states)) - accepting)

    def successors(state):
        current, owing = state
        for guard, row in classes:
            following = _image(current, row)
            if owing:
                yield guard, (following, _image(owing, row) & ~rejecting)
            else:
                yield guard, (following, following & ~rejecting)

    return build_nba(automaton.alphabet, [(_mask(automaton.initial), 0)], successors, lambda state: state[1] == 0)


def complement_deterministic(automaton: Nba) -> Nba:
    """
    The unique run is rejecting iff it gets stuck or eventually avoids accepting
    states. 'main' copies the automaton, 'safe' copies its rejecting part with all
    states accepting, and 'sink' collects the letters without a successor.
    """
    missing = [~guards.disjunction(edge.guard for edge in row) for row in automaton.outgoing]

    def successors(state):
        if state[0] == 'sink':
            yield guards.true(), state
            return
        copy, q = state
        yield missing[q], ('sink',)
        for edge in automaton.outgoing[q]:
            if copy == 'main':
                yield edge.guard, ('main', edge.target)
            if edge.target not in automaton.accepting:
                yield edge.guard, ('safe', edge.target)

    initial = [('main', q) for q in sorted(automaton.initial)]
    initial += [('safe', q) for q in sorted(automaton.initial) if q not in automaton.accepting]
    return build_nba(automaton.alphabet, initial, successors, lambda state: state[0] != 'main')


def _tight_rankings(mask: int, bounds: Dict[int, int], final: int) -> Iterator[Tuple[Tuple[int, int], ...]]:
    """Level rankings on `mask` below `bounds` that are even on final states and tight."""
    states = list(_bits(mask))
    if not states:
        yield ()
        return

    limit = 2 * sum(1 for q in states if not final >> q & 1) - 1
    if limit < 1:
        return

    choices = []
    for q in states:
        top = min(bounds[q], limit)
        ranks = [r for r in range(top + 1) if not (final >> q & 1 and r % 2)]
        if not ranks:
            return
        choices.append(ranks)

    for ranks in itertools.product(*choices):
        highest = max(ranks)
        if highest % 2 and set(range(1, highest, 2)) <= set(ranks):
            yield tuple(zip(states, ranks))


def complement_rank_based(automaton: Nba) -> Nba:
    """
    Rank-based complementation. Runs guess a point to move from the subset
    phase ('S', states) into the ranking phase ('R', states, owing, ranking);
    ranks never increase along edges and the owing set of even-ranked states
    must empty infinitely often.
    """
    classes = letter_classes(automaton)
    final = _mask(automaton.accepting)
    unbounded = 2 * automaton.num_states

    def successors(state):
        if state[0] == 'S':
            for guard, row in classes:
                following = _image(state[1], row)
                yield guard, ('S', following)
                for ranking in _tight_rankings(following, dict.fromkeys(_bits(following), unbounded), final):
                    even = _mask(q for q, rank in ranking if rank % 2 == 0)
                    yield guard, ('R', following, even, ranking)
            return

        _, current, owing, ranking = state
        rank_of = dict(ranking)
        for guard, row in classes:
            following = _image(current, row)
            bounds: Dict[int, int] = dict()
            for q in _bits(current):
                for target in _bits(row[q]):
                    bounds[target] = min(bounds.get(target, unbounded), rank_of[q])
            for successor in _tight_rankings(following, bounds, final):
                even = _mask(q for q, rank in successor if rank % 2 == 0)
                owes = _image(owing, row) & even if owing else even
                yield guard, ('R', following, owes, successor)

    return build_nba(automaton.alphabet,
                     [('S', _mask(automaton.initial))],
                     successors,
                     lambda state: state[0] == 'R' and state[2] == 0)


def complement(automaton: Nba) -> Nba:
    """An automaton over the same alphabet accepting exactly the words the input rejects."""
    pruned = trim(automaton)
    if pruned.num_states == 0:
        logger.info('complement of an empty language is universal')
        return universal(automaton.alphabet)

    accepting = weak_acceptance(pruned)
    if accepting is not None:
        construction = 'breakpoint'
        result = complement_weak(pruned, accepting)
    elif is_deterministic(pruned):
        construction = 'deterministic'
        result = complement_deterministic(pruned)
    else:
        construction = 'rank-based'
        result = complement_rank_based(pruned)

    assert result.num_states <= size_bound(pruned.num_states)
    explored = result.num_states
    result = merge_equivalent_states(trim(result))
    logger.info('complemented %d states with the %s construction: %d explored, %d kept',
                pruned.num_states, construction, explored, result.num_states)
    return result
