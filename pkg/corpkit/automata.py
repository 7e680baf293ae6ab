"""
Nondeterministic Büchi automata with symbolic edge guards, lasso words, and
the Boolean and containment algebra over them.
"""
import logging

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx

from . import guards
from .errors import AlphabetMismatchError, NameCollisionError
from .guards import Guard, Letter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LassoWord:
    """
    The infinite word stem · loop^ω.
    Equality is syntactic; use normalized() to compare words.
    """
    stem: Tuple[Letter, ...]
    loop: Tuple[Letter, ...]

    def __post_init__(self):
        object.__setattr__(self, 'stem', tuple(frozenset(letter) for letter in self.stem))
        object.__setattr__(self, 'loop', tuple(frozenset(letter) for letter in self.loop))
        if not self.loop:
            raise ValueError('the loop of a lasso word must not be empty')

    def __len__(self) -> int:
        return len(self.stem) + len(self.loop)

    def __str__(self) -> str:
        def show(letter):
            return '{' + ','.join(sorted(letter)) + '}'

        prefix = ''.join(show(letter) + ';' for letter in self.stem)
        return prefix + '(' + ';'.join(show(letter) for letter in self.loop) + ')^w'

    @property
    def symbols(self) -> FrozenSet[str]:
        return frozenset().union(*self.stem, *self.loop)

    def letter(self, position: int) -> Letter:
        if position < len(self.stem):
            return self.stem[position]
        return self.loop[(position - len(self.stem)) % len(self.loop)]

    def successor(self, position: int) -> int:
        """Successor among the stored positions: the last one wraps to the loop start."""
        return position + 1 if position + 1 < len(self) else len(self.stem)

    def project(self, symbols: Iterable[str]) -> 'LassoWord':
        symbols = frozenset(symbols)
        return LassoWord(tuple(letter & symbols for letter in self.stem), tuple(letter & symbols for letter in self.loop))

    def unroll(self, stem_length: int, loop_length: int) -> 'LassoWord':
        """The same word stored with a longer stem and a loop that is a multiple of the current one."""
        if stem_length < len(self.stem) or loop_length % len(self.loop):
            raise ValueError(f'cannot unroll {self} to stem {stem_length} and loop {loop_length}')
        return LassoWord(tuple(self.letter(i) for i in range(stem_length)),
                         tuple(self.letter(stem_length + i) for i in range(loop_length)))

    def normalized(self) -> 'LassoWord':
        """Shortest stem, primitive loop."""
        loop = self.loop
        for period in range(1, len(loop) + 1):
            if len(loop) % period == 0 and loop == loop[:period] * (len(loop) // period):
                loop = loop[:period]
                break

        stem = self.stem
        while stem and stem[-1] == loop[-1]:
            loop = (stem[-1],) + loop[:-1]
            stem = stem[:-1]
        return LassoWord(stem, loop)


@dataclass(frozen=True, eq=False)
class Edge:
    source: int
    guard: Guard
    target: int


@dataclass(frozen=True, eq=False)
class Nba:
    alphabet: Tuple[str, ...]
    num_states: int
    initial: FrozenSet[int]
    accepting: FrozenSet[int]
    edges: Tuple[Edge, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'alphabet', tuple(self.alphabet))
        object.__setattr__(self, 'initial', frozenset(self.initial))
        object.__setattr__(self, 'accepting', frozenset(self.accepting))
        object.__setattr__(self, 'edges', tuple(self.edges))

        if len(set(self.alphabet)) != len(self.alphabet):
            raise NameCollisionError(f'duplicate symbols in alphabet {self.alphabet}')

        states = range(self.num_states)
        if any(q not in states for q in self.initial | self.accepting):
            raise ValueError('initial and accepting states must be state indices')

        symbols = frozenset(self.alphabet)
        for edge in self.edges:
            if edge.source not in states or edge.target not in states:
                raise ValueError(f'edge {edge.source} -> {edge.target} leaves the state space')
            if not guards.support(edge.guard) <= symbols:
                unknown = sorted(guards.support(edge.guard) - symbols)
                raise AlphabetMismatchError(f'guard mentions symbols outside the alphabet: {unknown}')

        guards.declare(self.alphabet)

    def __repr__(self):
        return f'Nba(states={self.num_states}, initial={sorted(self.initial)}, accepting={sorted(self.accepting)}, ' \
               f'edges={len(self.edges)}, alphabet={self.alphabet})'

    @property
    def size(self) -> int:
        return self.num_states

    @cached_property
    def outgoing(self) -> Tuple[Tuple[Edge, ...], ...]:
        rows = [[] for _ in range(self.num_states)]
        for edge in self.edges:
            rows[edge.source].append(edge)
        return tuple(tuple(row) for row in rows)

    @cached_property
    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.num_states))
        graph.add_edges_from((edge.source, edge.target) for edge in self.edges if not guards.is_false(edge.guard))
        return graph


class Emptiness(NamedTuple):
    empty: bool
    witness: Optional[LassoWord]


class Remap(Enum):
    DROP = 'drop'
    FREE = 'free'


def universal(alphabet: Sequence[str]) -> Nba:
    return Nba(alphabet, 1, {0}, {0}, (Edge(0, guards.true(), 0),))


def empty_automaton(alphabet: Sequence[str]) -> Nba:
    return Nba(alphabet, 0, (), ())


def singleton(word: LassoWord, alphabet: Sequence[str]) -> Nba:
    """The automaton whose language is exactly {word}."""
    alphabet = tuple(alphabet)
    _check_letters(word, alphabet)
    edges = [Edge(i, guards.letter_cube(word.letter(i), alphabet), word.successor(i)) for i in range(len(word))]
    return Nba(alphabet, len(word), {0}, range(len(word)), edges)


def build_nba(alphabet: Sequence[str],
              initial: Iterable[Hashable],
              successors: Callable[[Hashable], Iterable[Tuple[Guard, Hashable]]],
              is_accepting: Callable[[Hashable], bool]) -> Nba:
    """
    Explore a state space given by keys, breadth first and in a deterministic order,
    and number the reachable keys densely. Parallel edges are merged.
    """
    index: Dict[Hashable, int] = dict()
    queue = deque()

    def visit(state):
        if state not in index:
            index[state] = len(index)
            queue.append(state)
        return index[state]

    initial_indices = [visit(state) for state in initial]
    rows: Dict[int, Dict[int, Guard]] = dict()
    accepting = []

    while queue:
        state = queue.popleft()
        source = index[state]
        if is_accepting(state):
            accepting.append(source)
        row = rows.setdefault(source, dict())
        for guard, successor in successors(state):
            if guards.is_false(guard):
                continue
            target = visit(successor)
            row[target] = row[target] | guard if target in row else guard

    edges = [Edge(source, guard, target) for source in sorted(rows) for target, guard in rows[source].items()]
    return Nba(alphabet, len(index), initial_indices, accepting, edges)


def _nontrivial(graph: nx.DiGraph, component: Iterable[int]) -> bool:
    component = list(component)
    return len(component) > 1 or graph.has_edge(component[0], component[0])


def _reachable(automaton: Nba) -> FrozenSet[int]:
    reachable = set(automaton.initial)
    for q in automaton.initial:
        reachable |= nx.descendants(automaton.graph, q)
    return frozenset(reachable)


def _check_letters(word: LassoWord, alphabet: Iterable[str]):
    unknown = word.symbols - frozenset(alphabet)
    if unknown:
        raise AlphabetMismatchError(f'lasso word uses symbols outside the alphabet: {sorted(unknown)}')


def check_same_alphabet(first: Nba, second: Nba):
    if set(first.alphabet) != set(second.alphabet):
        raise AlphabetMismatchError(f'alphabets differ: {first.alphabet} and {second.alphabet}')


def trim(automaton: Nba) -> Nba:
    """Restrict to reachable states that can still reach an accepting cycle, merging parallel edges."""
    graph = automaton.graph.subgraph(_reachable(automaton))

    productive = set()
    for component in nx.strongly_connected_components(graph):
        if component & automaton.accepting and _nontrivial(graph, component):
            productive |= component

    stack = list(productive)
    while stack:
        for predecessor in graph.predecessors(stack.pop()):
            if predecessor not in productive:
                productive.add(predecessor)
                stack.append(predecessor)

    keep = sorted(productive)
    renumber = {q: i for i, q in enumerate(keep)}
    rows: Dict[Tuple[int, int], Guard] = dict()
    for edge in automaton.edges:
        if edge.source in renumber and edge.target in renumber and not guards.is_false(edge.guard):
            pair = (renumber[edge.source], renumber[edge.target])
            rows[pair] = rows[pair] | edge.guard if pair in rows else edge.guard

    return Nba(automaton.alphabet,
               len(keep),
               (renumber[q] for q in automaton.initial if q in renumber),
               (renumber[q] for q in automaton.accepting if q in renumber),
               [Edge(source, guard, target) for (source, target), guard in sorted(rows.items(), key=lambda item: item[0])])


def merge_equivalent_states(automaton: Nba) -> Nba:
    """
    Quotient by the coarsest partition that respects acceptance and in which the states of a
    block have the same guarded successors, block by block.
    """
    block = [int(q in automaton.accepting) for q in range(automaton.num_states)]
    while True:
        signatures: Dict[Hashable, int] = dict()
        refined = []
        for q in range(automaton.num_states):
            row: Dict[int, Guard] = dict()
            for edge in automaton.outgoing[q]:
                target = block[edge.target]
                row[target] = row[target] | edge.guard if target in row else edge.guard
            signature = (block[q], frozenset((target, guards.key(guard)) for target, guard in row.items()))
            refined.append(signatures.setdefault(signature, len(signatures)))

        if len(signatures) == len(set(block)):
            break
        block = refined

    dense = {b: i for i, b in enumerate(dict.fromkeys(block))}
    block = [dense[b] for b in block]
    if len(set(block)) == automaton.num_states:
        return automaton

    representative: Dict[int, int] = dict()
    for q in range(automaton.num_states):
        representative.setdefault(block[q], q)

    rows: Dict[Tuple[int, int], Guard] = dict()
    for b, q in representative.items():
        for edge in automaton.outgoing[q]:
            pair = (b, block[edge.target])
            rows[pair] = rows[pair] | edge.guard if pair in rows else edge.guard

    return Nba(automaton.alphabet,
               len(representative),
               {block[q] for q in automaton.initial},
               {block[q] for q in automaton.accepting},
               [Edge(source, guard, target) for (source, target), guard in sorted(rows.items(), key=lambda item: item[0])])


def intersect(first: Nba, second: Nba) -> Nba:
    """Product automaton; a phase bit alternates between waiting for each operand's accepting states."""
    check_same_alphabet(first, second)

    if len(second.accepting) == second.num_states or len(first.accepting) == first.num_states:
        def successors(state):
            p, q = state
            for e in first.outgoing[p]:
                for f in second.outgoing[q]:
                    yield e.guard & f.guard, (e.target, f.target)

        result = build_nba(first.alphabet,
                           [(p, q) for p in sorted(first.initial) for q in sorted(second.initial)],
                           successors,
                           lambda state: state[0] in first.accepting and state[1] in second.accepting)
    else:
        def successors(state):
            p, q, phase = state
            if phase == 0 and p in first.accepting:
                phase = 1
            elif phase == 1 and q in second.accepting:
                phase = 0
            for e in first.outgoing[p]:
                for f in second.outgoing[q]:
                    yield e.guard & f.guard, (e.target, f.target, phase)

        result = build_nba(first.alphabet,
                           [(p, q, 0) for p in sorted(first.initial) for q in sorted(second.initial)],
                           successors,
                           lambda state: state[2] == 0 and state[0] in first.accepting)

    logger.debug('intersection of %d and %d states has %d states', first.num_states, second.num_states, result.num_states)
    return result


def _path_letters(automaton: Nba, path: Sequence[int]) -> Tuple[Letter, ...]:
    letters = []
    for source, target in zip(path, path[1:]):
        guard = guards.disjunction(edge.guard for edge in automaton.outgoing[source] if edge.target == target)
        letters.append(guards.pick_letter(guard))
    return tuple(letters)


def is_empty(automaton: Nba) -> Emptiness:
    """
    Decide emptiness by looking for an accepting state in a reachable nontrivial SCC.
    A nonempty verdict comes with a witness lasso: a shortest path to such a state and a cycle back to it.
    """
    reachable = _reachable(automaton)
    graph = automaton.graph.subgraph(reachable)

    good = []
    for component in nx.strongly_connected_components(graph):
        if _nontrivial(graph, component):
            good += [(q, component) for q in component if q in automaton.accepting]
    if not good:
        return Emptiness(True, None)

    source = -1
    search = nx.DiGraph(graph)
    search.add_edges_from((source, q) for q in automaton.initial)
    paths = nx.single_source_shortest_path(search, source)
    state, component = min(good, key=lambda item: (len(paths[item[0]]), item[0]))

    stem_path = paths[state][1:]
    if graph.has_edge(state, state):
        cycle = [state, state]
    else:
        inside = graph.subgraph(component)
        step = min(inside.successors(state))
        cycle = [state] + nx.shortest_path(inside, step, state)

    word = LassoWord(_path_letters(automaton, stem_path), _path_letters(automaton, cycle))
    return Emptiness(False, word)


def accepts_lasso(automaton: Nba, word: LassoWord) -> bool:
    """Membership of stem · loop^ω, decided on the product of the automaton with the lasso positions."""
    _check_letters(word, automaton.alphabet)

    product = nx.DiGraph()
    start = [(q, 0) for q in automaton.initial]
    product.add_nodes_from(start)
    stack = list(start)
    while stack:
        q, position = stack.pop()
        letter = word.letter(position)
        following = word.successor(position)
        for edge in automaton.outgoing[q]:
            if guards.evaluate(edge.guard, letter):
                node = (edge.target, following)
                if node not in product:
                    product.add_node(node)
                    stack.append(node)
                product.add_edge((q, position), node)

    for component in nx.strongly_connected_components(product):
        if _nontrivial(product, component) and any(q in automaton.accepting for q, _ in component):
            return True
    return False


def find_difference(first: Nba, second: Nba) -> Optional[LassoWord]:
    """A lasso in L(first) \\ L(second), or None when L(first) ⊆ L(second)."""
    from .complementation import complement

    check_same_alphabet(first, second)
    return is_empty(intersect(first, complement(second))).witness


def is_subset(first: Nba, second: Nba) -> bool:
    return find_difference(first, second) is None


def is_equivalent(first: Nba, second: Nba) -> bool:
    return is_subset(first, second) and is_subset(second, first)


def remap_alphabet(automaton: Nba, mapping: Mapping[str, Union[str, Remap]]) -> Nba:
    """
    Rename symbols (str targets), project them away (Remap.DROP) or keep them in the
    alphabet without constraining them (Remap.FREE).
    """
    missing = set(automaton.alphabet) - set(mapping)
    if missing:
        raise AlphabetMismatchError(f'mapping is not total, missing {sorted(missing)}')

    alphabet = []
    renaming = dict()
    quantified = []
    for symbol in automaton.alphabet:
        target = mapping[symbol]
        if target is Remap.DROP:
            quantified.append(symbol)
        elif target is Remap.FREE:
            quantified.append(symbol)
            alphabet.append(symbol)
        else:
            renaming[symbol] = target
            alphabet.append(target)

    if len(set(alphabet)) != len(alphabet):
        raise NameCollisionError(f'remapping produces duplicate symbols: {alphabet}')

    edges = []
    for edge in automaton.edges:
        guard = guards.rename(guards.exist(quantified, edge.guard), renaming)
        edges.append(Edge(edge.source, guard, edge.target))

    return Nba(alphabet, automaton.num_states, automaton.initial, automaton.accepting, edges)


def extend_alphabet(automaton: Nba, alphabet: Sequence[str]) -> Nba:
    """Same automaton over a larger (or reordered) alphabet; the new symbols stay unconstrained."""
    if not set(automaton.alphabet) <= set(alphabet):
        raise AlphabetMismatchError(f'{alphabet} does not contain {automaton.alphabet}')
    return Nba(alphabet, automaton.num_states, automaton.initial, automaton.accepting, automaton.edges)
