"""
Reactive systems: finite state machines whose transitions are driven by
input letters and whose states are labelled with outputs.

Trace convention: position i of a trace pairs the input consumed at step i
with the label of the state reached by that step, l(s_{i+1}). The label of the
initial state never appears on a trace.
"""
import itertools
import json
import logging

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, Mapping, NamedTuple, Tuple

import networkx as nx
import pyparsing as pp

from . import guards
from .automata import Edge, LassoWord, Nba, accepts_lasso, intersect, is_subset, singleton
from .errors import AlphabetMismatchError, InputEnabledError, InvalidTraceError, NameCollisionError, SystemFormatError
from .guards import Guard
from .ltl import formula_to_guard, is_propositional, parse_ltl

logger = logging.getLogger(__name__)

CONTINGENCY_SUFFIX = '_C'


@dataclass(frozen=True, eq=False)
class Transition:
    source: str
    guard: Guard
    target: str


@dataclass(frozen=True, eq=False)
class System:
    states: Tuple[str, ...]
    initial: str
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    labels: Mapping[str, FrozenSet[str]]
    transitions: Tuple[Transition, ...]
    contingency_inputs: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'states', tuple(self.states))
        object.__setattr__(self, 'inputs', tuple(self.inputs))
        object.__setattr__(self, 'outputs', tuple(self.outputs))
        object.__setattr__(self, 'labels', {s: frozenset(self.labels.get(s, ())) for s in self.states})
        object.__setattr__(self, 'transitions', tuple(self.transitions))
        object.__setattr__(self, 'contingency_inputs', tuple(self.contingency_inputs))

        if len(set(self.states)) != len(self.states):
            raise SystemFormatError('duplicate state ids')
        if len(set(self.aps)) != len(self.aps):
            raise SystemFormatError(f'inputs and outputs must be distinct names: {self.inputs} / {self.outputs}')
        if self.initial not in self.states:
            raise SystemFormatError(f'initial state "{self.initial}" is not a state')
        if not set(self.contingency_inputs) <= set(self.inputs):
            raise SystemFormatError('contingency inputs must be inputs')
        for state, label in self.labels.items():
            if not label <= set(self.outputs):
                raise SystemFormatError(f'label of "{state}" mentions non-outputs: {sorted(label - set(self.outputs))}')

        names = set(self.states)
        for t in self.transitions:
            if t.source not in names or t.target not in names:
                raise SystemFormatError(f'edge {t.source} -> {t.target} refers to an unknown state')
            if not guards.support(t.guard) <= set(self.inputs):
                raise SystemFormatError(f'guard of edge {t.source} -> {t.target} mentions non-inputs')

        guards.declare(self.aps)

    @property
    def aps(self) -> Tuple[str, ...]:
        return self.inputs + self.outputs

    @property
    def base_inputs(self) -> Tuple[str, ...]:
        """Inputs that are not contingency inputs."""
        return tuple(i for i in self.inputs if i not in self.contingency_inputs)

    @cached_property
    def outgoing(self) -> Dict[str, Tuple[Transition, ...]]:
        rows = {s: [] for s in self.states}
        for t in self.transitions:
            rows[t.source].append(t)
        return {s: tuple(row) for s, row in rows.items()}

    def successors(self, state: str, letter: Iterable[str]) -> FrozenSet[str]:
        letter = frozenset(letter) & frozenset(self.inputs)
        return frozenset(t.target for t in self.outgoing[state] if guards.evaluate(t.guard, letter))

    def reachable(self) -> FrozenSet[str]:
        graph = nx.DiGraph()
        graph.add_node(self.initial)
        graph.add_edges_from((t.source, t.target) for t in self.transitions if not guards.is_false(t.guard))
        return frozenset(nx.descendants(graph, self.initial) | {self.initial})

    def check_input_enabled(self):
        """Raise InputEnabledError for the first reachable state lacking a successor on some input letter."""
        reachable = self.reachable()
        for state in self.states:
            if state not in reachable:
                continue
            missing = ~guards.disjunction(t.guard for t in self.outgoing[state])
            if not guards.is_false(missing):
                raise InputEnabledError(state, guards.pick_letter(missing) & frozenset(self.inputs))

    def to_json(self) -> str:
        return json.dumps({
            'inputs': list(self.inputs),
            'outputs': list(self.outputs),
            'states': [{'id': s, 'label': sorted(self.labels[s])} for s in self.states],
            'initial': self.initial,
            'edges': [{'from': t.source, 'guard': guards.to_text(t.guard, self.inputs), 'to': t.target}
                      for t in self.transitions],
        }, indent=2)


def _require(document: dict, key: str, kind: type):
    if key not in document:
        raise SystemFormatError(f'missing field "{key}"')
    if not isinstance(document[key], kind):
        raise SystemFormatError(f'field "{key}" must be a {kind.__name__}')
    return document[key]


def parse_system(text: str) -> System:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SystemFormatError(f'not a JSON document: {e}') from None
    if not isinstance(document, dict):
        raise SystemFormatError('a system file must hold a JSON object')

    inputs = _require(document, 'inputs', list)
    outputs = _require(document, 'outputs', list)
    if not all(isinstance(name, str) for name in inputs + outputs):
        raise SystemFormatError('input and output names must be strings')
    overlap = set(inputs) & set(outputs)
    if overlap:
        raise SystemFormatError(f'inputs and outputs overlap: {sorted(overlap)}')

    states = []
    labels = dict()
    for entry in _require(document, 'states', list):
        if not isinstance(entry, dict):
            raise SystemFormatError('states must be objects with "id" and "label"')
        state = _require(entry, 'id', str)
        states.append(state)
        labels[state] = frozenset(entry.get('label', []))

    transitions = []
    for entry in _require(document, 'edges', list):
        if not isinstance(entry, dict):
            raise SystemFormatError('edges must be objects with "from", "guard" and "to"')
        text_guard = entry.get('guard', 'true')
        formula = parse_ltl(text_guard, ap_universe=inputs)
        if not is_propositional(formula):
            raise SystemFormatError(f'guard "{text_guard}" is not propositional')
        transitions.append(Transition(_require(entry, 'from', str), formula_to_guard(formula), _require(entry, 'to', str)))

    system = System(states, _require(document, 'initial', str), inputs, outputs, labels, transitions)
    system.check_input_enabled()
    logger.debug('loaded system with %d states, %d inputs, %d outputs', len(states), len(inputs), len(outputs))
    return system


def load_system(path: str) -> System:
    with open(path) as f:
        return parse_system(f.read())


def _trace_grammar() -> pp.ParserElement:
    name = pp.Word(pp.alphas + '_', pp.alphanums + '_')
    names = name + pp.ZeroOrMore(pp.Suppress(',') + name)
    letter = pp.Group(pp.Suppress('{') + pp.Optional(names) + pp.Suppress('}'))
    stem = pp.Group(pp.ZeroOrMore(letter + pp.Suppress(';')))
    letters = letter + pp.ZeroOrMore(pp.Suppress(';') + letter)
    loop = pp.Group(pp.Suppress('(') + letters + pp.Suppress(')') + pp.Suppress(pp.Literal('^w') | pp.Literal('^ω')))
    return stem + loop + pp.StringEnd()


TRACE = _trace_grammar()


def parse_trace(text: str) -> LassoWord:
    """Read a trace literal such as "{i2};{};{i0,o4};({i2,o4})^w"."""
    try:
        stem, loop = TRACE.parse_string(text.strip(), parse_all=True)
    except pp.ParseBaseException as e:
        raise InvalidTraceError(f'malformed trace literal at position {e.loc}: {e.msg}') from None
    return LassoWord(tuple(frozenset(letter) for letter in stem), tuple(frozenset(letter) for letter in loop))


def format_trace(word: LassoWord) -> str:
    return str(word)


@lru_cache(maxsize=64)
def trace_language(system: System) -> Nba:
    """The automaton of traces(T): system states, all accepting, outputs fixed to the target's label."""
    index = {s: i for i, s in enumerate(system.states)}
    edges = []
    for t in system.transitions:
        guard = t.guard & guards.letter_cube(system.labels[t.target], system.outputs)
        if not guards.is_false(guard):
            edges.append(Edge(index[t.source], guard, index[t.target]))
    return Nba(system.aps, len(system.states), {index[system.initial]}, range(len(system.states)), edges)


def _check_trace_symbols(system: System, trace: LassoWord):
    unknown = trace.symbols - frozenset(system.aps)
    if unknown:
        raise AlphabetMismatchError(f'trace mentions symbols the system does not declare: {sorted(unknown)}')


def validate_trace(system: System, trace: LassoWord) -> bool:
    _check_trace_symbols(system, trace)
    return accepts_lasso(trace_language(system), trace)


def require_valid_trace(system: System, trace: LassoWord):
    if not validate_trace(system, trace):
        raise InvalidTraceError(f'{trace} is not a trace of the system')


def input_lasso_automaton(word: LassoWord, system: System) -> Nba:
    """Words over the system's APs whose base inputs follow `word` positionwise; everything else is free."""
    inputs = system.base_inputs
    edges = [Edge(i, guards.letter_cube(word.letter(i) & frozenset(inputs), inputs), word.successor(i))
             for i in range(len(word))]
    return Nba(system.aps, len(word), {0}, range(len(word)), edges)


def is_deterministic_trace(system: System, trace: LassoWord) -> bool:
    """Whether π is the only trace of T with its input sequence."""
    require_valid_trace(system, trace)
    same_inputs = intersect(trace_language(system), input_lasso_automaton(trace, system))
    return is_subset(same_inputs, singleton(trace, system.aps))


class Completions(NamedTuple):
    traces: Tuple[LassoWord, ...]
    unique: bool


def complete_trace(system: System, word: LassoWord, limit: int = 64) -> Completions:
    """
    Lasso traces of T whose inputs follow `word`, found as simple paths closing a cycle in the
    product of T with the positions of `word`. At most `limit` distinct traces are returned.
    """
    extra = word.symbols - frozenset(system.base_inputs)
    if extra:
        raise AlphabetMismatchError(f'input word mentions non-inputs: {sorted(extra)}')

    graph = nx.DiGraph()
    start = (system.initial, 0)
    graph.add_node(start)
    pending = [start]
    while pending:
        node = pending.pop()
        state, position = node
        letter = word.letter(position)
        for target in sorted(system.successors(state, letter)):
            successor = (target, word.successor(position))
            if successor not in graph:
                pending.append(successor)
            graph.add_edge(node, successor, letter=letter | system.labels[target])

    found: Dict[LassoWord, None] = dict()
    stack = [[start]]
    while stack and len(found) < limit:
        path = stack.pop()
        for successor in sorted(graph.successors(path[-1]), reverse=True):
            if successor in path:
                j = path.index(successor)
                closed = path + [successor]
                letters = [graph.edges[a, b]['letter'] for a, b in zip(closed, closed[1:])]
                found.setdefault(LassoWord(letters[:j], letters[j:]).normalized(), None)
            else:
                stack.append(path + [successor])

    traces = tuple(found)
    unique = len(traces) == 1 and is_deterministic_trace(system, traces[0])
    logger.debug('input word %s has %d completions (unique: %s)', word, len(traces), unique)
    return Completions(traces, unique)


def counterfactual_automaton(system: System, trace: LassoWord) -> System:
    """
    One copy of T per position of π. Each output o gets a contingency input o_C; setting it
    forces o in the successor's label to its value on π at the current position, while
    the other outputs follow some regular successor.
    """
    require_valid_trace(system, trace)

    contingency = {o: o + CONTINGENCY_SUFFIX for o in system.outputs}
    clash = set(contingency.values()) & set(system.aps)
    if clash:
        raise NameCollisionError(f'contingency inputs clash with existing names: {sorted(clash)}')
    guards.declare(contingency.values())

    positions = range(len(trace))

    def name(state, n):
        return f'{state}#{n}'

    choices = [frozenset(c) for r in range(len(system.outputs) + 1) for c in itertools.combinations(system.outputs, r)]
    rows: Dict[Tuple[str, str], Guard] = dict()
    for state in system.states:
        for n in positions:
            actual = trace.letter(n)
            following = trace.successor(n)
            for t in system.outgoing[state]:
                regular = system.labels[t.target]
                for chosen in choices:
                    selector = guards.cube({contingency[o]: o in chosen for o in system.outputs})
                    for target in system.states:
                        label = system.labels[target]
                        if all((o in label) == (o in actual if o in chosen else o in regular) for o in system.outputs):
                            pair = (name(state, n), name(target, following))
                            guard = t.guard & selector
                            rows[pair] = rows[pair] | guard if pair in rows else guard

    states = [name(s, n) for s in system.states for n in positions]
    labels = {name(s, n): system.labels[s] for s in system.states for n in positions}
    transitions = [Transition(source, guard, target) for (source, target), guard in rows.items() if not guards.is_false(guard)]
    result = System(states,
                    name(system.initial, 0),
                    system.inputs + tuple(contingency.values()),
                    system.outputs,
                    labels,
                    transitions,
                    contingency_inputs=system.contingency_inputs + tuple(contingency.values()))
    logger.info('counterfactual automaton: %d states, %d transitions', len(states), len(transitions))
    return result


def all_requests_trace(system: System) -> LassoWord:
    """The unique trace of T on which every input holds at every step."""
    completions = complete_trace(system, LassoWord((), (frozenset(system.base_inputs),)))
    if not completions.unique:
        raise InvalidTraceError('the all-inputs word does not determine a unique trace')
    return completions.traces[0]
