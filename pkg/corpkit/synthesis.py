"""
Cause synthesis.

Given a system T, a lasso trace π of T, an effect E and a similarity relation,
the cause is the set of input sequences ρ such that every system trace whose
inputs are at least as close to π as ρ satisfies E. Its complement (the
co-cause) is the set of ρ for which some such trace violates E. The pipeline
builds the co-cause symbolically and complements it once:

1. lift the relation to the alphabet with outputs;
2. tag the automaton of ¬E so that it reads the close trace (t1);
3. intersect: relation holds and the close trace violates E;
4. resolve the close trace against the system (or its counterfactual automaton);
5. complement and fix the actual trace to π.
"""
import logging
import time

from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Union

from . import guards
from .automata import (LassoWord, Nba, accepts_lasso, build_nba, check_same_alphabet, extend_alphabet, intersect,
                       is_empty, merge_equivalent_states, remap_alphabet, trim)
from .complementation import complement
from .errors import AlphabetMismatchError, UnknownAtomError
from .hoa import emit_hoa
from .ltl import LtlFormula, Not, atoms, eval_on_lasso, ltl_to_nba, to_text
from .similarity import (ACTUAL, CLOSE, FAR, SimilarityRelation, lift_relation, make_relation, pin_lasso,
                         reduced_alphabet, tag_word, tagged, untagged, zipped_alphabet)
from .system import System, counterfactual_automaton, require_valid_trace

logger = logging.getLogger(__name__)

Effect = Union[LtlFormula, Nba]


class CauseVerdict(Enum):
    CAUSE = 'cause'
    NO_CAUSE = 'no cause'


@dataclass(frozen=True)
class CauseResult:
    verdict: CauseVerdict
    cause: Nba
    co_cause: Nba
    effect_on_trace: bool
    sizes: Dict[str, int] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def has_cause(self) -> bool:
        return self.verdict is CauseVerdict.CAUSE


def tag_effect(effect: Nba, inputs: Sequence[str], outputs: Sequence[str]) -> Nba:
    """Read the effect automaton on the close trace; the actual and far components are free."""
    aps = set(inputs) | set(outputs)
    if not set(effect.alphabet) <= aps:
        raise AlphabetMismatchError(f'effect mentions {sorted(set(effect.alphabet) - aps)}, which are neither inputs nor outputs')
    renamed = remap_alphabet(effect, {ap: tagged(ap, CLOSE) for ap in effect.alphabet})
    return extend_alphabet(renamed, zipped_alphabet(inputs, outputs))


def build_intersection(lifted_relation: Nba, tagged_effect: Nba, complemented: bool = False) -> Nba:
    """
    Zipped words in the relation whose close trace violates the effect. With complemented=True the
    effect automaton is taken to recognize the violations already.
    """
    check_same_alphabet(lifted_relation, tagged_effect)
    violations = tagged_effect if complemented else complement(tagged_effect)
    return trim(intersect(lifted_relation, extend_alphabet(violations, lifted_relation.alphabet)))


def system_product(intersection: Nba, system: System) -> Nba:
    """
    Replace the close trace by a trace of the system: t1 inputs are quantified away together with
    the contingency inputs, t1 outputs are fixed to the label of the state the system moves to.
    """
    inputs, outputs = system.base_inputs, system.outputs
    if set(intersection.alphabet) != set(zipped_alphabet(inputs, outputs)):
        raise AlphabetMismatchError('the intersection is not over the zipped alphabet of the system')

    to_close = {i: tagged(i, CLOSE) for i in inputs}
    quantified = [tagged(i, CLOSE) for i in inputs] + list(system.contingency_inputs)
    moves = {s: [(guards.rename(t.guard, to_close), t.target) for t in system.outgoing[s]] for s in system.states}
    close_outputs = {s: {tagged(o, CLOSE): o in system.labels[s] for o in outputs} for s in system.states}

    def successors(state):
        s, q = state
        for guard, target in moves[s]:
            for edge in intersection.outgoing[q]:
                step = guards.restrict(edge.guard, close_outputs[target])
                yield guards.exist(quantified, guard & step), (target, edge.target)

    product = build_nba(reduced_alphabet(inputs, outputs),
                        [(system.initial, q) for q in sorted(intersection.initial)],
                        successors,
                        lambda state: state[1] in intersection.accepting)
    return trim(product)


def trace_product(automaton: Nba, trace: LassoWord) -> Nba:
    """Fix the actual component to π, position by position, and read the far inputs as plain inputs."""
    far = [s for s in automaton.alphabet if untagged(s)[1] == FAR]
    actual = [s for s in automaton.alphabet if untagged(s)[1] == ACTUAL]
    if len(far) + len(actual) != len(automaton.alphabet):
        raise AlphabetMismatchError('expected an automaton over actual and far symbols only')
    return pin_lasso(automaton, tag_word(trace, ACTUAL), actual, {s: untagged(s)[0] for s in far})


@contextmanager
def _stage(name: str, timings: Dict[str, float]):
    start = time.perf_counter()
    yield
    timings[name] = time.perf_counter() - start


def _effect_automata(system: System, trace: LassoWord, effect: Effect):
    """The automaton of the effect's violations and whether π satisfies the effect."""
    if isinstance(effect, LtlFormula):
        unknown = sorted(atoms(effect) - set(system.aps))
        if unknown:
            raise UnknownAtomError(unknown[0])
        return ltl_to_nba(Not(effect), system.aps), eval_on_lasso(effect, trace)

    if not set(effect.alphabet) <= set(system.aps):
        raise AlphabetMismatchError(f'effect automaton mentions {sorted(set(effect.alphabet) - set(system.aps))}')
    extended = extend_alphabet(effect, system.aps)
    return complement(extended), accepts_lasso(extended, trace)


def synthesize_cause(system: System,
                     trace: LassoWord,
                     effect: Effect,
                     relation: SimilarityRelation,
                     contingencies: bool = False) -> CauseResult:
    require_valid_trace(system, trace)
    if set(relation.inputs) != set(system.base_inputs):
        raise AlphabetMismatchError(f'relation over {relation.inputs}, system inputs are {system.base_inputs}')

    sizes: Dict[str, int] = dict()
    timings: Dict[str, float] = dict()
    inputs, outputs = system.base_inputs, system.outputs

    with _stage('effect', timings):
        violations, effect_on_trace = _effect_automata(system, trace, effect)
    with _stage('relation', timings):
        lifted = extend_alphabet(lift_relation(relation, outputs), zipped_alphabet(inputs, outputs))
    with _stage('tagged', timings):
        tagged_effect = tag_effect(violations, inputs, outputs)
    with _stage('intersection', timings):
        intersection = build_intersection(lifted, tagged_effect, complemented=True)
    with _stage('system', timings):
        target = counterfactual_automaton(system, trace) if contingencies else system
    with _stage('product', timings):
        product = system_product(intersection, target)
    with _stage('complement', timings):
        complemented = complement(product)
    with _stage('cause', timings):
        cause = merge_equivalent_states(trim(trace_product(complemented, trace)))
        co_cause = merge_equivalent_states(trim(trace_product(product, trace)))

    for name, automaton in (('relation', lifted), ('effect', tagged_effect), ('intersection', intersection),
                            ('product', product), ('complement', complemented), ('cause', cause)):
        sizes[name] = automaton.num_states
    sizes['system'] = len(target.states)
    for name in sizes:
        logger.info('stage %-12s %6d states %8.3fs', name, sizes[name], timings.get(name, 0.0))

    verdict = CauseVerdict.NO_CAUSE if is_empty(cause).empty else CauseVerdict.CAUSE
    logger.info('verdict: %s', verdict.value)
    return CauseResult(verdict, cause, co_cause, effect_on_trace, sizes, timings)


class CheckVerdict(Enum):
    IS_CAUSE = 'is cause'
    NOT_CAUSE = 'not cause'
    NO_CAUSE_EXISTS = 'no cause exists'


class Direction(Enum):
    TOO_LARGE = 'candidate too large'
    TOO_SMALL = 'candidate too small'


@dataclass(frozen=True)
class CheckResult:
    verdict: CheckVerdict
    result: CauseResult
    direction: Optional[Direction] = None
    witness: Optional[LassoWord] = None


def _candidate_automata(candidate: Union[LtlFormula, Nba], inputs: Sequence[str]):
    if isinstance(candidate, LtlFormula):
        unknown = sorted(atoms(candidate) - set(inputs))
        if unknown:
            raise UnknownAtomError(unknown[0])
        return ltl_to_nba(candidate, inputs), ltl_to_nba(Not(candidate), inputs)

    if not set(candidate.alphabet) <= set(inputs):
        raise AlphabetMismatchError(f'candidate mentions non-inputs {sorted(set(candidate.alphabet) - set(inputs))}')
    extended = extend_alphabet(candidate, inputs)
    return extended, complement(extended)


def compare_candidate(result: CauseResult, candidate: Union[LtlFormula, Nba]) -> CheckResult:
    """Language equivalence of a candidate with a synthesized cause, with a witness when they differ."""
    if not result.has_cause:
        return CheckResult(CheckVerdict.NO_CAUSE_EXISTS, result)

    accepted, rejected = _candidate_automata(candidate, result.cause.alphabet)

    extra = is_empty(intersect(accepted, result.co_cause))
    if not extra.empty:
        return CheckResult(CheckVerdict.NOT_CAUSE, result, Direction.TOO_LARGE, extra.witness)

    missing = is_empty(intersect(result.cause, rejected))
    if not missing.empty:
        return CheckResult(CheckVerdict.NOT_CAUSE, result, Direction.TOO_SMALL, missing.witness)

    return CheckResult(CheckVerdict.IS_CAUSE, result)


def check_cause(system: System,
                trace: LassoWord,
                effect: Effect,
                relation: SimilarityRelation,
                candidate: Union[LtlFormula, Nba],
                contingencies: bool = False) -> CheckResult:
    result = synthesize_cause(system, trace, effect, relation, contingencies)
    checked = compare_candidate(result, candidate)
    logger.info('candidate %s: %s', to_text(candidate) if isinstance(candidate, LtlFormula) else candidate,
                checked.verdict.value)
    return checked


class CauseSynthesizer:
    """Synthesizes and checks causes of effects on one trace of one system."""

    def __init__(self, system: System, trace: LassoWord):
        require_valid_trace(system, trace)
        self.system = system
        self.trace = trace
        self._relation = make_relation('subset', system.base_inputs)
        self._contingencies = False
        self.result: Optional[CauseResult] = None

    @property
    def relation(self) -> SimilarityRelation:
        return self._relation

    @relation.setter
    def relation(self, name: str):
        if name not in ('subset', 'full') and not name.startswith('custom:'):
            raise ValueError(f'{name} is not supported')
        self._relation = make_relation(name, self.system.base_inputs)

    @property
    def contingencies(self) -> bool:
        return self._contingencies

    @contingencies.setter
    def contingencies(self, enabled: bool):
        if not isinstance(enabled, bool):
            raise ValueError('contingencies must be True or False')
        self._contingencies = enabled

    def synthesize(self, effect: Effect) -> CauseResult:
        self.result = synthesize_cause(self.system, self.trace, effect, self._relation, self._contingencies)
        return self.result

    def check(self, effect: Effect, candidate: Union[LtlFormula, Nba]) -> CheckResult:
        checked = check_cause(self.system, self.trace, effect, self._relation, candidate, self._contingencies)
        self.result = checked.result
        return checked

    def dump_cause(self, path: str):
        if self.result is None or not self.result.has_cause:
            raise RuntimeError('no cause to dump: run synthesize() first')
        with open(path, 'w') as f:
            f.write(emit_hoa(self.result.cause, name='cause'))
