"""
Brute-force validation of causes at bounded scale.

The outer quantifier of every check ranges over the lassos of a bounded
universe; inner quantifiers are resolved exactly with automata. A FAIL verdict
therefore always carries a concrete witness, while PASS only means that no
counterexample exists within the bounds. The actual inputs need not fit the
bounds; a check is INCONCLUSIVE when none of the bounded lassos falls into the
nonempty set it quantifies over.
"""
import itertools
import logging
import math

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

from .automata import (LassoWord, Nba, Remap, accepts_lasso, extend_alphabet, intersect, is_empty, remap_alphabet,
                       trim)
from .complementation import complement
from .ltl import LtlFormula, Not, eval_on_lasso, ltl_to_nba
from .similarity import SimilarityRelation, relation_section, zip_lassos
from .system import (System, complete_trace, counterfactual_automaton, input_lasso_automaton, trace_language,
                     validate_trace)

logger = logging.getLogger(__name__)

Effect = Union[LtlFormula, Nba]


class Status(Enum):
    PASS = 'PASS'
    FAIL = 'FAIL'
    INCONCLUSIVE = 'INCONCLUSIVE'


@dataclass(frozen=True)
class OracleVerdict:
    check: str
    status: Status
    witness: Optional[Tuple[LassoWord, ...]] = None
    checked: int = 0
    detail: str = ''

    def __str__(self):
        text = f'{self.check}: {self.status.value} ({self.checked} checked)'
        if self.detail:
            text += f', {self.detail}'
        if self.witness:
            text += ', witness ' + ' / '.join(map(str, self.witness))
        return text


@dataclass(frozen=True)
class BoundedUniverse:
    aps: Tuple[str, ...]
    stem_bound: int = 3
    loop_bound: int = 2

    def __post_init__(self):
        object.__setattr__(self, 'aps', tuple(self.aps))
        if self.stem_bound < 0 or self.loop_bound < 1:
            raise ValueError(f'bounds need stem >= 0 and loop >= 1, got {self.stem_bound} and {self.loop_bound}')

    def letters(self) -> List[FrozenSet[str]]:
        return [frozenset(c) for r in range(len(self.aps) + 1) for c in itertools.combinations(self.aps, r)]

    def count(self) -> int:
        size = 2 ** len(self.aps)
        return sum(size ** (stem + loop) for stem in range(self.stem_bound + 1) for loop in range(1, self.loop_bound + 1))


def enumerate_lassos(universe: BoundedUniverse) -> Iterator[LassoWord]:
    """Every lasso within the bounds, by stem length, then loop length, then letters."""
    letters = universe.letters()
    for stem_length in range(universe.stem_bound + 1):
        for loop_length in range(1, universe.loop_bound + 1):
            for stem in itertools.product(letters, repeat=stem_length):
                for loop in itertools.product(letters, repeat=loop_length):
                    yield LassoWord(stem, loop)


@dataclass(frozen=True)
class Changes:
    """
    Positions (ap, i) where two words differ: `transient` below `offset`, and from
    `offset` on the pairs (ap, r) of `periodic` stand for every i = offset + r + k * period.
    """
    offset: int
    period: int
    transient: FrozenSet[Tuple[str, int]] = field(default=frozenset())
    periodic: FrozenSet[Tuple[str, int]] = field(default=frozenset())

    def expand(self, offset: int, period: int) -> 'Changes':
        if offset < self.offset or period % self.period:
            raise ValueError(f'cannot expand offset {self.offset}/period {self.period} to {offset}/{period}')
        transient = set(self.transient)
        for ap, residue in self.periodic:
            transient |= {(ap, i) for i in range(self.offset, offset) if (i - self.offset) % self.period == residue}
        periodic = {(ap, r) for r in range(period) for ap, residue in self.periodic
                    if (offset + r - self.offset) % self.period == residue}
        return Changes(offset, period, frozenset(transient), frozenset(periodic))

    def issubset(self, other: 'Changes') -> bool:
        offset, period = max(self.offset, other.offset), math.lcm(self.period, other.period)
        mine, theirs = self.expand(offset, period), other.expand(offset, period)
        return mine.transient <= theirs.transient and mine.periodic <= theirs.periodic

    def unrolled(self, length: int) -> FrozenSet[Tuple[str, int]]:
        """The explicit changes at positions below `length`."""
        result = {(ap, i) for ap, i in self.transient if i < length}
        for ap, residue in self.periodic:
            result |= {(ap, i) for i in range(self.offset + residue, length, self.period)}
        return frozenset(result)


def changes(first: LassoWord, second: LassoWord) -> Changes:
    offset = max(len(first.stem), len(second.stem))
    period = math.lcm(len(first.loop), len(second.loop))
    aps = first.symbols | second.symbols
    transient = {(ap, i) for i in range(offset) for ap in aps if (ap in first.letter(i)) != (ap in second.letter(i))}
    periodic = {(ap, r) for r in range(period) for ap in aps
                if (ap in first.letter(offset + r)) != (ap in second.letter(offset + r))}
    return Changes(offset, period, frozenset(transient), frozenset(periodic))


def _violations(effect: Effect, aps: Sequence[str]) -> Nba:
    if isinstance(effect, LtlFormula):
        return ltl_to_nba(Not(effect), aps)
    return complement(extend_alphabet(effect, aps))


def _satisfies(effect: Effect, trace: LassoWord, aps: Sequence[str]) -> bool:
    if isinstance(effect, LtlFormula):
        return eval_on_lasso(effect, trace)
    return accepts_lasso(extend_alphabet(effect, aps), trace)


def _actual_inputs(system: System, trace: LassoWord) -> LassoWord:
    return trace.project(system.base_inputs)


def _nothing_within_bounds(check: str, language: Nba, what: str) -> OracleVerdict:
    """No bounded lasso fell into `language`: vacuous if the language is empty, otherwise the bounds are too small."""
    if is_empty(language).empty:
        return OracleVerdict(check, Status.PASS, detail=f'no sequence {what}')
    return OracleVerdict(check, Status.INCONCLUSIVE, detail=f'no sequence {what} within the bounds')


class _Counterexamples:
    """Input sequences that some trace of the target system with those inputs turns into an effect violation."""

    def __init__(self, system: System, trace: LassoWord, effect: Effect, contingencies: bool):
        self.target = counterfactual_automaton(system, trace) if contingencies else system
        self.violations = extend_alphabet(_violations(effect, system.aps), self.target.aps)
        bad_traces = intersect(trace_language(self.target), self.violations)
        keep = set(system.base_inputs)
        self.inputs = trim(remap_alphabet(bad_traces, {s: s if s in keep else Remap.DROP for s in bad_traces.alphabet}))

    def violating_trace(self, word: LassoWord) -> Optional[LassoWord]:
        same_inputs = intersect(trace_language(self.target), input_lasso_automaton(word, self.target))
        return is_empty(intersect(same_inputs, self.violations)).witness


def check_pc1(system: System, trace: LassoWord, cause: Nba, effect: Effect) -> OracleVerdict:
    """The actual inputs are in the cause and the actual trace shows the effect."""
    actual = _actual_inputs(system, trace)
    if not accepts_lasso(cause, actual):
        return OracleVerdict('pc1', Status.FAIL, (actual,), 1, 'actual inputs are not in the cause')
    if not _satisfies(effect, trace, system.aps):
        return OracleVerdict('pc1', Status.FAIL, (trace,), 1, 'the effect does not hold on the actual trace')
    return OracleVerdict('pc1', Status.PASS, checked=1)


def check_sat(system: System, trace: LassoWord, cause: Nba, effect: Effect) -> OracleVerdict:
    """Every trace with the actual inputs has inputs in the cause and satisfies the effect."""
    actual = _actual_inputs(system, trace)
    if not accepts_lasso(cause, actual):
        return OracleVerdict('sat', Status.FAIL, (actual,), 1, 'actual inputs are not in the cause')

    completions = complete_trace(system, actual)
    for completion in completions.traces:
        if not _satisfies(effect, completion, system.aps):
            return OracleVerdict('sat', Status.FAIL, (completion,), len(completions.traces),
                                 'a trace with the actual inputs violates the effect')

    same_inputs = intersect(trace_language(system), input_lasso_automaton(actual, system))
    witness = is_empty(intersect(same_inputs, _violations(effect, system.aps))).witness
    if witness is not None:
        return OracleVerdict('sat', Status.FAIL, (witness,), len(completions.traces) + 1,
                             'a trace with the actual inputs violates the effect')
    return OracleVerdict('sat', Status.PASS, checked=len(completions.traces) + 1)


def check_cf(system: System,
             trace: LassoWord,
             cause: Nba,
             effect: Effect,
             relation: SimilarityRelation,
             universe: BoundedUniverse,
             contingencies: bool = False,
             co_cause: Optional[Nba] = None) -> OracleVerdict:
    """
    Every bounded π0 outside the cause has an at least as close π1 outside the cause with a
    system trace that avoids the effect. The search for π1 is exact.
    """
    actual = _actual_inputs(system, trace)
    outside = co_cause if co_cause is not None else complement(cause)
    escapes = intersect(_Counterexamples(system, trace, effect, contingencies).inputs, outside)
    checked = 0
    for far in enumerate_lassos(universe):
        if accepts_lasso(cause, far):
            continue
        checked += 1
        if is_empty(intersect(relation_section(relation, actual, far), escapes)).empty:
            return OracleVerdict('cf', Status.FAIL, (far,), checked,
                                 'no closer input sequence outside the cause avoids the effect')
    if not checked:
        return _nothing_within_bounds('cf', outside, 'outside the cause')
    logger.debug('cf: %d sequences outside the cause checked', checked)
    return OracleVerdict('cf', Status.PASS, checked=checked)


def check_downward_closed(cause: Nba,
                          effect: Effect,
                          system: System,
                          trace: LassoWord,
                          relation: SimilarityRelation,
                          universe: BoundedUniverse,
                          contingencies: bool = False) -> OracleVerdict:
    """No bounded ρ in the cause has an at least as close system trace violating the effect."""
    actual = _actual_inputs(system, trace)
    counterexamples = _Counterexamples(system, trace, effect, contingencies)
    checked = 0
    for far in enumerate_lassos(universe):
        if not accepts_lasso(cause, far):
            continue
        checked += 1
        close = is_empty(intersect(relation_section(relation, actual, far), counterexamples.inputs)).witness
        if close is not None:
            violating = counterexamples.violating_trace(close)
            return OracleVerdict('downward-closed', Status.FAIL, (far, violating or close), checked,
                                 'a closer system trace violates the effect')
    if not checked:
        return _nothing_within_bounds('downward-closed', cause, 'inside the cause')
    logger.debug('downward-closed: %d sequences inside the cause checked', checked)
    return OracleVerdict('downward-closed', Status.PASS, checked=checked)


def check_pc2(system: System,
              trace: LassoWord,
              cause: Nba,
              effect: Effect,
              relation: SimilarityRelation,
              universe: BoundedUniverse,
              contingencies: bool = False) -> OracleVerdict:
    """
    Closest-trace counterfactual check: sequences outside the cause that are closest within the
    universe should have a trace avoiding the effect. Closest within bounds is not closest
    overall, so the verdict stays INCONCLUSIVE; sequences that fail are reported as suspects.
    """
    actual = _actual_inputs(system, trace)

    bad = _Counterexamples(system, trace, effect, contingencies).inputs
    outside = [w for w in enumerate_lassos(universe) if not accepts_lasso(cause, w)]

    def closer(first, second):
        return accepts_lasso(relation.automaton, zip_lassos(actual, first, second))

    suspects = []
    for candidate in outside:
        closest = not any(closer(other, candidate) and not closer(candidate, other) for other in outside)
        if closest and not accepts_lasso(bad, candidate):
            suspects.append(candidate)

    detail = f'{len(suspects)} closest sequences within bounds keep the effect'
    return OracleVerdict('pc2', Status.INCONCLUSIVE, tuple(suspects[:1]) or None, len(outside), detail)


def run_checks(system: System,
               trace: LassoWord,
               cause: Nba,
               effect: Effect,
               relation: SimilarityRelation,
               universe: BoundedUniverse,
               contingencies: bool = False,
               co_cause: Optional[Nba] = None) -> List[OracleVerdict]:
    """The default verification suite."""
    if not validate_trace(system, trace):
        return [OracleVerdict('trace', Status.FAIL, (trace,), 1, 'not a trace of the system')]
    return [
        check_sat(system, trace, cause, effect),
        check_cf(system, trace, cause, effect, relation, universe, contingencies, co_cause),
        check_downward_closed(cause, effect, system, trace, relation, universe, contingencies),
    ]
