"""
Linear temporal logic: syntax tree, parser, printer, negation normal form,
evaluation on lasso words and translation to Büchi automata.
"""
import logging
import re

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import pyparsing as pp

from . import guards
from .automata import LassoWord, Nba, build_nba, empty_automaton, merge_equivalent_states, trim
from .errors import LtlSyntaxError, UnknownAtomError
from .guards import Guard

logger = logging.getLogger(__name__)

pp.ParserElement.enable_packrat()

KEYWORDS = frozenset({'X', 'F', 'G', 'U', 'R', 'true', 'false'})


class LtlFormula:
    """Base class of formula nodes. Nodes are immutable and compare structurally."""

    def __str__(self):
        return to_text(self)

    def __invert__(self):
        return Not(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)


@dataclass(frozen=True)
class TrueFormula(LtlFormula):
    pass


@dataclass(frozen=True)
class FalseFormula(LtlFormula):
    pass


@dataclass(frozen=True)
class Atom(LtlFormula):
    name: str


@dataclass(frozen=True)
class Not(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class Next(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class Eventually(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class Globally(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class And(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Or(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Implies(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Iff(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Until(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Release(LtlFormula):
    left: LtlFormula
    right: LtlFormula


UNARY = {'!': Not, 'X': Next, 'F': Eventually, 'G': Globally}
BINARY = {'&': And, '|': Or, '->': Implies, '<->': Iff, 'U': Until, 'R': Release}
SYMBOLS = {cls: symbol for symbol, cls in {**UNARY, **BINARY}.items()}


def conjunction(formulas: Iterable[LtlFormula]) -> LtlFormula:
    result = None
    for formula in formulas:
        result = formula if result is None else And(result, formula)
    return TrueFormula() if result is None else result


def atoms(formula: LtlFormula) -> FrozenSet[str]:
    if isinstance(formula, Atom):
        return frozenset({formula.name})
    if isinstance(formula, (TrueFormula, FalseFormula)):
        return frozenset()
    if hasattr(formula, 'operand'):
        return atoms(formula.operand)
    return atoms(formula.left) | atoms(formula.right)


def is_propositional(formula: LtlFormula) -> bool:
    if isinstance(formula, (TrueFormula, FalseFormula, Atom)):
        return True
    if isinstance(formula, Not):
        return is_propositional(formula.operand)
    if isinstance(formula, (And, Or, Implies, Iff)):
        return is_propositional(formula.left) and is_propositional(formula.right)
    return False


def to_text(formula: LtlFormula) -> str:
    """Canonical concrete syntax: binary operators are always parenthesized."""
    if isinstance(formula, TrueFormula):
        return 'true'
    if isinstance(formula, FalseFormula):
        return 'false'
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, Not):
        return '!' + to_text(formula.operand)
    if hasattr(formula, 'operand'):
        return f'{SYMBOLS[type(formula)]} {to_text(formula.operand)}'
    return f'({to_text(formula.left)} {SYMBOLS[type(formula)]} {to_text(formula.right)})'


def _fold_unary(tokens):
    group = tokens[0]
    formula = group[-1]
    for operator in reversed(group[:-1]):
        formula = UNARY[operator](formula)
    return formula


def _fold_left(tokens):
    group = tokens[0]
    formula = group[0]
    for operator, operand in zip(group[1::2], group[2::2]):
        formula = BINARY[operator](formula, operand)
    return formula


def _fold_right(tokens):
    group = tokens[0]
    formula = group[-1]
    for operand, operator in zip(reversed(group[:-1:2]), reversed(group[1::2])):
        formula = BINARY[operator](operand, formula)
    return formula


def _build_grammar() -> pp.ParserElement:
    keyword = pp.MatchFirst([pp.Keyword(word) for word in sorted(KEYWORDS)])
    identifier = ~keyword + pp.Word(pp.alphas + '_', pp.alphanums + '_')
    identifier.set_parse_action(lambda tokens: Atom(tokens[0]))
    constant = pp.Keyword('true').set_parse_action(lambda: TrueFormula()) \
        | pp.Keyword('false').set_parse_action(lambda: FalseFormula())

    formula = pp.infix_notation(constant | identifier, [
        (pp.Literal('!') | pp.one_of('X F G', as_keyword=True), 1, pp.OpAssoc.RIGHT, _fold_unary),
        (pp.one_of('U R', as_keyword=True), 2, pp.OpAssoc.RIGHT, _fold_right),
        (pp.Literal('&'), 2, pp.OpAssoc.LEFT, _fold_left),
        (pp.Literal('|'), 2, pp.OpAssoc.LEFT, _fold_left),
        (pp.Literal('->'), 2, pp.OpAssoc.RIGHT, _fold_right),
        (pp.Literal('<->'), 2, pp.OpAssoc.LEFT, _fold_left),
    ])
    return formula + pp.StringEnd()


GRAMMAR = _build_grammar()


def parse_ltl(text: str, ap_universe: Optional[Iterable[str]] = None) -> LtlFormula:
    """
    Parse a formula. With an ap_universe, atoms outside it are rejected;
    None leaves the universe open.
    """
    try:
        formula = GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise LtlSyntaxError(f'syntax error at position {e.loc}: {e.msg}', e.loc) from None

    if ap_universe is not None:
        unknown = sorted(atoms(formula) - frozenset(ap_universe))
        if unknown:
            match = re.search(r'\b' + re.escape(unknown[0]) + r'\b', text)
            raise UnknownAtomError(unknown[0], match.start() if match else -1)
    return formula


def to_nnf(formula: LtlFormula, negate: bool = False) -> LtlFormula:
    """Push negations to the atoms; only true, false, literals, &, |, X, U and R remain."""
    if isinstance(formula, TrueFormula):
        return FalseFormula() if negate else formula
    if isinstance(formula, FalseFormula):
        return TrueFormula() if negate else formula
    if isinstance(formula, Atom):
        return Not(formula) if negate else formula
    if isinstance(formula, Not):
        return to_nnf(formula.operand, not negate)
    if isinstance(formula, Next):
        return Next(to_nnf(formula.operand, negate))
    if isinstance(formula, Eventually):
        if negate:
            return Release(FalseFormula(), to_nnf(formula.operand, True))
        return Until(TrueFormula(), to_nnf(formula.operand))
    if isinstance(formula, Globally):
        if negate:
            return Until(TrueFormula(), to_nnf(formula.operand, True))
        return Release(FalseFormula(), to_nnf(formula.operand))
    if isinstance(formula, And):
        op = Or if negate else And
        return op(to_nnf(formula.left, negate), to_nnf(formula.right, negate))
    if isinstance(formula, Or):
        op = And if negate else Or
        return op(to_nnf(formula.left, negate), to_nnf(formula.right, negate))
    if isinstance(formula, Implies):
        if negate:
            return And(to_nnf(formula.left), to_nnf(formula.right, True))
        return Or(to_nnf(formula.left, True), to_nnf(formula.right))
    if isinstance(formula, Iff):
        left, right = formula.left, formula.right
        return Or(And(to_nnf(left), to_nnf(right, negate)), And(to_nnf(left, True), to_nnf(right, not negate)))
    if isinstance(formula, Until):
        if negate:
            return Release(to_nnf(formula.left, True), to_nnf(formula.right, True))
        return Until(to_nnf(formula.left), to_nnf(formula.right))
    if isinstance(formula, Release):
        if negate:
            return Until(to_nnf(formula.left, True), to_nnf(formula.right, True))
        return Release(to_nnf(formula.left), to_nnf(formula.right))
    raise TypeError(f'not a formula: {formula!r}')


def formula_to_guard(formula: LtlFormula) -> Guard:
    """The guard of a propositional formula."""
    if isinstance(formula, TrueFormula):
        return guards.true()
    if isinstance(formula, FalseFormula):
        return guards.false()
    if isinstance(formula, Atom):
        return guards.var(formula.name)
    if isinstance(formula, Not):
        return ~formula_to_guard(formula.operand)
    if isinstance(formula, And):
        return formula_to_guard(formula.left) & formula_to_guard(formula.right)
    if isinstance(formula, Or):
        return formula_to_guard(formula.left) | formula_to_guard(formula.right)
    if isinstance(formula, Implies):
        return ~formula_to_guard(formula.left) | formula_to_guard(formula.right)
    if isinstance(formula, Iff):
        left, right = formula_to_guard(formula.left), formula_to_guard(formula.right)
        return (left & right) | (~left & ~right)
    raise ValueError(f'{to_text(formula)} is not propositional')


def eval_on_lasso(formula: LtlFormula, word: LassoWord) -> bool:
    """Whether the word satisfies the formula at its first position."""
    positions = range(len(word))
    successor = [word.successor(i) for i in positions]
    values: Dict[LtlFormula, Tuple[bool, ...]] = dict()

    def until(left, right):
        result = [False] * len(word)
        changed = True
        while changed:
            changed = False
            for i in reversed(positions):
                value = right[i] or (left[i] and result[successor[i]])
                if value != result[i]:
                    result[i], changed = value, True
        return tuple(result)

    def release(left, right):
        result = [True] * len(word)
        changed = True
        while changed:
            changed = False
            for i in reversed(positions):
                value = right[i] and (left[i] or result[successor[i]])
                if value != result[i]:
                    result[i], changed = value, True
        return tuple(result)

    def sat(f: LtlFormula) -> Tuple[bool, ...]:
        if f in values:
            return values[f]
        if isinstance(f, TrueFormula):
            result = (True,) * len(word)
        elif isinstance(f, FalseFormula):
            result = (False,) * len(word)
        elif isinstance(f, Atom):
            result = tuple(f.name in word.letter(i) for i in positions)
        elif isinstance(f, Not):
            result = tuple(not v for v in sat(f.operand))
        elif isinstance(f, Next):
            operand = sat(f.operand)
            result = tuple(operand[successor[i]] for i in positions)
        elif isinstance(f, Eventually):
            result = until((True,) * len(word), sat(f.operand))
        elif isinstance(f, Globally):
            result = release((False,) * len(word), sat(f.operand))
        elif isinstance(f, Until):
            result = until(sat(f.left), sat(f.right))
        elif isinstance(f, Release):
            result = release(sat(f.left), sat(f.right))
        else:
            left, right = sat(f.left), sat(f.right)
            combine = {
                And: lambda a, b: a and b,
                Or: lambda a, b: a or b,
                Implies: lambda a, b: (not a) or b,
                Iff: lambda a, b: a == b,
            }[type(f)]
            result = tuple(combine(a, b) for a, b in zip(left, right))
        values[f] = result
        return result

    return sat(formula)[0]


@dataclass(frozen=True, eq=False)
class _Cover:
    """One way to meet a set of obligations now: a letter constraint, the obligations left
    for the next position, and the eventualities postponed by this choice."""
    guard: Guard
    following: FrozenSet[LtlFormula]
    postponed: FrozenSet[LtlFormula]


def _conjoin(first: List[_Cover], second: List[_Cover]) -> List[_Cover]:
    result = []
    for a in first:
        for b in second:
            guard = a.guard & b.guard
            if not guards.is_false(guard):
                result.append(_Cover(guard, a.following | b.following, a.postponed | b.postponed))
    return result


class _Tableau:

    def __init__(self):
        self._covers: Dict[LtlFormula, List[_Cover]] = dict()

    def covers(self, formula: LtlFormula) -> List[_Cover]:
        if formula not in self._covers:
            self._covers[formula] = self._expand(formula)
        return self._covers[formula]

    def _expand(self, formula: LtlFormula) -> List[_Cover]:
        nothing = frozenset()
        if isinstance(formula, TrueFormula):
            return [_Cover(guards.true(), nothing, nothing)]
        if isinstance(formula, FalseFormula):
            return []
        if isinstance(formula, Atom):
            return [_Cover(guards.var(formula.name), nothing, nothing)]
        if isinstance(formula, Not):
            return [_Cover(~guards.var(formula.operand.name), nothing, nothing)]
        if isinstance(formula, And):
            return _conjoin(self.covers(formula.left), self.covers(formula.right))
        if isinstance(formula, Or):
            return self.covers(formula.left) + self.covers(formula.right)
        if isinstance(formula, Next):
            if isinstance(formula.operand, FalseFormula):
                return []
            following = nothing if isinstance(formula.operand, TrueFormula) else frozenset({formula.operand})
            return [_Cover(guards.true(), following, nothing)]
        if isinstance(formula, Until):
            later = frozenset({formula})
            return self.covers(formula.right) + [
                _Cover(c.guard, c.following | later, c.postponed | later) for c in self.covers(formula.left)
            ]
        if isinstance(formula, Release):
            later = frozenset({formula})
            return _conjoin(self.covers(formula.right), self.covers(formula.left)) + [
                _Cover(c.guard, c.following | later, c.postponed) for c in self.covers(formula.right)
            ]
        raise TypeError(f'formula not in negation normal form: {to_text(formula)}')

    def transitions(self, obligations: FrozenSet[LtlFormula]) -> List[_Cover]:
        result = [_Cover(guards.true(), frozenset(), frozenset())]
        for formula in sorted(obligations, key=to_text):
            result = _conjoin(result, self.covers(formula))

        merged: Dict[Tuple[FrozenSet, FrozenSet], Guard] = dict()
        for c in result:
            signature = (c.following, c.postponed)
            merged[signature] = merged[signature] | c.guard if signature in merged else c.guard

        # A choice that leaves fewer obligations and postpones fewer eventualities makes any
        # other choice with the same letter redundant.
        reduced = []
        for (following, postponed), guard in merged.items():
            for (other_following, other_postponed), other_guard in merged.items():
                if (other_following, other_postponed) != (following, postponed) \
                        and other_following <= following and other_postponed <= postponed:
                    guard &= ~other_guard
            if not guards.is_false(guard):
                reduced.append(_Cover(guard, following, postponed))
        return reduced


def ltl_to_nba(formula: LtlFormula, ap_universe: Sequence[str]) -> Nba:
    """
    Translate a formula to a Büchi automaton over 2^ap_universe.

    Obligation sets of the negation normal form are expanded into transitions of a
    generalized Büchi automaton (one acceptance condition per eventuality, met on
    transitions that do not postpone it), which is then degeneralized with a counter.
    """
    alphabet = tuple(ap_universe)
    unknown = sorted(atoms(formula) - frozenset(alphabet))
    if unknown:
        raise UnknownAtomError(unknown[0])
    guards.declare(alphabet)

    root = to_nnf(formula)
    tableau = _Tableau()

    start = frozenset({root}) - {TrueFormula()}
    index: Dict[FrozenSet[LtlFormula], int] = {start: 0}
    transitions: Dict[int, List[_Cover]] = dict()
    queue = deque([start])
    while queue:
        obligations = queue.popleft()
        rows = tableau.transitions(obligations)
        transitions[index[obligations]] = rows
        for c in rows:
            if c.following not in index:
                index[c.following] = len(index)
                queue.append(c.following)

    eventualities = sorted(set().union(*(c.postponed for rows in transitions.values() for c in rows)), key=to_text)
    rounds = len(eventualities)

    def successors(state):
        q, level = state
        for c in transitions[q]:
            reached = 0 if level == rounds else level
            while reached < rounds and eventualities[reached] not in c.postponed:
                reached += 1
            yield c.guard, (index[c.following], reached)

    automaton = build_nba(alphabet, [(0, 0)], successors, lambda state: state[1] == rounds)
    result = merge_equivalent_states(trim(automaton))
    if result.num_states == 0:
        result = empty_automaton(alphabet)
    logger.debug('translated %s: %d obligation sets, %d eventualities, %d states',
                 to_text(formula), len(index), rounds, result.num_states)
    return result


@lru_cache(maxsize=256)
def translate_cached(formula: LtlFormula, ap_universe: Tuple[str, ...]) -> Nba:
    return ltl_to_nba(formula, ap_universe)
