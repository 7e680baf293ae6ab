"""
Similarity relations over input sequences and the zipped alphabets they live in.

A relation compares three input sequences: the actual one (tag t0), a close
one (t1) and a far one (t2). It holds for a zipped word when the close
sequence is at least as similar to the actual one as the far sequence.
Symbols of the zipped alphabet are named "<ap>@<tag>".
"""
import itertools
import logging
import math

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

from . import guards
from .automata import Edge, LassoWord, Nba, accepts_lasso, build_nba, extend_alphabet
from .errors import AlphabetMismatchError, NameCollisionError
from .hoa import parse_hoa
from .ltl import Atom, Globally, Eventually, Iff, Implies, LtlFormula, Not, conjunction, ltl_to_nba

logger = logging.getLogger(__name__)

TAGS = ('t0', 't1', 't2')
ACTUAL, CLOSE, FAR = TAGS


def tagged(ap: str, tag: str) -> str:
    return f'{ap}@{tag}'


def untagged(symbol: str) -> Tuple[str, str]:
    ap, _, tag = symbol.rpartition('@')
    if tag not in TAGS or not ap:
        raise AlphabetMismatchError(f'"{symbol}" is not a zipped symbol')
    return ap, tag


def zipped_alphabet(inputs: Sequence[str], outputs: Sequence[str] = ()) -> Tuple[str, ...]:
    """All t0 symbols (inputs, then outputs), then all t1 symbols, then the t2 inputs."""
    return tuple([tagged(a, ACTUAL) for a in (*inputs, *outputs)]
                 + [tagged(a, CLOSE) for a in (*inputs, *outputs)]
                 + [tagged(i, FAR) for i in inputs])


def reduced_alphabet(inputs: Sequence[str], outputs: Sequence[str] = ()) -> Tuple[str, ...]:
    """The zipped alphabet once the close trace has been resolved against a system."""
    return tuple([tagged(a, ACTUAL) for a in (*inputs, *outputs)] + [tagged(i, FAR) for i in inputs])


def _xor(a: guards.Guard, b: guards.Guard) -> guards.Guard:
    return (a & ~b) | (~a & b)


@dataclass(frozen=True, eq=False)
class SimilarityRelation:
    name: str
    inputs: Tuple[str, ...]
    automaton: Nba
    limit_assumption_known: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'inputs', tuple(self.inputs))
        if set(self.automaton.alphabet) != set(zipped_alphabet(self.inputs)):
            raise AlphabetMismatchError(f'relation "{self.name}" is not over the zipped alphabet of {self.inputs}')


def _check_inputs(inputs: Sequence[str]):
    if not inputs:
        raise ValueError('a similarity relation needs at least one input')


def subset_relation(inputs: Sequence[str]) -> SimilarityRelation:
    """Every position where the close sequence differs from the actual one, the far one differs too."""
    _check_inputs(inputs)
    alphabet = zipped_alphabet(inputs)
    guards.declare(alphabet)
    guard = guards.true()
    for i in inputs:
        actual, close, far = (guards.var(tagged(i, tag)) for tag in TAGS)
        guard &= ~_xor(actual, close) | _xor(actual, far)
    automaton = Nba(alphabet, 1, {0}, {0}, (Edge(0, guard, 0),))
    return SimilarityRelation('subset', inputs, automaton, limit_assumption_known=False)


def full_relation_formula(inputs: Sequence[str]) -> LtlFormula:
    parts = []
    for i in inputs:
        actual, close, far = (Atom(tagged(i, tag)) for tag in TAGS)
        close_differs = Not(Iff(actual, close))
        parts.append(Globally(Implies(close_differs, Not(Iff(actual, far)))))
        parts.append(Implies(Globally(Eventually(close_differs)), Globally(Iff(close, far))))
    return conjunction(parts)


def full_relation(inputs: Sequence[str]) -> SimilarityRelation:
    """
    The subset relation, strengthened: an input on which the close sequence differs
    infinitely often must be identical in the close and far sequences.
    """
    _check_inputs(inputs)
    automaton = ltl_to_nba(full_relation_formula(inputs), zipped_alphabet(inputs))
    logger.debug('full relation over %d inputs has %d states', len(inputs), automaton.num_states)
    return SimilarityRelation('full', inputs, automaton, limit_assumption_known=True)


def custom_relation(path: str, inputs: Sequence[str]) -> SimilarityRelation:
    """Load a relation automaton from HOA; its APs must be the zipped inputs."""
    with open(path) as f:
        automaton = parse_hoa(f.read())
    expected = zipped_alphabet(inputs)
    if set(automaton.alphabet) != set(expected):
        raise AlphabetMismatchError(f'{path}: expected APs {list(expected)}, found {list(automaton.alphabet)}')

    relation = SimilarityRelation(f'custom:{path}', inputs, extend_alphabet(automaton, expected))
    for issue in relation_sanity_issues(relation):
        logger.warning('%s: %s', path, issue)
    return relation


relations_map: Dict[str, Callable[[Sequence[str]], SimilarityRelation]] = {
    'subset': subset_relation,
    'full': full_relation,
}


def make_relation(name: str, inputs: Sequence[str]) -> SimilarityRelation:
    if name in relations_map:
        return relations_map[name](inputs)
    if name.startswith('custom:') and len(name) > len('custom:'):
        return custom_relation(name[len('custom:'):], inputs)
    raise ValueError(f'{name} is not a supported similarity relation')


def lift_relation(relation: SimilarityRelation, outputs: Sequence[str]) -> Nba:
    """The relation over the alphabet with t0 and t1 outputs, which it leaves unconstrained."""
    clash = set(outputs) & set(relation.inputs)
    if clash:
        raise NameCollisionError(f'outputs clash with inputs: {sorted(clash)}')
    return extend_alphabet(relation.automaton, zipped_alphabet(relation.inputs, outputs))


def zip_lassos(actual: LassoWord, close: LassoWord, far: LassoWord) -> LassoWord:
    """Positionwise tagged union over a common unrolling of the three words."""
    words = (actual, close, far)
    stem = max(len(w.stem) for w in words)
    loop = math.lcm(*(len(w.loop) for w in words))
    unrolled = [w.unroll(stem, loop) for w in words]

    def letter(position):
        return frozenset(tagged(a, tag) for w, tag in zip(unrolled, TAGS) for a in w.letter(position))

    return LassoWord(tuple(letter(p) for p in range(stem)), tuple(letter(stem + p) for p in range(loop)))


def unzip(word: LassoWord, tag: str) -> LassoWord:
    """The component of a zipped word carrying the given tag."""
    def component(letter):
        return frozenset(ap for ap, t in map(untagged, letter) if t == tag)

    return LassoWord(tuple(map(component, word.stem)), tuple(map(component, word.loop)))


def tag_word(word: LassoWord, tag: str) -> LassoWord:
    return LassoWord(tuple(frozenset(tagged(a, tag) for a in letter) for letter in word.stem),
                     tuple(frozenset(tagged(a, tag) for a in letter) for letter in word.loop))


def pin_lasso(automaton: Nba, word: LassoWord, pinned: Iterable[str], renaming: Mapping[str, str]) -> Nba:
    """
    Fix the `pinned` symbols positionwise to the values they take in `word` and rename the rest.
    States are pairs (automaton state, position of the word), so the section follows the word's lasso shape.
    """
    pinned = tuple(pinned)
    leftover = set(automaton.alphabet) - set(pinned) - set(renaming)
    if leftover:
        raise AlphabetMismatchError(f'symbols neither pinned nor renamed: {sorted(leftover)}')
    alphabet = tuple(renaming[s] for s in automaton.alphabet if s in renaming)
    values = [{s: s in word.letter(p) for s in pinned} for p in range(len(word))]

    def successors(state):
        q, position = state
        following = word.successor(position)
        for edge in automaton.outgoing[q]:
            guard = guards.rename(guards.restrict(edge.guard, values[position]), renaming)
            yield guard, (edge.target, following)

    return build_nba(alphabet,
                     [(q, 0) for q in sorted(automaton.initial)],
                     successors,
                     lambda state: state[0] in automaton.accepting)


def relation_section(relation: SimilarityRelation, actual: LassoWord, far: LassoWord) -> Nba:
    """The close sequences π1 (over the plain inputs) with zip(actual, π1, far) in the relation."""
    inputs = relation.inputs
    empty = LassoWord((), (frozenset(),))
    word = zip_lassos(actual.project(inputs), empty, far.project(inputs))
    pinned = [tagged(i, tag) for tag in (ACTUAL, FAR) for i in inputs]
    return pin_lasso(relation.automaton, word, pinned, {tagged(i, CLOSE): i for i in inputs})


def _sample_words(inputs: Sequence[str]) -> List[LassoWord]:
    letters = [frozenset(c) for r in range(len(inputs) + 1) for c in itertools.combinations(inputs, r)]
    words = [LassoWord((), (letter,)) for letter in letters]
    if len(inputs) <= 2:
        words += [LassoWord((first,), (second,)) for first in letters for second in letters if first != second]
    return words


def relation_sanity_issues(relation: SimilarityRelation) -> List[str]:
    """
    Sample-based checks: the actual sequence is at least as close as any other one,
    and every sequence is as close as itself.
    """
    issues = []
    samples = _sample_words(relation.inputs)
    for actual in samples:
        for other in samples:
            if not accepts_lasso(relation.automaton, zip_lassos(actual, actual, other)):
                issues.append(f'actual sequence {actual} is not closest compared with {other}')
            if not accepts_lasso(relation.automaton, zip_lassos(actual, other, other)):
                issues.append(f'{other} is not as close as itself with respect to {actual}')
    return issues
