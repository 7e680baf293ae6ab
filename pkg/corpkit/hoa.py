"""
Reading and writing automata in the Hanoi Omega-Automata format (HOA v1).

Only the Büchi fragment is supported: state-based acceptance "1 Inf(0)",
explicit edge labels and no aliases.
"""
import logging
import re
import shlex

from typing import Dict, List, Optional, Tuple

import pyparsing as pp

from . import guards
from .automata import Edge, Nba
from .errors import HoaFormatError
from .guards import Guard

logger = logging.getLogger(__name__)

HEADER_ITEM = re.compile(r'^([A-Za-z_][A-Za-z0-9_-]*):\s*(.*)$')
STATE_LINE = re.compile(r'^State:\s*(?:\[[^\]]*\]\s*)?(\d+)\s*(?:"[^"]*"\s*)?(?:\{([\d\s]*)\})?\s*$')
EDGE_LINE = re.compile(r'^(?:\[([^\]]*)\])?\s*(\d+)\s*(\{[\d\s]*\})?\s*$')


def _label_grammar() -> pp.ParserElement:
    index = pp.Word(pp.nums).set_parse_action(lambda tokens: ('ap', int(tokens[0])))
    constant = pp.Literal('t').set_parse_action(lambda: ('const', True)) \
        | pp.Literal('f').set_parse_action(lambda: ('const', False))

    def negate(tokens):
        group = tokens[0]
        tree = group[-1]
        for _ in group[:-1]:
            tree = ('not', tree)
        return tree

    def chain(kind):
        return lambda tokens: (kind, list(tokens[0][0::2]))

    return pp.infix_notation(index | constant, [
        ('!', 1, pp.OpAssoc.RIGHT, negate),
        ('&', 2, pp.OpAssoc.LEFT, chain('and')),
        ('|', 2, pp.OpAssoc.LEFT, chain('or')),
    ]) + pp.StringEnd()


LABEL = _label_grammar()


def _to_guard(tree, aps: Tuple[str, ...]) -> Guard:
    kind = tree[0]
    if kind == 'const':
        return guards.true() if tree[1] else guards.false()
    if kind == 'ap':
        if tree[1] >= len(aps):
            raise HoaFormatError(f'label refers to undeclared AP {tree[1]}')
        return guards.var(aps[tree[1]])
    if kind == 'not':
        return ~_to_guard(tree[1], aps)
    operands = [_to_guard(operand, aps) for operand in tree[1]]
    result = operands[0]
    for operand in operands[1:]:
        result = result & operand if kind == 'and' else result | operand
    return result


def parse_label(text: str, aps: Tuple[str, ...]) -> Guard:
    try:
        tree = LABEL.parse_string(text.strip(), parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise HoaFormatError(f'malformed label [{text}]: {e.msg}') from None
    return _to_guard(tree, aps)


def emit_hoa(automaton: Nba, name: Optional[str] = None) -> str:
    """Serialize deterministically: states in index order, edges sorted by target then label text."""
    index = {symbol: str(i) for i, symbol in enumerate(automaton.alphabet)}

    def label(guard):
        return guards.to_text(guard, automaton.alphabet, name=index.get, true_text='t', false_text='f')

    lines = ['HOA: v1']
    if name is not None:
        lines.append(f'name: "{name}"')
    lines.append(f'States: {automaton.num_states}')
    lines += [f'Start: {q}' for q in sorted(automaton.initial)]
    lines.append(f'AP: {len(automaton.alphabet)}' + ''.join(f' "{symbol}"' for symbol in automaton.alphabet))
    lines += ['acc-name: Buchi',
              'Acceptance: 1 Inf(0)',
              'properties: trans-labels explicit-labels state-acc',
              '--BODY--']
    for q in range(automaton.num_states):
        lines.append(f'State: {q} {{0}}' if q in automaton.accepting else f'State: {q}')
        edges = sorted((edge.target, label(edge.guard)) for edge in automaton.outgoing[q])
        lines += [f'[{text}] {target}' for target, text in edges]
    lines.append('--END--')
    return '\n'.join(lines) + '\n'


def _parse_header(lines: List[str]) -> Dict[str, List[str]]:
    header: Dict[str, List[str]] = dict()
    for line in lines:
        match = HEADER_ITEM.match(line)
        if match is None:
            raise HoaFormatError(f'malformed header line: {line}')
        header.setdefault(match.group(1), []).append(match.group(2).strip())
    return header


def parse_hoa(text: str) -> Nba:
    """Read a Büchi automaton. AP names become the alphabet in declaration order."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith('HOA:'):
        raise HoaFormatError('missing "HOA:" header')
    if lines[0].split(':', 1)[1].strip() != 'v1':
        raise HoaFormatError(f'unsupported HOA version: {lines[0]}')
    try:
        body_start = lines.index('--BODY--')
        body_end = lines.index('--END--')
    except ValueError:
        raise HoaFormatError('missing --BODY-- or --END--') from None

    header = _parse_header(lines[1:body_start])
    if 'Alias' in header:
        raise HoaFormatError('aliases are not supported')

    acceptance = ' '.join(header.get('Acceptance', [''])[0].split())
    if acceptance != '1 Inf(0)':
        raise HoaFormatError(f'unsupported acceptance "{acceptance}", expected "1 Inf(0)"')
    if 'acc-name' in header and header['acc-name'][0].split()[0] != 'Buchi':
        raise HoaFormatError(f'unsupported acc-name "{header["acc-name"][0]}"')

    if any('&' in start for start in header.get('Start', [])):
        raise HoaFormatError('conjunctive initial states are not supported')
    try:
        ap_fields = shlex.split(header['AP'][0]) if 'AP' in header else ['0']
        declared = int(ap_fields[0])
        num_states = int(header['States'][0]) if 'States' in header else None
        initial = [int(start) for start in header.get('Start', [])]
    except ValueError as e:
        raise HoaFormatError(f'malformed header value: {e}') from None

    aps = tuple(ap_fields[1:])
    if declared != len(aps):
        raise HoaFormatError(f'AP count {ap_fields[0]} does not match {len(aps)} names')
    guards.declare(aps)

    accepting = set()
    edges = []
    current = None
    seen = set()
    for line in lines[body_start + 1:body_end]:
        state = STATE_LINE.match(line)
        if state is not None:
            current = int(state.group(1))
            seen.add(current)
            if state.group(2) is not None and '0' in state.group(2).split():
                accepting.add(current)
            continue

        edge = EDGE_LINE.match(line)
        if edge is None:
            raise HoaFormatError(f'malformed body line: {line}')
        if current is None:
            raise HoaFormatError(f'edge before the first state: {line}')
        if edge.group(1) is None:
            raise HoaFormatError(f'implicit labels are not supported: {line}')
        if edge.group(3) is not None:
            raise HoaFormatError(f'transition-based acceptance is not supported: {line}')
        edges.append(Edge(current, parse_label(edge.group(1), aps), int(edge.group(2))))

    if num_states is None:
        num_states = max(seen | {e.target for e in edges} | set(initial), default=-1) + 1
    try:
        automaton = Nba(aps, num_states, initial, accepting, edges)
    except ValueError as e:
        raise HoaFormatError(str(e)) from None
    logger.debug('parsed HOA automaton with %d states over %d APs', num_states, len(aps))
    return automaton
