"""
Arbiter benchmark families. Clients raise requests r_k and the arbiter answers
with mutually exclusive grants g_k.

- spurious: grants round robin, ignoring requests;
- unfair: serves the prioritized client whenever it asks, the others round robin;
- full: grants only what has been requested and not yet granted, round robin.
"""
import logging

from collections import deque
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from . import guards
from .ltl import Atom, Eventually, Globally, LtlFormula, Not, TrueFormula
from .system import System, Transition

logger = logging.getLogger(__name__)


def _check_size(n: int):
    if n < 1:
        raise ValueError(f'an arbiter needs at least one client, got {n}')


def make_spurious(n: int) -> System:
    _check_size(n)
    inputs = [f'r_{k}' for k in range(n)]
    outputs = [f'g_{k}' for k in range(n)]
    states = [f'grant_{k}' for k in range(n)]
    guards.declare(inputs)
    transitions = [Transition(states[k], guards.true(), states[(k + 1) % n]) for k in range(n)]
    labels = {states[k]: {outputs[k]} for k in range(n)}
    return System(states, states[0], inputs, outputs, labels, transitions)


def make_unfair(n: int) -> System:
    """
    Client 'prio' wins every step it requests. Otherwise the grant goes to the next
    regular client in turn, whether it asked or not.
    """
    _check_size(n)
    regular = n - 1
    inputs = ['r_prio'] + [f'r_{k}' for k in range(regular)]
    outputs = ['g_prio'] + [f'g_{k}' for k in range(regular)]
    guards.declare(inputs)
    prio = guards.var('r_prio')

    if regular == 0:
        labels = {'prio': {'g_prio'}, 'idle': set()}
        transitions = [Transition(s, guard, t) for s in ('prio', 'idle') for guard, t in ((prio, 'prio'), (~prio, 'idle'))]
        return System(['prio', 'idle'], 'prio', inputs, outputs, labels, transitions)

    states = [f'{kind}{k}' for k in range(regular) for kind in ('prio', 'serve')]
    labels = dict()
    transitions = []
    for k in range(regular):
        labels[f'prio{k}'] = {'g_prio'}
        labels[f'serve{k}'] = {f'g_{k}'}
        following = (k + 1) % regular
        transitions += [
            Transition(f'prio{k}', prio, f'prio{k}'),
            Transition(f'prio{k}', ~prio, f'serve{k}'),
            Transition(f'serve{k}', prio, f'prio{following}'),
            Transition(f'serve{k}', ~prio, f'serve{following}'),
        ]
    return System(states, 'prio0', inputs, outputs, labels, transitions)


def make_full(n: int) -> System:
    """
    Requests stay pending until granted; each step grants the first pending client
    at or after the turn pointer, which then moves past it.
    """
    _check_size(n)
    inputs = [f'r_{k}' for k in range(n)]
    outputs = [f'g_{k}' for k in range(n)]
    guards.declare(inputs)

    State = Tuple[FrozenSet[int], int, Optional[int]]

    def step(state: State, requests: FrozenSet[int]) -> State:
        pending, turn, _ = state
        pending = pending | requests
        for offset in range(n):
            k = (turn + offset) % n
            if k in pending:
                return pending - {k}, (k + 1) % n, k
        return pending, turn, None

    initial: State = (frozenset(), 0, None)
    names: Dict[State, str] = {initial: 's0'}
    rows: Dict[Tuple[str, str], guards.Guard] = dict()
    queue = deque([initial])
    while queue:
        state = queue.popleft()
        for assignment in guards.assignments(inputs):
            requests = frozenset(k for k in range(n) if assignment[inputs[k]])
            following = step(state, requests)
            if following not in names:
                names[following] = f's{len(names)}'
                queue.append(following)
            pair = (names[state], names[following])
            cube = guards.cube(assignment)
            rows[pair] = rows[pair] | cube if pair in rows else cube

    labels = {name: set() if state[2] is None else {outputs[state[2]]} for state, name in names.items()}
    transitions = [Transition(source, guard, target) for (source, target), guard in rows.items()]
    logger.debug('full arbiter with %d clients has %d states', n, len(names))
    return System(list(names.values()), 's0', inputs, outputs, labels, transitions)


generators_map: Dict[str, Callable[[int], System]] = {
    'spurious': make_spurious,
    'unfair': make_unfair,
    'full': make_full,
}


def bench_effects(family: str) -> List[Tuple[LtlFormula, LtlFormula]]:
    """Effects of a family's benchmark rows, each with the cause it is expected to yield."""
    g0, r0 = Atom('g_0'), Atom('r_0')
    if family == 'spurious':
        return [(Eventually(g0), TrueFormula())]
    if family == 'unfair':
        return [(Globally(Not(g0)), Globally(Atom('r_prio')))]
    if family == 'full':
        return [(Eventually(g0), Eventually(r0)),
                (Globally(Eventually(g0)), Globally(Eventually(r0)))]
    raise ValueError(f'{family} is not a supported arbiter family')
