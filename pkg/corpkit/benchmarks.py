"""
Arbiter benchmark: synthesize causes on the all-requests trace of each
arbiter instance under both built-in relations and tabulate times, cause
sizes and whether the expected cause language was found.
"""
import logging
import re
import signal
import time

from contextlib import contextmanager
from typing import Dict, Iterable, List, NamedTuple, Sequence

import numpy as np
import pandas as pd

from joblib import Parallel, delayed

from . import guards
from .arbiters import bench_effects, generators_map
from .errors import SynthesisTimeout
from .ltl import LtlFormula, to_text
from .similarity import make_relation
from .synthesis import CheckVerdict, compare_candidate, synthesize_cause
from .system import all_requests_trace

logger = logging.getLogger(__name__)

DEFAULT_INSTANCES = 'spurious:1-4,unfair:2-4,full:1-3'
RELATIONS = ('subset', 'full')


class BenchInstance(NamedTuple):
    family: str
    size: int

    def __str__(self):
        return f'{self.family.capitalize()} {self.size}'


def parse_instances(text: str) -> List[BenchInstance]:
    """Read a selection such as "spurious:1-4,unfair:2,full:1-3"."""
    instances = []
    for item in filter(None, (part.strip() for part in text.split(','))):
        match = re.fullmatch(r'([a-z]+):(\d+)(?:-(\d+))?', item)
        if match is None:
            raise ValueError(f'{item} is not a valid instance range (expected family:n or family:n-m)')
        family, low = match.group(1), int(match.group(2))
        high = int(match.group(3)) if match.group(3) else low
        if family not in generators_map:
            raise ValueError(f'{family} is not a supported arbiter family')
        if low < 1 or high < low:
            raise ValueError(f'{item} is an empty range')
        instances += [BenchInstance(family, n) for n in range(low, high + 1)]
    return instances


@contextmanager
def time_limit(seconds: float):
    """
    Raise SynthesisTimeout in the current (main) thread after `seconds`.

    The alarm can interrupt the BDD manager mid-operation. Its nodes stay consistent,
    but nodes referenced by the interrupted frames may leak until the process ends and
    dd may print "Exception ignored" notes while they are collected. Runs with more than
    one job keep this out of the calling process.
    """
    def expire(signum, frame):
        raise SynthesisTimeout(f'timed out after {seconds} seconds')

    previous = signal.signal(signal.SIGALRM, expire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, previous)


def run_instance(instance: BenchInstance, effect: LtlFormula, expected: LtlFormula, relation: str, timeout: float) -> Dict:
    system = generators_map[instance.family](instance.size)
    row = {
        'instance': str(instance),
        'states': len(system.states),
        'effect': to_text(effect),
        'expected': to_text(expected),
        'relation': relation,
    }
    try:
        with time_limit(timeout):
            start = time.perf_counter()
            trace = all_requests_trace(system)
            result = synthesize_cause(system, trace, effect, make_relation(relation, system.base_inputs))
            seconds = time.perf_counter() - start
            matches = compare_candidate(result, expected).verdict is CheckVerdict.IS_CAUSE
    except SynthesisTimeout:
        logger.info('%s / %s / %s: timeout', instance, row['effect'], relation)
        return {**row, 'seconds': np.nan, 'cause_states': np.nan, 'matches': np.nan}
    finally:
        guards.clear_caches()

    logger.info('%s / %s / %s: %.2fs, %d cause states, expected cause %s',
                instance, row['effect'], relation, seconds, result.cause.num_states, 'found' if matches else 'missed')
    return {**row, 'seconds': seconds, 'cause_states': result.cause.num_states, 'matches': matches}


def run_bench(instances: Iterable[BenchInstance],
              relations: Sequence[str] = RELATIONS,
              timeout: float = 60,
              jobs: int = 1) -> pd.DataFrame:
    """One row per instance and effect; seconds, cause size and match per relation. Timeouts are NaN."""
    rows = [(instance, effect, expected) for instance in instances for effect, expected in bench_effects(instance.family)]
    tasks = [(order, *row, relation) for order, row in enumerate(rows) for relation in relations]

    records = Parallel(n_jobs=jobs)(
        delayed(run_instance)(instance, effect, expected, relation, timeout)
        for _, instance, effect, expected, relation in tasks)
    frame = pd.DataFrame(records)
    frame['order'] = [task[0] for task in tasks]

    report = frame.pivot(index=['order', 'instance', 'states', 'effect', 'expected'],
                         columns='relation',
                         values=['seconds', 'cause_states', 'matches'])
    report.columns = [f'{value}_{relation}' for value, relation in report.columns]
    return report.reset_index().drop(columns='order')


def completed(report: pd.DataFrame, relation: str) -> set:
    """Rows (instance, effect) that finished within the timeout under a relation."""
    done = report[report[f'seconds_{relation}'].notna()]
    return set(zip(done['instance'], done['effect']))
