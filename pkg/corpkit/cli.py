import json
import logging
import os
import sys

from argparse import ArgumentParser, ArgumentTypeError, Namespace
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

from . import __version__
from .automata import Nba, extend_alphabet
from .benchmarks import DEFAULT_INSTANCES, parse_instances, run_bench
from .errors import CorpkitError
from .hoa import emit_hoa, parse_hoa
from .ltl import LtlFormula, atoms, ltl_to_nba, parse_ltl, to_text
from .oracle import BoundedUniverse, Status, run_checks
from .similarity import make_relation, relations_map
from .synthesis import CauseResult, CheckVerdict, compare_candidate, synthesize_cause
from .system import load_system, parse_trace

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CAUSE = 2
EXIT_NOT_CAUSE = 3
EXIT_VERIFY_FAIL = 4
EXIT_VERIFY_INCONCLUSIVE = 5

REPORT_VERSION = 1
LOG_LEVELS = {'error': logging.ERROR, 'info': logging.INFO, 'debug': logging.DEBUG}


def valid_file(x: str) -> str:
    """
    Check the file exists
    :param x: a path
    :return: the path if exists; raise an ArgumentTypeError otherwise
    """
    if not os.path.isfile(x):
        raise ArgumentTypeError(f'{x} is not a file')

    return x


def valid_relation(x: str) -> str:
    """
    Check x names a similarity relation
    :param x: "subset", "full" or "custom:<path to a HOA file>"
    :return: x if valid; raise an ArgumentTypeError otherwise
    """
    if x in relations_map:
        return x
    if x.startswith('custom:'):
        valid_file(x[len('custom:'):])
        return x

    raise ArgumentTypeError(f'{x} is not a valid relation. Possible choices [subset, full, custom:<path>]')


def valid_bound(x: str) -> int:
    """
    Check x is a non-negative integer
    :param x: a string
    :return: the integer; raise an ArgumentTypeError otherwise
    """
    if not x.isdigit():
        raise ArgumentTypeError(f'{x} is not a non-negative integer')

    return int(x)


def valid_jobs(x: str) -> int:
    """
    Check x is a positive number of workers, or -1 for one per CPU
    :param x: a string
    :return: the number of jobs; raise an ArgumentTypeError otherwise
    """
    if x == '-1':
        return -1
    if not x.isdigit() or int(x) == 0:
        raise ArgumentTypeError(f'{x} is not a valid number of jobs')

    return int(x)


def valid_timeout(x: str) -> float:
    """
    Check x is a positive number of seconds
    :param x: a string
    :return: the seconds as a float; raise an ArgumentTypeError otherwise
    """
    try:
        seconds = float(x)
    except ValueError:
        raise ArgumentTypeError(f'{x} is not a number of seconds') from None
    if seconds <= 0:
        raise ArgumentTypeError('the timeout must be positive')

    return seconds


def valid_instances(x: str) -> str:
    """
    Check x selects benchmark instances, e.g. "spurious:1-4,full:2"
    :param x: comma-separated family:n or family:n-m items
    :return: x if valid; raise an ArgumentTypeError otherwise
    """
    try:
        parse_instances(x)
    except ValueError as e:
        raise ArgumentTypeError(str(e)) from None

    return x


@dataclass(frozen=True)
class RunConfig:
    command: str
    system: Optional[str] = None
    trace: Optional[str] = None
    effect: Optional[str] = None
    candidate: Optional[str] = None
    relation: str = 'subset'
    contingencies: bool = False
    out: Optional[str] = None
    stem_bound: int = 3
    loop_bound: int = 2
    timeout: float = 60
    jobs: int = 1
    instances: str = DEFAULT_INSTANCES
    format: str = 'text'

    @classmethod
    def from_args(cls, args: Namespace) -> 'RunConfig':
        fields = {name: getattr(args, name) for name in cls.__dataclass_fields__ if getattr(args, name, None) is not None}
        return cls(**fields)


def _add_problem_arguments(parser, with_candidate: str = 'none'):
    parser.add_argument('--system',
                        required=True,
                        type=valid_file,
                        help='the path to the JSON file describing the system')

    parser.add_argument('--trace',
                        required=True,
                        help='the actual trace, as a literal such as "{x};({x,e})^w" or the path to a file holding one')

    parser.add_argument('--effect',
                        required=True,
                        help='the effect: an LTL formula, a file holding one, or a .hoa automaton file')

    parser.add_argument('--relation',
                        default='subset',
                        type=valid_relation,
                        help='the similarity relation. Possible choices [subset, full, custom:<path to HOA>]')

    parser.add_argument('--contingencies',
                        action='store_true',
                        default=False,
                        help='let counterfactual traces reset outputs to their values on the actual trace')

    if with_candidate != 'none':
        parser.add_argument('--candidate',
                            required=with_candidate == 'required',
                            help='the cause candidate: an LTL formula over the inputs, a file holding one, or a .hoa file')

    parser.add_argument('--format',
                        default='text',
                        choices=['text', 'json'],
                        help='the report format')


def set_synthesize_parser(subparsers):
    parser = subparsers.add_parser('synthesize', help='Synthesize the cause of an effect on a trace')
    _add_problem_arguments(parser)
    parser.add_argument('--out',
                        help='where to write the cause automaton (HOA); printed to stdout when omitted')


def set_check_parser(subparsers):
    parser = subparsers.add_parser('check', help='Check whether a candidate is the cause of an effect on a trace')
    _add_problem_arguments(parser, with_candidate='required')


def set_verify_parser(subparsers):
    parser = subparsers.add_parser('verify', help='Validate a given or synthesized cause on a bounded set of lassos')
    _add_problem_arguments(parser, with_candidate='optional')
    parser.add_argument('--stem-bound',
                        dest='stem_bound',
                        default=3,
                        type=valid_bound,
                        help='the longest stem of the enumerated input sequences')
    parser.add_argument('--loop-bound',
                        dest='loop_bound',
                        default=2,
                        type=valid_bound,
                        help='the longest loop of the enumerated input sequences')


def set_translate_parser(subparsers):
    parser = subparsers.add_parser('translate', help='Translate an LTL formula into a Büchi automaton (HOA)')
    parser.add_argument('--effect',
                        required=True,
                        help='the formula to translate, or a file holding one')
    parser.add_argument('--system',
                        type=valid_file,
                        help='take the atomic propositions from this system instead of the formula')
    parser.add_argument('--out',
                        help='where to write the automaton; printed to stdout when omitted')


def set_bench_parser(subparsers):
    parser = subparsers.add_parser('bench', help='Run the arbiter benchmark')
    parser.add_argument('--instances',
                        default=DEFAULT_INSTANCES,
                        type=valid_instances,
                        help=f'the instances to run (default "{DEFAULT_INSTANCES}")')
    parser.add_argument('--timeout',
                        default=60,
                        type=valid_timeout,
                        help='seconds allowed per instance and relation')
    parser.add_argument('--jobs',
                        default=1,
                        type=valid_jobs,
                        help='the number of worker processes (-1 for one per CPU)')
    parser.add_argument('--format',
                        default='text',
                        choices=['text', 'json'],
                        help='the report format')
    parser.add_argument('--out',
                        help='also write the report to this file')


def get_parser():
    description = 'Synthesize and check temporal causes of effects observed on traces of reactive systems'

    parser = ArgumentParser(prog='corpkit', description=description)
    parser.add_argument('-v', '--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command')

    set_synthesize_parser(subparsers)
    set_check_parser(subparsers)
    set_verify_parser(subparsers)
    set_translate_parser(subparsers)
    set_bench_parser(subparsers)

    return parser


def _read_argument(value: str) -> str:
    if os.path.isfile(value):
        with open(value) as f:
            return f.read().strip()
    return value


def _load_property(value: str, aps: Optional[Sequence[str]]) -> Union[LtlFormula, Nba]:
    if value.endswith('.hoa') and os.path.isfile(value):
        with open(value) as f:
            return parse_hoa(f.read())
    return parse_ltl(_read_argument(value), ap_universe=aps)


def _load_problem(cfg: RunConfig):
    system = load_system(cfg.system)
    trace = parse_trace(_read_argument(cfg.trace))
    effect = _load_property(cfg.effect, system.aps)
    relation = make_relation(cfg.relation, system.base_inputs)
    return system, trace, effect, relation


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, 'w') as f:
            f.write(text)
    else:
        print(text, end='' if text.endswith('\n') else '\n')


def _print_report(report: Dict, cfg: RunConfig, lines: List[str]):
    if cfg.format == 'json':
        print(json.dumps({'report_version': REPORT_VERSION, 'command': cfg.command, **report}, sort_keys=True, indent=2))
    else:
        print('\n'.join(lines))


def _synthesis_report(result: CauseResult):
    report = {
        'verdict': result.verdict.value,
        'effect_on_trace': result.effect_on_trace,
        'sizes': result.sizes,
        'timings': {stage: round(seconds, 6) for stage, seconds in result.timings.items()},
    }
    lines = [f'verdict: {result.verdict.value}']
    if not result.effect_on_trace:
        lines.append('diagnostic: effect not present on trace')
    lines += [f'  {stage:<12} {size:>6} states' for stage, size in result.sizes.items()]
    return report, lines


def synthesize(cfg: RunConfig) -> int:
    system, trace, effect, relation = _load_problem(cfg)
    result = synthesize_cause(system, trace, effect, relation, cfg.contingencies)
    report, lines = _synthesis_report(result)

    if result.has_cause:
        hoa = emit_hoa(result.cause, name='cause')
        if cfg.out:
            _emit(hoa, cfg.out)
            report['cause_file'] = cfg.out
            lines.append(f'cause written to {cfg.out}')
        elif cfg.format == 'json':
            report['cause_hoa'] = hoa
        else:
            lines.append(hoa.rstrip('\n'))

    _print_report(report, cfg, lines)
    return EXIT_OK if result.has_cause else EXIT_NO_CAUSE


def check(cfg: RunConfig) -> int:
    system, trace, effect, relation = _load_problem(cfg)
    candidate = _load_property(cfg.candidate, system.base_inputs)
    result = synthesize_cause(system, trace, effect, relation, cfg.contingencies)
    checked = compare_candidate(result, candidate)

    report, lines = _synthesis_report(result)
    report['check'] = checked.verdict.value
    lines.append(f'check: {checked.verdict.value}')
    if checked.direction is not None:
        report['direction'] = checked.direction.value
        report['witness'] = str(checked.witness)
        lines.append(f'{checked.direction.value}, witness {checked.witness}')

    _print_report(report, cfg, lines)
    return {
        CheckVerdict.IS_CAUSE: EXIT_OK,
        CheckVerdict.NOT_CAUSE: EXIT_NOT_CAUSE,
        CheckVerdict.NO_CAUSE_EXISTS: EXIT_NO_CAUSE,
    }[checked.verdict]


def verify(cfg: RunConfig) -> int:
    system, trace, effect, relation = _load_problem(cfg)
    co_cause = None
    if cfg.candidate:
        candidate = _load_property(cfg.candidate, system.base_inputs)
        cause = ltl_to_nba(candidate, system.base_inputs) if isinstance(candidate, LtlFormula) \
            else extend_alphabet(candidate, system.base_inputs)
    else:
        result = synthesize_cause(system, trace, effect, relation, cfg.contingencies)
        cause, co_cause = result.cause, result.co_cause

    universe = BoundedUniverse(system.base_inputs, cfg.stem_bound, max(cfg.loop_bound, 1))
    verdicts = run_checks(system, trace, cause, effect, relation, universe, cfg.contingencies, co_cause)

    report = {'checks': [{'check': v.check,
                          'status': v.status.value,
                          'checked': v.checked,
                          'detail': v.detail,
                          'witness': [str(w) for w in v.witness] if v.witness else None} for v in verdicts]}
    _print_report(report, cfg, [str(v) for v in verdicts])

    statuses = {v.status for v in verdicts}
    if Status.FAIL in statuses:
        return EXIT_VERIFY_FAIL
    if statuses == {Status.PASS}:
        return EXIT_OK
    return EXIT_VERIFY_INCONCLUSIVE


def translate(cfg: RunConfig) -> int:
    aps = load_system(cfg.system).aps if cfg.system else None
    formula = parse_ltl(_read_argument(cfg.effect), ap_universe=aps)
    universe = aps if aps is not None else sorted(atoms(formula))
    _emit(emit_hoa(ltl_to_nba(formula, universe), name=to_text(formula)), cfg.out)
    return EXIT_OK


def bench(cfg: RunConfig) -> int:
    report = run_bench(parse_instances(cfg.instances), timeout=cfg.timeout, jobs=cfg.jobs)
    if cfg.format == 'json':
        rows = json.loads(report.to_json(orient='records'))
        text = json.dumps({'report_version': REPORT_VERSION, 'command': 'bench', 'rows': rows}, sort_keys=True, indent=2)
    else:
        text = report.to_string(index=False, na_rep='TO')
    print(text)
    if cfg.out:
        _emit(text + '\n', cfg.out)
    return EXIT_OK


commands_map = {
    'synthesize': synthesize,
    'check': check,
    'verify': verify,
    'translate': translate,
    'bench': bench,
}


def configure_logging():
    level = LOG_LEVELS.get(os.environ.get('CORPKIT_LOG', 'error').lower(), logging.ERROR)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s', stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None):
    parser = get_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        sys.exit(EXIT_ERROR)

    configure_logging()
    cfg = RunConfig.from_args(args)
    try:
        code = commands_map[cfg.command](cfg)
    except (CorpkitError, OSError) as e:
        print('ERROR:', e, file=sys.stderr)
        code = EXIT_ERROR

    sys.exit(code)
