import os
import tempfile
import unittest

from corpkit.automata import LassoWord, accepts_lasso, is_equivalent, is_subset, universal
from corpkit.errors import AlphabetMismatchError, InvalidTraceError, UnknownAtomError
from corpkit.hoa import parse_hoa
from corpkit.ltl import ltl_to_nba, parse_ltl
from corpkit.similarity import make_relation, zipped_alphabet
from corpkit.synthesis import (CauseSynthesizer, CauseVerdict, CheckVerdict, Direction, check_cause, compare_candidate,
                               synthesize_cause, system_product, tag_effect)
from corpkit.system import load_system, parse_trace

TEST_DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'test_data')


class ExampleSystemTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.system = load_system(os.path.join(TEST_DATA, 'fig1.json'))
        cls.trace = parse_trace('({x,e})^w')
        cls.subset = make_relation('subset', cls.system.base_inputs)
        cls.result = synthesize_cause(cls.system, cls.trace, parse_ltl('F e'), cls.subset)

    def test_eventually_effect(self):
        self.assertIs(self.result.verdict, CauseVerdict.CAUSE)
        self.assertTrue(self.result.has_cause)
        self.assertTrue(self.result.effect_on_trace)
        self.assertEqual(self.result.cause.alphabet, ('x', 'y'))
        self.assertTrue(is_equivalent(self.result.cause, ltl_to_nba(parse_ltl('F x'), ['x', 'y'])))

    def test_co_cause_is_the_complement(self):
        self.assertTrue(is_equivalent(self.result.co_cause, ltl_to_nba(parse_ltl('G !x'), ['x', 'y'])))

    def test_stage_report(self):
        for stage in ('relation', 'effect', 'intersection', 'product', 'complement', 'cause', 'system'):
            self.assertIn(stage, self.result.sizes)
        self.assertEqual(self.result.sizes['system'], 4)
        self.assertTrue(all(seconds >= 0 for seconds in self.result.timings.values()))

    def test_recurring_effect(self):
        result = synthesize_cause(self.system, self.trace, parse_ltl('G F e'), self.subset)
        self.assertTrue(is_equivalent(result.cause, ltl_to_nba(parse_ltl('G F x'), ['x', 'y'])))

    def test_full_relation(self):
        result = synthesize_cause(self.system, self.trace, parse_ltl('F e'), make_relation('full', ['x', 'y']))
        self.assertTrue(is_equivalent(result.cause, ltl_to_nba(parse_ltl('F x'), ['x', 'y'])))

    def test_effect_as_automaton(self):
        effect = ltl_to_nba(parse_ltl('F e'), ['e'])
        result = synthesize_cause(self.system, self.trace, effect, self.subset)
        self.assertTrue(is_equivalent(result.cause, self.result.cause))

    def test_effect_not_on_trace(self):
        result = synthesize_cause(self.system, self.trace, parse_ltl('G !e'), self.subset)
        self.assertFalse(result.effect_on_trace)
        self.assertIs(result.verdict, CauseVerdict.NO_CAUSE)

    def test_contingencies_keep_actual_inputs(self):
        result = synthesize_cause(self.system, self.trace, parse_ltl('F e'), self.subset, contingencies=True)
        self.assertTrue(result.has_cause)
        self.assertTrue(accepts_lasso(result.cause, LassoWord((), (frozenset({'x'}),))))
        self.assertEqual(result.sizes['system'], 4 * 1)

    def test_stemless_trace(self):
        unrolled = parse_trace('{x,e};({x,e})^w')
        self.assertEqual(self.trace.stem, ())
        self.assertEqual(len(unrolled.stem), 1)
        result = synthesize_cause(self.system, unrolled, parse_ltl('F e'), self.subset)
        self.assertTrue(is_equivalent(result.cause, self.result.cause))
        self.assertTrue(is_equivalent(result.co_cause, self.result.co_cause))
        self.assertTrue(accepts_lasso(self.result.cause, LassoWord((), (frozenset({'x'}),))))

    def test_invalid_inputs(self):
        with self.assertRaises(UnknownAtomError):
            synthesize_cause(self.system, self.trace, parse_ltl('F z'), self.subset)
        with self.assertRaises(InvalidTraceError):
            synthesize_cause(self.system, parse_trace('({x})^w'), parse_ltl('F e'), self.subset)
        with self.assertRaises(AlphabetMismatchError):
            synthesize_cause(self.system, self.trace, parse_ltl('F e'), make_relation('subset', ['x']))


class CandidateTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.system = load_system(os.path.join(TEST_DATA, 'fig1.json'))
        cls.trace = parse_trace('({x,e})^w')
        cls.result = synthesize_cause(cls.system, cls.trace, parse_ltl('F e'), make_relation('subset', ['x', 'y']))

    def test_exact_candidate(self):
        checked = compare_candidate(self.result, parse_ltl('F x'))
        self.assertIs(checked.verdict, CheckVerdict.IS_CAUSE)
        self.assertIsNone(checked.witness)

    def test_too_small_candidate(self):
        checked = compare_candidate(self.result, parse_ltl('G x'))
        self.assertIs(checked.verdict, CheckVerdict.NOT_CAUSE)
        self.assertIs(checked.direction, Direction.TOO_SMALL)
        self.assertTrue(accepts_lasso(self.result.cause, checked.witness))
        self.assertFalse(accepts_lasso(ltl_to_nba(parse_ltl('G x'), ['x', 'y']), checked.witness))

    def test_too_large_candidate(self):
        checked = compare_candidate(self.result, parse_ltl('y | F x'))
        self.assertIs(checked.verdict, CheckVerdict.NOT_CAUSE)
        self.assertIs(checked.direction, Direction.TOO_LARGE)
        self.assertFalse(accepts_lasso(self.result.cause, checked.witness))

    def test_synthesized_cause_checks_against_itself(self):
        self.assertIs(compare_candidate(self.result, self.result.cause).verdict, CheckVerdict.IS_CAUSE)

    def test_candidate_over_outputs(self):
        with self.assertRaises(UnknownAtomError):
            compare_candidate(self.result, parse_ltl('F e'))

    def test_check_cause(self):
        checked = check_cause(self.system, self.trace, parse_ltl('F e'), make_relation('subset', ['x', 'y']),
                              parse_ltl('F x'))
        self.assertIs(checked.verdict, CheckVerdict.IS_CAUSE)


class FaultySystemTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.system = load_system(os.path.join(TEST_DATA, 'fig4.json'))
        cls.trace = parse_trace('{i2};{};{i0,o4};({i2,o4})^w')
        cls.effect = parse_ltl('!((i2 U i0) <-> G F o4)')
        cls.relation = make_relation('subset', cls.system.base_inputs)

    def test_cause(self):
        result = synthesize_cause(self.system, self.trace, self.effect, self.relation)
        self.assertTrue(result.has_cause)
        expected = ltl_to_nba(parse_ltl('!i0 & X(!i0 & !i2 & X i0)'), self.system.base_inputs)
        self.assertTrue(is_equivalent(result.cause, expected))
        self.assertIs(compare_candidate(result, result.cause).verdict, CheckVerdict.IS_CAUSE)

    def test_contingencies(self):
        plain = synthesize_cause(self.system, self.trace, self.effect, self.relation)
        result = synthesize_cause(self.system, self.trace, self.effect, self.relation, contingencies=True)
        self.assertTrue(result.has_cause)
        self.assertEqual(result.sizes['system'], 2 * 4)
        self.assertTrue(accepts_lasso(result.cause, self.trace.project(self.system.base_inputs)))
        self.assertTrue(is_subset(result.cause, plain.cause))


class NoCauseTestCase(unittest.TestCase):

    def test_fork(self):
        system = load_system(os.path.join(TEST_DATA, 'fork.json'))
        result = synthesize_cause(system, parse_trace('({e})^w'), parse_ltl('F e'), make_relation('subset', ['a']))
        self.assertIs(result.verdict, CauseVerdict.NO_CAUSE)
        self.assertTrue(result.effect_on_trace)
        checked = compare_candidate(result, parse_ltl('true'))
        self.assertIs(checked.verdict, CheckVerdict.NO_CAUSE_EXISTS)


class PipelineStepsTestCase(unittest.TestCase):

    def test_tag_effect(self):
        tagged = tag_effect(ltl_to_nba(parse_ltl('F e'), ['e']), ['x'], ['e'])
        self.assertEqual(tagged.alphabet, zipped_alphabet(['x'], ['e']))
        with self.assertRaises(AlphabetMismatchError):
            tag_effect(ltl_to_nba(parse_ltl('F z'), ['z']), ['x'], ['e'])

    def test_system_product_alphabet(self):
        system = load_system(os.path.join(TEST_DATA, 'fig1.json'))
        with self.assertRaises(AlphabetMismatchError):
            system_product(universal(zipped_alphabet(['x'], ['e'])), system)


class CauseSynthesizerTestCase(unittest.TestCase):

    def setUp(self):
        system = load_system(os.path.join(TEST_DATA, 'fig1.json'))
        self.synthesizer = CauseSynthesizer(system, parse_trace('({x,e})^w'))
        self.workdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.workdir.cleanup()

    def test_invalid_relation(self):
        with self.assertRaises(ValueError):
            self.synthesizer.relation = 'closest'

    def test_invalid_contingencies(self):
        with self.assertRaises(ValueError):
            self.synthesizer.contingencies = 'yes'

    def test_dump_before_synthesis(self):
        with self.assertRaises(RuntimeError):
            self.synthesizer.dump_cause(os.path.join(self.workdir.name, 'cause.hoa'))

    def test_synthesize_and_dump(self):
        self.synthesizer.relation = 'full'
        self.assertEqual(self.synthesizer.relation.name, 'full')
        result = self.synthesizer.synthesize(parse_ltl('F e'))
        path = os.path.join(self.workdir.name, 'cause.hoa')
        self.synthesizer.dump_cause(path)
        with open(path) as f:
            self.assertTrue(is_equivalent(parse_hoa(f.read()), result.cause))

    def test_check(self):
        checked = self.synthesizer.check(parse_ltl('F e'), parse_ltl('G x'))
        self.assertIs(checked.verdict, CheckVerdict.NOT_CAUSE)
        self.assertIs(self.synthesizer.result, checked.result)


if __name__ == '__main__':
    unittest.main()
