import os
import unittest

from hypothesis import given, settings, strategies as st

from corpkit.arbiters import bench_effects, generators_map
from corpkit.automata import LassoWord, accepts_lasso, empty_automaton, is_equivalent, universal
from corpkit.ltl import ltl_to_nba, parse_ltl, to_text
from corpkit.oracle import (BoundedUniverse, Changes, Status, changes, check_cf, check_downward_closed, check_pc1,
                            check_pc2, check_sat, enumerate_lassos, run_checks)
from corpkit.similarity import make_relation
from corpkit.synthesis import synthesize_cause
from corpkit.system import all_requests_trace, load_system, parse_trace

TEST_DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'test_data')
INPUTS = ('x', 'y')


def lasso(stem, loop):
    return LassoWord(tuple(frozenset(letter) for letter in stem), tuple(frozenset(letter) for letter in loop))


letters = st.frozensets(st.sampled_from(['x', 'y']))
words = st.builds(LassoWord, st.lists(letters, max_size=3).map(tuple), st.lists(letters, min_size=1, max_size=3).map(tuple))


class UniverseTestCase(unittest.TestCase):

    def test_single_loop_letter(self):
        universe = BoundedUniverse(('a',), stem_bound=0, loop_bound=1)
        self.assertEqual(list(enumerate_lassos(universe)), [lasso([], [set()]), lasso([], [{'a'}])])

    def test_counts(self):
        universe = BoundedUniverse(('a',), stem_bound=1, loop_bound=1)
        self.assertEqual(len(list(enumerate_lassos(universe))), 6)
        universe = BoundedUniverse(INPUTS, stem_bound=2, loop_bound=2)
        self.assertEqual(len(list(enumerate_lassos(universe))), universe.count())

    def test_invalid_bounds(self):
        with self.assertRaises(ValueError):
            BoundedUniverse(('x',), stem_bound=0, loop_bound=0)
        with self.assertRaises(ValueError):
            BoundedUniverse(('x',), stem_bound=-1, loop_bound=1)


class ChangesTestCase(unittest.TestCase):

    def test_single_change(self):
        self.assertEqual(changes(lasso([{'x'}], [set()]), lasso([], [set()])).unrolled(10), frozenset({('x', 0)}))

    def test_no_change(self):
        word = lasso([{'x'}], [{'y'}, set()])
        found = changes(word, word)
        self.assertEqual(found.transient, frozenset())
        self.assertEqual(found.periodic, frozenset())

    def test_periodic_change(self):
        found = changes(lasso([], [{'x'}]), lasso([], [{'x'}, {'x', 'y'}]))
        self.assertEqual(found.periodic, frozenset({('y', 1)}))
        self.assertEqual(found.unrolled(6), frozenset({('y', 1), ('y', 3), ('y', 5)}))

    def test_expand(self):
        found = Changes(0, 1, periodic=frozenset({('x', 0)}))
        self.assertEqual(found.expand(1, 2), Changes(1, 2, frozenset({('x', 0)}), frozenset({('x', 0), ('x', 1)})))
        with self.assertRaises(ValueError):
            Changes(1, 2).expand(0, 2)

    @settings(max_examples=100, deadline=None)
    @given(words, words, words)
    def test_subset_agrees_with_unrolling(self, actual, first, second):
        mine, theirs = changes(actual, first), changes(actual, second)
        length = 2 * (max(mine.offset, theirs.offset) + mine.period * theirs.period)
        self.assertEqual(mine.issubset(theirs), mine.unrolled(length) <= theirs.unrolled(length))


class ExampleChecksTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.system = load_system(os.path.join(TEST_DATA, 'fig1.json'))
        cls.trace = parse_trace('({x,e})^w')
        cls.effect = parse_ltl('F e')
        cls.relation = make_relation('subset', INPUTS)
        cls.cause = ltl_to_nba(parse_ltl('F x'), INPUTS)
        cls.universe = BoundedUniverse(INPUTS, stem_bound=2, loop_bound=2)

    def test_pc1(self):
        self.assertIs(check_pc1(self.system, self.trace, self.cause, self.effect).status, Status.PASS)
        verdict = check_pc1(self.system, self.trace, self.cause, parse_ltl('G !e'))
        self.assertIs(verdict.status, Status.FAIL)

    def test_sat(self):
        self.assertIs(check_sat(self.system, self.trace, self.cause, self.effect).status, Status.PASS)

    def test_sat_excluding_actual_inputs(self):
        verdict = check_sat(self.system, self.trace, ltl_to_nba(parse_ltl('G !x'), INPUTS), self.effect)
        self.assertIs(verdict.status, Status.FAIL)
        self.assertEqual(verdict.checked, 1)
        self.assertEqual(verdict.witness, (lasso([], [{'x'}]),))

    def test_cf(self):
        verdict = check_cf(self.system, self.trace, self.cause, self.effect, self.relation, self.universe)
        self.assertIs(verdict.status, Status.PASS)
        self.assertGreater(verdict.checked, 0)

    def test_cf_too_small_cause(self):
        small = ltl_to_nba(parse_ltl('G x'), INPUTS)
        universe = BoundedUniverse(INPUTS, stem_bound=1, loop_bound=1)
        verdict = check_cf(self.system, self.trace, small, self.effect, self.relation, universe)
        self.assertIs(verdict.status, Status.FAIL)
        self.assertFalse(accepts_lasso(small, verdict.witness[0]))

    def test_cf_vacuous(self):
        verdict = check_cf(self.system, self.trace, universal(INPUTS), self.effect, self.relation, self.universe)
        self.assertIs(verdict.status, Status.PASS)
        self.assertEqual(verdict.checked, 0)

    def test_downward_closed(self):
        verdict = check_downward_closed(self.cause, self.effect, self.system, self.trace, self.relation, self.universe)
        self.assertIs(verdict.status, Status.PASS)

    def test_downward_closed_too_large_cause(self):
        universe = BoundedUniverse(INPUTS, stem_bound=1, loop_bound=1)
        verdict = check_downward_closed(universal(INPUTS), self.effect, self.system, self.trace, self.relation, universe)
        self.assertIs(verdict.status, Status.FAIL)
        self.assertEqual(len(verdict.witness), 2)

    def test_downward_closed_vacuous(self):
        verdict = check_downward_closed(empty_automaton(INPUTS), self.effect, self.system, self.trace, self.relation,
                                        self.universe)
        self.assertIs(verdict.status, Status.PASS)

    def test_pc2_is_inconclusive(self):
        universe = BoundedUniverse(INPUTS, stem_bound=1, loop_bound=1)
        verdict = check_pc2(self.system, self.trace, self.cause, self.effect, self.relation, universe)
        self.assertIs(verdict.status, Status.INCONCLUSIVE)

    def test_synthesized_cause_passes(self):
        result = synthesize_cause(self.system, self.trace, self.effect, self.relation)
        verdicts = run_checks(self.system, self.trace, result.cause, self.effect, self.relation, self.universe,
                              co_cause=result.co_cause)
        self.assertEqual([v.check for v in verdicts], ['sat', 'cf', 'downward-closed'])
        self.assertTrue(all(v.status is Status.PASS for v in verdicts), [str(v) for v in verdicts])

    def test_invalid_trace(self):
        verdicts = run_checks(self.system, parse_trace('({x})^w'), self.cause, self.effect, self.relation, self.universe)
        self.assertEqual(len(verdicts), 1)
        self.assertIs(verdicts[0].status, Status.FAIL)


class OtherSystemsTestCase(unittest.TestCase):

    def test_fork_sat_fails_with_completion(self):
        system = load_system(os.path.join(TEST_DATA, 'fork.json'))
        verdict = check_sat(system, parse_trace('({e})^w'), universal(('a',)), parse_ltl('F e'))
        self.assertIs(verdict.status, Status.FAIL)
        self.assertEqual(verdict.witness, (parse_trace('({})^w'),))


class FaultySystemChecksTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.system = load_system(os.path.join(TEST_DATA, 'fig4.json'))
        with open(os.path.join(TEST_DATA, 'fig4.trace')) as f:
            cls.trace = parse_trace(f.read())
        with open(os.path.join(TEST_DATA, 'fig4.ltl')) as f:
            cls.effect = parse_ltl(f.read())
        cls.inputs = cls.system.base_inputs
        cls.relation = make_relation('subset', cls.inputs)
        cls.cause = ltl_to_nba(parse_ltl('!i0 & X(!i0 & !i2 & X i0)'), cls.inputs)

    def test_synthesized_cause_passes(self):
        universe = BoundedUniverse(self.inputs, stem_bound=3, loop_bound=2)
        for contingencies in (False, True):
            with self.subTest(contingencies=contingencies):
                result = synthesize_cause(self.system, self.trace, self.effect, self.relation, contingencies)
                self.assertTrue(result.has_cause)
                verdicts = run_checks(self.system, self.trace, result.cause, self.effect, self.relation, universe,
                                      contingencies, result.co_cause)
                self.assertTrue(all(v.status is Status.PASS for v in verdicts), [str(v) for v in verdicts])

    def test_actual_inputs_beyond_bounds(self):
        # the actual trace has a stem of three letters
        universe = BoundedUniverse(self.inputs, stem_bound=2, loop_bound=1)
        verdict = check_cf(self.system, self.trace, self.cause, self.effect, self.relation, universe)
        self.assertIs(verdict.status, Status.PASS)
        self.assertGreater(verdict.checked, 0)
        verdict = check_downward_closed(self.cause, self.effect, self.system, self.trace, self.relation, universe)
        self.assertIs(verdict.status, Status.PASS)
        self.assertGreater(verdict.checked, 0)

    def test_cause_beyond_bounds_is_inconclusive(self):
        universe = BoundedUniverse(self.inputs, stem_bound=1, loop_bound=1)
        verdict = check_downward_closed(self.cause, self.effect, self.system, self.trace, self.relation, universe)
        self.assertIs(verdict.status, Status.INCONCLUSIVE)
        self.assertEqual(verdict.checked, 0)

    def test_vacuous_without_outside_sequences(self):
        universe = BoundedUniverse(self.inputs, stem_bound=1, loop_bound=1)
        verdict = check_cf(self.system, self.trace, universal(self.inputs), self.effect, self.relation, universe)
        self.assertIs(verdict.status, Status.PASS)
        self.assertEqual(verdict.checked, 0)


class ArbiterChecksTestCase(unittest.TestCase):

    def test_expected_causes_pass(self):
        for family, size in (('spurious', 1), ('spurious', 2), ('unfair', 2), ('full', 1)):
            system = generators_map[family](size)
            trace = all_requests_trace(system)
            relation = make_relation('subset', system.base_inputs)
            universe = BoundedUniverse(system.base_inputs, stem_bound=1, loop_bound=1)
            for effect, expected in bench_effects(family):
                with self.subTest(family=family, size=size, effect=to_text(effect)):
                    result = synthesize_cause(system, trace, effect, relation)
                    self.assertTrue(is_equivalent(result.cause, ltl_to_nba(expected, system.base_inputs)))
                    verdicts = run_checks(system, trace, result.cause, effect, relation, universe,
                                          co_cause=result.co_cause)
                    self.assertTrue(all(v.status is Status.PASS for v in verdicts), [str(v) for v in verdicts])


if __name__ == '__main__':
    unittest.main()
