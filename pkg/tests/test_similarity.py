import os
import tempfile
import unittest

from corpkit.automata import LassoWord, accepts_lasso, empty_automaton, is_equivalent, universal
from corpkit.errors import AlphabetMismatchError, NameCollisionError
from corpkit.hoa import emit_hoa
from corpkit.similarity import (SimilarityRelation, custom_relation, full_relation, lift_relation, make_relation,
                                reduced_alphabet, relation_sanity_issues, relation_section,
                                subset_relation, tag_word, tagged, untagged, unzip, zip_lassos, zipped_alphabet)


def lasso(stem, loop):
    return LassoWord(tuple(frozenset(letter) for letter in stem), tuple(frozenset(letter) for letter in loop))


ALWAYS_X = lasso([], [{'x'}])
NEVER_X = lasso([], [set()])
BLINKING = lasso([], [{'x'}, set()])


class AlphabetTestCase(unittest.TestCase):

    def test_zipped_alphabet(self):
        self.assertEqual(zipped_alphabet(['x'], ['e']), ('x@t0', 'e@t0', 'x@t1', 'e@t1', 'x@t2'))
        self.assertEqual(reduced_alphabet(['x'], ['e']), ('x@t0', 'e@t0', 'x@t2'))

    def test_untagged(self):
        self.assertEqual(untagged(tagged('r_0', 't2')), ('r_0', 't2'))
        for symbol in ('x', 'x@t3', '@t0'):
            with self.assertRaises(AlphabetMismatchError):
                untagged(symbol)

    def test_zip_and_unzip(self):
        zipped = zip_lassos(ALWAYS_X, BLINKING, lasso([set()], [{'x'}]))
        self.assertEqual(len(zipped.loop), 2)
        self.assertEqual(unzip(zipped, 't1').normalized(), BLINKING)
        self.assertEqual(unzip(zipped, 't0').normalized(), ALWAYS_X)
        self.assertEqual(tag_word(ALWAYS_X, 't0'), lasso([], [{'x@t0'}]))


class RelationTestCase(unittest.TestCase):

    def test_subset(self):
        relation = subset_relation(['x'])
        self.assertEqual(relation.automaton.num_states, 1)
        self.assertFalse(relation.limit_assumption_known)
        self.assertTrue(accepts_lasso(relation.automaton, zip_lassos(ALWAYS_X, ALWAYS_X, NEVER_X)))
        self.assertTrue(accepts_lasso(relation.automaton, zip_lassos(ALWAYS_X, BLINKING, NEVER_X)))
        self.assertFalse(accepts_lasso(relation.automaton, zip_lassos(ALWAYS_X, NEVER_X, BLINKING)))

    def test_full_is_stricter(self):
        subset, full = subset_relation(['x']), full_relation(['x'])
        self.assertTrue(full.limit_assumption_known)
        word = zip_lassos(NEVER_X, BLINKING, ALWAYS_X)
        self.assertTrue(accepts_lasso(subset.automaton, word))
        self.assertFalse(accepts_lasso(full.automaton, word))
        self.assertTrue(accepts_lasso(full.automaton, zip_lassos(NEVER_X, BLINKING, BLINKING)))
        self.assertTrue(accepts_lasso(full.automaton, zip_lassos(NEVER_X, lasso([{'x'}], [set()]), ALWAYS_X)))

    def test_builtin_relations_are_sane(self):
        self.assertEqual(relation_sanity_issues(subset_relation(['x', 'y'])), [])
        self.assertEqual(relation_sanity_issues(full_relation(['x'])), [])

    def test_make_relation(self):
        self.assertEqual(make_relation('subset', ['x']).name, 'subset')
        self.assertEqual(make_relation('full', ['x']).name, 'full')
        for name in ('closest', 'custom:'):
            with self.assertRaises(ValueError):
                make_relation(name, ['x'])
        with self.assertRaises(ValueError):
            make_relation('subset', [])

    def test_relation_alphabet_is_checked(self):
        with self.assertRaises(AlphabetMismatchError):
            SimilarityRelation('broken', ('x',), universal(('x@t0', 'x@t1')))

    def test_lift(self):
        lifted = lift_relation(subset_relation(['x']), ['e'])
        self.assertEqual(lifted.alphabet, zipped_alphabet(['x'], ['e']))
        with self.assertRaises(NameCollisionError):
            lift_relation(subset_relation(['x']), ['x'])

    def test_section(self):
        relation = subset_relation(['x'])
        anything = relation_section(relation, ALWAYS_X, NEVER_X)
        self.assertTrue(is_equivalent(anything, universal(('x',))))
        only_actual = relation_section(relation, ALWAYS_X, ALWAYS_X)
        self.assertTrue(accepts_lasso(only_actual, ALWAYS_X))
        self.assertFalse(accepts_lasso(only_actual, BLINKING))


class CustomRelationTestCase(unittest.TestCase):

    def setUp(self):
        self.workdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.workdir.cleanup()

    def write(self, automaton):
        path = os.path.join(self.workdir.name, 'relation.hoa')
        with open(path, 'w') as f:
            f.write(emit_hoa(automaton))
        return path

    def test_load(self):
        path = self.write(subset_relation(['x']).automaton)
        relation = custom_relation(path, ['x'])
        self.assertEqual(relation.name, f'custom:{path}')
        self.assertTrue(is_equivalent(relation.automaton, subset_relation(['x']).automaton))
        self.assertEqual(make_relation(f'custom:{path}', ['x']).inputs, ('x',))

    def test_wrong_aps(self):
        path = self.write(subset_relation(['y']).automaton)
        with self.assertRaises(AlphabetMismatchError):
            custom_relation(path, ['x'])

    def test_insane_relation_warns(self):
        path = self.write(empty_automaton(zipped_alphabet(['x'])))
        with self.assertLogs('corpkit.similarity', level='WARNING'):
            custom_relation(path, ['x'])


if __name__ == '__main__':
    unittest.main()
