import math
import time
import unittest

from corpkit import guards
from corpkit.arbiters import bench_effects
from corpkit.benchmarks import (DEFAULT_INSTANCES, BenchInstance, completed, parse_instances, run_bench, run_instance,
                                time_limit)
from corpkit.errors import SynthesisTimeout


class ParseInstancesTestCase(unittest.TestCase):

    def test_ranges(self):
        self.assertEqual(parse_instances('spurious:1-2, full:3'),
                         [BenchInstance('spurious', 1), BenchInstance('spurious', 2), BenchInstance('full', 3)])

    def test_invalid(self):
        for text in ('fair:1', 'spurious', 'spurious:0', 'full:3-1', 'full:a'):
            with self.assertRaises(ValueError):
                parse_instances(text)

    def test_str(self):
        self.assertEqual(str(BenchInstance('unfair', 2)), 'Unfair 2')


class RunTestCase(unittest.TestCase):

    def test_time_limit(self):
        with self.assertRaises(SynthesisTimeout):
            with time_limit(0.05):
                time.sleep(2)

    def test_spurious_instance(self):
        effect, expected = bench_effects('spurious')[0]
        row = run_instance(BenchInstance('spurious', 1), effect, expected, 'subset', timeout=60)
        self.assertEqual(row['instance'], 'Spurious 1')
        self.assertEqual(row['states'], 1)
        self.assertEqual(row['effect'], 'F g_0')
        self.assertTrue(row['matches'])
        self.assertGreaterEqual(row['seconds'], 0)

    def test_full_instance(self):
        effect, expected = bench_effects('full')[0]
        row = run_instance(BenchInstance('full', 1), effect, expected, 'subset', timeout=60)
        self.assertTrue(row['matches'])

    def test_timeout_is_nan(self):
        effect, expected = bench_effects('full')[1]
        row = run_instance(BenchInstance('full', 3), effect, expected, 'full', timeout=0.001)
        self.assertTrue(math.isnan(row['seconds']))
        self.assertTrue(math.isnan(row['cause_states']))

    def test_run_after_timeout(self):
        effect, expected = bench_effects('full')[1]
        run_instance(BenchInstance('full', 3), effect, expected, 'full', timeout=0.001)
        effect, expected = bench_effects('unfair')[0]
        row = run_instance(BenchInstance('unfair', 2), effect, expected, 'subset', timeout=60)
        self.assertTrue(row['matches'])

    def test_caches_cleared_per_instance(self):
        effect, expected = bench_effects('spurious')[0]
        run_instance(BenchInstance('spurious', 2), effect, expected, 'subset', timeout=60)
        self.assertEqual(guards.clear_caches(), 0)

    def test_report(self):
        report = run_bench([BenchInstance('spurious', 1), BenchInstance('spurious', 2)], relations=('subset',), timeout=60)
        self.assertEqual(list(report['instance']), ['Spurious 1', 'Spurious 2'])
        self.assertIn('seconds_subset', report.columns)
        self.assertIn('cause_states_subset', report.columns)
        self.assertEqual(completed(report, 'subset'), {('Spurious 1', 'F g_0'), ('Spurious 2', 'F g_0')})


# family -> (effect, expected cause) of every benchmark row
EXPECTED_ROWS = {
    'spurious': {('F g_0', 'true')},
    'unfair': {('G !g_0', 'G r_prio')},
    'full': {('F g_0', 'F r_0'), ('G F g_0', 'G F r_0')},
}


class ArbiterTableTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.report = run_bench(parse_instances(DEFAULT_INSTANCES), relations=('subset',), timeout=60)

    def test_rows(self):
        self.assertEqual(list(self.report['instance'].unique()),
                         ['Spurious 1', 'Spurious 2', 'Spurious 3', 'Spurious 4',
                          'Unfair 2', 'Unfair 3', 'Unfair 4', 'Full 1', 'Full 2', 'Full 3'])
        for _, row in self.report.iterrows():
            family = row['instance'].split()[0].lower()
            self.assertIn((row['effect'], row['expected']), EXPECTED_ROWS[family])
        self.assertEqual(len(self.report), 4 + 3 + 2 * 3)

    def test_expected_causes_found(self):
        for _, row in self.report.iterrows():
            with self.subTest(instance=row['instance'], effect=row['effect']):
                self.assertEqual(row['matches_subset'], True)
                self.assertGreater(row['cause_states_subset'], 0)

    def test_subset_completes_what_full_completes(self):
        instances = parse_instances('spurious:1-2,unfair:2,full:1-2')
        report = run_bench(instances, timeout=20)
        self.assertLessEqual(completed(report, 'full'), completed(report, 'subset'))
        self.assertEqual(len(completed(report, 'subset')), len(report))


if __name__ == '__main__':
    unittest.main()
