import unittest

import numpy as np

import maxidsim as mx
from maxidsim.exchangeable import mo_measure
from maxidsim.exponent_measure import ExponentMeasure
from maxidsim.process import band_maximizers
from maxidsim.validation import ks_2sample

SIGMAS = 3.0


class EmptyMeasure(ExponentMeasure):
    """ Infinite mass nowhere reachable: every band is empty """

    def _mass_above(self, t, c, zero_locations):
        return 0.0

    def _sample_band(self, t, c_lo, c_hi, stream, locations):
        return []

    def has_finite_positive_mass(self, t):
        return False


def run(measure, locations, n, seed, options=None):
    return np.vstack([mx.simulate_process(measure, locations, options,
                                          mx.RngStream(seed, r)).values
                      for r in range(n)])


class TestOptions(unittest.TestCase):

    def test_validation(self):
        with self.assertRaises(mx.DomainError):
            mx.Alg1Options(initial_cut=0.0)
        with self.assertRaises(mx.DomainError):
            mx.Alg1Options(halving_factor=1.0)
        with self.assertRaises(mx.DomainError):
            mx.Alg1Options(band_cap=0)

    def test_default_cut(self):
        split = mx.zero_mass_split(mo_measure(mx.stable_spec()), (1, 2))
        self.assertAlmostEqual(mx.Alg1Options().cut_for(split.residual, 1),
                               1.0)
        self.assertEqual(mx.Alg1Options(initial_cut=3.0)
                         .cut_for(split.residual, 1), 3.0)


class TestFilters(unittest.TestCase):

    def setUp(self):
        self.a = mx.DiscreteAtom({1: 1.0, 2: 0.5})
        self.b = mx.DiscreteAtom({1: 0.4, 2: 2.0})
        self.c = mx.DiscreteAtom({2: 2.0})
        self.locations = (1, 2)

    def test_extremal_filter(self):
        values = np.array([1.0, 0.0])
        kept = mx.extremal_filter([self.a, self.b], values, [0],
                                  self.locations)
        self.assertEqual(kept, [self.b])
        kept = mx.extremal_filter([self.a, self.b], values, [],
                                  self.locations)
        self.assertEqual(kept, [self.a, self.b])

    def test_band_maximizers_keep_ties(self):
        top = band_maximizers([self.a, self.b, self.c], 1, self.locations)
        self.assertEqual(top, [self.b, self.c])
        self.assertEqual(band_maximizers([], 0, self.locations), [])


class TestSimulateProcess(unittest.TestCase):

    def test_usage(self):
        measure = mx.DiscreteFiniteMeasure([(1.0, {1: 1.0})])
        with self.assertRaises(mx.UsageError):
            mx.simulate_process(measure, (1, 1), stream=mx.RngStream(0))
        with self.assertRaises(mx.UsageError):
            mx.simulate_process(measure, (1,))

    def test_band_cap(self):
        with self.assertRaises(mx.TerminationCapError):
            mx.simulate_process(EmptyMeasure(), (1,),
                                mx.Alg1Options(band_cap=20), mx.RngStream(0))

    def test_single_band_when_mass_is_large(self):
        measure = mx.ScaleMixtureMeasure(mx.FrechetRadial(50.0),
                                         mx.DirichletAngular.uniform(1))
        sample = mx.simulate_process(measure, (1,),
                                     mx.Alg1Options(initial_cut=1.0),
                                     mx.RngStream(1))
        self.assertEqual(sample.diagnostics.bands_scanned, [1])
        self.assertGreaterEqual(sample.values[0], 1.0)

    def test_single_atom(self):
        measure = mx.DiscreteFiniteMeasure([(0.7, {1: 1.0, 2: 1.0})])
        values = run(measure, (1, 2), 10000, 2)
        ones = np.all(values == 1.0, axis=1)
        zeros = np.all(values == 0.0, axis=1)
        self.assertTrue(np.all(ones | zeros))
        check = mx.compare_frequencies(ones, 1 - np.exp(-0.7), SIGMAS)
        self.assertTrue(check.passed, msg=str(check))

    def test_negligible_weight(self):
        measure = mx.DiscreteFiniteMeasure([(1e-12, {1: 1.0})])
        values = run(measure, (1,), 100, 3)
        self.assertTrue(np.all(values == 0.0))

    def test_mixed_zero_locations(self):
        angular = mx.DiscreteAngular([[0.5, 0.5, 0.0]], [1.0])
        continuous = mx.ScaleMixtureMeasure(mx.FrechetRadial(2.0), angular)
        discrete = mx.DiscreteFiniteMeasure([(0.5, {3: 1.0}),
                                             (0.25, {1: 3.0, 3: 2.0})])
        measure = mx.SumMeasure([continuous, discrete])
        values = run(measure, (1, 2, 3), 4000, 4)
        expected = [
            (values[:, 0] <= 1.0, np.exp(-1.25)),
            (values[:, 0] <= 4.0, np.exp(-0.5)),
            (values[:, 1] <= 1.0, np.exp(-1.0)),
            (values[:, 2] == 0.0, np.exp(-0.75)),
            (values[:, 2] >= 2.0, 1 - np.exp(-0.25)),
        ]
        for events, p in expected:
            check = mx.compare_frequencies(events, p, SIGMAS)
            self.assertTrue(check.passed, msg=str(check))
        self.assertTrue(np.all(values[:, 0] >= values[:, 1]))

    def test_extremal_invariants(self):
        spec = mx.stable_spec()
        measure = mo_measure(spec)
        locations = (1, 2, 3, 4, 5)
        for r in range(300):
            sample = mx.simulate_process(measure, locations,
                                         stream=mx.RngStream(5, r))
            rows = [f.at(locations) for f in sample.kept_atoms]
            np.testing.assert_array_equal(
                mx.pointwise_max(rows, len(locations)), sample.values)
            for row in rows:
                self.assertTrue(np.any(row == sample.values))
            for t, v in zip(locations, sample.values):
                self.assertEqual(sample.path(t), v)
            self.assertTrue(np.all(sample.values > 0))
            diag = sample.diagnostics
            self.assertLessEqual(diag.atoms_kept, diag.atoms_simulated)
            self.assertTrue(all(b >= 1 for b in diag.bands_scanned))

    def test_location_order(self):
        measure = mo_measure(mx.stable_spec())
        forward = run(measure, (1, 2, 3), 1500, 6)
        shuffled = run(measure, (3, 1, 2), 1500, 7)
        result = ks_2sample(forward.max(axis=1), shuffled.max(axis=1),
                            alpha=0.01)
        self.assertTrue(result.passed)
        result = ks_2sample(forward[:, 2], shuffled[:, 0], alpha=0.01)
        self.assertTrue(result.passed)


class TestOracleAgreement(unittest.TestCase):

    fixtures = [
        ([0.5, 0.8], [[1.0, 0.5], [0.3, 1.0]]),
        ([0.4, 0.6, 0.3], [[1.0, 0.0, 2.0], [0.5, 0.5, 0.5],
                           [0.0, 2.0, 0.0]]),
        ([2.0, 1.0], [[1.5], [0.5]]),
    ]

    def test_fixtures(self):
        n = 10000
        for k, (weights, vectors) in enumerate(self.fixtures):
            measure = mx.DiscreteFiniteMeasure.from_vectors(weights, vectors)
            locations = tuple(range(1, len(vectors[0]) + 1))
            simulated = run(measure, locations, n, 10 + k)
            stream = mx.RngStream(20 + k)
            oracle = np.vstack([mx.finite_measure_oracle(measure, locations,
                                                         stream)
                                for _ in range(n)])
            for j, t in enumerate(locations):
                zero = np.exp(-measure.mass_above(t, 1e-300))
                check = mx.compare_frequencies(simulated[:, j] == 0, zero,
                                               SIGMAS)
                self.assertTrue(check.passed, msg=f"fixture {k} x{t} zero")
                for level in sorted({v[j] for v in vectors} - {0.0}):
                    check = mx.compare_frequencies(simulated[:, j] >= level,
                                                   oracle[:, j] >= level,
                                                   SIGMAS)
                    self.assertTrue(check.passed,
                                    msg=f"fixture {k} x{t} >= {level}")
            if len(locations) > 1:
                joint = np.all(simulated >= vectors[0], axis=1)
                joint_oracle = np.all(oracle >= vectors[0], axis=1)
                check = mx.compare_frequencies(joint, joint_oracle, SIGMAS)
                self.assertTrue(check.passed, msg=f"fixture {k} joint")


if __name__ == "__main__":
    unittest.main()
