import os
import unittest

import numpy as np
from scipy import stats

import maxidsim as mx
from maxidsim.validation import ks_2sample, ks_test

SIGMAS = 3.0
full_size = unittest.skipUnless(os.environ.get("MAXIDSIM_FULL"),
                                "full-size run, set MAXIDSIM_FULL=1")


def frechet_cdf(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore'):
        return np.where(x > 0, np.exp(-1.0 / x), 0.0)


class ScriptedSampler(mx.SliceSampler):
    def __init__(self, slices):
        self.slices = slices

    def sample(self, n, stream):
        return [mx.DiscreteAtom(table) for table in self.slices.get(n, [])]


class ScriptedSlices(mx.SliceSequence):
    """ Hand-written slices S_1, S_2, ... with fixed atoms """

    def __init__(self, slices, radii):
        self.slices = slices
        self.radii = radii

    def containment_radius(self, n):
        return self.radii.get(n, np.inf)

    def sampler(self, d):
        return ScriptedSampler(self.slices)


class TestRadialShells(unittest.TestCase):

    def test_containment(self):
        shells = mx.RadialShells(mx.frechet_scale_mixture(2))
        self.assertEqual(shells.containment_radius(1), np.inf)
        self.assertEqual(shells.containment_radius(2), 1.0)
        self.assertEqual(shells.containment_radius(5), 0.25)
        with self.assertRaises(mx.UsageError):
            shells.containment_radius(0)
        with self.assertRaises(mx.UsageError):
            shells.sampler(3)


class TestStoppingRule(unittest.TestCase):

    def test_two_slice_trace(self):
        slices = ScriptedSlices({1: [{1: 0.5, 2: 0.2}], 2: [{1: 0.1, 2: 0.4}]},
                                {1: np.inf, 2: 0.6, 3: 0.3})
        sample = mx.simulate_vector(mx.frechet_scale_mixture(2), slices, 2,
                                    mx.RngStream(0))
        np.testing.assert_array_equal(sample.values, [0.5, 0.4])
        self.assertEqual(sample.diagnostics.slices_consumed, 2)
        self.assertEqual(sample.diagnostics.atoms_simulated, 2)
        self.assertEqual(sample.diagnostics.atoms_kept, 2)
        self.assertEqual(len(sample.kept_atoms), 2)

    def test_dominated_atoms_dropped(self):
        slices = ScriptedSlices({1: [{1: 0.5, 2: 0.4}], 2: [{1: 0.1, 2: 0.2}]},
                                {1: np.inf, 2: 0.6, 3: 0.1})
        sample = mx.simulate_vector(mx.frechet_scale_mixture(2), slices, 2,
                                    mx.RngStream(0))
        np.testing.assert_array_equal(sample.values, [0.5, 0.4])
        self.assertEqual(sample.diagnostics.atoms_simulated, 2)
        self.assertEqual(sample.diagnostics.atoms_kept, 1)
        np.testing.assert_array_equal(sample.kept_atoms[0].at((1, 2)),
                                      [0.5, 0.4])

    def test_slice_cap(self):
        slices = ScriptedSlices({}, {})
        with self.assertRaises(mx.TerminationCapError):
            mx.simulate_vector(mx.frechet_scale_mixture(2), slices, 2,
                               mx.RngStream(0), slice_cap=5)

    def test_dimension(self):
        with self.assertRaises(mx.UsageError):
            mx.simulate_vector(mx.frechet_scale_mixture(1),
                               ScriptedSlices({}, {}), 0, mx.RngStream(0))

    def test_extra_slices_change_nothing(self):
        measure = mx.frechet_scale_mixture(3)
        shells = mx.RadialShells(measure)
        for r in range(500):
            sample = mx.simulate_vector(measure, shells, 3, mx.RngStream(1, r),
                                        extra_slices=10)
            np.testing.assert_array_equal(sample.extended_values,
                                          sample.values)
            self.assertTrue(np.all(sample.values > 0))


class TestMaxStable(unittest.TestCase):

    def test_frechet_margin(self):
        x = [mx.max_stable_vector(1, mx.RngStream(0, r)).values[0]
             for r in range(10000)]
        self.assertTrue(ks_test(x, frechet_cdf, alpha=0.01).passed)

    @full_size
    def test_max_stability(self):
        n, k = 10000, 5
        single = np.array([mx.max_stable_vector(2, mx.RngStream(2, r)).values
                           for r in range(n)])
        pooled = np.array([
            np.max([mx.max_stable_vector(2, mx.RngStream(3, k * r + i)).values
                    for i in range(k)], axis=0) / k
            for r in range(n)])
        for j in range(2):
            result = ks_2sample(single[:, j], pooled[:, j], alpha=0.01)
            self.assertTrue(result.passed, msg=f"coordinate {j + 1}")

    def test_kept_atoms_attain_maxima(self):
        locations = (1, 2, 3)
        for r in range(200):
            sample = mx.max_stable_vector(3, mx.RngStream(12, r))
            kept = sample.diagnostics.atoms_kept
            self.assertEqual(kept, len(sample.kept_atoms))
            self.assertGreaterEqual(kept, 1)
            self.assertLessEqual(kept, sample.diagnostics.atoms_simulated)
            rows = [f.at(locations) for f in sample.kept_atoms]
            np.testing.assert_array_equal(mx.pointwise_max(rows, 3),
                                          sample.values)
            for row in rows:
                self.assertTrue(np.any(row == sample.values))

    def test_exchangeable_coordinates(self):
        n = 2000
        first = [mx.max_stable_vector(2, mx.RngStream(4, r)).values[0]
                 for r in range(n)]
        second = [mx.max_stable_vector(2, mx.RngStream(4, n + r)).values[1]
                  for r in range(n)]
        self.assertTrue(ks_2sample(first, second, alpha=0.01).passed)


class TestFiniteRadial(unittest.TestCase):

    def setUp(self):
        self.radial = mx.TruncatedRadial(mx.FrechetRadial(3.0), 0.2)
        self.angular = mx.DirichletAngular.uniform(2)
        self.measure = mx.ScaleMixtureMeasure(self.radial, self.angular)

    def brute_force(self, stream):
        count = mx.poisson_variate(stream, self.radial.total_mass)
        if count == 0:
            return np.zeros(2)
        radii = self.radial.sample_radii(stream, count)
        angles = self.angular.sample(stream, count)
        return (radii[:, None] * angles).max(axis=0)

    def test_brute_force_agreement(self):
        n = 10000
        shells = mx.RadialShells(self.measure)
        simulated = np.array([mx.simulate_vector(self.measure, shells, 2,
                                                 mx.RngStream(5, r)).values
                              for r in range(n)])
        stream = mx.RngStream(6)
        direct = np.array([self.brute_force(stream) for _ in range(n)])
        for column in (0, 1):
            result = ks_2sample(simulated[:, column], direct[:, column],
                                alpha=0.01)
            self.assertTrue(result.passed)
        result = ks_2sample(simulated.min(axis=1), direct.min(axis=1),
                            alpha=0.01)
        self.assertTrue(result.passed)

    def test_atom_count_is_poisson(self):
        n = 2000
        shells = mx.RadialShells(self.measure)
        samples = [mx.simulate_vector(self.measure, shells, 2,
                                      mx.RngStream(7, r))
                   for r in range(n)]
        counts = np.array([s.diagnostics.atoms_simulated for s in samples])
        self.assertTrue(all(s.diagnostics.slices_consumed == 0
                            for s in samples))
        self.assertLess(abs(counts.mean() - 15.0), SIGMAS * np.sqrt(15.0 / n))
        dispersion = np.sum((counts - 15.0)**2) / 15.0
        p_value = stats.chi2.sf(dispersion, n)
        self.assertGreater(p_value, 0.0005)
        self.assertLess(p_value, 0.9995)


class TestReciprocalArchimedean(unittest.TestCase):

    def test_callable_tail_margin(self):
        x = [mx.reciprocal_archimedean_vector(lambda r: 1.0 / r, 1,
                                              mx.RngStream(8, r)).values[0]
             for r in range(10000)]
        self.assertTrue(ks_test(x, frechet_cdf, alpha=0.01).passed)

    def test_point_mass_radial(self):
        n = 3000
        values = np.array([
            mx.reciprocal_archimedean_vector(mx.PointMassRadial(2.0, 3.0), 2,
                                             mx.RngStream(9, r)).values
            for r in range(n)])
        self.assertTrue(np.all(values <= 2.0))
        zero = np.all(values == 0, axis=1)
        check = mx.compare_frequencies(zero, np.exp(-3.0), SIGMAS)
        self.assertTrue(check.passed, msg=str(check))


if __name__ == "__main__":
    unittest.main()
