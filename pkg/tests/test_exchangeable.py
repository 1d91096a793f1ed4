import os
import pickle
import unittest

import numpy as np

import maxidsim as mx
from maxidsim.exchangeable import bivariate_survival, min_survival, mo_measure
from maxidsim.validation import exp_cdf, ks_2sample, ks_test

SIGMAS = 3.0
full_size = unittest.skipUnless(os.environ.get("MAXIDSIM_FULL"),
                                "full-size run, set MAXIDSIM_FULL=1")
HALF_STABLE = mx.half_stable_spec()


def linear_density(s, u):
    return 2 * s * HALF_STABLE.density(u)


def linear_envelope(s):
    return HALF_STABLE.envelope.scaled(2 * s)


def hitting_times(spec, d, n, seed, **kwargs):
    return np.array([mx.simulate_mo_sequence(spec, d, mx.RngStream(seed, r),
                                             **kwargs).hitting_times
                     for r in range(n)])


def stationary_additive(spec):
    """ The stationary spec written as an additive one, G ≡ C₁ """
    return mx.AdditiveSpec(lambda s, u: spec.density(u),
                           lambda s: spec.envelope,
                           time_intensity=lambda s: spec.C1,
                           time_intensity_bound=spec.C1, name="embedded")


def linear_additive(spec):
    """ g(s, u) = 2s·g_υ(u) on (0, 1) """
    return mx.AdditiveSpec(lambda s, u: 2 * s * spec.density(u),
                           lambda s: spec.envelope.scaled(2 * s),
                           time_intensity=lambda s: 2 * s * spec.C1,
                           time_intensity_bound=2 * spec.C1, s_max=1.0,
                           name="linear")


class TestLevySpecs(unittest.TestCase):

    def test_half_stable_constant(self):
        spec = mx.half_stable_spec()
        self.assertAlmostEqual(spec.density.K, 0.2820948, places=7)
        self.assertEqual(spec.C1, 1.0)
        self.assertEqual(spec.characteristic_scale(), 1.0)

    def test_integrated_C1(self):
        spec = mx.half_stable_spec()
        integrated = mx.LevySpec("quad", spec.density, spec.envelope)
        self.assertAlmostEqual(integrated.C1, 1.0, places=6)
        self.assertAlmostEqual(integrated.psi(4.0), 2.0, places=6)

    def test_gamma_closed_forms(self):
        spec = mx.gamma_spec(2.0, 0.5)
        integrated = mx.LevySpec("quad", spec.density, spec.envelope)
        self.assertAlmostEqual(spec.C1, 2.0 * np.log(3.0))
        self.assertAlmostEqual(integrated.C1, spec.C1, places=6)
        self.assertAlmostEqual(integrated.psi(2.5), spec.psi(2.5), places=6)

    def test_envelopes_dominate(self):
        u = np.logspace(-6, 4, 500)
        for spec in (mx.stable_spec(0.3), mx.stable_spec(0.5),
                     mx.stable_spec(0.8), mx.gamma_spec(1.0, 1.0),
                     mx.gamma_spec(2.0, 0.5), mx.gamma_spec(0.5, 3.0)):
            ratio = spec.size_biased(u) / spec.envelope.density(u)
            self.assertTrue(np.all(ratio <= 1.0 + 1e-12), msg=spec.name)

    def test_domains(self):
        for alpha in (0.0, 1.0, 1.5):
            with self.assertRaises(mx.DomainError):
                mx.stable_spec(alpha)
        with self.assertRaises(mx.DomainError):
            mx.gamma_spec(-1.0, 1.0)
        with self.assertRaises(mx.DomainError):
            mx.stable_spec(0.5, drift=-1.0)
        with self.assertRaises(mx.DomainError):
            mx.psi(mx.stable_spec(), -1.0)
        self.assertEqual(mx.psi(mx.stable_spec(), 0.0), 0.0)

    def test_psi_with_drift(self):
        spec = mx.stable_spec(0.5, drift=1.0)
        self.assertAlmostEqual(mx.psi(spec, 4.0), 6.0)

    def test_survival_functions(self):
        spec = mx.stable_spec()
        self.assertAlmostEqual(min_survival(spec, 4, 1.0), np.exp(-2.0))
        self.assertAlmostEqual(bivariate_survival(spec, 1.0, 1.0),
                               np.exp(-np.sqrt(2.0)))
        self.assertAlmostEqual(bivariate_survival(spec, 0.5, 1.5),
                               np.exp(-0.5 * np.sqrt(2.0) - 1.0))


class TestShockSampling(unittest.TestCase):

    def setUp(self):
        self.spec = mx.half_stable_spec()

    def test_far_threshold_is_empty(self):
        atoms = mx.mo_sample_prm_above(self.spec, 1, 1e9, (1, 2),
                                       mx.RngStream(0))
        self.assertEqual(atoms, [])

    def test_counts_and_anchor(self):
        stream = mx.RngStream(1)
        n = 5000
        counts = []
        hits, expected, variance = 0, 0.0, 0.0
        indices = tuple(range(1, 21))
        for _ in range(n):
            atoms = mx.mo_sample_prm_above(self.spec, 3, 1.0, indices, stream)
            counts.append(len(atoms))
            for f in atoms:
                self.assertGreaterEqual(f(3), 1.0)
                p = 1 - np.exp(-f.jump)
                hits += sum(f.hit(i) for i in indices if i != 3)
                expected += 19 * p
                variance += 19 * p * (1 - p)
        self.assertLess(abs(np.mean(counts) - 1.0), SIGMAS * np.sqrt(1.0 / n))
        self.assertLess(abs(hits - expected), SIGMAS * np.sqrt(variance))

    def test_mass_vanishing_elsewhere(self):
        measure = mo_measure(self.spec)
        self.assertAlmostEqual(measure.mass_above(3, 2.0, (1,)),
                               (np.sqrt(2) - 1) / 2)
        self.assertAlmostEqual(measure.mass_above(3, 2.0, (1, 5)),
                               (np.sqrt(3) - np.sqrt(2)) / 2)
        self.assertEqual(measure.mass_above(3, 2.0, (3, 1)), 0.0)
        drifted = mo_measure(mx.stable_spec(0.5, drift=1.0))
        self.assertAlmostEqual(drifted.mass_above(3, 2.0, (1,)),
                               (np.sqrt(2) - 1) / 2)
        additive = mo_measure(linear_additive(self.spec))
        self.assertAlmostEqual(additive.mass_above(1, 2.0, (2,)),
                               (np.sqrt(2) - 1) / 4, places=6)

    def test_band_count_vanishing_elsewhere(self):
        measure = mo_measure(self.spec)
        stream = mx.RngStream(8)
        n = 20000
        counts = [len(measure.sample_band(3, 2.0, earlier_zero_indices=(1,),
                                          stream=stream, locations=(1, 3)))
                  for _ in range(n)]
        mean = measure.mass_above(3, 2.0, (1,))
        self.assertLess(abs(np.mean(counts) - mean),
                        SIGMAS * np.sqrt(mean / n))

    def test_band_of_sequence_measure(self):
        measure = mo_measure(self.spec)
        self.assertAlmostEqual(measure.mass_above(3, 1.0), 1.0)
        self.assertAlmostEqual(measure.mass_above(3, 4.0), 0.25)
        self.assertFalse(measure.has_finite_positive_mass(1))
        with self.assertRaises(IndexError):
            measure.mass_above(0, 1.0)
        stream = mx.RngStream(2)
        for _ in range(500):
            for f in measure.sample_band(2, 0.5, 1.0, stream=stream,
                                         locations=(1, 2)):
                self.assertGreaterEqual(f(2), 0.5)
                self.assertLess(f(2), 1.0)


class TestMarshallOlkin(unittest.TestCase):

    def setUp(self):
        self.spec = mx.half_stable_spec()

    def test_usage(self):
        with self.assertRaises(mx.UsageError):
            mx.simulate_mo_sequence(self.spec, 0, mx.RngStream(0))

    def test_exponential_margin(self):
        def check(seed):
            t = hitting_times(self.spec, 1, 10000, seed)[:, 0]
            return ks_test(t, exp_cdf, alpha=0.01)
        self.assertTrue(mx.seed_panel(check, range(10, 15), 4).passed)

    def test_minimum_law(self):
        for d in (2, 5, 10):
            times = hitting_times(self.spec, d, 10000, 20 + d)
            minima = times.min(axis=1)
            for t in (0.05, 0.1, 0.2, 0.4, 0.8):
                check = mx.compare_frequencies(minima > t,
                                               min_survival(self.spec, d, t),
                                               SIGMAS)
                self.assertTrue(check.passed, msg=f"d={d} t={t}")

    @full_size
    def test_bivariate_survival(self):
        times = hitting_times(self.spec, 2, 100000, 30)
        for s, t in ((0.25, 0.5), (0.5, 1.0), (1.0, 1.0)):
            events = (times[:, 0] > s) & (times[:, 1] > t)
            check = mx.compare_frequencies(
                events, np.exp(-np.sqrt(2) * s - (t - s)), SIGMAS)
            self.assertTrue(check.passed, msg=f"s={s} t={t}")

    def test_exchangeability(self):
        n = 2000
        a = hitting_times(self.spec, 3, n, 40)
        b = hitting_times(self.spec, 3, n, 41)
        self.assertTrue(ks_2sample(a[:, 0], b[:, 2], alpha=0.01).passed)
        self.assertTrue(ks_2sample(a[:, 0] + a[:, 1], b[:, 2] + b[:, 0],
                                   alpha=0.01).passed)

    def test_values_are_reciprocal(self):
        sample = mx.simulate_mo_sequence(self.spec, 5, mx.RngStream(3))
        np.testing.assert_allclose(sample.values * sample.hitting_times, 1.0)
        self.assertGreaterEqual(sample.diagnostics.atoms_simulated,
                                sample.diagnostics.atoms_kept)

    def test_drift(self):
        spec = mx.stable_spec(0.5, drift=1.0)
        t = hitting_times(spec, 1, 3000, 50)[:, 0]
        self.assertTrue(ks_test(2.0 * t, exp_cdf, alpha=0.01).passed)

    def test_gamma_margin(self):
        spec = mx.gamma_spec(1.0, 1.0)
        t = hitting_times(spec, 1, 3000, 60)[:, 0]
        self.assertTrue(ks_test(np.log(2.0) * t, exp_cdf,
                                alpha=0.01).passed)

    def test_undersized_envelope(self):
        spec = mx.stable_spec(0.5, envelope_scale=0.5)
        with self.assertRaises(mx.EnvelopeViolationError):
            mx.simulate_mo_sequence(spec, 2, mx.RngStream(0))


class TestAdditive(unittest.TestCase):

    def setUp(self):
        self.base = mx.half_stable_spec()

    def test_band_mass(self):
        spec = linear_additive(self.base)
        self.assertAlmostEqual(spec.band_mass(1.0), 1.0, places=8)
        self.assertAlmostEqual(spec.band_mass(2.0), 0.25, places=8)
        self.assertAlmostEqual(spec.band_mass(4.0), 1 / 16, places=8)
        self.assertAlmostEqual(spec.positive_mass(), 1.0, places=8)
        with self.assertRaises(mx.DomainError):
            spec.band_mass(0.0)

    def test_integrated_time_intensity(self):
        spec = mx.AdditiveSpec(lambda s, u: 2 * s * self.base.density(u),
                               lambda s: self.base.envelope.scaled(2 * s),
                               s_max=1.0)
        self.assertAlmostEqual(spec.time_intensity(0.3), 0.6, places=6)
        self.assertAlmostEqual(spec.band_mass(2.0), 0.25, places=6)

    def test_inverted_shock_times(self):
        spec = mx.AdditiveSpec(lambda s, u: 2 * s * self.base.density(u),
                               lambda s: self.base.envelope.scaled(2 * s),
                               time_intensity=lambda s: 2 * s, s_max=1.0)
        times = spec.sample_shock_times(1.0, 2000, mx.RngStream(4))
        self.assertTrue(np.all((times > 0) & (times < 1)))
        result = ks_test(times, lambda x: np.clip(x, 0, 1)**2, alpha=0.01)
        self.assertTrue(result.passed)

    def test_pickles(self):
        spec = mx.AdditiveSpec(linear_density, linear_envelope, s_max=1.0)
        self.assertAlmostEqual(spec.band_mass(2.0), 0.25, places=6)
        clone = pickle.loads(pickle.dumps(spec))
        self.assertEqual(clone.s_max, 1.0)
        self.assertAlmostEqual(clone.band_mass(2.0), 0.25, places=6)
        self.assertAlmostEqual(clone.band_mass(4.0), 1 / 16, places=6)

    def test_stationary_embedding(self):
        embedded = stationary_additive(self.base)
        self.assertAlmostEqual(embedded.band_mass(2.0), 0.5, places=8)
        stream_a, stream_b = mx.RngStream(5), mx.RngStream(6)
        shocks_a, shocks_b, jumps_a, jumps_b = [], [], [], []
        for _ in range(10000):
            for f in mx.additive_sample_prm_above(embedded, 1, 1.0, (1, 2),
                                                  stream_a):
                shocks_a.append(f.shock)
                jumps_a.append(f.jump)
            for f in mx.mo_sample_prm_above(self.base, 1, 1.0, (1, 2),
                                            stream_b):
                shocks_b.append(f.shock)
                jumps_b.append(f.jump)
        self.assertTrue(ks_2sample(shocks_a, shocks_b, alpha=0.01).passed)
        self.assertTrue(ks_2sample(jumps_a, jumps_b, alpha=0.01).passed)
        self.assertLess(abs(len(shocks_a) - len(shocks_b)),
                        SIGMAS * np.sqrt(2 * 10000))

    def test_finite_support_sequence(self):
        spec = linear_additive(self.base)
        n = 3000
        times = hitting_times(spec, 3, n, 70)
        t = 0.5
        checks = [
            (times[:, 0] > t, np.exp(-t**2)),
            (np.isinf(times[:, 1]), np.exp(-1.0)),
            ((times[:, 0] > t) & (times[:, 2] > t), np.exp(-t**2 * np.sqrt(2))),
        ]
        for events, p in checks:
            check = mx.compare_frequencies(events, p, SIGMAS)
            self.assertTrue(check.passed, msg=str(check))
        self.assertTrue(np.all(np.isinf(times) | (times < 1.0)))

    def test_hitting_needs_finite_support(self):
        with self.assertRaises(mx.UsageError):
            stationary_additive(self.base).sample_hitting((1, 2),
                                                          mx.RngStream(0))


if __name__ == "__main__":
    unittest.main()
