# Copyright 2024 Red Hat
#
#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.


import ddt
import numpy as np

from xxz_squeezing import exceptions
from xxz_squeezing import observables
from xxz_squeezing.tests import base
from xxz_squeezing import utils


def css_moments(n, mean_x=None):
    mean_x = n / 2.0 if mean_x is None else mean_x
    return observables.Moments(n=n, mean_x=mean_x, mean_y=0.0, mean_z=0.0,
                               x2=mean_x ** 2, y2=n / 4.0, z2=n / 4.0,
                               zy=0.0)


@ddt.ddt
class SqueezingTest(base.TestCase):

    def test_css_is_unsqueezed(self):
        self.assertAlmostEqual(1.0, observables.squeezing(css_moments(100)))

    @ddt.data((3.0, 1.0, 0.4), (1.0, 5.0, -2.0), (2.0, 2.0, 0.0),
              (0.7, 9.0, 2.4))
    @ddt.unpack
    def test_closed_form_matches_scan(self, var_z, var_y, cov):
        m = observables.Moments(n=10, mean_x=4.0, mean_y=0.2, mean_z=-0.1,
                                x2=16.0, y2=var_y + 0.04, z2=var_z + 0.01,
                                zy=cov + 0.2 * -0.1)
        self.assertAlmostEqual(observables.min_variance_scan(m),
                               float(observables.min_variance(m)), places=9)

    def test_depolarized_gives_nan(self):
        self.assertTrue(np.isnan(observables.squeezing(css_moments(10, 0.0))))

    def test_strict_raises(self):
        self.assertRaises(exceptions.DepolarizedState,
                          observables.squeezing, css_moments(10, 0.0),
                          strict=True)

    def test_per_time_arrays(self):
        m = css_moments(8, mean_x=np.array([4.0, 2.0, 0.0]))
        m.y2 = np.full(3, 2.0)
        m.z2 = np.full(3, 2.0)
        xi2 = observables.squeezing(m)
        self.assertArrayClose([1.0, 4.0], xi2[:2])
        self.assertTrue(np.isnan(xi2[2]))

    def test_xy_magnetization(self):
        self.assertAlmostEqual(np.sqrt(2500 + 25) / 100,
                               observables.xy_magnetization(css_moments(100)))


class ConditionalVarianceTest(base.TestCase):

    def _collective(self):
        rng = utils.stream(1, 0)
        z = np.repeat([-1.0, 0.0, 1.0, 5.0], [40, 60, 40, 3])
        y = rng.normal(size=(len(z), 2)) * (1.0 + np.abs(z))[:, None]
        c = np.zeros((len(z), 2, 3))
        c[:, :, 1] = y
        c[:, :, 2] = z[:, None]
        return c, y, z

    def test_population_weighted(self):
        c, y, z = self._collective()
        var, dropped = observables.conditional_variance(c, 'z-binned')
        kept = [(z == v) for v in (-1.0, 0.0, 1.0)]
        expected = sum(k.sum() * y[k].var(axis=0) for k in kept) / 140.0
        self.assertArrayClose(expected, var, rtol=1e-12)
        self.assertEqual([(5.0, 3)], dropped)

    def test_constrained(self):
        c, y, _ = self._collective()
        var, dropped = observables.conditional_variance(
            c, 'z-constrained', z_constrained=True)
        self.assertArrayClose(y.var(axis=0), var)
        self.assertEqual([], dropped)

    def test_mode_mismatch(self):
        c, _, _ = self._collective()
        self.assertRaises(ValueError, observables.conditional_variance, c,
                          'z-constrained')
        self.assertRaises(ValueError, observables.conditional_variance, c,
                          'z-binned', z_constrained=True)
        self.assertRaises(ValueError, observables.conditional_variance, c,
                          'sideways')


@ddt.ddt
class QFITest(base.TestCase):

    def test_samples(self):
        samples = np.array([-1.0, 1.0, -1.0, 1.0])
        self.assertAlmostEqual(4.0, observables.qfi(samples))

    def test_collective_samples_along_axis(self):
        c = np.zeros((4, 3))
        c[:, 0] = [2.0, -2.0, 2.0, -2.0]
        self.assertAlmostEqual(16.0, observables.qfi(c, 'x'))
        self.assertAlmostEqual(0.0, observables.qfi(c, 'z'))
        self.assertAlmostEqual(8.0, observables.qfi(c, [1.0, 1.0, 0.0]))

    def test_long_range_order_scales_quadratically(self):
        rng = utils.stream(3, 0)
        sizes = 2 ** np.arange(8, 15)
        values = []
        for n in sizes:
            sign = rng.choice([-1.0, 1.0], size=4000)
            z = sign * (rng.binomial(n, 0.9, size=4000) - n / 2.0)
            values.append(observables.qfi(z))
        slope = np.polyfit(np.log(sizes), np.log(values), 1)[0]
        self.assertAlmostEqual(2.0, slope, delta=0.05)

    @ddt.data(('exponential', 1, None, (1.0, 0.5)),
              ('power', 2, 3.0, (1.0, 0.5)),
              ('power', 2, 1.5, (0.5, 0.25)),
              ('power', 2, 0.5, (2.0, 1.0)),
              ('long-range', 3, None, (2.0, 1.0)))
    @ddt.unpack
    def test_classification(self, decay, d, p, expected):
        result = observables.classify_qfi_scaling(decay, d, p)
        self.assertEqual(expected, (result.qfi, result.sensitivity))

    @ddt.data(2.0, 1.0)
    def test_marginal(self, p):
        self.assertRaises(exceptions.MarginalCorrelationDecay,
                          observables.classify_qfi_scaling, 'power', 2, p)


class ThermalizationTest(base.TestCase):

    def test_exponential_relaxation(self):
        times = np.linspace(0.0, 30.0, 3001)
        m_xy = 0.4 + 0.6 * np.exp(-times)
        self.assertAlmostEqual(0.4, observables.plateau(times, m_xy),
                               places=6)
        self.assertAlmostEqual(np.log(30.0),
                               observables.thermalization_time(times, m_xy),
                               delta=0.02)


class SeriesTest(base.TestCase):

    def test_from_trajectories(self):
        rng = utils.stream(5, 0)
        n = 16
        c = np.zeros((200, 3, 3))
        c[..., 0] = n / 2.0
        c[..., 1] = rng.normal(scale=2.0, size=(200, 3))
        c[..., 2] = np.round(rng.normal(scale=2.0, size=200))[:, None]
        series = observables.ObservableSeries.from_trajectories(
            [0.0, 1.0, 2.0], c, n, conditional_mode='z-binned')
        self.assertEqual(200, series.n_traj)
        self.assertEqual(3, len(series.xi2))
        self.assertTrue(np.all(np.isfinite(series.err_xi2)))
        self.assertTrue(np.all(series.err_xi2 > 0))
        rows = list(series.rows())
        self.assertEqual(3, len(rows))
        self.assertEqual(len(observables.SERIES_COLUMNS), len(rows[0]))

    def test_depolarized_row(self):
        c = np.zeros((10, 1, 3))
        c[:, 0, 1] = np.arange(10)
        series = observables.ObservableSeries.from_trajectories([0.0], c, 4)
        row = next(series.rows())
        self.assertEqual(observables.DEPOLARIZED, row[7])
