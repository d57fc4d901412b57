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


import mock
import numpy as np

from xxz_squeezing import dtwa
from xxz_squeezing import exceptions
from xxz_squeezing import model
from xxz_squeezing.tests import base


class SamplingTest(base.TestCase):

    spec = model.LatticeSpec(L=8)

    def test_invalid_polarization(self):
        self.assertRaises(exceptions.InvalidPolarization,
                          dtwa.sample_initial, self.spec, 1.5, 4, 0)

    def test_odd_site_count(self):
        spec = model.LatticeSpec(L=7)
        self.assertRaises(exceptions.OddSiteCount, dtwa.sample_initial,
                          spec, 1.0, 4, 0, z_constrained=True)

    def test_full_polarization(self):
        ensemble = dtwa.sample_initial(self.spec, 1.0, 20, 3)
        self.assertArrayClose(np.full((20, 8), 0.5),
                              ensemble.spins[..., 0], rtol=0)
        self.assertTrue(np.all(np.abs(ensemble.spins[..., 1:]) == 0.5))

    def test_constrained_total_z(self):
        ensemble = dtwa.sample_initial(self.spec, 1.0, 20, 3,
                                       z_constrained=True)
        self.assertArrayClose(np.zeros(20),
                              ensemble.spins[..., 2].sum(axis=1), atol=0)

    def test_streams_independent_of_count(self):
        small = dtwa.sample_initial(self.spec, 0.5, 3, 11)
        large = dtwa.sample_initial(self.spec, 0.5, 6, 11)
        self.assertArrayClose(small.spins, large.spins[:3], rtol=0)

    def test_polarization_statistics(self):
        ensemble = dtwa.sample_initial(model.LatticeSpec(L=100), 0.4, 200, 1)
        self.assertAlmostEqual(0.2, ensemble.spins[..., 0].mean(),
                               delta=0.01)


class IntegratorTest(base.TestCase):

    def test_two_spin_precession(self):
        spec = model.LatticeSpec(L=2)
        force = dtwa.XXZForce(spec)
        spins = np.full((1, 2, 3), 0.5)
        dt = 1e-3
        for _ in range(1000):
            spins = dtwa.rk4_step(spins, force, dt)
        # both spins precess about z at rate 4 J_perp s_z = 2
        self.assertArrayClose(0.5 * (np.cos(2.0) - np.sin(2.0)),
                              spins[0, :, 0], atol=1e-9)
        self.assertArrayClose(0.5 * (np.sin(2.0) + np.cos(2.0)),
                              spins[0, :, 1], atol=1e-9)
        self.assertArrayClose([0.5, 0.5], spins[0, :, 2], atol=1e-12)

    def test_heisenberg_point_conserves_total_spin(self):
        spec = model.LatticeSpec(L=6, alpha=1.5, j_z=1.0)
        force = dtwa.XXZForce(spec)
        ensemble = dtwa.sample_initial(spec, 0.7, 4, 2)
        spins = ensemble.spins
        total = spins.sum(axis=1)
        energy = force.energy(spins)
        for _ in range(200):
            spins = dtwa.rk4_step(spins, force, 0.002)
        self.assertArrayClose(total, spins.sum(axis=1), atol=1e-8)
        self.assertArrayClose(energy, force.energy(spins), atol=1e-6)

    def test_default_timestep(self):
        spec = model.LatticeSpec(L=8, alpha=1.0, j_z=-2.0)
        self.assertAlmostEqual(
            0.01 / (2.0 * model.build_row_sum(spec)),
            dtwa.default_timestep(spec))

    def test_invalid_integrator(self):
        self.assertRaises(ValueError, dtwa.IntegratorConfig, 0.0, 1.0)
        self.assertRaises(ValueError, dtwa.IntegratorConfig, 0.1, 0.01)
        self.assertRaises(ValueError, dtwa.IntegratorConfig, 0.1, 1.0,
                          method='euler')


class EvolveTest(base.TestCase):

    spec = model.LatticeSpec(L=8, alpha=1.5)
    cfg = dtwa.IntegratorConfig(dt=0.01, t_max=0.5, stride=10)

    def _series(self, **kwargs):
        ensemble = dtwa.sample_initial(self.spec, 1.0, 40, 5)
        return dtwa.evolve(ensemble, self.spec, self.cfg, **kwargs)

    def test_shapes_and_initial_state(self):
        series = self._series(
            recorders=[dtwa.RECORDERS['energy'](),
                       dtwa.RECORDERS['spin_length']()])
        self.assertEqual(6, len(series.times))
        self.assertEqual(40, series.n_traj)
        self.assertAlmostEqual(4.0, series.moments.mean_x[0])
        self.assertEqual((40, 6), series.extras['energy'].shape)
        self.assertTrue(np.all(series.extras['spin_length'] < 1e-6))
        spread = np.ptp(series.extras['energy'], axis=1)
        self.assertTrue(np.all(spread < 1e-4))

    def test_chunking_does_not_change_result(self):
        a = self._series(chunk_size=3)
        b = self._series(chunk_size=16)
        self.assertArrayClose(a.trajectories, b.trajectories, rtol=0)

    def test_worker_count_does_not_change_result(self):
        a = self._series(workers=1, chunk_size=8)
        b = self._series(workers=2, chunk_size=8)
        self.assertArrayClose(a.trajectories, b.trajectories, rtol=0)
        self.assertArrayClose(a.xi2, b.xi2, rtol=0)

    def test_divergence_aborts(self):
        with mock.patch.object(dtwa, 'rk4_step',
                               side_effect=lambda s, f, dt: s * np.nan):
            e = self.assertRaises(exceptions.DTWADivergence, self._series)
        self.assertIn('0 (SeedSequence(5, spawn_key=(0,)))', str(e))
        self.assertIn('19 (SeedSequence(5, spawn_key=(19,)))', str(e))
        self.assertNotIn('spawn_key=(20,)', str(e))

    def test_depolarization_floor(self):
        series = self._series(floor=10.0)
        self.assertTrue(np.all(np.isnan(series.xi2)))
        self.assertFalse(np.any(np.isnan(self._series().xi2)))

    def test_lattice_mismatch(self):
        ensemble = dtwa.sample_initial(model.LatticeSpec(L=4), 1.0, 4, 0)
        self.assertRaises(exceptions.InvalidLatticeSpec, dtwa.evolve,
                          ensemble, self.spec, self.cfg)

    def test_twisting_squeezes(self):
        spec = model.LatticeSpec(L=64)
        ensemble = dtwa.sample_initial(spec, 1.0, 300, 9)
        cfg = dtwa.IntegratorConfig(dt=0.01, t_max=2.0, stride=20)
        series = dtwa.evolve(ensemble, spec, cfg,
                             force=dtwa.TwistForce(1.0, spec.n))
        self.assertLess(np.nanmin(series.xi2), 0.5)
        self.assertAlmostEqual(1.0, series.xi2[0], delta=0.25)
