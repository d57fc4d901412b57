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


import math

import ddt
import numpy as np
from scipy import linalg

from xxz_squeezing import exceptions
from xxz_squeezing import model
from xxz_squeezing import observables
from xxz_squeezing.quantum import basis
from xxz_squeezing.quantum import echo
from xxz_squeezing.tests import base
from xxz_squeezing import utils


def split(vector, n):
    """Dense n-spin state as a list of SectorState."""
    return [echo.SectorState(n, k, vector[basis.Sector(n, k).states])
            for k in range(n + 1)]


def join(sectors, n):
    vector = np.zeros(2 ** n, dtype=complex)
    for state in sectors:
        vector[basis.Sector(n, state.n_up).states] = state.amplitudes
    return vector


def random_vector(n, index=0):
    rng = utils.stream(17, index)
    vec = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return vec / np.linalg.norm(vec)


@ddt.ddt
class DecompositionTest(base.TestCase):

    def test_two_spins(self):
        weights = [float(s.weight) for s in echo.decompose_css(2)]
        self.assertArrayClose([0.25, 0.5, 0.25], weights)

    @ddt.data(3, 8, 13)
    def test_weights_and_variance(self, n):
        state = echo.DecomposedState(echo.decompose_css(n))
        total = sum(float(s.weight) for s in state.sectors)
        self.assertAlmostEqual(1.0, total, places=12)
        self.assertAlmostEqual(n / 4.0, float(state.variance('z')),
                               places=10)
        self.assertAlmostEqual(0.0, float(state.variance('x')), places=10)
        self.assertAlmostEqual(n, observables.qfi(state, 'z'), places=9)

    def test_matches_dense_css(self):
        self.assertArrayClose(base.css_vector(6),
                              join(echo.decompose_css(6), 6), atol=1e-15)

    def test_too_many_sites(self):
        self.assertRaises(exceptions.SectorTooLarge, echo.decompose_css, 21)


class MomentsTest(base.TestCase):

    def test_css(self):
        moments = echo.collective_moments(echo.decompose_css(10))
        self.assertAlmostEqual(5.0, float(moments.mean_x))
        self.assertAlmostEqual(25.0, float(moments.x2))
        self.assertAlmostEqual(2.5, float(moments.y2))
        self.assertAlmostEqual(2.5, float(moments.z2))
        self.assertAlmostEqual(0.0, float(moments.zy))
        self.assertAlmostEqual(1.0, observables.squeezing(moments))

    def test_random_state_matches_dense(self):
        n = 6
        vec = random_vector(n)
        x, y, z = base.collective_operators(n)

        def expect(op):
            return np.vdot(vec, op.dot(vec))

        moments = echo.collective_moments(split(vec, n))
        self.assertAlmostEqual(expect(x).real, float(moments.mean_x))
        self.assertAlmostEqual(expect(y).real, float(moments.mean_y))
        self.assertAlmostEqual(expect(z).real, float(moments.mean_z))
        self.assertAlmostEqual(expect(x.dot(x)).real, float(moments.x2))
        self.assertAlmostEqual(expect(y.dot(y)).real, float(moments.y2))
        self.assertAlmostEqual(expect(z.dot(z)).real, float(moments.z2))
        self.assertAlmostEqual(expect(z.dot(y)).real, float(moments.zy))

    def test_casimir(self):
        n = 8
        self.assertAlmostEqual(4.0 * 5.0,
                               float(echo.casimir(echo.decompose_css(n))))
        vec = random_vector(n, 1)
        x, y, z = base.collective_operators(n)
        total = x.dot(x) + y.dot(y) + z.dot(z)
        self.assertAlmostEqual(np.vdot(vec, total.dot(vec)).real,
                               float(echo.casimir(split(vec, n))))


class EvolutionTest(base.TestCase):

    def test_sector_evolution_matches_full_space(self):
        spec = model.LatticeSpec(L=8, alpha=1.5, j_z=-0.4)
        ham = basis.Hamiltonian.xxz(spec)
        dense = base.dense_hamiltonian(spec)
        times = np.array([0.0, 0.5, 1.0])
        series = echo.evolve_sectors(ham, echo.decompose_css(8), times)
        for k, t in enumerate(times):
            expected = linalg.expm(-1j * t * dense).dot(base.css_vector(8))
            snapshot = [echo.SectorState(8, s.n_up, s.amplitudes[k])
                        for s in series]
            self.assertArrayClose(expected, join(snapshot, 8), atol=1e-8)

    def test_css_moments_match_full_space(self):
        spec = model.LatticeSpec(L=6, alpha=1.2)
        ham = basis.Hamiltonian.xxz(spec)
        dense = base.dense_hamiltonian(spec)
        _, y, _ = base.collective_operators(6)
        moments = echo.evolve_css(ham, [0.0, 0.7])
        state = linalg.expm(-0.7j * dense).dot(base.css_vector(6))
        self.assertAlmostEqual(np.vdot(state, y.dot(y).dot(state)).real,
                               moments.y2[1], places=8)
        self.assertAlmostEqual(1.5, moments.y2[0], places=10)

    def test_heisenberg_point_conserves_casimir(self):
        spec = model.LatticeSpec(L=6, alpha=1.5, j_z=1.0)
        ham = basis.Hamiltonian.xxz(spec)
        start = split(random_vector(6, 2), 6)
        before = float(echo.casimir(start))
        after = [echo.krylov_evolve(s, ham, 3.0) for s in start]
        self.assertAlmostEqual(before, float(echo.casimir(after)), places=8)

    def test_evolution_keeps_sector_weights(self):
        spec = model.LatticeSpec(L=8, alpha=1.5)
        ham = basis.Hamiltonian.xxz(spec)
        start = echo.decompose_css(8)
        series = echo.evolve_sectors(ham, start, [0.0, 2.0])
        for before, after in zip(start, series):
            self.assertAlmostEqual(float(before.weight),
                                   float(after.weight[1]), places=10)


class ChiExtractionTest(base.TestCase):

    def test_pure_twisting_recovers_chi(self):
        result = echo.extract_chi(10, hamiltonian=basis.Hamiltonian.oat(
            10, 3.0))
        self.assertWithin(3.0, result.chi, 1e-6)
        self.assertGreater(result.r2, 0.999999)
        self.assertEqual((), result.flags)
        self.assertEqual(6, len(result.rows()))
        self.assertEqual(-5, result.rows()[0][1])

    def test_long_range_chain_is_linear(self):
        result = echo.extract_chi(10, alpha=1.5, m_range=1)
        self.assertGreater(result.r2, echo.CHI_MIN_R2)
        self.assertGreater(result.chi, 0.0)

    def test_pair_frequency_is_ground_energy_gap(self):
        n = 12
        spec = model.LatticeSpec(L=n, alpha=1.5)
        ham = basis.Hamiltonian.xxz(spec)
        result = echo.extract_chi(n, hamiltonian=ham, m_range=0)
        for m, delta_e, _ in result.delta_e:
            k = int(m + n / 2)
            gap = (basis.sector_ground_energy(ham, basis.Sector(n, k + 1)) -
                   basis.sector_ground_energy(ham, basis.Sector(n, k)))
            self.assertWithin(gap, delta_e, 0.05)


class EchoTest(base.TestCase):

    def test_twist_is_undone(self):
        cfg = echo.EchoConfig(n=8, chi=2.0, times=np.linspace(0, 3, 7))
        var = echo.var_q_conditional(cfg, forward=basis.Hamiltonian.oat(
            8, 2.0))
        self.assertArrayClose(np.full(7, 2.0), var, atol=1e-9)

    def test_xxz_echo(self):
        cfg = echo.EchoConfig(n=8, chi=1.0, times=np.linspace(0, 2, 5))
        var = echo.var_q_conditional(cfg)
        self.assertAlmostEqual(2.0, var[0], places=10)
        self.assertTrue(np.all(var >= 0))
        self.assertTrue(np.all(var <= 16.0))

    def test_config(self):
        self.assertRaises(exceptions.SectorTooLarge, echo.EchoConfig, n=21)
        self.assertRaises(exceptions.InvalidLatticeSpec,
                          echo.EchoConfig(n=10, d=2).lattice)
        cfg = echo.EchoConfig(n=16, d=2)
        self.assertEqual(4, cfg.lattice().L)
        self.assertEqual(41, len(cfg.times))

    def test_truncation_radius(self):
        self.assertAlmostEqual(2.5 * math.sqrt(20), echo.truncation_radius(20))
