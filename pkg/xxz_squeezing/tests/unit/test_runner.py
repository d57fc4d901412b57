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


import json
import os

import fixtures
import numpy as np

from xxz_squeezing.common import artifacts
from xxz_squeezing import config
from xxz_squeezing import exceptions
from xxz_squeezing import observables
from xxz_squeezing import runner
from xxz_squeezing.tests import base
from xxz_squeezing import utils

SMALL_DTWA = {
    'DEFAULT': {'mode': 'dtwa', 'seed': 3},
    'lattice': {'L': 8, 'alpha': 1.5},
    'dtwa': {'trajectories': 40, 't_max': 0.5, 'dt': 0.01, 'stride': 5,
             'recorders': 'energy'},
}


class RunnerTestCase(base.TestCase):

    def setUp(self):
        super(RunnerTestCase, self).setUp()
        self.directory = self.useFixture(fixtures.TempDir()).path
        self.useFixture(fixtures.EnvironmentVariable(runner.OUTPUT_DIR_ENV))

    def conf(self, sections, name='run.conf'):
        path = base.write_config(self.directory, sections, name)
        return config.new_conf(path), path

    def out(self, name):
        return os.path.join(self.directory, name)

    def read(self, directory, name):
        with open(os.path.join(directory, name)) as f:
            return f.read()


class ValidateTest(RunnerTestCase):

    def assertInvalid(self, sections, key, sweep=False):
        conf, path = self.conf(sections)
        e = self.assertRaises(exceptions.ConfigValidationError,
                              runner.validate, conf, path, sweep)
        self.assertIn(key, str(e))

    def test_valid(self):
        conf, path = self.conf(SMALL_DTWA)
        runner.validate(conf, path)

    def test_unknown_section(self):
        self.assertInvalid({'lattices': {'L': 8}}, 'lattices')

    def test_unknown_option(self):
        self.assertInvalid({'lattice': {'size': 8}}, 'lattice.size')

    def test_bad_value(self):
        self.assertInvalid({'lattice': {'d': 5}}, 'lattice.d')

    def test_even_window(self):
        self.assertInvalid({'fit': {'window': 8}}, 'fit.window')

    def test_invalid_lattice(self):
        self.assertInvalid({'lattice': {'alpha': -1.0}}, 'lattice')

    def test_fit_needs_input(self):
        self.assertInvalid({'DEFAULT': {'mode': 'fit'}}, 'fit.input')

    def test_empty_sweep(self):
        self.assertInvalid(SMALL_DTWA, 'sweep', sweep=True)

    def test_missing_file(self):
        conf = config.new_conf()
        self.assertRaises(exceptions.ConfigValidationError, runner.validate,
                          conf, self.out('missing.conf'))


class OutputDirTest(RunnerTestCase):

    def test_precedence(self):
        conf = config.new_conf()
        self.assertEqual('xxz-output', runner.output_dir(conf))
        self.useFixture(fixtures.EnvironmentVariable(runner.OUTPUT_DIR_ENV,
                                                     '/tmp/from-env'))
        self.assertEqual('/tmp/from-env', runner.output_dir(conf))
        self.assertEqual('/tmp/cli', runner.output_dir(conf, '/tmp/cli'))


class RunTest(RunnerTestCase):

    def test_oat(self):
        conf, path = self.conf({
            'DEFAULT': {'mode': 'oat', 'output_format': 'jsonl'},
            'oat': {'n': 1024, 'points': 20,
                    'scaling_sizes': '1024, 4096, 16384, 65536'},
        })
        manifest_path = runner.run(conf, self.out('oat'), path)
        with open(manifest_path) as f:
            manifest = json.load(f)
        self.assertEqual('oat', manifest['mode'])
        self.assertIn('oat.csv', manifest['files'])
        self.assertIn('oat.jsonl', manifest['files'])
        self.assertIn(artifacts.RESOLVED_CONFIG, manifest['files'])
        metadata, rows = artifacts.read_table(self.out('oat/oat.csv'))
        self.assertEqual(20, len(rows))
        self.assertEqual(256.0, metadata['v0'])
        scaling, table = artifacts.read_table(
            self.out('oat/oat_scaling.csv'))
        self.assertEqual(4, len(table))
        self.assertAlmostEqual(-2 / 3., scaling['fitted_xi2'], delta=0.02)

    def test_dtwa_is_reproducible(self):
        conf, path = self.conf(SMALL_DTWA)
        runner.run(conf, self.out('a'), path)
        runner.run(conf, self.out('b'), path)
        for name in ('series.csv', 'series_energy.csv', 'summary.json'):
            self.assertEqual(self.read(self.out('a'), name),
                             self.read(self.out('b'), name))
        metadata, rows = artifacts.read_table(self.out('a/series.csv'))
        self.assertEqual(11, len(rows))
        self.assertEqual(3, metadata['seed'])
        self.assertEqual('z-binned', metadata['conditional_mode'])

    def test_depolarization_floor_is_applied(self):
        sections = dict(SMALL_DTWA,
                        observables={'depolarization_floor': 10.0})
        conf, path = self.conf(sections)
        runner.run(conf, self.out('floor'), path)
        _, rows = artifacts.read_table(self.out('floor/series.csv'))
        self.assertEqual(11, len(rows))
        self.assertTrue(all(row['xi2'] == observables.DEPOLARIZED
                            for row in rows))
        summary = json.loads(self.read(self.out('floor'), 'summary.json'))
        self.assertEqual('no-optimum', summary['flags'])

    def test_dtwa_independent_of_workers(self):
        conf, path = self.conf(SMALL_DTWA)
        runner.run(conf, self.out('one'), path)
        conf.set_override('workers', 2)
        runner.run(conf, self.out('two'), path)
        self.assertEqual(self.read(self.out('one'), 'series.csv'),
                         self.read(self.out('two'), 'series.csv'))

    def test_hydro(self):
        conf, path = self.conf({
            'DEFAULT': {'mode': 'hydro'},
            'lattice': {'L': 16},
            'hydro': {'t_max': 0.5, 'stride': 100, 'realizations': 32,
                      'bootstrap': 20},
        })
        runner.run(conf, self.out('hydro'), path)
        metadata, rows = artifacts.read_table(
            self.out('hydro/zero_mode.csv'))
        self.assertEqual(6, len(rows))
        self.assertAlmostEqual(2 * 0.5 / 16, metadata['expected_slope'])
        _, spectrum = artifacts.read_table(self.out('hydro/spectrum.csv'))
        self.assertEqual(16, len(spectrum))

    def test_quantum(self):
        conf, path = self.conf({
            'DEFAULT': {'mode': 'quantum'},
            'quantum': {'n': 6, 'points': 5, 't_max': 1.0, 'm_max': 1,
                        'chi_points': 100, 'chi_t_max': 20.0},
        })
        runner.run(conf, self.out('q'), path)
        metadata, rows = artifacts.read_table(self.out('q/delta_e.csv'))
        self.assertEqual(4, len(rows))
        echo_meta, echo_rows = artifacts.read_table(self.out('q/echo.csv'))
        self.assertEqual(metadata['chi'], echo_meta['chi'])
        self.assertAlmostEqual(1.5, echo_rows[0]['var_q'])
        _, series = artifacts.read_table(self.out('q/quantum_series.csv'))
        self.assertAlmostEqual(1.0, series[0]['xi2'])

    def test_spinwave_with_table(self):
        table = os.path.join(self.directory, 'energy.yaml')
        with open(table, 'w') as f:
            for j_z in (-4.0, -2.0, 0.0, 1.0):
                f.write('- {alpha: 1.5, j_z: %s, energy: %s}\n'
                        % (j_z, 0.2 * (1 - j_z)))
        conf, path = self.conf({
            'DEFAULT': {'mode': 'spinwave'},
            'spinwave': {'alphas': '1.5', 'energy_table': table},
        })
        runner.run(conf, self.out('sw'), path)
        _, rows = artifacts.read_table(self.out('sw/spinwave.csv'))
        self.assertEqual(1, len(rows))
        self.assertTrue(-6.0 < rows[0]['j_c'] < 1.0)


class SweepTest(RunnerTestCase):

    def test_grid(self):
        sections = dict(SMALL_DTWA, sweep={'j_z': '-1.0, 0.0',
                                           'L': '4, 8'})
        conf, _ = self.conf(sections)
        points = runner.grid(conf)
        self.assertEqual([{'j_z': -1.0, 'L': 4}, {'j_z': -1.0, 'L': 8},
                          {'j_z': 0.0, 'L': 4}, {'j_z': 0.0, 'L': 8}],
                         points)

    def test_sweep(self):
        sections = dict(SMALL_DTWA, sweep={'L': '4, 8'})
        conf, path = self.conf(sections)
        manifest_path = runner.sweep(conf, self.out('sweep'), path)
        with open(manifest_path) as f:
            manifest = json.load(f)
        self.assertEqual(utils.derive_seed(3, 1),
                         manifest['seeds']['point-0001'])
        _, rows = artifacts.read_table(self.out('sweep/aggregate.csv'))
        self.assertEqual([4.0, 8.0], [r['L'] for r in rows])
        self.assertEqual([4.0, 8.0], [r['n'] for r in rows])
        self.assertTrue(os.path.exists(self.out('sweep/point-0001.csv')))

        spec = runner.model.LatticeSpec(L=8, alpha=1.5)
        series, _ = runner.dtwa_point(conf, spec, 1.0,
                                      utils.derive_seed(3, 1))
        _, point_rows = artifacts.read_table(
            self.out('sweep/point-0001.csv'))
        self.assertArrayClose(series.moments.mean_x,
                              [r['mean_x'] for r in point_rows])

    def test_failed_point(self):
        sections = dict(SMALL_DTWA, sweep={'alpha': '1.5, -1.0'})
        conf, path = self.conf(sections)
        e = self.assertRaises(exceptions.SweepFailure, runner.sweep, conf,
                              self.out('sweep'), path)
        self.assertIn('1 of 2', str(e))
        _, rows = artifacts.read_table(self.out('sweep/aggregate.csv'))
        self.assertEqual(1, len(rows))
        with open(self.out('sweep/manifest.json')) as f:
            self.assertEqual(1, json.load(f)['failures'][0]['index'])


class FitTest(RunnerTestCase):

    def test_fit_table(self):
        control = np.linspace(-4.0, 0.0, 21)
        rows = []
        for i, (j_z, nu) in enumerate(zip(control, 0.4 * np.clip(
                (control + 2.6) / 0.4, 0.0, 1.0))):
            for n in (128, 256, 512, 1024, 2048):
                rows.append((i, j_z, 1.5, n, 1.0, n, 0, n ** -nu, 0.0, 1.0,
                             0.5, 0.4, ''))
        rows.append((99, 0.0, 1.5, 64, 1.0, 64, 0, np.nan, np.nan, np.nan,
                     0.5, 0.4, 'no-optimum'))
        path = artifacts.write_table(self.directory, 'aggregate',
                                     runner.AGGREGATE_COLUMNS, rows)[0]
        conf = config.new_conf()
        runner.fit_table(conf, self.out('fit'), path)
        _, nu = artifacts.read_table(self.out('fit/nu.csv'))
        self.assertEqual(21, len(nu))
        self.assertEqual(5.0, nu[-1]['sizes'])
        with open(self.out('fit/critical_point.json')) as f:
            critical = json.load(f)
        self.assertAlmostEqual(-2.4, critical['jc'], delta=0.05)
