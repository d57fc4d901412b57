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


import fixtures

from xxz_squeezing import config
from xxz_squeezing.tests import base


class ConfigTest(base.TestCase):

    def test_defaults(self):
        conf = config.new_conf()
        self.assertEqual('dtwa', conf.mode)
        self.assertEqual(1, conf.workers)
        self.assertEqual(64, conf.lattice.L)
        self.assertEqual('z-constrained', conf.observables.conditional_mode)
        self.assertEqual([1.05, 1.25, 1.5, 1.75, 1.95],
                         conf.spinwave.alphas)
        self.assertIsNone(conf.quantum.chi)

    def test_file_overrides(self):
        directory = self.useFixture(fixtures.TempDir()).path
        path = base.write_config(directory, {
            'DEFAULT': {'mode': 'oat', 'seed': 5},
            'lattice': {'L': 16, 'alpha': 2.5},
            'sweep': {'j_z': '-1.0, 0.5'},
        })
        conf = config.new_conf(path)
        self.assertEqual('oat', conf.mode)
        self.assertEqual(5, conf.seed)
        self.assertEqual(16, conf.lattice.L)
        self.assertEqual(2.5, conf.lattice.alpha)
        self.assertEqual([-1.0, 0.5], conf.sweep.j_z)

    def test_resolved(self):
        record = config.resolved(config.new_conf())
        self.assertEqual('dtwa', record['mode'])
        self.assertEqual(1.5, record['lattice']['alpha'])
        for group, _ in config.GROUPS:
            self.assertIn(group.name, record)

    def test_list_opts(self):
        names = [g.name for g, _ in config.list_opts()[1:]]
        self.assertEqual([g.name for g, _ in config.GROUPS], names)
        self.assertIsNone(config.list_opts()[0][0])
