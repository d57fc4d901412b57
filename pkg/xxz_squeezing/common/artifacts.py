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


import csv
import math
import os
import time

import numpy as np
from oslo_log import log as logging
from oslo_serialization import jsonutils

from xxz_squeezing import utils
from xxz_squeezing import version

LOG = logging.getLogger(__name__)

RESOLVED_CONFIG = 'resolved_config.json'
MANIFEST = 'manifest.json'


def plain(value):
    """numpy scalars to Python ones, NaN to None."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, dict):
        return {k: plain(v) for k, v in value.items()}
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _cell(value):
    value = plain(value)
    if value is None:
        return 'nan'
    return value


def write_table(directory, name, columns, rows, metadata=None,
                jsonl=False):
    """Write ``<name>.csv`` and optionally the ``<name>.jsonl`` mirror.

    The CSV starts with one ``# key=value`` line per metadata entry,
    followed by the column header and the rows.

    :return: list of written paths
    """
    os.makedirs(directory, exist_ok=True)
    rows = [tuple(r) for r in rows]
    path = os.path.join(directory, name + '.csv')
    with open(path, 'w', newline='', encoding='utf-8') as f:
        for key, value in sorted((metadata or {}).items()):
            f.write('# %s=%s\n' % (key, jsonutils.dumps(plain(value))))
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    paths = [path]
    if jsonl:
        mirror = os.path.join(directory, name + '.jsonl')
        with open(mirror, 'w', encoding='utf-8') as f:
            for row in rows:
                record = dict(zip(columns, (plain(v) for v in row)))
                f.write(jsonutils.dumps(record, sort_keys=True) + '\n')
        paths.append(mirror)
    LOG.debug('Wrote %d rows to %s', len(rows), path)
    return paths


def _parse(value):
    try:
        return float(value)
    except ValueError:
        return value


def read_table(path):
    """Read a table written by write_table.

    :return: (metadata dict, list of row dicts); numeric cells are floats
    """
    metadata = {}
    with open(path, newline='', encoding='utf-8') as f:
        lines = f.read().splitlines()
    body = []
    for line in lines:
        if line.startswith('#'):
            key, _, value = line[1:].strip().partition('=')
            metadata[key] = jsonutils.loads(value)
        elif line:
            body.append(line)
    reader = csv.DictReader(body)
    rows = [{k: _parse(v) for k, v in row.items()} for row in reader]
    return metadata, rows


def write_json(directory, name, data):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(jsonutils.dumps(plain(data), indent=2, sort_keys=True))
        f.write('\n')
    return path


class Manifest(object):
    """Seeds, timings, files and toolkit version of one run."""

    def __init__(self, mode, seed):
        self.mode = mode
        self.seed = seed
        self.seeds = {}
        self.timings = {}
        self.files = []
        self.failures = []
        self._started = time.time()

    def stage(self, name):
        return _Stage(self, name)

    def add_files(self, paths):
        self.files.extend(os.path.basename(p) for p in paths)

    def to_dict(self):
        return {
            'mode': self.mode,
            'master_seed': self.seed,
            'seed_rule': utils.SEED_RULE,
            'seeds': self.seeds,
            'timings': self.timings,
            'files': sorted(self.files),
            'failures': self.failures,
            'started': self._started,
            'version': version.version_info.version_string(),
        }

    def write(self, directory):
        self.timings['total'] = time.time() - self._started
        return write_json(directory, MANIFEST, self.to_dict())


class _Stage(object):

    def __init__(self, manifest, name):
        self.manifest = manifest
        self.name = name

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.manifest.timings[self.name] = time.monotonic() - self.start
        return False
