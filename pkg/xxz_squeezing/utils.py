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

from concurrent import futures

import numpy as np
from oslo_log import log as logging

LOG = logging.getLogger(__name__)

SEED_RULE = ('stream i draws from Philox(SeedSequence(master_seed, '
             'spawn_key=(i,)))')


def stream(seed, index):
    """Return the counter-based generator of stream ``index``.

    Streams depend only on (seed, index), never on how work is split.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, index):
    """Derive a 64-bit child seed, used for sweep points."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def stream_labels(seed, indices, limit=20):
    """Name the first ``limit`` streams so a trajectory can be replayed."""
    return ['%d (SeedSequence(%d, spawn_key=(%d,)))'
            % (int(i), int(seed), int(i))
            for i in list(indices)[:limit]]


def chunks(total, size):
    return [(start, min(start + size, total))
            for start in range(0, total, size)]


def map_chunks(func, tasks, workers=1, initializer=None, initargs=()):
    """Run ``func`` over ``tasks`` and return the results in task order.

    :param func: picklable callable taking one task
    :param tasks: list of task arguments
    :param workers: pool size, 1 runs inline
    :param initializer: called once per worker, or once inline, with
        ``initargs`` before any task runs
    :return: list of results, same order as ``tasks``
    """
    if workers <= 1 or len(tasks) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [func(task) for task in tasks]
    LOG.debug('Dispatching %d tasks to %d workers', len(tasks), workers)
    with futures.ProcessPoolExecutor(max_workers=workers,
                                     initializer=initializer,
                                     initargs=initargs) as executor:
        return list(executor.map(func, tasks))


def jackknife(samples, estimator):
    """Delete-one-block jackknife standard error.

    :param samples: array whose first axis indexes independent samples
    :param estimator: callable mapping a sample array to an array of results
    :return: (full-sample estimate, standard error)
    """
    samples = np.asarray(samples)
    n = samples.shape[0]
    full = np.asarray(estimator(samples))
    if n < 2:
        return full, np.full_like(full, np.nan, dtype=float)
    blocks = min(n, 20)
    edges = np.linspace(0, n, blocks + 1).astype(int)
    partial = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        keep = np.concatenate([samples[:lo], samples[hi:]])
        partial.append(estimator(keep))
    partial = np.asarray(partial, dtype=float)
    mean = partial.mean(axis=0)
    err = np.sqrt((blocks - 1) / blocks *
                  ((partial - mean) ** 2).sum(axis=0))
    return full, err


def bootstrap(samples, estimator, resamples, rng):
    """Bootstrap standard deviation of ``estimator`` over the first axis."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    values = [estimator(samples[rng.integers(0, n, size=n)])
              for _ in range(resamples)]
    return float(np.std(values, ddof=1))
