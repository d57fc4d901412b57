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

"""Discrete truncated Wigner sampling and mean-field spin evolution.

Each trajectory is a set of classical spins s_i evolving as

    ds_i/dt = s_i x B_i,   B_i = -dH_cl/ds_i

where H_cl is the Pauli Hamiltonian with sigma -> 2 s, so that
B_i = 4 sum_j w_ij (J_perp s^x_j, J_perp s^y_j, J_z s^z_j). This is the
Heisenberg equation of the quantum model. Writing the cross product the
other way round runs the same flow backwards in time, which only flips
the sign of <ZY>.
"""

import dataclasses

import numpy as np
from oslo_log import log as logging

from xxz_squeezing import exceptions
from xxz_squeezing import model
from xxz_squeezing import observables
from xxz_squeezing import utils

LOG = logging.getLogger(__name__)

INITIAL_LENGTH = np.sqrt(3.0) / 2.0


@dataclasses.dataclass
class SpinEnsemble(object):
    spins: np.ndarray
    seed: int
    polarization: float
    z_constrained: bool = False

    @property
    def trajectories(self):
        return self.spins.shape[0]

    @property
    def n(self):
        return self.spins.shape[1]

    @property
    def seed_rule(self):
        return utils.SEED_RULE


@dataclasses.dataclass(frozen=True)
class IntegratorConfig(object):
    dt: float
    t_max: float
    stride: int = 10
    method: str = 'rk4'

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError('dt must be positive, got %s' % self.dt)
        if self.t_max < self.dt:
            raise ValueError('t_max=%s is shorter than dt=%s'
                             % (self.t_max, self.dt))
        if self.method != 'rk4':
            raise ValueError('only fixed-step rk4 is available, got %s'
                             % self.method)

    @property
    def steps(self):
        return int(round(self.t_max / self.dt))

    @property
    def output_steps(self):
        return np.arange(0, self.steps + 1, self.stride)

    @property
    def times(self):
        return self.output_steps * self.dt

    @classmethod
    def from_conf(cls, section, spec):
        dt = section.dt or default_timestep(spec)
        return cls(dt=dt, t_max=section.t_max, stride=section.stride)


def default_timestep(spec):
    """One hundredth of the inverse local energy scale J eta(0)."""
    scale = max(abs(spec.j_perp), abs(spec.j_z)) * model.build_row_sum(spec)
    return 0.01 / scale if scale > 0 else 0.01


def _sample_one(n, polarization, rng, z_constrained):
    spins = np.empty((n, 3))
    up = rng.random(n) < (1.0 + polarization) / 2.0
    spins[:, 0] = np.where(up, 0.5, -0.5)
    spins[:, 1] = rng.integers(0, 2, size=n) - 0.5
    if z_constrained:
        spins[:, 2] = rng.permutation(np.repeat([0.5, -0.5], n // 2))
    else:
        spins[:, 2] = rng.integers(0, 2, size=n) - 0.5
    return spins


def sample_initial(spec, polarization, trajectories, seed,
                   z_constrained=False):
    """Discrete Wigner samples of the x-polarized product state.

    :param spec: LatticeSpec
    :param polarization: p in [0, 1]
    :param trajectories: number of trajectories T
    :param seed: master seed, trajectory i uses stream i
    :param z_constrained: sample an exactly balanced Z=0 ensemble
    :return: SpinEnsemble
    """
    if not 0.0 <= polarization <= 1.0:
        raise exceptions.InvalidPolarization(p=polarization)
    if trajectories < 1:
        raise ValueError('need at least one trajectory')
    n = spec.n
    if z_constrained and n % 2:
        raise exceptions.OddSiteCount(n=n)
    spins = np.stack([
        _sample_one(n, polarization, utils.stream(seed, i), z_constrained)
        for i in range(trajectories)])
    return SpinEnsemble(spins=spins, seed=seed, polarization=polarization,
                        z_constrained=z_constrained)


class XXZForce(object):
    """Local fields of the power-law XXZ Hamiltonian."""

    def __init__(self, spec, couplings=None):
        self.spec = spec
        self.couplings = couplings or model.build_couplings(spec)
        self.scale = 4.0 * np.array([spec.j_perp, spec.j_perp, spec.j_z])

    def field(self, spins):
        t, n, _ = spins.shape
        flat = spins.transpose(1, 0, 2).reshape(n, -1)
        local = np.dot(self.couplings.weights, flat)
        return local.reshape(n, t, 3).transpose(1, 0, 2) * self.scale

    def energy(self, spins):
        return model.classical_energy(spins, self.couplings, self.spec)


class TwistForce(object):
    """All-to-all one-axis twisting, H = chi Z**2 / N.

    Every spin precesses about z at a rate set by its own trajectory's
    collective Z, so each Z-slice rotates rigidly.
    """

    def __init__(self, chi, n):
        self.chi = chi
        self.n = n

    def field(self, spins):
        z = spins[..., 2].sum(axis=-1)
        out = np.zeros_like(spins)
        out[..., 2] = (-2.0 * self.chi * z / self.n)[:, None]
        return out

    def energy(self, spins):
        return self.chi * spins[..., 2].sum(axis=-1) ** 2 / self.n


class CollectiveSpin(object):
    name = 'collective'
    shape = (3,)

    def __call__(self, spins, force):
        return spins.sum(axis=1)


class ClassicalEnergy(object):
    name = 'energy'
    shape = ()

    def __call__(self, spins, force):
        return force.energy(spins)


class SpinLength(object):
    """Largest deviation of any |s_i| from its initial length."""
    name = 'spin_length'
    shape = ()

    def __call__(self, spins, force):
        norms = np.sqrt((spins ** 2).sum(axis=-1))
        return np.abs(norms - INITIAL_LENGTH).max(axis=-1)


RECORDERS = {
    'energy': ClassicalEnergy,
    'spin_length': SpinLength,
}


def _derivative(spins, force):
    return np.cross(spins, force.field(spins))


def rk4_step(spins, force, dt):
    k1 = _derivative(spins, force)
    k2 = _derivative(spins + 0.5 * dt * k1, force)
    k3 = _derivative(spins + 0.5 * dt * k2, force)
    k4 = _derivative(spins + dt * k3, force)
    return spins + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


_WORKER = {}


def _install(force, cfg, recorders):
    _WORKER['force'] = force
    _WORKER['cfg'] = cfg
    _WORKER['recorders'] = recorders


def _run_chunk(spins):
    force = _WORKER['force']
    cfg = _WORKER['cfg']
    recorders = _WORKER['recorders']
    spins = np.array(spins, dtype=float)
    count = spins.shape[0]
    outputs = set(cfg.output_steps.tolist())
    records = {r.name: np.full((count, len(outputs)) + r.shape, np.nan)
               for r in recorders}
    alive = np.ones(count, dtype=bool)
    slot = 0
    with np.errstate(over='ignore', invalid='ignore'):
        for step in range(cfg.steps + 1):
            if step in outputs:
                for r in recorders:
                    records[r.name][alive, slot] = r(spins, force)[alive]
                slot += 1
            if step == cfg.steps:
                break
            spins = rk4_step(spins, force, cfg.dt)
            bad = ~np.isfinite(spins).all(axis=(1, 2))
            if bad.any():
                alive &= ~bad
                # Zero spins are a fixed point of the flow.
                spins[bad] = 0.0
    return records, alive


def evolve(ensemble, spec, cfg, recorders=None, force=None, workers=1,
           chunk_size=16, abort_fraction=1e-3, conditional_mode=None,
           min_bin_population=10, floor=observables.DEFAULT_FLOOR):
    """Evolve every trajectory and reduce to an ObservableSeries.

    Work is split in chunks of ``chunk_size`` trajectories regardless of
    ``workers``, and the chunks are reassembled in trajectory order, so the
    output is independent of scheduling.

    :param ensemble: SpinEnsemble sampled for ``spec``
    :param spec: LatticeSpec
    :param cfg: IntegratorConfig
    :param recorders: extra recorder instances; the collective spin is
        always recorded
    :param force: field evaluator, defaults to XXZForce(spec)
    :param workers: worker pool size
    :param floor: depolarization floor on the mean collective X
    :return: ObservableSeries carrying the per-trajectory records
    """
    if ensemble.n != spec.n:
        raise exceptions.InvalidLatticeSpec(
            reason='ensemble has %d sites, lattice %d' % (ensemble.n,
                                                           spec.n))
    force = force or XXZForce(spec)
    recorders = [CollectiveSpin()] + list(recorders or [])
    tasks = [ensemble.spins[lo:hi]
             for lo, hi in utils.chunks(ensemble.trajectories, chunk_size)]
    LOG.info('Evolving %d trajectories of %d spins over %d steps',
             ensemble.trajectories, spec.n, cfg.steps)

    results = utils.map_chunks(_run_chunk, tasks, workers=workers,
                               initializer=_install,
                               initargs=(force, cfg, recorders))

    alive = np.concatenate([a for _, a in results])
    records = {r.name: np.concatenate([rec[r.name] for rec, _ in results])
               for r in recorders}
    aborted = np.flatnonzero(~alive)
    if aborted.size:
        LOG.warning('Trajectories diverged and were dropped: %s',
                    ', '.join(utils.stream_labels(ensemble.seed, aborted)))
    if aborted.size > abort_fraction * ensemble.trajectories:
        raise exceptions.DTWADivergence(
            aborted=aborted.size, total=ensemble.trajectories,
            allowed=abort_fraction,
            seeds=', '.join(utils.stream_labels(ensemble.seed, aborted)))

    if conditional_mode is None:
        conditional_mode = ('z-constrained' if ensemble.z_constrained
                            else 'z-binned')
    extras = {name: values[alive] for name, values in records.items()
              if name != CollectiveSpin.name}
    return observables.ObservableSeries.from_trajectories(
        cfg.times, records[CollectiveSpin.name][alive], spec.n,
        conditional_mode=conditional_mode,
        z_constrained=ensemble.z_constrained,
        min_bin_population=min_bin_population,
        floor=floor, extras=extras, aborted=aborted)
