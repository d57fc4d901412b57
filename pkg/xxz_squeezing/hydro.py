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


"""Linearized stochastic hydrodynamics of the phase and magnetization.

Each momentum mode obeys

    dphi_k/dt = 2 g chi m_k - Gamma K_k phi_k + eta_phi
    dm_k/dt   = -g K_k phi_k - 2 Lambda chi k**2 m_k - |k| eta_m

with <|eta_phi|**2> = 2 Gamma T / N and <|eta_m|**2> = 2 Lambda T / N per
unit time. The magnetization noise is the divergence of a random current,
so its variance carries k**2 and the stationary widths are the Gibbs ones,
<|phi_k|**2> = T/(N K_k) and <|m_k|**2> = T/(2 chi N). With
``conserved_noise`` off the noise enters inside the k**2 bracket instead.

The k=0 mode has K_0 = 0 and a conserved m_0 = Z/N, so the global phase
performs a random walk on top of the precession 2 g chi Z/N.
"""

import dataclasses

import numpy as np
from oslo_log import log as logging

from xxz_squeezing.common import fitting
from xxz_squeezing import exceptions
from xxz_squeezing import model
from xxz_squeezing import utils

LOG = logging.getLogger(__name__)

CHUNK_SIZE = 16
NOISE_BLOCK = 256
STABILITY = 0.1


@dataclasses.dataclass(frozen=True)
class HydroParams(object):
    spec: model.LatticeSpec = model.LatticeSpec(d=1, L=100)
    g: float = 1.0
    chi: float = 1.0
    damping: float = 0.5
    transport: float = 0.5
    temperature: float = 1.0
    stiffness: str = 'power'
    k_tilde: float = 1.0
    m_xy: float = 0.5
    z: float = 0.0
    dt: float = 1e-3
    t_max: float = 10.0
    stride: int = 100
    realizations: int = 1000
    initial: str = 'zero'
    conserved_noise: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ('chi', 'damping', 'transport'):
            if not getattr(self, name) > 0:
                raise ValueError('%s must be positive, got %s'
                                 % (name, getattr(self, name)))
        if self.temperature < 0:
            raise ValueError('temperature must be non-negative, got %s'
                             % self.temperature)
        if self.stiffness not in ('power', 'lattice'):
            raise ValueError('unknown stiffness %s' % self.stiffness)
        if self.initial not in ('zero', 'thermal'):
            raise ValueError('unknown initial condition %s' % self.initial)
        if self.realizations < 1:
            raise ValueError('need at least one realization')

    @property
    def n(self):
        return self.spec.n

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
    def from_conf(cls, conf, spec=None):
        h = conf.hydro
        return cls(spec=spec or model.LatticeSpec.from_conf(conf.lattice),
                   g=h.g, chi=h.chi, damping=h.damping,
                   transport=h.transport, temperature=h.temperature,
                   stiffness=h.stiffness, k_tilde=h.k_tilde, m_xy=h.m_xy,
                   z=h.z, dt=h.dt, t_max=h.t_max, stride=h.stride,
                   realizations=h.realizations, initial=h.initial,
                   conserved_noise=h.conserved_noise, seed=conf.seed)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class HydroModes(object):
    """Mode grid with |k| and the stiffness K_k, K_0 = 0."""
    k_norm: np.ndarray
    stiffness: np.ndarray
    shape: tuple

    @classmethod
    def from_params(cls, params):
        sums = model.MomentumSum.from_spec(params.spec)
        k = sums.k_norm
        if params.stiffness == 'lattice':
            stiffness = sums.stiffness(params.spec.j_perp, params.m_xy)
        else:
            stiffness = np.zeros_like(k)
            nonzero = k > 0
            exponent = params.spec.alpha - params.spec.d
            stiffness[nonzero] = params.k_tilde * k[nonzero] ** exponent
        stiffness[0] = 0.0
        return cls(k_norm=k, stiffness=stiffness, shape=sums.shape)

    def frequencies(self, params):
        """omega_k = sqrt(2 g**2 chi K_k)."""
        return np.sqrt(2.0 * params.g ** 2 * params.chi *
                       np.clip(self.stiffness, 0.0, None))

    def decay_rates(self, params):
        """Amplitude decay (Gamma K_k + 2 Lambda chi k**2) / 2."""
        return 0.5 * (params.damping * self.stiffness +
                      2.0 * params.transport * params.chi *
                      self.k_norm ** 2)

    def mirror(self):
        """Flat index of -k for every mode."""
        index = np.indices(self.shape).reshape(len(self.shape), -1)
        flipped = np.mod(-index, np.array(self.shape)[:, None])
        return np.ravel_multi_index(tuple(flipped), self.shape)


def check_timestep(params, modes):
    fastest = float(np.max(modes.frequencies(params)))
    rate = float(np.max(params.damping * np.abs(modes.stiffness) +
                        2 * params.transport * params.chi *
                        modes.k_norm ** 2))
    limit = STABILITY / max(fastest, rate, 1e-300)
    if params.dt > limit:
        raise exceptions.UnstableTimeStep(dt=params.dt, limit=limit)
    return limit


def stationary_widths(params, modes=None):
    """Gibbs widths (<|phi_k|**2>, <|m_k|**2>), NaN phase width at k=0."""
    modes = modes or HydroModes.from_params(params)
    t, n = params.temperature, params.n
    ordered = modes.stiffness > 0
    phi = np.full(modes.stiffness.shape, np.nan)
    phi[ordered] = t / (n * modes.stiffness[ordered])
    m = np.full_like(phi, t / (2.0 * params.chi * n))
    return phi, m


@dataclasses.dataclass
class ModeTrajectory(object):
    """Recorded modes over realizations and the mode-resolved spectra.

    ``phi`` and ``m`` are (R, n_times, n_modes) for the recorded modes,
    ``phi_power`` and ``m_power`` the realization-averaged |.|**2 of every
    mode, (n_times, N).
    """
    times: np.ndarray
    modes: np.ndarray
    phi: np.ndarray
    m: np.ndarray
    phi_power: np.ndarray
    m_power: np.ndarray

    @property
    def realizations(self):
        return self.phi.shape[0]

    def zero_mode_variance(self):
        """Var[Phi(t)|Z] across realizations, Phi the k=0 phase."""
        if 0 not in self.modes.tolist():
            raise ValueError('the k=0 mode was not recorded')
        column = self.modes.tolist().index(0)
        return self.phi[:, :, column].real.var(axis=0)


def _real_white(rng, size, shape):
    return rng.standard_normal((size, 2) + shape)


def _to_modes(field, n):
    axes = tuple(range(-field.ndim + 2, 0))
    return np.fft.fftn(field, axes=axes).reshape(field.shape[:2] + (n,)) / n


def _initial(params, modes, rngs):
    n = params.n
    count = len(rngs)
    phi = np.zeros((count, n), dtype=complex)
    m = np.zeros((count, n), dtype=complex)
    if params.initial == 'thermal' and params.temperature > 0:
        draws = np.stack([rng.standard_normal((2,) + modes.shape)
                          for rng in rngs])
        unit = _to_modes(draws, n) * np.sqrt(n)
        phi_w, m_w = stationary_widths(params, modes)
        phi = unit[:, 0] * np.sqrt(np.nan_to_num(phi_w))
        m = unit[:, 1] * np.sqrt(m_w)
        phi[:, 0] = 0.0
    m[:, 0] = params.z / n
    return phi, m


def _integrate_chunk(task):
    params, modes, start, stop, record, initial_state = task
    n = params.n
    rngs = [utils.stream(params.seed, r) for r in range(start, stop)]
    count = len(rngs)
    if initial_state is not None:
        phi = np.tile(np.asarray(initial_state[0], dtype=complex), (count, 1))
        m = np.tile(np.asarray(initial_state[1], dtype=complex), (count, 1))
        m[:, 0] = params.z / n
    else:
        phi, m = _initial(params, modes, rngs)

    K = modes.stiffness
    k2 = modes.k_norm ** 2
    dt = params.dt
    noisy = params.temperature > 0
    sigma_phi = np.sqrt(2.0 * params.damping * params.temperature * dt)
    sigma_m = np.sqrt(2.0 * params.transport * params.temperature * dt)
    noise_factor = modes.k_norm if params.conserved_noise else k2

    outputs = params.output_steps
    slots = {s: i for i, s in enumerate(outputs.tolist())}
    rec_phi = np.empty((count, len(outputs), len(record)), dtype=complex)
    rec_m = np.empty_like(rec_phi)
    phi_power = np.zeros((len(outputs), n))
    m_power = np.zeros((len(outputs), n))
    block = None
    for step in range(params.steps + 1):
        if step in slots:
            i = slots[step]
            rec_phi[:, i] = phi[:, record]
            rec_m[:, i] = m[:, record]
            phi_power[i] = np.sum(np.abs(phi) ** 2, axis=0)
            m_power[i] = np.sum(np.abs(m) ** 2, axis=0)
        if step == params.steps:
            break
        d_phi = (2 * params.g * params.chi * m - params.damping * K * phi)
        d_m = (-params.g * K * phi -
               2 * params.transport * params.chi * k2 * m)
        phi = phi + d_phi * dt
        m = m + d_m * dt
        if noisy:
            offset = step % NOISE_BLOCK
            if offset == 0:
                size = min(NOISE_BLOCK, params.steps - step)
                block = np.stack([_real_white(rng, size, modes.shape)
                                  for rng in rngs], axis=1)
            noise = _to_modes(block[offset], n)
            phi = phi + sigma_phi * noise[:, 0]
            m = m - sigma_m * noise_factor * noise[:, 1]
    return rec_phi, rec_m, phi_power, m_power


def integrate_modes(params, record=None, initial_state=None, workers=1):
    """Euler-Maruyama integration of every mode over all realizations.

    Realization r draws from utils.stream(seed, r); realizations run in
    fixed chunks so the result does not depend on ``workers``.

    :param params: HydroParams
    :param record: flat mode indices kept in full, default all
    :param initial_state: optional (phi_k, m_k) pair of length-N arrays
        shared by every realization; m_0 is reset to Z/N
    :return: ModeTrajectory
    """
    modes = HydroModes.from_params(params)
    check_timestep(params, modes)
    record = (np.arange(params.n) if record is None
              else np.asarray(record, dtype=int))
    tasks = [(params, modes, lo, hi, record, initial_state)
             for lo, hi in utils.chunks(params.realizations, CHUNK_SIZE)]
    LOG.info('Integrating %d modes over %d realizations and %d steps',
             params.n, params.realizations, params.steps)
    results = utils.map_chunks(_integrate_chunk, tasks, workers)
    return ModeTrajectory(
        times=params.times, modes=record,
        phi=np.concatenate([r[0] for r in results]),
        m=np.concatenate([r[1] for r in results]),
        phi_power=sum(r[2] for r in results) / params.realizations,
        m_power=sum(r[3] for r in results) / params.realizations)


@dataclasses.dataclass(frozen=True)
class ZeroModeVariance(object):
    times: np.ndarray
    variance: np.ndarray
    mean: np.ndarray
    slope: float
    slope_err: float
    r2: float
    expected: float


def _zero_mode_chunk(task):
    params, start, stop, steps, outputs = task
    drift = 2.0 * params.g * params.chi * params.z / params.n
    sigma = np.sqrt(2.0 * params.damping * params.temperature * params.dt /
                    params.n)
    paths = np.empty((stop - start, len(outputs)))
    for row, r in enumerate(range(start, stop)):
        rng = utils.stream(params.seed, r)
        increments = drift * params.dt + sigma * rng.standard_normal(steps)
        walk = np.concatenate([[0.0], np.cumsum(increments)])
        paths[row] = walk[outputs]
    return paths


def zero_mode_variance(params, times=None, resamples=200, workers=1):
    """Random walk of the global phase at fixed Z.

    Var[Phi(t)|Z] grows as (2 Gamma T / N) t. The slope is a
    least-squares line through the sample variance, its error a
    bootstrap over realizations.

    :param params: HydroParams, params.dt is the walk step
    :param times: output grid, defaults to params.times
    :return: ZeroModeVariance
    """
    if params.realizations < 1000:
        LOG.warning('Zero-mode variance from %d realizations, at least '
                    '1000 are expected', params.realizations)
    times = params.times if times is None else np.asarray(times, float)
    outputs = np.round(times / params.dt).astype(int)
    steps = int(outputs.max())
    tasks = [(params, lo, hi, steps, outputs)
             for lo, hi in utils.chunks(params.realizations, CHUNK_SIZE)]
    paths = np.concatenate(utils.map_chunks(_zero_mode_chunk, tasks,
                                            workers))

    def slope(sample):
        return fitting.linear_fit(times, sample.var(axis=0)).slope

    variance = paths.var(axis=0)
    line = fitting.linear_fit(times, variance)
    err = utils.bootstrap(paths, slope, resamples,
                          utils.stream(params.seed, params.realizations))
    expected = 2.0 * params.damping * params.temperature / params.n
    LOG.info('Zero-mode slope %.6g +- %.2g, expected %.6g', line.slope,
             err, expected)
    return ZeroModeVariance(times=times, variance=variance,
                            mean=paths.mean(axis=0), slope=line.slope,
                            slope_err=err, r2=line.r2, expected=expected)


def conditional_to_y_variance(var_phi, m_xy, n):
    """Var[Y|Z] = N**2 m_xy**2 Var[Phi|Z]."""
    return n ** 2 * m_xy ** 2 * np.asarray(var_phi, dtype=float)
