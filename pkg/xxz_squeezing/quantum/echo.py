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


"""Sector decomposition of the x-polarized state, echoes and chi.

The coherent state |x> = prod (|up> + |down>)/sqrt(2) splits into one
amplitude vector per magnetization sector, each with the constant entry
2**(-N/2). Any Hamiltonian conserving Z evolves the sectors separately;
collective X and Y couple neighbouring sectors through S+ and S-.
"""

import dataclasses
import math

import numpy as np
from oslo_log import log as logging

from xxz_squeezing.common import fitting
from xxz_squeezing import exceptions
from xxz_squeezing import model
from xxz_squeezing import observables
from xxz_squeezing.quantum import basis
from xxz_squeezing.quantum import krylov
from xxz_squeezing import utils

LOG = logging.getLogger(__name__)

TRUNCATION_WEIGHT = 1e-8
CHI_MIN_R2 = 0.99


@dataclasses.dataclass
class SectorState(object):
    """Amplitudes of one magnetization sector.

    ``amplitudes`` is (dim,) for a single state or (T, dim) for a series
    over T times; every derived quantity works along the last axis.
    """
    n: int
    n_up: int
    amplitudes: np.ndarray

    @property
    def m(self):
        return self.n_up - self.n / 2.0

    @property
    def norm(self):
        return np.linalg.norm(self.amplitudes, axis=-1)

    @property
    def weight(self):
        return self.norm ** 2


def truncation_radius(n):
    return 2.5 * math.sqrt(n)


def decompose_css(n):
    """Split |x> over magnetization sectors.

    Sectors beyond |m| <= 5 sqrt(N)/2 are dropped only when their weight
    C(N, n_up)/2**N is below 1e-8; the dropped weight is logged.

    :param n: number of spins, at most basis.MAX_SITES
    :return: list of SectorState ordered by n_up
    """
    if n > basis.MAX_SITES:
        raise exceptions.SectorTooLarge(dim=2 ** min(n, 62), n=n,
                                        limit=2 ** basis.MAX_SITES)
    amplitude = 2.0 ** (-n / 2.0)
    radius = truncation_radius(n)
    sectors, dropped = [], 0.0
    for n_up in range(n + 1):
        weight = math.comb(n, n_up) / 2.0 ** n
        if abs(n_up - n / 2.0) > radius and weight < TRUNCATION_WEIGHT:
            dropped += weight
            continue
        sector = basis.Sector(n, n_up)
        sectors.append(SectorState(n, n_up, np.full(sector.dim, amplitude,
                                                    dtype=complex)))
    if dropped:
        LOG.warning('Dropped CSS sectors beyond |m| > %.2f, weight %.3g',
                    radius, dropped)
    return sectors


class DecomposedState(object):
    """A global state held as a list of SectorState."""

    def __init__(self, sectors):
        self.sectors = list(sectors)

    @property
    def n(self):
        return self.sectors[0].n

    def moments(self):
        return collective_moments(self.sectors)

    def variance(self, generator='z'):
        moments = self.moments()
        if generator == 'x':
            return moments.x2 - moments.mean_x ** 2
        if generator == 'y':
            return moments.var_y
        if generator == 'z':
            return moments.var_z
        raise ValueError('unknown generator %s' % generator)


def _dot(a, b):
    return np.sum(a.conj() * b, axis=-1)


def _apply(matrix, amplitudes):
    return matrix.dot(amplitudes.T).T


def _ladder(sectors):
    """S+ psi and S- psi, keyed by the target n_up."""
    n = sectors[0].n
    amps = {s.n_up: s.amplitudes for s in sectors}
    plus, minus = {}, {}
    for n_up, vec in amps.items():
        if n_up < n:
            plus[n_up + 1] = _apply(basis.raising_operator(n, n_up), vec)
        if n_up > 0:
            lowering = basis.raising_operator(n, n_up - 1).T
            minus[n_up - 1] = _apply(lowering, vec)
    return amps, plus, minus


def collective_moments(sectors):
    """Collective spin moments of a decomposed state.

    Works for a single state or a series, broadcasting along the leading
    time axis of the amplitudes.

    :param sectors: list of SectorState of one global state
    :return: observables.Moments, <ZY> symmetrized
    """
    n = sectors[0].n
    amps, plus, minus = _ladder(sectors)
    shape = sectors[0].amplitudes.shape[:-1]
    mean_plus = np.zeros(shape, dtype=complex)
    x2 = np.zeros(shape)
    y2 = np.zeros(shape)
    mean_z = np.zeros(shape)
    z2 = np.zeros(shape)
    zy = np.zeros(shape)
    for n_up in sorted(set(plus) | set(minus) | set(amps)):
        up = plus.get(n_up)
        down = minus.get(n_up)
        up = 0 if up is None else up
        down = 0 if down is None else down
        x_vec = 0.5 * (up + down)
        y_vec = -0.5j * (up - down)
        if not np.isscalar(x_vec):
            x2 = x2 + _dot(x_vec, x_vec).real
            y2 = y2 + _dot(y_vec, y_vec).real
        if n_up not in amps:
            continue
        m = n_up - n / 2.0
        psi = amps[n_up]
        weight = _dot(psi, psi).real
        mean_z = mean_z + m * weight
        z2 = z2 + m ** 2 * weight
        if not np.isscalar(up):
            mean_plus = mean_plus + _dot(psi, up)
        if not np.isscalar(y_vec):
            zy = zy + m * _dot(psi, y_vec).real
    return observables.Moments(n=n, mean_x=mean_plus.real,
                               mean_y=mean_plus.imag, mean_z=mean_z,
                               x2=x2, y2=y2, z2=z2, zy=zy)


def casimir(sectors):
    """<S**2> = sum_m |S+ psi_m|**2 + (m**2 + m) |psi_m|**2."""
    n = sectors[0].n
    total = 0.0
    for state in sectors:
        weight = state.weight
        total = total + (state.m ** 2 + state.m) * weight
        if state.n_up < n:
            raised = _apply(basis.raising_operator(n, state.n_up),
                            state.amplitudes)
            total = total + _dot(raised, raised).real
    return total


def krylov_evolve(state, hamiltonian, t, dim=30, tol=1e-10):
    """exp(-i H t) applied to one sector.

    :return: new SectorState at time t
    """
    sector = basis.Sector(state.n, state.n_up)
    propagator = krylov.KrylovPropagator(hamiltonian.block(sector), dim, tol)
    return SectorState(state.n, state.n_up,
                       propagator.evolve(state.amplitudes, t))


def _evolve_sector(task):
    hamiltonian, state, times, dim, tol = task
    sector = basis.Sector(state.n, state.n_up)
    propagator = krylov.KrylovPropagator(hamiltonian.block(sector), dim, tol)
    LOG.debug('Evolving %r over %d times', sector, len(times))
    return SectorState(state.n, state.n_up,
                       propagator.series(state.amplitudes, times))


def evolve_sectors(hamiltonian, sectors, times, dim=30, tol=1e-10,
                   workers=1):
    """Series of every sector over ``times``, sectors run in parallel.

    :return: list of SectorState with (T, dim) amplitudes
    """
    tasks = [(hamiltonian, s, np.asarray(times, dtype=float), dim, tol)
             for s in sectors]
    return utils.map_chunks(_evolve_sector, tasks, workers)


def evolve_css(hamiltonian, times, dim=30, tol=1e-10, workers=1):
    """Exact collective moments of |x> evolved under ``hamiltonian``.

    :return: observables.Moments over ``times``
    """
    series = evolve_sectors(hamiltonian, decompose_css(hamiltonian.n),
                            times, dim, tol, workers)
    return collective_moments(series)


@dataclasses.dataclass
class EchoConfig(object):
    n: int
    alpha: float = 1.5
    j_z: float = 0.0
    d: int = 1
    chi: float = None
    times: np.ndarray = None
    krylov_dim: int = 30
    krylov_tol: float = 1e-10
    j_perp: float = 1.0
    interaction: str = model.POWER_LAW
    workers: int = 1

    def __post_init__(self):
        if self.n > basis.MAX_SITES:
            raise exceptions.SectorTooLarge(dim=math.comb(self.n,
                                                          self.n // 2),
                                            n=self.n,
                                            limit=basis.MAX_DIMENSION)
        if self.times is None:
            self.times = np.linspace(0.0, 2.0, 41)
        self.times = np.asarray(self.times, dtype=float)

    @classmethod
    def from_conf(cls, conf):
        q, lattice = conf.quantum, conf.lattice
        return cls(n=q.n, alpha=lattice.alpha, j_z=lattice.j_z, d=lattice.d,
                   chi=q.chi, times=np.linspace(0.0, q.t_max, q.points),
                   krylov_dim=q.krylov_dim, krylov_tol=q.krylov_tol,
                   j_perp=lattice.j_perp, interaction=lattice.interaction,
                   workers=conf.workers)

    def lattice(self):
        side = int(round(self.n ** (1.0 / self.d)))
        if side ** self.d != self.n:
            raise exceptions.InvalidLatticeSpec(
                reason='N=%d is not a %d-dimensional square lattice'
                       % (self.n, self.d))
        return model.LatticeSpec(d=self.d, L=side, alpha=self.alpha,
                                 j_perp=self.j_perp, j_z=self.j_z,
                                 interaction=self.interaction)

    def hamiltonian(self):
        return basis.Hamiltonian.xxz(self.lattice())


def var_q_conditional(cfg, forward=None):
    """Loschmidt-echo conditional variance Var_q[Y|Z](t).

    Each sector evolves under the forward Hamiltonian, then picks up the
    echo phase exp(+i chi m**2 t/N) that undoes the collective twist.

    :param cfg: EchoConfig; chi is extracted when unset
    :param forward: Hamiltonian replacing the XXZ one
    :return: array of Var_q[Y|Z] over cfg.times
    """
    forward = forward or cfg.hamiltonian()
    chi = cfg.chi
    if chi is None:
        chi = extract_chi(cfg.n, hamiltonian=forward,
                          dim=cfg.krylov_dim, tol=cfg.krylov_tol).chi
        LOG.info('Using extracted chi=%.6g for the echo', chi)
    series = evolve_sectors(forward, decompose_css(cfg.n), cfg.times,
                            cfg.krylov_dim, cfg.krylov_tol, cfg.workers)
    for state in series:
        phase = np.exp(1j * chi * state.m ** 2 * cfg.times / cfg.n)
        state.amplitudes = state.amplitudes * phase[:, None]
    return np.asarray(collective_moments(series).var_y, dtype=float)


@dataclasses.dataclass(frozen=True)
class ChiExtraction(object):
    chi: float
    slope: float
    intercept: float
    r2: float
    delta_e: list
    flags: tuple = ()

    def rows(self):
        """(m, 2m+1, delta_e, fit r2) per adjacent pair."""
        return [(m, 2 * m + 1, de, r2) for m, de, r2 in self.delta_e]


def _pair_signal(n, lower, upper):
    raising = basis.raising_operator(n, lower.n_up)
    return _dot(upper.amplitudes, _apply(raising, lower.amplitudes))


def extract_chi(n, alpha=1.5, j_z=0.0, m_range=2, times=None,
                hamiltonian=None, dim=30, tol=1e-10, workers=1):
    """Effective twisting strength from adjacent-sector oscillations.

    <m+1| S+ |m> evolves as exp(i dE t) with dE = E_{m+1} - E_m. The
    frequency of every pair with -m_range-1 <= m <= m_range is fitted and
    a line through dE against 2m+1 gives chi = N * slope.

    :param n: chain length
    :param m_range: pairs (m, m+1) run over -m_range-1 .. m_range
    :param times: uniform grid, defaults to 400 points up to t=40
    :param hamiltonian: replaces the XXZ chain built from alpha and j_z
    :return: ChiExtraction
    """
    if times is None:
        times = np.linspace(0.0, 40.0, 400)
    if hamiltonian is None:
        spec = model.LatticeSpec(d=1, L=n, alpha=alpha, j_z=j_z)
        hamiltonian = basis.Hamiltonian.xxz(spec)
    centre = n // 2
    lowers = [k for k in range(centre - m_range - 1, centre + m_range + 1)
              if 0 <= k < n]
    needed = sorted(set(lowers) | {k + 1 for k in lowers})
    amplitude = 2.0 ** (-n / 2.0)
    start = [SectorState(n, n_up, np.full(basis.Sector(n, n_up).dim,
                                          amplitude, dtype=complex))
             for n_up in needed]
    series = {s.n_up: s for s in evolve_sectors(hamiltonian, start, times,
                                                dim, tol, workers)}
    delta_e = []
    for k in lowers:
        lower, upper = series[k], series[k + 1]
        m = lower.m
        fit = fitting.fit_sinusoid(times, _pair_signal(n, lower, upper))
        LOG.debug('Pair m=%s: dE=%.8g, r2=%.6f', m, fit.frequency, fit.r2)
        delta_e.append((m, fit.frequency, fit.r2))
    x = np.array([2 * m + 1 for m, _, _ in delta_e], dtype=float)
    y = np.array([de for _, de, _ in delta_e])
    line = fitting.linear_fit(x, y)
    flags = []
    if line.r2 < CHI_MIN_R2:
        flags.append('low-r2')
    if np.any(np.diff(y) <= 0):
        flags.append('non-monotone')
    if flags:
        LOG.warning('chi extraction for N=%d flagged: %s', n,
                    ', '.join(flags))
    return ChiExtraction(chi=n * line.slope, slope=line.slope,
                         intercept=line.intercept, r2=line.r2,
                         delta_e=delta_e, flags=tuple(flags))
