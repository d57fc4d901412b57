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

"""Squeezing, magnetization, conditional variance and QFI diagnostics.

Every function works on moments arrays and broadcasts over time. A
depolarized point, where <X>**2 falls below the floor, carries NaN in the
xi2 column and is written out as ``DEPOLARIZED``.
"""

import collections
import dataclasses

import numpy as np
from oslo_log import log as logging
from scipy import optimize

from xxz_squeezing import exceptions
from xxz_squeezing import utils

LOG = logging.getLogger(__name__)

DEPOLARIZED = 'depolarized'
DEFAULT_FLOOR = 1e-12

SERIES_COLUMNS = ('t', 'mean_x', 'mean_y', 'mean_z', 'var_y', 'var_z',
                  'cov_zy', 'xi2', 'm_xy', 'var_y_given_z', 'n_traj',
                  'err_xi2')


@dataclasses.dataclass
class Moments(object):
    """First and raw second moments of the collective spin."""
    n: int
    mean_x: object
    mean_y: object
    mean_z: object
    x2: object
    y2: object
    z2: object
    zy: object

    @property
    def var_y(self):
        return self.y2 - self.mean_y ** 2

    @property
    def var_z(self):
        return self.z2 - self.mean_z ** 2

    @property
    def cov_zy(self):
        return self.zy - self.mean_z * self.mean_y

    def covariance(self):
        """2x2 covariance of (Z, Y), stacked on the last two axes."""
        var_z = np.asarray(self.var_z, dtype=float)
        var_y = np.asarray(self.var_y, dtype=float)
        cov = np.asarray(self.cov_zy, dtype=float)
        return np.stack([np.stack([var_z, cov], axis=-1),
                         np.stack([cov, var_y], axis=-1)], axis=-2)

    @classmethod
    def from_samples(cls, collective, n):
        """Moments of per-trajectory collective spins.

        :param collective: array (T, ..., 3) of (X, Y, Z) per trajectory
        :param n: number of spins
        """
        c = np.asarray(collective, dtype=float)
        x, y, z = c[..., 0], c[..., 1], c[..., 2]
        return cls(n=n, mean_x=x.mean(axis=0), mean_y=y.mean(axis=0),
                   mean_z=z.mean(axis=0), x2=(x * x).mean(axis=0),
                   y2=(y * y).mean(axis=0), z2=(z * z).mean(axis=0),
                   zy=(z * y).mean(axis=0))


def min_variance(moments):
    """Smallest eigenvalue of the (Z, Y) covariance matrix."""
    a = np.asarray(moments.var_z, dtype=float)
    b = np.asarray(moments.var_y, dtype=float)
    c = np.asarray(moments.cov_zy, dtype=float)
    return 0.5 * (a + b) - np.sqrt(0.25 * (a - b) ** 2 + c ** 2)


def min_variance_scan(moments, angles=10000):
    """Minimum of Var(cos(t) Z + sin(t) Y) by explicit quadrature scan.

    A uniform scan over [0, pi) is refined with a bounded Brent search
    around the best grid angle. Scalar moments only.
    """
    a = float(moments.var_z)
    b = float(moments.var_y)
    c = float(moments.cov_zy)

    def variance(theta):
        return (a * np.cos(theta) ** 2 + b * np.sin(theta) ** 2 +
                2 * c * np.sin(theta) * np.cos(theta))

    grid = np.linspace(0.0, np.pi, angles, endpoint=False)
    best = grid[np.argmin(variance(grid))]
    step = np.pi / angles
    res = optimize.minimize_scalar(variance,
                                   bounds=(best - step, best + step),
                                   method='bounded',
                                   options={'xatol': 1e-12})
    return float(min(res.fun, variance(best)))


def depolarized(moments, floor=DEFAULT_FLOOR):
    mean_x = np.asarray(moments.mean_x, dtype=float)
    return mean_x ** 2 < floor * moments.n ** 2


def squeezing(moments, floor=DEFAULT_FLOOR, strict=False):
    """xi2 = N lambda_min / <X>**2.

    :param moments: Moments, scalar or per time
    :param floor: relative floor on <X>**2 / N**2
    :param strict: raise DepolarizedState instead of returning NaN
    :return: xi2, NaN where the state is depolarized
    """
    mask = depolarized(moments, floor)
    if strict and np.any(mask):
        raise exceptions.DepolarizedState(mean=moments.mean_x)
    mean_x = np.asarray(moments.mean_x, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        xi2 = moments.n * min_variance(moments) / mean_x ** 2
    xi2 = np.where(mask, np.nan, xi2)
    return float(xi2) if np.ndim(xi2) == 0 else xi2


def xy_magnetization(moments):
    m = np.sqrt(np.asarray(moments.x2 + moments.y2, dtype=float)) / moments.n
    return float(m) if np.ndim(m) == 0 else m


def conditional_variance(collective, mode, z_constrained=False,
                         min_bin_population=10):
    """Var[Y|Z] per output time.

    :param collective: array (T, n_times, 3) of per-trajectory (X, Y, Z)
    :param mode: 'z-binned' or 'z-constrained'
    :param z_constrained: whether the ensemble was sampled at Z=0
    :param min_bin_population: smaller Z bins are dropped
    :return: (variance array over time, list of dropped (Z, count) bins)
    """
    c = np.asarray(collective, dtype=float)
    y = c[:, :, 1]
    if mode == 'z-constrained':
        if not z_constrained:
            raise ValueError('z-constrained conditional variance needs the '
                             'Z=0 ensemble')
        return y.var(axis=0), []
    if mode != 'z-binned':
        raise ValueError('unknown conditional variance mode %s' % mode)
    if z_constrained:
        raise ValueError('z-binned conditional variance needs an '
                         'unconstrained ensemble')

    # Z is conserved, unit-width bins keyed on the initial value.
    keys = np.round(2 * c[:, 0, 2]).astype(int)
    counts = collections.Counter(keys.tolist())
    dropped = sorted((k / 2.0, v) for k, v in counts.items()
                     if v < min_bin_population)
    if dropped:
        LOG.warning('Dropped %d Z bins with fewer than %d trajectories',
                    len(dropped), min_bin_population)
    total = 0
    acc = np.zeros(y.shape[1])
    for key, count in counts.items():
        if count < min_bin_population:
            continue
        acc += count * y[keys == key].var(axis=0)
        total += count
    if not total:
        return np.full(y.shape[1], np.nan), dropped
    return acc / total, dropped


def qfi(source, generator='z'):
    """Pure-state QFI, four times the generator variance.

    :param source: an object exposing ``variance(generator)`` (exact
        quantum states), a 1-D array of generator samples, or an array of
        collective (X, Y, Z) samples on its last axis
    :param generator: 'x', 'y', 'z' or a unit 3-vector
    """
    if hasattr(source, 'variance'):
        return 4.0 * float(source.variance(generator))
    samples = np.asarray(source, dtype=float)
    if samples.ndim > 1:
        if isinstance(generator, str):
            axis = np.zeros(3)
            axis['xyz'.index(generator)] = 1.0
        else:
            axis = np.asarray(generator, dtype=float)
            axis = axis / np.linalg.norm(axis)
        samples = samples.dot(axis)
    return 4.0 * float(samples.var(axis=0))


@dataclasses.dataclass(frozen=True)
class QFIScaling(object):
    """QFI ~ N**qfi and phase sensitivity ~ N**-sensitivity."""
    qfi: float
    sensitivity: float


def classify_qfi_scaling(decay, d, p=None):
    """Map a correlation decay to QFI and sensitivity scaling.

    :param decay: 'exponential', 'power' or 'long-range'
    :param d: lattice dimension
    :param p: power-law exponent of the correlations when decay='power'
    """
    if decay == 'exponential':
        return QFIScaling(1.0, 0.5)
    if decay == 'long-range':
        return QFIScaling(2.0, 1.0)
    if decay != 'power':
        raise ValueError('unknown correlation decay %s' % decay)
    if p is None:
        raise ValueError('power-law decay needs an exponent p')
    if np.isclose(p, d) or np.isclose(p, d - 1):
        raise exceptions.MarginalCorrelationDecay(p=p, d=d)
    if p > d:
        return QFIScaling(1.0, 0.5)
    if p > d - 1:
        exponent = 1.0 + p - d
        return QFIScaling(exponent, exponent / 2.0)
    return QFIScaling(2.0, 1.0)


def plateau(times, values, start=2.0 / 3.0):
    """Median over the late window t >= start * t_max."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    window = times >= times[0] + start * (times[-1] - times[0])
    return float(np.median(values[window]))


def thermalization_time(times, m_xy, start=2.0 / 3.0, tolerance=0.05):
    """First time m_xy comes within ``tolerance`` of its plateau."""
    level = plateau(times, m_xy, start)
    close = np.abs(np.asarray(m_xy) - level) <= tolerance * abs(level)
    return float(np.asarray(times)[np.argmax(close)])


def jackknife_xi2(collective, n, floor=DEFAULT_FLOOR):
    def estimator(samples):
        return squeezing(Moments.from_samples(samples, n), floor)
    return utils.jackknife(collective, estimator)[1]


@dataclasses.dataclass
class ObservableSeries(object):
    times: np.ndarray
    moments: Moments
    xi2: np.ndarray
    m_xy: np.ndarray
    n_traj: int
    err_xi2: np.ndarray
    var_y_given_z: np.ndarray = None
    conditional_mode: str = None
    dropped_bins: list = dataclasses.field(default_factory=list)
    trajectories: np.ndarray = None
    extras: dict = dataclasses.field(default_factory=dict)
    aborted: np.ndarray = None

    @property
    def n(self):
        return self.moments.n

    @classmethod
    def from_trajectories(cls, times, collective, n, conditional_mode=None,
                          z_constrained=None, min_bin_population=10,
                          floor=DEFAULT_FLOOR, extras=None, aborted=None):
        """Reduce per-trajectory collective spins to a series.

        :param times: output times
        :param collective: array (T, n_times, 3)
        :param n: number of spins
        :param conditional_mode: None, 'z-binned' or 'z-constrained'
        """
        collective = np.asarray(collective, dtype=float)
        moments = Moments.from_samples(collective, n)
        if z_constrained is None:
            z_constrained = conditional_mode == 'z-constrained'
        var_cond, dropped = None, []
        if conditional_mode:
            var_cond, dropped = conditional_variance(
                collective, conditional_mode, z_constrained,
                min_bin_population)
        return cls(times=np.asarray(times, dtype=float), moments=moments,
                   xi2=np.atleast_1d(squeezing(moments, floor)),
                   m_xy=np.atleast_1d(xy_magnetization(moments)),
                   n_traj=collective.shape[0],
                   err_xi2=jackknife_xi2(collective, n, floor),
                   var_y_given_z=var_cond,
                   conditional_mode=conditional_mode,
                   dropped_bins=dropped, trajectories=collective,
                   extras=extras or {}, aborted=aborted)

    def rows(self):
        """Rows in SERIES_COLUMNS order."""
        m = self.moments
        cond = (self.var_y_given_z if self.var_y_given_z is not None
                else np.full(len(self.times), np.nan))
        for i, t in enumerate(self.times):
            xi2 = DEPOLARIZED if np.isnan(self.xi2[i]) else self.xi2[i]
            yield (t, m.mean_x[i], m.mean_y[i], m.mean_z[i], m.var_y[i],
                   m.var_z[i], m.cov_zy[i], xi2, self.m_xy[i], cond[i],
                   self.n_traj, self.err_xi2[i])
