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

"""Semiclassical one-axis twisting analytics.

The collective state is a Gaussian distribution of the conserved Z,
P(Z) = sqrt(2/(pi N)) exp(-2 Z**2/N), and each Z-slice rotates rigidly by
the angle 2 chi t Z / N. The transverse spread inside a slice is the
conditional variance Var[Y|Z](t) = v0 + c N (chi t)**gamma.
"""

import dataclasses

import numpy as np
from oslo_log import log as logging
from scipy import integrate
from scipy import optimize

from xxz_squeezing import exceptions
from xxz_squeezing import observables

LOG = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class SemiclassicalParams(object):
    n: int
    m_xy: float = 0.5
    chi: float = 1.0
    v0: float = None
    c: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 0 < self.m_xy <= 0.5:
            raise ValueError('m_xy must lie in (0, 1/2], got %s' % self.m_xy)
        if not self.chi > 0:
            raise ValueError('chi must be positive, got %s' % self.chi)
        if self.c < 0:
            raise ValueError('c must be non-negative, got %s' % self.c)
        if not 0 <= self.gamma < 2:
            raise exceptions.InvalidScalingExponent(gamma=self.gamma)
        if self.v0 is None:
            object.__setattr__(self, 'v0', self.n / 4.0)

    @classmethod
    def from_conf(cls, section, n=None):
        return cls(n=n or section.n, m_xy=section.m_xy, chi=section.chi,
                   v0=section.v0, c=section.c, gamma=section.gamma)

    def replace(self, **changes):
        if 'n' in changes and 'v0' not in changes and \
                self.v0 == self.n / 4.0:
            changes['v0'] = None
        return dataclasses.replace(self, **changes)

    def conditional_variance(self, t):
        tau = self.chi * np.asarray(t, dtype=float)
        return self.v0 + self.c * self.n * tau ** self.gamma


def exact_moments(params, t):
    """Closed-form moments of the twisted Gaussian state.

    <X**2> follows from the same slice rotation and neglects the
    conditional spread along x.
    """
    n, m = params.n, params.m_xy
    tau = params.chi * np.asarray(t, dtype=float)
    decay = np.exp(-tau ** 2 / (2.0 * n))
    decay4 = np.exp(-2.0 * tau ** 2 / n)
    zeros = np.zeros_like(tau)
    return observables.Moments(
        n=n,
        mean_x=n * m * decay,
        mean_y=zeros,
        mean_z=zeros,
        x2=0.5 * n ** 2 * m ** 2 * (1.0 + decay4),
        y2=(params.conditional_variance(t) +
            0.5 * n ** 2 * m ** 2 * (1.0 - decay4)),
        z2=zeros + n / 4.0,
        zy=0.5 * n * m * tau * decay)


def quadrature_moments(params, t):
    """Moments by direct integration over P(Z), scalar t.

    Independent of the closed forms; used to check them.
    """
    n, m = params.n, params.m_xy
    rate = 2.0 * params.chi * t / n
    width = np.sqrt(n / 4.0)

    def weight(z):
        return np.sqrt(2.0 / (np.pi * n)) * np.exp(-2.0 * z ** 2 / n)

    def average(func):
        value, _ = integrate.quad(lambda z: weight(z) * func(z),
                                  -12 * width, 12 * width,
                                  epsabs=0, epsrel=1e-12, limit=400)
        return value

    var = float(params.conditional_variance(t))
    return observables.Moments(
        n=n,
        mean_x=average(lambda z: n * m * np.cos(rate * z)),
        mean_y=0.0,
        mean_z=0.0,
        x2=average(lambda z: (n * m * np.cos(rate * z)) ** 2),
        y2=average(lambda z: var + (n * m * np.sin(rate * z)) ** 2),
        z2=average(lambda z: z ** 2),
        zy=average(lambda z: z * n * m * np.sin(rate * z)))


def exact_min_variance(params, t):
    """Unexpanded minimum variance in the y-z plane."""
    n, m = params.n, params.m_xy
    tau = params.chi * np.asarray(t, dtype=float)
    var = params.conditional_variance(t)
    twist = 0.5 * n ** 2 * m ** 2 * (1.0 - np.exp(-2.0 * tau ** 2 / n))
    shear = n ** 2 * m ** 2 * tau ** 2 * np.exp(-tau ** 2 / n)
    return (0.5 * (var + n / 4.0 + twist) -
            0.5 * np.sqrt((var - n / 4.0 + twist) ** 2 + shear))


def xi2_exact(params, t):
    mean_x = exact_moments(params, t).mean_x
    return params.n * exact_min_variance(params, t) / mean_x ** 2


def xi2_approx(params, t):
    """Leading-order squeezing, valid for 1 << chi t << sqrt(N)."""
    n, m = params.n, params.m_xy
    tau = params.chi * np.asarray(t, dtype=float)
    return (params.conditional_variance(t) / (n * 4.0 * m ** 4 * tau ** 2) +
            tau ** 4 / (24.0 * m ** 2 * n ** 2))


@dataclasses.dataclass(frozen=True)
class ScalingExponents(object):
    """Exponents of N for xi2_opt, xi_opt and t_opt."""
    xi2: float
    xi: float
    time: float


def scaling_exponents(gamma):
    """Optimum scaling for Var[Y|Z] ~ N (chi t)**gamma.

    Minimizing the leading-order squeezing gives
    xi2_opt ~ N**(-2 + 8/(6 - gamma)) and t_opt ~ N**(2/(6 - gamma)), so
    -2/3 for pure twisting and -2/5 for diffusive growth. xi_opt carries
    half the xi2 exponent.
    """
    if not 0 <= gamma < 2:
        raise exceptions.InvalidScalingExponent(gamma=gamma)
    xi2 = -2.0 + 8.0 / (6.0 - gamma)
    return ScalingExponents(xi2=xi2, xi=xi2 / 2.0, time=2.0 / (6.0 - gamma))


@dataclasses.dataclass(frozen=True)
class SqueezingOptimum(object):
    xi2: float
    t: float
    at_boundary: bool = False


def optimize_time(params, exact=False, points=64, tol=1e-6):
    """Minimize xi2 over t in [1/chi, sqrt(N)/chi].

    A coarse log grid brackets the minimum, then a golden-section search
    on log t refines it.
    """
    func = xi2_exact if exact else xi2_approx

    def objective(log_t):
        return float(func(params, np.exp(log_t)))

    lo = np.log(1.0 / params.chi)
    hi = np.log(np.sqrt(params.n) / params.chi)
    grid = np.linspace(lo, hi, points)
    values = np.array([objective(g) for g in grid])
    i = int(np.argmin(values))
    if i in (0, points - 1):
        LOG.warning('Squeezing optimum at the edge of [1/chi, sqrt(N)/chi] '
                    'for N=%d', params.n)
        return SqueezingOptimum(xi2=values[i], t=float(np.exp(grid[i])),
                                at_boundary=True)
    res = optimize.minimize_scalar(objective,
                                   bracket=(grid[i - 1], grid[i],
                                            grid[i + 1]),
                                   method='golden',
                                   options={'xtol': tol})
    return SqueezingOptimum(xi2=float(res.fun), t=float(np.exp(res.x)))


def optimum_scaling(params, sizes, exact=False):
    """Optimum at every size and the log-log slopes.

    :return: (list of (N, SqueezingOptimum), fitted ScalingExponents)
    """
    table = [(n, optimize_time(params.replace(n=n), exact=exact))
             for n in sizes]
    log_n = np.log([n for n, _ in table])
    xi2_slope = np.polyfit(log_n, np.log([o.xi2 for _, o in table]), 1)[0]
    t_slope = np.polyfit(log_n, np.log([o.t for _, o in table]), 1)[0]
    return table, ScalingExponents(xi2=xi2_slope, xi=xi2_slope / 2.0,
                                   time=t_slope)
