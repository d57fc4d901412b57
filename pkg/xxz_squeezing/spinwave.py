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

"""Spin-wave (free Bose gas) estimates of the ordering boundary.

Magnons of the ferromagnetic XY state are free bosons with dispersion
eps(q) = S omega(q) / 2, omega(q) = eta(0) - eta(q). Their small-q form is
A q**(alpha-1) in d=1 and B k**(alpha-2) in d=2, with A and B the
prefactors of the closed forms below. The gas condenses (orders) below
T_c, where the excited modes alone hold M = S N bosons at mu = 0. The
coherent spin state behaves as a gas at temperature T_0 whose thermal
energy equals its excitation energy density; squeezing survives while
T_0 < T_c.
"""

import dataclasses
import math

import numpy as np
from oslo_log import log as logging
from scipy import integrate
from scipy import optimize
import yaml

from xxz_squeezing import exceptions
from xxz_squeezing import model
from xxz_squeezing.quantum import basis
from xxz_squeezing import special

LOG = logging.getLogger(__name__)

WINDOWS = {1: (1.0, 2.0), 2: (2.0, 4.0)}
J_Z_BRACKET = (-6.0, 1.0)


@dataclasses.dataclass(frozen=True)
class SpinWaveResult(object):
    alpha: float
    d: int
    spin: float
    j_z: float
    eta0: float
    t_c: float
    t_0: float
    energy: float
    j_c: float = None


def _check_window(alpha, d):
    if d not in WINDOWS:
        raise exceptions.NoFiniteTemperatureOrder(
            alpha=alpha, d=d, window='d in {1, 2}')
    lo, hi = WINDOWS[d]
    if not lo < alpha < hi:
        raise exceptions.NoFiniteTemperatureOrder(
            alpha=alpha, d=d, window='(%s, %s)' % (lo, hi))


def dispersion_prefactor(alpha, d, spin):
    """Small-q prefactor of eps(q): A in d=1, B in d=2."""
    _check_window(alpha, d)
    if d == 1:
        return (-math.pi * spin /
                (2 * special.gamma(alpha) * math.cos(math.pi * alpha / 2)))
    return (-2 ** (1 - alpha) * math.pi ** 2 * spin /
            (special.gamma(alpha / 2) ** 2 * math.sin(math.pi * alpha / 2)))


def _ratio_power(numerator, s, power):
    """(numerator / (Gamma(s) zeta(s)))**power in log space.

    Gamma(s) overflows as alpha approaches the lower window edge.
    """
    return math.exp(power * (math.log(numerator) - special.lgamma(s) -
                             math.log(special.zeta(s))))


def critical_temperature(alpha, d, spin=0.5):
    """Closed-form condensation temperature of the magnon gas."""
    pre = dispersion_prefactor(alpha, d, spin)
    if d == 1:
        return pre * _ratio_power(math.pi * spin * (alpha - 1),
                                  1.0 / (alpha - 1), alpha - 1)
    return pre * _ratio_power(2 * math.pi * spin * (alpha - 2),
                              2.0 / (alpha - 2), (alpha - 2) / 2.0)


def css_temperature(alpha, d, spin, energy):
    """Temperature at which the magnon gas holds ``energy`` per site."""
    if energy < 0:
        raise exceptions.NegativeEnergyDensity(energy=energy)
    pre = dispersion_prefactor(alpha, d, spin)
    if energy == 0:
        return 0.0
    if d == 1:
        return pre ** (1.0 / alpha) * _ratio_power(
            math.pi * (alpha - 1) * energy, alpha / (alpha - 1),
            (alpha - 1) / alpha)
    return pre ** (2.0 / alpha) * _ratio_power(
        2 * math.pi * (alpha - 2) * energy, alpha / (alpha - 2),
        (alpha - 2) / alpha)


def _bose(x):
    return 1.0 / np.expm1(x)


def _continuum_measure(alpha, d, spin):
    """Power-law dispersion and the radial momentum measure per site."""
    pre = dispersion_prefactor(alpha, d, spin)
    if d == 1:
        return (lambda q: pre * q ** (alpha - 1)), (lambda q: 1.0 / math.pi)
    return ((lambda k: pre * k ** (alpha - 2)),
            (lambda k: k / (2 * math.pi)))


def _radial(func, upper_scale):
    # split at the thermal scale so quad sees the integrable singularity
    head, _ = integrate.quad(func, 0.0, upper_scale, limit=400,
                             epsabs=0, epsrel=1e-11)
    tail, _ = integrate.quad(func, upper_scale, np.inf, limit=400,
                             epsabs=0, epsrel=1e-11)
    return head + tail


def continuum_occupation(alpha, d, spin, temperature):
    eps, measure = _continuum_measure(alpha, d, spin)
    scale = (temperature / dispersion_prefactor(alpha, d, spin)) ** (
        1.0 / (alpha - d))
    return _radial(lambda q: measure(q) * _bose(eps(q) / temperature),
                   scale)


def continuum_energy(alpha, d, spin, temperature):
    eps, measure = _continuum_measure(alpha, d, spin)
    scale = (temperature / dispersion_prefactor(alpha, d, spin)) ** (
        1.0 / (alpha - d))
    return _radial(
        lambda q: measure(q) * eps(q) * _bose(eps(q) / temperature), scale)


def continuum_critical_temperature(alpha, d, spin=0.5):
    """T_c by root-finding the continuum occupation integral at mu=0."""
    guess = critical_temperature(alpha, d, spin)
    return optimize.brentq(
        lambda t: continuum_occupation(alpha, d, spin, t) - spin,
        guess / 10.0, guess * 10.0, xtol=1e-14, rtol=1e-12)


def continuum_css_temperature(alpha, d, spin, energy):
    """T_0 by root-finding the continuum energy integral."""
    guess = css_temperature(alpha, d, spin, energy)
    return optimize.brentq(
        lambda t: continuum_energy(alpha, d, spin, t) - energy,
        guess / 10.0, guess * 10.0, xtol=1e-14, rtol=1e-12)


def lattice_dispersion(alpha, d, spin, L):
    """eps(q) = S omega(q)/2 on the L**d momentum grid."""
    spec = model.LatticeSpec(d=d, L=L, alpha=alpha)
    return spin * model.MomentumSum.from_spec(spec).omega / 2.0


@dataclasses.dataclass(frozen=True)
class BoseSolution(object):
    mu: float
    condensed: bool
    excited: float


def bose_selfconsistency(dispersion, particles, temperature):
    """Solve M = sum_{q != 0} 1/(exp((eps - mu)/T) - 1) for mu < 0.

    :param dispersion: eps(q) on the momentum grid; zero modes are left
        out, they only hold the condensate
    :param particles: M, the total boson number
    :param temperature: T > 0
    :return: BoseSolution, ``condensed`` when the excited modes cannot
        hold M particles at any mu < 0
    """
    eps = np.asarray(dispersion, dtype=float).ravel()
    eps = eps[eps > 1e-14 * max(1.0, eps.max())]

    def excited(mu):
        return float(np.sum(_bose((eps - mu) / temperature)))

    saturated = excited(0.0)
    if saturated <= particles:
        return BoseSolution(mu=0.0, condensed=saturated < particles,
                            excited=saturated)
    lo = -temperature
    for _ in range(200):
        if excited(lo) < particles:
            break
        lo *= 2.0
    else:
        raise exceptions.BisectionFailure(bracket=(lo, 0.0),
                                          reason='no lower bracket')
    try:
        mu = optimize.bisect(lambda m: excited(m) - particles, lo, 0.0,
                             xtol=1e-15, rtol=1e-13, maxiter=400)
    except (RuntimeError, ValueError) as exc:
        raise exceptions.BisectionFailure(bracket=(lo, 0.0), reason=exc)
    return BoseSolution(mu=mu, condensed=False, excited=excited(mu))


def lattice_critical_temperature(alpha, d, spin, L):
    """T_c of the finite grid: the excited modes hold S per site at mu=0.

    Uses the full lattice dispersion, not its small-q asymptote.
    """
    eps = lattice_dispersion(alpha, d, spin, L).ravel()[1:]
    n = L ** d

    def excess(t):
        return np.sum(_bose(eps / t)) / n - spin

    guess = critical_temperature(alpha, d, spin)
    lo, hi = guess / 100.0, guess * 100.0
    try:
        return optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-12)
    except ValueError as exc:
        raise exceptions.BisectionFailure(bracket=(lo, hi), reason=exc)


def richardson(sizes, values, exponent):
    """Extrapolate the last two values assuming corrections ~ L**-exponent."""
    (l1, l2), (v1, v2) = sizes[-2:], values[-2:]
    ratio = (l2 / float(l1)) ** exponent
    return (ratio * v2 - v1) / (ratio - 1.0)


def finite_size_exponent(alpha, d):
    return 2.0 - alpha if d == 1 else 4.0 - alpha


def extrapolated_critical_temperature(alpha, d, spin, sizes):
    values = [lattice_critical_temperature(alpha, d, spin, L) for L in sizes]
    LOG.debug('Finite-grid T_c for alpha=%s: %s', alpha, values)
    return richardson(sizes, values, finite_size_exponent(alpha, d)), values


def infinite_eta0(alpha, d):
    if d == 1:
        return 2.0 * special.zeta(alpha)
    return model.build_row_sum(model.LatticeSpec(d=d, L=256, alpha=alpha))


class EnergyDensityTable(object):
    """User-supplied CSS excitation energies, one polynomial per alpha."""

    def __init__(self, records, degree=3):
        by_alpha = {}
        for rec in records:
            by_alpha.setdefault(float(rec['alpha']), []).append(
                (float(rec['j_z']), float(rec['energy'])))
        self.fits = {}
        for alpha, points in by_alpha.items():
            j_z, energy = np.array(sorted(points)).T
            deg = min(degree, len(j_z) - 1)
            self.fits[alpha] = np.polynomial.Polynomial.fit(j_z, energy, deg)

    @classmethod
    def from_file(cls, path, degree=3):
        with open(path) as f:
            return cls(yaml.safe_load(f), degree=degree)

    def __call__(self, alpha, j_z):
        for known, poly in self.fits.items():
            if abs(known - alpha) < 1e-9:
                return max(float(poly(j_z)), 0.0)
        raise KeyError('no energy table entry for alpha=%s' % alpha)


class ExactEnergyDensity(object):
    """CSS excitation energy per site from small exact ground states.

    e_N = (E_CSS - E_0) / N in the spin-operator convention, with E_0 the
    lowest energy of the sectors Z = 0 and Z = 1 (Z = 1/2 for odd N),
    extrapolated linearly in 1/N. Lower fidelity than large-scale
    variational estimates.
    """

    def __init__(self, sizes=(8, 10, 12, 14), d=1):
        self.sizes = tuple(sizes)
        self.d = d
        self._cache = {}

    def at_size(self, alpha, j_z, L):
        spec = model.LatticeSpec(d=self.d, L=L, alpha=alpha, j_z=j_z)
        ham = basis.Hamiltonian.xxz(spec)
        n = spec.n
        lowest = min(basis.sector_ground_energy(ham, basis.Sector(n, up))
                     for up in (n // 2, n // 2 + 1))
        e_css = model.css_energy(spec, convention='pauli')
        return max(e_css - lowest, 0.0) / (4.0 * n)

    def __call__(self, alpha, j_z):
        key = (round(alpha, 12), round(j_z, 12))
        if key not in self._cache:
            inv = [1.0 / L ** self.d for L in self.sizes]
            values = [self.at_size(alpha, j_z, L) for L in self.sizes]
            slope, intercept = np.polyfit(inv, values, 1)
            self._cache[key] = max(float(intercept), 0.0)
        return self._cache[key]


def analyze(alpha, d, spin, j_z, energy_model):
    energy = energy_model(alpha, j_z)
    return SpinWaveResult(alpha=alpha, d=d, spin=spin, j_z=j_z,
                          eta0=infinite_eta0(alpha, d),
                          t_c=critical_temperature(alpha, d, spin),
                          t_0=css_temperature(alpha, d, spin, energy),
                          energy=energy)


def solve_jc(alpha, d, spin, energy_model, bracket=J_Z_BRACKET, xtol=1e-3):
    """J_z where T_0(E(alpha, J_z)) = T_c(alpha)."""
    t_c = critical_temperature(alpha, d, spin)

    def gap(j_z):
        return css_temperature(alpha, d, spin, energy_model(alpha, j_z)) - t_c

    lo, hi = bracket
    if gap(lo) * gap(hi) > 0:
        raise exceptions.NoBoundaryInRange(bracket=bracket)
    j_c = optimize.bisect(gap, lo, hi, xtol=xtol)
    LOG.info('alpha=%s d=%s: J_c=%.4f, T_c=%.5g', alpha, d, j_c, t_c)
    return j_c


def boundary_table(alphas, d, spin, energy_model, solve=True):
    rows = []
    for alpha in alphas:
        j_c = None
        if solve:
            try:
                j_c = solve_jc(alpha, d, spin, energy_model)
            except exceptions.NoBoundaryInRange:
                LOG.warning('No boundary in range for alpha=%s', alpha)
        at = j_c if j_c is not None else 0.0
        rows.append(dataclasses.replace(
            analyze(alpha, d, spin, at, energy_model), j_c=j_c))
    return rows
