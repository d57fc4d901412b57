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

"""Lattices, couplings and momentum sums of the power-law XXZ model.

The Hamiltonian is taken in the Pauli convention

    H = - sum_{i<j} w_ij [J_perp (sx_i sx_j + sy_i sy_j) + J_z sz_i sz_j]

with w_ij = r_ij**-alpha under the minimum-image convention. No Kac
normalization is applied, couplings enter unrescaled. The spin-operator
convention (S = sigma/2) divides every bilinear by 4.
"""

import dataclasses

import numpy as np
from oslo_log import log as logging

from xxz_squeezing import exceptions

LOG = logging.getLogger(__name__)

POWER_LAW = 'power-law'
NEAREST_NEIGHBOR = 'nearest-neighbor'


@dataclasses.dataclass(frozen=True)
class LatticeSpec(object):
    d: int = 1
    L: int = 64
    alpha: float = 1.5
    j_perp: float = 1.0
    j_z: float = 0.0
    interaction: str = POWER_LAW
    boundary: str = 'periodic'

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise exceptions.InvalidLatticeSpec(
                reason='dimension %s not in {1, 2, 3}' % self.d)
        if self.L < 2:
            raise exceptions.InvalidLatticeSpec(
                reason='L=%s, need at least 2 sites per axis' % self.L)
        if self.interaction not in (POWER_LAW, NEAREST_NEIGHBOR):
            raise exceptions.InvalidLatticeSpec(
                reason='unknown interaction %s' % self.interaction)
        if self.interaction == POWER_LAW and not self.alpha > 0:
            raise exceptions.InvalidLatticeSpec(
                reason='alpha=%s, power-law needs alpha > 0' % self.alpha)
        if self.boundary != 'periodic':
            raise exceptions.InvalidLatticeSpec(
                reason='boundary %s is not supported' % self.boundary)

    @property
    def n(self):
        return self.L ** self.d

    @classmethod
    def from_conf(cls, section):
        return cls(d=section.d, L=section.L, alpha=section.alpha,
                   j_perp=section.j_perp, j_z=section.j_z,
                   interaction=section.interaction,
                   boundary=section.boundary)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class CouplingMatrix(object):
    """Dimensionless pair weights, scaled by J_perp or J_z at use sites."""
    weights: np.ndarray

    @property
    def n(self):
        return self.weights.shape[0]

    @property
    def row_sum(self):
        return float(self.weights[0].sum())


def site_coordinates(spec):
    axes = np.indices((spec.L,) * spec.d).reshape(spec.d, -1)
    return axes.T


def minimum_image(offsets, L):
    offsets = np.mod(offsets, L)
    return np.where(offsets > L / 2.0, offsets - L, offsets)


def kernel(spec, displacements):
    """Pair weight as a function of signed displacement vectors."""
    r = np.sqrt((np.asarray(displacements, dtype=float) ** 2).sum(axis=-1))
    w = np.zeros_like(r)
    nonzero = r > 0
    if spec.interaction == NEAREST_NEIGHBOR:
        w[np.isclose(r, 1.0)] = 1.0
    else:
        w[nonzero] = r[nonzero] ** (-spec.alpha)
    return w


def displacements(spec):
    """Minimum-image displacement of every site from site 0."""
    return minimum_image(site_coordinates(spec), spec.L)


def build_couplings(spec):
    coords = site_coordinates(spec)
    row = kernel(spec, displacements(spec))
    offsets = np.mod(coords[None, :, :] - coords[:, None, :], spec.L)
    flat = np.ravel_multi_index(tuple(np.moveaxis(offsets, -1, 0)),
                                (spec.L,) * spec.d)
    weights = row[flat]
    LOG.debug('Built %dx%d couplings, row sum %.6g', spec.n, spec.n,
              row.sum())
    return CouplingMatrix(weights=weights)


def momentum_grid(spec):
    """Reciprocal lattice vectors q_i = 2 pi n_i / L, n_i = 0 .. L-1."""
    return 2 * np.pi * site_coordinates(spec) / spec.L


def _check_commensurate(spec, q):
    n = np.asarray(q, dtype=float) * spec.L / (2 * np.pi)
    if np.any(np.abs(n - np.round(n)) > 1e-9):
        raise exceptions.NonCommensurateMomentum(
            q=tuple(q), residual='n/a', tolerance='integer multiples of '
                                                  '2 pi / L')


def eta(spec, q):
    """Lattice sum eta(q) = sum_{r != 0} w(r) exp(i q.r).

    :param spec: LatticeSpec
    :param q: momentum vector of length spec.d on the reciprocal lattice
    :return: real eta(q)
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.shape != (spec.d,):
        raise exceptions.InvalidLatticeSpec(
            reason='momentum %s does not have %d components' % (q, spec.d))
    _check_commensurate(spec, q)
    disp = displacements(spec)
    w = kernel(spec, disp)
    value = np.sum(w * np.exp(1j * disp.dot(q)))
    tolerance = 1e-12 * max(1.0, w.sum())
    if abs(value.imag) > tolerance:
        raise exceptions.NonCommensurateMomentum(
            q=tuple(q), residual=abs(value.imag), tolerance=tolerance)
    return float(value.real)


@dataclasses.dataclass(frozen=True)
class MomentumSum(object):
    """eta and omega = eta(0) - eta on the full momentum grid."""
    q: np.ndarray
    eta: np.ndarray
    shape: tuple

    @property
    def eta0(self):
        return float(self.eta[0])

    @property
    def omega(self):
        return self.eta0 - self.eta

    @property
    def k_norm(self):
        """|k| with every component folded into (-pi, pi]."""
        folded = np.where(self.q > np.pi, self.q - 2 * np.pi, self.q)
        return np.sqrt((folded ** 2).sum(axis=-1))

    def stiffness(self, j_perp, m_xy):
        """K_k = 2 (J_0 - J_k) = J_perp m_xy**2 omega(k)."""
        return j_perp * m_xy ** 2 * self.omega

    @classmethod
    def from_spec(cls, spec):
        shape = (spec.L,) * spec.d
        w = kernel(spec, displacements(spec)).reshape(shape)
        values = np.fft.fftn(w).ravel()
        tolerance = 1e-12 * max(1.0, w.sum())
        if np.max(np.abs(values.imag)) > tolerance * spec.n:
            raise exceptions.NonCommensurateMomentum(
                q='grid', residual=np.max(np.abs(values.imag)),
                tolerance=tolerance)
        return cls(q=momentum_grid(spec), eta=values.real, shape=shape)


def css_energy(spec, convention='spin', axis='x'):
    """Energy of the coherent spin state polarized along ``axis``.

    Along x (or y) only the transverse bilinears contribute, the z-z terms
    average to zero, so E = -(N/8) J_perp eta(0) in the spin-operator
    convention. Along z the J_z term is the only one left.

    :param convention: 'spin' (S = sigma/2) or 'pauli'
    :param axis: polarization axis, 'x', 'y' or 'z'
    """
    eta0 = build_row_sum(spec)
    coupling = spec.j_z if axis == 'z' else spec.j_perp
    per_bond = 0.25 if convention == 'spin' else 1.0
    return -0.5 * spec.n * eta0 * coupling * per_bond


def build_row_sum(spec):
    return float(kernel(spec, displacements(spec)).sum())


def classical_energy(spins, couplings, spec):
    """Classical energy with sigma -> 2 s, per leading batch index.

    :param spins: array (..., N, 3)
    :param couplings: CouplingMatrix
    """
    scale = np.array([spec.j_perp, spec.j_perp, spec.j_z])
    field = np.matmul(couplings.weights, spins) * scale
    return -2.0 * np.sum(spins * field, axis=(-2, -1))
