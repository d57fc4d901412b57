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

"""Bit-coded magnetization sectors and sector-blocked operators.

Bit i of a basis state is 1 when spin i points up. A sector holds every
state with ``n_up`` up spins, sorted, so that index lookup is a binary
search. Its collective Z eigenvalue is m = n_up - N/2.
"""

import functools

import numpy as np
from oslo_log import log as logging
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from xxz_squeezing import exceptions
from xxz_squeezing import model

LOG = logging.getLogger(__name__)

MAX_SITES = 20
MAX_DIMENSION = 200000


def popcount(states, n):
    counts = np.zeros_like(states)
    for i in range(n):
        counts += (states >> i) & 1
    return counts


@functools.lru_cache(maxsize=None)
def _states(n, n_up):
    every = np.arange(1 << n, dtype=np.int64)
    return every[popcount(every, n) == n_up]


class Sector(object):

    def __init__(self, n, n_up):
        if n > MAX_SITES:
            raise exceptions.SectorTooLarge(dim=0, n=n, limit=MAX_SITES)
        if not 0 <= n_up <= n:
            raise ValueError('n_up=%s outside [0, %s]' % (n_up, n))
        self.n = n
        self.n_up = n_up
        self.states = _states(n, n_up)
        if self.dim > MAX_DIMENSION:
            raise exceptions.SectorTooLarge(dim=self.dim, n=n,
                                            limit=MAX_DIMENSION)

    @property
    def m(self):
        return self.n_up - self.n / 2.0

    @property
    def dim(self):
        return len(self.states)

    def index(self, states):
        return np.searchsorted(self.states, states)

    def spins(self):
        """Pauli z eigenvalues, array (dim, n) of +-1."""
        bits = (self.states[:, None] >> np.arange(self.n)) & 1
        return 2 * bits - 1

    def __repr__(self):
        return 'Sector(n=%d, m=%s, dim=%d)' % (self.n, self.m, self.dim)


@functools.lru_cache(maxsize=64)
def raising_operator(n, n_up):
    """Collective S+ from sector n_up to n_up + 1, CSR."""
    lower = Sector(n, n_up)
    upper = Sector(n, n_up + 1)
    rows, cols = [], []
    for i in range(n):
        free = (lower.states >> i) & 1 == 0
        cols.append(np.flatnonzero(free))
        rows.append(upper.index(lower.states[free] | (1 << i)))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)),
                             shape=(upper.dim, lower.dim))


class Hamiltonian(object):
    """Sector-blocked spin Hamiltonian.

    H = - sum_{i<j} w_ij [J_perp (sx sx + sy sy) + J_z sz sz]
        + twist * Z**2 / N

    with Pauli bilinears and the collective Z = sum sz / 2.
    """

    def __init__(self, n, pairs=(), j_perp=1.0, j_z=0.0, twist=0.0):
        self.n = n
        self.pairs = tuple(pairs)
        self.j_perp = j_perp
        self.j_z = j_z
        self.twist = twist
        self._blocks = {}

    @classmethod
    def xxz(cls, spec):
        weights = model.build_couplings(spec).weights
        i, j = np.nonzero(np.triu(weights, k=1))
        pairs = [(a, b, weights[a, b]) for a, b in zip(i.tolist(),
                                                     j.tolist())]
        return cls(spec.n, pairs, spec.j_perp, spec.j_z)

    @classmethod
    def oat(cls, n, chi):
        return cls(n, twist=chi)

    def with_twist(self, delta):
        return Hamiltonian(self.n, self.pairs, self.j_perp, self.j_z,
                           self.twist + delta)

    def block(self, sector):
        """The Hamiltonian restricted to ``sector``, CSR."""
        if sector.n_up in self._blocks:
            return self._blocks[sector.n_up]
        states = sector.states
        diag = np.full(sector.dim, self.twist * sector.m ** 2 / self.n)
        rows, cols, vals = [], [], []
        for i, j, w in self.pairs:
            bi = (states >> i) & 1
            bj = (states >> j) & 1
            anti = bi != bj
            diag -= self.j_z * w * np.where(anti, -1.0, 1.0)
            if self.j_perp and anti.any():
                src = np.flatnonzero(anti)
                flipped = states[anti] ^ ((1 << i) | (1 << j))
                rows.append(sector.index(flipped))
                cols.append(src)
                vals.append(np.full(len(src), -2.0 * self.j_perp * w))
        rows.append(np.arange(sector.dim))
        cols.append(np.arange(sector.dim))
        vals.append(diag)
        matrix = sparse.csr_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(sector.dim, sector.dim))
        LOG.debug('Built %r with %d nonzeros', sector, matrix.nnz)
        self._blocks[sector.n_up] = matrix
        return matrix


def sector_ground_energy(hamiltonian, sector):
    matrix = hamiltonian.block(sector)
    if sector.dim <= 64:
        return float(np.linalg.eigvalsh(matrix.toarray())[0])
    value = sparse_linalg.eigsh(matrix, k=1, which='SA',
                                return_eigenvectors=False)
    return float(value[0])


def sector_spectrum(hamiltonian, sector, k=6):
    """Lowest ``k`` eigenvalues of a sector."""
    matrix = hamiltonian.block(sector)
    if sector.dim <= max(64, k + 2):
        return np.linalg.eigvalsh(matrix.toarray())[:k]
    values = sparse_linalg.eigsh(matrix, k=k, which='SA',
                                 return_eigenvectors=False)
    return np.sort(values)
