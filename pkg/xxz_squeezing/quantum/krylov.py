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

import numpy as np
from oslo_log import log as logging
from scipy import linalg

from xxz_squeezing import exceptions

LOG = logging.getLogger(__name__)

MIN_STEP_FRACTION = 1e-12


def lanczos_basis(matrix, vector, dim):
    """Orthonormal Krylov basis and tridiagonal projection of ``matrix``.

    Full reorthogonalization keeps the basis orthonormal to machine
    precision. An invariant subspace stops the iteration early, the
    projection is then exact.

    :return: (basis rows, diagonal, off-diagonal, norm of ``vector``)
    """
    norm = np.linalg.norm(vector)
    size = vector.shape[0]
    dim = min(dim, size)
    q = np.zeros((dim, size), dtype=complex)
    q[0] = vector / norm
    alpha = np.zeros(dim)
    beta = np.zeros(max(dim - 1, 0))
    scale = 0.0
    for j in range(dim):
        w = matrix.dot(q[j])
        alpha[j] = np.vdot(q[j], w).real
        w = w - alpha[j] * q[j]
        if j:
            w = w - beta[j - 1] * q[j - 1]
        w = w - q[:j + 1].T.dot(q[:j + 1].conj().dot(w))
        scale = max(scale, abs(alpha[j]))
        if j == dim - 1:
            break
        b = np.linalg.norm(w)
        if b <= 1e-12 * max(scale, 1.0):
            return q[:j + 1], alpha[:j + 1], beta[:j], norm
        beta[j] = b
        q[j + 1] = w / b
    return q, alpha, beta, norm


def _propagate(basis, alpha, beta, norm, tau):
    if len(alpha) == 1:
        coeffs = np.array([np.exp(-1j * tau * alpha[0])])
    else:
        evals, evecs = linalg.eigh_tridiagonal(alpha, beta)
        coeffs = evecs.dot(np.exp(-1j * tau * evals) * evecs[0])
    return norm * basis.T.dot(coeffs)


class KrylovPropagator(object):
    """exp(-i H t) v by Lanczos steps with step-doubling error control.

    Each step of length tau is compared against two steps of tau/2; the
    step is accepted when they agree within ``tol`` and the more accurate
    result is kept.
    """

    def __init__(self, matrix, dim=30, tol=1e-10):
        self.matrix = matrix
        self.dim = dim
        self.tol = tol
        self.scale = float(abs(matrix).sum(axis=1).max()) if \
            matrix.shape[0] else 0.0

    def initial_step(self, duration):
        if self.scale == 0:
            return duration
        return min(duration, self.dim / (6.0 * self.scale))

    def evolve(self, vector, t):
        vector = np.asarray(vector, dtype=complex)
        if t == 0 or not vector.any():
            return vector.copy()
        done = 0.0
        tau = self.initial_step(t)
        while done < t:
            tau = min(tau, t - done)
            basis, alpha, beta, norm = lanczos_basis(self.matrix, vector,
                                                     self.dim)
            full = _propagate(basis, alpha, beta, norm, tau)
            if len(alpha) < self.dim or len(vector) <= self.dim:
                # invariant subspace, the projection is exact
                vector, done = full, done + tau
                continue
            half = _propagate(basis, alpha, beta, norm, tau / 2.0)
            half = _propagate(*lanczos_basis(self.matrix, half, self.dim),
                              tau=tau / 2.0)
            error = np.linalg.norm(full - half)
            if error <= self.tol * max(norm, 1e-300):
                vector, done = half, done + tau
                if error < self.tol / 32.0:
                    tau *= 1.5
                continue
            tau /= 2.0
            if tau < MIN_STEP_FRACTION * t:
                raise exceptions.KrylovConvergenceError(
                    t=done, step=tau, reason='step error %g above %g'
                    % (error, self.tol))
            LOG.debug('Krylov step rejected, retrying with %g', tau)
        return vector

    def series(self, vector, times):
        """States at every time of the increasing grid ``times``."""
        out = np.empty((len(times), len(vector)), dtype=complex)
        current = np.asarray(vector, dtype=complex)
        last = 0.0
        for k, t in enumerate(times):
            current = self.evolve(current, t - last)
            out[k] = current
            last = t
        return out
