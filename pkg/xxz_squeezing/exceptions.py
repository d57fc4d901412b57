# Copyright 2024 Red Hat
# All Rights Reserved.
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

from tempest.lib import exceptions


class InvalidLatticeSpec(exceptions.TempestException):
    message = "Lattice spec is invalid: %(reason)s."


class NonCommensurateMomentum(exceptions.TempestException):
    message = ("Momentum %(q)s is not on the reciprocal lattice, residual "
               "imaginary part %(residual)s exceeds %(tolerance)s.")


class InvalidPolarization(exceptions.TempestException):
    message = "Polarization must lie in [0, 1], got %(p)s."


class OddSiteCount(exceptions.TempestException):
    message = "Z-constrained sampling needs an even site count, got %(n)s."


class DTWADivergence(exceptions.TempestException):
    message = ("%(aborted)d of %(total)d trajectories diverged, more than the "
               "allowed fraction %(allowed)s. First streams: %(seeds)s.")


class DepolarizedState(exceptions.TempestException):
    message = "Mean collective X is below the depolarization floor: %(mean)s."


class MarginalCorrelationDecay(exceptions.TempestException):
    message = ("Correlation exponent p=%(p)s is a marginal case in "
               "d=%(d)s.")


class InvalidScalingExponent(exceptions.TempestException):
    message = "Growth exponent gamma must lie in [0, 2), got %(gamma)s."


class NoFiniteTemperatureOrder(exceptions.TempestException):
    message = ("No finite-temperature order for alpha=%(alpha)s in d=%(d)s, "
               "rigorous bounds exclude it outside %(window)s.")


class NegativeEnergyDensity(exceptions.TempestException):
    message = "Excitation energy density must be non-negative, got %(energy)s."


class BisectionFailure(exceptions.TempestException):
    message = "Bisection did not converge in bracket %(bracket)s: %(reason)s."


class NoBoundaryInRange(exceptions.TempestException):
    message = ("No boundary in range: T_0 - T_c has no sign change over "
               "J_z in %(bracket)s.")


class KrylovConvergenceError(exceptions.TempestException):
    message = ("Krylov propagation failed at t=%(t)s with step %(step)s: "
               "%(reason)s.")


class SectorTooLarge(exceptions.TempestException):
    message = "Sector dimension %(dim)d for N=%(n)d exceeds %(limit)d."


class UnstableTimeStep(exceptions.TempestException):
    message = ("Time step %(dt)s does not resolve the fastest mode, need "
               "dt <= %(limit)s.")


class InsufficientSizes(exceptions.TempestException):
    message = "Scaling fit needs %(reason)s, got sizes %(sizes)s."


class ConfigValidationError(exceptions.TempestException):
    message = "Invalid configuration at %(key)s: %(reason)s."


class SweepFailure(exceptions.TempestException):
    message = "%(failed)d of %(total)d sweep points failed: %(points)s."
