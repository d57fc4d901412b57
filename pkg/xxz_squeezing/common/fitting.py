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


"""Small least-squares helpers shared by the analysis modules."""

import dataclasses

import numpy as np
from oslo_log import log as logging
from scipy import optimize

LOG = logging.getLogger(__name__)

FFT_PADDING = 8


@dataclasses.dataclass(frozen=True)
class LinearFit(object):
    slope: float
    intercept: float
    r2: float
    stderr: float

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def linear_fit(x, y, w=None):
    """Weighted least-squares line.

    :param x: abscissae
    :param y: ordinates
    :param w: optional weights, 1/sigma per point
    :return: LinearFit; stderr is the slope standard error
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    if len(x) < 2:
        raise ValueError('a line needs at least 2 points, got %d' % len(x))
    design = np.stack([x, np.ones_like(x)], axis=-1) * w[:, None]
    coeffs, _, _, _ = np.linalg.lstsq(design, y * w, rcond=None)
    slope, intercept = coeffs
    resid = (y - slope * x - intercept) * w
    ss_res = float(np.sum(resid ** 2))
    mean = np.average(y, weights=w ** 2)
    ss_tot = float(np.sum((w * (y - mean)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    stderr = np.nan
    if len(x) > 2:
        cov = np.linalg.inv(design.T.dot(design)) * ss_res / (len(x) - 2)
        stderr = float(np.sqrt(cov[0, 0]))
    return LinearFit(slope=float(slope), intercept=float(intercept),
                     r2=float(r2), stderr=stderr)


@dataclasses.dataclass(frozen=True)
class SinusoidFit(object):
    amplitude: float
    frequency: float
    phase: float
    damping: float
    r2: float


def _model(params, t, complex_signal, damped):
    a, omega, phi = params[:3]
    envelope = a * np.exp(-params[3] * t) if damped else a
    if complex_signal:
        wave = np.exp(1j * (omega * t + phi))
    else:
        wave = np.cos(omega * t + phi)
    return envelope * wave


def _fft_seed(t, signal, complex_signal):
    dt = t[1] - t[0]
    size = FFT_PADDING * len(t)
    centered = signal - signal.mean() if not complex_signal else signal
    if complex_signal:
        spectrum = np.fft.fft(centered, n=size)
        freqs = np.fft.fftfreq(size, d=dt)
    else:
        spectrum = np.fft.rfft(centered, n=size)
        freqs = np.fft.rfftfreq(size, d=dt)
    peak = int(np.argmax(np.abs(spectrum)))
    omega = 2 * np.pi * freqs[peak]
    # phase of the peak, referred back to t[0]
    phi = float(np.angle(spectrum[peak])) - omega * t[0]
    amplitude = np.abs(spectrum[peak]) / len(t)
    if not complex_signal:
        amplitude *= 2.0
    return amplitude, omega, phi


def fit_sinusoid(t, signal, damped=False):
    """Fit a single oscillation to a uniformly sampled signal.

    A complex signal is modelled as a exp(i(omega t + phi)), a real one as
    a cos(omega t + phi), both optionally with an exp(-lambda t) envelope.
    The zero-padded FFT peak seeds the nonlinear refinement.

    :param t: uniform time grid
    :param signal: real or complex samples
    :param damped: also fit an exponential decay rate
    :return: SinusoidFit
    """
    t = np.asarray(t, dtype=float)
    signal = np.asarray(signal)
    complex_signal = np.iscomplexobj(signal)
    a0, omega0, phi0 = _fft_seed(t, signal, complex_signal)
    x0 = [a0, omega0, phi0] + ([0.0] if damped else [])

    def residual(params):
        diff = _model(params, t, complex_signal, damped) - signal
        if complex_signal:
            return np.concatenate([diff.real, diff.imag])
        return diff

    res = optimize.least_squares(residual, x0, method='lm', xtol=1e-12,
                                 ftol=1e-12, gtol=1e-12)
    if not res.success:
        LOG.warning('Sinusoid refinement did not converge: %s', res.message)
    a, omega, phi = res.x[:3]
    if a < 0:
        a, phi = -a, phi + np.pi
    if omega < 0 and not complex_signal:
        omega, phi = -omega, -phi
    ss_res = float(np.sum(np.abs(res.fun) ** 2))
    ss_tot = float(np.sum(np.abs(signal - signal.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SinusoidFit(amplitude=float(a), frequency=float(omega),
                       phase=float(np.mod(phi, 2 * np.pi)),
                       damping=float(res.x[3]) if damped else 0.0,
                       r2=r2)
