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


"""Optimal squeezing, the scaling exponent nu and the critical point."""

import collections
import dataclasses

import numpy as np
from oslo_log import log as logging
from scipy import signal

from xxz_squeezing.common import fitting
from xxz_squeezing import exceptions
from xxz_squeezing import observables

LOG = logging.getLogger(__name__)

NO_DERIVATIVE_MINIMUM = 'no-derivative-minimum'
DEGENERATE_RAMP = 'degenerate-ramp'
MIN_SIZES = 4
MIN_DECADES = 1.0
MIN_CONTROL_POINTS = 6

thermalization_time = observables.thermalization_time


@dataclasses.dataclass(frozen=True)
class SqueezingPoint(object):
    xi2: float
    t: float
    err: float = np.nan
    flags: tuple = ()


def _window(window, size):
    window = min(window, size if size % 2 else size - 1)
    if window % 2 == 0:
        window -= 1
    if window < 3:
        raise ValueError('need at least 3 finite points, got %d' % size)
    return window


def squeezing_optimum(times, xi2, t_therm, window=7, errors=None):
    """Smallest smoothed xi2 among the stationary points after t_therm.

    The series is smoothed with a local quadratic Savitzky-Golay filter
    and differentiated with the same filter. Local minima of |dxi2/dt|
    after ``t_therm`` are the candidates. Without one, the smallest
    smoothed value after ``t_therm`` is returned and flagged.

    :param times: uniform time grid
    :param xi2: squeezing series, NaN where depolarized
    :param errors: optional per-point error bars
    :return: SqueezingPoint
    """
    times = np.asarray(times, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    finite = np.isfinite(xi2)
    times, values = times[finite], xi2[finite]
    errors = (np.full(len(xi2), np.nan) if errors is None
              else np.asarray(errors, dtype=float))[finite]
    window = _window(window, len(values))
    delta = times[1] - times[0]
    smooth = signal.savgol_filter(values, window, 2)
    slope = np.abs(signal.savgol_filter(values, window, 2, deriv=1,
                                        delta=delta))
    late = np.flatnonzero(times > t_therm)
    if not late.size:
        raise ValueError('no samples after t_therm=%s' % t_therm)
    inner = late[(late > 0) & (late < len(values) - 1)]
    candidates = inner[(slope[inner] < slope[inner - 1]) &
                       (slope[inner] <= slope[inner + 1])]
    flags = ()
    if candidates.size:
        best = candidates[np.argmin(smooth[candidates])]
    else:
        LOG.warning('No derivative minimum after t_therm=%s, using the '
                    'smallest late value', t_therm)
        best = late[np.argmin(smooth[late])]
        flags = (NO_DERIVATIVE_MINIMUM,)
    return SqueezingPoint(xi2=float(smooth[best]), t=float(times[best]),
                          err=float(errors[best]), flags=flags)


def optimal_squeezing(series, t_therm=None, window=7,
                      plateau_start=2.0 / 3.0):
    """xi2_opt and t_opt of an ObservableSeries.

    :param t_therm: defaults to the first time m_xy is within 5% of its
        late plateau
    """
    if t_therm is None:
        t_therm = thermalization_time(series.times, series.m_xy,
                                      plateau_start)
    return squeezing_optimum(series.times, series.xi2, t_therm, window,
                             series.err_xi2)


@dataclasses.dataclass(frozen=True)
class NuFit(object):
    nu: float
    sigma: float
    r2: float
    sizes: tuple


def fit_nu(points):
    """xi2_opt ~ N**-nu by weighted least squares on log-log axes.

    :param points: iterable of (N, xi2_opt, err); err <= 0 or NaN on any
        point switches to an unweighted fit
    :return: NuFit
    """
    points = sorted(points)
    sizes = tuple(int(p[0]) for p in points)
    if len(set(sizes)) < MIN_SIZES:
        raise exceptions.InsufficientSizes(
            reason='at least %d distinct sizes' % MIN_SIZES, sizes=sizes)
    if np.log10(max(sizes) / min(sizes)) < MIN_DECADES - 1e-12:
        raise exceptions.InsufficientSizes(
            reason='sizes spanning a decade', sizes=sizes)
    n = np.array(sizes, dtype=float)
    xi2 = np.array([p[1] for p in points], dtype=float)
    err = np.array([p[2] for p in points], dtype=float)
    weights = None
    if np.all(err > 0):
        weights = xi2 / err
    line = fitting.linear_fit(np.log(n), np.log(xi2), weights)
    sigma = line.stderr if np.isfinite(line.stderr) else 0.0
    return NuFit(nu=-line.slope, sigma=float(sigma), r2=line.r2,
                 sizes=sizes)


@dataclasses.dataclass(frozen=True)
class JcEstimate(object):
    jc: float
    error: float
    floor: float
    ceiling: float
    ramp_start: float
    ramp_end: float
    sse: float
    line_sse: float
    bracket: tuple = None
    flags: tuple = ()


def line_fit_residual(control, nu):
    """Squared residual of a single straight line."""
    line = fitting.linear_fit(control, nu)
    return float(np.sum((np.asarray(nu) - line(control)) ** 2))


def _ramp_search(x, y, grid):
    """Least-squares floor/ceiling for every ramp (a < b) on the grid."""
    nodes = np.linspace(x[0], x[-1], grid)
    a, b = np.meshgrid(nodes, nodes, indexing='ij')
    keep = a < b
    a, b = a[keep], b[keep]
    s = np.clip((x[None, :] - a[:, None]) / (b - a)[:, None], 0.0, 1.0)
    r = 1.0 - s
    saa = np.sum(r * r, axis=1)
    sab = np.sum(r * s, axis=1)
    sbb = np.sum(s * s, axis=1)
    ya = r.dot(y)
    yb = s.dot(y)
    det = saa * sbb - sab ** 2
    usable = det > 1e-12 * np.maximum(saa * sbb, 1e-300)
    with np.errstate(divide='ignore', invalid='ignore'):
        floor = (sbb * ya - sab * yb) / det
        ceiling = (saa * yb - sab * ya) / det
    fitted = floor[:, None] * r + ceiling[:, None] * s
    sse = np.where(usable, np.sum((fitted - y[None, :]) ** 2, axis=1),
                   np.inf)
    best = int(np.argmin(sse))
    return a[best], b[best], floor[best], ceiling[best], sse[best]


def locate_jc(control, nu, d, grid=201):
    """Critical control value from a nu curve.

    A flat floor and ceiling joined by a linear ramp are fitted by a grid
    search over the ramp endpoints with linear least squares for the two
    levels. d=1 takes the ramp centre, d=2 the end of the ramp on the
    lower level; both report the ramp width as the error. d=3 brackets the
    largest jump between neighbouring samples.

    :param control: control values, e.g. J_z
    :param nu: fitted exponents at the control values
    :param d: lattice dimension
    :return: JcEstimate
    """
    order = np.argsort(control)
    x = np.asarray(control, dtype=float)[order]
    y = np.asarray(nu, dtype=float)[order]
    if len(x) < MIN_CONTROL_POINTS:
        raise exceptions.InsufficientSizes(
            reason='at least %d control values' % MIN_CONTROL_POINTS,
            sizes=tuple(x.tolist()))
    a, b, floor, ceiling, sse = _ramp_search(x, y, grid)
    line_sse = line_fit_residual(x, y)
    spacing = float(np.min(np.diff(x)))
    flags = []
    bracket = None
    if d == 3:
        i = int(np.argmax(np.abs(np.diff(y))))
        bracket = (float(x[i]), float(x[i + 1]))
        jc = 0.5 * (x[i] + x[i + 1])
        error = 0.5 * (x[i + 1] - x[i])
    else:
        if d == 1:
            jc = 0.5 * (a + b)
        elif d == 2:
            jc = a if floor <= ceiling else b
        else:
            raise ValueError('no critical point rule for d=%s' % d)
        error = b - a
        if error < spacing:
            flags.append(DEGENERATE_RAMP)
            LOG.warning('Ramp width %.3g is below the control spacing '
                        '%.3g', error, spacing)
            error = spacing
    if sse >= line_sse:
        LOG.warning('Piecewise fit does not improve on a single line, '
                    'SSE %.3g vs %.3g', sse, line_sse)
    return JcEstimate(jc=float(jc), error=float(error), floor=float(floor),
                      ceiling=float(ceiling), ramp_start=float(a),
                      ramp_end=float(b), sse=float(sse),
                      line_sse=line_sse, bracket=bracket,
                      flags=tuple(flags))


@dataclasses.dataclass
class ScalingFit(object):
    """nu per control value and the critical point of the nu curve."""
    control: str
    points: dict
    nu: dict
    jc: JcEstimate = None

    @property
    def curve(self):
        values = sorted(self.nu)
        return values, [self.nu[v].nu for v in values]

    @classmethod
    def from_sweep(cls, rows, control='j_z', d=None):
        """Group an aggregate sweep table by control value.

        :param rows: dicts carrying ``control``, 'n', 'xi2_opt' and
            'err_xi2'
        :param d: when given, also locate the critical point
        """
        points = collections.defaultdict(list)
        for row in rows:
            points[float(row[control])].append(
                (int(row['n']), float(row['xi2_opt']),
                 float(row.get('err_xi2', np.nan))))
        nu = {value: fit_nu(pts) for value, pts in points.items()}
        fit = cls(control=control, points=dict(points), nu=nu)
        if d is not None:
            values, curve = fit.curve
            fit.jc = locate_jc(values, curve, d)
        return fit

    def rows(self):
        for value in sorted(self.nu):
            result = self.nu[value]
            yield (value, result.nu, result.sigma, result.r2,
                   len(result.sizes))
