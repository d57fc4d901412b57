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


"""Per-mode pipelines, parameter sweeps and config validation."""

import dataclasses
import itertools
import os

import numpy as np
from oslo_config import cfg
from oslo_log import log as logging
from tempest.lib import exceptions as lib_exc

from xxz_squeezing.common import artifacts
from xxz_squeezing.common import fitting
from xxz_squeezing import config
from xxz_squeezing import dtwa
from xxz_squeezing import exceptions
from xxz_squeezing import fit
from xxz_squeezing import hydro
from xxz_squeezing import model
from xxz_squeezing import oat
from xxz_squeezing import observables
from xxz_squeezing.quantum import echo
from xxz_squeezing import spinwave
from xxz_squeezing import utils

LOG = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'XXZ_SQUEEZING_OUTPUT_DIR'
SWEEP_AXES = ('j_z', 'alpha', 'L', 'polarization')
AGGREGATE_COLUMNS = ('index', 'j_z', 'alpha', 'L', 'polarization', 'n',
                     'seed', 'xi2_opt', 'err_xi2', 't_opt', 't_therm',
                     'm_xy_plateau', 'flags')
ECHO_FIT_FRACTION = 1.0 / 3.0


def output_dir(conf, override=None):
    return (override or os.environ.get(OUTPUT_DIR_ENV) or
            conf.output_dir)


class Run(object):
    """Output directory, format and manifest shared by a pipeline."""

    def __init__(self, conf, directory):
        self.conf = conf
        self.directory = directory
        self.jsonl = conf.output_format == 'jsonl'
        self.manifest = artifacts.Manifest(conf.mode, conf.seed)

    def table(self, name, columns, rows, metadata=None):
        paths = artifacts.write_table(self.directory, name, columns, rows,
                                      metadata, self.jsonl)
        self.manifest.add_files(paths)
        return paths

    def json(self, name, data):
        path = artifacts.write_json(self.directory, name, data)
        self.manifest.add_files([path])
        return path

    def finish(self):
        path = self.manifest.write(self.directory)
        LOG.info('Run manifest written to %s', path)
        return path


def validate(conf, config_file=None, sweep=False):
    """Check a config file and every resolved value.

    :raises ConfigValidationError: naming the offending group.option
    """
    if config_file:
        if not os.path.exists(config_file):
            raise exceptions.ConfigValidationError(
                key='--config', reason='%s does not exist' % config_file)
        sections = {}
        cfg.ConfigParser(config_file, sections).parse()
        known = dict((g.name, {o.dest for o in opts})
                     for g, opts in config.GROUPS)
        known['DEFAULT'] = {o.dest for o in config.default_opts}
        for section, values in sections.items():
            if section not in known:
                raise exceptions.ConfigValidationError(
                    key=section, reason='unknown section')
            for key in values:
                if key not in known[section]:
                    raise exceptions.ConfigValidationError(
                        key='%s.%s' % (section, key),
                        reason='unknown option')
    for group, opts in [(None, config.default_opts)] + config.GROUPS:
        section = conf if group is None else conf[group.name]
        for opt in opts:
            key = opt.dest if group is None else '%s.%s' % (group.name,
                                                           opt.dest)
            try:
                section[opt.dest]
            except (cfg.ConfigFileValueError, ValueError) as e:
                raise exceptions.ConfigValidationError(key=key,
                                                       reason=str(e))
    if conf.fit.window % 2 == 0:
        raise exceptions.ConfigValidationError(
            key='fit.window', reason='window must be odd')
    try:
        model.LatticeSpec.from_conf(conf.lattice)
    except exceptions.InvalidLatticeSpec as e:
        raise exceptions.ConfigValidationError(key='lattice',
                                               reason=str(e))
    if conf.mode == 'fit' and not conf.fit.input:
        raise exceptions.ConfigValidationError(
            key='fit.input', reason='the fit mode needs an input table')
    if sweep and not any(conf.sweep[axis] for axis in SWEEP_AXES):
        raise exceptions.ConfigValidationError(
            key='sweep', reason='empty grid')


def dtwa_point(conf, spec, polarization, seed):
    """One DTWA run and its squeezing summary.

    :return: (ObservableSeries, summary dict)
    """
    d = conf.dtwa
    integrator = dtwa.IntegratorConfig.from_conf(d, spec)
    ensemble = dtwa.sample_initial(spec, polarization, d.trajectories,
                                   seed, d.z_constrained)
    recorders = [dtwa.RECORDERS[name]() for name in d.recorders]
    mode = conf.observables.conditional_mode
    if mode == 'z-constrained' and not d.z_constrained:
        mode = 'z-binned'
    series = dtwa.evolve(ensemble, spec, integrator, recorders=recorders,
                         workers=conf.workers, chunk_size=d.chunk_size,
                         abort_fraction=d.abort_fraction,
                         conditional_mode=mode,
                         min_bin_population=(
                             conf.observables.min_bin_population),
                         floor=conf.observables.depolarization_floor)
    start = conf.observables.plateau_start
    t_therm = conf.fit.t_therm
    if t_therm is None:
        t_therm = observables.thermalization_time(series.times,
                                                  series.m_xy, start)
    summary = {'n': spec.n, 't_therm': t_therm,
               'm_xy_plateau': observables.plateau(series.times,
                                                   series.m_xy, start)}
    try:
        best = fit.squeezing_optimum(series.times, series.xi2, t_therm,
                                     conf.fit.window, series.err_xi2)
        summary.update(xi2_opt=best.xi2, err_xi2=best.err, t_opt=best.t,
                       flags=';'.join(best.flags))
    except ValueError as e:
        LOG.warning('No squeezing optimum for N=%d: %s', spec.n, e)
        summary.update(xi2_opt=np.nan, err_xi2=np.nan, t_opt=np.nan,
                       flags='no-optimum')
    return series, summary


def _series_metadata(spec, polarization, seed, series):
    return {'lattice': spec.to_dict(), 'polarization': polarization,
            'seed': seed, 'seed_rule': utils.SEED_RULE,
            'trajectories': series.n_traj,
            'conditional_mode': series.conditional_mode,
            'dropped_bins': series.dropped_bins,
            'aborted': [] if series.aborted is None
            else series.aborted.tolist()}


def _write_series(run, name, spec, polarization, seed, series):
    run.table(name, observables.SERIES_COLUMNS, series.rows(),
              _series_metadata(spec, polarization, seed, series))
    if 'energy' in series.extras:
        energy = series.extras['energy']
        drift = np.abs(energy - energy[:, :1]).max(axis=0)
        run.table(name + '_energy', ('t', 'mean_energy', 'max_drift'),
                  zip(series.times, energy.mean(axis=0), drift))
    if 'spin_length' in series.extras:
        run.table(name + '_spin_length', ('t', 'max_deviation'),
                  zip(series.times,
                      series.extras['spin_length'].max(axis=0)))


def run_dtwa(run):
    conf = run.conf
    spec = model.LatticeSpec.from_conf(conf.lattice)
    polarization = conf.dtwa.polarization
    run.manifest.seeds['trajectories'] = conf.seed
    with run.manifest.stage('dtwa'):
        series, summary = dtwa_point(conf, spec, polarization, conf.seed)
    _write_series(run, 'series', spec, polarization, conf.seed, series)
    run.json('summary.json', summary)


def run_oat(run):
    conf = run.conf
    params = oat.SemiclassicalParams.from_conf(conf.oat)
    times = np.geomspace(1.0 / params.chi,
                         np.sqrt(params.n) / params.chi, conf.oat.points)
    run.table('oat', ('t', 'xi2_exact', 'xi2_approx', 'var_y_given_z'),
              zip(times, oat.xi2_exact(params, times),
                  oat.xi2_approx(params, times),
                  params.conditional_variance(times)),
              {'n': params.n, 'm_xy': params.m_xy, 'chi': params.chi,
               'v0': params.v0, 'c': params.c, 'gamma': params.gamma})
    if conf.oat.scaling_sizes:
        with run.manifest.stage('oat_scaling'):
            table, fitted = oat.optimum_scaling(params,
                                                conf.oat.scaling_sizes)
        predicted = oat.scaling_exponents(params.gamma)
        run.table('oat_scaling', ('n', 'xi2_opt', 't_opt', 'at_boundary'),
                  [(n, o.xi2, o.t, o.at_boundary) for n, o in table],
                  {'fitted_xi2': fitted.xi2, 'fitted_xi': fitted.xi,
                   'fitted_time': fitted.time,
                   'predicted_xi2': predicted.xi2,
                   'predicted_xi': predicted.xi,
                   'predicted_time': predicted.time})


def energy_model(conf):
    s = conf.spinwave
    if s.energy_table:
        return spinwave.EnergyDensityTable.from_file(s.energy_table)
    return spinwave.ExactEnergyDensity(sizes=tuple(s.estimator_sizes),
                                       d=conf.lattice.d)


def run_spinwave(run):
    conf = run.conf
    s = conf.spinwave
    with run.manifest.stage('spinwave'):
        rows = spinwave.boundary_table(s.alphas, conf.lattice.d, s.spin,
                                       energy_model(conf),
                                       solve=s.solve_boundary)
    run.table('spinwave', ('alpha', 'd', 'spin', 'j_z', 'eta0', 't_c',
                           't_0', 'energy', 'j_c'),
              [(r.alpha, r.d, r.spin, r.j_z, r.eta0, r.t_c, r.t_0,
                r.energy, np.nan if r.j_c is None else r.j_c)
               for r in rows],
              {'energy_model': s.energy_table or 'exact'})


def run_quantum(run):
    conf = run.conf
    q = conf.quantum
    cfg_echo = echo.EchoConfig.from_conf(conf)
    hamiltonian = cfg_echo.hamiltonian()
    chi = q.chi
    if chi is None:
        with run.manifest.stage('extract_chi'):
            extraction = echo.extract_chi(
                q.n, m_range=q.m_max,
                times=np.linspace(0.0, q.chi_t_max, q.chi_points),
                hamiltonian=hamiltonian, dim=q.krylov_dim,
                tol=q.krylov_tol, workers=conf.workers)
        run.table('delta_e', ('m', 'two_m_plus_one', 'delta_e', 'fit_r2'),
                  extraction.rows(),
                  {'chi': extraction.chi, 'r2': extraction.r2,
                   'intercept': extraction.intercept,
                   'flags': list(extraction.flags)})
        chi = extraction.chi
    cfg_echo.chi = chi
    with run.manifest.stage('echo'):
        var_q = echo.var_q_conditional(cfg_echo, hamiltonian)
    times = cfg_echo.times
    window = max(2, int(round(len(times) * ECHO_FIT_FRACTION)))
    early = fitting.linear_fit(times[:window], var_q[:window])
    run.table('echo', ('t', 'var_q'), zip(times, var_q),
              {'n': q.n, 'chi': chi, 'early_slope': early.slope,
               'early_r2': early.r2, 'lattice': cfg_echo.lattice().to_dict()})
    with run.manifest.stage('exact_series'):
        moments = echo.evolve_css(hamiltonian, times, q.krylov_dim,
                                  q.krylov_tol, conf.workers)
    xi2 = np.atleast_1d(observables.squeezing(moments))
    run.table('quantum_series',
              ('t', 'mean_x', 'var_y', 'var_z', 'cov_zy', 'xi2'),
              zip(times, moments.mean_x, moments.var_y, moments.var_z,
                  moments.cov_zy, xi2), {'n': q.n})


def run_hydro(run):
    conf = run.conf
    params = hydro.HydroParams.from_conf(conf)
    run.manifest.seeds['realizations'] = params.seed
    with run.manifest.stage('zero_mode'):
        walk = hydro.zero_mode_variance(params,
                                        resamples=conf.hydro.bootstrap,
                                        workers=conf.workers)
    m_xy = conf.hydro.m_xy
    run.table('zero_mode', ('t', 'var_phi', 'mean_phi', 'var_y_given_z'),
              zip(walk.times, walk.variance, walk.mean,
                  hydro.conditional_to_y_variance(walk.variance, m_xy,
                                                  params.n)),
              {'slope': walk.slope, 'slope_err': walk.slope_err,
               'r2': walk.r2, 'expected_slope': walk.expected,
               'n': params.n})
    with run.manifest.stage('modes'):
        modes = hydro.HydroModes.from_params(params)
        trajectory = hydro.integrate_modes(params, record=[0],
                                           workers=conf.workers)
    phi_w, m_w = hydro.stationary_widths(params, modes)
    late = trajectory.times >= (conf.observables.plateau_start *
                                trajectory.times[-1])
    run.table('spectrum', ('mode', 'k', 'stiffness', 'omega', 'decay',
                           'phi_power', 'm_power', 'gibbs_phi', 'gibbs_m'),
              zip(range(params.n), modes.k_norm, modes.stiffness,
                  modes.frequencies(params), modes.decay_rates(params),
                  trajectory.phi_power[late].mean(axis=0),
                  trajectory.m_power[late].mean(axis=0), phi_w, m_w),
              {'conserved_noise': params.conserved_noise,
               'initial': params.initial})


def run_fit(run, path=None):
    conf = run.conf
    path = path or conf.fit.input
    _, rows = artifacts.read_table(path)
    rows = [r for r in rows if np.isfinite(r['xi2_opt'])]
    result = fit.ScalingFit.from_sweep(rows, conf.fit.control)
    values, curve = result.curve
    run.table('nu', ('control', 'nu', 'sigma', 'r2', 'sizes'),
              result.rows(), {'control': conf.fit.control, 'input': path})
    if len(values) >= fit.MIN_CONTROL_POINTS:
        jc = fit.locate_jc(values, curve, conf.lattice.d,
                           grid=conf.fit.ramp_grid)
        result.jc = jc
        run.json('critical_point.json', dataclasses.asdict(jc))
    else:
        LOG.info('Only %d control values, skipping the critical point',
                 len(values))
    return result


PIPELINES = {
    'dtwa': run_dtwa,
    'oat': run_oat,
    'spinwave': run_spinwave,
    'quantum': run_quantum,
    'hydro': run_hydro,
    'fit': run_fit,
}


def run(conf, directory, config_file=None):
    """Execute the configured pipeline and write its artifacts.

    :return: path of the run manifest
    """
    validate(conf, config_file)
    current = Run(conf, directory)
    current.json(artifacts.RESOLVED_CONFIG, config.resolved(conf))
    LOG.info('Starting %s run into %s', conf.mode, directory)
    PIPELINES[conf.mode](current)
    LOG.info('Finished %s run', conf.mode)
    return current.finish()


def grid(conf):
    """Cartesian product of the declared sweep axes, in axis order."""
    axes = [(axis, list(conf.sweep[axis])) for axis in SWEEP_AXES
            if conf.sweep[axis]]
    names = [a for a, _ in axes]
    return [dict(zip(names, values))
            for values in itertools.product(*[v for _, v in axes])]


def sweep(conf, directory, config_file=None):
    """Independent DTWA runs over the sweep grid plus an aggregate table.

    Point i runs with seed derive_seed(master, i).

    :raises SweepFailure: after writing every successful point
    """
    validate(conf, config_file, sweep=True)
    current = Run(conf, directory)
    current.json(artifacts.RESOLVED_CONFIG, config.resolved(conf))
    base = model.LatticeSpec.from_conf(conf.lattice)
    points = grid(conf)
    LOG.info('Sweeping %d points', len(points))
    rows, failures = [], []
    for index, point in enumerate(points):
        seed = utils.derive_seed(conf.seed, index)
        current.manifest.seeds['point-%04d' % index] = seed
        polarization = point.get('polarization', conf.dtwa.polarization)
        lattice = {k: v for k, v in point.items() if k != 'polarization'}
        try:
            spec = base.replace(**lattice)
            with current.manifest.stage('point-%04d' % index):
                series, summary = dtwa_point(conf, spec, polarization,
                                             seed)
        except (lib_exc.TempestException, ValueError) as e:
            LOG.warning('Sweep point %d %s failed: %s', index, point, e)
            failures.append({'index': index, 'point': point,
                             'error': str(e)})
            continue
        LOG.info('Sweep point %d/%d %s: xi2_opt=%.4g', index + 1,
                 len(points), point, summary['xi2_opt'])
        _write_series(current, 'point-%04d' % index, spec, polarization,
                      seed, series)
        rows.append((index, spec.j_z, spec.alpha, spec.L, polarization,
                     spec.n, seed, summary['xi2_opt'], summary['err_xi2'],
                     summary['t_opt'], summary['t_therm'],
                     summary['m_xy_plateau'], summary['flags']))
    current.table('aggregate', AGGREGATE_COLUMNS, rows,
                  {'axes': [a for a in SWEEP_AXES if conf.sweep[a]],
                   'points': len(points)})
    current.manifest.failures = failures
    path = current.finish()
    if failures:
        raise exceptions.SweepFailure(
            failed=len(failures), total=len(points),
            points=[f['index'] for f in failures])
    return path


def fit_table(conf, directory, path):
    """Fit nu and the critical point from an aggregate table."""
    current = Run(conf, directory)
    current.json(artifacts.RESOLVED_CONFIG, config.resolved(conf))
    with current.manifest.stage('fit'):
        run_fit(current, path)
    return current.finish()
