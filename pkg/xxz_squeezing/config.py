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

from oslo_config import cfg
from oslo_config import types


MODES = ('dtwa', 'oat', 'spinwave', 'quantum', 'hydro', 'fit')

default_opts = [
    cfg.StrOpt(
        'mode',
        default='dtwa',
        choices=MODES,
        help='Pipeline executed by the run verb.'),
    cfg.IntOpt(
        'seed',
        default=20240501,
        min=0,
        max=2 ** 64 - 1,
        help='64-bit master seed. Trajectory and sweep-point streams are '
             'derived from it with a counter-based splitting rule.'),
    cfg.IntOpt(
        'workers',
        default=1,
        min=1,
        help='Size of the worker pool. Results do not depend on it.'),
    cfg.StrOpt(
        'output_dir',
        default='xxz-output',
        help='Directory receiving the resolved config, data files and the '
             'run manifest. The XXZ_SQUEEZING_OUTPUT_DIR environment '
             'variable overrides it.'),
    cfg.StrOpt(
        'output_format',
        default='csv',
        choices=['csv', 'jsonl'],
        help="Data file format. 'jsonl' writes a line-delimited JSON mirror "
             "next to the CSV file."),
]

lattice_group = cfg.OptGroup(
    name='lattice',
    title='Lattice geometry and XXZ couplings')

lattice_opts = [
    cfg.IntOpt(
        'd',
        default=1,
        choices=[1, 2, 3],
        help='Lattice dimension.'),
    cfg.IntOpt(
        'L',
        default=64,
        min=2,
        help='Sites per axis. The lattice holds L**d sites.'),
    cfg.FloatOpt(
        'alpha',
        default=1.5,
        help='Power-law interaction exponent. Unused for nearest-neighbor '
             'interactions.'),
    cfg.FloatOpt(
        'j_perp',
        default=1.0,
        help='Transverse coupling J_perp, in energy units.'),
    cfg.FloatOpt(
        'j_z',
        default=0.0,
        help='Longitudinal coupling J_z, in energy units.'),
    cfg.StrOpt(
        'interaction',
        default='power-law',
        choices=['power-law', 'nearest-neighbor'],
        help='Pair weight rule.'),
    cfg.StrOpt(
        'boundary',
        default='periodic',
        choices=['periodic'],
        help='Boundary rule. Distances use the minimum-image convention.'),
]

dtwa_group = cfg.OptGroup(
    name='dtwa',
    title='Discrete truncated Wigner engine options')

dtwa_opts = [
    cfg.IntOpt(
        'trajectories',
        default=1000,
        min=1,
        help='Number of sampled trajectories.'),
    cfg.FloatOpt(
        'polarization',
        default=1.0,
        min=0.0,
        max=1.0,
        help='Initial polarization p. Each spin points along +x with '
             'probability (1+p)/2.'),
    cfg.BoolOpt(
        'z_constrained',
        default=False,
        help='Sample a perfectly balanced Z=0 ensemble.'),
    cfg.FloatOpt(
        'dt',
        help='Integrator time step. Defaults to a step scaled to the local '
             'field strength of the lattice.'),
    cfg.FloatOpt(
        't_max',
        default=10.0,
        help='Final time.'),
    cfg.IntOpt(
        'stride',
        default=10,
        min=1,
        help='Number of integrator steps between recorded outputs.'),
    cfg.IntOpt(
        'chunk_size',
        default=16,
        min=1,
        help='Trajectories per work unit. Fixed independently of the worker '
             'count so that results are reproducible.'),
    cfg.FloatOpt(
        'abort_fraction',
        default=1e-3,
        help='Largest tolerated fraction of diverged trajectories.'),
    cfg.ListOpt(
        'recorders',
        default=[],
        item_type=types.String(choices=['energy', 'spin_length']),
        help='Extra per-trajectory recorders besides the collective spin.'),
]

observables_group = cfg.OptGroup(
    name='observables',
    title='Observable post-processing options')

observables_opts = [
    cfg.StrOpt(
        'conditional_mode',
        default='z-constrained',
        choices=['z-binned', 'z-constrained'],
        help='Conditional variance estimator. z-binned needs an '
             'unconstrained ensemble, z-constrained needs the Z=0 one.'),
    cfg.IntOpt(
        'min_bin_population',
        default=10,
        min=1,
        help='Z bins with fewer trajectories are dropped.'),
    cfg.FloatOpt(
        'plateau_start',
        default=2.0 / 3.0,
        min=0.0,
        max=1.0,
        help='Start of the late-time window used for the m_xy plateau, as a '
             'fraction of the run.'),
    cfg.FloatOpt(
        'depolarization_floor',
        default=1e-12,
        help='Relative floor on <X>**2 / N**2 below which xi2 is reported '
             'as depolarized.'),
]

oat_group = cfg.OptGroup(
    name='oat',
    title='Semiclassical one-axis twisting analytics')

oat_opts = [
    cfg.IntOpt('n', default=1024, min=2, help='Number of spins.'),
    cfg.FloatOpt('m_xy', default=0.5, help='XY order parameter.'),
    cfg.FloatOpt('chi', default=1.0, help='Effective twisting strength.'),
    cfg.FloatOpt(
        'v0',
        help='Conditional variance at t=0. Defaults to N/4.'),
    cfg.FloatOpt(
        'c',
        default=0.0,
        min=0.0,
        help='Prefactor of the N (chi t)**gamma conditional variance growth.'),
    cfg.FloatOpt(
        'gamma',
        default=0.0,
        min=0.0,
        help='Conditional variance growth exponent, below 2.'),
    cfg.IntOpt(
        'points',
        default=200,
        min=2,
        help='Number of log-spaced times between 1/chi and sqrt(N)/chi.'),
    cfg.ListOpt(
        'scaling_sizes',
        default=[],
        item_type=types.Integer(min=2),
        help='System sizes for the optimum scaling table.'),
]

spinwave_group = cfg.OptGroup(
    name='spinwave',
    title='Spin-wave phase boundary options')

spinwave_opts = [
    cfg.FloatOpt('spin', default=0.5, help='Spin magnitude S.'),
    cfg.ListOpt(
        'alphas',
        default=['1.05', '1.25', '1.5', '1.75', '1.95'],
        item_type=types.Float(),
        help='Interaction exponents tabulated by the spinwave pipeline.'),
    cfg.StrOpt(
        'energy_table',
        help='YAML table of CSS excitation energy densities, a list of '
             '{alpha, j_z, energy} records. Without it the small-N exact '
             'estimator is used.'),
    cfg.ListOpt(
        'estimator_sizes',
        default=['8', '10', '12', '14'],
        item_type=types.Integer(min=4),
        help='Even chain lengths used by the exact energy estimator.'),
    cfg.BoolOpt(
        'solve_boundary',
        default=True,
        help='Solve T_0 = T_c for J_c at every alpha.'),
]

quantum_group = cfg.OptGroup(
    name='quantum',
    title='Exact small-N quantum dynamics options')

quantum_opts = [
    cfg.IntOpt('n', default=14, min=2, max=20, help='Chain length.'),
    cfg.FloatOpt(
        'chi',
        help='Echo twisting strength. Extracted from sector splittings when '
             'unset.'),
    cfg.FloatOpt('t_max', default=2.0, help='Final time.'),
    cfg.IntOpt('points', default=41, min=2, help='Number of output times.'),
    cfg.IntOpt('krylov_dim', default=30, min=4, help='Krylov dimension.'),
    cfg.FloatOpt(
        'krylov_tol',
        default=1e-10,
        help='Local error tolerance per Krylov step.'),
    cfg.IntOpt(
        'm_max',
        default=2,
        min=0,
        help='Sectors -m_max-1 .. m_max are paired for chi extraction.'),
    cfg.FloatOpt(
        'chi_t_max',
        default=40.0,
        help='Final time of the chi extraction grid.'),
    cfg.IntOpt(
        'chi_points',
        default=400,
        min=16,
        help='Number of points of the chi extraction grid.'),
]

hydro_group = cfg.OptGroup(
    name='hydro',
    title='Stochastic hydrodynamics options')

hydro_opts = [
    cfg.FloatOpt('g', default=1.0, help='Precession coupling.'),
    cfg.FloatOpt('chi', default=1.0, help='Inverse susceptibility.'),
    cfg.FloatOpt('damping', default=0.5, help='Phase damping Gamma.'),
    cfg.FloatOpt('transport', default=0.5,
                 help='Magnetization transport Lambda.'),
    cfg.FloatOpt('temperature', default=1.0, min=0.0, help='Temperature.'),
    cfg.StrOpt(
        'stiffness',
        default='power',
        choices=['power', 'lattice'],
        help="'power' uses K_k = k_tilde |k|**(alpha-d), 'lattice' uses the "
             "exact lattice sum J_perp m_xy**2 omega(k)."),
    cfg.FloatOpt('k_tilde', default=1.0, help='Stiffness prefactor.'),
    cfg.FloatOpt('m_xy', default=0.5,
                 help='Order parameter used by the lattice stiffness.'),
    cfg.FloatOpt('z', default=0.0, help='Conserved collective Z.'),
    cfg.FloatOpt('dt', default=1e-3, help='Euler-Maruyama time step.'),
    cfg.FloatOpt('t_max', default=10.0, help='Final time.'),
    cfg.IntOpt('stride', default=100, min=1,
               help='Steps between recorded outputs.'),
    cfg.IntOpt('realizations', default=1000, min=1,
               help='Number of noise realizations.'),
    cfg.StrOpt('initial', default='zero', choices=['zero', 'thermal'],
               help='Initial mode distribution.'),
    cfg.BoolOpt(
        'conserved_noise',
        default=True,
        help='Use conserved-current magnetization noise, variance '
             'proportional to k**2. When false the noise enters inside the '
             'k**2 bracket, variance proportional to k**4.'),
    cfg.IntOpt('bootstrap', default=200, min=10,
               help='Bootstrap resamples for the slope error.'),
]

fit_group = cfg.OptGroup(
    name='fit',
    title='Squeezing optimum and scaling fits')

fit_opts = [
    cfg.StrOpt(
        'input',
        help='Aggregate sweep table consumed by the fit verb and mode.'),
    cfg.IntOpt(
        'window',
        default=7,
        min=5,
        help='Savitzky-Golay window, odd.'),
    cfg.FloatOpt(
        't_therm',
        help='Thermalization time. Defaults to the first time m_xy comes '
             'within 5% of its plateau.'),
    cfg.StrOpt(
        'control',
        default='j_z',
        choices=['j_z', 'polarization', 'alpha'],
        help='Control parameter of the nu curve.'),
    cfg.IntOpt(
        'ramp_grid',
        default=201,
        min=11,
        help='Grid points per axis of the ramp endpoint search.'),
]

sweep_group = cfg.OptGroup(
    name='sweep',
    title='Sweep grid axes')

sweep_opts = [
    cfg.ListOpt('j_z', default=[], item_type=types.Float(),
                help='J_z values.'),
    cfg.ListOpt('alpha', default=[], item_type=types.Float(),
                help='Interaction exponents.'),
    cfg.ListOpt('L', default=[], item_type=types.Integer(min=2),
                help='Linear sizes.'),
    cfg.ListOpt('polarization', default=[], item_type=types.Float(),
                help='Initial polarizations.'),
]

GROUPS = [
    (lattice_group, lattice_opts),
    (dtwa_group, dtwa_opts),
    (observables_group, observables_opts),
    (oat_group, oat_opts),
    (spinwave_group, spinwave_opts),
    (quantum_group, quantum_opts),
    (hydro_group, hydro_opts),
    (fit_group, fit_opts),
    (sweep_group, sweep_opts),
]


def register_opts(conf):
    conf.register_opts(default_opts)
    for group, opts in GROUPS:
        conf.register_group(group)
        conf.register_opts(opts, group=group)


def list_opts():
    return [(None, default_opts)] + [(g, o) for g, o in GROUPS]


def new_conf(config_file=None):
    """Build a ConfigOpts holding every run option.

    :param config_file: optional INI file with one section per group
    :return: the parsed ConfigOpts
    """
    conf = cfg.ConfigOpts()
    register_opts(conf)
    files = [config_file] if config_file else []
    conf(args=[], project='xxz-squeezing', default_config_files=files)
    return conf


def resolved(conf):
    """Flatten a ConfigOpts into a plain dict for provenance records."""
    record = {name: conf[name] for name in sorted(o.dest for o in default_opts)}
    for group, opts in GROUPS:
        section = conf[group.name]
        record[group.name] = {o.dest: section[o.dest] for o in opts}
    return record
