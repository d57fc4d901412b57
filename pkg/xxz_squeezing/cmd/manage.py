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


"""Command line front end: run, sweep, fit and validate-config."""

import sys

from oslo_config import cfg
from oslo_log import log as logging

from xxz_squeezing import config
from xxz_squeezing import exceptions
from xxz_squeezing import runner
from xxz_squeezing import version

LOG = logging.getLogger(__name__)

PROJECT = 'xxz-squeezing'

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_PARTIAL = 3


def _common_args(parser, needs_config=True):
    parser.add_argument('--config', required=needs_config,
                        help='INI run configuration.')
    parser.add_argument('--seed', type=int,
                        help='64-bit master seed, overrides the file.')
    parser.add_argument('--workers', type=int,
                        help='Worker pool size, overrides the file.')
    parser.add_argument('--out', help='Output directory.')
    parser.add_argument('--format', choices=['csv', 'jsonl'],
                        help='Data file format.')


def add_command_parsers(subparsers):
    parser = subparsers.add_parser('run', help='Run the configured mode.')
    _common_args(parser)
    parser.set_defaults(action=do_run)

    parser = subparsers.add_parser('sweep',
                                   help='Run DTWA over the sweep grid.')
    _common_args(parser)
    parser.set_defaults(action=do_sweep)

    parser = subparsers.add_parser(
        'fit', help='Fit nu and J_c from an aggregate sweep table.')
    _common_args(parser, needs_config=False)
    parser.add_argument('--input', help='Aggregate table, overrides '
                                        '[fit] input.')
    parser.set_defaults(action=do_fit)

    parser = subparsers.add_parser('validate-config',
                                   help='Check a configuration file.')
    _common_args(parser)
    parser.set_defaults(action=do_validate)


command_opt = cfg.SubCommandOpt('command',
                                title='Commands',
                                help='Available commands',
                                handler=add_command_parsers)


def load(args):
    """Run configuration with the command line overrides applied."""
    try:
        conf = config.new_conf(args.config)
    except (cfg.ConfigFileParseError, cfg.ConfigFilesNotFoundError) as e:
        raise exceptions.ConfigValidationError(key='--config',
                                               reason=str(e))
    for name, value in (('seed', args.seed), ('workers', args.workers),
                        ('output_format', args.format)):
        if value is not None:
            conf.set_override(name, value)
    return conf


def do_run(args):
    conf = load(args)
    runner.run(conf, runner.output_dir(conf, args.out), args.config)


def do_sweep(args):
    conf = load(args)
    runner.sweep(conf, runner.output_dir(conf, args.out), args.config)


def do_fit(args):
    conf = load(args)
    conf.set_override('mode', 'fit')
    if args.input:
        conf.set_override('input', args.input, group='fit')
    runner.validate(conf, args.config)
    runner.fit_table(conf, runner.output_dir(conf, args.out),
                     conf.fit.input)


def do_validate(args):
    conf = load(args)
    has_grid = any(conf.sweep[axis] for axis in runner.SWEEP_AXES)
    runner.validate(conf, args.config, sweep=has_grid)
    print('%s: valid %s configuration' % (args.config, conf.mode))


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    conf = cfg.ConfigOpts()
    logging.register_options(conf)
    conf.register_cli_opt(command_opt)
    conf(argv, project=PROJECT,
         version=version.version_info.version_string())
    logging.setup(conf, PROJECT)
    args = conf.command
    try:
        args.action(args)
    except exceptions.ConfigValidationError as e:
        LOG.error('%s', e)
        return EXIT_INVALID
    except exceptions.SweepFailure as e:
        LOG.error('%s', e)
        return EXIT_PARTIAL
    except Exception as e:
        LOG.exception('%s failed: %s', args.name, e)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
