#!/usr/bin/env python3
"""
Clique Memory - Command Line Front End
======================================

Batch experiments on the clique associative memory:

- stability  Fixed-point property of stored messages
- retrieval  One-step retrieval from corrupted inputs
- sweep      Stability over a grid of sizes and loads
- lemma3     Law of the connection count Y
- census     Outcomes of the dynamics from many starts
- theory     Efficiency and threshold table
- trace      One trajectory, step by step
- gen        Write a random message-set file

Exit status: 0 on success, 2 on configuration or usage errors, 1 on
runtime failures (an energy-monitor violation included).
"""
import logging
import os
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
import numpy as np
import pandas as pd
from click.core import ParameterSource

from config import settings
from config.run_config import (
    ConfigError,
    RunConfig,
    merge_config,
    parse_grid,
    parse_int_list,
    read_config_file,
)
from experiments.capacity_sweep import CapacitySweep, SweepRow, sweep_frame
from experiments.convergence_census import ConvergenceCensus, StartMode
from experiments.lemma3 import Lemma3Experiment
from experiments.reporting import write_csv, write_summary
from experiments.retrieval import RetrievalExperiment
from experiments.stability import StabilityExperiment, StabilityScope
from experiments.trials import default_workers
from src import theory
from src.dynamics import DynamicsMode, run
from src.message_io import read_messages, write_messages
from src.model import (
    STATE_DTYPE,
    BallSpec,
    ModelParams,
    corrupt,
    encode,
    sample_messages,
    trial_rng,
)
from src.network import build_binary, build_weights

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str) -> None:
    """File handler on LOG_FILE plus stderr, so CSV on stdout stays clean"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    try:
        settings.LOG_DIR.mkdir(parents=True, exist_ok=True)
        handlers.insert(0, logging.FileHandler(settings.LOG_FILE))
    except OSError:
        pass
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, handlers=handlers, force=True)


def _check_writable(path: Optional[str], what: str) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise click.UsageError(f"Cannot write {what} {path}: directory {parent} is missing or not writable")


def _flags(ctx: click.Context) -> Dict[str, Any]:
    """Parameters given explicitly on the command line"""
    return {
        name: value for name, value in ctx.params.items()
        if ctx.get_parameter_source(name) is ParameterSource.COMMANDLINE
    }


def _load(ctx: click.Context) -> RunConfig:
    """Merge defaults < config file < flags for the invoked subcommand"""
    state = ctx.obj
    flags = {**state['flags'], **_flags(ctx)}
    try:
        config = merge_config(ctx.info_name, state['file_values'], flags)
        config.instance_params()
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    if config.workers is None:
        config.workers = default_workers()
    _check_writable(config.output, 'output file')
    _check_writable(summary_path(config), 'summary file')
    return config


def _build(factory: Callable[[], Any]) -> Any:
    """Construct an experiment, reporting parameter errors as usage errors"""
    try:
        return factory()
    except (ConfigError, ValueError) as e:
        raise click.UsageError(str(e)) from None


def _require_success(result: Dict[str, Any]) -> Dict[str, Any]:
    if not result['success']:
        raise click.ClickException(f"{result['experiment']} failed: {result['error']}")
    return result


def summary_path(config: RunConfig) -> str:
    """--summary, else next to the output file, else <subcommand>.summary.json in the working directory"""
    if config.summary is not None:
        return config.summary
    if config.output is not None:
        return str(Path(config.output).with_suffix('.summary.json'))
    return f"{config.subcommand}.summary.json"


def _finish(config: RunConfig, table: Optional[pd.DataFrame], results: Dict[str, Any], started: float) -> None:
    """Single writer for the CSV table and the JSON summary"""
    if table is not None:
        write_csv(table, config.output)
    wall_time = time.perf_counter() - started if config.timing else None
    write_summary(summary_path(config), config.to_dict(), results, wall_time)


def run_options(command):
    """Output and seeding options, accepted before or after the subcommand name"""
    decorators = [
        click.option('--output', type=str, help='CSV output file (stdout when omitted)'),
        click.option('--summary', type=str, help='JSON summary file'),
        click.option('--seed', type=int, help=f'Master seed (default {settings.MASTER_SEED})'),
        click.option('--workers', type=int, help='Worker processes (default: available parallelism)'),
        click.option('--timing', is_flag=True, help='Record wall time in the summary'),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


def instance_options(command):
    """Options describing one instance"""
    command = run_options(command)
    decorators = [
        click.option('--l', 'l', type=int, help='Letters per block'),
        click.option('--c', 'c', type=int, help='Number of blocks (exclusive with --c-rule)'),
        click.option('--c-rule', type=str, help="'ln' for ceil(ln l), or an integer"),
        click.option('--alpha', type=float, help='Load M / l^2 (exclusive with --M)'),
        click.option('--M', 'M', type=int, help='Number of stored messages'),
        click.option('--kappa', type=str, help="Threshold coefficient, e.g. 0.5 or 5/6"),
        click.option('--kappa-rule', type=str, help="'max' (1 - 1/c) or 'gamma' (min(1 - gamma, 1 - 1/c))"),
        click.option('--gamma', type=str, help='Fraction of intact blocks for retrieval'),
        click.option('--trials', type=int, help='Monte Carlo trials'),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


@click.group()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='key=value config file')
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR']),
              default=settings.LOG_LEVEL, show_default=True)
@click.option('--output', type=str, help='CSV output file (stdout when omitted)')
@click.option('--summary', type=str, help='JSON summary file')
@click.option('--seed', type=int, help=f'Master seed (default {settings.MASTER_SEED})')
@click.option('--workers', type=int, help='Worker processes (default: available parallelism)')
@click.option('--timing', is_flag=True, help='Record wall time in the summary')
@click.version_option(settings.VERSION)
@click.pass_context
def cli(ctx: click.Context, config_path, log_level, output, summary, seed, workers, timing):
    """Clique associative memory simulator."""
    setup_logging(log_level)
    try:
        settings.validate_config()
    except ValueError as e:
        raise click.UsageError(str(e)) from None

    file_values = {}
    if config_path is not None:
        try:
            file_values = read_config_file(config_path)
        except ConfigError as e:
            raise click.UsageError(str(e)) from None

    global_flags = _flags(ctx)
    for name in ('config_path', 'log_level'):
        global_flags.pop(name, None)
    ctx.obj = {'file_values': file_values, 'flags': global_flags}


@cli.command()
@instance_options
@click.option('--scope', type=click.Choice([s.value for s in StabilityScope]))
@click.option('--dynamics', type=click.Choice(['parallel', 'sequential']))
@click.option('--enforce-regime/--no-enforce-regime', default=True)
@click.pass_context
def stability(ctx: click.Context, **_):
    """Violation rate of the fixed-point property of stored messages."""
    started = time.perf_counter()
    config = _load(ctx)
    params = config.instance_params()
    experiment = _build(lambda: StabilityExperiment(params, config.scope, config.dynamics, config.enforce_regime))

    result = _require_success(experiment.execute(config.trials, config.seed, config.workers))
    if not experiment.validate_output(result):
        raise click.ClickException("stability output failed validation")

    bound = {
        'single-unit': 'chernoff_bound',
        'single-message': 'union_bound_retrieval',
        'all-messages': 'union_bound_all_messages',
    }[config.scope]
    row = SweepRow.for_params(
        params, f'stability-violation-{config.scope}', result['violation'], config.seed,
        theory_value=result['theory'][bound],
    )
    _finish(config, sweep_frame([row]), result, started)


@cli.command()
@instance_options
@click.option('--r', 'r', type=int, help='Number of corrupted blocks')
@click.option('--multi-step/--single-step', default=False, help='Run T to termination')
@click.option('--adversarial', is_flag=True, help='Also measure half-and-half inputs')
@click.pass_context
def retrieval(ctx: click.Context, **_):
    """Exact retrieval rate from random corruptions of m^1."""
    started = time.perf_counter()
    config = _load(ctx)
    params = config.instance_params()
    experiment = _build(lambda: RetrievalExperiment(
        params, config.gamma, config.r, kappa_from_gamma=config.kappa is None and config.kappa_rule is None,
        multi_step=config.multi_step, step_cap=config.step_cap,
    ))

    result = _require_success(experiment.execute(config.trials, config.seed, config.workers,
                                                 include_adversarial=config.adversarial))
    rows = [SweepRow.for_params(experiment.params, 'retrieval-success', result['estimate'], config.seed,
                                theory_value=result['theory']['union_bound_retrieval'])]
    if result['adversarial'] is not None:
        rows.append(SweepRow.for_params(experiment.params, 'retrieval-success-adversarial',
                                        result['adversarial'], config.seed))
    _finish(config, sweep_frame(rows), result, started)


@cli.command()
@click.option('--l-list', type=str, help='Comma-separated block sizes')
@click.option('--alpha-grid', type=str, help='Loads: lo:hi:step or a,b,c')
@click.option('--c', 'c', type=int)
@click.option('--c-rule', type=str)
@click.option('--kappa', type=str)
@click.option('--kappa-rule', type=str)
@click.option('--gamma', type=str)
@click.option('--trials', type=int)
@run_options
@click.pass_context
def sweep(ctx: click.Context, **_):
    """Single-message stability over a grid of (l, alpha)."""
    started = time.perf_counter()
    config = _load(ctx)
    try:
        l_list = parse_int_list(config.l_list)
        alpha_grid = parse_grid(config.alpha_grid)
    except ConfigError as e:
        raise click.UsageError(str(e)) from None

    c_rule = config.c if config.c is not None else (config.c_rule or 'ln')
    kappa_rule = config.kappa if config.kappa is not None else (config.kappa_rule or 'max')
    stage = CapacitySweep(l_list, alpha_grid, c_rule, kappa_rule, config.gamma)

    result = _require_success(stage.execute(config.trials, config.seed, config.workers))
    if not stage.validate_output(result):
        raise click.ClickException("sweep output failed validation")
    table = result.pop('table')
    result['rows'] = [row.to_record() for row in result['rows']]
    _finish(config, table, result, started)


@cli.command()
@instance_options
@click.pass_context
def lemma3(ctx: click.Context, **_):
    """Empirical law of Y against its limit and finite-size laws."""
    started = time.perf_counter()
    config = _load(ctx)
    params = config.instance_params()
    experiment = _build(lambda: Lemma3Experiment(params))

    result = _require_success(experiment.execute(config.trials, config.seed, config.workers))
    if not experiment.validate_output(result):
        raise click.ClickException("lemma3 output failed validation")
    _finish(config, result['table'], result, started)


@cli.command()
@instance_options
@click.option('--start', type=click.Choice([s.value for s in StartMode]))
@click.option('--radius', type=int, help='Corruption radius for corrupted starts')
@click.option('--dynamics', type=click.Choice([m.value for m in DynamicsMode]))
@click.option('--step-cap', type=int)
@click.pass_context
def census(ctx: click.Context, **_):
    """Fixed points, 2-cycles and cap hits from many starts."""
    started = time.perf_counter()
    config = _load(ctx)
    params = config.instance_params()
    stage = _build(lambda: ConvergenceCensus(params, config.start, config.dynamics, config.radius, config.step_cap))

    result = _require_success(stage.execute(config.trials, config.seed, config.workers))
    if not stage.validate_output(result):
        raise click.ClickException("census output failed validation")

    table = pd.DataFrame([{
        'start': config.start,
        'dynamics': config.dynamics,
        'l': params.l,
        'c': params.c,
        'M': params.M,
        'kappa': float(params.kappa),
        'alpha': params.alpha,
        'trials': config.trials,
        **result['counts'],
        'mean_steps': result['mean_steps'],
    }])
    _finish(config, table, result, started)


@cli.command('theory')
@click.option('--alpha-grid', type=str, help='Loads: lo:hi:step or a,b,c')
@click.option('--c', 'c', type=int)
@click.option('--kappa', type=str)
@run_options
@click.pass_context
def theory_command(ctx: click.Context, **_):
    """Entropy, efficiency and threshold table over a load grid."""
    started = time.perf_counter()
    config = _load(ctx)
    try:
        alpha_grid = parse_grid(config.alpha_grid)
    except ConfigError as e:
        raise click.UsageError(str(e)) from None
    c = config.resolved_c()
    kappa = config.resolved_kappa(c)

    table = _build(lambda: theory.theory_table(alpha_grid, c, kappa))
    _finish(config, table, {'c': c, 'kappa': str(kappa), 'rows': len(table)}, started)


@cli.command()
@instance_options
@click.option('--messages', type=click.Path(exists=True, dir_okay=False), help='Message-set file')
@click.option('--start', type=click.Choice([s.value for s in StartMode]))
@click.option('--radius', type=int)
@click.option('--dynamics', type=click.Choice([m.value for m in DynamicsMode]))
@click.option('--step-cap', type=int)
@click.pass_context
def trace(ctx: click.Context, **_):
    """One trajectory: step, active count and energy per recorded state."""
    started = time.perf_counter()
    config = _load(ctx)
    rng = trial_rng(config.seed, 0)

    if config.messages is not None:
        try:
            msgs, l, c = read_messages(config.messages)
        except ValueError as e:
            raise click.UsageError(str(e)) from None
        params = _build(lambda: ModelParams(l=l, c=c, M=max(1, msgs.shape[0]), kappa=config.resolved_kappa(c)))
    else:
        params = config.instance_params()
        msgs = sample_messages(params, rng)

    start = StartMode(config.start)
    if start is StartMode.UNIFORM_RANDOM:
        state = rng.integers(0, 2, size=params.N, dtype=STATE_DTYPE)
    elif start is StartMode.ALL_ZERO or msgs.shape[0] == 0:
        state = np.zeros(params.N, dtype=STATE_DTYPE)
    elif start is StartMode.CORRUPTED:
        state = encode(_build(lambda: corrupt(BallSpec(msgs[0], config.radius), params, rng)), params)
    else:
        state = encode(msgs[0], params)

    mode = DynamicsMode(config.dynamics)
    matrix = build_binary(msgs, params) if mode is DynamicsMode.GB else build_weights(msgs, params)
    try:
        report = run(matrix, state, params, mode, step_cap=config.step_cap)
    except RuntimeError as e:
        raise click.ClickException(f"trace failed: {e}") from None

    energies = list(report.energy_trace)
    energies += [None] * (len(report.active_trace) - len(energies))
    table = pd.DataFrame({
        'step': range(len(report.active_trace)),
        'active_count': report.active_trace,
        'energy': pd.Series(energies, dtype='float64'),
    })
    _finish(config, table, report.to_dict(), started)


@cli.command()
@instance_options
@click.option('--distinct', is_flag=True, help='Draw pairwise different messages')
@click.pass_context
def gen(ctx: click.Context, **_):
    """Write a random message-set file (requires --output)."""
    started = time.perf_counter()
    config = _load(ctx)
    if config.output is None:
        raise click.UsageError("gen needs --output FILE")
    params = config.instance_params()
    msgs = _build(lambda: sample_messages(params, trial_rng(config.seed, 0), distinct=config.distinct))
    write_messages(config.output, msgs, params)
    _finish(config, None, {'messages': config.output, 'count': int(msgs.shape[0])}, started)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit status"""
    try:
        cli.main(args=argv, prog_name='clique-memory', standalone_mode=False)
        return 0
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return 2 if isinstance(e, click.UsageError) else 1
    except click.Abort:
        logger.info("Interrupted by user")
        return 1
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        return 1


if __name__ == '__main__':
    sys.exit(main())
