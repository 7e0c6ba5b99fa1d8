import logging
import sys
from typing import Any, Callable, Dict, List, Optional

import click
from pydantic import ValidationError

from config.experiment_config import ExperimentConfig, resolve_experiment_config
from config.settings import get_config
from experiments.runner import (
    ExperimentResult,
    run_figure1,
    run_simulate,
    run_table1,
    sweep_explore_lens,
)
from models.distributions import TwoPointSpec, parse_niche_spec
from policies.registry import parse_policy_spec
from tools.output_tools import emit_outputs
from utils.logging_utils import APP_NAME, get_logger, setup_logging

logger = get_logger(APP_NAME)
_logging = get_config("logging")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_FLAGGED = 3


def run_table1_command(config: ExperimentConfig) -> ExperimentResult:
    return run_table1(config.v_pop, config.deltas)


def run_figure1_command(config: ExperimentConfig) -> ExperimentResult:
    return run_figure1(config.v_pop, config.delta)


def run_figure34_command(config: ExperimentConfig) -> ExperimentResult:
    return sweep_explore_lens(
        config.v_pop,
        config.deltas,
        config.xis,
        config.resolved_explore_lens,
        config.episodes,
        config.master_seed,
        mode=config.mode,
        n_jobs=config.n_jobs,
        ci_threshold=config.ci_threshold,
        quiet=config.quiet,
    )


def run_simulate_command(config: ExperimentConfig) -> ExperimentResult:
    niche = parse_niche_spec(config.niche) if config.niche else TwoPointSpec(p=config.p)
    return run_simulate(
        config.v_pop,
        config.delta,
        niche,
        parse_policy_spec(config.policy),
        config.episodes,
        config.master_seed,
        mode=config.mode,
        n_jobs=config.n_jobs,
        ci_threshold=config.ci_threshold,
    )


RUNNERS: Dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "table1": run_table1_command,
    "figure1": run_figure1_command,
    "figure34": run_figure34_command,
    "simulate": run_simulate_command,
}


def execute(command: str, flags: Dict[str, Any]) -> int:
    """
    Resolve the configuration, run one command and write its outputs.

    Args:
        command: Command name
        flags: Raw option values from click; None means not given

    Returns:
        Exit code 0, or 3 when the run carries warnings
    """
    config_path = flags.pop("config", None)
    config = resolve_experiment_config(command, flags, config_path)

    setup_logging(
        console_level=logging.WARNING if config.quiet else _logging["console_level"],
        log_dir=config.log_dir,
        enable_json=_logging["enable_json"],
        context={"command": command, "master_seed": config.master_seed},
    )
    logger.info(f"Running {command}")

    result = RUNNERS[command](config)
    emit_outputs(result, config)
    if result.warnings:
        logger.warning(f"{command} finished with {result.warnings} warning(s)")
        return EXIT_FLAGGED
    return EXIT_OK


def output_options(func):
    """Options shared by every command."""
    options = [
        click.option("--config", "config", type=str, default=None, help="key=value config file"),
        click.option("--out", type=str, default=None, help="Output file path"),
        click.option("--format", "format", type=click.Choice(["csv", "json"]), default=None, help="Output format"),
        click.option("--svg", is_flag=True, default=None, help="Also write an SVG chart"),
        click.option("--quiet", is_flag=True, default=None, help="Only log warnings and errors"),
        click.option("--log-dir", type=str, default=None, help="Directory for log files"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def simulation_options(func):
    """Options of the Monte Carlo commands."""
    options = [
        click.option("--episodes", type=int, default=None, help="Simulated users per cell"),
        click.option("--seed", type=int, default=None, help="Master seed"),
        click.option("--mode", type=click.Choice(["pathwise", "conditional"]), default=None, help="Payoff booking"),
        click.option("--jobs", type=int, default=None, help="Worker processes"),
        click.option("--ci-threshold", type=float, default=None, help="Half-width that marks a row"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
def cli():
    """Engagement vs. utility misalignment of recommendation policies."""


@cli.command()
@click.option("--vp", type=float, default=None, help="Popular base utility")
@click.option("--deltas", type=str, default=None, help="Comma-separated discount factors")
@output_options
def table1(**flags):
    """Engagement loss and utility gain of PEAR over APP."""
    return execute("table1", flags)


@cli.command()
@click.option("--vp", type=float, default=None, help="Popular base utility")
@click.option("--delta", type=float, default=None, help="Discount factor")
@output_options
def figure1(**flags):
    """Per-period engagement and utility of APP and PEAR."""
    return execute("figure1", flags)


@cli.command()
@click.option("--vp", type=float, default=None, help="Popular base utility")
@click.option("--delta", type=float, default=None, help="Single discount factor")
@click.option("--deltas", type=str, default=None, help="Comma-separated discount factors")
@click.option("--xi", "--xis", "xis", type=str, default=None, help="Comma-separated GPD shapes")
@click.option("--explore-len", type=str, default=None, help="DICE exploration length(s), comma-separated")
@click.option("--sweep", is_flag=True, default=None, help="Sweep the default exploration lengths")
@simulation_options
@output_options
def figure34(**flags):
    """DICE-to-APP ratios under the GPD niche family."""
    return execute("figure34", flags)


@cli.command()
@click.option("--vp", type=float, default=None, help="Popular base utility")
@click.option("--delta", type=float, default=None, help="Discount factor")
@click.option("--p", type=float, default=None, help="Two-point prior when --niche is not given")
@click.option("--policy", type=str, default=None, help="app, oracle, pear[:p] or dice:<T>")
@click.option("--niche", type=str, default=None, help="two-point:<p> or gpd:<xi>")
@simulation_options
@output_options
def simulate(**flags):
    """Monte Carlo estimate of one policy."""
    return execute("simulate", flags)


def run_cli(args: Optional[List[str]] = None) -> int:
    """
    Run the command line and map failures to exit codes.

    Args:
        args: Arguments without the program name; sys.argv[1:] when None

    Returns:
        0 success, 1 invalid arguments, 2 I/O failure, 3 warnings present
    """
    try:
        code = cli.main(args=args, prog_name="main.py", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_INVALID
    except click.Abort:
        click.echo("Aborted", err=True)
        return EXIT_INVALID
    except ValidationError as e:
        click.echo(f"Invalid configuration: {e}", err=True)
        return EXIT_INVALID
    except OSError as e:
        click.echo(f"I/O failure: {e}", err=True)
        return EXIT_IO
    except ValueError as e:
        click.echo(f"Invalid parameter: {e}", err=True)
        return EXIT_INVALID
    return EXIT_OK if code is None else int(code)


if __name__ == "__main__":
    sys.exit(run_cli())
