"""
Command-line interface for the fixed-time tracking simulator.

Main application entry point.

Exit codes: 0 ran and converged, 1 ran but did not converge,
2 invalid input or violated assumptions/gains.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import wraps
from typing import Any, Dict, List, Optional

# Load environment variables FIRST (before any imports that use them)
from dotenv import load_dotenv
load_dotenv()

from config import Config, ProjectConfig
from fxtrack import (
    ScenarioFileError,
    SimulationDivergedError,
    Tolerances,
    builtin_scenario,
    load_scenario,
    run_scenario,
    save_scenario,
    validate_scenario,
    validation_lines,
    write_outputs,
)
from fxtrack.report import report_lines

EXIT_CONVERGED = 0
EXIT_NOT_CONVERGED = 1
EXIT_INVALID = 2

logger = logging.getLogger("fxtrack.app")


def handle_errors(f):
    """Decorator mapping exceptions in command handlers to exit codes."""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ScenarioFileError as e:
            print(f"Error: {e}", file=sys.stderr)
            return EXIT_INVALID
        except ValueError as e:
            print(f"Error: {e}", file=sys.stderr)
            return EXIT_INVALID
        except SimulationDivergedError as e:
            logger.error(f'Simulation diverged in {f.__name__}: {str(e)}')
            return EXIT_NOT_CONVERGED
        except Exception as e:
            logger.exception(f'Error in {f.__name__}: {str(e)}')
            return EXIT_INVALID
    return decorated_function


def _settings(project_config: ProjectConfig) -> Dict[str, Any]:
    """Picklable bundle of project defaults for worker processes."""
    return {
        'defaults': project_config.scenario_defaults(),
        'tolerances': project_config.tolerances(),
        'precision': project_config.csv_precision(),
    }


def _execute(scenario, out_dir: str, settings: Dict[str, Any]) -> int:
    result = run_scenario(scenario, Tolerances(**settings['tolerances']))
    paths = write_outputs(result, out_dir, settings['precision'])
    print("\n".join(report_lines(result)))
    print(f"\n  Trajectory: {paths['csv']}")
    print(f"  Report:     {paths['report']}")
    return EXIT_CONVERGED if result.converged else EXIT_NOT_CONVERGED


# =============================================================================
# Commands
# =============================================================================

@handle_errors
def run_example(example_id: int, out_dir: str, settings: Dict[str, Any],
                dt: Optional[float] = None, seed: Optional[int] = None, export: bool = False) -> int:
    """
    Run a built-in example.

    Built-in examples always run; violated gain conditions are reported.
    """
    scenario = builtin_scenario(example_id, seed=settings['defaults']['seed'] if seed is None else seed, dt=dt)
    if export:
        path = save_scenario(scenario, os.path.join(out_dir, f"{scenario.name}.yaml"))
        print(f"  Scenario file: {path}")
    return _execute(scenario, out_dir, settings)


@handle_errors
def run_file(path: str, out_dir: str, settings: Dict[str, Any],
             dt: Optional[float] = None, seed: Optional[int] = None, force: bool = False) -> int:
    """Validate and run one scenario file; refuses violated conditions unless forced."""
    scenario = load_scenario(path, settings['defaults']).with_overrides(dt=dt, seed=seed)
    validation = validate_scenario(scenario)
    if not validation.is_valid:
        if not force:
            print("\n".join(validation_lines(scenario, validation)))
            print(f"\nRefusing to run {path}: " + "; ".join(validation.reasons()), file=sys.stderr)
            print("Use --force to run anyway.", file=sys.stderr)
            return EXIT_INVALID
        logger.warning("Running %s despite violated conditions: %s", path, "; ".join(validation.reasons()))
    return _execute(scenario, out_dir, settings)


@handle_errors
def validate_file(path: str, settings: Dict[str, Any]) -> int:
    """Print spectral data and gain conditions without simulating."""
    scenario = load_scenario(path, settings['defaults'])
    validation = validate_scenario(scenario)
    print("\n".join(validation_lines(scenario, validation)))
    return EXIT_CONVERGED if validation.is_valid else EXIT_INVALID


def run_files(paths: List[str], out_dir: str, settings: Dict[str, Any], jobs: int = 1,
              dt: Optional[float] = None, seed: Optional[int] = None, force: bool = False) -> int:
    """Run scenario files, concurrently when jobs > 1; returns the worst exit code."""
    if jobs <= 1 or len(paths) == 1:
        codes = [run_file(p, out_dir, settings, dt, seed, force) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_file, p, out_dir, settings, dt, seed, force) for p in paths]
            codes = [future.result() for future in futures]
    return max(codes)


# =============================================================================
# Main Entry Point
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='fxtrack',
        description='Fixed-time cooperative tracking simulator',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', default=Config.OUTPUT_DIR, help='Output directory')
    common.add_argument('--dt', type=float, default=None, help='Override the integration step')
    common.add_argument('--seed', type=int, default=None, help='Override the random seed')

    example = sub.add_parser('run-example', parents=[common], help='Run a built-in example (1-4)')
    example.add_argument('id', type=int)
    example.add_argument('--export', action='store_true', help='Also write the example as a scenario file')

    run = sub.add_parser('run', parents=[common], help='Run scenario files')
    run.add_argument('files', nargs='+')
    run.add_argument('--force', action='store_true', help='Run despite violated assumptions or gains')
    run.add_argument('--jobs', type=int, default=None, help='Scenario files to run concurrently (default FXTRACK_JOBS)')

    check = sub.add_parser('validate', help='Check assumptions and gain conditions only')
    check.add_argument('file')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        Config.validate()
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=Config.LOG_LEVEL, format='%(levelname)s %(name)s: %(message)s')

    project_config = ProjectConfig(Config.PROJECT_CONFIG)
    settings = _settings(project_config)

    if args.command == 'validate':
        return validate_file(args.file, settings)

    print(f"\n{'='*50}")
    print(f"  {project_config.get('project.name', 'fxtrack')}")
    print(f"  {project_config.get('project.description', '')}")
    print(f"{'='*50}\n")

    if args.command == 'run-example':
        return run_example(args.id, args.out, settings, args.dt, args.seed, args.export)
    jobs = Config.jobs() if args.jobs is None else args.jobs
    if jobs < 1:
        print("Error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    return run_files(args.files, args.out, settings, jobs, args.dt, args.seed, args.force)


if __name__ == '__main__':
    sys.exit(main())
