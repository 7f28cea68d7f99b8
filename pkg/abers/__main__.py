import argparse
import logging
import sys

from .abe_core import DomainError, StabilityError, SingularSystemError, DomainTooSmallError, SolverAbortError
from .abe_config import EXPERIMENTS, ConfigError, load_config
from . import abe_runner, abe_splitting

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

VERBOSE_PROGRESS_EVERY = 1000  # steps between progress lines with -v

logger = logging.getLogger("abers")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abers",
        description="Augmented Burgers equation: Lie-Trotter splitting solver and its experiments")
    parser.add_argument("experiment", nargs="?", choices=EXPERIMENTS,
                        help="experiment to run (overrides the 'experiment' key of the config)")
    parser.add_argument("--config", help="configuration file (key = value)")
    parser.add_argument("--out", help="output directory (default: output_dir of the config)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for independent runs")
    parser.add_argument("--example", action="store_true", help="run the desk-scale example and write its figures")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log at INFO level, with a progress line every {0} steps".format(VERBOSE_PROGRESS_EVERY))
    parser.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    return parser


def main(args=None) -> int:
    if args is None:
        args = sys.argv[1:]
    options = _parser().parse_args(args)
    level = logging.ERROR if options.quiet else (logging.INFO if options.verbose else logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if options.verbose:
        abe_splitting.LOG_PROGRESS_EVERY = VERBOSE_PROGRESS_EVERY

    if options.example:
        from . import example
        example.example()
        return EXIT_OK
    if options.config is None:
        print("abers: nothing to do. Run an experiment with the following command:")
        print("    abers <simulate|converge|asymptote|verify> --config PATH [--out DIR] [--threads N]")
        print("or the example with: python -m abers --example")
        return EXIT_CONFIG
    if options.threads < 1:
        logger.error("--threads must be >= 1")
        return EXIT_CONFIG

    try:
        cfg = load_config(options.config, options.experiment)
        outcome = abe_runner.run_experiment(cfg, options.out, options.threads)
    except ConfigError as e:
        logger.error("config error in %s: %s", options.config, e)
        return EXIT_CONFIG
    except DomainError as e:
        logger.error("invalid run in %s: %s", options.config, e)
        return EXIT_CONFIG
    except SolverAbortError as e:
        logger.error("solver aborted at step %d: %s", e.step, e)
        return EXIT_SOLVER
    except (StabilityError, SingularSystemError, DomainTooSmallError) as e:
        logger.error("solver error: %s", e)
        return EXIT_SOLVER
    except OSError as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO
    for path in outcome.files:
        print(path)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
