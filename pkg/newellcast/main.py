"""Main entry point for newellcast"""

import argparse
import json
import sys
from typing import List, Optional

from loguru import logger

from .cli import COMMANDS, load_config
from .errors import NewellcastError

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{module}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description="Physics-informed traffic flow forecasting with Newell estimators",
        prog="newellcast"
    )

    parser.add_argument(
        "command",
        help="Pipeline step to run",
        choices=list(COMMANDS)
    )

    parser.add_argument(
        "-c", "--config",
        help="Path to YAML run configuration (defaults apply when omitted)",
        type=str
    )

    parser.add_argument(
        "-o", "--out",
        help="Output directory (overrides the config file)",
        type=str
    )

    parser.add_argument(
        "--seed",
        help="Top-level random seed (overrides the config file)",
        type=int
    )

    parser.add_argument(
        "--jobs",
        help="Worker processes for scenario/variant jobs (overrides the config file)",
        type=int
    )

    parser.add_argument(
        "--log-level",
        help="Log level (DEBUG, INFO, WARNING, ERROR)",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="INFO"
    )

    return parser.parse_args(argv)


def run_command(command: str, config_path: Optional[str] = None, out: Optional[str] = None,
                seed: Optional[int] = None, jobs: Optional[int] = None) -> List[str]:
    """Run one subcommand

    Returns:
        Paths of the written artifacts
    """
    config = load_config(config_path).with_overrides(out=out, seed=seed, jobs=jobs)
    logger.info(f"Running {command} into {config.out} (seed {config.seed}, {config.jobs} jobs)")
    written = COMMANDS[command](config)
    logger.info(f"{command} wrote {len(written)} files")
    return [str(p) for p in written]


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = parse_args(argv)

    # Configure logger
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=args.log_level)

    try:
        written = run_command(args.command, args.config, args.out, args.seed, args.jobs)
    except NewellcastError as e:
        logger.error(f"{args.command} failed: {e.message}")
        print(json.dumps(e.to_dict()))
        return 2
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        print(json.dumps({"error": type(e).__name__, "message": str(e), "context": {}}))
        return 1

    print(f"Successfully ran {args.command}: {len(written)} files written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
