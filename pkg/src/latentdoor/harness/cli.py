# Copyright 2025 Dragos Crintea - HikariLabs LTD
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""``latentdoor`` command line.

Example:
    latentdoor run --config configs/desk.yaml --seed 7 --out runs/desk
    latentdoor attack --config configs/desk.yaml --seed 7 --out runs/desk \\
        --phase-override attacks.sample_limit=20
"""

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from latentdoor.__version__ import __version__
from latentdoor.errors import (
    InvalidConfigError,
    LineageMismatchError,
    MissingArtifactError,
    NonFiniteValueError,
)
from latentdoor.harness.config import load_experiment_config
from latentdoor.harness.pipeline import PHASES, ExperimentRun

logger = logging.getLogger("latentdoor")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_MISSING_ARTIFACT = 3
EXIT_LINEAGE = 4
EXIT_NUMERIC = 5

#: Checked in order; the first matching family decides the exit code.
_EXIT_CODES = (
    (InvalidConfigError, EXIT_CONFIG, "configuration error"),
    (MissingArtifactError, EXIT_MISSING_ARTIFACT, "missing artifact"),
    (LineageMismatchError, EXIT_LINEAGE, "lineage mismatch"),
    (NonFiniteValueError, EXIT_NUMERIC, "numeric failure"),
    ((ValueError, OSError), EXIT_FAILURE, "error"),
)
_HANDLED = (ValueError, OSError, FloatingPointError)


def _seed(raw: str) -> int:
    value = int(raw, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {raw}")
    return value


def _threads(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"threads must be >= 1, got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentdoor",
        description="Desk-scale lab for backdoor directions, feature-guided attacks "
        "and repair audits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="Experiment YAML file")
    common.add_argument("--seed", type=_seed, help="Root seed (overrides experiment.seed)")
    common.add_argument("--out", metavar="DIR", help="Run directory (overrides output.dir)")
    common.add_argument("--threads", type=_threads, default=1, help="Attack worker threads")
    common.add_argument(
        "--phase-override",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        help="section.key=value patch applied to the config; repeatable",
    )
    common.add_argument("--idx-images", metavar="PATH", help="IDX image file to import")
    common.add_argument("--idx-labels", metavar="PATH", help="IDX label file to import")
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default INFO)",
    )
    common.add_argument("--progress", action="store_true", help="Show progress bars")

    commands = parser.add_subparsers(dest="command", required=True)
    for phase in PHASES:
        commands.add_parser(phase, parents=[common], help=f"Run the {phase} phase")
    commands.add_parser("run", parents=[common], help="Run every phase in order")
    return parser


def _overrides(args: argparse.Namespace) -> list[str]:
    overrides = list(args.phase_override)
    if args.idx_images or args.idx_labels:
        overrides += [
            "data.source=idx",
            f"data.idx_images={json.dumps(args.idx_images or '')}",
            f"data.idx_labels={json.dumps(args.idx_labels or '')}",
        ]
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``latentdoor`` console script; returns the exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_experiment_config(
            args.config if args.config else {},
            overrides=_overrides(args),
            seed=args.seed,
            out_dir=args.out,
        )
        run = ExperimentRun(cfg, threads=args.threads, progress=args.progress)
        getattr(run, args.command)()
    except _HANDLED as exc:
        for family, code, category in _EXIT_CODES:
            if isinstance(exc, family):
                logger.error("%s: %s", category, exc)
                return code
        raise
    logger.info("%s finished; artifacts in %s", args.command, run.run_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
