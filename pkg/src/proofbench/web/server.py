"""Server entry point.

    proofbench-server --port 8000 --prover mock --data-dir ./data --config-dir ./activities
    proofbench-server --prover tcp:localhost:9999 ...
    proofbench-server --prover "pipe:isabelle client ..." ...

The prover password is taken from $PROOFBENCH_PROVER_PASSWORD.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import uvicorn

from ..platform import PROVER_PASSWORD_ENV, Platform, PlatformSettings
from .app import create_app


def build_platform(args) -> Platform:
    seed_instructor = None
    if args.instructor:
        name, _, password = args.instructor.partition(":")
        if not name or not password:
            raise SystemExit("--instructor must look like NAME:PASSWORD")
        seed_instructor = (name, password)
    settings = PlatformSettings(
        data_dir=Path(args.data_dir),
        config_dir=Path(args.config_dir),
        prover=args.prover,
        prover_password=os.environ.get(PROVER_PASSWORD_ENV, ""),
        mock_latency=args.mock_latency,
        consolidate_delay=args.consolidate_delay,
        task_timeout=args.task_timeout,
        seed_instructor=seed_instructor,
    )
    return Platform.create(settings)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="proofbench-server", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument(
        "--prover",
        default="mock",
        help="mock | tcp:HOST:PORT | pipe:COMMAND (default: embedded mock)",
    )
    parser.add_argument("--data-dir", default="./proofbench-data")
    parser.add_argument("--config-dir", default="./proofbench-activities")
    parser.add_argument("--mock-latency", type=float, default=0.0)
    parser.add_argument(
        "--consolidate-delay",
        type=float,
        default=0.5,
        help="prover option governing feedback latency (seconds)",
    )
    parser.add_argument("--task-timeout", type=float, default=60.0)
    parser.add_argument(
        "--instructor",
        default=None,
        help="NAME:PASSWORD; creates the instructor account if missing",
    )
    args = parser.parse_args(argv)

    platform = build_platform(args)
    app = create_app(platform)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        platform.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
