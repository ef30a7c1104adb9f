"""CLI for the mock prover.

Examples:
    proofbench-mock-prover --port 9999 --password pw
    proofbench-mock-prover --stdio --password pw --latency 0.2
"""

from __future__ import annotations

import argparse
import sys
import time

from .server import MockProverServer, serve_stdio


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="proofbench-mock-prover", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=9999)
    parser.add_argument("--password", default="")
    parser.add_argument("--latency", type=float, default=0.0, help="seconds before each verdict")
    parser.add_argument("--stdio", action="store_true", help="serve one client over stdin/stdout")
    args = parser.parse_args(argv)

    if args.stdio:
        serve_stdio(
            sys.stdin.buffer,
            sys.stdout.buffer,
            password=args.password,
            default_latency=args.latency,
        )
        return 0

    server = MockProverServer(
        host=args.host, port=args.port, password=args.password, default_latency=args.latency
    )
    server.start()
    host, port = server.address
    print(f"mock prover listening on {host}:{port}", file=sys.stderr)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
