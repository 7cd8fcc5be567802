"""
Process entry point for batch runs.

    python run_gainscope.py analyze systems/numerical_example.sys --kind l2
"""

import signal
import sys

from dotenv import load_dotenv

# Load .env file (GAINSCOPE_THREADS, GAINSCOPE_OUT, ...)
load_dotenv()


def signal_handler(signum, frame):
    """Stop on SIGTERM/SIGINT with the numerical-limit exit code."""
    print(f"[Runner] Received signal {signum}, shutting down...", file=sys.stderr)
    sys.exit(3)


def main() -> int:
    signal.signal(signal.SIGTERM, signal_handler)
    signal.signal(signal.SIGINT, signal_handler)

    from gainscope.cli import main as cli_main

    code = cli_main(sys.argv[1:])
    print(f"[Runner] Finished with exit code {code}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
