#!/usr/bin/env python3
"""
Run an hbsa command twice and fail if the two reports differ byte for byte

Usage: python scripts/check_determinism.py verify --seed 42 --format json
"""

import difflib
import subprocess
import sys
from pathlib import Path

CLI = Path(__file__).parent.parent / "src" / "cli.py"


def run_once(args: list[str]) -> bytes:
    """
    Run the CLI and capture its report

    Args:
        args: Command-line arguments for src/cli.py

    Returns:
        Raw stdout of the run
    """
    result = subprocess.run([sys.executable, str(CLI), *args], capture_output=True)
    if result.returncode not in (0, 1):
        print(result.stderr.decode(errors="replace"), file=sys.stderr)
        raise SystemExit(f"hbsa exited with {result.returncode}")
    return result.stdout


def main():
    """Main entry point"""
    args = sys.argv[1:] or ["verify", "--seed", "42", "--format", "json"]
    print(f"Running hbsa {' '.join(args)} twice...")
    first = run_once(args)
    second = run_once(args)

    if first == second:
        print(f"Determinism check passed: {len(first)} identical bytes")
        return

    print("Determinism check FAILED: reports differ")
    diff = difflib.unified_diff(
        first.decode().splitlines(keepends=True),
        second.decode().splitlines(keepends=True),
        fromfile="run_1",
        tofile="run_2",
    )
    sys.stdout.writelines(diff)
    sys.exit(1)


if __name__ == "__main__":
    main()
