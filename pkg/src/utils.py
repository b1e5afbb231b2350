"""
Utility functions for the hbsa simulator
"""

import math
import os
import tempfile
from pathlib import Path

MASK_64 = (1 << 64) - 1

COMMANDS = ("verify", "classify", "teleport", "swap", "table")
BRANCH_MODES = ("sampling", "exhaustive")


def validate_config(config: dict) -> bool:
    """
    Check resources/config.yaml before any command reads it

    Args:
        config: Parsed YAML document

    Returns:
        True; raises ValueError naming the first missing key or bad branch mode
    """
    for key in ("name", "defaults", "modes"):
        if key not in config:
            raise ValueError(f"Missing required config key: {key}")

    modes = config["modes"] or {}
    for command in COMMANDS:
        mode = modes.get(command)
        if mode not in BRANCH_MODES:
            raise ValueError(
                f"Branch mode for {command} must be one of {BRANCH_MODES}, got {mode!r}"
            )

    return True


def parse_seed(value: str | int) -> int:
    """
    Parse a seed given as decimal or 0x-prefixed hex

    Args:
        value: Seed text or integer

    Returns:
        Seed as an unsigned 64-bit integer
    """
    seed = value if isinstance(value, int) else int(str(value).strip(), 0)
    if not 0 <= seed <= MASK_64:
        raise ValueError(f"Seed must be an unsigned 64-bit integer: {value}")
    return seed


class SplitMix64:
    """
    SplitMix64 generator.

    Fully specified so that ports to other languages reproduce the same trial
    sequences: the state advances by a fixed odd constant and each output is
    the state passed through two xor-shift-multiply rounds.
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self.state = seed & MASK_64

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & MASK_64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK_64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK_64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) built from the top 53 bits"""
        return (self.next_u64() >> 11) * 2.0**-53

    def haar_qubit(self) -> tuple[complex, complex]:
        """Haar-random single-qubit state (cos θ/2, e^{iφ} sin θ/2)"""
        theta = math.acos(1.0 - 2.0 * self.random())
        phi = 2.0 * math.pi * self.random()
        return complex(math.cos(theta / 2)), complex(math.cos(phi), math.sin(phi)) * math.sin(
            theta / 2
        )


def write_atomically(path: Path, content: str):
    """
    Write text to a file so readers never observe a partial report

    Args:
        path: Destination file
        content: Text to write
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(content)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
