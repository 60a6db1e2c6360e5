"""Key schedules and the naming conventions shared by lockers and simulator.

A schedule is an ordered list of key values, one per counter time, applied
cyclically: the key expected at cycle t is ``keys[t mod period]``. Key bits
appear in a circuit as primary inputs ``keyinput0..keyinput{width-1}`` with
``keyinput0`` carrying the least significant bit.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .circuit import Netlist

KEY_INPUT_PREFIX = "keyinput"
COUNTER_NET_PREFIX = "cl_cnt"
LOCK_NET_PREFIX = "cl_"

_KEY_INPUT_RE = re.compile(rf"^{KEY_INPUT_PREFIX}(\d+)$")


@dataclass(frozen=True)
class KeySchedule:
    """Ordered key values. `width` is the bit width of each value."""

    keys: tuple[int, ...]
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("key width must be >= 1")
        if len(self.keys) < 1:
            raise ValueError("schedule must hold at least one key")
        for value in self.keys:
            if not 0 <= value < 2**self.width:
                raise ValueError(f"key value {value} out of range for width {self.width}")

    @property
    def period(self) -> int:
        return len(self.keys)

    def key_at(self, cycle: int) -> int:
        return self.keys[cycle % len(self.keys)]

    def binary_strings(self) -> list[str]:
        return [to_binary(value, self.width) for value in self.keys]


def to_binary(value: int, width: int) -> str:
    """Format a key value as a binary string, most significant bit first."""
    return format(value, f"0{width}b")


def from_binary(text: str) -> int:
    if not text or set(text) - set("01"):
        raise ValueError(f"bad binary key string '{text}'")
    return int(text, 2)


def generate_key_schedule(num_keys: int, key_bits: int, seed: int) -> KeySchedule:
    """Draw a deterministic schedule of `num_keys` values of `key_bits` bits each.

    Repeats across values are permitted. Any `num_keys >= 2` is accepted here;
    the structural locker separately restricts its configs to powers of two.
    """
    if num_keys < 2:
        raise ValueError("need at least 2 key values")
    if key_bits < 1:
        raise ValueError("key width must be >= 1")
    rng = random.Random(seed)
    return KeySchedule(
        keys=tuple(rng.randrange(2**key_bits) for _ in range(num_keys)),
        width=key_bits,
    )


def schedule_to_text(schedule: KeySchedule) -> str:
    """One binary string per line, most significant bit first."""
    return "\n".join(schedule.binary_strings()) + "\n"


def schedule_from_text(text: str) -> KeySchedule:
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty key schedule")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError("inconsistent key widths in schedule")
    return KeySchedule(keys=tuple(from_binary(row) for row in rows), width=width)


def parse_key_list(text: str) -> KeySchedule:
    """Parse a comma-separated list of binary key strings (MSB first)."""
    return schedule_from_text(text.replace(",", "\n"))


def key_input_names(width: int) -> list[str]:
    return [f"{KEY_INPUT_PREFIX}{b}" for b in range(width)]


def split_inputs(netlist: Netlist) -> tuple[list[str], list[str]]:
    """Split primary inputs into (non-key, key) lists, key inputs by bit index."""
    non_key: list[str] = []
    key: list[tuple[int, str]] = []
    for name in netlist.inputs:
        m = _KEY_INPUT_RE.match(name)
        if m:
            key.append((int(m.group(1)), name))
        else:
            non_key.append(name)
    key.sort()
    return non_key, [name for _, name in key]
