"""State-machine-level time-keyed locking.

The locked machine is the product of the original states with the counter
times 0..num_keys-1. Key bits are prepended to the input pattern; a
transition out of ``s@t`` fires only when the key field carries the
scheduled value for time t, in which case the machine follows the original
edge into ``s'@((t+1) mod num_keys)``. Every other key value diverts to a
seeded wrongful state at the next time. Mealy outputs are kept from the
original edge; corruption shows up through the state divergence on the
following cycles rather than through rewritten output labels.

Wrong-key values are covered by at most ``key_bits`` cube patterns (the
complement of the scheduled value split one flipped bit at a time), all of
which divert to the same wrongful state for a given (state, time, input).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .fsm import Fsm, FsmError, Transition, check_fsm
from .keys import KeySchedule, generate_key_schedule, to_binary


@dataclass(frozen=True)
class BehLockConfig:
    """Behavioral lock parameters; any `num_keys >= 2` is allowed."""

    num_keys: int
    key_bits: int
    seed: int = 0
    explicit_schedule: KeySchedule | None = None

    def __post_init__(self):
        if self.num_keys < 2:
            raise ValueError("num_keys must be >= 2")
        if self.key_bits < 1:
            raise ValueError("key_bits must be >= 1")
        if self.explicit_schedule is not None:
            if self.explicit_schedule.period != self.num_keys:
                raise ValueError("explicit schedule period does not match num_keys")
            if self.explicit_schedule.width != self.key_bits:
                raise ValueError("explicit schedule width does not match key_bits")


@dataclass
class BehManifest:
    """Record of the product construction."""

    schedule: KeySchedule
    # (original state, time) -> locked state name
    state_map: dict[tuple[str, int], str] = field(default_factory=dict)
    # (original state, time, original input pattern) -> wrongful next original state
    wrongful_map: dict[tuple[str, int, str], str] = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "schedule": {"keys": list(self.schedule.keys), "width": self.schedule.width},
            "state_map": {f"{s}@{t}": name for (s, t), name in self.state_map.items()},
            "wrongful_map": {
                f"{s}@{t}|{pattern}": w for (s, t, pattern), w in self.wrongful_map.items()
            },
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BehManifest":
        doc = json.loads(text)
        state_map = {}
        for key, name in doc["state_map"].items():
            state, t = key.rsplit("@", 1)
            state_map[(state, int(t))] = name
        wrongful = {}
        for key, w in doc["wrongful_map"].items():
            left, pattern = key.rsplit("|", 1)
            state, t = left.rsplit("@", 1)
            wrongful[(state, int(t), pattern)] = w
        return cls(
            schedule=KeySchedule(
                keys=tuple(doc["schedule"]["keys"]), width=doc["schedule"]["width"]
            ),
            state_map=state_map,
            wrongful_map=wrongful,
        )


def wrong_key_cubes(value: int, width: int) -> list[str]:
    """Cube patterns partitioning all width-bit values except `value`.

    Cube p agrees with `value` on the bits above position p (MSB first),
    flips bit p, and leaves the rest as don't-cares.
    """
    bits = to_binary(value, width)
    cubes = []
    for p in range(width):
        flipped = "1" if bits[p] == "0" else "0"
        cubes.append(bits[:p] + flipped + "-" * (width - 1 - p))
    return cubes


def lock_behavioral(fsm: Fsm, config: BehLockConfig) -> tuple[Fsm, BehManifest]:
    """Apply the lock; returns the locked machine and its manifest.

    The locked machine is deterministic, has ``len(states) * num_keys``
    states, input width ``key_bits + input_width`` (key bits first), and
    resets to the original reset state at time 0.
    """
    check_fsm(fsm)
    referenced = {t.src for t in fsm.transitions} | {t.dst for t in fsm.transitions}
    if referenced != set(fsm.states):
        missing = sorted(set(fsm.states) - referenced)
        raise FsmError(f"states never used in a transition: {missing}")

    k = config.num_keys
    schedule = config.explicit_schedule or generate_key_schedule(
        k, config.key_bits, config.seed
    )
    rng = random.Random(config.seed)
    single_state = len(fsm.states) == 1

    transitions: list[Transition] = []
    wrongful_map: dict[tuple[str, int, str], str] = {}
    for t in range(k):
        key_bits = to_binary(schedule.keys[t], config.key_bits)
        next_t = (t + 1) % k
        for tr in fsm.transitions:
            transitions.append(
                Transition(
                    inputs=key_bits + tr.inputs,
                    src=f"{tr.src}@{t}",
                    dst=f"{tr.dst}@{next_t}",
                    outputs=tr.outputs,
                )
            )
            if single_state:
                wrongful = tr.dst
            else:
                wrongful = rng.choice([s for s in fsm.states if s != tr.dst])
            wrongful_map[(tr.src, t, tr.inputs)] = wrongful
            for cube in wrong_key_cubes(schedule.keys[t], config.key_bits):
                transitions.append(
                    Transition(
                        inputs=cube + tr.inputs,
                        src=f"{tr.src}@{t}",
                        dst=f"{wrongful}@{next_t}",
                        outputs=tr.outputs,
                    )
                )

    states: list[str] = []
    seen: set[str] = set()
    for tr in transitions:
        for name in (tr.src, tr.dst):
            if name not in seen:
                seen.add(name)
                states.append(name)
    if len(states) != len(fsm.states) * k:
        raise FsmError("product construction lost states")

    locked = Fsm(
        input_width=config.key_bits + fsm.input_width,
        output_width=fsm.output_width,
        states=tuple(states),
        reset_state=f"{fsm.reset_state}@0",
        transitions=tuple(transitions),
    )
    check_fsm(locked)
    manifest = BehManifest(
        schedule=schedule,
        state_map={(s, t): f"{s}@{t}" for t in range(k) for s in fsm.states},
        wrongful_map=wrongful_map,
    )
    return locked, manifest
