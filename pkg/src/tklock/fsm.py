"""Mealy state machines with KISS2 reading and writing.

Transitions carry input/output patterns over {0,1,-}; don't-cares are kept
symbolic and only interpreted when checking determinism or matching a
concrete input vector.
"""

from __future__ import annotations

from dataclasses import dataclass


class Kiss2FormatError(ValueError):
    """Malformed KISS2 text; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FsmError(ValueError):
    """Semantic state-machine error (nondeterminism, incomplete machine, ...)."""


@dataclass(frozen=True)
class Transition:
    inputs: str
    src: str
    dst: str
    outputs: str


@dataclass(frozen=True)
class Fsm:
    input_width: int
    output_width: int
    states: tuple[str, ...]
    reset_state: str
    transitions: tuple[Transition, ...]


def patterns_overlap(a: str, b: str) -> bool:
    """True when two {0,1,-} patterns share at least one concrete vector."""
    return all(x == "-" or y == "-" or x == y for x, y in zip(a, b))


def pattern_matches(pattern: str, vector: str) -> bool:
    return all(p == "-" or p == v for p, v in zip(pattern, vector))


def determinism_conflicts(fsm: Fsm) -> list[tuple[Transition, Transition]]:
    """All pairs of transitions from the same state with overlapping inputs."""
    by_src: dict[str, list[Transition]] = {}
    for tr in fsm.transitions:
        by_src.setdefault(tr.src, []).append(tr)
    conflicts = []
    for group in by_src.values():
        for i, a in enumerate(group):
            for b in group[i + 1 :]:
                if patterns_overlap(a.inputs, b.inputs):
                    conflicts.append((a, b))
    return conflicts


def check_fsm(fsm: Fsm) -> None:
    if fsm.reset_state not in fsm.states:
        raise FsmError(f"reset state '{fsm.reset_state}' is not a state")
    state_set = set(fsm.states)
    for tr in fsm.transitions:
        if len(tr.inputs) != fsm.input_width:
            raise FsmError(f"input pattern '{tr.inputs}' does not match width {fsm.input_width}")
        if len(tr.outputs) != fsm.output_width:
            raise FsmError(f"output pattern '{tr.outputs}' does not match width {fsm.output_width}")
        if tr.src not in state_set or tr.dst not in state_set:
            raise FsmError(f"transition references unknown state: {tr.src} -> {tr.dst}")
    conflicts = determinism_conflicts(fsm)
    if conflicts:
        a, b = conflicts[0]
        raise FsmError(
            f"nondeterministic transitions from '{a.src}': patterns '{a.inputs}' and '{b.inputs}' overlap"
        )


def parse_kiss2(text: str) -> Fsm:
    """Parse KISS2 text into a validated :class:`Fsm`.

    Expects `.i .o .p .s` headers with transition lines of the form
    `inputs from to outputs`; `.r` names the reset state and defaults to the
    source state of the first transition. `.ilb`/`.ob` name lines and `.e`
    are accepted and ignored.
    """
    input_width = output_width = None
    declared_terms = declared_states = None
    reset: str | None = None
    transitions: list[Transition] = []
    states: list[str] = []
    seen: set[str] = set()

    def note_state(name: str) -> None:
        if name not in seen:
            seen.add(name)
            states.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            parts = line.split()
            directive = parts[0]
            if directive in (".ilb", ".ob"):
                continue
            if directive == ".e":
                break
            if len(parts) != 2:
                raise Kiss2FormatError(f"malformed directive '{line}'", lineno)
            if directive == ".i":
                input_width = int(parts[1])
            elif directive == ".o":
                output_width = int(parts[1])
            elif directive == ".p":
                declared_terms = int(parts[1])
            elif directive == ".s":
                declared_states = int(parts[1])
            elif directive == ".r":
                reset = parts[1]
            else:
                raise Kiss2FormatError(f"unknown directive '{directive}'", lineno)
            continue
        fields = line.split()
        if len(fields) != 4:
            raise Kiss2FormatError(f"expected 'inputs from to outputs', got '{line}'", lineno)
        ins, src, dst, outs = fields
        if input_width is None or output_width is None:
            raise Kiss2FormatError("transition before .i/.o headers", lineno)
        if len(ins) != input_width or set(ins) - set("01-"):
            raise Kiss2FormatError(f"bad input pattern '{ins}'", lineno)
        if len(outs) != output_width or set(outs) - set("01-"):
            raise Kiss2FormatError(f"bad output pattern '{outs}'", lineno)
        note_state(src)
        note_state(dst)
        transitions.append(Transition(inputs=ins, src=src, dst=dst, outputs=outs))

    if input_width is None or output_width is None:
        raise Kiss2FormatError("missing .i/.o headers")
    if not transitions:
        raise Kiss2FormatError("no transitions")
    if declared_terms is not None and declared_terms != len(transitions):
        raise Kiss2FormatError(f".p declares {declared_terms} terms, found {len(transitions)}")
    if declared_states is not None and declared_states != len(states):
        raise Kiss2FormatError(f".s declares {declared_states} states, found {len(states)}")
    if reset is None:
        reset = transitions[0].src
    if reset not in seen:
        raise Kiss2FormatError(f"reset state '{reset}' never appears in a transition")

    fsm = Fsm(
        input_width=input_width,
        output_width=output_width,
        states=tuple(states),
        reset_state=reset,
        transitions=tuple(transitions),
    )
    try:
        check_fsm(fsm)
    except FsmError as exc:
        raise Kiss2FormatError(str(exc)) from exc
    return fsm


def write_kiss2(fsm: Fsm) -> str:
    """Emit KISS2 text that re-parses to an equal :class:`Fsm`."""
    lines = [
        f".i {fsm.input_width}",
        f".o {fsm.output_width}",
        f".p {len(fsm.transitions)}",
        f".s {len(fsm.states)}",
        f".r {fsm.reset_state}",
    ]
    lines += [f"{t.inputs} {t.src} {t.dst} {t.outputs}" for t in fsm.transitions]
    lines.append(".e")
    return "\n".join(lines) + "\n"


def simulate_fsm(fsm: Fsm, inputs: list[str]) -> tuple[list[str], list[str]]:
    """Run the machine from reset over concrete input vectors.

    Returns (outputs, states) where outputs[i] is the Mealy output pattern of
    the transition taken at step i and states[i] the state entered after it.
    Raises :class:`FsmError` when no transition matches (incomplete machine)
    or when more than one matches (nondeterminism).
    """
    by_src: dict[str, list[Transition]] = {}
    for tr in fsm.transitions:
        by_src.setdefault(tr.src, []).append(tr)
    current = fsm.reset_state
    outputs: list[str] = []
    visited: list[str] = []
    for step, vector in enumerate(inputs):
        if len(vector) != fsm.input_width or set(vector) - set("01"):
            raise FsmError(f"step {step}: bad input vector '{vector}'")
        matches = [t for t in by_src.get(current, []) if pattern_matches(t.inputs, vector)]
        if not matches:
            raise FsmError(f"step {step}: no transition from '{current}' on '{vector}'")
        if len(matches) > 1:
            raise FsmError(f"step {step}: nondeterministic match from '{current}' on '{vector}'")
        taken = matches[0]
        outputs.append(taken.outputs)
        current = taken.dst
        visited.append(current)
    return outputs, visited
