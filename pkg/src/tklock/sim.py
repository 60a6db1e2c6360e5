"""Cycle-accurate 3-valued simulation of sequential netlists.

Values are 0, 1, or None (unknown). One timing model: primary inputs are
sampled at the start of a cycle, all combinational nets are evaluated once in
topological order under strong Kleene logic, and DFFs latch their D nets at
the end of the cycle. Two initial-state modes exist: "zero" (all flip-flops
start at 0) and "x" (flip-flops start unknown). Counter flip-flops added by
the structural locker are recognized by their net prefix and start at 0 in
both modes; the locked circuit's key schedule is anchored to cycle 0.

Key inputs (``keyinput%d``) are driven by a :class:`KeyPolicy` rather than by
the per-cycle stimulus vectors, which cover non-key inputs only.

:class:`PlaneSim` is a bit-parallel twin of :func:`simulate`: bit ``l`` of
every net's two planes (high, unknown) holds run ``l``, so one pass evaluates
arbitrarily many runs. The test suite pins it to the scalar semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Netlist, has_errors, topo_order, validate
from .keys import COUNTER_NET_PREFIX, KeySchedule, split_inputs

_OP_AND, _OP_NAND, _OP_OR, _OP_NOR, _OP_XOR, _OP_XNOR, _OP_NOT, _OP_BUF = range(8)
_OP_CODES = {
    "AND": _OP_AND,
    "NAND": _OP_NAND,
    "OR": _OP_OR,
    "NOR": _OP_NOR,
    "XOR": _OP_XOR,
    "XNOR": _OP_XNOR,
    "NOT": _OP_NOT,
    "BUF": _OP_BUF,
}
_OP_NAMES = {code: kind for kind, code in _OP_CODES.items()}


def kleene_eval(kind: str, values) -> int | None:
    """Evaluate one gate under strong Kleene logic (None is unknown).

    AND with any 0 is 0 and OR with any 1 is 1 regardless of unknowns;
    XOR/XNOR are unknown as soon as one fanin is; NOT None is None.
    """
    if kind == "NOT":
        v = values[0]
        return None if v is None else 1 - v
    if kind == "BUF":
        return values[0]
    if kind in ("AND", "NAND"):
        if any(v == 0 for v in values):
            r = 0
        elif any(v is None for v in values):
            r = None
        else:
            r = 1
        return r if kind == "AND" else (None if r is None else 1 - r)
    if kind in ("OR", "NOR"):
        if any(v == 1 for v in values):
            r = 1
        elif any(v is None for v in values):
            r = None
        else:
            r = 0
        return r if kind == "OR" else (None if r is None else 1 - r)
    if kind in ("XOR", "XNOR"):
        if any(v is None for v in values):
            return None
        parity = 0
        for v in values:
            parity ^= v
        return parity if kind == "XOR" else 1 - parity
    raise ValueError(f"unknown gate kind '{kind}'")


@dataclass
class KeyPolicy:
    """How key inputs are driven: none, correct(schedule), tampered, or static."""

    kind: str
    schedule: KeySchedule | None = None
    overrides: dict[int, int] = field(default_factory=dict)
    value: int | None = None

    @classmethod
    def none(cls) -> "KeyPolicy":
        return cls(kind="none")

    @classmethod
    def correct(cls, schedule: KeySchedule) -> "KeyPolicy":
        return cls(kind="correct", schedule=schedule)

    @classmethod
    def tampered(cls, schedule: KeySchedule, overrides: dict[int, int]) -> "KeyPolicy":
        return cls(kind="tampered", schedule=schedule, overrides=dict(overrides))

    @classmethod
    def static(cls, value: int) -> "KeyPolicy":
        return cls(kind="static", value=value)

    def key_value_at(self, cycle: int) -> int | None:
        if self.kind == "none":
            return None
        if self.kind == "static":
            return self.value
        if self.kind == "tampered" and cycle in self.overrides:
            return self.overrides[cycle]
        return self.schedule.key_at(cycle)

    def describe(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "static":
            return f"static:{self.value}"
        keys = ",".join(self.schedule.binary_strings())
        if self.kind == "correct":
            return f"correct:{keys}"
        ov = ";".join(f"{c}={v}" for c, v in sorted(self.overrides.items()))
        return f"tampered:{keys}:{ov}"


@dataclass
class Stimulus:
    """Per-cycle vectors for the non-key inputs plus a key-driving policy."""

    cycles: int
    inputs: tuple[tuple[int | None, ...], ...]
    key_policy: KeyPolicy = field(default_factory=KeyPolicy.none)

    @classmethod
    def from_strings(cls, rows: list[str], key_policy: KeyPolicy | None = None) -> "Stimulus":
        table = {"0": 0, "1": 1, "x": None, "X": None}
        vectors = []
        for row in rows:
            if set(row) - set(table):
                raise ValueError(f"bad stimulus row '{row}'")
            vectors.append(tuple(table[ch] for ch in row))
        return cls(
            cycles=len(vectors),
            inputs=tuple(vectors),
            key_policy=key_policy or KeyPolicy.none(),
        )


def value_str(v: int | None) -> str:
    return "x" if v is None else str(v)


@dataclass
class Trace:
    """Per-cycle values of all primary inputs, primary outputs, and watched nets."""

    init_mode: str
    input_names: tuple[str, ...]
    output_names: tuple[str, ...]
    watch_names: tuple[str, ...]
    inputs: list[tuple[int | None, ...]]
    outputs: list[tuple[int | None, ...]]
    watched: list[tuple[int | None, ...]]

    @property
    def cycles(self) -> int:
        return len(self.outputs)

    def value(self, cycle: int, net: str) -> int | None:
        for names, rows in (
            (self.output_names, self.outputs),
            (self.watch_names, self.watched),
            (self.input_names, self.inputs),
        ):
            if net in names:
                return rows[cycle][names.index(net)]
        raise KeyError(f"net '{net}' not recorded in trace")

    def to_csv(self) -> str:
        header = ["cycle", *self.input_names, *self.output_names, *self.watch_names]
        rows = [",".join(header)]
        for c in range(self.cycles):
            cells = [str(c)]
            cells += [value_str(v) for v in self.inputs[c]]
            cells += [value_str(v) for v in self.outputs[c]]
            cells += [value_str(v) for v in self.watched[c]]
            rows.append(",".join(cells))
        return "\n".join(rows) + "\n"


class CompiledNetlist:
    """Index-based form of a netlist shared by the scalar and plane simulators."""

    def __init__(self, netlist: Netlist):
        if has_errors(validate(netlist)):
            raise ValueError(f"netlist '{netlist.name}' fails validation")
        self.netlist = netlist
        names: list[str] = list(netlist.inputs)
        names += [d.output for d in netlist.dffs]
        names += [g.output for g in netlist.gates]
        self.index = {name: i for i, name in enumerate(names)}
        self.names = names
        self.n_nets = len(names)
        nonkey, key = split_inputs(netlist)
        self.nonkey_idx = [self.index[n] for n in nonkey]
        self.key_idx = [self.index[n] for n in key]
        self.nonkey_names = nonkey
        self.key_names = key
        self.input_idx = [self.index[n] for n in netlist.inputs]
        self.output_idx = [self.index[n] for n in netlist.outputs]
        self.ops = [
            (_OP_CODES[g.kind], self.index[g.output], tuple(self.index[f] for f in g.fanins))
            for g in topo_order(netlist)
        ]
        self.dff_q_idx = [self.index[d.output] for d in netlist.dffs]
        self.dff_d_idx = [self.index[d.input] for d in netlist.dffs]
        self.dff_forced_zero = [d.output.startswith(COUNTER_NET_PREFIX) for d in netlist.dffs]

    def initial_state(self, init: str) -> tuple[int | None, ...]:
        if init not in ("zero", "x"):
            raise ValueError(f"unknown init mode '{init}'")
        if init == "zero":
            return tuple(0 for _ in self.dff_q_idx)
        return tuple(0 if forced else None for forced in self.dff_forced_zero)


def check_policy(compiled: CompiledNetlist, policy: KeyPolicy) -> None:
    width = len(compiled.key_idx)
    if policy.kind == "none":
        if width:
            raise ValueError("netlist has key inputs; a key policy is required")
        return
    if not width:
        raise ValueError("key policy given for a netlist without key inputs")
    if policy.kind == "static":
        if not 0 <= policy.value < 2**width:
            raise ValueError(f"static key {policy.value} out of range for {width} key bits")
        return
    if policy.schedule.width != width:
        raise ValueError(
            f"schedule width {policy.schedule.width} does not match {width} key inputs"
        )
    for cycle, value in policy.overrides.items():
        if not 0 <= value < 2**width:
            raise ValueError(f"override {value} at cycle {cycle} out of range")


def simulate(
    netlist: Netlist,
    stimulus: Stimulus,
    init: str = "zero",
    watch: tuple[str, ...] = (),
) -> Trace:
    """Reference scalar simulation; see the module docstring for the model."""
    compiled = CompiledNetlist(netlist)
    check_policy(compiled, stimulus.key_policy)
    if len(stimulus.inputs) != stimulus.cycles:
        raise ValueError("stimulus cycle count does not match input rows")
    for row in stimulus.inputs:
        if len(row) != len(compiled.nonkey_idx):
            raise ValueError(
                f"stimulus width {len(row)} does not match {len(compiled.nonkey_idx)} non-key inputs"
            )
    for cycle in stimulus.key_policy.overrides:
        if not 0 <= cycle < stimulus.cycles:
            raise ValueError(f"override cycle {cycle} outside stimulus")
    watch_idx = [compiled.index[n] for n in watch]

    values: list[int | None] = [None] * compiled.n_nets
    state = list(compiled.initial_state(init))
    inputs_log, outputs_log, watch_log = [], [], []
    for cycle in range(stimulus.cycles):
        for idx, v in zip(compiled.nonkey_idx, stimulus.inputs[cycle]):
            values[idx] = v
        key_value = stimulus.key_policy.key_value_at(cycle)
        for bit, idx in enumerate(compiled.key_idx):
            values[idx] = (key_value >> bit) & 1
        for idx, v in zip(compiled.dff_q_idx, state):
            values[idx] = v
        for code, out, fanins in compiled.ops:
            values[out] = kleene_eval(_OP_NAMES[code], [values[f] for f in fanins])
        inputs_log.append(tuple(values[i] for i in compiled.input_idx))
        outputs_log.append(tuple(values[i] for i in compiled.output_idx))
        watch_log.append(tuple(values[i] for i in watch_idx))
        state = [values[d] for d in compiled.dff_d_idx]

    return Trace(
        init_mode=init,
        input_names=tuple(netlist.inputs),
        output_names=tuple(netlist.outputs),
        watch_names=tuple(watch),
        inputs=inputs_log,
        outputs=outputs_log,
        watched=watch_log,
    )



class PlaneSim:
    """Bit-parallel 3-valued simulator over (high, unknown) integer bit planes."""

    def __init__(self, netlist: Netlist, lanes: int, compiled: CompiledNetlist | None = None):
        self.c = compiled or CompiledNetlist(netlist)
        self.lanes = lanes
        self.mask = (1 << lanes) - 1
        self.h = [0] * self.c.n_nets
        self.x = [0] * self.c.n_nets
        self.state_h = [0] * len(self.c.dff_q_idx)
        self.state_x = [0] * len(self.c.dff_q_idx)

    def reset(self, init: str = "zero") -> None:
        if init not in ("zero", "x"):
            raise ValueError(f"unknown init mode '{init}'")
        for i, forced in enumerate(self.c.dff_forced_zero):
            self.state_h[i] = 0
            self.state_x[i] = 0 if (init == "zero" or forced) else self.mask

    def load_state(self, state: tuple[int | None, ...]) -> None:
        """Broadcast a scalar per-flip-flop state across all lanes."""
        for i, v in enumerate(state):
            self.state_h[i] = self.mask if v == 1 else 0
            self.state_x[i] = self.mask if v is None else 0

    def step(
        self,
        nonkey_h: list[int],
        key_value: int | None,
        nonkey_x: list[int] | None = None,
        latch: bool = True,
    ) -> None:
        """Evaluate one cycle. With latch=True the flip-flop planes advance."""
        h, x, mask = self.h, self.x, self.mask
        for slot, idx in enumerate(self.c.nonkey_idx):
            h[idx] = nonkey_h[slot] & mask
            x[idx] = (nonkey_x[slot] & mask) if nonkey_x else 0
        for bit, idx in enumerate(self.c.key_idx):
            h[idx] = mask if (key_value >> bit) & 1 else 0
            x[idx] = 0
        for slot, idx in enumerate(self.c.dff_q_idx):
            h[idx] = self.state_h[slot]
            x[idx] = self.state_x[slot]
        for code, out, fanins in self.c.ops:
            if code == _OP_AND or code == _OP_NAND:
                acc_h = mask
                zero = 0
                for f in fanins:
                    acc_h &= h[f]
                    zero |= ~(h[f] | x[f])
                zero &= mask
                if code == _OP_AND:
                    h[out] = acc_h
                else:
                    h[out] = zero
                x[out] = mask & ~(acc_h | zero)
            elif code == _OP_OR or code == _OP_NOR:
                acc_h = 0
                zero = mask
                for f in fanins:
                    acc_h |= h[f]
                    zero &= ~(h[f] | x[f])
                zero &= mask
                if code == _OP_OR:
                    h[out] = acc_h
                else:
                    h[out] = zero
                x[out] = mask & ~(acc_h | zero)
            elif code == _OP_NOT:
                f = fanins[0]
                h[out] = mask & ~(h[f] | x[f])
                x[out] = x[f]
            elif code == _OP_BUF:
                f = fanins[0]
                h[out] = h[f]
                x[out] = x[f]
            else:  # XOR / XNOR
                acc_x = 0
                parity = 0
                for f in fanins:
                    acc_x |= x[f]
                    parity ^= h[f]
                if code == _OP_XOR:
                    h[out] = parity & ~acc_x
                else:
                    h[out] = mask & ~parity & ~acc_x
                x[out] = acc_x
        if latch:
            for slot, d in enumerate(self.c.dff_d_idx):
                self.state_h[slot] = h[d]
                self.state_x[slot] = x[d]

    def output_planes(self) -> list[tuple[int, int]]:
        return [(self.h[i], self.x[i]) for i in self.c.output_idx]

    def next_state_planes(self) -> list[tuple[int, int]]:
        return [(self.h[d], self.x[d]) for d in self.c.dff_d_idx]

    def plane_value(self, net: str) -> tuple[int, int]:
        idx = self.c.index[net]
        return self.h[idx], self.x[idx]

    def lane_value(self, net: str, lane: int) -> int | None:
        h, x = self.plane_value(net)
        if (x >> lane) & 1:
            return None
        return (h >> lane) & 1


def minterm_planes(n_inputs: int) -> list[int]:
    """Truth-table input patterns: bit l of plane i is bit i of lane index l."""
    lanes = 1 << n_inputs
    planes = []
    for i in range(n_inputs):
        period = 1 << (i + 1)
        block = ((1 << (1 << i)) - 1) << (1 << i)
        repeat = ((1 << lanes) - 1) // ((1 << period) - 1)
        planes.append(block * repeat)
    return planes
