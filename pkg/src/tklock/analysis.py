"""Sequential equivalence checking, corruption measurement, key-recovery
attack oracles, and overhead reporting.

Exhaustive equivalence covers every input sequence up to a depth. It is
implemented as a breadth-first sweep of reachable joint states, evaluating
all ``2**n`` input minterms of a cycle at once in bit-parallel planes; the
verdict is identical to enumerating the sequences one by one (the test suite
pins that with an independent brute-force enumerator) but the cost scales
with reachable states instead of with ``(2**n)**depth``.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from itertools import product

from .circuit import Netlist
from .keys import KeySchedule
from .sim import CompiledNetlist, KeyPolicy, PlaneSim, Stimulus, check_policy, minterm_planes, simulate
from .structural import LockManifest, added_mux_count, expected_added_gate_count


class BudgetExceededError(RuntimeError):
    """The requested search is larger than the configured budget."""


@dataclass
class Counterexample:
    """A replayable stimulus: per-cycle non-key input vectors, and where the
    two circuits' outputs first diverged under it."""

    inputs: list[tuple[int, ...]]
    cycle: int
    output: str
    left_value: int | None
    right_value: int | None


@dataclass
class EquivVerdict:
    equivalent: bool
    counterexample: Counterexample | None
    mode: str
    depth: int


@dataclass
class AttackResult:
    """Outcome of a key-space enumeration against an oracle."""

    search_space_size: int
    survivors: list
    elapsed: float
    depth: int
    mode: str
    kind: str
    key_bits: int


@dataclass(frozen=True)
class CircuitCounts:
    gates: int
    dffs: int
    inputs: int
    outputs: int


@dataclass
class OverheadReport:
    original: CircuitCounts
    locked: CircuitCounts
    delta: CircuitCounts
    per_ff_mux_count: int
    key_inputs: int
    schedule_bits: int
    layers: int

    @property
    def relative_gate_overhead(self) -> float:
        return self.delta.gates / self.original.gates


def _check_interfaces(ca: CompiledNetlist, cb: CompiledNetlist) -> None:
    if ca.nonkey_names != cb.nonkey_names:
        raise ValueError(
            f"non-key input mismatch: {ca.nonkey_names} vs {cb.nonkey_names}"
        )
    if list(ca.netlist.outputs) != list(cb.netlist.outputs):
        raise ValueError(
            f"output mismatch: {ca.netlist.outputs} vs {cb.netlist.outputs}"
        )


def _check_equiv_policy(ca: CompiledNetlist, cb: CompiledNetlist, policy: KeyPolicy) -> None:
    if not ca.key_idx and not cb.key_idx and policy.kind != "none":
        raise ValueError("key policy given but neither netlist has key inputs")
    for compiled in (ca, cb):
        if compiled.key_idx:
            check_policy(compiled, policy)


def _plane_lane(plane: tuple[int, int], lane: int) -> int | None:
    h, x = plane
    if (x >> lane) & 1:
        return None
    return (h >> lane) & 1


def _eval_state(sim: PlaneSim, state, planes, key_value, lanes: int):
    """Evaluate one cycle from a broadcast state over all input minterms."""
    sim.load_state(state)
    sim.step(planes, key_value, latch=False)
    outs = sim.output_planes()
    dff_planes = sim.next_state_planes()
    nexts = []
    for lane in range(lanes):
        nexts.append(tuple(_plane_lane(p, lane) for p in dff_planes))
    return outs, nexts


def check_equivalence_exhaustive(
    a: Netlist,
    b: Netlist,
    depth: int,
    key_policy: KeyPolicy | None = None,
    init: str = "zero",
    sequence_budget: int | None = 2**20,
    state_budget: int = 200_000,
) -> EquivVerdict:
    """Compare outputs over every input sequence of length <= depth.

    The key policy drives whichever side has key inputs. Unknown values
    compare equal to unknown; definite-vs-unknown counts as divergence.
    Raises :class:`BudgetExceededError` when ``(2**inputs)**depth`` exceeds
    `sequence_budget` (pass None to lift it; the sweep itself is bounded by
    reachable states, capped by `state_budget`).
    """
    policy = key_policy or KeyPolicy.none()
    ca, cb = CompiledNetlist(a), CompiledNetlist(b)
    _check_interfaces(ca, cb)
    _check_equiv_policy(ca, cb, policy)
    n = len(ca.nonkey_idx)
    if sequence_budget is not None and (2**n) ** depth > sequence_budget:
        raise BudgetExceededError(
            f"(2^{n})^{depth} sequences exceed budget {sequence_budget}; use random mode"
        )
    lanes = 1 << n
    planes = minterm_planes(n)
    sa = PlaneSim(a, lanes, ca)
    sb = PlaneSim(b, lanes, cb)
    output_names = list(a.outputs)

    # parents[i] = (previous entry, input lane taken); roots use entry -1
    parents: list[tuple[int, int | None]] = [(-1, None)]
    frontier = {(ca.initial_state(init), cb.initial_state(init)): 0}
    memo: dict = {}
    evals = 0
    for cycle in range(depth):
        kv_a = policy.key_value_at(cycle) if ca.key_idx else None
        kv_b = policy.key_value_at(cycle) if cb.key_idx else None
        next_frontier: dict = {}
        for (st_a, st_b), parent_idx in frontier.items():
            key = (st_a, st_b, kv_a, kv_b)
            cached = memo.get(key)
            if cached is None:
                evals += 1
                if evals > state_budget:
                    raise BudgetExceededError(
                        f"reachable-state budget {state_budget} exceeded; use random mode"
                    )
                outs_a, nexts_a = _eval_state(sa, st_a, planes, kv_a, lanes)
                outs_b, nexts_b = _eval_state(sb, st_b, planes, kv_b, lanes)
                divergence = None
                for oi, (pa, pb) in enumerate(zip(outs_a, outs_b)):
                    diff = (pa[0] ^ pb[0]) | (pa[1] ^ pb[1])
                    if diff:
                        lane = (diff & -diff).bit_length() - 1
                        divergence = (lane, oi, _plane_lane(pa, lane), _plane_lane(pb, lane))
                        break
                successors: dict = {}
                for lane in range(lanes):
                    successors.setdefault((nexts_a[lane], nexts_b[lane]), lane)
                memo[key] = (divergence, successors)
                cached = memo[key]
            divergence, successors = cached
            if divergence is not None:
                lane, oi, va, vb = divergence
                history = _input_history(parents, parent_idx, n)
                history.append(_lane_vector(lane, n))
                return EquivVerdict(
                    equivalent=False,
                    counterexample=Counterexample(
                        inputs=history,
                        cycle=cycle,
                        output=output_names[oi],
                        left_value=va,
                        right_value=vb,
                    ),
                    mode="exhaustive",
                    depth=depth,
                )
            for child, lane in successors.items():
                if child not in next_frontier:
                    parents.append((parent_idx, lane))
                    next_frontier[child] = len(parents) - 1
        frontier = next_frontier
    return EquivVerdict(equivalent=True, counterexample=None, mode="exhaustive", depth=depth)


def _lane_vector(lane: int, n_inputs: int) -> tuple[int, ...]:
    return tuple((lane >> i) & 1 for i in range(n_inputs))


def _input_history(parents, idx: int, n_inputs: int) -> list[tuple[int, ...]]:
    lanes = []
    while idx >= 0:
        prev, lane = parents[idx]
        if lane is not None:
            lanes.append(lane)
        idx = prev
    lanes.reverse()
    return [_lane_vector(lane, n_inputs) for lane in lanes]


def check_equivalence_random(
    a: Netlist,
    b: Netlist,
    sequences: int,
    cycles: int,
    seed: int,
    key_policy: KeyPolicy | None = None,
    init: str = "zero",
) -> EquivVerdict:
    """Compare outputs over `sequences` seeded random stimuli of `cycles` each."""
    policy = key_policy or KeyPolicy.none()
    ca, cb = CompiledNetlist(a), CompiledNetlist(b)
    _check_interfaces(ca, cb)
    _check_equiv_policy(ca, cb, policy)
    rng = random.Random(seed)
    n = len(ca.nonkey_idx)
    sa = PlaneSim(a, sequences, ca)
    sb = PlaneSim(b, sequences, cb)
    sa.reset(init)
    sb.reset(init)
    history: list[list[int]] = []
    for cycle in range(cycles):
        planes = [rng.getrandbits(sequences) for _ in range(n)]
        history.append(planes)
        kv_a = policy.key_value_at(cycle) if ca.key_idx else None
        kv_b = policy.key_value_at(cycle) if cb.key_idx else None
        sa.step(planes, kv_a)
        sb.step(planes, kv_b)
        for oi, (pa, pb) in enumerate(zip(sa.output_planes(), sb.output_planes())):
            diff = (pa[0] ^ pb[0]) | (pa[1] ^ pb[1])
            if diff:
                lane = (diff & -diff).bit_length() - 1
                inputs = [
                    tuple((history[c][i] >> lane) & 1 for i in range(n))
                    for c in range(cycle + 1)
                ]
                return EquivVerdict(
                    equivalent=False,
                    counterexample=Counterexample(
                        inputs=inputs,
                        cycle=cycle,
                        output=a.outputs[oi],
                        left_value=_plane_lane(pa, lane),
                        right_value=_plane_lane(pb, lane),
                    ),
                    mode="random",
                    depth=cycles,
                )
    return EquivVerdict(equivalent=True, counterexample=None, mode="random", depth=cycles)


def replay_counterexample(
    a: Netlist,
    b: Netlist,
    cex: Counterexample,
    key_policy: KeyPolicy | None = None,
    init: str = "zero",
) -> bool:
    """Re-simulate a counterexample; True when the reported divergence recurs."""
    policy = key_policy or KeyPolicy.none()

    def run(netlist: Netlist):
        compiled = CompiledNetlist(netlist)
        side_policy = policy if compiled.key_idx else KeyPolicy.none()
        stim = Stimulus(cycles=len(cex.inputs), inputs=tuple(cex.inputs), key_policy=side_policy)
        return simulate(netlist, stim, init=init)

    ta, tb = run(a), run(b)
    va = ta.value(cex.cycle, cex.output)
    vb = tb.value(cex.cycle, cex.output)
    return va != vb and (va, vb) == (cex.left_value, cex.right_value)


def corruption_rate(
    orig: Netlist,
    locked: Netlist,
    schedule: KeySchedule,
    overrides: dict[int, int],
    sequences: int,
    cycles: int,
    seed: int,
    init: str = "zero",
) -> float:
    """Fraction of (sequence, cycle, output-bit) observations where the locked
    circuit under a tampered key schedule differs from the original."""
    policy = (
        KeyPolicy.correct(schedule)
        if not overrides
        else KeyPolicy.tampered(schedule, overrides)
    )
    co, cl = CompiledNetlist(orig), CompiledNetlist(locked)
    _check_interfaces(co, cl)
    check_policy(cl, policy)
    rng = random.Random(seed)
    n = len(co.nonkey_idx)
    so = PlaneSim(orig, sequences, co)
    sl = PlaneSim(locked, sequences, cl)
    so.reset(init)
    sl.reset(init)
    differing = 0
    for cycle in range(cycles):
        planes = [rng.getrandbits(sequences) for _ in range(n)]
        so.step(planes, None)
        sl.step(planes, policy.key_value_at(cycle))
        for po, pl in zip(so.output_planes(), sl.output_planes()):
            differing = differing + ((po[0] ^ pl[0]) | (po[1] ^ pl[1])).bit_count()
    return differing / (sequences * cycles * len(orig.outputs))


def _pick_eq_mode(locked: Netlist, oracle: Netlist) -> str:
    compiled = CompiledNetlist(locked)
    if len(compiled.nonkey_idx) <= 6 and len(oracle.dffs) <= 8:
        return "exhaustive"
    return "random"


def _bounded_equivalent(
    oracle: Netlist,
    locked: Netlist,
    policy: KeyPolicy,
    mode: str,
    depth: int,
    seed: int,
    sequences: int,
    cycles: int,
) -> bool:
    if mode == "exhaustive":
        verdict = check_equivalence_exhaustive(
            oracle, locked, depth, key_policy=policy, sequence_budget=None
        )
    else:
        verdict = check_equivalence_random(
            oracle, locked, sequences, cycles, seed, key_policy=policy
        )
    return verdict.equivalent


def brute_force_attack(
    locked: Netlist,
    oracle: Netlist,
    num_keys: int,
    key_bits: int,
    depth: int = 8,
    candidate_budget: int = 2**20,
    mode: str = "auto",
    seed: int = 0,
    sequences: int = 256,
    cycles: int = 64,
) -> AttackResult:
    """Enumerate every length-`num_keys` key sequence against the oracle.

    A candidate survives when the locked circuit, driven with the candidate
    applied cyclically, is bounded-equivalent to the oracle: exhaustively to
    `depth` for small circuits (<= 6 non-key inputs and <= 8 oracle DFFs,
    unless `mode` overrides), otherwise over seeded random stimuli. The
    generating schedule always survives.
    """
    space = (2**key_bits) ** num_keys
    if space > candidate_budget:
        raise BudgetExceededError(f"key-sequence space {space} exceeds budget {candidate_budget}")
    if mode == "auto":
        mode = _pick_eq_mode(locked, oracle)
    survivors = []
    started = time.perf_counter()
    for candidate in product(range(2**key_bits), repeat=num_keys):
        schedule = KeySchedule(keys=candidate, width=key_bits)
        if _bounded_equivalent(
            oracle, locked, KeyPolicy.correct(schedule), mode, depth, seed, sequences, cycles
        ):
            survivors.append(candidate)
    return AttackResult(
        search_space_size=space,
        survivors=survivors,
        elapsed=time.perf_counter() - started,
        depth=depth,
        mode=mode,
        kind="sequence",
        key_bits=key_bits,
    )


def static_key_attack(
    locked: Netlist,
    oracle: Netlist,
    key_bits: int,
    depth: int = 8,
    candidate_budget: int = 2**20,
    mode: str = "auto",
    seed: int = 0,
    sequences: int = 256,
    cycles: int = 64,
) -> AttackResult:
    """Enumerate constant key values held across all cycles.

    When the generating schedule is itself constant, that constant survives;
    against a time-varying schedule the survivor set is typically empty,
    which is the point of multi-key locking.
    """
    space = 2**key_bits
    if space > candidate_budget:
        raise BudgetExceededError(f"static key space {space} exceeds budget {candidate_budget}")
    if mode == "auto":
        mode = _pick_eq_mode(locked, oracle)
    survivors = []
    started = time.perf_counter()
    for value in range(space):
        if _bounded_equivalent(
            oracle, locked, KeyPolicy.static(value), mode, depth, seed, sequences, cycles
        ):
            survivors.append(value)
    return AttackResult(
        search_space_size=space,
        survivors=survivors,
        elapsed=time.perf_counter() - started,
        depth=depth,
        mode=mode,
        kind="static",
        key_bits=key_bits,
    )


def _counts(netlist: Netlist) -> CircuitCounts:
    return CircuitCounts(
        gates=len(netlist.gates),
        dffs=len(netlist.dffs),
        inputs=len(netlist.inputs),
        outputs=len(netlist.outputs),
    )


def overhead_report(orig: Netlist, locked: Netlist, manifest: LockManifest) -> OverheadReport:
    """Exact added-cost report; raises ValueError when the manifest does not
    describe the locked netlist or the deltas break the closed form."""
    locked_nets = locked.net_names()
    orig_nets = orig.net_names()
    for net in (
        manifest.key_input_nets
        + manifest.counter_state_nets
        + manifest.onehot_time_nets
        + [ff.mux_tree_output_net for ff in manifest.locked_ffs]
    ):
        if net not in locked_nets:
            raise ValueError(f"manifest net '{net}' missing from locked netlist")
    locked_dff_inputs = {d.output: d.input for d in locked.dffs}
    orig_dff_inputs = {d.output: d.input for d in orig.dffs}
    fallback_ffs = 0
    for ff in manifest.locked_ffs:
        if locked_dff_inputs.get(ff.ff_output_net) != ff.mux_tree_output_net:
            raise ValueError(f"locked flip-flop '{ff.ff_output_net}' is not driven by its mux tree")
        if orig_dff_inputs.get(ff.ff_output_net) != ff.correct_d_net:
            raise ValueError(f"manifest correct_d_net mismatch for '{ff.ff_output_net}'")
        sources = set(ff.wrongful_source_nets.values())
        if ff.correct_d_net in sources:
            raise ValueError(f"wrongful map for '{ff.ff_output_net}' includes the correct net")
        if any(net not in locked_nets for net in sources):
            raise ValueError(f"wrongful source missing from locked netlist for '{ff.ff_output_net}'")
        if any(net not in orig_nets for net in sources):
            fallback_ffs += 1

    k = manifest.num_keys
    ki = manifest.key_bits
    original = _counts(orig)
    after = _counts(locked)
    delta = CircuitCounts(
        gates=after.gates - original.gates,
        dffs=after.dffs - original.dffs,
        inputs=after.inputs - original.inputs,
        outputs=after.outputs - original.outputs,
    )
    expected_gates = expected_added_gate_count(k, ki, len(manifest.locked_ffs), fallback_ffs)
    expected_width = k.bit_length() - 1
    if delta.gates != expected_gates:
        raise ValueError(f"added gate count {delta.gates} != closed form {expected_gates}")
    if delta.dffs != expected_width:
        raise ValueError(f"added DFF count {delta.dffs} != counter width {expected_width}")
    if delta.inputs != ki or delta.outputs != 0:
        raise ValueError("added I/O counts do not match the lock config")
    if manifest.layers != k.bit_length():
        raise ValueError("manifest layer count does not match num_keys")
    return OverheadReport(
        original=original,
        locked=after,
        delta=delta,
        per_ff_mux_count=added_mux_count(k, ki),
        key_inputs=ki,
        schedule_bits=k * ki,
        layers=manifest.layers,
    )
