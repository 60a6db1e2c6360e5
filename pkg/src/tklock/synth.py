"""Deterministic random sequential netlists for tests and the bundled corpus.

Circuits are built gate by gate over already-defined nets, so the
combinational graph is acyclic by construction. Fanin selection prefers
not-yet-read nets and any still-unread nets are promoted to extra primary
outputs, which keeps the result free of dangling-net warnings.
"""

from __future__ import annotations

import random

from .circuit import Dff, Gate, Netlist

_BINARY_KINDS = ("AND", "NAND", "OR", "NOR", "XOR", "XNOR")


def random_netlist(
    seed: int,
    n_inputs: int,
    n_dffs: int,
    n_gates: int,
    n_outputs: int,
    name: str = "random",
) -> Netlist:
    """Build a valid sequential netlist with exactly `n_gates` gates."""
    if n_inputs < 1 or n_dffs < 0 or n_gates < 1 or n_outputs < 1:
        raise ValueError("all size parameters must be positive")
    rng = random.Random(seed)
    inputs = [f"I{i}" for i in range(n_inputs)]
    dff_outputs = [f"Q{i}" for i in range(n_dffs)]
    pool = inputs + dff_outputs
    unread = set(pool)

    def pick() -> str:
        if unread and rng.random() < 0.7:
            net = rng.choice(sorted(unread))
        else:
            net = rng.choice(pool)
        unread.discard(net)
        return net

    gates: list[Gate] = []
    for g in range(n_gates):
        out = f"N{g}"
        if rng.random() < 0.12:
            kind = "NOT" if rng.random() < 0.75 else "BUF"
            fanins = (pick(),)
        else:
            kind = rng.choice(_BINARY_KINDS)
            arity = 3 if rng.random() < 0.15 else 2
            first = pick()
            rest = []
            for _ in range(arity - 1):
                net = rng.choice(pool)
                while net == first and len(pool) > 1:
                    net = rng.choice(pool)
                unread.discard(net)
                rest.append(net)
            fanins = (first, *rest)
        gates.append(Gate(output=out, kind=kind, fanins=fanins))
        pool.append(out)
        unread.add(out)

    dffs = []
    for i in range(n_dffs):
        d = pick()
        dffs.append(Dff(output=f"Q{i}", input=d))

    outputs: list[str] = []
    candidates = [g.output for g in gates]
    for _ in range(min(n_outputs, len(candidates))):
        stale = [net for net in candidates if net in unread]
        net = rng.choice(sorted(stale)) if stale else rng.choice(candidates)
        while net in outputs:
            net = rng.choice(candidates)
        outputs.append(net)
        unread.discard(net)
    # promote anything still unread so nothing dangles
    outputs += sorted(unread)

    return Netlist(
        name=name,
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        gates=tuple(gates),
        dffs=tuple(dffs),
    )
