"""Access to the bundled benchmark corpus.

`s27` is the standard ISCAS'89 benchmark. The `b*_like` circuits are
synthetic stand-ins generated by ``scripts/build_corpus.py`` (via
:mod:`tklock.synth`) and size-matched to ITC'99 circuits of the same stem;
the originals are not redistributed here. KISS2 machines include the
four-state "1001" sequence detector used throughout the tests.
"""

from __future__ import annotations

from importlib import resources

from .circuit import Netlist, parse_bench
from .fsm import Fsm, parse_kiss2


def _root():
    return resources.files(__package__) / "corpus"


def available(suffix: str) -> list[str]:
    """Names (without extension) of bundled files with the given suffix."""
    names = [
        entry.name.removesuffix(suffix)
        for entry in _root().iterdir()
        if entry.name.endswith(suffix)
    ]
    return sorted(names)


def available_benches() -> list[str]:
    return available(".bench")


def available_machines() -> list[str]:
    return available(".kiss2")


def read_text(filename: str) -> str:
    return (_root() / filename).read_text(encoding="utf-8")


def load_bench(name: str) -> Netlist:
    return parse_bench(read_text(f"{name}.bench"), name=name)


def load_kiss2(name: str) -> Fsm:
    return parse_kiss2(read_text(f"{name}.kiss2"))
