"""Clock-cycle cost model for synchronous hardware schedules.

The model mirrors how a statement-level HDL schedules work: every
assignment takes exactly one clock cycle, statements under a parallel
block run in the same cycles (the block costs as much as its longest
branch), sequential composition adds up, and loop or block control
contributes no cycles of its own.

Statement trees may share subtrees; ``cycles`` only reads them.  A
line-oriented text form (one node per line, children indented two spaces)
supports golden-file comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

SCHEDULE_VARIANTS = ("sequential", "red_black")

DEFAULT_ASSIGNS_PER_UPDATE = 6


def _check_stmt(node: "Stmt") -> None:
    if not isinstance(node, (Assign, Seq, Par, Loop)):
        raise TypeError(f"not a statement node: {node!r}")


@dataclass(frozen=True)
class Assign:
    """One register assignment: exactly one clock cycle."""


@dataclass(frozen=True)
class Seq:
    """Children execute one after another."""

    children: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        for c in self.children:
            _check_stmt(c)


@dataclass(frozen=True)
class Par:
    """Children execute simultaneously, sharing the same clock cycles."""

    children: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        for c in self.children:
            _check_stmt(c)


@dataclass(frozen=True)
class Loop:
    """Body repeated ``trips`` times; the loop control itself is free."""

    trips: int
    body: "Stmt"

    def __post_init__(self) -> None:
        if not isinstance(self.trips, int) or self.trips < 0:
            raise ValueError(f"trips must be a nonnegative integer, got {self.trips!r}")
        _check_stmt(self.body)


Stmt = Union[Assign, Seq, Par, Loop]


def cycles(stmt: Stmt) -> int:
    """Exact clock-cycle count of a statement tree.

    Assign costs 1; Seq sums its children; Par costs the maximum child
    (0 when empty, like an empty Seq); Loop multiplies its body by the
    trip count.  Counts are exact Python integers, never floats.
    """
    if isinstance(stmt, Assign):
        return 1
    if isinstance(stmt, Seq):
        return sum(cycles(c) for c in stmt.children)
    if isinstance(stmt, Par):
        return max((cycles(c) for c in stmt.children), default=0)
    if isinstance(stmt, Loop):
        return stmt.trips * cycles(stmt.body)
    raise TypeError(f"not a statement node: {stmt!r}")


@dataclass(frozen=True)
class ClockSpec:
    """Clock frequency in hertz."""

    frequency: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.frequency) and self.frequency > 0.0):
            raise ValueError("frequency must be positive and finite")


def model_time(stmt: Stmt, clock: ClockSpec) -> float:
    """Modelled execution time in seconds: cycles / frequency."""
    return cycles(stmt) / clock.frequency


def build_sor_schedule(
    n: int,
    variant: str,
    sweeps: int,
    assigns_per_update: int = DEFAULT_ASSIGNS_PER_UPDATE,
) -> Stmt:
    """Schedule of an SOR solver on an n-by-n grid of cell updates.

    Each cell update is a fixed burst of ``assigns_per_update`` assignment
    cycles.  The "sequential" variant relaxes the n^2 cells one after
    another inside every sweep.  The "red_black" variant runs two phases
    per sweep, each a Par over one colour class, so a sweep costs two
    bursts regardless of n and the sequential/parallel cycle ratio is
    exactly n^2 / 2 for n >= 2.

    The cell subtree is shared, keeping the tree small in memory even for
    large grids.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if sweeps < 0:
        raise ValueError("sweeps must be nonnegative")
    if assigns_per_update < 1:
        raise ValueError("assigns_per_update must be at least 1")
    if variant not in SCHEDULE_VARIANTS:
        raise ValueError(f"variant must be one of {SCHEDULE_VARIANTS}, got {variant!r}")
    cell = Seq((Assign(),) * assigns_per_update)
    if variant == "sequential":
        sweep: Stmt = Seq((cell,) * (n * n))
    else:
        reds = (n * n + 1) // 2
        blacks = (n * n) // 2
        sweep = Seq((Par((cell,) * reds), Par((cell,) * blacks)))
    return Loop(sweeps, sweep)


def to_text(stmt: Stmt) -> str:
    """Serialise a statement tree; inverse of ``parse_text``."""
    lines: list[str] = []

    def emit(node: Stmt, level: int) -> None:
        pad = "  " * level
        if isinstance(node, Assign):
            lines.append(pad + "assign")
        elif isinstance(node, Seq):
            lines.append(pad + "seq")
            for c in node.children:
                emit(c, level + 1)
        elif isinstance(node, Par):
            lines.append(pad + "par")
            for c in node.children:
                emit(c, level + 1)
        elif isinstance(node, Loop):
            lines.append(pad + f"loop {node.trips}")
            emit(node.body, level + 1)
        else:
            raise TypeError(f"not a statement node: {node!r}")

    emit(stmt, 0)
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> Stmt:
    """Parse the line-oriented form produced by ``to_text``.

    Raises
    ------
    ValueError
        On unknown node names, bad indentation, a childless or
        multi-child loop, or children under an assign; messages carry
        the offending line number.
    """
    entries: list[tuple[int, str, int | None, int]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        body = raw.lstrip(" ")
        indent = len(raw) - len(body)
        if indent % 2:
            raise ValueError(f"line {ln}: indentation must be a multiple of two spaces")
        parts = body.split()
        kind = parts[0]
        if kind == "loop":
            if len(parts) != 2:
                raise ValueError(f"line {ln}: loop needs exactly one trip count")
            try:
                trips = int(parts[1])
            except ValueError:
                raise ValueError(f"line {ln}: bad trip count {parts[1]!r}") from None
            entries.append((indent // 2, kind, trips, ln))
        elif kind in ("assign", "seq", "par"):
            if len(parts) != 1:
                raise ValueError(f"line {ln}: {kind} takes no arguments")
            entries.append((indent // 2, kind, None, ln))
        else:
            raise ValueError(f"line {ln}: unknown statement {kind!r}")
    if not entries:
        raise ValueError("empty schedule text")

    def build(pos: int, level: int) -> tuple[Stmt, int]:
        indent, kind, arg, ln = entries[pos]
        if indent != level:
            raise ValueError(f"line {ln}: expected indentation level {level}, got {indent}")
        pos += 1
        children: list[Stmt] = []
        while pos < len(entries) and entries[pos][0] > level:
            if entries[pos][0] != level + 1:
                raise ValueError(f"line {entries[pos][3]}: unexpected indentation")
            child, pos = build(pos, level + 1)
            children.append(child)
        if kind == "assign":
            if children:
                raise ValueError(f"line {ln}: assign cannot have children")
            return Assign(), pos
        if kind == "seq":
            return Seq(tuple(children)), pos
        if kind == "par":
            return Par(tuple(children)), pos
        if len(children) != 1:
            raise ValueError(f"line {ln}: loop needs exactly one body statement")
        return Loop(arg, children[0]), pos

    root, end = build(0, 0)
    if end != len(entries):
        raise ValueError(f"line {entries[end][3]}: trailing statements after the root")
    return root
