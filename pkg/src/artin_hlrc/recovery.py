"""Three-level erasure recovery: fiber, middle group, whole code.

Every routine reads symbols only through ``ReceivedWord.__getitem__`` and
consults erasure flags through ``ReceivedWord.is_erased``, so access can be
audited by subclassing the word.  Feasibility is decided from the flags
before any symbol is read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import linalg
from .code import EvaluationCode, column_coordinate
from .errors import (
    InconsistentSamples,
    InsufficientLowerData,
    InsufficientMiddleData,
    RecoveryError,
    UnrecoverablePosition,
)
from .field import interpolate_univariate


class Level(IntEnum):
    LOWER = 1
    MIDDLE = 2
    GLOBAL = 3


class ReceivedWord:
    """Codeword symbols with erasures stored as ``None``."""

    def __init__(self, symbols, code_ref: str | None = None):
        self.symbols = [None if s is None else int(s) for s in symbols]
        self.code_ref = code_ref

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, pos: int) -> int:
        value = self.symbols[pos]
        if value is None:
            raise KeyError(f"position {pos} is erased")
        return value

    def is_erased(self, pos: int) -> bool:
        return self.symbols[pos] is None

    @property
    def erasures(self) -> list[int]:
        return [i for i, s in enumerate(self.symbols) if s is None]

    @classmethod
    def from_codeword(cls, codeword, erased=(), code_ref=None) -> "ReceivedWord":
        symbols = list(codeword)
        for i in erased:
            symbols[i] = None
        return cls(symbols, code_ref)

    def to_json(self, ctx) -> dict:
        return {
            "code_ref": self.code_ref,
            "symbols": [None if s is None else ctx.to_coeffs(s) for s in self.symbols],
        }

    @classmethod
    def from_json(cls, data: dict, ctx) -> "ReceivedWord":
        return cls([None if s is None else ctx.from_coeffs(s) for s in data["symbols"]], data.get("code_ref"))


@dataclass(frozen=True)
class RepairGroup:
    level: Level
    positions: tuple[int, ...]
    geometry: tuple


def lower_group(code: EvaluationCode, pos: int) -> RepairGroup:
    fid = code.index[pos].fiber_id
    return RepairGroup(Level.LOWER, code.fibers[fid], fid)


def middle_group(code: EvaluationCode, pos: int) -> RepairGroup:
    gid = code.index[pos].group_id
    return RepairGroup(Level.MIDDLE, code.groups[gid], gid)


def _lower(code: EvaluationCode, received: ReceivedWord, pos: int, read: list[int]) -> int:
    ctx = code.ctx
    need = code.spec.lower_degree + 1
    known = [i for i in code.fiber_positions(pos) if not received.is_erased(i)][:need]
    if len(known) < need:
        raise InsufficientLowerData(f"fiber of {pos} has {len(known)} known symbols, needs {need}")
    read.extend(known)
    samples = [(code.points[i].y, received[i]) for i in known]
    poly = interpolate_univariate(ctx, samples, need - 1)
    return poly.evaluate(ctx, code.points[pos].y)


def recover_lower(code: EvaluationCode, received: ReceivedWord, pos: int) -> int:
    """Restore one symbol from its fiber by interpolation in y.

    Reads exactly p - rho2 + 1 known symbols of the fiber.
    """
    return _lower(code, received, pos, [])


def _middle(code: EvaluationCode, received: ReceivedWord, group: RepairGroup, read: list[int]) -> list:
    ctx = code.ctx
    spec = code.spec
    positions = group.positions
    erased = [i for i in positions if received.is_erased(i)]
    if not erased:
        return []

    a = spec.lower_degree
    D = spec.middle_degree
    columns: dict[int, list[int]] = {}
    for i in positions:
        columns.setdefault(column_coordinate(group.geometry, code.points[i]), []).append(i)
    good = []
    for alpha in sorted(columns):
        known = [i for i in columns[alpha] if not received.is_erased(i)]
        if len(known) >= a + 1:
            good.append((alpha, known[: a + 1]))
    if len(good) < D + 1:
        raise InsufficientMiddleData(f"{len(good)} recoverable columns, need {D + 1}")

    col_coeffs = []
    for alpha, known in good[: D + 1]:
        samples = [(code.points[i].y, received[i]) for i in known]
        read.extend(known)
        poly = interpolate_univariate(ctx, samples, a)
        col_coeffs.append((alpha, [poly.coeff(j) for j in range(a + 1)]))
    g_j = [
        interpolate_univariate(ctx, [(alpha, cs[j]) for alpha, cs in col_coeffs], D)
        for j in range(a + 1)
    ]

    at_column: dict[int, list[int]] = {}

    def g(pt) -> int:
        u = column_coordinate(group.geometry, pt)
        cs = at_column.get(u)
        if cs is None:
            cs = at_column[u] = [gj.evaluate(ctx, u) for gj in g_j]
        acc = 0
        for c in reversed(cs):
            acc = ctx.add(ctx.mul(acc, pt.y), c)
        return acc

    seen = set(read)
    for i in positions:
        if i in seen or received.is_erased(i):
            continue
        read.append(i)
        if g(code.points[i]) != received[i]:
            raise InconsistentSamples(f"position {i} disagrees with the reconstructed group polynomial")
    return [(i, g(code.points[i])) for i in erased]


def recover_middle(code: EvaluationCode, received: ReceivedWord, group: RepairGroup) -> list[tuple[int, int]]:
    """Fill every erasure of a middle group by layered interpolation.

    Columns of the group (fixed x, or fixed z on the x = 0 plane) with enough
    known symbols give the coefficients g_j(alpha) of g(alpha, y); the
    smallest D + 1 such columns determine each g_j; the rebuilt g is then
    evaluated at the erasures and checked against every other known symbol.
    """
    return _middle(code, received, group, [])


def _global(code: EvaluationCode, received: ReceivedWord, read: list[int]) -> list[int]:
    ctx = code.ctx
    known = [i for i in range(code.n) if not received.is_erased(i)]
    read.extend(known)
    values = np.array([received[i] for i in known], dtype=np.int64)
    message = linalg.solve(ctx, code.G[:, known].T, values)
    word = ctx.vsum(ctx.vmul(message[:, None], code.G), axis=0)
    return word.tolist()


def recover_global(code: EvaluationCode, received: ReceivedWord) -> list[int]:
    """Decode the unique codeword agreeing with all known symbols."""
    return _global(code, received, [])


@dataclass
class RepairTrace:
    position: int
    level: Level | None = None
    symbols_read_by_level: dict = field(default_factory=dict)
    success: bool = False
    value: int | None = None

    @property
    def symbols_read(self) -> int:
        return sum(self.symbols_read_by_level.values())

    def to_json(self) -> dict:
        return {
            "position": self.position,
            "level": None if self.level is None else self.level.name,
            "symbols_read_by_level": {lvl.name: n for lvl, n in sorted(self.symbols_read_by_level.items())},
            "success": self.success,
        }


def repair(code: EvaluationCode, received: ReceivedWord, pos: int,
           policy: Level = Level.GLOBAL) -> tuple[int, RepairTrace]:
    """Repair one erased position, escalating LOWER -> MIDDLE -> GLOBAL.

    ``policy`` is the highest level allowed.

    Raises:
        UnrecoverablePosition: every permitted level failed; the trace is
            attached as ``exc.trace``.
    """
    if not received.is_erased(pos):
        raise ValueError(f"position {pos} is not erased")
    trace = RepairTrace(pos)
    for level in Level:
        if level > policy:
            break
        reads: list[int] = []
        try:
            if level is Level.LOWER:
                value = _lower(code, received, pos, reads)
            elif level is Level.MIDDLE:
                value = dict(_middle(code, received, middle_group(code, pos), reads))[pos]
            else:
                value = _global(code, received, reads)[pos]
        except (RecoveryError, InconsistentSamples):
            trace.symbols_read_by_level[level] = len(reads)
            continue
        trace.symbols_read_by_level[level] = len(reads)
        trace.level, trace.success, trace.value = level, True, value
        return value, trace
    exc = UnrecoverablePosition(f"position {pos} not recoverable up to level {Level(policy).name}")
    exc.trace = trace
    raise exc


def repair_all(code: EvaluationCode, received: ReceivedWord, policy: Level = Level.GLOBAL,
               sequential: bool = False) -> tuple[ReceivedWord, list[RepairTrace]]:
    """Repair every erasure of ``received``; unrecoverable positions stay erased.

    In parallel mode (the default) each repair sees the original erasure
    pattern.  Sequential mode writes each recovered symbol back before the
    next repair.
    """
    work = ReceivedWord(received.symbols, received.code_ref)
    out = ReceivedWord(received.symbols, received.code_ref)
    traces = []
    for pos in received.erasures:
        try:
            value, trace = repair(code, work, pos, policy)
        except UnrecoverablePosition as exc:
            traces.append(exc.trace)
            continue
        traces.append(trace)
        out.symbols[pos] = value
        if sequential:
            work.symbols[pos] = value
    return out, traces
