"""Deterministic storage-repair simulation.

Codeword positions are placed on storage nodes, a failure scenario erases
symbols, and every erased position is repaired through the hierarchy.

Random draws use numpy's PCG64 bit generator seeded with the scenario seed
(``numpy.random.Generator(numpy.random.PCG64(seed))``).  Draws are made with
``Generator.choice(..., replace=False)`` and then sorted, so a given
(kind, count, seed, layout) always erases the same positions.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .code import EvaluationCode, build_code, encode, family_spec
from .errors import InvalidScenario, TooFewNodes
from .recovery import Level, ReceivedWord, RepairTrace, repair_all

RNG_NAME = "pcg64"


class LayoutPolicy(str, Enum):
    STRIPE = "stripe"  # fiber symbols round-robin over distinct nodes
    FIBER = "fiber"  # a whole fiber on one node; the bad layout, for contrast


class ScenarioKind(str, Enum):
    RANDOM_NODES = "random_nodes"
    RANDOM_SYMBOLS = "random_symbols"
    TARGETED_GROUP = "targeted_group"


@dataclass(frozen=True)
class NodeLayout:
    node_count: int
    assignment: tuple[int, ...]

    def positions_on(self, nodes) -> list[int]:
        nodes = set(nodes)
        return [i for i, node in enumerate(self.assignment) if node in nodes]


@dataclass(frozen=True)
class FailureScenario:
    kind: ScenarioKind
    count: int
    seed: int

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "count": self.count, "seed": self.seed}

    @classmethod
    def from_json(cls, data: dict) -> "FailureScenario":
        return cls(ScenarioKind(data["kind"]), int(data["count"]), int(data["seed"]))


@dataclass(frozen=True)
class RepairPolicy:
    max_level: Level = Level.GLOBAL
    sequential: bool = False
    layout: LayoutPolicy = LayoutPolicy.STRIPE

    def to_json(self) -> dict:
        return {"max_level": self.max_level.name.lower(), "sequential": self.sequential,
                "layout": self.layout.value}

    @classmethod
    def from_json(cls, data) -> "RepairPolicy":
        if data is None:
            return cls()
        if isinstance(data, str):
            return cls(max_level=Level[data.upper()])
        return cls(
            Level[data.get("max_level", "global").upper()],
            bool(data.get("sequential", False)),
            LayoutPolicy(data.get("layout", "stripe")),
        )


def build_layout(code: EvaluationCode, node_count: int,
                 policy: LayoutPolicy = LayoutPolicy.STRIPE) -> NodeLayout:
    p = code.spec.p
    if node_count < p:
        raise TooFewNodes(f"{node_count} nodes cannot hold a fiber of {p} symbols on distinct nodes")
    assignment = [0] * code.n
    policy = LayoutPolicy(policy)
    slot = 0
    for f, positions in enumerate(code.fibers.values()):
        for pos in positions:
            if policy is LayoutPolicy.STRIPE:
                assignment[pos] = slot % node_count
                slot += 1
            else:
                assignment[pos] = f % node_count
    return NodeLayout(node_count, tuple(assignment))


def inject_failures(layout: NodeLayout, code: EvaluationCode, scenario: FailureScenario,
                    codeword) -> ReceivedWord:
    """Erase the symbols a scenario takes out of ``codeword``.

    TARGETED_GROUP picks one middle group at random and erases ``count`` of
    its symbols, whole fibers first, starting from a random fiber.
    """
    rng = np.random.Generator(np.random.PCG64(scenario.seed))
    kind, count = ScenarioKind(scenario.kind), scenario.count
    if count < 0:
        raise InvalidScenario("count must be non-negative")
    if kind is ScenarioKind.RANDOM_NODES:
        if count > layout.node_count:
            raise InvalidScenario(f"cannot fail {count} of {layout.node_count} nodes")
        nodes = rng.choice(layout.node_count, size=count, replace=False)
        erased = layout.positions_on(int(v) for v in nodes)
    elif kind is ScenarioKind.RANDOM_SYMBOLS:
        if count > code.n:
            raise InvalidScenario(f"cannot erase {count} of {code.n} symbols")
        erased = sorted(int(v) for v in rng.choice(code.n, size=count, replace=False))
    else:
        group_ids = list(code.groups)
        gid = group_ids[int(rng.integers(len(group_ids)))]
        fids = list(dict.fromkeys(code.index[i].fiber_id for i in code.groups[gid]))
        if count > len(code.groups[gid]):
            raise InvalidScenario(f"group has only {len(code.groups[gid])} symbols")
        start = int(rng.integers(len(fids)))
        order = [i for f in fids[start:] + fids[:start] for i in code.fibers[f]]
        erased = sorted(order[:count])
    return ReceivedWord.from_codeword(codeword, erased)


@dataclass
class RepairReport:
    per_position: list[RepairTrace] = field(default_factory=list)
    nodes: dict[int, int] = field(default_factory=dict)

    @property
    def totals(self) -> dict:
        hist = {lvl.name: 0 for lvl in Level}
        for t in self.per_position:
            if t.success:
                hist[t.level.name] += 1
        recovered = sum(1 for t in self.per_position if t.success)
        return {
            "recovered": recovered,
            "unrecoverable": len(self.per_position) - recovered,
            "symbols_read": sum(t.symbols_read for t in self.per_position),
            "level_histogram": hist,
        }

    def to_json(self) -> dict:
        rows = []
        for t in sorted(self.per_position, key=lambda t: t.position):
            row = t.to_json()
            row["node"] = self.nodes.get(t.position)
            rows.append(row)
        return {"per_position": rows, "totals": self.totals}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def csv_row(self, label: str = "") -> dict:
        tot = self.totals
        row = {"label": label, "erased": len(self.per_position)}
        row.update({k: tot[k] for k in ("recovered", "unrecoverable", "symbols_read")})
        row.update({f"level_{k.lower()}": v for k, v in tot["level_histogram"].items()})
        return row

    def to_csv(self, label: str = "") -> str:
        row = self.csv_row(label)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()


def simulate_repair(code: EvaluationCode, layout: NodeLayout, received: ReceivedWord,
                    policy: RepairPolicy = RepairPolicy()) -> RepairReport:
    """Repair every erased position and aggregate the traces per node."""
    _, traces = repair_all(code, received, policy.max_level, policy.sequential)
    report = RepairReport(traces)
    report.nodes = {t.position: layout.assignment[t.position] for t in traces}
    return report


@dataclass(frozen=True)
class SimulationConfig:
    family: str
    p: int
    rho1: int
    rho2: int
    nodes: int
    scenario: FailureScenario
    policy: RepairPolicy = RepairPolicy()
    eta: int | None = None
    message_seed: int = 0
    rng: str = RNG_NAME

    @classmethod
    def from_json(cls, data: dict) -> "SimulationConfig":
        rng = data.get("rng", RNG_NAME)
        if rng != RNG_NAME:
            raise InvalidScenario(f"unsupported generator {rng!r}; only {RNG_NAME!r}")
        return cls(
            data["family"], int(data["p"]), int(data["rho1"]), int(data["rho2"]), int(data["nodes"]),
            FailureScenario.from_json(data["scenario"]), RepairPolicy.from_json(data.get("policy")),
            data.get("eta"), int(data.get("message_seed", 0)), rng,
        )

    def to_json(self) -> dict:
        return {
            "family": self.family, "p": self.p, "rho1": self.rho1, "rho2": self.rho2,
            "eta": self.eta, "nodes": self.nodes, "scenario": self.scenario.to_json(),
            "policy": self.policy.to_json(), "message_seed": self.message_seed, "rng": self.rng,
        }


def run_config(config: SimulationConfig, code: EvaluationCode | None = None) -> RepairReport:
    """Build the code, encode a seeded random message, inject failures, repair."""
    if code is None:
        code = build_code(family_spec(config.family, config.p, config.rho1, config.rho2, eta=config.eta))
    rng = np.random.Generator(np.random.PCG64(config.message_seed))
    word = encode(code, rng.integers(0, code.ctx.q, size=code.k))
    layout = build_layout(code, config.nodes, config.policy.layout)
    received = inject_failures(layout, code, config.scenario, word)
    return simulate_repair(code, layout, received, config.policy)
