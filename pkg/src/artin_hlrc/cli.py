"""Command-line front end: ``artin-hlrc <verb> [options]``.

Every verb parses its flags, calls one library routine and serializes the
result.  Exit statuses: 0 success, 2 usage, 3 invalid spec or input file,
4 verification mismatch, 5 recovery failure, 6 budget exceeded, 7 file I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .code import (
    CodeSpec,
    brute_force_min_distance,
    build_code,
    encode,
    family_spec,
    hierarchy_params,
    random_message,
    verify_family,
)
from .errors import HLRCError, MalformedInput
from .geometry import Family, verify_family_counts
from .recovery import Level, ReceivedWord, repair_all
from .storage_sim import (
    FailureScenario,
    ScenarioKind,
    SimulationConfig,
    build_layout,
    inject_failures,
    run_config,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISMATCH = 4
EXIT_RECOVERY = 5
EXIT_IO = 7

VERBS = ("params", "points", "verify", "build", "encode", "corrupt", "recover", "mindist", "simulate")


class UsageError(HLRCError):
    exit_code = EXIT_USAGE


@dataclass(frozen=True)
class Command:
    verb: str
    options: dict


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


_HELP = {
    "params": (
        "Print (n, k, d) of the full code and (length, dimension, distance) of the "
        "middle and lower punctured codes.",
        "Lengths and dimensions come from the built evaluation set and basis. "
        "Distance columns are the designed lower bounds: rho1*rho2 for the middle "
        "code, rho2 for a fiber, and the family's closed form for the full code "
        "((rho1+rho2-3)p + rho1+rho2 for ex4, min(rho1*rho2, p(rho1+rho2)-p^2) for "
        "ex5, min #Z_gamma - nu(eta-rho1+p-rho2) otherwise).",
    ),
    "points": (
        "Enumerate the surface over F_{p^2} and compare its point counts with the closed forms.",
        "Totals: ex4 2p^4-2p^3+2p^2-p, ex5 2p^3-p, ex5l (Tr lambda != 0) p^4+p^3-p^2-p, "
        "ex4l one of (p^2-p)(p-1)^2 and (p^2-p)(p-1)^2 + 2p^2(p-1). Also checks fiber "
        "shapes (x-supports, fiber sizes). Exits 4 if a stated closed form fails.",
    ),
    "verify": (
        "Run the point-count checks plus the code-length and dimension claims of the family.",
        "ex4: full length 2p^4-3p^3+2p^2-p and middle length <= 2p^2-p, with the "
        "proof-line length 2p^4-3p^3-2p-2 reported as a finding. ex5: length 2p^3-p "
        "and the lower-code dimension (stated p-rho2, generic bound p-rho2+1) "
        "reported with ranks as a finding. ex5l: length p(p+1)(p^2-1). Exits 4 only "
        "when a stated closed form fails.",
    ),
    "build": (
        "Construct the evaluation code and write it as JSON (spec, basis, points T, generator G).",
        "Parameters are validated against the construction's hypotheses first.",
    ),
    "encode": (
        "Encode a message (file or seeded random) into a codeword JSON file.",
        "The codeword is sum_r m_r * monomial_r evaluated at every point of T.",
    ),
    "corrupt": (
        "Erase positions of a codeword, either listed explicitly or drawn by a seeded failure scenario.",
        "Erased symbols become null in the output file.",
    ),
    "recover": (
        "Repair every erasure, escalating from the fiber to the middle group to the whole code.",
        "A fiber repair reads p-rho2+1 symbols of its fiber; a middle repair interpolates "
        "the group polynomial from complete columns; a global repair solves the full "
        "linear system. Exits 5 if any position stays erased.",
    ),
    "mindist": (
        "Compute the exact minimum distance by enumerating all messages and check it against the designed bound.",
        "Refused with exit 6 when q^k exceeds the budget (--budget or ARTIN_HLRC_BUDGET). "
        "Exits 4 if the exact distance is below the bound.",
    ),
    "simulate": (
        "Run a seeded storage-repair simulation from a JSON scenario config.",
        "Output is a JSON repair report (per position: node, level, symbols read) and "
        "optionally a one-row CSV summary. Random draws use numpy's PCG64.",
    ),
}


def _add_family_args(sp, need_code: bool = True) -> None:
    sp.add_argument("--family", required=True, choices=[f.value for f in Family if f is not Family.CUSTOM])
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", default=None,
                    help="shift constant: element index or comma-separated coefficients (constant first)")
    if need_code:
        sp.add_argument("--rho1", type=int, required=True)
        sp.add_argument("--rho2", type=int, required=True)
        sp.add_argument("--eta", type=int, default=None, help="x-support threshold (ex5l, ex4l)")
        sp.add_argument("--rho3", type=int, default=None, help="z-degree bound (ex4l)")


def build_parser() -> _Parser:
    parser = _Parser(prog="artin-hlrc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB", parser_class=_Parser)

    def verb(name):
        summary, detail = _HELP[name]
        return sub.add_parser(name, help=summary, description=f"{summary} {detail}")

    sp = verb("params")
    _add_family_args(sp)
    sp.add_argument("--json", type=Path, help="also write the report as JSON")

    for name in ("points", "verify"):
        sp = verb(name)
        _add_family_args(sp, need_code=False)
        sp.add_argument("--json", type=Path, help="write the full report as JSON")
        sp.add_argument("--csv", type=Path, help="write one row per gamma as CSV")

    sp = verb("build")
    _add_family_args(sp)
    sp.add_argument("--out", type=Path, help="output file (default stdout)")

    sp = verb("encode")
    sp.add_argument("--code", type=Path, required=True)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--message", type=Path, help='JSON file {"message": [coeffs, ...]}')
    src.add_argument("--seed", type=int, help="draw a random message with this seed")
    sp.add_argument("--out", type=Path)

    sp = verb("corrupt")
    sp.add_argument("--code", type=Path, required=True)
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    how = sp.add_mutually_exclusive_group(required=True)
    how.add_argument("--positions", help="comma-separated positions to erase")
    how.add_argument("--scenario", choices=[k.value for k in ScenarioKind])
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--nodes", type=int, default=None, help="node count for random_nodes (default p)")
    sp.add_argument("--out", type=Path)

    sp = verb("recover")
    sp.add_argument("--code", type=Path, required=True)
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    sp.add_argument("--policy", choices=[lvl.name.lower() for lvl in Level], default="global",
                    help="highest level allowed")
    sp.add_argument("--sequential", action="store_true", help="feed each repaired symbol to later repairs")
    sp.add_argument("--out", type=Path)

    sp = verb("mindist")
    _add_family_args(sp)
    sp.add_argument("--budget", type=int, default=None, help="max number of messages q^k to enumerate")

    sp = verb("simulate")
    sp.add_argument("--config", type=Path, required=True)
    sp.add_argument("--json", type=Path, help="output file (default stdout)")
    sp.add_argument("--csv", type=Path, help="write a one-row CSV summary")
    sp.add_argument("--label", default="", help="label column of the CSV row")
    return parser


def parse(argv) -> Command:
    """Validate ``argv`` into a Command; raises UsageError on bad input."""
    opts = vars(build_parser().parse_args(list(argv)))
    return Command(opts.pop("verb"), opts)


# -- i/o helpers ---------------------------------------------------------------


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(path: Path | None, text: str, out) -> None:
    if path is None:
        out.write(text)
    else:
        path.write_text(text)


def _read_json(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: not valid JSON ({exc})") from exc


def _lam(opts):
    raw = opts.get("lam")
    if raw is None:
        return None
    parts = [int(v) for v in raw.split(",")]
    return parts if len(parts) > 1 else parts[0]


def _spec(opts) -> CodeSpec:
    return family_spec(opts["family"], opts["p"], opts["rho1"], opts["rho2"],
                       eta=opts.get("eta"), rho3=opts.get("rho3"), lam=_lam(opts))


def load_code(path: Path):
    """Rebuild a code from its JSON file and check the stored generator matrix."""
    data = _read_json(path)
    try:
        code = build_code(CodeSpec.from_json(data["spec"]))
        ctx = code.ctx
        stored = np.array([[ctx.from_coeffs(v) for v in row] for row in data["G"]], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    if stored.shape != code.G.shape or not np.array_equal(stored, code.G):
        raise MalformedInput(f"{path}: stored generator matrix does not match the spec")
    return code


def load_word(path: Path, code) -> ReceivedWord:
    data = _read_json(path)
    try:
        word = ReceivedWord.from_json(data, code.ctx)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    if len(word) != code.n:
        raise MalformedInput(f"{path}: {len(word)} symbols, code length is {code.n}")
    if word.code_ref not in (None, code.spec.ref):
        raise MalformedInput(f"{path}: word belongs to {word.code_ref}, not {code.spec.ref}")
    return word


# -- verbs ---------------------------------------------------------------------


def _params(opts, out) -> int:
    report = hierarchy_params(_spec(opts))
    out.write(report.to_table())
    if opts["json"]:
        _write(opts["json"], dumps(report.to_json()), out)
    return EXIT_OK


def _emit_counts(report, opts, out) -> int:
    for c in report.checks:
        rel = "=" if c["ok"] else "!="
        out.write(f"{c['name']} [{c['kind']}]: {c['expected']} {rel} {c['observed']}\n")
    for f in report.findings:
        rest = ", ".join(f"{k}={v}" for k, v in f.items() if k not in ("name", "kind"))
        out.write(f"finding: {f['name']} ({rest})\n")
    for m in report.mismatches:
        out.write(f"MISMATCH: {m}\n")
    if opts["json"]:
        _write(opts["json"], dumps(report.to_json()), out)
    if opts["csv"]:
        _write(opts["csv"], report.to_csv(), out)
    return EXIT_OK if report.ok else EXIT_MISMATCH


def _points(opts, out) -> int:
    return _emit_counts(verify_family_counts(opts["family"], opts["p"], _lam(opts)), opts, out)


def _verify(opts, out) -> int:
    return _emit_counts(verify_family(opts["family"], opts["p"], _lam(opts)), opts, out)


def _build(opts, out) -> int:
    code = build_code(_spec(opts))
    _write(opts["out"], dumps(code.to_json()), out)
    return EXIT_OK


def _encode(opts, out) -> int:
    code = load_code(opts["code"])
    ctx = code.ctx
    if opts["message"] is not None:
        data = _read_json(opts["message"])
        try:
            message = [ctx.from_coeffs(c) for c in data["message"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"{opts['message']}: {exc}") from exc
    else:
        message = random_message(code, np.random.Generator(np.random.PCG64(opts["seed"])))
    word = ReceivedWord(encode(code, message), code.spec.ref)
    _write(opts["out"], dumps(word.to_json(ctx)), out)
    return EXIT_OK


def _corrupt(opts, out) -> int:
    code = load_code(opts["code"])
    word = load_word(opts["inp"], code)
    if opts["positions"] is not None:
        try:
            erased = [int(v) for v in opts["positions"].split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"--positions: {exc}") from exc
        bad = [i for i in erased if not 0 <= i < code.n]
        if bad:
            raise UsageError(f"--positions out of range 0..{code.n - 1}: {bad}")
        received = ReceivedWord.from_codeword(word.symbols, erased, word.code_ref)
    else:
        nodes = opts["nodes"] if opts["nodes"] is not None else code.spec.p
        layout = build_layout(code, nodes)
        scenario = FailureScenario(ScenarioKind(opts["scenario"]), opts["count"], opts["seed"])
        received = inject_failures(layout, code, scenario, word.symbols)
        received.code_ref = word.code_ref
    _write(opts["out"], dumps(received.to_json(code.ctx)), out)
    return EXIT_OK


def _recover(opts, out) -> int:
    code = load_code(opts["code"])
    received = load_word(opts["inp"], code)
    repaired, traces = repair_all(code, received, Level[opts["policy"].upper()], opts["sequential"])
    doc = repaired.to_json(code.ctx)
    doc["traces"] = [t.to_json() for t in traces]
    _write(opts["out"], dumps(doc), out)
    failed = [t.position for t in traces if not t.success]
    if failed:
        print(f"error: {len(failed)} position(s) unrecoverable up to {opts['policy']}: {failed}", file=sys.stderr)
        return EXIT_RECOVERY
    return EXIT_OK


def _mindist(opts, out) -> int:
    spec = _spec(opts)
    code = build_code(spec)
    d = brute_force_min_distance(code, opts["budget"])
    bound = hierarchy_params(spec).d_lower
    ok = d >= bound
    out.write(f"n={code.n} k={code.k} d={d}\n")
    out.write(f"bound d >= {bound}: {'ok' if ok else 'VIOLATED'}\n")
    return EXIT_OK if ok else EXIT_MISMATCH


def _simulate(opts, out) -> int:
    data = _read_json(opts["config"])
    try:
        config = SimulationConfig.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{opts['config']}: {exc}") from exc
    report = run_config(config)
    _write(opts["json"], report.dumps(), out)
    if opts["csv"]:
        _write(opts["csv"], report.to_csv(opts["label"]), out)
    return EXIT_OK


_HANDLERS = {
    "params": _params, "points": _points, "verify": _verify, "build": _build,
    "encode": _encode, "corrupt": _corrupt, "recover": _recover,
    "mindist": _mindist, "simulate": _simulate,
}


def execute(cmd: Command, out=None) -> int:
    return _HANDLERS[cmd.verb](cmd.options, sys.stdout if out is None else out)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return execute(parse(argv))
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except HLRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:  # out-of-range parameters rejected by the library
        print(f"error: {exc}", file=sys.stderr)
        return MalformedInput.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
