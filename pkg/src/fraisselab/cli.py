"""Command-line front end.

Every command prints a one-line human summary. With ``-o PATH`` (or ``--json``
for stdout) it also emits a JSON report ``{"manifest": ..., "report": ...}``.
The report body depends only on the inputs and flags, never on timing.

Exit codes: 0 success or the checked property holds, 1 the property was
checked and fails, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from typing import Sequence

from . import __version__
from . import classes, flow, limit, measure, ramsey
from . import structures as st
from .errors import WorkbenchError
from .structures import Embedding, FinStructure

log = logging.getLogger("fraisselab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _Run:
    """Per-invocation state: input digests and the reported caps."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.caps: dict[str, int] = {}

    def load(self, path: str):
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise WorkbenchError(f"cannot read {path}: {exc.strerror}") from None
        self.inputs[path] = hashlib.sha256(raw).hexdigest()
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise WorkbenchError(f"{path}: malformed JSON at line {exc.lineno}, "
                                 f"column {exc.colno} (char {exc.pos}): {exc.msg}") from None
        except UnicodeDecodeError as exc:
            raise WorkbenchError(f"{path}: not UTF-8 at byte {exc.start}") from None
        # accept our own reports as inputs
        if isinstance(data, dict) and set(data) == {"manifest", "report"}:
            data = data["report"]
        return data

    def structure(self, path: str) -> FinStructure:
        data = self.load(path)
        if isinstance(data, dict) and "structure" in data and "signature" not in data:
            data = data["structure"]
        return _decode(FinStructure.from_json, data, path)

    def prefix(self, path: str) -> limit.LimitPrefix:
        data = self.load(path)
        if isinstance(data, dict) and "structure" in data:
            return _decode(limit.LimitPrefix.from_json, data, path)
        raise WorkbenchError(f"{path}: expected a prefix exported by 'limit'")


def _decode(fn, data, path):
    try:
        return fn(data)
    except WorkbenchError as exc:
        raise type(exc)(f"{path}: {exc.args[0]}") from None
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise WorkbenchError(f"{path}: invalid content ({exc.__class__.__name__}: {exc})") from None


def _map(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise WorkbenchError(f"bad embedding map {text!r}; expected comma-separated integers") from None


def _embedding(source: FinStructure, target: FinStructure, text: str | None, name: str) -> Embedding:
    mapping = _map(text)
    if mapping is None:
        embs = st.enumerate_embeddings(source, target)
        if not embs:
            raise WorkbenchError(f"{name}: no embedding exists")
        return embs[0]
    return Embedding(source, target, mapping)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, summary line, report body)

def cmd_arrow(run: _Run):
    a = run.args
    B, A, pi = run.structure(a.B), run.structure(a.A), run.structure(a.pi)
    run.caps["pattern_cap"] = a.cap
    v = ramsey.arrow_check(B, A, pi, a.r, cap=a.cap, threads=a.threads)
    if v.holds:
        return 0, f"holds: B -> (A)^pi_{a.r}", v.to_json()
    return 1, f"fails: bad {a.r}-colouring of {len(v.bad_coloring)} copies of pi", v.to_json()


def cmd_witness(run: _Run):
    a = run.args
    cls = classes.builtin_class(a.cls)
    A, pi = run.structure(a.A), run.structure(a.pi)
    run.caps.update(pattern_cap=a.cap, size_cap=a.size_cap)
    found = ramsey.find_ramsey_witness(cls, A, pi, a.r, a.size_cap, cap=a.cap, threads=a.threads)
    if found is None:
        return 1, f"no witness up to size {a.size_cap}", {"found": False, "size_cap": a.size_cap}
    B, v = found
    return 0, f"witness of size {B.size}", {"found": True, "B": B.to_json(), "verdict": v.to_json()}


def cmd_ordering(run: _Run):
    a = run.args
    cls = classes.builtin_class(a.cls)
    A0 = run.structure(a.A0)
    run.caps["size_cap"] = a.size_cap
    found = ramsey.ordering_property_check(cls, A0, a.size_cap)
    if found is None:
        return 1, f"no B0 up to size {a.size_cap}", {"found": False, "size_cap": a.size_cap}
    B0, cert = found
    return 0, f"B0 of size {B0.size}", {"found": True, "certificate": cert.to_json()}


def cmd_limit(run: _Run):
    a = run.args
    P = limit.build_limit(classes.builtin_class(a.cls), a.n, seed=a.seed)
    return 0, f"{a.cls} prefix on {P.size} points, {len(P.certificates)} certificates", P.to_json()


def cmd_iso(run: _Run):
    a = run.args
    C, D = run.prefix(a.C), run.prefix(a.D)
    p = limit.back_and_forth(C, D, a.steps)
    return 0, f"partial isomorphism with {len(p.pairs)} pairs", p.to_json()


def cmd_measure(run: _Run):
    a = run.args
    E = _decode(measure.OrderEvent.from_json, run.load(a.event), a.event)
    run.caps["support_cap"] = measure.SUPPORT_CAP
    exact, approx = measure.mu_exact(E), measure.mu_approx(E, a.k)
    return 0, f"{exact} (exact), {approx} (dyadic)", {"exact": str(exact), "dyadic": str(approx), "k": a.k}


def cmd_flow(run: _Run):
    a = run.args
    if a.flow_cmd == "check":
        cls = classes.builtin_class(a.cls)
        data = run.load(a.prefix)
        if isinstance(data, dict) and "certificates" in data:
            P = _decode(limit.LimitPrefix.from_json, data, a.prefix).structure
        else:
            P = _decode(FinStructure.from_json, data, a.prefix)
        xi = _decode(measure.OrderPrefix.from_json, run.load(a.order), a.order)
        rep = flow.flow_membership(cls, P, xi)
        if rep.member:
            return 0, "member", rep.to_json()
        return 1, f"not a member: fails on {list(rep.failing_subset)}", rep.to_json()
    if a.flow_cmd == "decay":
        table = flow.decay_table(classes.builtin_class(a.cls), a.n, k=a.k)
        last = table.rows[-1]
        return 0, f"level measure at n = {last.n}: {last.level}", table.to_json()
    return cmd_stats(run)


def cmd_stats(run: _Run):
    a = run.args
    rep = flow.density_statistics(a.n, a.trials, a.seed)
    ok = all(r.within_3sigma for r in rep.rows)
    text = "; ".join(f"{r.name} {r.frequency:.4f} vs {r.exact}" for r in rep.rows) or "no trials"
    return (0 if ok else 1), text, rep.to_json()


def cmd_age(run: _Run):
    a = run.args
    cls = classes.builtin_class(a.cls)
    age = classes.enumerate_age(cls, a.n)
    counts = [len(age.grade(i)) for i in range(a.n + 1)]
    return 0, f"{len(age)} types; by size {counts}", {"class": cls.name, "max_size": a.n,
                                                       "counts": counts, "members": age.to_json()}


def cmd_amalgamate(run: _Run):
    a = run.args
    cls = classes.builtin_class(a.cls)
    A, B1, B2 = run.structure(a.A), run.structure(a.B1), run.structure(a.B2)
    f1 = _embedding(A, B1, a.f1, "f1")
    f2 = _embedding(A, B2, a.f2, "f2")
    C, g1, g2 = classes.amalgamate(cls, A, B1, B2, f1, f2)
    return 0, f"amalgam on {C.size} points", {"C": C.to_json(), "g1": list(g1.map), "g2": list(g2.map)}


# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("-o", "--output", help="write the JSON report to this path")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    p.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fraisselab", description="Fraisse classes, Ramsey arrows and order measures.")
    parser.add_argument("--version", action="version", version=f"fraisselab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("arrow", help="decide B -> (A)^pi_r")
    p.add_argument("--B", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--pi", required=True)
    p.add_argument("-r", type=int, default=2)
    p.add_argument("--cap", type=int, default=ramsey.DEFAULT_PATTERN_CAP)
    p.set_defaults(fn=cmd_arrow)

    p = sub.add_parser("witness", help="search the age for a Ramsey witness")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--pi", required=True)
    p.add_argument("-r", type=int, default=2)
    p.add_argument("--size-cap", type=int, default=7)
    p.add_argument("--cap", type=int, default=ramsey.DEFAULT_PATTERN_CAP)
    p.set_defaults(fn=cmd_witness)

    p = sub.add_parser("ordering", help="search for an ordering-property witness")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--A0", required=True)
    p.add_argument("--size-cap", type=int, default=5)
    p.set_defaults(fn=cmd_ordering)

    p = sub.add_parser("limit", help="build a Fraisse-limit prefix")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_limit)

    p = sub.add_parser("iso", help="back-and-forth between two prefixes")
    p.add_argument("--C", required=True)
    p.add_argument("--D", required=True)
    p.add_argument("--steps", type=int, default=8)
    p.set_defaults(fn=cmd_iso)

    p = sub.add_parser("measure", help="exact and dyadic measure of an order event")
    p.add_argument("--event", required=True)
    p.add_argument("-k", type=int, default=10)
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser("flow", help="discerning-flow checks")
    fsub = p.add_subparsers(dest="flow_cmd", parser_class=_Parser, required=True)
    q = fsub.add_parser("check")
    q.add_argument("--class", dest="cls", required=True)
    q.add_argument("--prefix", required=True)
    q.add_argument("--order", required=True)
    q = fsub.add_parser("decay")
    q.add_argument("--class", dest="cls", default="OrderedPoset")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("-k", type=int, default=20)
    q = fsub.add_parser("stats")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("--trials", type=int, default=10000)
    q.add_argument("--seed", type=int, default=0)
    for q in fsub.choices.values():
        _common(q)
    p.set_defaults(fn=cmd_flow)

    p = sub.add_parser("stats", help="sampler statistics (same as 'flow stats')")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("age", help="enumerate a class's age")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("-n", type=int, required=True)
    p.set_defaults(fn=cmd_age)

    p = sub.add_parser("amalgamate", help="amalgamate B1 and B2 over A")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--B1", required=True)
    p.add_argument("--B2", required=True)
    p.add_argument("--f1", help="map of A into B1 as comma-separated images (default: first embedding)")
    p.add_argument("--f2", help="map of A into B2")
    p.set_defaults(fn=cmd_amalgamate)

    for name, p in sub.choices.items():
        if name != "flow":
            _common(p)
    return parser


def render(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:          # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    run = _Run(args)
    start = time.perf_counter()
    try:
        code, summary, body = args.fn(run)
    except WorkbenchError as exc:
        msg = str(exc)
        print(msg if msg.startswith(exc.code) else f"error: {msg}", file=sys.stderr)
        return 2
    manifest = {"command": ["fraisselab", *argv], "seed": getattr(args, "seed", None),
                "caps": run.caps, "version": __version__, "inputs": run.inputs,
                "wall_time": round(time.perf_counter() - start, 6)}
    doc = {"manifest": manifest, "report": body}
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(render(doc))
    if args.json:
        sys.stdout.write(render(doc))
    else:
        print(summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
