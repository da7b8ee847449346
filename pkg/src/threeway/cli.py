"""Command-line front end: JSON instance files in, JSON or text reports out.

Exit status is 0 whenever a computation completes (whatever the answer),
2 on bad input and 3 when a state or node cap is exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import lp, oracle, reductions, transfer
from .tables import (
    Dims3,
    EntryIndex,
    OneMarginals,
    Table3,
    TwoMarginals,
    check_consistency,
    frechet_upper,
)

EXIT_OK, EXIT_INPUT, EXIT_CAP = 0, 2, 3

KEYS = ("dims", "two_marginals", "one_marginals", "upper_bounds", "embedding_spec")


class InstanceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class InstanceFile:
    dims: Dims3
    two_marginals: TwoMarginals | None = None
    one_marginals: OneMarginals | None = None
    upper_bounds: Table3 | None = None
    embedding_spec: dict | None = None

    def to_dict(self) -> dict:
        d: dict = {"dims": list(self.dims)}
        if self.two_marginals is not None:
            m = self.two_marginals
            d["two_marginals"] = {"ij": m.ij.tolist(), "ik": m.ik.tolist(), "jk": m.jk.tolist()}
        if self.one_marginals is not None:
            u = self.one_marginals
            d["one_marginals"] = {"i": u.i.tolist(), "j": u.j.tolist(), "k": u.k.tolist()}
        if self.upper_bounds is not None:
            d["upper_bounds"] = self.upper_bounds.tolist()
        if self.embedding_spec is not None:
            d["embedding_spec"] = self.embedding_spec
        return d

    def __eq__(self, other):
        if not isinstance(other, InstanceFile):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _int_matrix(value, shape, where: str) -> list:
    """Validate a nested list of nonnegative ints with the given shape."""

    def walk(v, depth, path):
        if depth == len(shape):
            if isinstance(v, bool) or not isinstance(v, int):
                raise InstanceError(f"{where}{path}: expected a nonnegative integer, got {v!r}")
            if v < 0:
                raise InstanceError(f"{where}{path}: negative entry {v}")
            return v
        if not isinstance(v, list) or len(v) != shape[depth]:
            got = len(v) if isinstance(v, list) else type(v).__name__
            raise InstanceError(
                f"{where}{path}: expected {shape[depth]} entries along axis {depth + 1}, got {got}"
                f" (shape must be {'x'.join(map(str, shape))})"
            )
        label = ("row", "column", "layer")[depth] if len(shape) > 1 else "entry"
        return [walk(x, depth + 1, f"{path} {label} {n + 1}") for n, x in enumerate(v)]

    return walk(value, 0, "")


def parse_instance(text: str) -> InstanceFile:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise InstanceError("instance must be a JSON object")
    unknown = sorted(set(d) - set(KEYS))
    if unknown:
        raise InstanceError(f"unknown keys {unknown}; allowed: {list(KEYS)}")
    dims = d.get("dims")
    if (
        not isinstance(dims, list)
        or len(dims) != 3
        or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in dims)
    ):
        raise InstanceError(f"dims must be three positive integers, got {dims!r}")
    r, c, h = dims
    if not any(k in d for k in KEYS[1:4]):
        raise InstanceError("instance needs two_marginals, one_marginals or upper_bounds")
    two = one = ub = None
    if "two_marginals" in d:
        tm = d["two_marginals"]
        if not isinstance(tm, dict) or set(tm) != {"ij", "ik", "jk"}:
            raise InstanceError("two_marginals must have exactly the keys ij, ik, jk")
        faces = {
            name: _int_matrix(tm[name], shape, f"two_marginals.{name}")
            for name, shape in (("ij", (r, c)), ("ik", (r, h)), ("jk", (c, h)))
        }
        two = TwoMarginals(faces["ij"], faces["ik"], faces["jk"])
    if "one_marginals" in d:
        om = d["one_marginals"]
        if not isinstance(om, dict) or set(om) != {"i", "j", "k"}:
            raise InstanceError("one_marginals must have exactly the keys i, j, k")
        vecs = {
            name: _int_matrix(om[name], (n,), f"one_marginals.{name}")
            for name, n in (("i", r), ("j", c), ("k", h))
        }
        one = OneMarginals(vecs["i"], vecs["j"], vecs["k"])
    if "upper_bounds" in d:
        ub = Table3(_int_matrix(d["upper_bounds"], (r, c, h), "upper_bounds"))
    spec = d.get("embedding_spec")
    if spec is not None:
        if not isinstance(spec, dict) or "kind" not in spec:
            raise InstanceError("embedding_spec must be an object with a 'kind'")
        if spec["kind"] in ("embedding", "gadget-frechet"):
            try:
                emb = reductions.EmbeddingSpec.from_dict(spec)
            except (KeyError, TypeError, ValueError) as exc:
                raise InstanceError(f"embedding_spec: {exc}") from None
            if tuple(emb.target_dims) != (r, c, h):
                raise InstanceError(
                    f"embedding_spec targets dims {tuple(emb.target_dims)}, instance has {(r, c, h)}"
                )
    return InstanceFile(Dims3(r, c, h), two, one, ub, spec)


def _dump(v, indent=0) -> str:
    pad = "  " * indent
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {_dump(x, indent + 1).lstrip()}' for k, x in v.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(v, list) and any(isinstance(x, (list, dict)) for x in v):
        items = [f"{pad}  {_dump(x, indent + 1)}" for x in v]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    return json.dumps(v)


def write_instance(inst: InstanceFile) -> str:
    return _dump(inst.to_dict()) + "\n"


# ---------------------------------------------------------------- rendering


def _grid(rows, row_labels, col_labels) -> list[str]:
    cells = [[str(x) for x in row] for row in rows]
    w = max([len(s) for row in cells for s in row] + [len(s) for s in col_labels] + [1])
    lw = max([len(s) for s in row_labels] + [0])
    out = [" " * lw + " | " + " ".join(s.rjust(w) for s in col_labels)]
    out.append("-" * len(out[0]))
    for label, row in zip(row_labels, cells):
        out.append(label.ljust(lw) + " | " + " ".join(s.rjust(w) for s in row))
    return out


def render_instance(inst: InstanceFile) -> str:
    r, c, h = inst.dims
    lines = [f"dims: ({r}, {c}, {h})"]
    spec = inst.embedding_spec
    labeled = spec is not None and spec.get("kind") in ("embedding", "gadget-frechet")
    if inst.two_marginals is not None:
        m = inst.two_marginals
        if labeled:
            emb = reductions.EmbeddingSpec.from_dict(spec)
            pairs, gro = emb.pair_labels(), emb.third_axis_labels()
            t = ["1", "2", "3"]
            lines += ["", "v_{+,ij,gro k}"] + _grid(m.jk.T, gro, pairs)
            lines += ["", "v_{t,ij,+}"] + _grid(m.ij, t, pairs)
            lines += ["", "v_{t,+,gro k}"] + _grid(m.ik.T, gro, t)
        else:
            idx = lambda n: [str(x) for x in range(1, n + 1)]  # noqa: E731
            lines += ["", "v_{i,j,+}"] + _grid(m.ij, idx(r), idx(c))
            lines += ["", "v_{i,+,k}"] + _grid(m.ik, idx(r), idx(h))
            lines += ["", "v_{+,j,k}"] + _grid(m.jk, idx(c), idx(h))
    if inst.one_marginals is not None:
        u = inst.one_marginals
        lines += ["", f"u_i = {u.i.tolist()}", f"u_j = {u.j.tolist()}", f"u_k = {u.k.tolist()}"]
    if inst.upper_bounds is not None:
        P = inst.upper_bounds.entries
        for k in range(h):
            lines += ["", f"upper bounds, layer k={k + 1}"]
            lines += _grid(P[:, :, k], [str(i) for i in range(1, r + 1)], [str(j) for j in range(1, c + 1)])
    if spec is not None:
        extra = {k: v for k, v in spec.items() if k not in ("one_marginals", "upper_bounds")}
        lines += ["", "spec: " + json.dumps(extra)]
    return "\n".join(lines)


def render_report(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    ans = report["answer"]
    if isinstance(ans, dict) and "dims" in ans:
        lines.append(render_instance(parse_instance(json.dumps(ans))))
    elif isinstance(ans, dict) and "witness" in ans:
        lines.append(f"feasible: {ans['feasible']}")
        if ans["witness"] is not None:
            W = ans["witness"]
            for k in range(len(W[0][0])):
                lines.append(f"witness layer k={k + 1}")
                lines += _grid(
                    [[W[i][j][k] for j in range(len(W[0]))] for i in range(len(W))],
                    [str(i + 1) for i in range(len(W))],
                    [str(j + 1) for j in range(len(W[0]))],
                )
    else:
        lines.append(f"answer: {json.dumps(ans)}")
    for key, val in report.get("diagnostics", {}).items():
        lines.append(f"{key}: {json.dumps(val)}")
    if "timing_s" in report:
        lines.append(f"time: {report['timing_s']:.3f}s")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- commands


def _need(inst: InstanceFile | None, *fields) -> InstanceFile:
    if inst is None:
        raise InstanceError("this command needs an instance file")
    missing = [f for f in fields if getattr(inst, f) is None]
    if missing:
        raise InstanceError(f"instance is missing required block(s): {', '.join(missing)}")
    return inst


def _entry(args, dims) -> EntryIndex:
    if not args.entry:
        raise InstanceError("--entry i,j,k is required")
    try:
        e = EntryIndex(*(int(x) for x in args.entry.split(",")))
    except (TypeError, ValueError):
        raise InstanceError(f"--entry must be three comma-separated integers, got {args.entry!r}") from None
    try:
        e.zero_based(dims)
    except IndexError as exc:
        raise InstanceError(str(exc)) from None
    return e


def _matrix(args) -> list[list[int]]:
    if not args.matrix:
        raise InstanceError('--matrix is required, e.g. --matrix "1,1;0,1"')
    try:
        rows = [[int(x) for x in row.split(",")] for row in args.matrix.split(";")]
    except ValueError:
        raise InstanceError(f"cannot parse --matrix {args.matrix!r}") from None
    return rows


def _instance_answer(m: TwoMarginals, spec: dict | None) -> dict:
    return InstanceFile(m.dims, two_marginals=m, embedding_spec=spec).to_dict()


def _limits(args) -> oracle.EnumLimits:
    return oracle.EnumLimits(max_tables=args.node_cap, max_nodes=args.node_cap)


def _consistency_diag(m: TwoMarginals) -> dict:
    rep = check_consistency(m)
    return {
        "consistent": rep.consistent,
        "violations": [
            {"equation": list(eq), "lhs": str(a), "rhs": str(b)} for eq, a, b in rep.violations
        ],
    }


def _frac(v: Fraction) -> str:
    return str(v)


def run(command: str, args, inst: InstanceFile | None) -> dict:
    """Dispatch ``command``; returns the report (without timing)."""
    diag: dict = {}
    answer = None
    if command == "check":
        m = _need(inst, "two_marginals").two_marginals
        rep = check_consistency(m)
        answer = {"consistent": rep.consistent, "total": None if rep.total is None else str(rep.total)}
        diag = _consistency_diag(m)
    elif command in ("exists", "count"):
        m = _need(inst, "two_marginals").two_marginals
        diag = _consistency_diag(m)
        n = transfer.count_tables(m, args.state_cap)
        answer = n > 0 if command == "exists" else str(n)
    elif command == "entry-range":
        m = _need(inst, "two_marginals").two_marginals
        e = _entry(args, m.dims)
        diag = _consistency_diag(m)
        diag["frechet_upper"] = str(frechet_upper(m, e))
        answer = sorted(transfer.entry_value_set(m, e, args.state_cap))
    elif command == "reduce-3dm":
        p = _need(inst, "upper_bounds").upper_bounds
        m, spec = reductions.reduce_3dm(p)
        answer = _instance_answer(m, spec.to_dict())
    elif command == "reduce-permanent":
        m = reductions.permanent_marginals(_matrix(args))
        if m is None:
            answer = None
            diag["trivially_infeasible"] = "matrix has a zero row or column; permanent is 0"
        else:
            answer = _instance_answer(m, {"kind": "permanent"})
    elif command == "embed":
        inst = _need(inst, "one_marginals", "upper_bounds")
        m, spec = reductions.embed_bounds(inst.one_marginals, inst.upper_bounds)
        answer = _instance_answer(m, spec.to_dict())
    elif command == "gadget-zero":
        m = _need(inst, "two_marginals").two_marginals
        g, spec = reductions.secure_zero_gadget(m)
        answer = _instance_answer(g, spec.to_dict())
    elif command == "gadget-frechet":
        p = _need(inst, "upper_bounds").upper_bounds
        g, spec = reductions.secure_frechet_gadget(p)
        answer = _instance_answer(g, spec.to_dict())
    elif command == "gen":
        u, p = {"vlach": reductions.vlach_instance, "example21": reductions.example21_instance}[args.which]()
        if args.embed:
            m, spec = reductions.embed_bounds(u, p)
            answer = _instance_answer(m, spec.to_dict())
        else:
            answer = InstanceFile(p.dims, one_marginals=u, upper_bounds=p).to_dict()
    elif command == "lp":
        if inst is not None and inst.two_marginals is not None:
            system = lp.transportation_system(inst.two_marginals)
        else:
            inst = _need(inst, "one_marginals", "upper_bounds")
            system = lp.bounded_system(inst.one_marginals, inst.upper_bounds)
        res = lp.lp_feasible(system)
        witness = None
        if res.witness is not None:
            witness = [[[_frac(v) for v in row] for row in plane] for plane in res.witness.entries.tolist()]
        answer = {"feasible": res.feasible, "witness": witness}
        diag = {"rows": len(system.rows), "variables": system.n_vars, "pivots": res.pivots}
    elif command == "oracle":
        op, lim = args.op, _limits(args)
        if op in ("count", "exists", "entry-range"):
            m = _need(inst, "two_marginals").two_marginals
            if op == "count":
                answer = str(oracle.brute_count(m, lim))
            elif op == "exists":
                answer = oracle.brute_exists(m, lim)
            else:
                answer = sorted(oracle.brute_entry_set(m, _entry(args, m.dims), lim))
        elif op == "3dm":
            answer = oracle.brute_3dm(_need(inst, "upper_bounds").upper_bounds)
        elif op == "permanent":
            answer = str(oracle.ryser_permanent(_matrix(args)))
        command = f"oracle {op}"
    else:  # pragma: no cover - argparse restricts choices
        raise InstanceError(f"unknown command {command!r}")
    if command == "gen":
        command = f"gen {args.which}"
    return {"command": command, "answer": answer, "diagnostics": diag}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--entry", help="1-based cell i,j,k")
    common.add_argument("--state-cap", type=int, default=transfer.DEFAULT_CAP)
    common.add_argument("--node-cap", type=int, default=oracle.DEFAULT_LIMITS.max_nodes)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--output", help="write the emitted instance (or the report) to this path")
    common.add_argument("--matrix", help='0/1 matrix rows separated by ";", e.g. "1,1;0,1"')
    common.add_argument("--timing", action="store_true", help="add wall-clock time to the report")

    parser = argparse.ArgumentParser(prog="threeway", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (
        "check", "exists", "count", "entry-range", "reduce-3dm", "reduce-permanent",
        "embed", "gadget-zero", "gadget-frechet", "lp",
    ):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("input", nargs="?", help="instance JSON file, or - for stdin")
    p = sub.add_parser("gen", parents=[common])
    p.add_argument("which", choices=("vlach", "example21"))
    p.add_argument("--embed", action="store_true", help="emit the embedded slim 2-marginals")
    p = sub.add_parser("oracle", parents=[common])
    p.add_argument("op", choices=("count", "exists", "entry-range", "3dm", "permanent"))
    p.add_argument("input", nargs="?", help="instance JSON file, or - for stdin")
    return parser


def _read_input(path: str | None) -> tuple[InstanceFile | None, str | None]:
    if path is None:
        return None, None
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    inst = parse_instance(text)
    digest = hashlib.sha256(write_instance(inst).encode()).hexdigest()
    return inst, digest


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        inst, digest = _read_input(getattr(args, "input", None))
        report = run(args.command, args, inst)
    except (transfer.CapExceeded, oracle.LimitExceeded) as exc:
        print(json.dumps({"command": args.command, "error": "cap exceeded", "detail": str(exc)}))
        return EXIT_CAP
    except (InstanceError, ValueError, IndexError, OSError) as exc:
        print(json.dumps({"command": args.command, "error": "input error", "detail": str(exc)}))
        return EXIT_INPUT
    report = {"command": report["command"], "input_digest": digest, **{k: report[k] for k in ("answer", "diagnostics")}}
    if args.timing:
        report["timing_s"] = round(time.perf_counter() - start, 6)
    text = json.dumps(report, indent=2) + "\n" if args.format == "json" else render_report(report)
    emitted = report["answer"] if isinstance(report["answer"], dict) and "dims" in report["answer"] else None
    if args.output and emitted is not None:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(write_instance(parse_instance(json.dumps(emitted))))
    elif args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
