"""Command-line driver.

Exit codes: 0 when every check passes, 1 when a mathematical falsifier is
found, 2 for usage, parse and IO errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import catalog, serialize
from . import dsl
from .dialg import (
    BlockContext,
    DialgebraInstance,
    PreconditionError,
    bracket_image_rank,
    check_dialgebra_axioms,
    check_involution,
    check_right_leibniz,
    differential_dialgebra,
    dminus_bracket,
    free_dialgebra,
    matrix_dialgebra,
    subalgebra_structure_constants,
)
from .embed import ClosureError, STAR_MODES, build_U, build_U2
from .exactlin import GF, QQ, Field, _is_prime
from .kp import compare_chain_sets, kp_apply
from .structures import DEFAULT_EVAL_CAP, EvalCapExceeded, Report, UnresolvedOperation
from .trisystems import (
    NotAComplementError,
    TrisystemInstance,
    ann_subspace,
    att1_from_dialgebra,
    att2_from_dialgebra,
    check_variety,
    complement_basis,
    complement_closure_check,
    jtd_products,
    leibts_bracket,
)

OK, FALSIFIED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: str = "matrix"
    gens: int = 5
    deg: int = 5
    m: int = 2
    m1: int = 1
    p: int | None = 5
    complex_like: bool = False
    dim: int = 2
    source: str | None = None
    mode: str = "auto"
    seed: int | None = None
    count: int = 100
    cap: int | None = None
    fmt: str = "text"
    timing: bool = True

    def validate(self) -> None:
        if self.mode == "sampled" and self.seed is None:
            raise UsageError("sampled mode needs --seed")
        if self.p is not None and (self.p == 2 or not _is_prime(self.p)):
            raise UsageError(f"--p must be an odd prime, got {self.p}")
        if self.cap is not None and self.cap < 1:
            raise UsageError("--cap must be at least 1")
        if self.model == "file" and not self.source:
            raise UsageError("--model file needs --from")

    @property
    def field(self) -> Field:
        return QQ if self.p is None else GF(self.p)

    @property
    def check_kw(self) -> dict:
        kw = {"count": self.count, "seed": self.seed}
        if self.cap is not None:
            kw["cap"] = self.cap
        return kw


def _config(args) -> RunConfig:
    p = getattr(args, "p", 5)
    cfg = RunConfig(
        command=args.command,
        model=getattr(args, "model", None) or ("file" if getattr(args, "source", None) else "matrix"),
        gens=getattr(args, "gens", 5),
        deg=getattr(args, "deg", 5),
        m=getattr(args, "m", 2),
        m1=getattr(args, "m1", 1),
        p=None if p == 0 else p,
        complex_like=getattr(args, "complex", False),
        dim=getattr(args, "dim", 2),
        source=getattr(args, "source", None),
        mode=getattr(args, "mode", "auto"),
        seed=getattr(args, "seed", None),
        count=getattr(args, "count", 100),
        cap=getattr(args, "cap", None),
        fmt=getattr(args, "format", "text"),
        timing=not getattr(args, "no_timing", False),
    )
    cfg.validate()
    return cfg


# -- models ----------------------------------------------------------------


def _differential_example(f: Field) -> DialgebraInstance:
    """span{1, x, y} with all products of x, y zero and d(x) = y."""
    mult = f.zeros((3, 3, 3))
    for i in range(3):
        mult[0, i, i] = f.raw(1)
        mult[i, 0, i] = f.raw(1)
    d = f.zeros((3, 3))
    d[1, 2] = f.raw(1)
    return differential_dialgebra(f, mult, d, ["1", "x", "y"])


def build_model(cfg: RunConfig, involution: bool = False):
    """The dialgebra (or, for files, whatever the file holds) named by ``cfg``."""
    if cfg.model == "free":
        return free_dialgebra(cfg.gens, cfg.deg, paired=involution)
    if cfg.model == "matrix":
        return matrix_dialgebra(BlockContext(cfg.m, cfg.m1, cfg.p, cfg.complex_like))
    if cfg.model == "differential":
        return _differential_example(cfg.field)
    if cfg.model == "zero":
        f, n = cfg.field, cfg.dim
        return DialgebraInstance(f, f.zeros((n, n, n)), f.zeros((n, n, n)), f.zeros((n, n)), None, "zero")
    if cfg.model == "file":
        return _load(cfg.source)
    raise UsageError(f"unknown model {cfg.model!r}")


def _load(path):
    path = Path(path)
    try:
        return serialize.load(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except (json.JSONDecodeError, KeyError, ValueError) as e:
        raise UsageError(f"{path}: not a valid instance file ({e})") from None


def _trisystem(base, kind: str):
    """ATT of the given kind built from a dialgebra; trisystems pass through."""
    if isinstance(base, TrisystemInstance) or (hasattr(base, "has_op") and base.has_op("t1")):
        return base
    if kind == "att2":
        if not getattr(base, "has_involution", False):
            raise UsageError("the second kind needs a dialgebra with involution")
        return att2_from_dialgebra(base)
    return att1_from_dialgebra(base)


def _zero_trisystem(cfg: RunConfig) -> TrisystemInstance:
    f, n = cfg.field, cfg.dim
    z = f.zeros((n, n, n, n))
    return TrisystemInstance(f, z, z, z, None, "zero")


def _structure_for_set(cfg: RunConfig, set_name: str, via: str | None):
    name = set_name.upper()
    if name not in catalog.SETS:
        raise UsageError(f"unknown set {set_name!r}; known: {', '.join(catalog.SETS)}")
    kind = via or ("att2" if name == "ATT2" else "att1")
    if cfg.model == "file":
        base = build_model(cfg)
        if all(base.has_op(op) for op in catalog.SETS[name].ops.values()):
            return base
    if name in ("DIALGEBRA", "LEFT_SYMMETRIC_DI"):
        return build_model(cfg)
    if name in ("ATT1", "ATT2", "JTD", "LEIBTS"):
        if cfg.model == "zero":
            T = _zero_trisystem(cfg)
        else:
            T = _trisystem(build_model(cfg, involution=kind == "att2"), kind)
        if name == "JTD":
            return jtd_products(T)
        if name == "LEIBTS":
            return leibts_bracket(T)
        return T
    if cfg.model != "file":
        raise UsageError(f"set {name} needs --model file with a matching structure")
    return build_model(cfg)


THEOREMS = {
    "asstoass": ("att1", "ATT1"),
    "asstojordan": ("att1", "JTD"),
    "asstoleibniz": ("att1", "LEIBTS"),
    "asstoass2": ("att2", "ATT2"),
    "asstojordan2": ("att2", "JTD"),
    "asstoleibniz2": ("att2", "LEIBTS"),
}


# -- output ----------------------------------------------------------------


def _emit(cfg: RunConfig, payload: dict, text: str, out: str | None = None) -> None:
    if not cfg.timing:
        _strip_timing(payload)
    if out:
        serialize.dump(payload, out)
    if cfg.fmt == "json":
        print(json.dumps(payload, indent=1, ensure_ascii=False))
    else:
        print(text)


def _strip_timing(obj) -> None:
    if isinstance(obj, dict):
        obj.pop("elapsed", None)
        for v in obj.values():
            _strip_timing(v)
    elif isinstance(obj, list):
        for v in obj:
            _strip_timing(v)


def _report_text(rep: Report) -> str:
    head = f"{rep.set}: {'pass' if rep.passed else 'FAIL'} ({rep.evaluations} evaluations, {rep.elapsed:.3f}s)"
    lines = [head]
    for c in rep.chains:
        lines.append(f"  {c.name}: {c.status}")
        for w in c.witnesses:
            lines.append(f"    witness {json.dumps(w, ensure_ascii=False)}")
    lines.extend(f"  note: {n}" for n in rep.notes)
    return "\n".join(lines)


def _reports(cfg: RunConfig, reports: list[Report], out=None) -> int:
    payload = {"reports": [r.to_json() for r in reports]} if len(reports) > 1 else reports[0].to_json()
    _emit(cfg, payload, "\n".join(_report_text(r) for r in reports), out)
    return OK if all(r.passed for r in reports) else FALSIFIED


# -- commands --------------------------------------------------------------


def _read_ids(name: str) -> str:
    path = Path(name)
    if path.exists():
        return path.read_text(encoding="utf-8")
    packaged = catalog.catalog_path(path.name)
    if path.parent.name in ("", "catalog") and packaged.is_file():
        return packaged.read_text(encoding="utf-8")
    raise UsageError(f"{name}: no such file")


def cmd_kp(args) -> int:
    cfg = _config(args)
    chains = dsl.parse(_read_ids(args.input))
    if len(chains) != 1:
        raise UsageError(f"{args.input}: expected one identity, found {len(chains)}")
    (chain,) = chains
    if args.arity is not None and chain.arity != args.arity:
        raise UsageError(f"{args.input}: operation arity is {chain.arity}, not {args.arity}")
    out = kp_apply(chain)
    fmt = dsl.format_latex if cfg.fmt == "latex" else dsl.format
    payload = {
        "input": dsl.format(chain),
        "part1": [{"name": c.name, "chain": dsl.format(c)} for c in out.part1],
        "part2": [{"name": c.name, "chain": dsl.format(c)} for c in out.part2],
        "deduped": [{"name": c.name, "chain": dsl.format(c)} for c in out.deduped],
        "collapsed": [list(p) for p in out.collapsed],
    }
    lines = [f"# part 1 ({len(out.part1)})"] + [fmt(c) for c in out.part1]
    lines += [f"# part 2 ({len(out.part2)})"] + [fmt(c) for c in out.part2]
    lines += [f"# after dedup: {len(out.deduped)}"]
    lines += [f"# collapsed {a} <- {b}" for a, b in out.collapsed]
    status = OK
    if args.golden:
        golden = dsl.parse(_read_ids(args.golden))
        missing, extra = compare_chain_sets(out.deduped, golden)
        payload["golden"] = {
            "file": args.golden,
            "status": "pass" if not (missing or extra) else "fail",
            "missing": [dsl.format(c) for c in missing],
            "extra": [dsl.format(c) for c in extra],
        }
        lines.append(f"# golden {args.golden}: {payload['golden']['status']}")
        lines += [f"#   missing: {dsl.format(c)}" for c in missing]
        lines += [f"#   extra: {dsl.format(c)}" for c in extra]
        if missing or extra:
            status = FALSIFIED
    if cfg.fmt == "json":
        print(json.dumps(payload, indent=1, ensure_ascii=False))
    else:
        print("\n".join(lines))
    return status


def _variety(cfg: RunConfig, S, set_name: str) -> Report:
    try:
        return check_variety(S, set_name, cfg.mode, **cfg.check_kw)
    except IndexError as e:
        raise UsageError(f"{e}; the identities of {set_name} need more variables (raise --gens)") from None


def cmd_check(args) -> int:
    cfg = _config(args)
    what = args.what
    if what == "variety":
        if not args.set:
            raise UsageError("check variety needs --set")
        S = _structure_for_set(cfg, args.set, args.via)
        return _reports(cfg, [_variety(cfg, S, args.set)], args.out)
    if what == "theorem":
        if args.name not in THEOREMS:
            raise UsageError(f"unknown theorem {args.name!r}; known: {', '.join(THEOREMS)}")
        kind, set_name = THEOREMS[args.name]
        S = _structure_for_set(cfg, set_name, kind)
        return _reports(cfg, [_variety(cfg, S, set_name)], args.out)
    if what == "dialgebra":
        D = build_model(cfg, involution=True)
        reps = [check_dialgebra_axioms(D, cfg.mode, **cfg.check_kw)]
        if getattr(D, "has_involution", False):
            reps.append(check_involution(D, cfg.mode, **cfg.check_kw))
        return _reports(cfg, reps, args.out)
    if what == "leibniz":
        D = build_model(cfg)
        return _reports(cfg, [check_right_leibniz(dminus_bracket(D), "bracket", cfg.mode, **cfg.check_kw)], args.out)
    raise UsageError(f"unknown check {what!r}")


def cmd_derive(args) -> int:
    cfg = _config(args)
    base = build_model(cfg, involution=args.target == "att2")
    if args.target in ("att1", "att2"):
        if not isinstance(base, DialgebraInstance):
            raise UsageError(f"{args.target} is derived from a dialgebra")
        out = _trisystem(base, args.target)
    else:
        T = _trisystem(base, args.via or "att1")
        out = jtd_products(T) if args.target == "jtd" else leibts_bracket(T)
    if not getattr(out, "dense", False):
        raise UsageError("derive needs a finite (dense) input")
    data = serialize.to_json(out)
    if args.out:
        serialize.dump(data, args.out)
    _emit(cfg, data, f"derived {args.target}: dim {out.dim}, ops {', '.join(out.tensors)}" + (f" -> {args.out}" if args.out else ""))
    return OK


def cmd_instance(args) -> int:
    cfg = _config(args)
    base = build_model(cfg)
    if not getattr(base, "dense", False):
        raise UsageError("only finite models can be written out")
    obj = base if args.kind == "dialgebra" else _trisystem(base, args.kind)
    serialize.dump(obj, args.out)
    print(f"wrote {args.kind} of dim {obj.dim} to {args.out}")
    return OK


def cmd_embed(args) -> int:
    cfg = _config(args)
    base = build_model(cfg)
    kind = "att1" if args.kind == "first" else "att2"
    T = _trisystem(base, kind)
    if not isinstance(T, TrisystemInstance) and not getattr(T, "dense", False):
        raise UsageError("embed needs a finite trisystem or dialgebra")
    E = build_U(T) if args.kind == "first" else build_U2(T, star=args.star)
    data = E.to_json()
    serialize.dump(data if cfg.timing else (_strip_timing(data) or data), args.out)
    lines = [f"{args.kind} kind embedding: dim {E.dim}, blocks " + ", ".join(f"{n}={k}" for n, _, k in E.blocks)]
    lines.append(_report_text(E.recovery))
    lines += [_report_text(r) for r in E.checks]
    lines.append(f"written to {args.out}")
    if cfg.fmt == "json":
        print(json.dumps({"out": args.out, "status": data["status"], "recovery": data["recovery"]["chains"]}, indent=1, ensure_ascii=False))
    else:
        print("\n".join(lines))
    return OK if E.passed else FALSIFIED


def cmd_ann(args) -> int:
    cfg = _config(args)
    T = _trisystem(build_model(cfg), args.via or "att1")
    if not isinstance(T, TrisystemInstance):
        raise UsageError("ann needs a finite trisystem")
    basis = ann_subspace(T)
    if args.complement:
        names = [s.strip() for s in args.complement.split(",") if s.strip()]
        comp = _vectors_by_name(T, names)
    else:
        comp = complement_basis(T)
    payload = {"dim": len(basis), "basis": [T.describe(v.data[0]) for v in basis]}
    lines = [f"A^ann: dim {len(basis)}"] + [f"  {T.describe(v.data[0])}" for v in basis]
    status = OK
    try:
        rep = complement_closure_check(T, comp, args.ats)
        payload["complement"] = {"basis": [T.describe(v) for v in comp], "report": rep.to_json()}
        lines.append("complement: " + ", ".join(json.dumps(T.describe(v)) for v in comp))
        lines.append(_report_text(rep))
        status = OK if rep.passed else FALSIFIED
    except NotAComplementError as e:
        payload["complement"] = {"error": str(e)}
        lines.append(f"complement: {e}")
        status = FALSIFIED
    _emit(cfg, payload, "\n".join(lines), args.out)
    return status


# B1 = E12, B2 = E21, B3 = E12 + E22 in M_2^1
LEIBNIZ_EXAMPLE = {"B1": {"E12": 1}, "B2": {"E21": 1}, "B3": {"E12": 1, "E22": 1}}


def _vectors_by_name(S, names) -> np.ndarray:
    out = np.zeros((len(names), S.dim), dtype=np.int64)
    for r, name in enumerate(names):
        terms = LEIBNIZ_EXAMPLE.get(name) or {t.strip(): 1 for t in name.split("+")}
        for lab, c in terms.items():
            if lab not in S.labels:
                raise UsageError(f"unknown basis element {lab!r}; labels are {', '.join(S.labels)}")
            out[r, S.labels.index(lab)] += c
    return S.field.from_ints(out)


def cmd_leibniz(args) -> int:
    cfg = _config(args)
    D = build_model(cfg)
    L = dminus_bracket(D)
    rep = check_right_leibniz(L, "bracket", cfg.mode, **cfg.check_kw)
    payload = {"report": rep.to_json(), "image_rank": bracket_image_rank(L)}
    lines = [_report_text(rep), f"rank of the bracket image: {payload['image_rank']}"]
    if args.subspace:
        names = [s.strip() for s in args.subspace.split(",") if s.strip()]
        basis, consts = subalgebra_structure_constants(L, _vectors_by_name(L, names))
        k = basis.shape[0]
        bnames = names + [f"N{i + 1}" for i in range(k - len(names))]
        table = []
        for i in range(k):
            for j in range(k):
                terms = {bnames[t]: str(cfg.field(c)) for t, c in enumerate(consts[i, j]) if c != 0}
                if terms:
                    table.append({"bracket": [bnames[i], bnames[j]], "value": terms})
                    lines.append(f"[{bnames[i]},{bnames[j]}] = " + " + ".join(f"{c}*{n}" for n, c in terms.items()))
        payload["subalgebra"] = {"dim": k, "basis": [L.describe(b) for b in basis], "constants": table}
    _emit(cfg, payload, "\n".join(lines), args.out)
    return OK if rep.passed else FALSIFIED


# -- parser ----------------------------------------------------------------


def _model_args(p: argparse.ArgumentParser, default_model: str | None = "matrix") -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["free", "matrix", "differential", "zero", "file"], default=default_model)
    g.add_argument("--gens", type=int, default=5, help="free model: number of generators")
    g.add_argument("--deg", type=int, default=5, help="free model: maximal word length")
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--m1", type=int, default=1)
    g.add_argument("--p", type=int, default=5, help="field size (0 for the rationals)")
    g.add_argument("--complex", action="store_true", help="matrix model over GF(p) x GF(p) with the swap")
    g.add_argument("--dim", type=int, default=2, help="zero model: dimension")
    g.add_argument("--from", dest="source", help="instance JSON file")


def _run_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run")
    g.add_argument("--mode", choices=["auto", "exhaustive", "sampled", "generators"], default="auto")
    g.add_argument("--seed", type=int)
    g.add_argument("--count", type=int, default=100, help="sampled mode: number of tuples")
    g.add_argument("--cap", type=int, help=f"evaluation cap (default TRISYS_EVAL_CAP or {DEFAULT_EVAL_CAP})")
    g.add_argument("--format", choices=["text", "json"], default="text")
    g.add_argument("--no-timing", action="store_true", help="omit elapsed times from JSON output")
    g.add_argument("--out", help="also write the JSON report here")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trisys", description="Dialgebras, triple trisystems and their identities.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kp", help="expand an n-ary identity into subscripted identities")
    p.add_argument("--input", required=True)
    p.add_argument("--arity", type=int)
    p.add_argument("--format", choices=["text", "json", "latex"], default="text")
    p.add_argument("--golden", help="identity file to compare the deduplicated output with")
    p.set_defaults(func=cmd_kp)

    p = sub.add_parser("check", help="verify axioms or theorems on a model")
    p.add_argument("what", choices=["variety", "theorem", "dialgebra", "leibniz"])
    p.add_argument("--set", help="axiom set: " + ", ".join(catalog.SETS))
    p.add_argument("--name", help="theorem: " + ", ".join(THEOREMS))
    p.add_argument("--via", choices=["att1", "att2"], help="which triple products to derive from a dialgebra")
    _model_args(p, None)
    _run_args(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("derive", help="derived products of an instance")
    p.add_argument("target", choices=["att1", "att2", "jtd", "leibts"])
    p.add_argument("--via", choices=["att1", "att2"])
    _model_args(p, None)
    _run_args(p)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("instance", help="write a model (or its trisystem) as JSON")
    p.add_argument("--kind", choices=["dialgebra", "att1", "att2"], default="dialgebra")
    p.add_argument("--out", required=True)
    _model_args(p)
    p.set_defaults(func=cmd_instance)

    p = sub.add_parser("embed", help="standard embedding of a trisystem")
    p.add_argument("--kind", choices=["first", "second"], required=True)
    p.add_argument("--star", choices=list(STAR_MODES), default="generators")
    p.add_argument("--out", default="embedding.json")
    _model_args(p, None)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("ann", help="the subspace A^ann and a complement check")
    p.add_argument("--via", choices=["att1", "att2"])
    p.add_argument("--complement", help="comma-separated complement vectors, e.g. E11,E22 or E12+E22")
    p.add_argument("--ats", choices=["ATS1", "ATS2"])
    _model_args(p, None)
    _run_args(p)
    p.set_defaults(func=cmd_ann)

    p = sub.add_parser("leibniz", help="the bracket a⊣b − b⊢a of a matrix dialgebra")
    p.add_argument("--subspace", help="comma-separated vectors (B1,B2,B3 or sums of labels)")
    _model_args(p)
    _run_args(p)
    p.set_defaults(func=cmd_leibniz)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"trisys: {e}", file=sys.stderr)
        return USAGE
    except dsl.DSLError as e:
        print(f"trisys: {e}", file=sys.stderr)
        return USAGE
    except EvalCapExceeded as e:
        print(f"trisys: {e} (raise --cap or TRISYS_EVAL_CAP, or use --mode sampled --seed N)", file=sys.stderr)
        return USAGE
    except OSError as e:
        print(f"trisys: {e}", file=sys.stderr)
        return USAGE
    except UnresolvedOperation as e:
        print(f"trisys: the input lacks an operation the identities use: {e}", file=sys.stderr)
        return USAGE
    except (PreconditionError, ClosureError, NotAComplementError) as e:
        print(f"trisys: falsified: {e}", file=sys.stderr)
        return FALSIFIED


if __name__ == "__main__":
    sys.exit(main())
