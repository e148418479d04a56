"""Command-line front end.

Exit codes: 0 secure, 1 insecure, 2 fault or usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import PROPS, ConfigError, JobConfig, load_program, load_split
from .corpus import corpus_dir
from .export import ExportError, emit_c_harness, emit_manifest_harness
from .lang.ast import Program
from .lang.parser import ParseError
from .lang.policy import PolicyError
from .lang.printer import pretty_print
from .semantics import DEFAULT_BUDGET, Fault, format_transcript, format_value, run
from .transforms import (
    GENERAL,
    HYBRID,
    UNNESTED,
    ReificationError,
    reify,
    reify_general,
    reify_unnested,
    self_compose,
    self_compose_declass,
)
from .verifier import (
    Const,
    DomainError,
    DomainSpec,
    check_adequacy,
    check_declass,
    check_manifest,
    check_manifest_form,
    check_pc,
    parse_domain,
    render,
)
from .verifier.domains import parse_value

FLAVORS = ("auto", GENERAL, UNNESTED, HYBRID)


class UsageError(Exception):
    pass


# -- resolution --------------------------------------------------------------------


def _resolve_file(name: str, suffix: str) -> Path:
    """A path as given, else the bundled corpus file of that name."""
    p = Path(name)
    if p.exists():
        return p
    stem = p.name[: -len(suffix)] if p.name.endswith(suffix) else p.name
    q = corpus_dir() / f"{stem}{suffix}"
    if q.exists():
        return q
    raise FileNotFoundError(f"no such file: {name}")


def _load(name: str, allow_reserved: bool) -> Program:
    return load_program(_resolve_file(name, ".sc"), allow_reserved=allow_reserved)


def _names(text: str | None) -> tuple[str, ...] | None:
    if text is None:
        return None
    return tuple(n.strip() for n in text.split(",") if n.strip())


def _assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise UsageError(f"expected VAR=VALUE, got {text!r}")
    return name.strip(), value.strip()


def _state(sets: Sequence[str]) -> dict:
    out = {}
    for item in sets:
        k, v = _assignment(item)
        try:
            out[k] = parse_value(v)
        except ValueError:
            raise UsageError(f"bad value for {k}: {v!r}") from None
    return out


def job_from_args(args: argparse.Namespace) -> JobConfig:
    """Merge an optional config file (explicit or the corpus default) with flags."""
    cfg: JobConfig | None = None
    if args.config:
        cfg = JobConfig.load(_resolve_file(args.config, ".json"))
    elif args.program:
        p = Path(args.program)
        stem = p.name[:-3] if p.name.endswith(".sc") else p.name
        default = corpus_dir() / f"{stem}.json"
        if not p.exists() and default.exists():
            cfg = JobConfig.load(default)
    if cfg is None:
        if not args.program:
            raise UsageError("give a program or --config")
        cfg = JobConfig(program=args.program, base_dir=None)
    elif args.program:
        cfg = replace(cfg, program=str(_resolve_file(args.program, ".sc").resolve()))

    vars_ = dict(cfg.domain.vars)
    for item in args.domain or ():
        k, v = _assignment(item)
        vars_[k] = parse_domain(v)
    for item in args.set or ():
        k, v = _assignment(item)
        vars_[k] = Const(parse_value(v))
    dom = cfg.domain
    dom = DomainSpec(
        vars_,
        mode=args.mode or dom.mode,
        samples=args.samples if args.samples is not None else dom.samples,
        seed=args.seed if args.seed is not None else dom.seed,
        budget=args.budget if args.budget is not None else dom.budget,
        pair_cap=args.pair_cap if args.pair_cap is not None else dom.pair_cap,
    )
    return cfg.with_overrides(
        declassifier=args.declassifier,
        split=args.split,
        low=_names(args.low),
        high=_names(args.high),
        prop=args.prop,
        format=args.format,
    ).with_overrides(domain=dom)


def _job_program(cfg: JobConfig, allow_reserved: bool) -> Program:
    return load_program(_resolve_job_path(cfg, cfg.program), allow_reserved=allow_reserved)


def _resolve_job_path(cfg: JobConfig, p: str) -> Path:
    q = cfg.resolve_path(p)
    return q if q.exists() else _resolve_file(p, ".sc")


# -- subcommands -------------------------------------------------------------------


def cmd_run(args: argparse.Namespace, transcript_only: bool) -> int:
    prog = _load(args.program, args.allow_reserved)
    result = run(prog, _state(args.set or ()), args.budget or DEFAULT_BUDGET)
    t = format_transcript(result.transcript)
    if transcript_only:
        print(t)
    elif args.format == "structured":
        state = {k: list(v) if isinstance(v, tuple) else v for k, v in result.state.items()}
        print(json.dumps({"state": state, "transcript": t, "steps": result.steps}, indent=2))
    else:
        for k, v in result.state.items():
            print(f"{k} = {format_value(v)}")
        print(f"transcript: {t or '(empty)'}")
        print(f"steps: {result.steps}")
    return 0


def _reify(prog: Program, flavor: str):
    if flavor == GENERAL:
        return reify_general(prog)
    if flavor == UNNESTED:
        return reify_unnested(prog)
    rp = reify(prog)
    if flavor == HYBRID and rp.flavor != HYBRID:
        raise UsageError(f"{prog.name or 'program'} is unnested; the loop-accumulator flavor does not apply")
    return rp


def cmd_reify(args: argparse.Namespace) -> int:
    rp = _reify(_load(args.program, args.allow_reserved), args.flavor)
    print(f"// flavor: {rp.flavor}; instrumentation: {', '.join(rp.added) or '(none)'}")
    sys.stdout.write(pretty_print(rp.program))
    return 0


def cmd_selfcompose(args: argparse.Namespace) -> int:
    cfg = job_from_args(args)
    prog = _job_program(cfg, args.allow_reserved)
    if cfg.declassifier:
        d = load_program(_resolve_job_path(cfg, cfg.declassifier))
        sc = self_compose_declass(d, _reify(prog, args.flavor), cfg.policy(), share_low=args.share_low)
    else:
        sc = self_compose(prog, cfg.policy(), share_low=args.share_low)

    def pairs(ps) -> str:
        return " && ".join(f"{a} == {b}" for a, b in ps) or "true"

    print(f"// pre:   {pairs(sc.pre)}")
    if sc.guard:
        print(f"// guard: {pairs(sc.guard)}")
    print(f"// post:  {pairs(sc.post)}")
    sys.stdout.write(pretty_print(sc.program))
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    cfg = job_from_args(args)
    prog = _job_program(cfg, args.allow_reserved)
    sizes = dict(_assignment(a) for a in args.array_size or ())
    if args.manifest:
        h = emit_manifest_harness(prog, _reify(prog, args.flavor), cfg.policy(), name=args.name, array_sizes=sizes)
    else:
        if not cfg.declassifier:
            raise UsageError("export-c needs --declassifier (or --manifest)")
        d = load_program(_resolve_job_path(cfg, cfg.declassifier))
        h = emit_c_harness(d, _reify(prog, args.flavor), cfg.policy(), name=args.name, array_sizes=sizes)
    if args.output:
        Path(args.output).write_text(h.source)
    else:
        sys.stdout.write(h.source)
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    cfg = job_from_args(args)
    prop = cfg.prop
    if prop is None:
        raise UsageError("check needs --prop")
    pol, dom, kw = cfg.policy(), cfg.domain, {"workers": args.workers}
    if prop == "manifest-form":
        if cfg.split:
            d, q = load_split(_resolve_job_path(cfg, cfg.program), cfg.split, allow_reserved=args.allow_reserved)
        elif cfg.declassifier:
            d = load_program(_resolve_job_path(cfg, cfg.declassifier))
            q = _job_program(cfg, args.allow_reserved)
        else:
            raise UsageError("manifest-form needs --split MARKER or --declassifier D")
        v = check_manifest_form(d, q, pol, dom, **kw)
    else:
        prog = _job_program(cfg, args.allow_reserved)
        if prop == "pc":
            v = check_pc(prog, pol, dom, **kw)
        elif prop == "declass":
            if not cfg.declassifier:
                raise UsageError("declass needs --declassifier")
            d = load_program(_resolve_job_path(cfg, cfg.declassifier))
            v = check_declass(prog, d, pol, dom, **kw)
        elif prop == "manifest":
            v = check_manifest(prog, pol, dom, **kw)
        else:
            v = check_adequacy(prog, _reify(prog, args.flavor), pol, dom, **kw)
    print(v.to_json() if cfg.format == "structured" else render(v))
    return v.exit_code


# -- parser ------------------------------------------------------------------------


def _add_job_flags(p: argparse.ArgumentParser, with_prop: bool) -> None:
    p.add_argument("program", nargs="?", help="subject .sc file or corpus name")
    p.add_argument("--config", help="job config (JSON); corpus names work too")
    p.add_argument("--declassifier", help="declassifier .sc file or corpus name")
    p.add_argument("--split", help="line marker separating declassifier from remainder")
    p.add_argument("--low", help="comma-separated low variables")
    p.add_argument("--high", help="comma-separated high variables")
    p.add_argument("--domain", action="append", metavar="VAR=SPEC",
                   help="input domain: 5, 0..3, 1,0,1, bits:m, bits:m+1l, values:1|2")
    p.add_argument("--set", action="append", metavar="VAR=VALUE", help="fix an input to one value")
    p.add_argument("--mode", choices=("exhaustive", "random"))
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, help="step budget per run")
    p.add_argument("--pair-cap", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("human", "structured"))
    p.add_argument("--flavor", choices=FLAVORS, default="auto", help="reification flavor")
    p.add_argument("--allow-reserved", action="store_true", help="accept identifiers containing __")
    if with_prop:
        p.add_argument("--prop", choices=PROPS, help="property to check")
    else:
        p.set_defaults(prop=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scdeclass", description="Side-channel declassification checker for a small while-language.")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, help_ in (("run", "run a program and print the final state"), ("transcript", "print the branch transcript of a run")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("program")
        p.add_argument("--set", action="append", metavar="VAR=VALUE")
        p.add_argument("--budget", type=int)
        p.add_argument("--format", choices=("human", "structured"), default="human")
        p.add_argument("--allow-reserved", action="store_true")

    p = sub.add_parser("reify", help="print a reified program")
    p.add_argument("program")
    p.add_argument("--flavor", choices=FLAVORS, default="auto")
    p.add_argument("--allow-reserved", action="store_true")

    p = sub.add_parser("selfcompose", help="print the self-composed program and its contract")
    _add_job_flags(p, with_prop=False)
    p.add_argument("--share-low", action="store_true", help="share unwritten low inputs between copies")

    p = sub.add_parser("export-c", help="emit a C verification harness")
    _add_job_flags(p, with_prop=False)
    p.add_argument("--manifest", action="store_true", help="harness checking the program as a manifest declassifier")
    p.add_argument("--array-size", action="append", metavar="ARRAY=EXPR", help="C size expression for an input array")
    p.add_argument("--name", help="C function name")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")

    p = sub.add_parser("check", help="check a security property over finite domains")
    _add_job_flags(p, with_prop=True)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command in ("run", "transcript"):
            return cmd_run(args, args.command == "transcript")
        if args.command == "reify":
            return cmd_reify(args)
        if args.command == "selfcompose":
            return cmd_selfcompose(args)
        if args.command == "export-c":
            return cmd_export(args)
        return cmd_check(args)
    except Fault as f:
        print(f"fault ({f.kind}): {f}", file=sys.stderr)
        return 2
    except (ParseError, PolicyError, DomainError, ConfigError, ExportError, ReificationError,
            UsageError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
