"""Command-line front end.

    godp check FILES...
    godp expand --target NAME [--format manchester|dump] [--no-stratify]
                [--depth N] [-o OUT] FILES...
    godp list FILES...

Exit codes: 0 success, 1 semantic/parse error, 2 I/O or usage error.
Diagnostics go to stderr in `file:line:col: severity: message` form; payload
goes to stdout or `-o`. The GODP_DEPTH environment variable overrides the
default expansion depth; an explicit --depth wins over both.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .diagnostics import GodpError, render_diagnostics
from .elaborate import Library, build_library
from .emit import emit_manchester, emit_struct_dump, stratify
from .instantiate import DEFAULT_DEPTH, expand_named
from .parser import parse_library
from .syntax import LibraryAst, PatternDefAst


@dataclass
class CliConfig:
    command: str
    inputs: list[Path]
    target: str | None = None
    stratify: bool = True
    format: str = "manchester"
    out: Path | None = None
    depth: int = DEFAULT_DEPTH


def _default_depth() -> int | None:
    """Depth from GODP_DEPTH, the built-in default, or None if unparseable."""
    raw = os.environ.get("GODP_DEPTH")
    if raw is None:
        return DEFAULT_DEPTH
    try:
        return int(raw)
    except ValueError:
        sys.stderr.write(f"godp: invalid GODP_DEPTH value {raw!r}\n")
        return None


def _read_library(cfg: CliConfig) -> Library:
    """Concatenate the input files into one library namespace, in order."""
    items: list[PatternDefAst] = []
    for path in cfg.inputs:
        text = path.read_text(encoding="utf-8")
        ast = parse_library(text, str(path))
        items.extend(ast.items)
    return build_library(LibraryAst(tuple(items)))


def _emit_error(err: GodpError) -> None:
    sys.stderr.write(render_diagnostics([err.to_diagnostic()]))


def run_check(cfg: CliConfig) -> int:
    try:
        lib = _read_library(cfg)
    except GodpError as e:
        _emit_error(e)
        return 1
    diags = []
    for name in sorted(lib.zero_param_names()):
        try:
            expand_named(lib, name, depth=cfg.depth)
        except GodpError as e:
            diags.append(e.to_diagnostic())
    if diags:
        ordered = sorted(diags, key=lambda d: (d.pos.file, d.pos.line, d.pos.col))
        sys.stderr.write(render_diagnostics(ordered))
        return 1
    return 0


def run_expand(cfg: CliConfig) -> int:
    try:
        lib = _read_library(cfg)
        ont = expand_named(lib, cfg.target, depth=cfg.depth)
        if cfg.stratify:
            ont = stratify(ont)
        payload = emit_manchester(ont) if cfg.format == "manchester" else emit_struct_dump(ont)
    except GodpError as e:
        _emit_error(e)
        return 1
    if cfg.out is not None:
        cfg.out.write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return 0


def run_list(cfg: CliConfig) -> int:
    try:
        lib = _read_library(cfg)
    except GodpError as e:
        _emit_error(e)
        return 1
    for name in sorted(lib.defs):
        d = lib.defs[name]
        shapes = ",".join(d.shape_words())
        line = f"{name} {d.arity} {shapes}".rstrip()
        sys.stdout.write(line + "\n")
    return 0


def _build_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="godp", description="Generic ontology design patterns")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse, build, and dry-expand a library")
    check.add_argument("inputs", nargs="+", metavar="FILES")
    check.add_argument("--depth", type=int, default=None)

    expand = sub.add_parser("expand", help="expand a named ontology")
    expand.add_argument("inputs", nargs="+", metavar="FILES")
    expand.add_argument("--target", required=True)
    expand.add_argument("--format", choices=["manchester", "dump"], default="manchester")
    expand.add_argument("--no-stratify", action="store_true")
    expand.add_argument("--depth", type=int, default=None)
    expand.add_argument("-o", "--out", default=None)

    lst = sub.add_parser("list", help="list definitions and parameter shapes")
    lst.add_argument("inputs", nargs="+", metavar="FILES")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_argparser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    depth = getattr(ns, "depth", None)
    if depth is None:
        depth = _default_depth()
        if depth is None:
            return 2
    if depth < 1:
        sys.stderr.write("godp: --depth must be at least 1\n")
        return 2

    cfg = CliConfig(
        command=ns.command,
        inputs=[Path(p) for p in ns.inputs],
        target=getattr(ns, "target", None),
        stratify=not getattr(ns, "no_stratify", False),
        format=getattr(ns, "format", "manchester"),
        out=Path(ns.out) if getattr(ns, "out", None) else None,
        depth=depth,
    )
    try:
        if cfg.command == "check":
            return run_check(cfg)
        if cfg.command == "expand":
            return run_expand(cfg)
        return run_list(cfg)
    except OSError as e:
        sys.stderr.write(f"godp: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
