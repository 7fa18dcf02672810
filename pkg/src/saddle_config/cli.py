"""saddle-config command line.

Exit codes: 0 success, 1 I/O or usage problems, 2 mathematical
precondition failures (invariant violations, unbalanced or non-rigid
input).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__, gallery
from .analysis import analyze, graph_summary
from .embeddedness import DEFAULT_PROBES, classify
from .errors import InvariantViolation, PreconditionError, SaddleConfigError, SchemaViolation
from .horizontal import in_deformation_space, is_balanced
from .model import Configuration, deformation_from_dict, dumps_config, load_config
from .render import render_svg
from .vertical import default_coupling, vertical_rigidity

log = logging.getLogger("saddle_config")

EXIT_OK, EXIT_IO, EXIT_MATH = 0, 1, 2


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _seed(args) -> int:
    env = os.environ.get("SADDLE_CONFIG_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(EXIT_IO, f"SADDLE_CONFIG_SEED must be an integer, got {env!r}") from None
    return args.seed


def _load(path: str) -> Configuration:
    try:
        return load_config(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except SchemaViolation as exc:
        raise CliError(EXIT_IO, f"schema error: {exc}") from None
    except InvariantViolation as exc:
        raise CliError(EXIT_MATH, f"{type(exc).__name__}: {exc}") from None


def _emit(args, doc: dict, text: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _write(path: str, data: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        config = load_config(args.path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.path}: {exc.strerror or exc}") from None
    except SchemaViolation as exc:
        _emit(args, {"valid": False, "failures": [f"SchemaViolation: {exc}"]}, f"invalid: {exc}")
        return EXIT_IO
    except InvariantViolation as exc:
        msg = f"{type(exc).__name__}: {exc}"
        _emit(args, {"valid": False, "failures": [msg]}, f"invalid: {msg}")
        return EXIT_MATH
    summary = graph_summary(config)
    failures = []
    if not summary["euler_ok"]:
        failures.append(f"Euler relation fails: V - E + R + F = {summary['euler']}")
    if not summary["orientable"]:
        odd = [v for v in range(config.graph.n_vertices) if config.graph.degree(v) % 2]
        failures.append("graph is not orientable"
                        + (f" (odd degree at vertices {odd})" if odd else ""))
    doc = {"valid": not failures, "failures": failures, "balanced": is_balanced(config.graph),
           "summary": summary}
    lines = [f"{config.name or args.path}: {'valid' if not failures else 'invalid'}"]
    lines += [f"  {f}" for f in failures]
    lines.append(f"  |V|={summary['vertices']} |E|={summary['closed_edges']} "
                 f"|R|={summary['rays']} |F|={summary['faces']} balanced={doc['balanced']}")
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK if not failures else EXIT_MATH


def cmd_analyze(args) -> int:
    config = _load(args.path)
    report = analyze(config, certify=args.certify, seed=_seed(args))
    doc = report.to_dict()
    if args.json:
        sys.stdout.write(report.to_json())
        return EXIT_OK
    g, h, v, e = doc["graph"], doc["horizontal"], doc["vertical"], doc["embeddedness"]
    lines = [
        f"configuration: {report.name or args.path}",
        f"graph: |V|={g['vertices']} |E|={g['closed_edges']} |R|={g['rays']} |F|={g['faces']} "
        f"euler={g['euler']} orientable={g['orientable']}",
        f"vertex classes: {', '.join(g['vertex_classes'])}",
        f"horizontal: balanced={h['balanced']} (residual {h['balance_residual']:.2e}) "
        f"rank={h['rank']}/{h['rows']} dim D={h['dim_D']} rigid={h['rigid']} "
        f"[{'+'.join(h['rigidity_source'])}]",
    ]
    if "certificate" in h:
        c = h["certificate"]
        lines.append(f"certificate: {'issued' if c['issued'] else 'not issued'}"
                     + (f" ({c['reason']})" if "reason" in c else ""))
    if v.get("applicable"):
        lines.append(f"vertical: F_ver residual {v['F_ver_residual']:.2e} balanced={v['phase_balanced']} "
                     f"rank={v['rank']}/{v['columns']} kernel dim={v['kernel_dim']} rigid={v['rigid']}")
    else:
        lines.append(f"vertical: not applicable ({v.get('reason')})")
    if e.get("outcome"):
        lines.append(f"embeddedness: {e['outcome']} ({e['tier']})"
                     + (" [heuristic]" if e.get("heuristic") else ""))
    else:
        lines.append(f"embeddedness: not decided ({e.get('reason')})")
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK


def cmd_phases(args) -> int:
    from .vertical import solve_phases

    config = _load(args.path)
    if not is_balanced(config.graph):
        raise CliError(EXIT_MATH, "graph is not balanced")
    K = default_coupling(config).K
    sols = solve_phases(config.graph, K, seed=_seed(args))
    items, lines = [], []
    for i, s in enumerate(sols):
        rig = vertical_rigidity(config, s.phase, K)
        items.append({"phase": [float(p) for p in s.phase], "trivial": s.trivial,
                      "residual": float(s.residual), "vertically_rigid": rig.is_rigid,
                      "source": s.source})
        vals = " ".join(f"{p:+.6f}" for p in s.phase)
        lines.append(f"[{i}] {'trivial   ' if s.trivial else 'nontrivial'} "
                     f"rigid={rig.is_rigid!s:5} residual={s.residual:.1e}  phi = {vals}")
    _emit(args, {"solutions": items, "edges": [int(h) for h in config.graph.closed_edges]},
          "\n".join(lines))
    return EXIT_OK


def _xi_fn(config: Configuration, path: str | None):
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_IO, f"malformed JSON in {path}: {exc}") from None
    try:
        xi = deformation_from_dict(config.graph, doc)
    except SchemaViolation as exc:
        raise CliError(EXIT_IO, f"schema error in {path}: {exc}") from None
    if not in_deformation_space(config, xi):
        raise CliError(EXIT_MATH, "xi is not in the deformation space D")
    return xi


def cmd_embed(args) -> int:
    config = _load(args.path)
    xi = _xi_fn(config, args.xi)
    if xi is not None:
        config = config.replace(xi=xi)
    probes = tuple(args.eps) if args.eps else DEFAULT_PROBES
    if any(e <= 0 for e in probes):
        raise CliError(EXIT_IO, "--eps values must be positive")
    verdict = classify(config, eps_probe=probes)
    lines = [f"{verdict.outcome} ({verdict.tier})" + (" [heuristic]" if verdict.heuristic else "")]
    if verdict.evidence:
        lines.append(f"{'pair':>10}  {'tier':<11} {'separation':>13}  resolution")
        for ev in verdict.evidence:
            lines.append(f"{ev.labels[0]:>4} {ev.labels[1]:<5}  {ev.tier:<11} {ev.separation:>+13.6e}  "
                         f"{ev.resolution}")
    lines += [f"note: {n}" for n in verdict.notes]
    _emit(args, verdict.to_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_render(args) -> int:
    config = _load(args.path)
    eps = args.eps[-1] if args.eps else 0.0
    if eps < 0:
        raise CliError(EXIT_IO, "--eps must be non-negative")
    svg = render_svg(config, eps)
    if args.out:
        _write(args.out, svg)
        if args.json:
            _emit(args, {"out": args.out, "eps": eps}, "")
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_example(args) -> int:
    if args.list or not args.path:
        if args.json:
            _emit(args, {"examples": gallery.names()}, "")
        else:
            for name in gallery.names():
                sys.stdout.write(f"{name:18} {gallery.GALLERY[name].doc}\n")
        return EXIT_OK
    if args.path not in gallery.GALLERY:
        raise CliError(EXIT_IO, f"unknown example {args.path!r}; try --list")
    if args.k is not None and args.path == "polygram" and args.k < 3:
        raise CliError(EXIT_IO, "--k must be at least 3")
    text = dumps_config(gallery.get(args.path, k=args.k))
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "phases": cmd_phases,
    "embed": cmd_embed,
    "render": cmd_render,
    "example": cmd_example,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="saddle-config",
                                description="Analyze saddle-tower gluing configurations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("path", nargs="?", help="configuration file (example name for 'example')")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--eps", type=float, action="append",
                   help="eps for render; probe values for embed (repeatable)")
    p.add_argument("--certify", action="store_true", help="also run the constructive rigidity certificate")
    p.add_argument("--out", help="output file")
    p.add_argument("--k", type=int, help="number of lines for the polygram example")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    p.add_argument("--xi", help="JSON file with a deformation vector in D")
    p.add_argument("--list", action="store_true", help="list gallery examples")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command != "example" and not args.path:
        sys.stderr.write(f"saddle-config {args.command}: a configuration file is required\n")
        return EXIT_IO
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except PreconditionError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_MATH
    except SaddleConfigError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
