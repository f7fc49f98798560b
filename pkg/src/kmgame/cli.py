"""Command line front end: ``kmgame <subcommand> [options]``.

Exit status is 0 on success, 1 when a verification check fails and 2 for
usage errors, schema errors in the input and exceeded resource caps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import jsonschema

from kmgame.config import RunConfig, config_error_path, load_config
from kmgame.core import (
    enumerate_collapse_maps,
    enumerate_skeletons,
    map_to_json,
    mu_to_tree,
    pair_from_json,
    pair_to_json,
    tree_to_dot,
    tree_to_text,
)
from kmgame.domains import (
    LIMIT_MODES,
    domain_to_json,
    iterated_limits,
    reference_domain,
    render_domain,
    render_limits,
    upper_echelon_domain,
)
from kmgame.dtree import (
    build_dtree,
    check_factorization,
    dtree_to_dot,
    dtree_to_json,
    dtree_to_text,
    duhamel_expression,
    mark_couplings,
)
from kmgame.errors import KMGameError, ResourceLimitError
from kmgame.moves import class_to_json, classify, is_reference, reduce_to_tamed, to_reference
from kmgame.verify import SUITES, run_suite

PAIR_SCHEMA = {
    "type": "object",
    "required": ["mu", "sgn"],
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "mu": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "sgn": {"type": "array", "minItems": 1, "items": {"enum": ["+", "-"]}},
        "edges": {"type": "array"},
    },
}


class UsageError(Exception):
    pass


def _read_pair(text: str):
    """Parse a pair from inline JSON or from a file path."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            with open(text, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"--input is neither JSON nor a readable file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{text}: invalid JSON: {exc}") from None
    try:
        jsonschema.validate(data, PAIR_SCHEMA)
    except jsonschema.ValidationError as err:
        raise UsageError(f"schema error at {config_error_path(err)}: {err.message}") from None
    try:
        return pair_from_json(data)
    except KMGameError as err:
        raise UsageError(f"invalid pair: {err}") from None


def _check_k(cfg: RunConfig, limit: Optional[int] = None):
    cap = cfg.max_k if limit is None else limit
    if cfg.k > cap:
        raise ResourceLimitError(f"k={cfg.k} exceeds the cap k <= {cap}")


def _emit(obj, text: str, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"
    return text


# ---------------------------------------------------------------------------
# subcommands


def cmd_enumerate(args, cfg: RunConfig):
    _check_k(cfg)
    k = cfg.k
    if args.kind == "maps":
        items = enumerate_collapse_maps(k)
        obj = [map_to_json(m) for m in items]
        lines = [str(m) for m in items]
    elif args.kind == "skeletons":
        items = enumerate_skeletons(k)
        obj = [s.code() for s in items]
        lines = obj
    else:
        items = classify(k, max_k=cfg.max_k)
        obj = [class_to_json(c) for c in items]
        lines = [f"{c.reference} members={len(c.members)} sources={len(c.sources)}" for c in items]
    text = "\n".join(lines) + f"\n# {len(items)} {args.kind} for k={k}\n"
    return _emit({"k": k, "kind": args.kind, "count": len(items), "items": obj}, text, cfg.format), 0


def cmd_reduce(args, cfg: RunConfig):
    pair = _read_pair(args.input)
    tamed, sigma = reduce_to_tamed(*pair)
    ref, rho = to_reference(tamed)
    dom = reference_domain(ref)
    obj = {
        "input": pair_to_json(pair),
        "tamed": pair_to_json(tamed),
        "sigma": list(sigma.images),
        "sigma_is_identity": sigma.is_identity(),
        "reference": pair_to_json(ref),
        "rho": list(rho.images),
        "reference_domain": render_domain(dom),
    }
    text = (
        f"input     {pair}\n"
        f"tamed     {tamed}\n"
        f"sigma     {sigma}{' (identity)' if sigma.is_identity() else ''}\n"
        f"reference {ref}\n"
        f"rho       {rho}\n"
        f"T_R       {render_domain(dom)}\n"
    )
    return _emit(obj, text, cfg.format), 0


def cmd_classify(args, cfg: RunConfig):
    _check_k(cfg)
    classes = classify(cfg.k, max_k=cfg.max_k)
    obj = [class_to_json(c) for c in classes]
    lines = []
    for c in classes:
        lines.append(f"{c.reference}  members={len(c.members)} sources={len(c.sources)}")
    text = "\n".join(lines) + f"\n# {len(classes)} classes for k={cfg.k}\n"
    return _emit(obj, text, cfg.format), 0


def cmd_domains(args, cfg: RunConfig):
    pair = _read_pair(args.input)
    if is_reference(pair):
        kind, dom = "reference", reference_domain(pair)
    else:
        kind, dom = "upper-echelon", upper_echelon_domain(pair.mu)
    limits = iterated_limits(dom, args.outermost, args.mode)
    obj = {
        "kind": kind,
        "domain": domain_to_json(dom),
        "inequalities": render_domain(dom),
        "limits": [{"var": l.var, "lower": l.lower, "upper": l.upper} for l in limits],
        "mode": args.mode,
    }
    text = f"{kind} domain: {render_domain(dom)}\nlimits ({args.mode}): {render_limits(limits)}\n"
    return _emit(obj, text, cfg.format), 0


def cmd_dtree(args, cfg: RunConfig):
    pair = _read_pair(args.input)
    tree = build_dtree(pair)
    marks = mark_couplings(tree)
    expr = duhamel_expression(tree)
    if cfg.format == "dot":
        return dtree_to_dot(tree), 0
    obj = {
        "dtree": dtree_to_json(tree),
        "unclogged": list(marks.unclogged),
        "rough_path": marks.rough_path(),
        "leftover": marks.leftover,
        "factorizes": check_factorization(pair),
        "expression": expr.to_json(),
    }
    text = (
        dtree_to_text(tree)
        + f"unclogged couplings: {list(marks.unclogged)}\n"
        + f"rough path: {marks.rough_path()}\n"
        + f"expression: {expr.render()}\n"
    )
    return _emit(obj, text, cfg.format), 0


def cmd_verify(args, cfg: RunConfig):
    jobs = args.jobs if args.jobs is not None else min(4, os.cpu_count() or 1)
    if jobs < 1:
        raise UsageError("--jobs must be at least 1")
    report = run_suite(args.suite, cfg, jobs)
    if cfg.format == "json":
        out = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        lines = []
        for c in report["checks"]:
            res = "" if c["residual"] is None else f" residual={c['residual']:.3e}"
            k = "" if c["k"] is None else f" k={c['k']}"
            lines.append(f"{'PASS' if c['pass'] else 'FAIL'} {c['suite']}/{c['test']}{k}{res} {c['detail']}".rstrip())
        lines.append(f"# {'all checks passed' if report['pass'] else 'verification failed'}")
        out = "\n".join(lines) + "\n"
    return out, 0 if report["pass"] else 1


def cmd_render(args, cfg: RunConfig):
    pair = _read_pair(args.input)
    tree = mu_to_tree(pair.mu, pair.sgn)
    if cfg.format == "dot":
        return tree_to_dot(tree), 0
    return _emit(pair_to_json(pair), tree_to_text(tree), cfg.format), 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, help="coupling order")
    common.add_argument("--lattice-n", type=int, help="lattice size N")
    common.add_argument("--grid", type=int, help="quadrature points per time axis")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--tol", type=float, help="tolerance for pointwise identities")
    common.add_argument("--format", choices=["json", "dot", "text"], help="output format")
    common.add_argument("--fail-fast", action="store_true", default=None, help="stop at the first failing check")
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="write output to FILE instead of stdout")

    parser = argparse.ArgumentParser(prog="kmgame", description="Signed Duhamel term combinatorics and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="list maps, skeletons or classes")
    p.add_argument("--kind", choices=["maps", "skeletons", "classes"], default="maps")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("reduce", parents=[common], help="tamed and reference forms of a pair")
    p.add_argument("--input", required=True, help="pair JSON or path to it")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("classify", parents=[common], help="reference classes of all signed pairs")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("domains", parents=[common], help="integration domain and limits of a pair")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=LIMIT_MODES, default="exact")
    p.add_argument("--outermost", type=int, default=None)
    p.set_defaults(func=cmd_domains)

    p = sub.add_parser("dtree", parents=[common], help="D-tree of a reference pair")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_dtree)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--jobs", type=int, default=None, help="worker processes for --suite all (default: up to 4)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", parents=[common], help="draw the tree of a pair")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg.updated(
        k=args.k,
        lattice_n=args.lattice_n,
        grid=args.grid,
        seed=args.seed,
        tol=args.tol,
        format=args.format,
        fail_fast=args.fail_fast,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        out, status = args.func(args, cfg)
    except jsonschema.ValidationError as err:
        print(f"kmgame: config error at {config_error_path(err)}: {err.message}", file=sys.stderr)
        return 2
    except (UsageError, ResourceLimitError, KMGameError, OSError, ValueError) as err:
        print(f"kmgame: {err}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
