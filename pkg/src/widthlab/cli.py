"""Command-line front end: group info, width measurements, twisted widths,
power covers, equation solving, symbolic reduction, and the named
verification suites.  Reports are emitted as JSON lines or TSV with a
stable field order; identical (config, seed) runs produce identical
reports apart from elapsed_ms."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import CapacityError, InputError, InvariantFailure, LabError
from .perm import _DTYPE, parse_cycles
from .groups import ElementSet, ElementTable, Group, enumerate_group
from .catalog import parse_group
from .structure import Automorphism
from .words import (
    EVAL_BUDGET,
    format_word,
    parse_word,
    value_set,
    width,
    word_width,
)
from .semisimple import (
    Actor,
    SemisimpleAction,
    build_system,
    eliminate_H,
    reduce_to_single,
    reduction_stats,
    solve_commutator_equation,
    twisted_width,
)
from .powers import power_twist_cover, solve_power_equation
from .twisted import solve_twisted_system
from .suites import SUITES, run_suite

USAGE_EXIT = 64


# ---------------------------------------------------------------------------
# cached element tables

def load_table(spec: str, limit: int) -> ElementTable:
    group = parse_group(spec)
    cache_dir = os.environ.get("WIDTHLAB_CACHE_DIR")
    if not cache_dir:
        return group.table(limit)
    os.makedirs(cache_dir, exist_ok=True)
    key = hashlib.sha256(spec.replace(" ", "").encode()).hexdigest()[:24]
    path = os.path.join(cache_dir, f"table-v1-{key}.npz")
    if os.path.exists(path):
        data = np.load(path)
        if (data["degree"] == group.degree
                and data["images"].shape[1] == group.degree):
            index = {row.tobytes(): i
                     for i, row in enumerate(data["images"])}
            table = ElementTable(group, data["images"].astype(_DTYPE),
                                 index, data["parent"].astype(_DTYPE),
                                 data["genix"].astype(_DTYPE),
                                 data["layers"].tolist())
            group._table = table
            return table
    table = group.table(limit)
    np.savez_compressed(path, degree=group.degree, images=table.images,
                        parent=table.parent, genix=table.genix,
                        layers=np.array(table.layers))
    return table


# ---------------------------------------------------------------------------
# report emission

def make_report(command: str, args_echo: dict, results: dict,
                seed: int, started: float) -> dict:
    out = {"command": command}
    out.update(args_echo)
    out.update(results)
    out["seed"] = seed
    out["elapsed_ms"] = int((time.monotonic() - started) * 1000)
    out["version"] = __version__
    return out


def emit(report, fmt: str) -> str:
    if fmt == "json":
        if isinstance(report, list):
            return "\n".join(json.dumps(r, default=_json_default)
                             for r in report)
        return json.dumps(report, default=_json_default)
    if fmt == "tsv":
        reports = report if isinstance(report, list) else [report]
        scalar_keys = [k for k in reports[0]
                       if isinstance(reports[0][k],
                                     (str, int, float, bool, type(None)))]
        lines = ["\t".join(scalar_keys)]
        for r in reports:
            lines.append("\t".join(str(r.get(k, "")) for k in scalar_keys))
        return "\n".join(lines)
    raise InputError(f"unknown format {fmt!r}")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    return str(obj)


# ---------------------------------------------------------------------------
# system description files

def parse_system_file(path: str):
    """Line-oriented description of an S^r action; see the README."""
    spec = None
    copies = None
    actors = []
    kappa_text = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("group"):
                spec = line.split("=", 1)[1].strip()
            elif line.startswith("copies"):
                copies = int(line.split("=", 1)[1])
            elif line.startswith("actor"):
                actors.append(line)
            elif line.startswith("kappa"):
                kappa_text = line.split("=", 1)[1].strip()
            else:
                raise InputError(f"unrecognized system line: {line!r}")
    if spec is None or copies is None:
        raise InputError("system file needs 'group S = ...' and 'copies r'")
    table = parse_group(spec).table()
    act_objs = [_parse_actor(table, copies, text) for text in actors]
    act = SemisimpleAction(table, copies, act_objs)
    kappa = None
    if kappa_text is not None:
        parts = [p.strip() for p in kappa_text.split(",")]
        if len(parts) != copies:
            raise InputError("kappa needs one entry per factor")
        kappa = np.array(
            [table.lookup(parse_cycles(p, table.group.degree))
             for p in parts], dtype=_DTYPE)
    return act, kappa


def _parse_actor(table, copies, text):
    head, body = text.split(":", 1)
    sigma = np.arange(copies, dtype=_DTYPE)
    comps = [Automorphism.identity(table) for _ in range(copies)]
    for part in body.split(";"):
        part = part.strip()
        if not part:
            continue
        key, val = part.split("=", 1)
        key = key.strip()
        val = val.strip()
        if key == "sigma":
            if val not in ("id", "()"):
                perm = _cycles_on_copies(val, copies)
                sigma = perm
        elif key.startswith("comp"):
            j = int(key.split()[1]) - 1
            comps[j] = _parse_component(table, val)
        else:
            raise InputError(f"unknown actor field {key!r}")
    return Actor(table, sigma, comps)


def _cycles_on_copies(text, copies):
    """1-based cycles on the factor indices, e.g. '(1 2)'."""
    import re
    cycles = re.findall(r"\(([^()]*)\)", text)
    zero_based = "".join(
        "(" + " ".join(str(int(x) - 1) for x in c.replace(",", " ").split())
        + ")" for c in cycles)
    return parse_cycles(zero_based or "id", copies).images.astype(_DTYPE)


def _parse_component(table, val):
    if val in ("id", "()"):
        return Automorphism.identity(table)
    kind, _, rest = val.partition(" ")
    if kind == "inner":
        g = table.lookup(parse_cycles(rest, table.group.degree))
        return Automorphism.inner(table, g)
    if kind == "conj":
        conj = parse_cycles(rest, table.group.degree)
        ci = conj.inverse()
        imgs = np.empty(table.n, dtype=_DTYPE)
        for i in range(table.n):
            p = ci * table.element(i) * conj
            if not table.contains(p):
                raise InputError("conjugator does not normalize the group")
            imgs[i] = table.lookup(p)
        return Automorphism(table, imgs, provenance=("ambient", rest))
    if kind == "images":
        parts = [p.strip() for p in rest.split(",")]
        if len(parts) != len(table.gen_ids):
            raise InputError("need one image per group generator")
        gen_images = {}
        for gid, p in zip(table.gen_ids, parts):
            gen_images[gid] = table.lookup(
                parse_cycles(p, table.group.degree))
        from .structure import automorphism_from_images
        return automorphism_from_images(table, gen_images)
    raise InputError(f"unknown component form {val!r}")


# ---------------------------------------------------------------------------
# subcommand implementations

def cmd_info(args):
    t = load_table(args.group, args.limit_elements)
    from .groups import is_abelian_set, exponent_of
    from .groups import ElementSet as ES
    results = {
        "group": args.group,
        "degree": t.group.degree,
        "order": t.n,
        "abelian": is_abelian_set(t, ES.full(t)),
        "exponent": exponent_of(t),
        "layers": t.layers,
    }
    return results


def cmd_width(args):
    t = load_table(args.group, args.limit_elements)
    deadline = (time.monotonic() + args.time_budget
                if args.time_budget else None)
    w = parse_word(args.word)
    rep = word_width(t, w, budget=args.budget_evals, deadline=deadline)
    return {
        "group": args.group,
        "order": t.n,
        "word": rep.word,
        "width": rep.width,
        "value_set_size": rep.value_set_size,
        "frontiers": rep.frontier_sizes,
        "truncated": rep.truncated,
    }


def cmd_twisted_width(args):
    t = load_table(args.group, args.limit_elements)
    pairs = []
    for pair_text in args.pairs.split(";"):
        left, _, right = pair_text.partition(":")
        pairs.append((_parse_component(t, left.strip() or "id"),
                      _parse_component(t, right.strip() or "id")))
    rep = twisted_width(t, pairs)
    return {
        "group": args.group,
        "order": t.n,
        "pairs": args.pairs,
        "twisted_width": rep.width,
        "covered": rep.covered,
        "reached_fraction": rep.reached_fraction,
    }


def cmd_power_cover(args):
    t = load_table(args.group, args.limit_elements)
    betas = [_parse_component(t, b.strip())
             for b in (args.beta.split(";") if args.beta else
                       ["id"] * args.slots)]
    if len(betas) != args.slots:
        raise InputError("need one beta per slot")
    divisors = [int(x) for x in args.divisors.split(",")] \
        if args.divisors else [args.q] * args.slots
    rep = power_twist_cover(t, betas, divisors, seed=args.seed)
    return {
        "group": args.group,
        "q": args.q,
        "slots": args.slots,
        "found": rep.found,
        "twists": rep.twists,
        "empirical_M": rep.slots_used,
        "reached_fraction": rep.reached_fraction,
    }


def cmd_reduce(args):
    act, kappa = parse_system_file(args.system)
    if kappa is None:
        kappa = act.n_identity()
    sys_obj = build_system(act, list(range(len(act.actors))), kappa)
    eliminate_H(sys_obj)
    word, trace = reduce_to_single(sys_obj)
    stats = reduction_stats(sys_obj, word)
    return {
        "system": args.system,
        "reduced_equation": str(word),
        "substitutions": len(trace),
        **stats,
    }


def cmd_solve(args):
    act, kappa = parse_system_file(args.system)
    if kappa is None:
        raise InputError("solve needs a kappa line in the system file")
    ids = list(range(len(act.actors)))
    if args.solver == "commutator":
        sol = solve_commutator_equation(act, ids, kappa, d_eff=args.d_eff)
        return {"system": args.system, "solver": "commutator",
                "solution_u": [v.tolist() for v in sol.u],
                "verified": True, **sol.stats}
    if args.solver == "power":
        sol = solve_power_equation(act, ids, args.q, kappa,
                                   dbar=args.dbar, M=args.M,
                                   seed=args.seed, d_eff=args.d_eff)
        return {"system": args.system, "solver": "power", "q": args.q,
                "mode": sol.mode,
                "solution_a": [v.tolist() for v in sol.a],
                "verified": True}
    if args.solver == "twisted":
        if len(act.actors) % 2:
            raise InputError("twisted solver pairs the actors: need an "
                             "even number")
        pairs = [(act.actors[2 * i], act.actors[2 * i + 1])
                 for i in range(len(act.actors) // 2)]
        sol = solve_twisted_system(act, pairs, kappa)
        return {"system": args.system, "solver": "twisted",
                "solution_a": [v.tolist() for v in sol.a],
                "solution_b": [v.tolist() for v in sol.b],
                "verified": True}
    raise InputError(f"unknown solver {args.solver!r}")


def cmd_verify(args):
    out = run_suite(args.suite, args.seed, args.trials)
    if args.trials == 0 and "warning" not in out \
            and out.get("trials", 1) == 0:
        out["warning"] = "vacuous pass: zero trials"
    return out


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def build_parser() -> _Parser:
    p = _Parser(prog="widthlab", description=__doc__)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1,
                   help="accepted for compatibility; orchestration is "
                        "single-threaded")
    p.add_argument("--limit-elements", type=int, default=2_000_000)
    p.add_argument("--budget-evals", type=int, default=EVAL_BUDGET)
    p.add_argument("--time-budget", type=float, default=None,
                   help="seconds; searches abort cleanly with "
                        "truncated: true")
    p.add_argument("--output", default=None, help="write the report here "
                   "as well as stdout")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("info", help="group order and shape")
    sp.add_argument("group")
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("width", help="exact word width by product-set BFS")
    sp.add_argument("group")
    sp.add_argument("--word", required=True)
    sp.set_defaults(func=cmd_width)

    sp = sub.add_parser("twisted-width",
                        help="prefix length of twisted commutator sets")
    sp.add_argument("group")
    sp.add_argument("--pairs", required=True,
                    help="semicolon-separated 'alpha:beta' pairs; each "
                         "side is id, 'inner <cycles>' or 'conj <cycles>'")
    sp.set_defaults(func=cmd_twisted_width)

    sp = sub.add_parser("power-cover",
                        help="search inner twists covering the group")
    sp.add_argument("group")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--slots", type=int, required=True)
    sp.add_argument("--beta", default=None)
    sp.add_argument("--divisors", default=None)
    sp.set_defaults(func=cmd_power_cover)

    sp = sub.add_parser("reduce", help="reduce a system file to one "
                        "equation and report the shape statistics")
    sp.add_argument("system")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("solve", help="run a constructive solver on a "
                        "system file")
    sp.add_argument("system")
    sp.add_argument("--solver", choices=("commutator", "power", "twisted"),
                    default="commutator")
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--d-eff", type=int, default=1)
    sp.add_argument("--dbar", type=int, default=6)
    sp.add_argument("--M", type=int, default=2)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="run a named invariant suite")
    sp.add_argument("suite", choices=sorted(SUITES))
    sp.add_argument("--trials", type=int, default=100)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else USAGE_EXIT
    started = time.monotonic()
    echo = {"argv": argv}
    try:
        results = args.func(args)
    except InputError as exc:
        report = make_report(args.cmd, echo, {"error": str(exc),
                                              "error_kind": "input"},
                             args.seed, started)
        print(emit(report, args.format))
        return 1
    except CapacityError as exc:
        report = make_report(args.cmd, echo, {"error": str(exc),
                                              "error_kind": "capacity"},
                             args.seed, started)
        print(emit(report, args.format))
        return 1
    except InvariantFailure as exc:
        report = make_report(args.cmd, echo, {"error": str(exc),
                                              "error_kind": "invariant"},
                             args.seed, started)
        print(emit(report, args.format))
        return 2
    report = make_report(args.cmd, echo, results, args.seed, started)
    text = emit(report, args.format)
    print(text)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if args.cmd == "verify" and not results.get("ok", False):
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
