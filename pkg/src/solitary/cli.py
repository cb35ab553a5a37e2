"""Command-line entry point.

Exit codes: 0 success, 1 domain error (printed as JSON with the error
name), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import amenability as am
from . import cosets, permrep, plotting, stallings
from .chabauty import (
    SubgroupHandle,
    SubgroupUniverse,
    conjugate,
    constraint_of_window,
    isolation_certificate,
    verify_certificate,
    window_test,
    MembershipConstraint,
)
from .config import ConfigError, load
from .errors import GroupError, NotFiniteIndex, UnsupportedFormat
from .serialize import emit_dot, emit_report, to_jsonable
from .words import Presentation, parse_presentation, parse_word, parse_words

EPILOG = """\
presentations: "<a,b| r1, r2>", relators are words, "lhs = rhs" means lhs*rhs^-1
words: generators joined by '*' or spaces, powers x^k (k may be negative), 1 = identity
subgroups: comma-separated generator words, e.g. "a^2,b"; "1" is the trivial subgroup
reps: ';'-separated subgroups, each optionally followed by @multiplicity, e.g. "a^2;a^3@2"
environment: every configuration key may be set as SOLITARY_<KEY>, e.g. SOLITARY_MAX_INDEX=5
"""


class _Usage(Exception):
    pass


# --- argument helpers --------------------------------------------------------

def _group(args) -> Presentation:
    return parse_presentation(args.group)


def _handle(p: Presentation, text: str, cfg) -> SubgroupHandle:
    return SubgroupHandle.generated_by(p, parse_words(p.alphabet, text), cfg.max_cosets)


def _table(p: Presentation, text: str, cfg) -> cosets.CosetTable:
    h = _handle(p, text, cfg)
    if not h.is_finite_index:
        raise NotFiniteIndex("this command needs a finite-index subgroup")
    return h.as_table()


def _rep(p: Presentation, text: str, cfg) -> permrep.PermRep:
    parts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        mult = 1
        if "@" in chunk:
            chunk, m = chunk.rsplit("@", 1)
            try:
                mult = int(m)
            except ValueError:
                raise _Usage(f"bad multiplicity {m!r}") from None
        parts.append((permrep.quasiregular(_handle(p, chunk or "1", cfg), cfg.radius), mult))
    return permrep.disjoint_union(parts)


def _points(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise _Usage(f"expected comma-separated point labels, got {text!r}") from None


def _window_action(text: str, p: Presentation) -> permrep.WindowAction:
    """Generator images from a JSON object ``{"gen": [...]}`` or ``@file``."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise _Usage(f"bad permutation JSON: {e}") from None
    missing = [g for g in p.alphabet.names if g not in data]
    if missing:
        raise _Usage(f"missing images for generators {missing}")
    return permrep.WindowAction(p, [data[g] for g in p.alphabet.names])


# --- commands ----------------------------------------------------------------

def cmd_parse(args, cfg):
    p = _group(args)
    out = {"presentation": str(p), "generators": list(p.alphabet.names),
           "relators": [str(r) for r in p.relators], "free": p.is_free}
    if args.word is not None:
        out["word"] = str(parse_word(p.alphabet, args.word))
    return out, None


def cmd_cosets(args, cfg):
    p = _group(args)
    t = cosets.todd_coxeter(p, parse_words(p.alphabet, args.subgroup), cfg.max_cosets)
    return t, None


def cmd_low_index(args, cfg):
    p = _group(args)
    tables = cosets.low_index(p, cfg.max_index, cfg.node_limit)
    if args.conjugacy:
        tables = cosets.conjugacy_representatives(tables)
    fig = (lambda path: plotting.low_index_counts(tables, path, f"{p}, index <= {cfg.max_index}"))
    return tables, fig


def cmd_overgroups(args, cfg):
    p = _group(args)
    return cosets.overgroups(_table(p, args.subgroup, cfg)), None


def cmd_fold(args, cfg):
    p = _group(args)
    if not p.is_free:
        raise _Usage("fold works in free groups only")
    return stallings.fold(p.alphabet, parse_words(p.alphabet, args.subgroup)), None


def cmd_member(args, cfg):
    p = _group(args)
    h = _handle(p, args.subgroup, cfg)
    w = parse_word(p.alphabet, args.word)
    return {"word": str(w), "member": h.member(w)}, None


def cmd_separate(args, cfg):
    p = _group(args)
    if not p.is_free:
        raise _Usage("separate works in free groups only")
    gens = parse_words(p.alphabet, args.subgroup)
    core = stallings.fold(p.alphabet, gens)
    g = parse_word(p.alphabet, args.element)
    k = stallings.hall_separate(core, g)
    # verification runs through the coset-table path, not the core graph
    t = stallings.core_to_table(k, p)
    verified = {
        "finite_index": k.is_complete,
        "contains_subgroup": all(cosets.coset_of(t, s) == 0 for s in gens),
        "excludes_element": cosets.coset_of(t, g) != 0,
        "index_bound": t.index <= core.vertices + len(g) + 1,
    }
    return {"element": str(g), "subgroup": to_jsonable(t), "verified": verified,
            "generators": [str(w) for w in cosets.schreier_generators(t)]}, None


def cmd_conjugate(args, cfg):
    p = _group(args)
    return conjugate(_handle(p, args.subgroup, cfg), parse_word(p.alphabet, args.by)), None


def cmd_window(args, cfg):
    p = _group(args)
    h = _handle(p, args.subgroup, cfg)
    k = _handle(p, args.other, cfg)
    omega = parse_words(p.alphabet, args.omega)
    return {"in_window": window_test(k, h, omega), "constraint": constraint_of_window(h, omega)}, None


def cmd_isolate(args, cfg):
    p = _group(args)
    return isolation_certificate(_handle(p, args.subgroup, cfg)), None


def cmd_verify_cert(args, cfg):
    p = _group(args)
    h = _handle(p, args.subgroup, cfg)
    if args.must_contain is None and args.must_exclude is None:
        c = isolation_certificate(h)
    else:
        c = MembershipConstraint(tuple(parse_words(p.alphabet, args.must_contain or "")),
                                 tuple(parse_words(p.alphabet, args.must_exclude or "")))
    universe = SubgroupUniverse(SubgroupHandle.finite_index(t)
                                for t in cosets.low_index(p, cfg.max_index, cfg.node_limit))
    report = verify_certificate(c, h, universe)
    if cfg.format == "text":
        return report, None
    return {"certificate": c, "universe": len(universe), "report": report}, None


def cmd_quasiregular(args, cfg):
    p = _group(args)
    return permrep.quasiregular(_handle(p, args.subgroup, cfg), cfg.radius), None


def cmd_tau_star(args, cfg):
    p = _group(args)
    r = permrep.tau_star_lerf(p, cfg.max_index, cfg.copies, cfg.node_limit)
    fig = None
    if r.is_complete():
        fig = lambda path: plotting.cycle_type_bars(r.cycle_types(), path, f"tau* truncation of {p}")
    return r, fig


def cmd_tau_star_solitary(args, cfg):
    p = _group(args)
    classified = [(_handle(p, s, cfg), permrep.DELTA) for s in args.delta or []]
    classified += [(_handle(p, s, cfg), permrep.SIGMA) for s in args.sigma or []]
    if not classified:
        raise _Usage("give at least one --delta or --sigma subgroup")
    return permrep.tau_star_solitary(classified, cfg.copies, cfg.radius), None


def cmd_apply(args, cfg):
    p = _group(args)
    r = _rep(p, args.rep, cfg)
    w = parse_word(p.alphabet, args.word)
    return {"point": args.point, "word": str(w), "image": r.apply(w, args.point)}, None


def cmd_stabilizer(args, cfg):
    p = _group(args)
    r = _rep(p, args.rep, cfg)
    return r.stabilizer(args.point), None


def cmd_trace(args, cfg):
    p = _group(args)
    r = _rep(p, args.rep, cfg)
    w = parse_word(p.alphabet, args.word)
    return {"point": args.point, "word": str(w), "trace": sorted(r.trace(args.point, w))}, None


def cmd_folner_check(args, cfg):
    p = _group(args)
    r = _rep(p, args.rep, cfg)
    return am.folner_check(r, _points(args.set), parse_words(p.alphabet, args.omega), cfg.epsilon_value), None


def cmd_folner_search(args, cfg):
    p = _group(args)
    r = _rep(p, args.rep, cfg)
    omega = parse_words(p.alphabet, args.omega)
    result = am.folner_search(r, args.point, omega, cfg.epsilon_value, cfg.max_size)

    def fig(path):
        pts = am.prefix_ratios(r, args.point, omega, cfg.max_size)
        return plotting.ratio_curve([m for m, _ in pts], [q for _, q in pts], cfg.epsilon_value, path)
    return result, fig


def cmd_bs_probe(args, cfg):
    report = am.bs_obstruction_probe(args.n, cfg.max_index, cfg.node_limit)
    return report, (lambda path: plotting.bs_orders(report.quotients, args.n, path))


def cmd_free_product_folner(args, cfg):
    if args.desk is not None:
        sigma, tau, x = am.desk_instance(args.desk, cfg.seed)
    else:
        if args.sigma is None or args.tau is None or args.point is None:
            raise _Usage("give --desk N, or --sigma and --tau together with --point")
        sigma = _window_action(args.sigma, parse_presentation(args.sigma_group))
        tau = _window_action(args.tau, parse_presentation(args.tau_group))
        x = args.point
    S = parse_words(sigma.presentation.alphabet, args.S) if args.S else sigma.presentation.alphabet.generators()
    T = parse_words(tau.presentation.alphabet, args.T) if args.T else tau.presentation.alphabet.generators()
    A = _points(args.A) if args.A else None
    res = am.free_product_folner(sigma, tau, x, S, T, cfg.epsilon_value, A)
    out = res.to_dict()
    out["x"] = x
    out["passed"] = res.passed
    return out, None


def cmd_export(args, cfg):
    p = _group(args)
    if args.rep is not None:
        value = _rep(p, args.rep, cfg)
    elif p.is_free:
        value = stallings.fold(p.alphabet, parse_words(p.alphabet, args.subgroup or ""))
    else:
        value = _table(p, args.subgroup or "", cfg)
    return value, None


COMMANDS = {
    "parse": (cmd_parse, "parse a presentation and print its canonical form"),
    "cosets": (cmd_cosets, "Todd-Coxeter coset enumeration"),
    "low-index": (cmd_low_index, "all subgroups of index <= --max-index"),
    "overgroups": (cmd_overgroups, "every subgroup containing a finite-index subgroup"),
    "fold": (cmd_fold, "Stallings core graph of a subgroup of a free group"),
    "member": (cmd_member, "subgroup membership of a word"),
    "separate": (cmd_separate, "finite-index subgroup containing H but not an element"),
    "conjugate": (cmd_conjugate, "the subgroup g H g^-1"),
    "window": (cmd_window, "whether K lies in the window W(H, omega)"),
    "isolate": (cmd_isolate, "isolation certificate of a finite-index subgroup"),
    "verify-cert": (cmd_verify_cert, "check a certificate against low_index(G, --max-index)"),
    "quasiregular": (cmd_quasiregular, "the action of G on G/H"),
    "tau-star": (cmd_tau_star, "truncated generic representation of a LERF group"),
    "tau-star-solitary": (cmd_tau_star_solitary, "truncated representation from classified subgroups"),
    "apply": (cmd_apply, "image of a point under a word"),
    "stabilizer": (cmd_stabilizer, "stabilizer subgroup of a point"),
    "trace": (cmd_trace, "points visited by a word from a point"),
    "folner-check": (cmd_folner_check, "exact Følner ratios of a point set"),
    "folner-search": (cmd_folner_search, "search an orbit for a Følner set"),
    "bs-probe": (cmd_bs_probe, "finite quotients of BS(1,n) and the order of s"),
    "free-product-folner": (cmd_free_product_folner, "free-product Følner construction"),
    "export": (cmd_export, "dump a subgroup graph or action window"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--format", choices=["json", "dot", "csv", "text"])
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--max-cosets", type=int)
    common.add_argument("--max-index", type=int)
    common.add_argument("--copies", type=int)
    common.add_argument("--radius", type=int)
    common.add_argument("--epsilon", help="exact rational p/q")
    common.add_argument("--max-size", type=int)
    common.add_argument("--node-limit", type=int)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="solitary", description="Subgroup spaces and their permutation actions.",
                                     epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    cmds = {}
    for name, (_, help_text) in COMMANDS.items():
        cmds[name] = sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                                    epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)

    def group(*names, required=True):
        for n in names:
            cmds[n].add_argument("--group", required=required, help="presentation, e.g. \"<a,b|>\"")

    group("parse", "cosets", "low-index", "overgroups", "fold", "member", "separate", "conjugate", "window",
          "isolate", "verify-cert", "quasiregular", "tau-star", "tau-star-solitary", "apply", "stabilizer",
          "trace", "folner-check", "folner-search", "export")
    cmds["parse"].add_argument("--word")
    for n in ("cosets", "overgroups", "fold", "member", "separate", "conjugate", "window", "isolate",
              "verify-cert", "quasiregular"):
        cmds[n].add_argument("--subgroup", required=n not in ("cosets",), default="",
                             help="comma-separated generators")
    cmds["export"].add_argument("--subgroup")
    cmds["export"].add_argument("--rep")
    cmds["low-index"].add_argument("--conjugacy", action="store_true", help="one table per conjugacy class")
    cmds["member"].add_argument("--word", required=True)
    cmds["separate"].add_argument("--element", required=True)
    cmds["conjugate"].add_argument("--by", required=True)
    cmds["window"].add_argument("--other", required=True, help="generators of K")
    cmds["window"].add_argument("--omega", required=True)
    cmds["verify-cert"].add_argument("--must-contain")
    cmds["verify-cert"].add_argument("--must-exclude")
    cmds["tau-star-solitary"].add_argument("--delta", action="append", help="a Delta-class subgroup (repeatable)")
    cmds["tau-star-solitary"].add_argument("--sigma", action="append", help="a Sigma-class subgroup (repeatable)")
    for n in ("apply", "stabilizer", "trace", "folner-check", "folner-search"):
        cmds[n].add_argument("--rep", required=True)
    for n in ("apply", "stabilizer", "trace", "folner-search"):
        cmds[n].add_argument("--point", type=int, required=n != "folner-search", default=0)
    for n in ("apply", "trace"):
        cmds[n].add_argument("--word", required=True)
    cmds["folner-check"].add_argument("--set", required=True, help="comma-separated point labels")
    for n in ("folner-check", "folner-search"):
        cmds[n].add_argument("--omega", required=True)
    cmds["bs-probe"].add_argument("--n", type=int, required=True)
    fp = cmds["free-product-folner"]
    fp.add_argument("--desk", type=int, help="use the seeded Z*Z test instance on this many points")
    fp.add_argument("--sigma-group", default="<s|>")
    fp.add_argument("--tau-group", default="<t|>")
    fp.add_argument("--sigma", help="JSON generator images for G, or @file")
    fp.add_argument("--tau", help="JSON generator images for K, or @file")
    fp.add_argument("--point", type=int)
    fp.add_argument("--S", help="words over G (default: its generators)")
    fp.add_argument("--T", help="words over K (default: its generators)")
    fp.add_argument("--A", help="points whose S-images must be kept (default: the point)")
    for n in ("folner-search", "tau-star", "bs-probe", "low-index"):
        cmds[n].add_argument("--figure", help="also render a figure to this file (format from the suffix)")
    return parser


def _config(args):
    overrides = {k: getattr(args, k, None) for k in
                 ("max_cosets", "max_index", "copies", "radius", "epsilon", "max_size", "node_limit", "seed", "format")}
    return load(args.config, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except (ConfigError, OSError) as e:
        parser.error(str(e))
    func = COMMANDS[args.command][0]
    try:
        value, fig = func(args, cfg)
        text = emit_report(value, cfg.format)
    except _Usage as e:
        parser.error(str(e))
    except GroupError as e:
        error = {"error": e.name, "message": str(e)}
        if isinstance(e, UnsupportedFormat):
            error["format"] = cfg.format
        sys.stdout.write(json.dumps(error, sort_keys=True) + "\n")
        return 1
    except ValueError as e:
        parser.error(str(e))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    figure = getattr(args, "figure", None)
    if figure and fig is not None:
        fig(figure)
    return 0


if __name__ == "__main__":
    sys.exit(main())
