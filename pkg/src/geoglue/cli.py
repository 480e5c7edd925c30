"""Command-line front end.

Exit status: 0 success, 1 parse error, 2 failed semantic precondition,
3 check or diff mismatch.  Artifacts go to stdout, diagnostics to stderr;
``--json`` adds one machine-readable JSON line on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import dsl, gluing, pdrings, semantics, topology
from .extensions import ExtensionError, TheoryExtension, add_sum, conditional, desugar_functions, extend
from .syntax import Theory, check_wellformed, normalize, rename_symbols, sequents_of, theory_text

OK, PARSE, SEMANTIC, MISMATCH = 0, 1, 2, 3


class CliFailure(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class TheoryDiff:
    removed: tuple
    added: tuple

    @property
    def empty(self) -> bool:
        return not (self.removed or self.added)

    def text(self) -> str:
        return "".join(f"- {l}\n" for l in self.removed) + "".join(f"+ {l}\n" for l in self.added)


def diff_theories(t1: Theory, t2: Theory) -> TheoryDiff:
    """Line diff of the canonical forms (declarations and axioms)."""
    a = theory_text(normalize(t1)).splitlines()
    b = theory_text(normalize(t2)).splitlines()
    sa, sb = set(a), set(b)
    return TheoryDiff(tuple(l for l in a if l not in sb), tuple(l for l in b if l not in sa))


# --- loading ------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliFailure(PARSE, f"cannot read {path}: {exc.strerror}") from exc


def _parse(fn, path):
    try:
        return fn(_read(path))
    except dsl.ParseError as exc:
        raise CliFailure(PARSE, f"{path}: {exc}") from exc


def _expand(theory: Theory, n: int | None) -> Theory:
    if n is None:
        return theory
    return Theory(theory.signature, tuple(sequents_of(theory, n)), ())


def load_theory(path: str, expand: int | None = None) -> Theory:
    return _expand(_parse(dsl.parse_theory, path), expand)


def load_extension(path: str) -> TheoryExtension:
    return _parse(dsl.parse_extension, path)


def _is_ext(path: str) -> bool:
    return path.endswith(".ext")


# --- commands -------------------------------------------------------------------------

def cmd_check(args, out):
    theory = load_theory(args.theory, args.expand_schemas)
    diags = check_wellformed(theory)
    if diags:
        raise CliFailure(SEMANTIC, "\n".join(map(str, diags)))
    sig = theory.signature
    out.write(f"ok: {len(sig.sorts)} sorts, {len(sig.relations)} relations, "
              f"{len(sig.functions)} functions, {len(theory.axioms)} axioms, "
              f"{len(theory.schemas)} schemas\n")
    return {"status": "ok", "axioms": len(theory.axioms)}


def cmd_transform(args, out):
    is_ext = _is_ext(args.file)
    ext = load_extension(args.file) if is_ext else None
    theory = None if is_ext else load_theory(args.file, args.expand_schemas)
    if args.desugar:
        src = ext or TheoryExtension(None, theory.signature.sorts, theory.signature.relations,
                                     theory.signature.functions, theory.axioms, theory.schemas)
        res = desugar_functions(src)
        out.write(dsl.extension_text(res) if is_ext else theory_text(dsl.extension_as_theory(res)))
    elif args.conditional is not None:
        if not is_ext:
            raise CliFailure(SEMANTIC, "--conditional applies to extension documents (.ext)")
        try:
            phi = dsl.parse_formula(args.conditional)
        except dsl.ParseError as exc:
            raise CliFailure(PARSE, f"formula: {exc}") from exc
        out.write(dsl.extension_text(conditional(ext, phi)))
    elif args.sum:
        exts = [load_extension(p) for p in args.sum]
        if is_ext:
            out.write(dsl.extension_text(add_sum(ext, *exts)))
        else:
            for e in exts:
                theory = extend(theory, e)
            out.write(theory_text(normalize(theory)))
    else:
        raise CliFailure(SEMANTIC, "choose one of --desugar, --conditional, --sum")
    return {"status": "ok"}


def glue_document(kind: str, path: str) -> Theory:
    doc = _parse(dsl.parse_spec, path)
    if kind != doc.kind and not (kind == "general" and doc.kind == "localic"):
        raise CliFailure(SEMANTIC, f"spec describes a {doc.kind} gluing, not {kind}")
    base_dir = Path(path).parent
    try:
        if doc.kind == "localic":
            spec = dsl.build_localic(doc, base_dir)
            if kind == "general":
                t0, system, phis = gluing.localic_system(spec)
                theory = gluing.glue_general(t0, system, phis)
            else:
                theory = gluing.glue_localic(spec)
            witnesses = gluing.constant_witnesses(spec)
        elif doc.kind == "zariski":
            spec = dsl.build_zariski(doc)
            theory = gluing.glue_zariski(spec)
            witnesses = gluing.zariski_witnesses(spec)
        elif doc.kind == "cris":
            spec = dsl.build_crystalline(doc)
            theory = gluing.glue_crystalline(spec)
            witnesses = gluing.crystalline_witnesses(spec)
        else:
            raise CliFailure(SEMANTIC, f"{doc.kind} specs need the localic statement form")
        if dsl.spec_eliminates(doc):
            theory = gluing.eliminate_props(theory, witnesses)
        renames = dsl.spec_renames(doc)
        if renames:
            theory = normalize(rename_symbols(theory, renames))
    except dsl.ParseError as exc:
        raise CliFailure(PARSE, f"{path}: {exc}") from exc
    except (gluing.GluingError, ExtensionError) as exc:
        raise CliFailure(SEMANTIC, str(exc)) from exc
    return theory


def cmd_glue(args, out):
    theory = glue_document(args.kind, args.spec)
    out.write(theory_text(theory))
    return {"status": "ok", "axioms": len(theory.axioms)}


def _load_model(path):
    try:
        return dsl.parse_model(_read(path))
    except (dsl.ParseError, semantics.ModelError) as exc:
        raise CliFailure(PARSE, f"{path}: {exc}") from exc


def cmd_model(args, out):
    M = _load_model(args.model)
    errs = semantics.validate(M)
    if errs:
        raise CliFailure(SEMANTIC, "\n".join(errs))
    if args.action == "check":
        theory = load_theory(args.target, args.expand_schemas)
        errs = semantics.validate_symbols(M, theory.signature)
        if errs:
            raise CliFailure(SEMANTIC, "\n".join(errs))
        verdict = semantics.check_theory(M, theory)
        out.write(verdict.describe() + "\n")
        if not verdict.holds:
            out.write(f"axiom: {dsl.show_sequent(verdict.sequent)}\n")
            return {"status": "mismatch", "point": str(verdict.point),
                    "assignment": dict(verdict.assignment)}, MISMATCH
        return {"status": "ok"}
    ext = load_extension(args.target)
    try:
        models = semantics.enumerate_extensions(M, ext, args.bound)
    except ExtensionError as exc:
        raise CliFailure(SEMANTIC, str(exc)) from exc
    out.write(f"{len(models)} extensions up to isomorphism\n")
    for k, N in enumerate(models):
        out.write(f"# extension {k}\n{dsl.model_text(N)}")
    return {"status": "ok", "count": len(models)}


def _pd_algebra(args) -> pdrings.TruncatedPDAlgebra:
    from .library import PDRingData, PresentedRing

    tag = args.base
    ideal = tuple(int(x) for x in args.ideal.split(",") if x.strip()) if args.ideal else ()
    if args.gamma == "auto":
        if not ideal:
            base = pdrings.BasePD(tag)
        elif tag == "QQ":
            base = pdrings.BasePD("QQ", ideal or (1,))
        else:
            m = int(tag[3:]) if tag.startswith("ZZ/") else 0
            if not m or len(ideal) != 1:
                raise CliFailure(SEMANTIC, "--gamma auto needs ZZ/m and one ideal generator")
            base = pdrings.BasePD.from_data(pdrings.modular_pd_data(m, ideal[0], args.degree))
    else:
        table = []
        for entry in (args.gamma or "").split(","):
            if entry.strip():
                n, g, v = (int(x) for x in entry.split(":"))
                table.append((n, g, v))
        base = pdrings.BasePD.from_data(PDRingData(PresentedRing(tag), ideal, tuple(table), args.degree))
    xs = tuple(v for v in args.x.split(",") if v) if args.x else ()
    ys = tuple(v for v in args.y.split(",") if v) if args.y else ()
    alg = pdrings.TruncatedPDAlgebra(base, xs, ys, args.degree)
    for v in args.localize or ():
        alg = pdrings.localize(alg, v)
    return alg


def cmd_pd(args, out):
    try:
        alg = _pd_algebra(args)
        elems = [alg.parse(e) for e in args.elements]
        if args.action == "eval":
            for e in elems:
                out.write(f"{e}\n")
        elif args.action == "gamma":
            for e in elems:
                out.write(f"{pdrings.gamma(args.n, e)}\n")
        elif args.action == "saturate":
            sat = pdrings.pd_saturate(pdrings.PDIdealHandle(alg, tuple(elems)))
            for g in sat.generators:
                out.write(f"{g}\n")
        elif args.action == "nil-witness":
            (a,) = elems
            w = pdrings.nil_witness(a, args.e, args.n)
            out.write(f"k = {w.k}, bound = {w.bound}, coefficient = {w.coefficient}\n")
            return {"status": "ok", "k": w.k, "bound": w.bound}
        else:
            samples = elems
            if not samples:
                if not alg.base.modulus:
                    raise CliFailure(SEMANTIC, "give samples unless the base is a finite ZZ/m")
                samples = [alg.const(c) for c in range(alg.base.modulus)]
            report = pdrings.check_pd_axioms(alg, samples)
            out.write(report.describe() + "\n")
            if not report.ok:
                return {"status": "mismatch", "failures": len(report.failures)}, MISMATCH
    except pdrings.PDError as exc:
        raise CliFailure(SEMANTIC, str(exc)) from exc
    return {"status": "ok"}


def _plugin(args):
    if args.family == "truncated-chain":
        return topology.chain_family(args.length, args.surjective)
    return topology.PLUGINS[args.family]()


def cmd_topo(args, out):
    plugin = _plugin(args)
    M = _load_model(args.model)
    errs = semantics.validate_symbols(M, plugin.theory.signature)
    if errs:
        raise CliFailure(SEMANTIC, "\n".join(errs))
    if args.action == "irreducible":
        ans = topology.irreducible(plugin, M)
        out.write(("irreducible" if ans else "not irreducible") + "\n")
        return ({"status": "ok"}, OK) if ans else ({"status": "mismatch"}, MISMATCH)
    if args.action == "rigidity":
        trace = topology.rigidity_run(plugin, M, args.fuel, args.bound)
        out.write(trace.report(plugin) + "\n")
        if trace.exhausted:
            return {"status": "fuel exhausted", "steps": trace.steps()}, MISMATCH
        return {"status": "covered", "steps": trace.steps()}
    if args.axiom >= len(plugin.quotient):
        raise CliFailure(SEMANTIC, f"the family has {len(plugin.quotient)} quotient axioms")
    ax = plugin.quotient[args.axiom]
    values = tuple(int(v) if v.lstrip("-").isdigit() else v
                   for v in (args.at.split(",") if args.at else []))
    try:
        cos = topology.cosieve_generators(plugin, M, ax, values, args.bound)
    except topology.TopologyError as exc:
        raise CliFailure(SEMANTIC, str(exc)) from exc
    out.write(f"axiom: {dsl.show_sequent(ax)}\n")
    out.write(f"{len(cos.generators)} generators\n")
    for g in cos.generators:
        out.write(f"-> {topology.show_model(g.target)} via {g.show()}\n")
    return {"status": "ok", "generators": len(cos.generators)}


def cmd_diff(args, out):
    d = diff_theories(load_theory(args.t1, args.expand_schemas), load_theory(args.t2, args.expand_schemas))
    out.write(d.text())
    if d.empty:
        return {"status": "ok"}
    return {"status": "mismatch", "removed": len(d.removed), "added": len(d.added)}, MISMATCH


# --- argument parsing ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoglue", description="Geometric theories: check, transform, glue.")
    p.add_argument("--expand-schemas", type=int, default=None, metavar="N",
                   help="replace schema families by their first N instances")
    p.add_argument("--json", action="store_true", help="machine-readable report on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="well-formedness of a theory")
    c.add_argument("theory")
    c.set_defaults(fn=cmd_check)

    t = sub.add_parser("transform", help="desugar, conditionalize or sum")
    t.add_argument("file")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--desugar", action="store_true")
    g.add_argument("--conditional", metavar="PHI")
    g.add_argument("--sum", nargs="+", metavar="EXT")
    t.set_defaults(fn=cmd_transform)

    gl = sub.add_parser("glue", help="compile a cover spec")
    gl.add_argument("kind", choices=["zariski", "cris", "localic", "general"])
    gl.add_argument("spec")
    gl.set_defaults(fn=cmd_glue)

    m = sub.add_parser("model", help="finite model checks")
    m.add_argument("action", choices=["check", "enum-ext"])
    m.add_argument("model")
    m.add_argument("target", help="theory (check) or extension (enum-ext)")
    m.add_argument("--bound", type=int, default=2)
    m.set_defaults(fn=cmd_model)

    pd = sub.add_parser("pd", help="divided-power arithmetic")
    pd.add_argument("action", choices=["eval", "gamma", "saturate", "nil-witness", "axioms"])
    pd.add_argument("elements", nargs="*")
    pd.add_argument("--base", default="QQ", help="ZZ, QQ or ZZ/m")
    pd.add_argument("--ideal", default="", help="comma-separated base ideal generators")
    pd.add_argument("--gamma", default="auto", help="'auto' or n:g:value,...")
    pd.add_argument("--x", default="X", help="divided-power variables")
    pd.add_argument("--y", default="", help="polynomial variables")
    pd.add_argument("--degree", type=int, default=4)
    pd.add_argument("--localize", action="append", metavar="Y")
    pd.add_argument("--n", type=int, default=2)
    pd.add_argument("--e", type=int, default=2)
    pd.set_defaults(fn=cmd_pd)

    tp = sub.add_parser("topo", help="induced topologies on small models")
    tp.add_argument("action", choices=["cosieve", "rigidity", "irreducible"])
    tp.add_argument("family", choices=sorted(topology.PLUGINS))
    tp.add_argument("model")
    tp.add_argument("--axiom", type=int, default=0)
    tp.add_argument("--at", default="", help="comma-separated instance values")
    tp.add_argument("--fuel", type=int, default=8)
    tp.add_argument("--bound", type=int, default=3)
    tp.add_argument("--length", type=int, default=4)
    tp.add_argument("--surjective", choices=["even", "odd", "all"], default="all")
    tp.set_defaults(fn=cmd_topo)

    d = sub.add_parser("diff", help="structural diff of canonical forms")
    d.add_argument("t1")
    d.add_argument("t2")
    d.set_defaults(fn=cmd_diff)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return PARSE if exc.code else OK
    try:
        try:
            result = args.fn(args, out)
        except ExtensionError as exc:
            raise CliFailure(SEMANTIC, str(exc)) from exc
        report, status = result if isinstance(result, tuple) else (result, OK)
    except CliFailure as exc:
        err.write(f"error: {exc}\n")
        report, status = {"status": "error", "message": str(exc)}, exc.status
    if args.json:
        err.write(json.dumps({"command": args.command, "exit": status, **report}, sort_keys=True) + "\n")
    return status


def main():
    sys.exit(run())
