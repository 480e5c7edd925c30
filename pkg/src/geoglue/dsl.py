"""Text formats: theories, extensions, models and cover specs.

Theory and extension documents share one statement syntax::

    sort A;
    rel R sub A*A;          rel p;
    fun f : A*A -> A;       fun one : A;
    axiom [x:A, y:A] R(x, y) & x = y |- (exists z:A. R(z, x));
    schema loc_stable[A] @loc_stable when p;

Identifiers bound by the context or an ``exists`` are variables, every other
identifier in term position is a function symbol.  ``#`` starts a comment.
The printer in ``syntax.theory_text`` is the inverse on canonical documents.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .extensions import TheoryExtension
from .semantics import FinitePoset, PresheafModel, POINT, zmod_ring_model
from .syntax import (
    And, App, AxiomSchema, Eq, Exists, FALSE, Or, RelAtom, SchemaOr, Sequent, Signature, TRUE,
    Theory, Var, show_sequent, theory_text,
)


class ParseError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<str>"[^"\n]*")
  | (?P<sym>\|-|->|<=|[\[\](){},:;.=&|*@/^+\-])
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int


def tokenize(text: str) -> list:
    out = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        if kind != "ws":
            out.append(_Tok(kind, m.group(), line))
        line += m.group().count("\n")
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else _Tok("eof", "", self.line())

    def line(self):
        if not self.toks:
            return 1
        return self.toks[min(self.i, len(self.toks) - 1)].line

    def at(self, text, k=0):
        t = self.peek(k)
        return t.kind in ("sym", "id") and t.text == text

    def take(self, text=None, kind=None):
        t = self.peek()
        if t.kind == "eof":
            raise ParseError(f"unexpected end of input, expected {text or kind}", t.line)
        if text is not None and t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line)
        if kind is not None and t.kind != kind:
            raise ParseError(f"expected {kind}, found {t.text!r}", t.line)
        self.i += 1
        return t

    def ident(self):
        return self.take(kind="id").text

    def done(self):
        return self.peek().kind == "eof"

    # terms and formulas
    def context(self):
        self.take("[")
        ctx = []
        while not self.at("]"):
            name = self.ident()
            self.take(":")
            ctx.append(Var(name, self.ident()))
            if not self.at("]"):
                self.take(",")
        self.take("]")
        names = [v.name for v in ctx]
        if len(set(names)) != len(names):
            raise ParseError("repeated variable in context", self.line())
        return tuple(ctx)

    def term(self, scope):
        name = self.ident()
        if self.at("("):
            self.take("(")
            args = []
            while not self.at(")"):
                args.append(self.term(scope))
                if not self.at(")"):
                    self.take(",")
            self.take(")")
            return App(name, tuple(args))
        if name in scope:
            return scope[name]
        return App(name)

    def formula(self, scope):
        parts = [self.conj(scope)]
        while self.at("|") and not self.at("|-"):
            self.take("|")
            parts.append(self.conj(scope))
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self, scope):
        parts = [self.atom(scope)]
        while self.at("&"):
            self.take("&")
            parts.append(self.atom(scope))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def atom(self, scope):
        if self.at("("):
            self.take("(")
            f = self.formula(scope)
            self.take(")")
            return f
        if self.at("true"):
            self.take()
            return TRUE
        if self.at("false"):
            self.take()
            return FALSE
        if self.at("exists"):
            self.take()
            name = self.ident()
            self.take(":")
            var = Var(name, self.ident())
            self.take(".")
            body = self.formula({**scope, name: var})
            return Exists(var, body)
        if self.at("bigor"):
            self.take()
            kind = self.ident()
            params = self.bracket_names()
            self.take("(")
            args = []
            while not self.at(")"):
                args.append(self.term(scope))
                if not self.at(")"):
                    self.take(",")
            self.take(")")
            self.take("@")
            return SchemaOr(kind, params, tuple(args), self.ident())
        t = self.term(scope)
        if self.at("="):
            self.take("=")
            return Eq(t, self.term(scope))
        if isinstance(t, Var):
            raise ParseError(f"variable {t.name} used as a formula", self.line())
        return RelAtom(t.fun, t.args)

    def bracket_names(self):
        self.take("[")
        names = []
        while not self.at("]"):
            names.append(self.ident())
            if not self.at("]"):
                self.take(",")
        self.take("]")
        return tuple(names)

    def sequent(self):
        ctx = self.context()
        scope = {v.name: v for v in ctx}
        ante = self.formula(scope)
        self.take("|-")
        return Sequent(ctx, ante, self.formula(scope))

    def arity(self):
        sorts = [self.ident()]
        while self.at("*"):
            self.take("*")
            sorts.append(self.ident())
        return tuple(sorts)

    # declarations
    def declarations(self, stop=None):
        sorts, rels, funs, axioms, schemas, obligations = [], [], [], [], [], []
        seen = set()

        def fresh(line):
            name = self.ident()
            if name in seen:
                raise ParseError(f"{name} declared twice", line)
            seen.add(name)
            return name

        while not self.done() and not (stop and self.at(stop)):
            kw = self.ident()
            line = self.line()
            if kw == "sort":
                sorts.append(fresh(line))
            elif kw == "rel":
                name = fresh(line)
                ar = ()
                if self.at("sub"):
                    self.take()
                    ar = self.arity()
                rels.append((name, ar))
            elif kw == "fun":
                name = fresh(line)
                self.take(":")
                first = self.arity()
                if self.at("->"):
                    self.take()
                    funs.append((name, first, self.ident()))
                else:
                    if len(first) != 1:
                        raise ParseError("constant needs a single result sort", line)
                    funs.append((name, (), first[0]))
            elif kw in ("axiom", "obligation"):
                (axioms if kw == "axiom" else obligations).append(self.sequent())
            elif kw == "schema":
                kind = self.ident()
                params = self.bracket_names()
                self.take("@")
                bound = self.ident()
                guard = None
                if self.at("when"):
                    self.take()
                    guard = self.formula({})
                schemas.append(AxiomSchema(kind, params, bound, guard))
            else:
                raise ParseError(f"unknown declaration {kw!r}", line)
            self.take(";")
        return sorts, rels, funs, axioms, schemas, obligations


def _check_names(sorts, rels, funs):
    seen = set()
    for n in list(sorts) + [r[0] for r in rels] + [f[0] for f in funs]:
        if n in seen:
            raise ParseError(f"{n} declared twice")
        seen.add(n)


def parse_theory(text: str) -> Theory:
    p = _Parser(text)
    sorts, rels, funs, axioms, schemas, obligations = p.declarations()
    if obligations:
        raise ParseError("obligations belong in extension documents")
    _check_names(sorts, rels, funs)
    return Theory(Signature(tuple(sorts), tuple(rels), tuple(funs)), tuple(axioms), tuple(schemas))


def parse_extension(text: str) -> TheoryExtension:
    p = _Parser(text)
    sorts, rels, funs, axioms, schemas, obligations = p.declarations()
    _check_names(sorts, rels, funs)
    return TheoryExtension(None, tuple(sorts), tuple(rels), tuple(funs), tuple(axioms),
                           tuple(schemas), tuple(obligations))


def parse_formula(text: str, context=()) -> object:
    p = _Parser(text)
    f = p.formula({v.name: v for v in context})
    if not p.done():
        raise ParseError(f"trailing input {p.peek().text!r}", p.line())
    return f


def parse_sequent(text: str) -> Sequent:
    p = _Parser(text)
    s = p.sequent()
    if not p.done():
        raise ParseError(f"trailing input {p.peek().text!r}", p.line())
    return s


def extension_text(ext: TheoryExtension) -> str:
    body = theory_text(Theory(ext.signature, ext.axioms, ext.schemas))
    extra = "".join(f"obligation {show_sequent(s)};\n" for s in ext.obligations)
    return body + extra


def extension_as_theory(ext: TheoryExtension) -> Theory:
    return Theory(ext.signature, ext.axioms, ext.schemas)


# --- models -------------------------------------------------------------------------

def _element(tok: _Tok):
    return int(tok.text) if tok.kind == "num" else tok.text


def _elements(p: _Parser) -> list:
    out = []
    while not p.at(";"):
        t = p.take()
        if t.kind not in ("num", "id"):
            raise ParseError(f"expected an element, found {t.text!r}", t.line)
        out.append(_element(t))
    return out


def _tuple(p: _Parser) -> tuple:
    p.take("(")
    out = []
    while not p.at(")"):
        t = p.take()
        out.append(_element(t))
        if not p.at(")"):
            p.take(",")
    p.take(")")
    return tuple(out)


def _points_clause(p: _Parser, points):
    if p.at("@"):
        p.take("@")
        t = p.take()
        return [_element(t)]
    return list(points)


def parse_model(text: str) -> PresheafModel:
    """Model documents::

        point a; point b; le a b;      # optional; default one point *
        sort A @a = 0 1;  sort A = 0 1 2;
        map A a b = 0->0 1->1;          # defaults to the inclusion
        rel R @a = (0, 1) (1, 1);       rel p @b = ();
        fun f @a = (0)->1 (1)->1;       fun c = ()->0;
        ring A = ZZ/6;                  # Z/m with add, mul, neg, zero, one
    """
    p = _Parser(text)
    points, less = [], []
    sorts, trans, rels, funs = {}, {}, {}, {}
    ring_sorts = []
    while not p.done():
        kw = p.ident()
        line = p.line()
        if kw == "point":
            points.append(_element(p.take()))
        elif kw == "le":
            a = _element(p.take())
            less.append((a, _element(p.take())))
        elif kw == "ring":
            name = p.ident()
            p.take("=")
            tag = p.ident()
            p.take("/")
            m = int(p.take(kind="num").text)
            if tag != "ZZ":
                raise ParseError("ring shorthand supports ZZ/m only", line)
            ring_sorts.append((name, m))
        elif kw in ("sort", "map", "rel", "fun"):
            name = p.ident()
            if kw == "map":
                a = _element(p.take())
                b = _element(p.take())
                p.take("=")
                table = {}
                while not p.at(";"):
                    x = _element(p.take())
                    p.take("->")
                    table[x] = _element(p.take())
                trans.setdefault(name, {})[(a, b)] = table
            else:
                where = _points_clause(p, points or ["*"])
                p.take("=")
                if kw == "sort":
                    vals = tuple(_elements(p))
                    for q in where:
                        sorts.setdefault(name, {})[q] = vals
                elif kw == "rel":
                    ts = []
                    while not p.at(";"):
                        ts.append(_tuple(p))
                    for q in where:
                        rels.setdefault(name, {})[q] = frozenset(ts)
                else:
                    table = {}
                    while not p.at(";"):
                        args = _tuple(p)
                        p.take("->")
                        table[args] = _element(p.take())
                    for q in where:
                        funs.setdefault(name, {})[q] = table
        else:
            raise ParseError(f"unknown model statement {kw!r}", line)
        p.take(";")
    poset = FinitePoset.make(points, less) if points else POINT
    for name, m in ring_sorts:
        R = zmod_ring_model(m, name)
        for q in poset.elements:
            sorts.setdefault(name, {})[q] = R.sorts[name]["*"]
            for f, t in R.functions.items():
                funs.setdefault(f, {})[q] = t["*"]
    for s, per in sorts.items():
        missing = [q for q in poset.elements if q not in per]
        if missing:
            raise ParseError(f"sort {s} has no carrier at {missing[0]}")
        table = trans.setdefault(s, {})
        for a, b in poset.pairs():
            if (a, b) not in table:
                if not set(per[a]) <= set(per[b]):
                    raise ParseError(f"sort {s}: transition {a}<={b} missing")
                table[(a, b)] = {x: x for x in per[a]}
    for r, per in rels.items():
        for q in poset.elements:
            per.setdefault(q, frozenset())
    return PresheafModel(poset, sorts, trans, rels, funs)


def model_text(M: PresheafModel) -> str:
    lines = []
    P = M.poset
    single = P == POINT
    if not single:
        lines += [f"point {q};" for q in P.elements]
        lines += [f"le {a} {b};" for a, b in P.covers()]

    def at(q):
        return "" if single else f" @{q}"

    for s in sorted(M.sorts):
        for q in P.elements:
            lines.append(f"sort {s}{at(q)} = {' '.join(map(str, M.sorts[s][q]))};")
        for a, b in P.pairs():
            table = M.trans[s][(a, b)]
            if a != b and any(table[x] != x for x in M.sorts[s][a]):
                body = " ".join(f"{x}->{table[x]}" for x in M.sorts[s][a])
                lines.append(f"map {s} {a} {b} = {body};")
    for r in sorted(M.relations):
        for q in P.elements:
            ts = sorted(M.relations[r][q], key=repr)
            lines.append(f"rel {r}{at(q)} = {' '.join(_show_tuple(t) for t in ts)};")
    for f in sorted(M.functions):
        for q in P.elements:
            tab = M.functions[f][q]
            body = " ".join(f"{_show_tuple(k)}->{tab[k]}" for k in sorted(tab, key=repr))
            lines.append(f"fun {f}{at(q)} = {body};")
    return "\n".join(lines) + "\n"


def _show_tuple(t) -> str:
    return "(" + ", ".join(map(str, t)) + ")"


# --- cover specs --------------------------------------------------------------------

@dataclass(frozen=True)
class SpecDocument:
    """A parsed cover spec: the construction kind and its statements."""
    kind: str
    flavor: str
    statements: tuple   # (keyword, args, block text or None, line)


def _split_statements(text: str) -> list:
    """Top-level statements ending in ';' or a closing '}' block."""
    out = []
    buf, depth, line, start_line = [], 0, 1, None
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "#":
            j = text.find("\n", i)
            i = len(text) if j < 0 else j
            continue
        if ch == "\n":
            line += 1
        if start_line is None and not ch.isspace():
            start_line = line
        buf.append(ch)
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced '}'", line)
            if depth == 0:
                out.append(("".join(buf).strip(), start_line))
                buf, start_line = [], None
                if text[i + 1:].lstrip().startswith(";"):
                    i = text.index(";", i + 1)
        elif ch == ";" and depth == 0:
            out.append(("".join(buf)[:-1].strip(), start_line))
            buf, start_line = [], None
        i += 1
    if "".join(buf).strip():
        raise ParseError("statement not terminated by ';'", line)
    if depth:
        raise ParseError("unbalanced '{'", line)
    return out


def parse_spec(text: str) -> SpecDocument:
    kind, flavor, stmts = None, "economical", []
    for stmt, line in _split_statements(text):
        block = None
        if stmt.endswith("}"):
            head, _, rest = stmt.partition("{")
            block, stmt = rest[:-1], head.strip()
        kw, _, args = stmt.partition(" ")
        args = args.strip()
        if kw == "glue":
            kind = args
        elif kw == "flavor":
            flavor = args
        else:
            stmts.append((kw, args, block, line))
    if kind not in ("localic", "zariski", "cris", "general"):
        raise ParseError("spec must start with 'glue localic|zariski|cris|general;'")
    if flavor not in ("economical", "schematic"):
        raise ParseError(f"unknown flavor {flavor}")
    return SpecDocument(kind, flavor, tuple(stmts))


_RING = re.compile(r"^(ZZ/\d+|ZZ|QQ)\s*(?:\[([^\]]*)\])?\s*(?:/\s*\((.*)\))?$")


def parse_ring(text: str):
    from .library import PresentedRing

    m = _RING.match(text.strip())
    if not m:
        raise ParseError(f"cannot read ring {text!r}")
    gens = tuple(g.strip() for g in (m.group(2) or "").split(",") if g.strip())
    rels = tuple(r.strip() for r in (m.group(3) or "").split(",") if r.strip())
    return PresentedRing(m.group(1), gens, rels)


def _ints(text: str) -> list:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParseError(f"expected integers in {text!r}") from exc


def _index(tok: str):
    return int(tok) if tok.lstrip("-").isdigit() else tok


def _substitutions(text: str) -> dict:
    out = {}
    for part in text.split(","):
        lhs, arrow, rhs = part.partition("->")
        if not arrow:
            raise ParseError(f"expected 'gen -> expr' in {part!r}")
        out[lhs.strip()] = rhs.strip()
    return out


def build_localic(doc: SpecDocument, base_dir: Path = Path(".")):
    """LocalicGlueSpec from statements base/chart/overlap/quotient."""
    from .gluing import LocalicGlueSpec, local_algebra_base

    base, charts, overlaps, quotients = None, [], [], []
    for kw, args, block, line in doc.statements:
        if kw == "base":
            words = args.split()
            if words and words[0] == "builtin":
                if len(words) < 2 or words[1] != "local-algebra":
                    raise ParseError("known builtin base: local-algebra <ring>", line)
                base = local_algebra_base(parse_ring(" ".join(words[2:]) or "ZZ"), doc.flavor)
            elif block is not None:
                base = parse_theory(block)
            else:
                base = parse_theory((base_dir / args.strip('"')).read_text())
        elif kw == "chart":
            charts.append((_index(args), parse_extension(block or "")))
        elif kw == "overlap":
            head, _, phi = args.partition(":")
            i, j = map(_index, head.split())
            overlaps.append(((i, j), parse_formula(phi)))
        elif kw == "quotient":
            i, j = map(_index, args.split())
            quotients.append(((i, j), parse_extension(block or "").axioms))
        elif kw not in ("eliminate", "rename"):
            raise ParseError(f"unknown localic statement {kw!r}", line)
    if base is None:
        raise ParseError("localic spec needs a base")
    return LocalicGlueSpec(base, tuple(charts), tuple(overlaps), tuple(quotients))


def build_zariski(doc: SpecDocument):
    from .gluing import ZariskiCoverSpec, substitution_transition

    rings, overlaps, images = {}, {}, {}
    for kw, args, block, line in doc.statements:
        if kw == "chart":
            i, _, ring = args.partition("=")
            rings[_index(i.strip())] = parse_ring(ring)
        elif kw == "overlap":
            head, _, elems = args.partition("=")
            i, k = map(_index, head.split())
            overlaps[(i, k)] = tuple(e.strip() for e in elems.split(",") if e.strip())
        elif kw == "map":
            head, _, body = args.partition(":")
            i, k, j = map(_index, head.split())
            images[(i, k, j)] = _substitutions(body)
        elif kw not in ("eliminate", "rename"):
            raise ParseError(f"unknown zariski statement {kw!r}", line)
    ov = tuple(sorted(overlaps.items()))
    tr = substitution_transition(rings, lambda i, k: overlaps.get((i, k), ()), images)
    return ZariskiCoverSpec(tuple(sorted(rings.items())), ov, tr, doc.flavor)


def build_crystalline(doc: SpecDocument):
    """Charts ``chart i { ring ZZ/4; ideal 2; gamma auto; target ZZ/2; degree 4; }``."""
    from .gluing import CrystallineChart, CrystallineCoverSpec, substitution_transition
    from .library import PD_DEGREE, PDRingData
    from .pdrings import modular_pd_data

    charts, overlaps, kimages, rimages = {}, {}, {}, {}
    for kw, args, block, line in doc.statements:
        if kw == "chart":
            fields = {}
            for part in (block or "").split(";"):
                key, _, val = part.strip().partition(" ")
                if key:
                    fields.setdefault(key, []).append(val.strip())
            K = parse_ring(fields.get("ring", ["ZZ"])[0])
            R = parse_ring(fields.get("target", ["ZZ"])[0])
            degree = int(fields.get("degree", [str(PD_DEGREE)])[0])
            ideal = tuple(_ints(" ".join(fields.get("ideal", []))))
            gam = fields.get("gamma", [])
            if gam == ["auto"]:
                if len(ideal) != 1 or not K.modulus:
                    raise ParseError("gamma auto needs ZZ/m and one ideal generator", line)
                data = modular_pd_data(K.modulus, ideal[0], degree)
            else:
                table = tuple(tuple(_ints(g)) for g in gam)
                if any(len(t) != 3 for t in table):
                    raise ParseError("gamma entries are 'n generator value'", line)
                data = PDRingData(K, ideal, table, degree)
            charts[_index(args)] = CrystallineChart(data, R)
        elif kw == "overlap":
            head, _, rest = args.partition("=")
            i, k = map(_index, head.split())
            triples = re.findall(r"\(([^()]*)\)", rest)
            overlaps[(i, k)] = tuple(tuple(x.strip() for x in t.split(",")) for t in triples)
        elif kw in ("kmap", "rmap"):
            head, _, body = args.partition(":")
            i, k, j = map(_index, head.split())
            (kimages if kw == "kmap" else rimages)[(i, k, j)] = _substitutions(body)
        elif kw not in ("eliminate", "rename"):
            raise ParseError(f"unknown crystalline statement {kw!r}", line)
    krings = {i: c.data.ring for i, c in charts.items()}
    rrings = {i: c.target for i, c in charts.items()}
    tk = substitution_transition(krings, lambda i, k: [t[0] for t in overlaps.get((i, k), ())], kimages)
    tr = substitution_transition(rrings, lambda i, k: [t[1] for t in overlaps.get((i, k), ())], rimages)
    return CrystallineCoverSpec(tuple(sorted(charts.items())), tuple(sorted(overlaps.items())),
                                tk, tr, doc.flavor)


def spec_renames(doc: SpecDocument) -> dict:
    out = {}
    for kw, args, _, _ in doc.statements:
        if kw == "rename":
            for part in args.split(","):
                a, arrow, b = part.partition("->")
                if not arrow:
                    raise ParseError(f"expected 'old -> new' in {part!r}")
                out[a.strip()] = b.strip()
    return out


def spec_eliminates(doc: SpecDocument) -> bool:
    return any(kw == "eliminate" for kw, *_ in doc.statements)
