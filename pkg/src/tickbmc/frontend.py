"""Parser for ``.tick`` programs and precedence properties.

Grammar (line breaks are not significant, ``#`` starts a comment)::

    file     := (thread | property)*
    thread   := 'thread' NAME '{' stmt* '}'
    stmt     := 'stmt' LABEL 'dur' INT ';' | 'sleep' INT ';' | 'loop' '{' stmt* '}'
    property := 'property' NAME '{' expr '}'
    expr     := disj ('->' expr)?
    disj     := conj ('or' conj)*
    conj     := unary ('and' unary)*
    unary    := 'not' unary | 'before' '(' ref ',' ref ')' | '(' expr ')'
    ref      := NAME '.' LABEL ('[' (INT | VAR ('+' INT)?) ']')?

An iteration index names one replica of a loop statement; a symbolic index
``i`` / ``i+c`` is universally quantified over every value for which all
referenced instances exist at the requested unroll depth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .model import Kind, SourceProgram, Stmt, ThreadDef, UnrolledProgram


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


class UnreachableUnderBound(Exception):
    """A property names a statement instance that the bound cuts away."""


# ---------------------------------------------------------------------------
# Property AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ref:
    thread: str
    label: str
    offset: Optional[int] = None  # symbolic: index variable + offset
    index: Optional[int] = None  # concrete iteration

    def __str__(self):
        s = f"{self.thread}.{self.label}"
        if self.index is not None:
            s += f"[{self.index}]"
        elif self.offset is not None:
            s += f"[{{var}}+{self.offset}]" if self.offset else "[{var}]"
        return s


@dataclass(frozen=True)
class Before:
    a: Ref
    b: Ref


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class And:
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Implies:
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[Before, Not, And, Or, Implies]


@dataclass(frozen=True)
class Property:
    name: str
    formula: Expr
    index_var: Optional[str] = None

    def __str__(self):
        return format_expr(self.formula, self.index_var or "i")


def format_expr(e: Expr, var: str = "i") -> str:
    def ref(r) -> str:
        return r.name if isinstance(r, Pos) else str(r).format(var=var)

    def sub(x: Expr) -> str:
        s = go(x)
        return s if isinstance(x, (Before, Not)) else f"({s})"

    def go(x: Expr) -> str:
        if isinstance(x, Before):
            return f"before({ref(x.a)}, {ref(x.b)})"
        if isinstance(x, Not):
            return f"not {sub(x.arg)}"
        if isinstance(x, And):
            return " and ".join(sub(a) for a in x.args)
        if isinstance(x, Or):
            return " or ".join(sub(a) for a in x.args)
        return f"{sub(x.lhs)} -> {sub(x.rhs)}"

    return go(e)


def refs(e: Expr) -> Iterator[Ref]:
    if isinstance(e, Before):
        yield e.a
        yield e.b
    elif isinstance(e, Not):
        yield from refs(e.arg)
    elif isinstance(e, (And, Or)):
        for a in e.args:
            yield from refs(a)
    else:
        yield from refs(e.lhs)
        yield from refs(e.rhs)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+) | (?P<comment>\#[^\n]*) |
    (?P<arrow>->) | (?P<int>-?[0-9]+) | (?P<name>[A-Za-z_][A-Za-z0-9_]*) |
    (?P<punct>[{}()\[\];,.+])
    """,
    re.VERBOSE,
)

KEYWORDS = {"thread", "stmt", "sleep", "loop", "dur", "property", "before", "and", "or", "not"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'name' | 'int' | punctuation text | 'eof'
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError([ParseDiagnostic(line, col, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            toks.append(Token(s if kind in ("punct", "arrow") else kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Abort(Exception):
    pass


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.diags: list[ParseDiagnostic] = []
        self.index_var: Optional[str] = None
        self.ref_tokens: list[tuple[Ref, Token]] = []

    # -- helpers -----------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def error(self, tok: Token, msg: str) -> None:
        self.diags.append(ParseDiagnostic(tok.line, tok.column, msg))

    def fail(self, msg: str, tok: Optional[Token] = None):
        self.error(tok or self.tok, msg)
        raise _Abort

    def next(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: Optional[str] = None, what: str = "") -> Token:
        t = self.accept(kind, text)
        if t is None:
            want = what or repr(text or kind)
            got = self.tok.text or "end of input"
            self.fail(f"expected {want}, got {got!r}")
        return t

    def ident(self, what: str) -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.fail(f"expected {what}, got {t.text or 'end of input'!r}")
        return self.next()

    def duration(self) -> int:
        t = self.expect("int", what="an integer duration")
        v = int(t.text)
        if v < 1:
            self.error(t, f"duration must be a positive integer, got {v}")
            return 1
        return v

    # -- program -----------------------------------------------------------

    def program(self) -> tuple[list[ThreadDef], list[tuple[Token, int]]]:
        threads: list[ThreadDef] = []
        seen: set[str] = set()
        props: list[tuple[Token, int]] = []  # (name token, index of first expr token)
        while not self.at("eof"):
            t = self.tok
            if self.accept("name", "thread"):
                name = self.ident("a thread name")
                if name.text in seen:
                    self.error(name, f"duplicate thread name {name.text!r}")
                seen.add(name.text)
                self.expect("{")
                stmts = self.stmts(in_loop=False)
                self.expect("}")
                if not stmts:
                    self.error(name, f"thread {name.text!r} has no statements")
                    continue
                threads.append(ThreadDef(name.text, tuple(stmts)))
            elif self.accept("name", "property"):
                name = self.ident("a property name")
                self.expect("{")
                start = self.pos
                self.skip_braced()
                props.append((name, start))
            elif t.kind == "name":
                self.fail(f"unknown keyword {t.text!r}")
            else:
                self.fail(f"unexpected {t.text!r}")
        return threads, props

    def skip_braced(self) -> None:
        depth = 1
        while depth:
            t = self.next()
            if t.kind == "eof":
                self.fail("unterminated property block", t)
            depth += {"{": 1, "}": -1}.get(t.kind, 0)

    def stmts(self, in_loop: bool) -> list[Stmt]:
        out: list[Stmt] = []
        labels: dict[str, Token] = {}
        loops = 0
        while not self.at("}") and not self.at("eof"):
            t = self.tok
            if self.accept("name", "stmt"):
                label = self.ident("a statement label")
                self.expect("name", "dur")
                d = self.duration()
                self.expect(";")
                if label.text in labels:
                    self.error(label, f"duplicate label {label.text!r}")
                labels[label.text] = label
                out.append(Stmt(Kind.ORDINARY, label.text, d))
            elif self.accept("name", "sleep"):
                d = self.duration()
                self.expect(";")
                out.append(Stmt(Kind.SLEEP, None, d))
            elif self.accept("name", "loop"):
                self.expect("{")
                body = self.stmts(in_loop=True)
                self.expect("}")
                if in_loop:
                    self.error(t, "nested loop is not supported")
                    continue
                loops += 1
                if loops > 1:
                    self.error(t, "at most one loop per thread")
                    continue
                if not body:
                    self.error(t, "empty loop body")
                    continue
                for s in body:
                    if s.label in labels:
                        self.error(t, f"duplicate label {s.label!r}")
                    if s.label:
                        labels[s.label] = t
                out.append(Stmt(Kind.LOOP, body=tuple(body)))
            elif t.kind == "name":
                self.fail(f"unknown keyword {t.text!r}")
            else:
                self.fail(f"unexpected {t.text!r}")
        return out

    # -- properties --------------------------------------------------------

    def expr(self) -> Expr:
        lhs = self.disj()
        if self.accept("->"):
            return Implies(lhs, self.expr())
        return lhs

    def disj(self) -> Expr:
        args = [self.conj()]
        while self.accept("name", "or"):
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Expr:
        args = [self.unary()]
        while self.accept("name", "and"):
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Expr:
        if self.accept("name", "not"):
            return Not(self.unary())
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("name", "before"):
            self.expect("(")
            a = self.ref()
            self.expect(",")
            b = self.ref()
            self.expect(")")
            return Before(a, b)
        t = self.tok
        self.fail(f"expected a property expression, got {t.text or 'end of input'!r}")

    def ref(self) -> Ref:
        th = self.ident("a thread name")
        self.expect(".")
        lab = self.ident("a statement label")
        offset = index = None
        if self.accept("["):
            if self.at("int"):
                t = self.next()
                index = int(t.text)
                if index < 1:
                    self.error(t, f"iteration index must be >= 1, got {index}")
            else:
                var = self.ident("an iteration index")
                offset = 0
                if self.accept("+"):
                    c = self.expect("int", what="an integer offset")
                    offset = int(c.text)
                    if offset < 0:
                        self.error(c, "index offset must be non-negative")
                self._var(var)
            self.expect("]")
        r = Ref(th.text, lab.text, offset, index)
        self.ref_tokens.append((r, th))
        return r

    def _var(self, tok: Token) -> None:
        if self.index_var is None:
            self.index_var = tok.text
        elif tok.text != self.index_var:
            self.error(tok, f"a property may use only one index variable ({self.index_var!r})")

    def property(self, name: str, program: SourceProgram, stop: str = "eof") -> Property:
        self.index_var = None
        self.ref_tokens = []
        e = self.expr()
        if not self.at(stop):
            self.fail(f"unexpected {self.tok.text!r} after property expression")
        self._check_refs(program)
        return Property(name, e, self.index_var)

    def _check_refs(self, program: SourceProgram) -> None:
        for r, tok in self.ref_tokens:
            try:
                th = program.thread(r.thread)
            except KeyError:
                self.error(tok, f"dangling property reference: unknown thread {r.thread!r}")
                continue
            if r.label not in th.labels():
                self.error(tok, f"dangling property reference: unknown label {r.thread}.{r.label}")
                continue
            in_loop = r.label in th.loop_labels()
            has_index = r.offset is not None or r.index is not None
            if has_index and not in_loop:
                self.error(tok, f"index expression on non-loop statement {r.thread}.{r.label}")
            elif in_loop and not has_index:
                self.error(tok, f"loop statement {r.thread}.{r.label} needs an iteration index")


def parse_program(text: str) -> SourceProgram:
    """Parse a ``.tick`` file; raises :class:`ParseError` with positioned diagnostics."""
    p = _Parser(text)
    try:
        threads, prop_sites = p.program()
    except _Abort:
        raise ParseError(p.diags) from None
    if not threads and not p.diags:
        p.error(p.tok, "no threads declared")
    if p.diags:
        raise ParseError(p.diags)
    program = SourceProgram(tuple(threads))
    props = []
    names = set()
    for name, start in prop_sites:
        if name.text in names:
            p.error(name, f"duplicate property name {name.text!r}")
        names.add(name.text)
        p.pos = start
        try:
            props.append(p.property(name.text, program, stop="}"))
        except _Abort:
            pass
    if p.diags:
        raise ParseError(p.diags)
    return SourceProgram(program.threads, tuple(props))


def parse_property(text: str, program: SourceProgram, name: str = "property") -> Property:
    p = _Parser(text)
    try:
        prop = p.property(name, program)
    except _Abort:
        raise ParseError(p.diags) from None
    if p.diags:
        raise ParseError(p.diags)
    return prop


def format_program(program: SourceProgram) -> str:
    lines = []

    def emit(stmts, indent):
        pad = "    " * indent
        for s in stmts:
            if s.kind is Kind.ORDINARY:
                lines.append(f"{pad}stmt {s.label} dur {s.duration};")
            elif s.kind is Kind.SLEEP:
                lines.append(f"{pad}sleep {s.duration};")
            else:
                lines.append(f"{pad}loop {{")
                emit(s.body, indent + 1)
                lines.append(f"{pad}}}")

    for th in program.threads:
        lines.append(f"thread {th.name} {{")
        emit(th.stmts, 1)
        lines.append("}")
    for prop in program.properties:
        lines.append(f"property {prop.name} {{ {prop} }}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Instantiation over the unrolled program
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pos:
    """A resolved statement instance: thread number and unrolled position."""

    t: int
    i: int
    name: str


@dataclass(frozen=True)
class Instance:
    prop: str
    clause: int
    valuation: Optional[int]
    formula: Expr  # Before leaves carry Pos instead of Ref

    @property
    def positions(self) -> list[Pos]:
        return list(dict.fromkeys(refs(self.formula)))

    def describe(self) -> str:
        s = f"{self.prop}: {format_expr(self.formula)}"
        if self.valuation is not None:
            s += f"  (i={self.valuation})"
        return s


def _clauses(e: Expr) -> tuple[Expr, ...]:
    return e.args if isinstance(e, And) else (e,)


def _map_refs(e: Expr, f) -> Expr:
    if isinstance(e, Before):
        return Before(f(e.a), f(e.b))
    if isinstance(e, Not):
        return Not(_map_refs(e.arg, f))
    if isinstance(e, And):
        return And(tuple(_map_refs(a, f) for a in e.args))
    if isinstance(e, Or):
        return Or(tuple(_map_refs(a, f) for a in e.args))
    return Implies(_map_refs(e.lhs, f), _map_refs(e.rhs, f))


def instantiate(prop: Property, up: UnrolledProgram) -> list[Instance]:
    """Expand symbolic iteration indices into concrete statement instances.

    Each top-level conjunct is quantified on its own: a clause mentioning
    ``l[i+1]`` is instantiated only where iteration ``i+1`` exists.
    """
    src = up.source
    if src is None:
        raise ValueError("unrolled program carries no source")
    L = up.loop_iterations
    out = []
    for ci, clause in enumerate(_clauses(prop.formula)):
        rs = list(refs(clause))
        offsets = [r.offset for r in rs if r.offset is not None]
        if offsets:
            values = [v for v in range(1, L + 1) if all(1 <= v + o <= L for o in offsets)]
        else:
            values = [None]
        for v in values:
            def resolve(r: Ref, v=v) -> Pos:
                t = src.thread_index(r.thread)
                th = up.thread(t)
                if r.offset is not None:
                    it = v + r.offset
                elif r.index is not None:
                    it = r.index
                else:
                    it = 0
                name = f"{r.thread}.{r.label}" + (f"[{it}]" if it else "")
                if it > L:
                    raise UnreachableUnderBound(
                        f"{prop.name}: {name} does not exist with loops unrolled {L} time(s)"
                    )
                i = th.position(r.label, it)
                if i is None:
                    if (r.label, it) in th.dropped:
                        raise UnreachableUnderBound(
                            f"{prop.name}: {name} is unreachable under bound N={up.rounds}"
                        )
                    raise UnreachableUnderBound(f"{prop.name}: {name} does not exist")
                return Pos(t, i, name)

            out.append(Instance(prop.name, ci, v, _map_refs(clause, resolve)))
    return out


def evaluate(e: Expr, end_times: dict[tuple[int, int], int]) -> bool:
    """Truth value of a resolved expression given concrete ending times."""
    if isinstance(e, Before):
        return end_times[e.a.t, e.a.i] < end_times[e.b.t, e.b.i]
    if isinstance(e, Not):
        return not evaluate(e.arg, end_times)
    if isinstance(e, And):
        return all(evaluate(a, end_times) for a in e.args)
    if isinstance(e, Or):
        return any(evaluate(a, end_times) for a in e.args)
    return (not evaluate(e.lhs, end_times)) or evaluate(e.rhs, end_times)
