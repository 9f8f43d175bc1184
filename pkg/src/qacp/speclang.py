"""Textual specification language (``.qacp`` files).

A document declares the data-domain size, actions with arities, named
pattern sets, communication rules, recursive equations and an entry term:

    // example
    delta 1;
    actions a/0, send_D/1, receive_D/1, C_D/1;
    comm send_D[x] | receive_D[x] = C_D[x];
    set H = { send_D[*], receive_D[*] };
    X = a . X;
    entry encap H in X;

Operators: ``+`` alternative, ``.`` sequence, ``||`` parallel, ``_|`` left
merge, ``|`` communication merge, ``><`` entanglement merge, ``encap S in t``
and ``abstract S in t`` with ``S`` a set name or inline ``{...}``,
``@shadow(a)`` for shadow constants, ``err`` for the error message, ``tau``
and ``delta`` for the silent step and deadlock.  Data arguments: bits ``0``
and ``1``, data elements ``q1, q2, ...`` (``d1`` style also accepted),
``kl`` for the symbolic measurement outcome, uppercase names for qubits,
``*`` as a wildcard in patterns and lowercase names as rule variables.
Comments run from ``//`` to end of line.  Parsing a pretty-printed document
reproduces it byte for byte.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .terms import (
    Abstract,
    Act,
    ActionLabel,
    Alt,
    ANY,
    Bit,
    CommFunction,
    CommMerge,
    CommRule,
    Datum,
    DELTA,
    Encap,
    EntMerge,
    ERR,
    KL,
    LabelPattern,
    LeftMerge,
    Par,
    PatternSet,
    PatVar,
    Qubit,
    RecursiveSpec,
    Seq,
    Tau,
    TAU,
    Term,
    Var,
    check_guarded,
    iter_vars,
    summands,
    seq_parts,
    par_parts,
    Deadlock,
    Skip,
)


class SpecError(Exception):
    """Syntax or semantic error in a specification document."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        location = f"line {line}, column {col}: " if line else ""
        super().__init__(location + message)


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_PUNCT = ("||", "_|", "><", "(", ")", "[", "]", "{", "}", ",", ";", ".", "+",
          "=", "/", "*", "|", "@")
_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")


@dataclass
class Token:
    kind: str  # ID, INT, PUNCT, EOF
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = False
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("PUNCT", p, line, col))
                i += len(p)
                col += len(p)
                matched = True
                break
        if matched:
            continue
        m = _INT_RE.match(text, i)
        if m and not _ID_RE.match(text, i):
            tokens.append(Token("INT", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        m = _ID_RE.match(text, i)
        if m:
            tokens.append(Token("ID", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        raise SpecError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# document model
# ---------------------------------------------------------------------------

@dataclass
class SpecDocument:
    """A parsed and resolved specification."""

    delta: Optional[int] = None
    actions: dict = field(default_factory=dict)        # name -> arity
    sets: dict = field(default_factory=dict)           # name -> PatternSet
    comm: CommFunction = CommFunction()
    spec: Optional[RecursiveSpec] = None
    equation_order: list = field(default_factory=list)
    entry: Optional[Term] = None

    def entry_or_var(self, name: Optional[str] = None) -> Term:
        if name is not None:
            if self.spec is None or name not in self.spec.equations:
                raise SpecError(f"unknown variable {name}")
            return self.spec.var(name)
        if self.entry is None:
            raise SpecError("document has no entry term")
        return self.entry


_KEYWORDS = {"delta", "actions", "set", "comm", "entry", "encap", "abstract",
             "in", "tau"}

_DATUM_RE = re.compile(r"^[qd]([0-9]+)$")


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.delta: Optional[int] = None
        self.actions: dict[str, int] = {}
        self.sets: dict[str, PatternSet] = {}
        self.comm_rules: list[CommRule] = []
        self.raw_equations: dict[str, Term] = {}
        self.eq_positions: dict[str, tuple[int, int]] = {}
        self.entry_raw: Optional[Term] = None
        # every name reference seen in a term, for semantic diagnostics
        self.refs: list[tuple[str, str, int, int, int]] = []

    # -- token helpers -------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            wanted = value if value is not None else kind
            raise SpecError(
                f"expected {wanted!r}, found {tok.value or tok.kind!r}",
                tok.line,
                tok.col,
            )
        return self.next()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == value

    def eat_punct(self, value: str) -> bool:
        if self.at_punct(value):
            self.next()
            return True
        return False

    # -- statements ----------------------------------------------------------

    def parse_document(self) -> SpecDocument:
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind != "ID":
                raise SpecError(
                    f"expected a declaration, found {tok.value!r}", tok.line, tok.col
                )
            if tok.value == "delta" and self.tokens[self.pos + 1].kind == "INT":
                self.next()
                self.delta = int(self.next().value)
                self.expect("PUNCT", ";")
            elif tok.value == "actions":
                self.next()
                self._parse_actions()
            elif tok.value == "set":
                self.next()
                self._parse_set()
            elif tok.value == "comm":
                self.next()
                self._parse_comm()
            elif tok.value == "entry":
                self.next()
                if self.entry_raw is not None:
                    raise SpecError("duplicate entry declaration", tok.line, tok.col)
                self.entry_raw = self.parse_term()
                self.expect("PUNCT", ";")
            else:
                self._parse_equation()
        return self._resolve()

    def _parse_actions(self) -> None:
        while True:
            name = self.expect("ID")
            if name.value in _KEYWORDS:
                raise SpecError(
                    f"{name.value!r} cannot be an action name", name.line, name.col
                )
            self.expect("PUNCT", "/")
            arity = int(self.expect("INT").value)
            if name.value in self.actions:
                raise SpecError(f"duplicate action {name.value}", name.line, name.col)
            self.actions[name.value] = arity
            if not self.eat_punct(","):
                break
        self.expect("PUNCT", ";")

    def _parse_set(self) -> None:
        name = self.expect("ID")
        if name.value in self.sets:
            raise SpecError(f"duplicate set {name.value}", name.line, name.col)
        self.expect("PUNCT", "=")
        self.sets[name.value] = self._parse_pattern_braces()
        self.expect("PUNCT", ";")

    def _parse_pattern_braces(self) -> PatternSet:
        self.expect("PUNCT", "{")
        patterns = []
        if not self.at_punct("}"):
            while True:
                patterns.append(self._parse_pattern())
                if not self.eat_punct(","):
                    break
        self.expect("PUNCT", "}")
        return PatternSet.of(patterns)

    def _parse_pattern(self) -> LabelPattern:
        if self.eat_punct("@"):
            kw = self.expect("ID")
            if kw.value != "shadow":
                raise SpecError("expected 'shadow' after '@'", kw.line, kw.col)
            self.expect("PUNCT", "(")
            inner = self._parse_pattern()
            self.expect("PUNCT", ")")
            if inner.shadow:
                raise SpecError("nested @shadow", kw.line, kw.col)
            return LabelPattern(inner.name, inner.args, shadow=True)
        name = self.expect("ID")
        args: list = []
        if self.eat_punct("["):
            if not self.at_punct("]"):
                while True:
                    args.append(self._parse_arg(pattern=True))
                    if not (self.eat_punct(",") or self.eat_punct(";")):
                        break
            self.expect("PUNCT", "]")
        self.refs.append((name.value, "action", len(args), name.line, name.col))
        return LabelPattern(name.value, tuple(args))

    def _parse_comm(self) -> None:
        left = self._parse_pattern()
        self.expect("PUNCT", "|")
        right = self._parse_pattern()
        self.expect("PUNCT", "=")
        result = self._parse_pattern()
        if result.shadow:
            tok = self.peek()
            raise SpecError("communication result cannot be a shadow", tok.line, tok.col)
        self.comm_rules.append(
            CommRule(left, right, result.name, result.args)
        )
        self.expect("PUNCT", ";")

    def _parse_equation(self) -> None:
        name_tok = self.peek()
        name = self._parse_ref_name()
        self.expect("PUNCT", "=")
        body = self.parse_term()
        self.expect("PUNCT", ";")
        if name in self.raw_equations:
            raise SpecError(f"duplicate equation {name}", name_tok.line, name_tok.col)
        self.raw_equations[name] = body
        self.eq_positions[name] = (name_tok.line, name_tok.col)

    def _parse_ref_name(self) -> str:
        """An equation name: NAME or NAME(args)."""
        tok = self.expect("ID")
        if tok.value in _KEYWORDS:
            raise SpecError(f"{tok.value!r} is reserved", tok.line, tok.col)
        name = tok.value
        if self.at_punct("("):
            self.next()
            args = []
            if not self.at_punct(")"):
                while True:
                    args.append(self._parse_arg(pattern=False))
                    if not (self.eat_punct(",") or self.eat_punct(";")):
                        break
            self.expect("PUNCT", ")")
            name += "(" + ",".join(str(a) for a in args) + ")"
        return name

    # -- data arguments ------------------------------------------------------

    def _parse_arg(self, pattern: bool):
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            if tok.value in ("0", "1"):
                return Bit(int(tok.value))
            raise SpecError(f"invalid data literal {tok.value}", tok.line, tok.col)
        if tok.kind == "PUNCT" and tok.value == "*":
            if not pattern:
                raise SpecError("wildcard only allowed in patterns", tok.line, tok.col)
            self.next()
            return ANY
        if tok.kind == "PUNCT" and tok.value == "(":
            self.next()
            first = self._parse_arg(pattern=False)
            self.expect("PUNCT", ",")
            second = self._parse_arg(pattern=False)
            self.expect("PUNCT", ")")
            from .terms import Pair

            return Pair(first, second)
        if tok.kind == "ID":
            self.next()
            if tok.value == "err":
                return ERR
            if tok.value == "kl":
                return KL
            m = _DATUM_RE.match(tok.value)
            if m:
                return Datum(int(m.group(1)))
            if tok.value[0].isupper():
                return Qubit(tok.value)
            if pattern:
                return PatVar(tok.value)
            raise SpecError(
                f"unknown data literal {tok.value!r} "
                "(lowercase names are pattern variables, only allowed in rules)",
                tok.line,
                tok.col,
            )
        raise SpecError(f"expected a data argument, found {tok.value!r}",
                        tok.line, tok.col)

    # -- terms ---------------------------------------------------------------

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "ID" and tok.value in ("encap", "abstract"):
            self.next()
            patterns = self._parse_setref()
            self.expect("ID", "in")
            body = self.parse_term()
            return (Encap if tok.value == "encap" else Abstract)(patterns, body)
        return self._parse_alt()

    def _parse_setref(self) -> PatternSet:
        if self.at_punct("{"):
            return self._parse_pattern_braces()
        tok = self.expect("ID")
        if tok.value not in self.sets:
            raise SpecError(f"unknown set {tok.value}", tok.line, tok.col)
        return self.sets[tok.value]

    def _parse_alt(self) -> Term:
        term = self._parse_merge()
        while self.at_punct("+"):
            self.next()
            term = Alt(term, self._parse_merge())
        return term

    _MERGE_OPS = {"||": Par, "_|": LeftMerge, "|": CommMerge, "><": EntMerge}

    def _parse_merge(self) -> Term:
        term = self._parse_seq()
        while self.peek().kind == "PUNCT" and self.peek().value in self._MERGE_OPS:
            op = self.next().value
            term = self._MERGE_OPS[op](term, self._parse_seq())
        return term

    def _parse_seq(self) -> Term:
        term = self._parse_atom()
        while self.at_punct("."):
            self.next()
            term = Seq(term, self._parse_atom())
        return term

    def _parse_atom(self) -> Term:
        tok = self.peek()
        if self.at_punct("("):
            self.next()
            term = self.parse_term()
            self.expect("PUNCT", ")")
            return term
        if self.at_punct("@"):
            self.next()
            kw = self.expect("ID")
            if kw.value != "shadow":
                raise SpecError("expected 'shadow' after '@'", kw.line, kw.col)
            self.expect("PUNCT", "(")
            label = self._parse_ground_label()
            self.expect("PUNCT", ")")
            return Act(ActionLabel(label.name, label.args, shadow=True))
        if tok.kind != "ID":
            raise SpecError(f"expected a term atom, found {tok.value or 'end of input'!r}",
                            tok.line, tok.col)
        if tok.value == "delta":
            self.next()
            return DELTA
        if tok.value == "tau":
            self.next()
            return Act(TAU)
        if tok.value in ("encap", "abstract"):
            return self.parse_term()
        # NAME[...] action, NAME(...) variable, bare NAME resolved later
        self.next()
        if self.at_punct("["):
            self.next()
            args = []
            if not self.at_punct("]"):
                while True:
                    args.append(self._parse_arg(pattern=False))
                    if not (self.eat_punct(",") or self.eat_punct(";")):
                        break
            self.expect("PUNCT", "]")
            self.refs.append((tok.value, "action", len(args), tok.line, tok.col))
            return Act(ActionLabel(tok.value, tuple(args)))
        if self.at_punct("("):
            self.pos -= 1
            name = self._parse_ref_name()
            self.refs.append((name, "var", -1, tok.line, tok.col))
            return Var(name)
        self.refs.append((tok.value, "bare", 0, tok.line, tok.col))
        return Var(tok.value)

    def _parse_ground_label(self) -> ActionLabel:
        tok = self.expect("ID")
        args = []
        if self.at_punct("["):
            self.next()
            if not self.at_punct("]"):
                while True:
                    args.append(self._parse_arg(pattern=False))
                    if not (self.eat_punct(",") or self.eat_punct(";")):
                        break
            self.expect("PUNCT", "]")
        self.refs.append((tok.value, "action", len(args), tok.line, tok.col))
        return ActionLabel(tok.value, tuple(args))

    # -- resolution ----------------------------------------------------------

    def _resolve(self) -> SpecDocument:
        equation_names = set(self.raw_equations)

        # semantic checks on recorded references
        for name, kind, arity, line, col in self.refs:
            if kind == "action":
                if name not in self.actions:
                    raise SpecError(f"undeclared action {name}", line, col)
                if self.actions[name] != arity:
                    raise SpecError(
                        f"action {name} used with {arity} argument(s), "
                        f"declared with {self.actions[name]}",
                        line,
                        col,
                    )
            elif kind == "var":
                if name not in equation_names:
                    raise SpecError(f"unknown variable {name}", line, col)
            else:  # bare name: equation or nullary action
                if name not in equation_names and self.actions.get(name) != 0:
                    raise SpecError(
                        f"unknown name {name} (not an equation, not a nullary action)",
                        line,
                        col,
                    )

        def resolve_var(v: Var) -> Term:
            if v.name in equation_names:
                return v
            return Act(ActionLabel(v.name))

        from .terms import _rebuild

        resolved = {
            name: _rebuild(body, resolve_var)
            for name, body in self.raw_equations.items()
        }
        spec = RecursiveSpec(resolved) if resolved else None
        if spec is not None:
            ok, problems = check_guarded(spec)
            if not ok:
                line, col = self.eq_positions.get(
                    problems[0].split(" unguarded in ")[-1], (0, 0)
                )
                raise SpecError("unguarded equation: " + "; ".join(problems), line, col)
        entry = None
        if self.entry_raw is not None:
            entry = _rebuild(self.entry_raw, resolve_var)
            if spec is not None:
                entry = _rebuild(
                    entry,
                    lambda v: spec.var(v.name) if v.spec is None else v,
                )
            else:
                for v in iter_vars(entry):
                    if v.spec is None:
                        raise SpecError(f"unknown variable {v.name}")
        return SpecDocument(
            delta=self.delta,
            actions=dict(self.actions),
            sets=dict(self.sets),
            comm=CommFunction.of(self.comm_rules),
            spec=spec,
            equation_order=list(self.raw_equations),
            entry=entry,
        )


def parse(text: str) -> SpecDocument:
    """Parse a document; raises SpecError with line/column on bad input."""
    return _Parser(text).parse_document()


# ---------------------------------------------------------------------------
# pretty printer
# ---------------------------------------------------------------------------

_PREC_ALT, _PREC_MERGE, _PREC_SEQ, _PREC_ATOM = 0, 1, 2, 3


def _render_term(t: Term, sets_by_key: dict, ctx: int = _PREC_ALT) -> str:
    if isinstance(t, Deadlock):
        return "delta"
    if isinstance(t, Skip):
        return "skip"
    if isinstance(t, Act):
        return str(t.label)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Alt):
        text = " + ".join(_render_term(s, sets_by_key, _PREC_MERGE) for s in summands(t))
        return f"({text})" if ctx > _PREC_ALT else text
    if isinstance(t, Seq):
        text = " . ".join(_render_term(s, sets_by_key, _PREC_ATOM) for s in seq_parts(t))
        return f"({text})" if ctx > _PREC_SEQ else text
    if isinstance(t, (Par, LeftMerge, CommMerge, EntMerge)):
        op = {Par: "||", LeftMerge: "_|", CommMerge: "|", EntMerge: "><"}[type(t)]
        text = (
            f"{_render_term(t.left, sets_by_key, _PREC_SEQ)} {op} "
            f"{_render_term(t.right, sets_by_key, _PREC_SEQ)}"
        )
        return f"({text})" if ctx > _PREC_MERGE else text
    if isinstance(t, (Encap, Abstract)):
        word = "encap" if isinstance(t, Encap) else "abstract"
        named = sets_by_key.get(t.patterns.key())
        shown = named if named is not None else str(t.patterns)
        text = f"{word} {shown} in {_render_term(t.body, sets_by_key, _PREC_ALT)}"
        return f"({text})" if ctx > _PREC_ALT else text
    raise SpecError(f"cannot render term {t!r}")


def pretty(doc: SpecDocument) -> str:
    """Deterministic canonical rendering; round-trips through parse."""
    sets_by_key = {ps.key(): name for name, ps in sorted(doc.sets.items())}
    lines = ["// qacp specification", ""]
    if doc.delta is not None:
        lines += [f"delta {doc.delta};", ""]
    if doc.actions:
        decl = ", ".join(f"{n}/{a}" for n, a in sorted(doc.actions.items()))
        lines += [f"actions {decl};", ""]
    for name in sorted(doc.sets):
        lines.append(f"set {name} = {doc.sets[name]};")
    if doc.sets:
        lines.append("")
    for rule in doc.comm.rules:
        lines.append(f"comm {rule};")
    if doc.comm.rules:
        lines.append("")
    if doc.spec is not None:
        for name in doc.equation_order:
            body = _render_term(doc.spec.equations[name], sets_by_key)
            lines.append(f"{name} = {body};")
        lines.append("")
    if doc.entry is not None:
        lines += [f"entry {_render_term(doc.entry, sets_by_key)};", ""]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bundled documents
# ---------------------------------------------------------------------------

def bundled_text(name: str) -> str:
    """Text of a document shipped with the package (``qaqp`` or ``tiny``)."""
    from importlib import resources

    resource = resources.files("qacp").joinpath(f"data/{name}.qacp")
    return resource.read_text(encoding="utf-8")


def load(path_or_scheme: str) -> SpecDocument:
    """Load a document from a file path or a ``bundled:<name>`` reference."""
    if path_or_scheme.startswith("bundled:"):
        return parse(bundled_text(path_or_scheme.split(":", 1)[1]))
    with open(path_or_scheme, "r", encoding="utf-8") as fh:
        return parse(fh.read())
