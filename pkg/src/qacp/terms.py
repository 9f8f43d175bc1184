"""Core term language of the process calculus.

Data values, parameterised action labels, label patterns, communication
functions, process terms, structural normalisation and guardedness.
Everything here is an immutable value; all operations are pure and safe to
share across threads.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union


class TermError(Exception):
    """Malformed label, term or recursive specification."""


# ---------------------------------------------------------------------------
# data values carried by actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bit:
    """Alternating-bit value, 0 or 1."""

    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise TermError(f"bit must be 0 or 1, got {self.value!r}")

    def flipped(self) -> "Bit":
        return Bit(1 - self.value)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Err:
    """A detectably corrupted message (rendered ``err``)."""

    def __str__(self) -> str:
        return "err"


@dataclass(frozen=True)
class Qubit:
    """A named qubit (A, B, M, N, ...)."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Datum:
    """Element q_i of the finite data domain; indices are 1-based."""

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise TermError(f"datum index must be >= 1, got {self.index!r}")

    def __str__(self) -> str:
        return f"q{self.index}"


@dataclass(frozen=True)
class SymKL:
    """The symbolic two-bit measurement outcome (a single abstract value)."""

    def __str__(self) -> str:
        return "kl"


@dataclass(frozen=True)
class Pair:
    first: "DataValue"
    second: "DataValue"

    def __str__(self) -> str:
        return f"({self.first},{self.second})"


DataValue = Union[Bit, Err, Qubit, Datum, SymKL, Pair]

BIT0 = Bit(0)
BIT1 = Bit(1)
ERR = Err()
KL = SymKL()

_DATA_RANK = {Bit: 0, Err: 1, Qubit: 2, Datum: 3, SymKL: 4, Pair: 5}


def data_key(value: DataValue) -> tuple:
    """Total order on data values, used for canonical sorting."""
    rank = _DATA_RANK[type(value)]
    if isinstance(value, Bit):
        return (rank, value.value)
    if isinstance(value, Qubit):
        return (rank, value.name)
    if isinstance(value, Datum):
        return (rank, value.index)
    if isinstance(value, Pair):
        return (rank, data_key(value.first), data_key(value.second))
    return (rank,)


# ---------------------------------------------------------------------------
# action labels and the silent step
# ---------------------------------------------------------------------------

RESERVED_NAMES = frozenset({"tau", "delta"})


@dataclass(frozen=True)
class ActionLabel:
    """An action with data arguments.

    ``shadow`` marks the placeholder copy of an action that the entanglement
    merge fuses with the real occurrence; ``merged`` marks a label produced
    by a communication or entanglement merge.  The two flags are mutually
    exclusive: a merge result is always the real action.
    """

    name: str
    args: tuple = ()
    shadow: bool = False
    merged: bool = False

    def __post_init__(self):
        if not self.name or self.name in RESERVED_NAMES:
            raise TermError(f"invalid action name {self.name!r}")
        if self.shadow and self.merged:
            raise TermError("a label cannot be both shadow and merged")
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def as_merged(self) -> "ActionLabel":
        if self.shadow:
            raise TermError("cannot mark a shadow label as merged")
        return ActionLabel(self.name, self.args, merged=True)

    def content_key(self) -> tuple:
        """Identity of the label ignoring merge provenance."""
        return (self.name, tuple(data_key(a) for a in self.args), self.shadow)

    def key(self) -> tuple:
        return self.content_key() + (self.merged,)

    def __str__(self) -> str:
        base = self.name
        if self.args:
            base += "[" + ",".join(str(a) for a in self.args) + "]"
        return f"@shadow({base})" if self.shadow else base

    def detail(self) -> str:
        """Rendering that also shows merge provenance."""
        return str(self) + (" {merged}" if self.merged else "")


@dataclass(frozen=True)
class Tau:
    """The silent step; a sentinel distinct from every action label."""

    def __str__(self) -> str:
        return "tau"

    def detail(self) -> str:
        return "tau"


TAU = Tau()

Label = Union[ActionLabel, Tau]


def label_key(label: Label) -> tuple:
    return (0,) if isinstance(label, Tau) else (1,) + label.key()


def shadow_of(label: ActionLabel) -> ActionLabel:
    return ActionLabel(label.name, label.args, shadow=True)


# ---------------------------------------------------------------------------
# label patterns and sets (used by encapsulation, abstraction, communication)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Wildcard:
    def __str__(self) -> str:
        return "*"


ANY = Wildcard()


@dataclass(frozen=True)
class PatVar:
    """Named pattern variable; binds consistently across a rule."""

    name: str

    def __str__(self) -> str:
        return self.name


ArgPattern = Union[DataValue, Wildcard, PatVar]


def _arg_pattern_key(p: ArgPattern) -> tuple:
    if isinstance(p, Wildcard):
        return (1,)
    if isinstance(p, PatVar):
        return (2, p.name)
    return (0,) + data_key(p)


@dataclass(frozen=True)
class LabelPattern:
    """Matches labels by name, argument patterns and shadow flag.

    The merged flag never takes part in matching; callers that care about
    provenance (encapsulation) check it separately.
    """

    name: str
    args: tuple = ()
    shadow: bool = False

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def match(self, label: Label) -> Optional[dict]:
        if isinstance(label, Tau):
            return None
        if label.name != self.name or label.shadow != self.shadow:
            return None
        if len(label.args) != len(self.args):
            return None
        binding: dict = {}
        for pat, val in zip(self.args, label.args):
            if isinstance(pat, Wildcard):
                continue
            if isinstance(pat, PatVar):
                if pat.name in binding and binding[pat.name] != val:
                    return None
                binding[pat.name] = val
            elif pat != val:
                return None
        return binding

    def key(self) -> tuple:
        return (self.name, tuple(_arg_pattern_key(a) for a in self.args), self.shadow)

    def __str__(self) -> str:
        base = self.name
        if self.args:
            base += "[" + ",".join(str(a) for a in self.args) + "]"
        return f"@shadow({base})" if self.shadow else base


def match_label(pattern: LabelPattern, label: Label) -> bool:
    """True iff the label matches the pattern (wildcards allowed)."""
    return pattern.match(label) is not None


@dataclass(frozen=True)
class PatternSet:
    """A canonical, immutable set of label patterns."""

    patterns: tuple = ()

    @staticmethod
    def of(items: Iterable[LabelPattern]) -> "PatternSet":
        uniq = {p.key(): p for p in items}
        return PatternSet(tuple(uniq[k] for k in sorted(uniq)))

    def matches(self, label: Label) -> bool:
        return any(p.match(label) is not None for p in self.patterns)

    def __iter__(self) -> Iterator[LabelPattern]:
        return iter(self.patterns)

    def __len__(self) -> int:
        return len(self.patterns)

    def key(self) -> tuple:
        return tuple(p.key() for p in self.patterns)

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self.patterns) + "}"


EMPTY_PATTERNS = PatternSet()


# ---------------------------------------------------------------------------
# communication function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CommRule:
    """gamma(left, right) = result, with shared pattern variables.

    Rules are applied to unordered pairs: both argument orders are tried, so
    the function is commutative by construction.
    """

    left: LabelPattern
    right: LabelPattern
    result_name: str
    result_args: tuple = ()

    def __post_init__(self):
        if not isinstance(self.result_args, tuple):
            object.__setattr__(self, "result_args", tuple(self.result_args))
        for a in self.result_args:
            if isinstance(a, Wildcard):
                raise TermError("communication results cannot contain wildcards")

    def _try(self, a: ActionLabel, b: ActionLabel) -> Optional[ActionLabel]:
        ba = self.left.match(a)
        if ba is None:
            return None
        bb = self.right.match(b)
        if bb is None:
            return None
        binding = dict(ba)
        for k, v in bb.items():
            if k in binding and binding[k] != v:
                return None
            binding[k] = v
        out = []
        for arg in self.result_args:
            if isinstance(arg, PatVar):
                if arg.name not in binding:
                    return None
                out.append(binding[arg.name])
            else:
                out.append(arg)
        return ActionLabel(self.result_name, tuple(out))

    def apply(self, a: ActionLabel, b: ActionLabel) -> Optional[ActionLabel]:
        return self._try(a, b) or self._try(b, a)

    def __str__(self) -> str:
        res = self.result_name
        if self.result_args:
            res += "[" + ",".join(str(a) for a in self.result_args) + "]"
        return f"{self.left} | {self.right} = {res}"


@dataclass(frozen=True)
class CommFunction:
    """Partial handshaking communication function; undefined pairs deadlock."""

    rules: tuple = ()

    @staticmethod
    def of(rules: Iterable[CommRule]) -> "CommFunction":
        return CommFunction(tuple(rules))

    def apply(self, a: Label, b: Label) -> Optional[ActionLabel]:
        if isinstance(a, Tau) or isinstance(b, Tau):
            return None
        if a.merged or b.merged:
            return None
        for rule in self.rules:
            result = rule.apply(a, b)
            if result is not None:
                return result
        return None


EMPTY_COMM = CommFunction()


# ---------------------------------------------------------------------------
# process terms
# ---------------------------------------------------------------------------

class Term:
    """Base class for process term nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Deadlock(Term):
    def __str__(self) -> str:
        return "delta"


@dataclass(frozen=True)
class Skip(Term):
    """Successful termination; internal only, never written in source."""

    def __str__(self) -> str:
        return "skip"


DELTA = Deadlock()
SKIP = Skip()


@dataclass(frozen=True)
class Act(Term):
    """A single action (or silent step); ``a`` alone means do a, then stop."""

    label: Label


@dataclass(frozen=True)
class Alt(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Seq(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Par(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class LeftMerge(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class CommMerge(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class EntMerge(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Encap(Term):
    """Blocks unsynchronised occurrences of actions matching the set."""

    patterns: PatternSet
    body: Term


@dataclass(frozen=True)
class Abstract(Term):
    """Renames actions matching the set to the silent step."""

    patterns: PatternSet
    body: Term


@dataclass(frozen=True)
class Var(Term):
    """Recursion variable; ``spec`` is bound when the specification is built."""

    name: str
    spec: "Optional[RecursiveSpec]" = None


_TERM_RANK = {
    Deadlock: 0,
    Skip: 1,
    Act: 2,
    Var: 3,
    Seq: 4,
    Alt: 5,
    Par: 6,
    LeftMerge: 7,
    CommMerge: 8,
    EntMerge: 9,
    Encap: 10,
    Abstract: 11,
}


def term_key(t: Term) -> tuple:
    """Total order on terms for canonical (AC) sorting."""
    rank = _TERM_RANK[type(t)]
    if isinstance(t, (Deadlock, Skip)):
        return (rank,)
    if isinstance(t, Act):
        return (rank, label_key(t.label))
    if isinstance(t, Var):
        return (rank, t.name, -1 if t.spec is None else t.spec.ordinal)
    if isinstance(t, (Encap, Abstract)):
        return (rank, t.patterns.key(), term_key(t.body))
    return (rank, term_key(t.left), term_key(t.right))


# -- convenience constructors ------------------------------------------------

def act(label: Label) -> Act:
    return Act(label)


def prefix(label: Label, rest: Term) -> Term:
    return Seq(Act(label), rest)


def alt(*terms: Term) -> Term:
    items = list(terms)
    if not items:
        return DELTA
    result = items[-1]
    for t in reversed(items[:-1]):
        result = Alt(t, result)
    return result


def seq(*terms: Term) -> Term:
    items = list(terms)
    if not items:
        return SKIP
    result = items[-1]
    for t in reversed(items[:-1]):
        result = Seq(t, result)
    return result


def par(*terms: Term) -> Term:
    items = list(terms)
    if not items:
        return SKIP
    result = items[-1]
    for t in reversed(items[:-1]):
        result = Par(t, result)
    return result


def summands(t: Term) -> Iterator[Term]:
    if isinstance(t, Alt):
        yield from summands(t.left)
        yield from summands(t.right)
    else:
        yield t


def seq_parts(t: Term) -> Iterator[Term]:
    if isinstance(t, Seq):
        yield from seq_parts(t.left)
        yield from seq_parts(t.right)
    else:
        yield t


def par_parts(t: Term) -> Iterator[Term]:
    if isinstance(t, Par):
        yield from par_parts(t.left)
        yield from par_parts(t.right)
    else:
        yield t


# ---------------------------------------------------------------------------
# normalisation
# ---------------------------------------------------------------------------

def normalize(t: Term) -> Term:
    """Canonical form: AC-sorted alternatives and parallels, no duplicate
    summands, ``x + delta = x``, ``delta . x = delta``, units for skip.
    Idempotent, and preserves behaviour up to strong bisimilarity.
    """
    if isinstance(t, (Deadlock, Skip, Act, Var)):
        return t
    if isinstance(t, Alt):
        parts: list[Term] = []
        for s in summands(t):
            ns = normalize(s)
            if isinstance(ns, Deadlock):
                continue
            parts.extend(summands(ns))
        uniq = {term_key(p): p for p in parts}
        items = [uniq[k] for k in sorted(uniq)]
        return alt(*items) if items else DELTA
    if isinstance(t, Seq):
        parts = []
        for piece in seq_parts(t):
            np = normalize(piece)
            if isinstance(np, Skip):
                continue
            sub = list(seq_parts(np))
            for x in sub:
                parts.append(x)
                if isinstance(x, Deadlock):
                    break
            if parts and isinstance(parts[-1], Deadlock):
                break
        if not parts:
            return SKIP
        if isinstance(parts[0], Deadlock):
            return DELTA
        return seq(*parts)
    if isinstance(t, Par):
        parts = []
        for piece in par_parts(t):
            np = normalize(piece)
            if isinstance(np, Skip):
                continue
            parts.extend(par_parts(np))
        if not parts:
            return SKIP
        parts.sort(key=term_key)
        return par(*parts)
    if isinstance(t, LeftMerge):
        left = normalize(t.left)
        if isinstance(left, (Deadlock, Skip)):
            return DELTA
        return LeftMerge(left, normalize(t.right))
    if isinstance(t, (CommMerge, EntMerge)):
        a, b = sorted((normalize(t.left), normalize(t.right)), key=term_key)
        return type(t)(a, b)
    if isinstance(t, (Encap, Abstract)):
        body = normalize(t.body)
        if isinstance(body, (Deadlock, Skip)):
            return body
        return type(t)(PatternSet.of(t.patterns), body)
    raise TermError(f"unknown term node {t!r}")


# ---------------------------------------------------------------------------
# recursive specifications
# ---------------------------------------------------------------------------

def _rebuild(t: Term, on_var: Callable[[Var], Term]) -> Term:
    if isinstance(t, Var):
        return on_var(t)
    if isinstance(t, (Deadlock, Skip, Act)):
        return t
    if isinstance(t, (Encap, Abstract)):
        return type(t)(t.patterns, _rebuild(t.body, on_var))
    return type(t)(_rebuild(t.left, on_var), _rebuild(t.right, on_var))


def iter_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, (Encap, Abstract)):
        yield from iter_vars(t.body)
    elif isinstance(t, (Alt, Seq, Par, LeftMerge, CommMerge, EntMerge)):
        yield from iter_vars(t.left)
        yield from iter_vars(t.right)


class RecursiveSpec:
    """A named system of recursive equations.

    Unbound ``Var`` nodes in the given bodies are bound to this specification;
    variables already bound to another specification are left alone.  Specs
    compare by identity and carry a creation ordinal so term ordering is
    deterministic within a run.
    """

    _ids = itertools.count()

    def __init__(
        self,
        equations: Mapping[str, Term],
        params: Optional[Mapping[str, tuple]] = None,
    ):
        self.ordinal = next(RecursiveSpec._ids)
        bound: dict[str, Term] = {}
        for name, body in equations.items():
            bound[name] = _rebuild(
                body, lambda v: Var(v.name, self) if v.spec is None else v
            )
        self.equations = bound
        self.params = dict(params or {})
        for name, body in bound.items():
            for v in iter_vars(body):
                if v.spec is self and v.name not in bound:
                    raise TermError(f"undefined variable {v.name} in {name}")

    def var(self, name: str) -> Var:
        if name not in self.equations:
            raise TermError(f"unknown variable {name}")
        return Var(name, self)

    def body(self, name: str) -> Term:
        return self.equations[name]

    def is_linear(self) -> bool:
        """True iff every body is delta or a sum of ``a`` / ``a . X`` summands."""
        for body in self.equations.values():
            if isinstance(body, Deadlock):
                continue
            for s in summands(body):
                if isinstance(s, Act):
                    continue
                if (
                    isinstance(s, Seq)
                    and isinstance(s.left, Act)
                    and isinstance(s.right, Var)
                ):
                    continue
                return False
        return True

    def with_equations(
        self, rewrite: Callable[[str, Term], Optional[Term]]
    ) -> "RecursiveSpec":
        """A new specification with each body passed through ``rewrite``.

        Returning None keeps the old body.  Variables bound to self are
        re-bound to the new specification.
        """
        new: dict[str, Term] = {}
        for name, body in self.equations.items():
            replaced = rewrite(name, body)
            body = body if replaced is None else replaced
            new[name] = _rebuild(
                body, lambda v: Var(v.name) if v.spec is self else v
            )
        return RecursiveSpec(new, self.params)

    def __repr__(self) -> str:
        return f"<RecursiveSpec #{self.ordinal} with {len(self.equations)} equations>"


def check_guarded(spec: RecursiveSpec) -> tuple[bool, list[str]]:
    """Every variable occurrence must sit behind at least one action prefix.

    Returns (ok, diagnostics); diagnostics name the offending variable and
    the equation it occurs in.
    """
    problems: list[str] = []
    for name, body in spec.equations.items():
        _scan_guard(body, False, name, problems)
    return (not problems, problems)


def _must_act(t: Term) -> bool:
    """Conservatively: t performs at least one step before completing."""
    if isinstance(t, Act):
        return True
    if isinstance(t, Deadlock):
        return True  # never completes, so anything after it is unreachable
    if isinstance(t, (Skip, Var)):
        return False
    if isinstance(t, Alt):
        return _must_act(t.left) and _must_act(t.right)
    if isinstance(t, (Seq, Par, LeftMerge, CommMerge, EntMerge)):
        return _must_act(t.left) or _must_act(t.right)
    if isinstance(t, (Encap, Abstract)):
        return _must_act(t.body)
    return False


def _scan_guard(t: Term, guarded: bool, equation: str, problems: list[str]) -> None:
    if isinstance(t, Var):
        if not guarded:
            problems.append(f"{t.name} unguarded in {equation}")
    elif isinstance(t, Seq):
        _scan_guard(t.left, guarded, equation, problems)
        _scan_guard(t.right, guarded or _must_act(t.left), equation, problems)
    elif isinstance(t, (Alt, Par, LeftMerge, CommMerge, EntMerge)):
        _scan_guard(t.left, guarded, equation, problems)
        _scan_guard(t.right, guarded, equation, problems)
    elif isinstance(t, (Encap, Abstract)):
        _scan_guard(t.body, guarded, equation, problems)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

_PREC_ALT = 0
_PREC_MERGE = 1
_PREC_SEQ = 2
_PREC_ATOM = 3


def term_str(t: Term) -> str:
    """Render a term in the surface syntax (pattern sets inline)."""
    return _render(t, _PREC_ALT)


def _render(t: Term, ctx: int) -> str:
    if isinstance(t, Deadlock):
        return "delta"
    if isinstance(t, Skip):
        return "skip"
    if isinstance(t, Act):
        return str(t.label)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Alt):
        text = " + ".join(_render(s, _PREC_MERGE) for s in summands(t))
        return f"({text})" if ctx > _PREC_ALT else text
    if isinstance(t, Seq):
        text = " . ".join(_render(s, _PREC_ATOM) for s in seq_parts(t))
        return f"({text})" if ctx > _PREC_SEQ else text
    if isinstance(t, (Par, LeftMerge, CommMerge, EntMerge)):
        op = {Par: "||", LeftMerge: "_|", CommMerge: "|", EntMerge: "><"}[type(t)]
        left = _render(t.left, _PREC_SEQ)
        right = _render(t.right, _PREC_SEQ)
        text = f"{left} {op} {right}"
        return f"({text})" if ctx > _PREC_MERGE else text
    if isinstance(t, (Encap, Abstract)):
        word = "encap" if isinstance(t, Encap) else "abstract"
        text = f"{word} {t.patterns} in {_render(t.body, _PREC_ALT)}"
        return f"({text})" if ctx > _PREC_ALT else text
    raise TermError(f"unknown term node {t!r}")
