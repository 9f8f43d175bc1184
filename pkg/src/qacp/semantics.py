"""Operational semantics: single steps, exhaustive exploration, linearisation.

The step relation follows the merge expansion
``x || y = (x {left} y + y {left} x) + x | y + x >< y``: a parallel
composition interleaves both components, synchronises pairs the
communication function defines, and fuses a real action with its shadow
copy via the entanglement merge.  Encapsulation drops unsynchronised
occurrences of blocked actions (merge results pass), abstraction renames
hidden actions to tau.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .terms import (
    Abstract,
    Act,
    ActionLabel,
    Alt,
    CommFunction,
    CommMerge,
    Deadlock,
    DELTA,
    EMPTY_COMM,
    Encap,
    EntMerge,
    Label,
    LeftMerge,
    Par,
    RecursiveSpec,
    Seq,
    SKIP,
    Skip,
    Tau,
    TAU,
    Term,
    TermError,
    Var,
    label_key,
    normalize,
    prefix,
    summands,
    term_key,
    term_str,
)


class UnguardedError(TermError):
    """Raised when exploration unfolds an unguarded recursion variable."""

    def __init__(self, variable: str):
        super().__init__(f"unguarded recursion through variable {variable}")
        self.variable = variable


class BudgetExceededError(Exception):
    """State budget exhausted during exploration."""

    def __init__(self, limit: int):
        super().__init__(f"state budget of {limit} exceeded")
        self.limit = limit


DEFAULT_BUDGET = 100_000


# ---------------------------------------------------------------------------
# the step relation
# ---------------------------------------------------------------------------

def _seq2(x: Term, y: Term) -> Term:
    if isinstance(x, Skip):
        return y
    if isinstance(x, Deadlock):
        return DELTA
    return Seq(x, y)


def _par2(x: Term, y: Term) -> Term:
    if isinstance(x, Skip):
        return y
    if isinstance(y, Skip):
        return x
    return Par(x, y)


def _terminates(t: Term, unfolding: frozenset) -> bool:
    if isinstance(t, Skip):
        return True
    if isinstance(t, (Deadlock, Act)):
        return False
    if isinstance(t, Alt):
        return _terminates(t.left, unfolding) or _terminates(t.right, unfolding)
    if isinstance(t, (Seq, Par, LeftMerge, CommMerge, EntMerge)):
        return _terminates(t.left, unfolding) and _terminates(t.right, unfolding)
    if isinstance(t, (Encap, Abstract)):
        return _terminates(t.body, unfolding)
    if isinstance(t, Var):
        if t.spec is None:
            raise TermError(f"unbound variable {t.name}")
        key = (id(t.spec), t.name)
        if key in unfolding:
            return False
        return _terminates(t.spec.body(t.name), unfolding | {key})
    return False


def _comm_moves(xs, ys, gamma: CommFunction):
    for a, xrest in xs:
        if isinstance(a, Tau) or a.merged:
            continue
        for b, yrest in ys:
            if isinstance(b, Tau) or b.merged:
                continue
            result = gamma.apply(a, b)
            if result is not None:
                yield result.as_merged(), _par2(xrest, yrest)


def _ent_moves(xs, ys):
    for a, xrest in xs:
        if isinstance(a, Tau) or a.merged:
            continue
        for b, yrest in ys:
            if isinstance(b, Tau) or b.merged:
                continue
            if a.shadow == b.shadow:
                continue
            real, sh = (b, a) if a.shadow else (a, b)
            if real.name == sh.name and real.args == sh.args:
                yield real.as_merged(), _par2(xrest, yrest)


def _moves(t: Term, gamma: CommFunction, unfolding: frozenset):
    if isinstance(t, (Deadlock, Skip)):
        return []
    if isinstance(t, Act):
        return [(t.label, SKIP)]
    if isinstance(t, Alt):
        return _moves(t.left, gamma, unfolding) + _moves(t.right, gamma, unfolding)
    if isinstance(t, Seq):
        out = [
            (label, _seq2(rest, t.right))
            for label, rest in _moves(t.left, gamma, unfolding)
        ]
        if _terminates(t.left, frozenset()):
            out.extend(_moves(t.right, gamma, unfolding))
        return out
    if isinstance(t, Par):
        xs = _moves(t.left, gamma, unfolding)
        ys = _moves(t.right, gamma, unfolding)
        out = [(label, _par2(rest, t.right)) for label, rest in xs]
        out += [(label, _par2(t.left, rest)) for label, rest in ys]
        out += list(_comm_moves(xs, ys, gamma))
        out += list(_ent_moves(xs, ys))
        return out
    if isinstance(t, LeftMerge):
        return [
            (label, _par2(rest, t.right))
            for label, rest in _moves(t.left, gamma, unfolding)
        ]
    if isinstance(t, CommMerge):
        xs = _moves(t.left, gamma, unfolding)
        ys = _moves(t.right, gamma, unfolding)
        return list(_comm_moves(xs, ys, gamma))
    if isinstance(t, EntMerge):
        xs = _moves(t.left, gamma, unfolding)
        ys = _moves(t.right, gamma, unfolding)
        return list(_ent_moves(xs, ys))
    if isinstance(t, Encap):
        out = []
        for label, rest in _moves(t.body, gamma, unfolding):
            if isinstance(label, Tau) or label.merged or not t.patterns.matches(label):
                out.append((label, Encap(t.patterns, rest)))
        return out
    if isinstance(t, Abstract):
        out = []
        for label, rest in _moves(t.body, gamma, unfolding):
            if not isinstance(label, Tau) and t.patterns.matches(label):
                label = TAU
            out.append((label, Abstract(t.patterns, rest)))
        return out
    if isinstance(t, Var):
        if t.spec is None:
            raise TermError(f"unbound variable {t.name}")
        key = (id(t.spec), t.name)
        if key in unfolding:
            raise UnguardedError(t.name)
        return _moves(t.spec.body(t.name), gamma, unfolding | {key})
    raise TermError(f"unknown term node {t!r}")


def step(t: Term, gamma: Optional[CommFunction] = None) -> tuple:
    """All outgoing transitions of a closed, guarded term.

    Returns a sorted, duplicate-free tuple of (label, normalized target).
    """
    gamma = gamma or EMPTY_COMM
    raw = _moves(t, gamma, frozenset())
    uniq = {}
    for label, rest in raw:
        target = normalize(rest)
        uniq[(label_key(label), term_key(target))] = (label, target)
    return tuple(uniq[k] for k in sorted(uniq))


# ---------------------------------------------------------------------------
# labelled transition systems
# ---------------------------------------------------------------------------

class Lts:
    """An explicit LTS: states 0..n-1, transitions (src, label, dst).

    Transitions are kept in a canonical sorted order, so construction from
    the same data is fully deterministic.  ``state_terms`` optionally keeps
    the term each state came from.
    """

    def __init__(
        self,
        num_states: int,
        transitions: Iterable[tuple[int, Label, int]],
        initial: int = 0,
        state_terms: Optional[list] = None,
    ):
        self.num_states = num_states
        self.transitions = sorted(
            transitions, key=lambda tr: (tr[0], label_key(tr[1]), tr[2])
        )
        self.initial = initial
        self.state_terms = state_terms
        self._out: Optional[list[list[tuple[Label, int]]]] = None
        for src, _, dst in self.transitions:
            if not (0 <= src < num_states and 0 <= dst < num_states):
                raise ValueError("transition endpoint outside state range")
        if not 0 <= initial < max(num_states, 1):
            raise ValueError("initial state not registered")

    @property
    def num_transitions(self) -> int:
        return len(self.transitions)

    def outgoing(self, state: int) -> list[tuple[Label, int]]:
        if self._out is None:
            out: list[list[tuple[Label, int]]] = [[] for _ in range(self.num_states)]
            for src, label, dst in self.transitions:
                out[src].append((label, dst))
            self._out = out
        return self._out[state]

    def labels(self) -> list[Label]:
        uniq = {label_key(l): l for _, l, _ in self.transitions}
        return [uniq[k] for k in sorted(uniq)]

    def has_tau(self) -> bool:
        return any(isinstance(l, Tau) for _, l, _ in self.transitions)

    def same_shape(self, other: "Lts") -> bool:
        return (
            self.num_states == other.num_states
            and self.initial == other.initial
            and self.transitions == other.transitions
        )

    # -- export / import ----------------------------------------------------

    def to_aut(self) -> str:
        lines = [f"des ({self.initial},{self.num_transitions},{self.num_states})"]
        for src, label, dst in self.transitions:
            lines.append(f'({src},"{label}",{dst})')
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [
            f"states {self.num_states}",
            f"initial {self.initial}",
            f"transitions {self.num_transitions}",
        ]
        if self.state_terms is not None:
            for i, t in enumerate(self.state_terms):
                rendered = term_str(t) if isinstance(t, Term) else str(t)
                lines.append(f"state {i}  {rendered}")
        for src, label, dst in self.transitions:
            lines.append(f"{src} -> {dst}  {label.detail()}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return (
            f"<Lts {self.num_states} states, {self.num_transitions} transitions,"
            f" initial {self.initial}>"
        )


def read_aut(text: str) -> tuple[int, int, list[tuple[int, str, int]]]:
    """Parse Aldebaran text into (initial, num_states, labelled transitions)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("des"):
        raise ValueError("missing aut header")
    header = lines[0][lines[0].index("(") + 1 : lines[0].rindex(")")]
    initial_s, ntrans_s, nstates_s = (p.strip() for p in header.split(","))
    initial, ntrans, nstates = int(initial_s), int(ntrans_s), int(nstates_s)
    transitions = []
    for ln in lines[1:]:
        body = ln.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise ValueError(f"malformed aut line: {ln!r}")
        body = body[1:-1]
        left = body.index(",")
        right = body.rindex(",")
        src = int(body[:left])
        dst = int(body[right + 1 :])
        label = body[left + 1 : right].strip()
        if label.startswith('"') and label.endswith('"'):
            label = label[1:-1]
        transitions.append((src, label, dst))
    if len(transitions) != ntrans:
        raise ValueError("aut transition count mismatch")
    return initial, nstates, transitions


def aut_roundtrip_ok(lts: Lts) -> bool:
    """Exported aut text reparses to the same structure (up to label strings)."""
    initial, nstates, triples = read_aut(lts.to_aut())
    expected = [(s, str(l), d) for s, l, d in lts.transitions]
    return initial == lts.initial and nstates == lts.num_states and triples == expected


# ---------------------------------------------------------------------------
# exploration and linearisation
# ---------------------------------------------------------------------------

def explore(
    t: Term,
    gamma: Optional[CommFunction] = None,
    budget: int = DEFAULT_BUDGET,
) -> Lts:
    """Breadth-first exploration of all reachable states of a closed term.

    States are normalized terms; construction is deterministic, so exploring
    the same term twice yields identical LTSs.  Raises BudgetExceededError
    when more than ``budget`` states are discovered.
    """
    gamma = gamma or EMPTY_COMM
    root = normalize(t)
    index: dict[tuple, int] = {term_key(root): 0}
    states: list[Term] = [root]
    transitions: list[tuple[int, Label, int]] = []
    frontier = 0
    while frontier < len(states):
        current = states[frontier]
        for label, target in step(current, gamma):
            k = term_key(target)
            dst = index.get(k)
            if dst is None:
                if len(states) >= budget:
                    raise BudgetExceededError(budget)
                dst = len(states)
                index[k] = dst
                states.append(target)
            transitions.append((frontier, label, dst))
        frontier += 1
    return Lts(len(states), transitions, 0, states)


@dataclass
class LinearSpec:
    """A recursive specification in linear form, one equation per LTS state."""

    spec: RecursiveSpec
    entry: str
    lts: Lts
    state_names: list[str]

    def entry_term(self) -> Var:
        return self.spec.var(self.entry)


def linearize(
    t: Term,
    gamma: Optional[CommFunction] = None,
    budget: int = DEFAULT_BUDGET,
    names: "Optional[Callable[[int], str]] | str" = "X",
) -> LinearSpec:
    """Mechanical expansion of a term into a linear recursive specification.

    Each reachable state becomes one equation whose body sums the outgoing
    transitions (``label . X_target``, or just ``label`` for transitions into
    successful termination; deadlock states get body delta).  The result
    explores back to an LTS strongly bisimilar to the input with the same
    state count.
    """
    lts = explore(t, gamma, budget)
    if callable(names):
        name_of = names
    else:
        stem = names

        def name_of(i: int, _stem=stem) -> str:
            return f"{_stem}{i + 1}"

    state_names = [name_of(i) for i in range(lts.num_states)]
    if len(set(state_names)) != len(state_names):
        raise TermError("naming scheme produced duplicate state names")
    terms = lts.state_terms or [None] * lts.num_states
    equations: dict[str, Term] = {}
    for i in range(lts.num_states):
        parts: list[Term] = []
        for label, dst in lts.outgoing(i):
            if isinstance(terms[dst], Skip):
                parts.append(Act(label))
            else:
                parts.append(prefix(label, Var(state_names[dst])))
        if isinstance(terms[i], Skip):
            # terminal state: equation only needed if something targets it
            equations[state_names[i]] = DELTA
        else:
            equations[state_names[i]] = (
                normalize_sum(parts) if parts else DELTA
            )
    spec = RecursiveSpec(equations)
    return LinearSpec(spec, state_names[lts.initial], lts, state_names)


def normalize_sum(parts: Sequence[Term]) -> Term:
    """Sum of summands kept in transition order (already deterministic)."""
    result = parts[-1]
    for p in reversed(parts[:-1]):
        result = Alt(p, result)
    return result
