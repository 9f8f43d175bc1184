"""Equivalence checking over finite LTSs.

Strong and (rooted) branching bisimulation by signature-based partition
refinement, tau-cluster collapse (the executable form of fair abstraction:
every strongly connected component of silent steps is contracted onto its
exits), quotient construction and trace membership.

Branching bisimulation here is divergence-insensitive: a tau-loop with exits
is equivalent to its exits, which is exactly the fairness reading of
unbounded retransmission.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .semantics import Lts
from .terms import ActionLabel, Label, Tau, TAU, label_key


@dataclass(frozen=True)
class Partition:
    """Blocks over states 0..n-1; states of a second LTS are offset by n_left."""

    block_index: tuple
    n_left: int

    @property
    def num_states(self) -> int:
        return len(self.block_index)

    @property
    def num_blocks(self) -> int:
        return max(self.block_index) + 1 if self.block_index else 0

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for state, block in enumerate(self.block_index):
            out[block].append(state)
        return out

    def same_block(self, i: int, j: int) -> bool:
        return self.block_index[i] == self.block_index[j]

    def block_of(self, state: int, side: int = 0) -> int:
        return self.block_index[state + (self.n_left if side else 0)]


# ---------------------------------------------------------------------------
# partition refinement
# ---------------------------------------------------------------------------

def _outgoing_table(n: int, transitions) -> list[list[tuple[Label, int]]]:
    out: list[list[tuple[Label, int]]] = [[] for _ in range(n)]
    for src, label, dst in transitions:
        out[src].append((label, dst))
    return out


def _stable_split(blocks: list[int], sigs: list) -> tuple[list[int], bool]:
    """Split every block by signature; new block ids in first-seen order."""
    mapping: dict = {}
    new = []
    for state in range(len(blocks)):
        key = (blocks[state], sigs[state])
        if key not in mapping:
            mapping[key] = len(mapping)
        new.append(mapping[key])
    return new, len(mapping) != max(blocks, default=-1) + 1


def _refine_strong(n: int, out) -> list[int]:
    blocks = [0] * n
    while True:
        sigs = [
            frozenset((label_key(l), blocks[d]) for l, d in out[s]) for s in range(n)
        ]
        blocks, changed = _stable_split(blocks, sigs)
        if not changed:
            return blocks


def _refine_branching(n: int, out) -> list[int]:
    blocks = [0] * n
    while True:
        sigs = []
        for s in range(n):
            home = blocks[s]
            seen = {s}
            stack = [s]
            sig = set()
            while stack:
                u = stack.pop()
                for label, v in out[u]:
                    if isinstance(label, Tau) and blocks[v] == home:
                        # inert silent step: extend the closure, observe nothing
                        if v not in seen:
                            seen.add(v)
                            stack.append(v)
                    else:
                        sig.add((label_key(label), blocks[v]))
            sigs.append(frozenset(sig))
        blocks, changed = _stable_split(blocks, sigs)
        if not changed:
            return blocks


def _disjoint_union(l1: Lts, l2: Lts):
    n = l1.num_states + l2.num_states
    off = l1.num_states
    transitions = list(l1.transitions) + [
        (s + off, l, d + off) for s, l, d in l2.transitions
    ]
    return n, _outgoing_table(n, transitions), l1.initial, l2.initial + off


def strong_partition(lts: Lts) -> Partition:
    out = _outgoing_table(lts.num_states, lts.transitions)
    return Partition(tuple(_refine_strong(lts.num_states, out)), lts.num_states)


def branching_partition(lts: Lts) -> Partition:
    out = _outgoing_table(lts.num_states, lts.transitions)
    return Partition(tuple(_refine_branching(lts.num_states, out)), lts.num_states)


def strong_bisim(l1: Lts, l2: Lts) -> tuple[bool, Partition]:
    """Coarsest strong bisimulation over the disjoint union of both LTSs."""
    n, out, i1, i2 = _disjoint_union(l1, l2)
    blocks = _refine_strong(n, out)
    partition = Partition(tuple(blocks), l1.num_states)
    return blocks[i1] == blocks[i2], partition


def branching_bisim(l1: Lts, l2: Lts, rooted: bool = True) -> tuple[bool, Partition]:
    """Coarsest divergence-insensitive branching bisimulation.

    With ``rooted=True`` the initial states must additionally match each
    other's first moves exactly (silent ones included), which makes the
    equivalence a congruence and is the right notion for equation-style
    claims.
    """
    n, out, i1, i2 = _disjoint_union(l1, l2)
    blocks = _refine_branching(n, out)
    partition = Partition(tuple(blocks), l1.num_states)
    if not rooted:
        return blocks[i1] == blocks[i2], partition

    def root_matches(a: int, b: int) -> bool:
        for label, dst in out[a]:
            if not any(
                label_key(label) == label_key(l2_) and blocks[d2] == blocks[dst]
                for l2_, d2 in out[b]
            ):
                return False
        return True

    verdict = root_matches(i1, i2) and root_matches(i2, i1)
    return verdict, partition


# ---------------------------------------------------------------------------
# tau-cluster collapse
# ---------------------------------------------------------------------------

def _tau_sccs(n: int, out) -> list[int]:
    """Tarjan over silent transitions only; returns component id per state.

    Component ids are renumbered to ascending order of their smallest
    member, keeping the construction deterministic.
    """
    succ = [[d for l, d in out[s] if isinstance(l, Tau)] for s in range(n)]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    counter = 0
    stack: list[int] = []
    comps: list[list[int]] = []

    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        call = [(root, 0)]
        while call:
            node, pos = call.pop()
            if pos < len(succ[node]):
                call.append((node, pos + 1))
                child = succ[node][pos]
                if index[child] == -1:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack[child] = True
                    call.append((child, 0))
                elif on_stack[child]:
                    low[node] = min(low[node], index[child])
            else:
                if low[node] == index[node]:
                    members = []
                    while True:
                        top = stack.pop()
                        on_stack[top] = False
                        comp[top] = len(comps)
                        members.append(top)
                        if top == node:
                            break
                    comps.append(members)
                if call:
                    parent = call[-1][0]
                    low[parent] = min(low[parent], low[node])
    order = sorted(range(len(comps)), key=lambda c: min(comps[c]))
    rename = {old: new for new, old in enumerate(order)}
    return [rename[c] for c in comp]


def cfar_collapse(lts: Lts) -> Lts:
    """Contract every strongly connected component of tau-transitions.

    Each cluster becomes a single state whose outgoing transitions are the
    union of its members' non-silent exits plus silent exits that leave the
    cluster.  When the initial state lies on a tau-cycle a fresh root is
    added that keeps the initial silent step (fair abstraction only licenses
    removing a cluster behind a step into it), so the result has no
    tau-cycles and is rooted-branching-bisimilar to the input.
    """
    out = _outgoing_table(lts.num_states, lts.transitions)
    comp = _tau_sccs(lts.num_states, out)
    num = max(comp) + 1 if comp else 1
    init_comp = comp[lts.initial] if comp else 0
    init_cyclic = any(
        isinstance(label, Tau)
        and comp[src] == init_comp
        and comp[dst] == init_comp
        for src, label, dst in lts.transitions
    )
    shift = 1 if init_cyclic else 0
    transitions = set()
    for src, label, dst in lts.transitions:
        if isinstance(label, Tau) and comp[src] == comp[dst]:
            continue
        transitions.add((comp[src] + shift, label, comp[dst] + shift))
    if not init_cyclic:
        return Lts(num, transitions, init_comp)
    # fresh root 0 mirrors the original initial state's moves
    for label, dst in out[lts.initial]:
        transitions.add((0, label, comp[dst] + shift))
    return Lts(num + 1, transitions, 0)


# ---------------------------------------------------------------------------
# quotient
# ---------------------------------------------------------------------------

def quotient(lts: Lts, partition: Partition, drop_inert_tau: bool = False) -> Lts:
    """One state per block; with ``drop_inert_tau`` silent self-loops of a
    block are removed (the right reading for branching-bisimulation blocks).
    """
    if partition.num_states != lts.num_states:
        raise ValueError("partition does not cover this LTS")
    blocks = partition.blocks()
    order = sorted(range(len(blocks)), key=lambda b: min(blocks[b]))
    rename = {old: new for new, old in enumerate(order)}
    transitions = set()
    for src, label, dst in lts.transitions:
        bs, bd = partition.block_index[src], partition.block_index[dst]
        if drop_inert_tau and isinstance(label, Tau) and bs == bd:
            continue
        transitions.add((rename[bs], label, rename[bd]))
    return Lts(len(blocks), transitions, rename[partition.block_index[lts.initial]])


def minimize(lts: Lts, flavor: str = "strong") -> Lts:
    """Quotient by the coarsest bisimulation of the requested flavor."""
    if flavor == "strong":
        return quotient(lts, strong_partition(lts))
    if flavor == "branching":
        return quotient(lts, branching_partition(lts), drop_inert_tau=True)
    raise ValueError(f"unknown equivalence flavor {flavor!r}")


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

def _content(label: Label):
    return (0,) if isinstance(label, Tau) else (1,) + label.content_key()


def _tau_closure(states: Iterable[int], out) -> frozenset:
    seen = set(states)
    stack = list(seen)
    while stack:
        s = stack.pop()
        for label, dst in out[s]:
            if isinstance(label, Tau) and dst not in seen:
                seen.add(dst)
                stack.append(dst)
    return frozenset(seen)


def accepts_trace(lts: Lts, trace: Sequence[Label], weak: bool = False) -> bool:
    """True iff the trace labels a path from the initial state.

    ``weak=True`` lets silent steps be skipped freely.  Labels are compared
    by content (name, arguments, shadow flag); merge provenance is ignored,
    so an observed synchronisation matches the merged transition it came
    from.
    """
    out = _outgoing_table(lts.num_states, lts.transitions)
    current = {lts.initial}
    if weak:
        current = set(_tau_closure(current, out))
    for wanted in trace:
        key = _content(wanted)
        nxt = {d for s in current for l, d in out[s] if _content(l) == key}
        if weak:
            nxt = set(_tau_closure(nxt, out))
        if not nxt:
            return False
        current = nxt
    return True


def distinguishing_trace(
    l1: Lts, l2: Lts
) -> Optional[tuple[list[ActionLabel], str]]:
    """A shortest observable sequence possible in one LTS but not the other.

    Returns (labels, side) where side is "left" or "right" for the LTS that
    admits the sequence, or None when both have the same weak traces (the
    systems may still differ in branching structure).
    """
    out1 = _outgoing_table(l1.num_states, l1.transitions)
    out2 = _outgoing_table(l2.num_states, l2.transitions)
    start = (_tau_closure({l1.initial}, out1), _tau_closure({l2.initial}, out2))
    seen = {start}
    queue = deque([(start, [])])
    while queue:
        (s1, s2), prefix = queue.popleft()
        moves: dict = {}
        for s in s1:
            for label, dst in out1[s]:
                if not isinstance(label, Tau):
                    moves.setdefault(_content(label), [label, set(), set()])[1].add(dst)
        for s in s2:
            for label, dst in out2[s]:
                if not isinstance(label, Tau):
                    moves.setdefault(_content(label), [label, set(), set()])[2].add(dst)
        for key in sorted(moves):
            label, n1, n2 = moves[key]
            if n1 and not n2:
                return prefix + [label], "left"
            if n2 and not n1:
                return prefix + [label], "right"
            nxt = (_tau_closure(n1, out1), _tau_closure(n2, out2))
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, prefix + [label]))
    return None
