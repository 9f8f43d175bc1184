"""Independent brute-force oracles the fast algorithms are checked against.

These deliberately mirror the textbook greatest-fixpoint definitions and a
plain bounded trace enumeration; they share no code with the partition
refinement implementations they validate.
"""
from __future__ import annotations

from qacp.semantics import Lts
from qacp.terms import Tau, label_key


def _out(lts: Lts):
    table = [[] for _ in range(lts.num_states)]
    for s, l, d in lts.transitions:
        table[s].append((l, d))
    return table


def _union(l1: Lts, l2: Lts):
    off = l1.num_states
    n = off + l2.num_states
    table = [[] for _ in range(n)]
    for s, l, d in l1.transitions:
        table[s].append((l, d))
    for s, l, d in l2.transitions:
        table[s + off].append((l, d + off))
    return n, table, l1.initial, l2.initial + off


def strong_pairs_naive(n: int, out) -> set[tuple[int, int]]:
    related = {(s, t) for s in range(n) for t in range(n)}
    changed = True
    while changed:
        changed = False
        for s, t in sorted(related):
            ok = all(
                any(
                    label_key(l1) == label_key(l2) and (d1, d2) in related
                    for l2, d2 in out[t]
                )
                for l1, d1 in out[s]
            ) and all(
                any(
                    label_key(l1) == label_key(l2) and (d2, d1) in related
                    for l1, d1 in out[s]
                )
                for l2, d2 in out[t]
            )
            if not ok:
                related.discard((s, t))
                changed = True
    return related


def strong_bisim_naive(l1: Lts, l2: Lts) -> bool:
    n, out, i1, i2 = _union(l1, l2)
    return (i1, i2) in strong_pairs_naive(n, out)


def _tau_reach(n: int, out) -> list[list[int]]:
    closure = []
    for s in range(n):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for l, d in out[u]:
                if isinstance(l, Tau) and d not in seen:
                    seen.add(d)
                    stack.append(d)
        closure.append(sorted(seen))
    return closure


def branching_pairs_naive(n: int, out) -> set[tuple[int, int]]:
    """Greatest fixpoint of the branching-bisimulation clause
    (divergence-insensitive)."""
    reach = _tau_reach(n, out)
    related = {(s, t) for s in range(n) for t in range(n)}

    def matched(s, t, label, s_next):
        if isinstance(label, Tau) and (s_next, t) in related:
            return True
        for t1 in reach[t]:
            if (s, t1) not in related:
                continue
            for l2, t2 in out[t1]:
                if label_key(l2) == label_key(label) and (s_next, t2) in related:
                    return True
        return False

    changed = True
    while changed:
        changed = False
        for s, t in sorted(related):
            ok = all(matched(s, t, l, d) for l, d in out[s]) and all(
                matched(t, s, l, d) for l, d in out[t]
            )
            if not ok:
                related.discard((s, t))
                changed = True
    return related


def branching_bisim_naive(l1: Lts, l2: Lts) -> bool:
    n, out, i1, i2 = _union(l1, l2)
    return (i1, i2) in branching_pairs_naive(n, out)


def branching_classes_naive(lts: Lts) -> list[int]:
    """Equivalence classes over one LTS, numbered in first-seen order."""
    out = _out(lts)
    related = branching_pairs_naive(lts.num_states, out)
    classes = []
    block_of = {}
    for s in range(lts.num_states):
        for rep in classes:
            if (s, rep) in related:
                block_of[s] = block_of[rep]
                break
        else:
            block_of[s] = len(classes)
            classes.append(s)
    return [block_of[s] for s in range(lts.num_states)]


def weak_traces(lts: Lts, depth: int) -> frozenset[tuple]:
    """All visible traces of length <= depth (bounded enumeration)."""
    out = _out(lts)
    reach = _tau_reach(lts.num_states, out)

    def closure(states):
        seen = set()
        for s in states:
            seen.update(reach[s])
        return frozenset(seen)

    traces = set()
    frontier = {(): closure({lts.initial})}
    traces.add(())
    for _ in range(depth):
        nxt = {}
        for trace, states in frontier.items():
            moves = {}
            for s in states:
                for l, d in out[s]:
                    if not isinstance(l, Tau):
                        moves.setdefault(label_key(l), set()).add(d)
            for key, targets in moves.items():
                new_trace = trace + (key,)
                traces.add(new_trace)
                nxt[new_trace] = nxt.get(new_trace, frozenset()) | closure(targets)
        frontier = nxt
        if not frontier:
            break
    return frozenset(traces)
