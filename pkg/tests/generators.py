"""Seeded random generators for property tests."""
from __future__ import annotations

import random

from qacp.terms import (
    Abstract,
    Act,
    ActionLabel,
    alt,
    ANY,
    Bit,
    DELTA,
    Encap,
    LabelPattern,
    Par,
    PatternSet,
    prefix,
    RecursiveSpec,
    Seq,
    Term,
    Var,
)
from qacp.semantics import Lts
from qacp.terms import TAU

ALPHABET = (
    ActionLabel("a"),
    ActionLabel("b"),
    ActionLabel("c", (Bit(0),)),
    ActionLabel("c", (Bit(1),)),
    ActionLabel("d"),
)


def rand_label(rng: random.Random) -> ActionLabel:
    return rng.choice(ALPHABET)


def rand_pattern_set(rng: random.Random) -> PatternSet:
    patterns = []
    for label in ALPHABET:
        if rng.random() < 0.4:
            args = tuple(ANY if rng.random() < 0.5 else a for a in label.args)
            patterns.append(LabelPattern(label.name, args))
    return PatternSet.of(patterns)


def rand_tail(rng: random.Random, depth: int, var_names=()) -> Term:
    """An arbitrary closed term; only ever used under an action prefix.

    Recursion variables only appear in tail positions (never on the left of
    a sequence), which keeps the reachable state terms of generated
    specifications bounded.
    """
    roll = rng.random()
    if depth <= 0 or roll < 0.25:
        if var_names and roll < 0.15:
            return Var(rng.choice(var_names))
        return DELTA if roll < 0.2 else Act(rand_label(rng))
    if roll < 0.5:
        return alt(
            *[rand_prefixed(rng, depth - 1, var_names) for _ in range(rng.randint(1, 3))]
        )
    if roll < 0.7:
        return Seq(
            rand_tail(rng, depth - 1, ()), rand_tail(rng, depth - 1, var_names)
        )
    if roll < 0.8 and depth >= 2:
        # a recursion variable under a parallel would fork unboundedly
        return Par(
            rand_tail(rng, depth - 2, ()), rand_tail(rng, depth - 2, ())
        )
    if roll < 0.9:
        return Encap(rand_pattern_set(rng), rand_tail(rng, depth - 1, var_names))
    return Abstract(rand_pattern_set(rng), rand_tail(rng, depth - 1, var_names))


def rand_prefixed(rng: random.Random, depth: int, var_names=()) -> Term:
    return prefix(rand_label(rng), rand_tail(rng, depth, var_names))


def rand_closed_term(rng: random.Random, depth: int = 3) -> Term:
    """Closed guarded term without recursion variables."""
    return alt(*[rand_prefixed(rng, depth) for _ in range(rng.randint(1, 3))])


def rand_guarded_spec(rng: random.Random, n_vars: int = 3) -> RecursiveSpec:
    names = tuple(f"V{i}" for i in range(n_vars))
    eqs = {
        name: alt(
            *[rand_prefixed(rng, rng.randint(1, 2), names) for _ in range(rng.randint(1, 3))]
        )
        for name in names
    }
    return RecursiveSpec(eqs)


def rand_lts(
    rng: random.Random,
    max_states: int = 6,
    labels=(ActionLabel("a"), ActionLabel("b")),
    tau_weight: float = 0.3,
    density: float = 0.35,
) -> Lts:
    n = rng.randint(1, max_states)
    transitions = []
    for src in range(n):
        for _ in range(rng.randint(0, max(1, int(density * n * 2)))):
            label = TAU if rng.random() < tau_weight else rng.choice(labels)
            transitions.append((src, label, rng.randrange(n)))
    return Lts(n, set(transitions), 0)


def inject_tau_cycles(rng: random.Random, lts: Lts) -> Lts:
    """Add a few silent cycles, preserving all existing behaviour."""
    transitions = set(lts.transitions)
    n = lts.num_states
    for _ in range(rng.randint(1, 3)):
        length = rng.randint(2, min(4, n)) if n >= 2 else 1
        cycle = [rng.randrange(n) for _ in range(length)]
        for i, s in enumerate(cycle):
            transitions.add((s, TAU, cycle[(i + 1) % length]))
    return Lts(n, transitions, lts.initial)
