"""Term language: labels, patterns, communication, normalisation, guards."""
import random

import pytest

from qacp.terms import (
    Act,
    ActionLabel,
    Alt,
    ANY,
    Bit,
    BIT0,
    CommFunction,
    CommRule,
    Datum,
    DELTA,
    ERR,
    KL,
    LabelPattern,
    Par,
    PatternSet,
    PatVar,
    prefix,
    Qubit,
    RecursiveSpec,
    Seq,
    SKIP,
    TermError,
    Var,
    check_guarded,
    match_label,
    normalize,
    shadow_of,
    term_key,
    term_str,
)
from qacp.semantics import explore
from qacp.equivalence import strong_bisim

from generators import ALPHABET, rand_closed_term, rand_label

A = ActionLabel("a")
B = ActionLabel("b")


class TestLabels:
    def test_reserved_names_rejected(self):
        with pytest.raises(TermError):
            ActionLabel("tau")
        with pytest.raises(TermError):
            ActionLabel("delta")

    def test_shadow_and_merged_exclusive(self):
        with pytest.raises(TermError):
            ActionLabel("a", shadow=True, merged=True)
        with pytest.raises(TermError):
            shadow_of(A).as_merged()

    def test_rendering(self):
        label = ActionLabel("Me", (Qubit("A"), Datum(1), KL))
        assert str(label) == "Me[A,q1,kl]"
        assert str(shadow_of(label)) == "@shadow(Me[A,q1,kl])"
        assert label.as_merged().detail() == "Me[A,q1,kl] {merged}"

    def test_content_key_ignores_merged(self):
        assert A.content_key() == A.as_merged().content_key()
        assert A.key() != A.as_merged().key()


class TestMatchLabel:
    def test_wildcard_argument(self):
        pattern = LabelPattern("send_D", (ANY,))
        assert match_label(pattern, ActionLabel("send_D", (BIT0,)))

    def test_shadow_flag_must_match(self):
        pattern = LabelPattern("Me", (Qubit("A"), ANY, KL))
        shadowed = ActionLabel("Me", (Qubit("A"), Datum(1), KL), shadow=True)
        assert not match_label(pattern, shadowed)
        assert match_label(
            LabelPattern("Me", (Qubit("A"), ANY, KL), shadow=True), shadowed
        )

    def test_blocked_set_matches_error_receive(self):
        from qacp.qaqp import blocked_set, receive_d

        assert blocked_set().matches(receive_d(ERR))

    def test_pattern_variable_binds_consistently(self):
        pattern = LabelPattern("pair", (PatVar("x"), PatVar("x")))
        assert match_label(pattern, ActionLabel("pair", (BIT0, BIT0)))
        assert not match_label(pattern, ActionLabel("pair", (BIT0, Bit(1))))

    def test_merged_flag_not_part_of_matching(self):
        pattern = LabelPattern("a")
        assert match_label(pattern, A.as_merged())


class TestCommFunction:
    def rule(self):
        x = PatVar("x")
        return CommFunction.of(
            [
                CommRule(
                    LabelPattern("send_D", (x,)),
                    LabelPattern("receive_D", (x,)),
                    "C_D",
                    (x,),
                )
            ]
        )

    def test_basic_synchronisation(self):
        gamma = self.rule()
        out = gamma.apply(
            ActionLabel("send_D", (BIT0,)), ActionLabel("receive_D", (BIT0,))
        )
        assert out == ActionLabel("C_D", (BIT0,))

    def test_symmetric_by_construction(self):
        gamma = self.rule()
        rng = random.Random(5)
        values = (BIT0, Bit(1), ERR, Qubit("M"))
        for _ in range(200):
            a = ActionLabel(rng.choice(("send_D", "receive_D", "other")),
                            (rng.choice(values),))
            b = ActionLabel(rng.choice(("send_D", "receive_D", "other")),
                            (rng.choice(values),))
            assert gamma.apply(a, b) == gamma.apply(b, a)

    def test_mismatched_payload_deadlocks(self):
        gamma = self.rule()
        assert gamma.apply(
            ActionLabel("send_D", (BIT0,)), ActionLabel("receive_D", (Bit(1),))
        ) is None

    def test_merged_labels_never_resynchronise(self):
        gamma = self.rule()
        sent = ActionLabel("send_D", (BIT0,)).as_merged()
        assert gamma.apply(sent, ActionLabel("receive_D", (BIT0,))) is None


class TestNormalize:
    def test_deadlock_unit(self):
        t = Alt(prefix(A, Var("P", _spec())), DELTA)
        n = normalize(t)
        assert isinstance(n, Seq)

    def test_commutativity_ordering(self):
        p = _spec()
        t = Alt(prefix(B, p.var("P")), prefix(A, p.var("P")))
        n = normalize(t)
        first = list(_summands(n))[0]
        assert first.left.label == A

    def test_idempotent_on_random_terms(self):
        rng = random.Random(42)
        for _ in range(1000):
            t = rand_closed_term(rng, depth=3)
            once = normalize(t)
            assert normalize(once) == once

    def test_preserves_behaviour_strong(self):
        rng = random.Random(7)
        checked = 0
        for _ in range(120):
            t = rand_closed_term(rng, depth=3)
            l1 = explore(t, budget=4000)
            l2 = explore(normalize(t), budget=4000)
            eq, _ = strong_bisim(l1, l2)
            assert eq, term_str(t)
            checked += 1
        assert checked == 120

    def test_skip_units(self):
        assert normalize(Seq(SKIP, Act(A))) == Act(A)
        assert normalize(Seq(Act(A), SKIP)) == Act(A)
        assert normalize(Par(SKIP, Act(A))) == Act(A)

    def test_deadlock_absorbs_sequence(self):
        assert normalize(Seq(DELTA, Act(A))) == DELTA

    def test_alt_dedupe_and_flatten(self):
        t = Alt(Act(A), Alt(Act(A), Act(B)))
        n = normalize(t)
        assert len(list(_summands(n))) == 2

    def test_parallel_sorted(self):
        t = Par(Act(B), Act(A))
        assert normalize(t) == normalize(Par(Act(A), Act(B)))


def _summands(t):
    from qacp.terms import summands

    return summands(t)


def _spec() -> RecursiveSpec:
    return RecursiveSpec({"P": prefix(A, Var("P"))})


class TestGuardedness:
    def test_single_guarded_loop(self):
        spec = RecursiveSpec({"X": prefix(A, Var("X"))})
        ok, problems = check_guarded(spec)
        assert ok and problems == []

    def test_direct_self_reference(self):
        spec = RecursiveSpec({"X": Alt(Var("X"), prefix(A, Var("X")))})
        ok, problems = check_guarded(spec)
        assert not ok
        assert problems == ["X unguarded in X"]

    def test_unguarded_through_sequence_head(self):
        spec = RecursiveSpec({"X": prefix(A, Var("X")), "Y": Seq(Var("X"), Act(A))})
        ok, problems = check_guarded(spec)
        assert not ok
        assert "X unguarded in Y" in problems

    def test_guard_through_sequence(self):
        spec = RecursiveSpec({"X": Seq(Act(A), Seq(Var("X"), Var("X")))})
        ok, _ = check_guarded(spec)
        assert ok

    def test_guard_under_parallel_requires_prefix(self):
        spec = RecursiveSpec({"X": Par(prefix(A, DELTA), Var("X"))})
        ok, problems = check_guarded(spec)
        assert not ok

    def test_protocol_model_is_guarded(self):
        from qacp.qaqp import QaqpConfig, build_alice, build_bob

        cfg = QaqpConfig(delta_size=2)
        for spec in (build_alice(0, cfg), build_bob(0, cfg)):
            ok, problems = check_guarded(spec)
            assert ok, problems


class TestRecursiveSpec:
    def test_undefined_variable_rejected(self):
        with pytest.raises(TermError):
            RecursiveSpec({"X": prefix(A, Var("Nope"))})

    def test_variables_bind_to_owner(self):
        spec = _spec()
        (var,) = [v for v in _vars(spec.equations["P"])]
        assert var.spec is spec

    def test_cross_spec_references_survive(self):
        inner = _spec()
        outer = RecursiveSpec({"Q": prefix(B, inner.var("P"))})
        (var,) = [v for v in _vars(outer.equations["Q"])]
        assert var.spec is inner

    def test_is_linear(self):
        linear = RecursiveSpec({"X": Alt(prefix(A, Var("X")), Act(B))})
        assert linear.is_linear()
        nonlinear = RecursiveSpec({"X": prefix(A, Seq(Act(B), Var("X")))})
        assert not nonlinear.is_linear()

    def test_with_equations_rebinds(self):
        spec = _spec()
        changed = spec.with_equations(lambda name, body: Alt(body, Act(B)))
        (var,) = [v for v in _vars(changed.equations["P"]) ]
        assert var.spec is changed
        assert spec.equations["P"] != changed.equations["P"]

    def test_term_ordering_total(self):
        rng = random.Random(3)
        terms = [rand_closed_term(rng, 2) for _ in range(50)]
        keys = sorted(term_key(t) for t in terms)
        assert keys == sorted(keys)


def _vars(term):
    from qacp.terms import iter_vars

    return list(iter_vars(term))
