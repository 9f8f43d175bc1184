"""Step relation, exploration, linearisation and LTS export."""
import random

import pytest

from qacp.qaqp import (
    QaqpConfig,
    blocked_set,
    build_encapsulated,
    build_system,
    comm_function,
    hidden_set,
    measure_data,
    receive_d,
    send_d,
)
from qacp.semantics import (
    BudgetExceededError,
    Lts,
    UnguardedError,
    aut_roundtrip_ok,
    explore,
    linearize,
    read_aut,
    step,
)
from qacp.equivalence import strong_bisim
from qacp.terms import (
    Abstract,
    Act,
    ActionLabel,
    Alt,
    BIT0,
    DELTA,
    Encap,
    Par,
    prefix,
    RecursiveSpec,
    Seq,
    shadow_of,
    SKIP,
    Tau,
    TAU,
    Var,
    normalize,
)

from generators import rand_closed_term, rand_guarded_spec

A = ActionLabel("a")
B = ActionLabel("b")


def loop_spec():
    return RecursiveSpec(
        {"X": prefix(ActionLabel("read"), Seq(Act(ActionLabel("send")), Var("X")))}
    )


class TestStep:
    def test_action_terminates(self):
        assert step(Act(A)) == ((A, SKIP),)

    def test_parallel_interleaves_and_synchronises(self):
        gamma = comm_function()
        p = prefix(send_d(BIT0), Act(A))
        q = prefix(receive_d(BIT0), Act(B))
        moves = step(Par(p, q), gamma)
        labels = {str(l) for l, _ in moves}
        assert labels == {"send_D[0]", "receive_D[0]", "C_D[0]"}
        merged = [l for l, _ in moves if not isinstance(l, Tau) and l.merged]
        assert [str(l) for l in merged] == ["C_D[0]"]
        (sync_target,) = [t for l, t in moves if not isinstance(l, Tau) and l.merged]
        assert sync_target == normalize(Par(Act(A), Act(B)))

    def test_encapsulated_parallel_keeps_only_handshake(self):
        gamma = comm_function()
        p = prefix(send_d(BIT0), Act(A))
        q = prefix(receive_d(BIT0), Act(B))
        moves = step(Encap(blocked_set(), Par(p, q)), gamma)
        assert len(moves) == 1
        label, target = moves[0]
        assert str(label) == "C_D[0]" and label.merged
        assert isinstance(target, Encap)

    def test_entanglement_merge_fuses_shadow(self):
        gamma = comm_function()
        real = prefix(measure_data(1), Act(A))
        shadow = prefix(shadow_of(measure_data(1)), Act(B))
        moves = step(Encap(blocked_set(), Par(real, shadow)), gamma)
        assert len(moves) == 1
        label, target = moves[0]
        assert str(label) == "Me[A,q1,kl]"
        assert label.merged and not label.shadow
        assert isinstance(target, Encap)

    def test_shadow_without_partner_is_blocked(self):
        moves = step(Encap(blocked_set(), prefix(shadow_of(measure_data(1)), Act(A))))
        assert moves == ()

    def test_abstraction_hides_internal_traffic(self):
        from qacp.qaqp import comm_d

        term = Abstract(hidden_set(), prefix(comm_d(BIT0), Act(ActionLabel("read_Q"))))
        moves = step(term)
        assert len(moves) == 1
        label, target = moves[0]
        assert isinstance(label, Tau)
        assert isinstance(target, Abstract)

    def test_left_merge_takes_first_step_left(self):
        from qacp.terms import LeftMerge

        moves = step(LeftMerge(prefix(A, DELTA), prefix(B, DELTA)))
        assert [str(l) for l, _ in moves] == ["a"]
        (_, target) = moves[0]
        assert target == normalize(Par(DELTA, prefix(B, DELTA)))

    def test_unguarded_variable_reported(self):
        spec = RecursiveSpec({"X": Alt(Var("X"), prefix(A, Var("X")))})
        with pytest.raises(UnguardedError) as err:
            step(spec.var("X"))
        assert "X" in str(err.value)


class TestExplore:
    def test_two_action_loop(self):
        lts = explore(loop_spec().var("X"))
        assert lts.num_states == 2
        assert lts.num_transitions == 2

    def test_deadlock_single_state(self):
        lts = explore(DELTA)
        assert lts.num_states == 1
        assert lts.num_transitions == 0

    def test_budget_exceeded(self):
        spec = rand_guarded_spec(random.Random(0), 3)
        with pytest.raises(BudgetExceededError) as err:
            explore(Par(Par(spec.var("V0"), spec.var("V1")), spec.var("V2")), budget=3)
        assert err.value.limit == 3

    def test_deterministic_construction(self):
        cfg = QaqpConfig(delta_size=1)
        l1 = explore(build_system(cfg), comm_function())
        l2 = explore(build_system(cfg), comm_function())
        assert l1.same_shape(l2)

    def test_encapsulation_soundness(self):
        lts = explore(build_encapsulated(QaqpConfig(delta_size=1)), comm_function())
        blocked = blocked_set()
        for _, label, _ in lts.transitions:
            assert isinstance(label, Tau) or label.merged or not blocked.matches(label)

    def test_abstraction_soundness(self):
        lts = explore(build_system(QaqpConfig(delta_size=1)), comm_function())
        hidden = hidden_set()
        for _, label, _ in lts.transitions:
            assert isinstance(label, Tau) or not hidden.matches(label)


class TestLinearize:
    def test_single_loop(self):
        lin = linearize(loop_spec().var("X"))
        assert lin.lts.num_states == 2
        assert lin.spec.is_linear()
        assert lin.entry == "X1"
        body = lin.spec.equations["X1"]
        assert isinstance(body, Seq) and isinstance(body.left, Act)

    def test_round_trip_bisimilar_on_random_specs(self):
        rng = random.Random(11)
        done = 0
        while done < 60:
            spec = rand_guarded_spec(rng, 3)
            try:
                original = explore(spec.var("V0"), budget=2000)
                lin = linearize(spec.var("V0"), budget=2000)
            except BudgetExceededError:
                continue
            relts = explore(lin.entry_term(), budget=2000)
            assert relts.num_states == original.num_states
            eq, _ = strong_bisim(relts, original)
            assert eq
            done += 1

    def test_action_only_summand_for_termination(self):
        lin = linearize(Act(A))
        assert lin.lts.num_states == 2
        body = lin.spec.equations[lin.entry]
        assert body == Act(A)

    def test_naming_scheme(self):
        lin = linearize(loop_spec().var("X"), names=lambda i: f"S_{i}")
        assert lin.entry == "S_0"


class TestAutFormat:
    def test_exact_layout(self):
        lts = Lts(2, [(0, A, 1), (1, TAU, 0)], 0)
        assert lts.to_aut() == 'des (0,2,2)\n(0,"a",1)\n(1,"tau",0)\n'

    def test_round_trip(self):
        lts = explore(build_system(QaqpConfig(delta_size=1)), comm_function())
        assert aut_roundtrip_ok(lts)

    def test_read_rejects_garbage(self):
        with pytest.raises(ValueError):
            read_aut("not a header\n")

    def test_text_dump_contains_flags(self):
        gamma = comm_function()
        lts = explore(
            Encap(
                blocked_set(),
                Par(prefix(send_d(BIT0), DELTA), prefix(receive_d(BIT0), DELTA)),
            ),
            gamma,
        )
        text = lts.to_text()
        assert "C_D[0] {merged}" in text
        assert text.startswith("states ")
