"""Desk-scale statevector simulator for the alternating-qubit protocol.

Runs the concrete protocol: per session the sender reads a data qubit,
teleports it over a pre-shared entangled pair, transfers her two measurement
bits by encoding them on a travelling qubit supplied by the receiver
(superdense coding), and retransmits on detectably corrupted legs of the
noisy channel until acknowledged.  Every run emits the abstract action
labels of the process model so traces can be checked against the explored
transition system.

Channel errors are detectable: the flag model marks a message corrupted and
leaves quantum state untouched; the bit-flip and phase-flip models apply the
corresponding Pauli to a carried register qubit and immediately undo it,
idealising exact syndrome detection and recovery.  A corrupted leg always
takes the protocol's error path regardless of model.

Register qubits are allocated and retired per session; at most five are ever
live.  All randomness comes from two seeded PCG64 generators (one for the
channel, one for measurements), so runs are reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .qaqp import (
    comm_d,
    correct_b,
    correct_m,
    gen_epr,
    measure_data,
    measure_pair,
    read_q,
    send_p,
)
from .terms import ActionLabel, Bit, ERR, Qubit

QM_NAME = "M"
QN_NAME = "N"


class SimError(Exception):
    """Simulator misuse or physical inconsistency."""


class RetryBudgetExceeded(SimError):
    """A session used more channel transmissions than the configured cap."""


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

NORM_TOL = 1e-9
MAX_QUBITS = 12


class QuantumState:
    """A statevector over a named qubit register (first name = leftmost bit).

    Operations mutate the register in place and return it, so they chain;
    the L2 norm is checked to 1e-9 after every operation.
    """

    def __init__(self, names: Sequence[str] = (), vec: Optional[np.ndarray] = None):
        self.names: list[str] = list(names)
        if vec is None:
            vec = np.zeros(2 ** len(self.names) or 1, dtype=complex)
            vec[0] = 1.0
        self.vec = np.asarray(vec, dtype=complex)
        self._check()

    # -- bookkeeping ----------------------------------------------------------

    def _check(self) -> None:
        if len(self.names) != len(set(self.names)):
            raise SimError("duplicate qubit names")
        if len(self.names) > MAX_QUBITS:
            raise SimError(f"register larger than {MAX_QUBITS} qubits")
        if self.vec.shape != (2 ** len(self.names),):
            raise SimError("statevector length does not match register")
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise SimError(f"statevector norm {self.norm()} drifted")

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SimError(f"no qubit named {name} in register") from None

    def add_qubit(self, name: str, amplitudes=(1.0, 0.0)) -> "QuantumState":
        if name in self.names:
            raise SimError(f"qubit {name} already allocated")
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (2,) or abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise SimError("new qubit needs a normalised 2-amplitude state")
        self.vec = np.kron(self.vec, amps)
        self.names.append(name)
        self._check()
        return self

    def remove_qubits(self, names: Sequence[str]) -> np.ndarray:
        """Factor the named qubits out of the register and return their joint
        state.  They must be unentangled with the rest of the register."""
        idx = [self.index(n) for n in names]
        n = len(self.names)
        rest = [i for i in range(n) if i not in idx]
        psi = self.vec.reshape((2,) * n).transpose(idx + rest)
        mat = psi.reshape(2 ** len(idx), -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        if len(s) > 1 and s[1] > 1e-6:
            raise SimError(f"qubits {names} are still entangled with the register")
        block = u[:, 0]
        self.vec = vh[0, :].astype(complex)
        self.names = [self.names[i] for i in rest]
        self._check()
        return block

    # -- gates ----------------------------------------------------------------

    def apply_1q(self, name: str, gate: np.ndarray) -> "QuantumState":
        n = len(self.names)
        i = self.index(name)
        psi = self.vec.reshape((2,) * n)
        psi = np.tensordot(np.asarray(gate, dtype=complex), psi, axes=([1], [i]))
        self.vec = np.moveaxis(psi, 0, i).reshape(-1)
        self._check()
        return self

    def apply_2q(self, name_a: str, name_b: str, gate: np.ndarray) -> "QuantumState":
        n = len(self.names)
        ia, ib = self.index(name_a), self.index(name_b)
        psi = self.vec.reshape((2,) * n)
        tensor = np.asarray(gate, dtype=complex).reshape(2, 2, 2, 2)
        psi = np.tensordot(tensor, psi, axes=([2, 3], [ia, ib]))
        self.vec = np.moveaxis(psi, [0, 1], [ia, ib]).reshape(-1)
        self._check()
        return self

    def measure(self, name: str, rng: np.random.Generator) -> int:
        """Projective Z measurement with Born probabilities; collapses."""
        n = len(self.names)
        i = self.index(name)
        psi = self.vec.reshape((2,) * n)
        weight_one = float(np.sum(np.abs(np.take(psi, 1, axis=i)) ** 2))
        outcome = 1 if rng.random() < weight_one else 0
        keep = np.take(psi, outcome, axis=i)
        norm = np.linalg.norm(keep)
        if norm == 0:
            raise SimError("measurement projected onto a zero branch")
        collapsed = np.zeros_like(psi)
        slicer = [slice(None)] * n
        slicer[i] = outcome
        collapsed[tuple(slicer)] = keep / norm
        self.vec = collapsed.reshape(-1)
        self._check()
        return outcome


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Overlap magnitude of two single-qubit states (phase insensitive)."""
    return float(abs(np.vdot(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))))


def random_qubit_states(count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        states.append(v / np.linalg.norm(v))
    return states


# ---------------------------------------------------------------------------
# protocol primitives
# ---------------------------------------------------------------------------

def make_epr(state: QuantumState, q1: str, q2: str) -> QuantumState:
    """Put two fresh |0> qubits into (|00> + |11>)/sqrt(2)."""
    return state.apply_1q(q1, _H).apply_2q(q1, q2, _CNOT)


def bell_measure(
    state: QuantumState, q1: str, q2: str, rng: np.random.Generator
) -> tuple[tuple[int, int], QuantumState]:
    """Measure two qubits in the Bell basis.

    Outcomes map the four Bell states (Phi+, Phi-, Psi+, Psi-) to
    (0,0), (1,0), (0,1), (1,1).
    """
    state.apply_2q(q1, q2, _CNOT).apply_1q(q1, _H)
    k = state.measure(q1, rng)
    l = state.measure(q2, rng)
    return (k, l), state


def pauli_correct(state: QuantumState, q: str, kl: tuple[int, int]) -> QuantumState:
    """Apply the conditional correction for a Bell outcome: X for the second
    bit, Z for the first (so (0,0) is the identity)."""
    k, l = kl
    if l:
        state.apply_1q(q, _X)
    if k:
        state.apply_1q(q, _Z)
    return state


def superdense_encode(state: QuantumState, q: str, kl: tuple[int, int]) -> QuantumState:
    """Write two classical bits onto one half of a shared Bell pair."""
    return pauli_correct(state, q, kl)


def superdense_decode(
    state: QuantumState, q1: str, q2: str, rng: np.random.Generator
) -> tuple[tuple[int, int], QuantumState]:
    """Recover the two encoded bits by a Bell measurement."""
    return bell_measure(state, q1, q2, rng)


# ---------------------------------------------------------------------------
# noisy channel
# ---------------------------------------------------------------------------

CHANNEL_MODELS = ("detectable-flag", "bit-flip", "phase-flip")


@dataclass
class NoisyChannel:
    """Detectably noisy channel: each transmission corrupts independently
    with probability ``p``.  Deterministic given the seed (PCG64)."""

    p: float
    seed: int = 0
    model: str = "detectable-flag"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise SimError("corruption probability must be in [0, 1]")
        if self.model not in CHANNEL_MODELS:
            raise SimError(f"unknown channel model {self.model!r}")
        self.rng = np.random.default_rng(np.random.PCG64(self.seed))


def transmit(
    channel: NoisyChannel, state: Optional[QuantumState] = None, qubit: Optional[str] = None
) -> bool:
    """One transmission; True means the receiver detects corruption.

    Pauli models physically disturb a carried register qubit and then undo
    the error (syndrome detection identifies it exactly); the protocol-level
    outcome is the detection flag either way.
    """
    corrupted = bool(channel.rng.random() < channel.p)
    if corrupted and qubit is not None and state is not None:
        if channel.model == "bit-flip":
            state.apply_1q(qubit, _X).apply_1q(qubit, _X)
        elif channel.model == "phase-flip":
            state.apply_1q(qubit, _Z).apply_1q(qubit, _Z)
    return corrupted


# ---------------------------------------------------------------------------
# protocol runner
# ---------------------------------------------------------------------------

@dataclass
class SessionStats:
    index: int
    bit: int
    datum: int
    channel_uses: int = 0
    corruptions: int = 0
    reannouncements: int = 0
    outcome: Optional[tuple[int, int]] = None


@dataclass
class RunTrace:
    """Abstract action labels emitted by a run, plus per-session statistics."""

    labels: list = field(default_factory=list)
    sessions: list = field(default_factory=list)
    max_live_qubits: int = 0

    def emit(self, label: ActionLabel) -> None:
        self.labels.append(label)

    def lines(self) -> list[str]:
        return [str(l) for l in self.labels]

    @property
    def total_corruptions(self) -> int:
        return sum(s.corruptions for s in self.sessions)

    @property
    def total_retransmissions(self) -> int:
        # a clean session uses the channel exactly 4 times
        return sum(max(s.channel_uses - 4, 0) for s in self.sessions)


def run_protocol(
    data: Sequence,
    channel: Optional[NoisyChannel] = None,
    seed: int = 0,
    *,
    delta_size: int = 1,
    retry_cap: int = 10_000,
    ack_after_delivery: bool = False,
) -> tuple[list[np.ndarray], RunTrace]:
    """Execute the protocol for the given data qubits.

    Returns the delivered single-qubit states (in order) and the run trace.
    ``delta_size`` fixes the data-domain size used for the abstract labels:
    item j is reported as datum ((j-1) mod delta_size) + 1.
    """
    if not data:
        raise SimError("need at least one data qubit")
    channel = channel or NoisyChannel(0.0)
    meas_rng = np.random.default_rng(np.random.PCG64(seed))
    trace = RunTrace()
    delivered: list[np.ndarray] = []
    state = QuantumState()

    for j, item in enumerate(data, start=1):
        bit = (j - 1) % 2
        datum = (j - 1) % delta_size + 1
        stats = SessionStats(index=j, bit=bit, datum=datum)
        trace.sessions.append(stats)
        delivered.append(
            _run_session(
                np.asarray(item, dtype=complex),
                bit,
                datum,
                state,
                channel,
                meas_rng,
                trace,
                stats,
                retry_cap,
                ack_after_delivery,
            )
        )
    return delivered, trace


def _use_channel(
    channel: NoisyChannel,
    stats: SessionStats,
    retry_cap: int,
    state: Optional[QuantumState] = None,
    qubit: Optional[str] = None,
) -> bool:
    stats.channel_uses += 1
    if stats.channel_uses > retry_cap:
        raise RetryBudgetExceeded(
            f"session {stats.index} exceeded {retry_cap} channel uses"
        )
    corrupted = transmit(channel, state, qubit)
    if corrupted:
        stats.corruptions += 1
    return corrupted


def _run_session(
    psi: np.ndarray,
    bit: int,
    datum: int,
    state: QuantumState,
    channel: NoisyChannel,
    meas_rng: np.random.Generator,
    trace: RunTrace,
    stats: SessionStats,
    retry_cap: int,
    ack_after_delivery: bool,
) -> np.ndarray:
    bit_value = Bit(bit)
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise SimError("input data qubit is not normalised")

    trace.emit(read_q(datum))
    state.add_qubit("q", psi)
    state.add_qubit("A").add_qubit("B")
    make_epr(state, "A", "B")
    trace.max_live_qubits = max(trace.max_live_qubits, len(state.names))

    kl: Optional[tuple[int, int]] = None

    def fresh_pair() -> None:
        trace.emit(gen_epr())
        if QM_NAME in state.names:
            state.remove_qubits([QM_NAME, QN_NAME])
        state.add_qubit(QM_NAME).add_qubit(QN_NAME)
        make_epr(state, QM_NAME, QN_NAME)
        trace.max_live_qubits = max(trace.max_live_qubits, len(state.names))

    def emit_d(ok: bool, payload) -> None:
        trace.emit(comm_d(payload if ok else ERR, merged=True))

    def encode_on_m() -> None:
        superdense_encode(state, QM_NAME, kl)
        trace.emit(correct_m(merged=True))

    # phases: "establish" (sender offers the session tag b), "send-m"
    # (receiver's travelling qubit goes out), "return-m" (encoded qubit goes
    # back), "resend-m" (fresh travelling qubit after a corrupted return),
    # then acknowledgement and delivery.
    phase = "establish"
    receiver_waiting_for_m = False
    while True:
        if phase == "establish":
            ok = not _use_channel(channel, stats, retry_cap)
            emit_d(ok, bit_value)
            if receiver_waiting_for_m:
                # any reception tells the receiver the travelling qubit was
                # lost: regenerate and resend
                receiver_waiting_for_m = False
                fresh_pair()
                phase = "send-m"
            elif ok:
                fresh_pair()
                phase = "send-m"
            else:
                # receiver bounces the error message back
                _use_channel(channel, stats, retry_cap)
                emit_d(False, bit_value)
        elif phase == "send-m":
            ok = not _use_channel(channel, stats, retry_cap, state, QM_NAME)
            emit_d(ok, Qubit(QM_NAME))
            if ok:
                if kl is None:
                    klv, _ = bell_measure(state, "q", "A", meas_rng)
                    kl = klv
                    stats.outcome = klv
                    state.remove_qubits(["q", "A"])
                else:
                    stats.reannouncements += 1
                trace.emit(measure_data(datum, merged=True))
                encode_on_m()
                phase = "return-m"
            else:
                receiver_waiting_for_m = True
                phase = "establish"
        elif phase == "return-m":
            ok = not _use_channel(channel, stats, retry_cap, state, QM_NAME)
            emit_d(ok, Qubit(QM_NAME))
            if ok:
                break
            fresh_pair()
            phase = "resend-m"
        elif phase == "resend-m":
            ok = not _use_channel(channel, stats, retry_cap, state, QM_NAME)
            emit_d(ok, Qubit(QM_NAME))
            if ok:
                encode_on_m()
                phase = "return-m"
            else:
                receiver_waiting_for_m = True
                phase = "establish"

    def deliver() -> np.ndarray:
        decoded, _ = superdense_decode(state, QM_NAME, QN_NAME, meas_rng)
        trace.emit(measure_pair())
        if decoded != kl:
            raise SimError(
                f"superdense decode returned {decoded}, expected {kl}"
            )
        pauli_correct(state, "B", decoded)
        trace.emit(correct_b())
        state.remove_qubits([QM_NAME, QN_NAME])
        out = state.remove_qubits(["B"])
        trace.emit(send_p(datum))
        return out

    def ack_leg() -> bool:
        ok = not _use_channel(channel, stats, retry_cap)
        emit_d(ok, bit_value)
        return ok

    if ack_after_delivery:
        out = deliver()
        acked = ack_leg()
    else:
        acked = ack_leg()
        out = deliver()

    # the sender keeps offering the session tag until she sees it echoed
    while not acked:
        leg1_ok = not _use_channel(channel, stats, retry_cap)
        emit_d(leg1_ok, bit_value)
        # the receiver (already in the next session) bounces the stale tag
        leg2_ok = not _use_channel(channel, stats, retry_cap)
        acked = leg1_ok and leg2_ok
        emit_d(acked, bit_value)

    fid = fidelity(out, psi)
    if abs(fid - 1.0) > 1e-6:
        raise SimError(f"delivered state fidelity {fid} for session {stats.index}")
    return out
