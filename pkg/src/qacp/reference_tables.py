"""Hand-derived equation tables bundled with the protocol model.

These are the published manual expansion of the encapsulated system at data
domain size 1: two blocks of derived equations (one per session bit) and the
linear specification with variables X1..X20 and Y1..Y20.  They serve as a
regression reference for the mechanical derivation; where the two disagree
the mechanical result is authoritative and the difference is reported.

State references are ``(stage-token, session-bit)`` pairs, e.g. ``("S1", 0)``
for the sender's stage 1 in a session tagged 0 and ``("R", 1)`` for the
receiver's entry state of a session tagged 1.  Unannotated stage names in
the original source are resolved with the surrounding block's session bit;
explicitly flipped entry states are resolved as written.  ``send_P[B]``
names the carrier qubit; it is compared as emitting the session datum.
"""
from __future__ import annotations


def _s(stage: int, b: int) -> tuple:
    return (f"S{stage}" if stage else "S", b)


def _r(stage: int, b: int) -> tuple:
    return (f"R{stage}" if stage else "R", b)


# block derived from the session-0 entry
HAND_BLOCK_0 = [
    ((_s(0, 0), _r(0, 0)), [("read_Q[q1]", (_s(1, 0), _r(0, 0)))]),
    ((_s(1, 0), _r(0, 0)), [("C_D[0]", (_s(2, 0), _r(2, 0))),
                            ("C_D[err]", (_s(2, 0), _r(1, 0)))]),
    ((_s(2, 0), _r(1, 0)), [("C_D[err]", (_s(1, 0), _r(0, 0)))]),
    ((_s(2, 0), _r(2, 0)), [("GEN[M,N]", (_s(2, 0), _r(3, 0)))]),
    ((_s(2, 0), _r(3, 0)), [("C_D[M]", (_s(3, 0), _r(4, 0))),
                            ("C_D[err]", (_s(1, 0), _r(4, 0)))]),
    ((_s(1, 0), _r(4, 0)), [("C_D[0]", (_s(2, 0), _r(2, 0))),
                            ("C_D[err]", (_s(2, 0), _r(2, 0)))]),
    ((_s(3, 0), _r(4, 0)), [("Me[A,q1,kl]", (_s(4, 0), _r(5, 0)))]),
    ((_s(4, 0), _r(5, 0)), [("sigma[kl,M]", (_s(5, 0), _r(6, 0)))]),
    ((_s(5, 0), _r(6, 0)), [("C_D[M]", (_s(6, 0), _r(7, 0))),
                            ("C_D[err]", (_s(6, 0), _r(2, 0)))]),
    ((_s(6, 0), _r(2, 0)), [("GEN[M,N]", (_s(6, 0), _r(3, 0)))]),
    ((_s(6, 0), _r(3, 0)), [("C_D[M]", (_s(4, 0), _r(4, 0))),
                            ("C_D[err]", (_s(1, 0), _r(4, 0)))]),
    ((_s(4, 0), _r(4, 0)), [("sigma[kl,M]", (_s(5, 0), _r(6, 0)))]),
    ((_s(6, 0), _r(7, 0)), [("C_D[0]", (_s(0, 1), _r(8, 0))),
                            ("C_D[err]", (_s(1, 0), _r(8, 0)))]),
    ((_s(1, 0), _r(8, 0)), [("Me[M,N,kl]", (_s(1, 0), _r(9, 0)))]),
    ((_s(1, 0), _r(9, 0)), [("sigma[kl,B]", (_s(1, 0), _r(10, 0)))]),
    ((_s(1, 0), _r(10, 0)), [("send_P[B]", (_s(1, 0), _r(0, 1)))]),
    ((_s(1, 0), _r(0, 1)), [("C_D[0]", (_s(2, 0), _r(1, 0))),
                            ("C_D[err]", (_s(2, 0), _r(1, 0)))]),
    ((_s(0, 1), _r(8, 0)), [("Me[M,N,kl]", (_s(0, 1), _r(9, 0)))]),
    ((_s(0, 1), _r(9, 0)), [("sigma[kl,B]", (_s(0, 1), _r(10, 0)))]),
    ((_s(0, 1), _r(10, 0)), [("send_P[B]", (_s(0, 1), _r(0, 1)))]),
]

# block derived from the session-1 entry
HAND_BLOCK_1 = [
    ((_s(0, 1), _r(0, 1)), [("read_Q[q1]", (_s(1, 1), _r(0, 1)))]),
    ((_s(1, 1), _r(0, 1)), [("C_D[1]", (_s(2, 1), _r(2, 1))),
                            ("C_D[err]", (_s(2, 1), _r(1, 1)))]),
    ((_s(2, 1), _r(1, 1)), [("C_D[err]", (_s(1, 1), _r(0, 1)))]),
    ((_s(2, 1), _r(2, 1)), [("GEN[M,N]", (_s(2, 1), _r(3, 1)))]),
    ((_s(2, 1), _r(3, 1)), [("C_D[M]", (_s(3, 1), _r(4, 1))),
                            ("C_D[err]", (_s(1, 1), _r(4, 1)))]),
    ((_s(1, 1), _r(4, 1)), [("C_D[1]", (_s(2, 1), _r(2, 1))),
                            ("C_D[err]", (_s(2, 1), _r(2, 1)))]),
    ((_s(3, 1), _r(4, 1)), [("Me[A,q1,kl]", (_s(4, 1), _r(5, 1)))]),
    ((_s(4, 1), _r(5, 1)), [("sigma[kl,M]", (_s(5, 1), _r(6, 1)))]),
    ((_s(5, 1), _r(6, 1)), [("C_D[M]", (_s(6, 1), _r(7, 1))),
                            ("C_D[err]", (_s(6, 1), _r(2, 1)))]),
    ((_s(6, 1), _r(2, 1)), [("GEN[M,N]", (_s(6, 1), _r(3, 1)))]),
    ((_s(6, 1), _r(3, 1)), [("C_D[M]", (_s(4, 1), _r(4, 1))),
                            ("C_D[err]", (_s(1, 1), _r(4, 1)))]),
    ((_s(4, 1), _r(4, 1)), [("sigma[kl,M]", (_s(5, 1), _r(6, 1)))]),
    ((_s(6, 1), _r(7, 1)), [("C_D[1]", (_s(0, 0), _r(8, 1))),
                            ("C_D[err]", (_s(1, 1), _r(8, 1)))]),
    ((_s(1, 1), _r(8, 1)), [("Me[M,N,kl]", (_s(1, 1), _r(9, 1)))]),
    ((_s(1, 1), _r(9, 1)), [("sigma[kl,B]", (_s(1, 1), _r(10, 1)))]),
    ((_s(1, 1), _r(10, 1)), [("send_P[B]", (_s(1, 1), _r(0, 1)))]),
    ((_s(1, 1), _r(0, 0)), [("C_D[1]", (_s(2, 1), _r(1, 1))),
                            ("C_D[err]", (_s(2, 1), _r(1, 1)))]),
    ((_s(0, 0), _r(8, 1)), [("Me[M,N,kl]", (_s(0, 0), _r(9, 1)))]),
    ((_s(0, 0), _r(9, 1)), [("sigma[kl,B]", (_s(0, 0), _r(10, 1)))]),
    ((_s(0, 0), _r(10, 1)), [("send_P[B]", (_s(0, 0), _r(0, 0)))]),
]

# the linear specification at data domain size 1
LINEAR_ENTRY = "X1"

HAND_LINEAR = {
    "X1": [("read_Q[q1]", "X2")],
    "X2": [("C_D[0]", "X3"), ("C_D[err]", "X4")],
    "X3": [("GEN[M,N]", "X5")],
    "X4": [("C_D[err]", "X2")],
    "X5": [("C_D[M]", "X6"), ("C_D[err]", "X7")],
    "X6": [("Me[A,q1,kl]", "X8")],
    "X7": [("C_D[0]", "X3"), ("C_D[err]", "X3")],
    "X8": [("sigma[kl,M]", "X9")],
    "X9": [("C_D[M]", "X10"), ("C_D[err]", "X11")],
    "X10": [("C_D[0]", "X14"), ("C_D[err]", "X15")],
    "X11": [("GEN[M,N]", "X12")],
    "X12": [("C_D[M]", "X13"), ("C_D[err]", "X7")],
    "X13": [("sigma[kl,M]", "X9")],
    "X14": [("Me[M,N,kl]", "X19")],
    "X15": [("Me[M,N,kl]", "X16")],
    "X16": [("sigma[kl,B]", "X17")],
    "X17": [("send_P[B]", "X18")],
    "X18": [("C_D[0]", "X4"), ("C_D[err]", "X4")],
    "X19": [("sigma[kl,B]", "X20")],
    "X20": [("send_P[B]", "Y1")],
    "Y1": [("read_Q[q1]", "Y2")],
    "Y2": [("C_D[1]", "Y3"), ("C_D[err]", "Y4")],
    "Y3": [("GEN[M,N]", "Y5")],
    "Y4": [("C_D[err]", "Y2")],
    "Y5": [("C_D[M]", "Y6"), ("C_D[err]", "Y7")],
    "Y6": [("Me[A,q1,kl]", "Y8")],
    "Y7": [("C_D[1]", "Y3"), ("C_D[err]", "Y3")],
    "Y8": [("sigma[kl,M]", "Y9")],
    "Y9": [("C_D[M]", "Y10"), ("C_D[err]", "Y11")],
    "Y10": [("C_D[1]", "Y14"), ("C_D[err]", "Y15")],
    "Y11": [("GEN[M,N]", "Y12")],
    "Y12": [("C_D[M]", "Y13"), ("C_D[err]", "Y7")],
    "Y13": [("sigma[kl,M]", "Y9")],
    "Y14": [("Me[M,N,kl]", "Y19")],
    "Y15": [("Me[M,N,kl]", "Y16")],
    "Y16": [("sigma[kl,B]", "Y17")],
    "Y17": [("send_P[B]", "Y18")],
    "Y18": [("C_D[1]", "Y4"), ("C_D[err]", "Y4")],
    "Y19": [("sigma[kl,B]", "Y20")],
    "Y20": [("send_P[B]", "X1")],
}
