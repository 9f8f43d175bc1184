"""Process-calculus verification toolkit with shadow constants and an
entanglement merge, plus a desk-scale statevector simulator for the bundled
alternating-qubit transfer protocol."""

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
    Deadlock,
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
    SKIP,
    Tau,
    TAU,
    Term,
    TermError,
    Var,
    alt,
    check_guarded,
    match_label,
    normalize,
    par,
    prefix,
    seq,
    shadow_of,
    term_str,
)
from .semantics import (
    BudgetExceededError,
    DEFAULT_BUDGET,
    LinearSpec,
    Lts,
    UnguardedError,
    aut_roundtrip_ok,
    explore,
    linearize,
    read_aut,
    step,
)
from .equivalence import (
    Partition,
    accepts_trace,
    branching_bisim,
    branching_partition,
    cfar_collapse,
    distinguishing_trace,
    minimize,
    quotient,
    strong_bisim,
    strong_partition,
)
from .speclang import SpecDocument, SpecError, bundled_text, load, parse, pretty
from .qaqp import QaqpConfig, VerificationReport, verify

__all__ = [name for name in dir() if not name.startswith("_")]
