"""Built-in example proofs and terms used by the test suite and docs.

The proof graphs are the standard worked examples of this proof style:
a diverging self-cut loop (I), the unary successor (S), three-way
binary concatenation (C), the nested doubling loop with exponential
growth (E), unary predecessor (P), length-many-ones append (L), the
binary-to-unary converter (N) and the unsafe variant (EPRIME) whose
loop passes a boxed cut.

P is written with its loop on the left premise of a plain cut (the
boxed-cut variant of the same program is kept as P_UNSAFE): only the
former satisfies the safety criterion.  N computes 2^n - 1, which no
left-leaning proof can do, so it uses the nested loop; the boxed-cut
original is kept as N_UNSAFE.
"""

from __future__ import annotations

from .kernel import Node, ProofGraph, Rule, RuleKind, Sequent, SType
from .interp import (
    Cond,
    OracleCall,
    Pred,
    Proj,
    S0,
    S1,
    SNRec,
    SRecN,
    Term,
    TermDef,
    Zero,
)

N, B = SType.PLAIN, SType.BOXED


def _n(rule: RuleKind, boxed: int, plain: int, succ: SType, *premises: str, pos: int | None = None, oracle: str | None = None) -> Node:
    return Node(Rule(rule, pos=pos, oracle=oracle), Sequent(boxed, plain, succ), tuple(premises))


def proof_i() -> ProofGraph:
    """Self-cut loop; defined nowhere (diverges on every input)."""
    return ProofGraph(
        "I",
        "n0",
        {
            "n0": _n(RuleKind.CUT_B, 1, 0, N, "n1", "n5"),
            "n1": _n(RuleKind.BOX_R, 1, 0, B, "n2"),
            "n2": _n(RuleKind.BOX_L, 1, 0, N, "n3"),
            "n3": _n(RuleKind.S1, 0, 1, N, "n4"),
            "n4": _n(RuleKind.ID, 0, 1, N),
            # the fed-back value replaces the input: drop the old one
            "n5": _n(RuleKind.EXCH_B, 2, 0, N, "n6", pos=0),
            "n6": _n(RuleKind.WEAK_B, 2, 0, N, "n0"),
        },
    )


def proof_s() -> ProofGraph:
    """Unary successor x -> x+1 on one boxed input."""
    return ProofGraph(
        "S",
        "n0",
        {
            "n0": _n(RuleKind.COND_B, 1, 0, N, "n1", "n4", "n5"),
            # zero branch: s1 0
            "n1": _n(RuleKind.CUT_N, 0, 0, N, "n2", "n3"),
            "n2": _n(RuleKind.ZERO, 0, 0, N),
            "n3": _n(RuleKind.S1, 0, 1, N, "n8"),
            # s0 branch: s1 x
            "n4": _n(RuleKind.BOX_L, 1, 0, N, "n3"),
            # s1 branch: s0 (S x)
            "n5": _n(RuleKind.CUT_N, 1, 0, N, "n0", "n6"),
            "n6": _n(RuleKind.WEAK_B, 1, 1, N, "n7"),
            "n7": _n(RuleKind.S0, 0, 1, N, "n8"),
            "n8": _n(RuleKind.ID, 0, 1, N),
        },
    )


def proof_c() -> ProofGraph:
    """Concatenation of the binary digits: C(x,y;z) = z.y.x as strings."""
    return ProofGraph(
        "C",
        "c0",
        {
            "c0": _n(RuleKind.COND_B, 2, 1, N, "c1", "c5", "c6"),
            "c1": _n(RuleKind.COND_B, 1, 1, N, "c2", "c3", "c4"),
            "c2": _n(RuleKind.ID, 0, 1, N),
            "c3": _n(RuleKind.S0, 1, 1, N, "c1"),
            "c4": _n(RuleKind.S1, 1, 1, N, "c1"),
            "c5": _n(RuleKind.S0, 2, 1, N, "c0"),
            "c6": _n(RuleKind.S1, 2, 1, N, "c0"),
        },
    )


def proof_e() -> ProofGraph:
    """Nested doubling: E(x;y) = 2^(2^|x|) * y.  Safe but not left-leaning."""
    return ProofGraph(
        "E",
        "e0",
        {
            "e0": _n(RuleKind.COND_B, 1, 1, N, "e1", "e3", "e3"),
            "e1": _n(RuleKind.S0, 0, 1, N, "e2"),
            "e2": _n(RuleKind.ID, 0, 1, N),
            # E(s_i x; y) = E(x; E(x; y)): loop left for the inner call,
            # loop right (behind the exchange/weakening) for the outer one
            "e3": _n(RuleKind.CUT_N, 1, 1, N, "e0", "e4"),
            "e4": _n(RuleKind.EXCH_N, 1, 2, N, "e5", pos=0),
            "e5": _n(RuleKind.WEAK_N, 1, 2, N, "e0"),
        },
    )


def proof_p() -> ProofGraph:
    """Unary predecessor via a plain-cut loop (safe, left-leaning)."""
    return ProofGraph(
        "P",
        "p0",
        {
            "p0": _n(RuleKind.COND_B, 1, 0, N, "p1", "p2", "p5"),
            "p1": _n(RuleKind.ZERO, 0, 0, N),
            # P(s0 x) = s1 (P x)
            "p2": _n(RuleKind.CUT_N, 1, 0, N, "p0", "p3"),
            "p3": _n(RuleKind.WEAK_B, 1, 1, N, "p4"),
            "p4": _n(RuleKind.S1, 0, 1, N, "p7"),
            # P(s1 x) = s0 x
            "p5": _n(RuleKind.BOX_L, 1, 0, N, "p6"),
            "p6": _n(RuleKind.S0, 0, 1, N, "p7"),
            "p7": _n(RuleKind.ID, 0, 1, N),
        },
    )


def proof_p_unsafe() -> ProofGraph:
    """The boxed-cut rendering of the predecessor; its loop is unsafe."""
    return ProofGraph(
        "P_UNSAFE",
        "p0",
        {
            "p0": _n(RuleKind.COND_B, 1, 0, N, "p1", "p2", "p6"),
            "p1": _n(RuleKind.ZERO, 0, 0, N),
            "p2": _n(RuleKind.CUT_B, 1, 0, N, "p3", "p4a"),
            "p3": _n(RuleKind.BOX_R, 1, 0, B, "p0"),
            "p4a": _n(RuleKind.EXCH_B, 2, 0, N, "p4b", pos=0),
            "p4b": _n(RuleKind.WEAK_B, 2, 0, N, "p4"),
            "p4": _n(RuleKind.BOX_L, 1, 0, N, "p5"),
            "p5": _n(RuleKind.S1, 0, 1, N, "p8"),
            "p6": _n(RuleKind.BOX_L, 1, 0, N, "p7"),
            "p7": _n(RuleKind.S0, 0, 1, N, "p8"),
            "p8": _n(RuleKind.ID, 0, 1, N),
        },
    )


def proof_l() -> ProofGraph:
    """Appends |x| one-digits to y: L(x;y) = y*2^|x| + 2^|x| - 1."""
    return ProofGraph(
        "L",
        "l0",
        {
            "l0": _n(RuleKind.COND_B, 1, 1, N, "l1", "l2", "l2"),
            "l1": _n(RuleKind.ID, 0, 1, N),
            # L(s_i x; y) = s1 (L(x; y))
            "l2": _n(RuleKind.CUT_N, 1, 1, N, "l0", "l3"),
            "l3": _n(RuleKind.WEAK_B, 1, 2, N, "l4"),
            "l4": _n(RuleKind.EXCH_N, 0, 2, N, "l5", pos=0),
            "l5": _n(RuleKind.WEAK_N, 0, 2, N, "l6"),
            "l6": _n(RuleKind.S1, 0, 1, N, "l7"),
            "l7": _n(RuleKind.ID, 0, 1, N),
        },
    )


def proof_n() -> ProofGraph:
    """Binary to unary, N(n;) = 2^n - 1, via a nested doubling loop.

    u(0;y)=y, u(2n;y)=u(n;u(n;y)), u(2n+1;y)=s1 u(n;u(n;y)) appends
    exactly n ones; the root cuts in the seed 0.
    """
    return ProofGraph(
        "N",
        "m0",
        {
            "m0": _n(RuleKind.CUT_N, 1, 0, N, "m1", "u0"),
            "m1": _n(RuleKind.WEAK_B, 1, 0, N, "m2"),
            "m2": _n(RuleKind.ZERO, 0, 0, N),
            "u0": _n(RuleKind.COND_B, 1, 1, N, "u1", "u2", "u6"),
            "u1": _n(RuleKind.ID, 0, 1, N),
            "u2": _n(RuleKind.CUT_N, 1, 1, N, "u0", "u3"),
            "u3": _n(RuleKind.EXCH_N, 1, 2, N, "u4", pos=0),
            "u4": _n(RuleKind.WEAK_N, 1, 2, N, "u0"),
            "u6": _n(RuleKind.S1, 1, 1, N, "u2"),
        },
    )


def proof_n_unsafe() -> ProofGraph:
    """The boxed-cut rendering of binary-to-unary; every loop is unsafe.

    Implements N(s_i x) from L(N(x); N(x)) by cutting the recursive
    value into normal position, which safety forbids.
    """
    g: dict[str, Node] = {
        "m0": _n(RuleKind.COND_B, 1, 0, N, "m1", "m2", "m9"),
        "m1": _n(RuleKind.ZERO, 0, 0, N),
        "m2": _n(RuleKind.CUT_B, 1, 0, N, "m3", "m4"),
        "m3": _n(RuleKind.BOX_R, 1, 0, B, "m0"),
        # with normals (v, x): compute L(v; N(x))
        "m4": _n(RuleKind.CUT_N, 2, 0, N, "m5", "m6"),
        "m5": _n(RuleKind.WEAK_B, 2, 0, N, "m0"),
        "m6": _n(RuleKind.EXCH_B, 2, 1, N, "m7", pos=0),
        "m7": _n(RuleKind.WEAK_B, 2, 1, N, "Ll0"),
        "m9": _n(RuleKind.S1, 1, 0, N, "m2"),
    }
    for k, v in proof_l().nodes.items():
        g[f"L{k}"] = Node(v.rule, v.sequent, tuple(f"L{p}" for p in v.premises))
    return ProofGraph("N_UNSAFE", "m0", g)


def proof_eprime() -> ProofGraph:
    """Loop passing a boxed cut whose value grows exponentially each turn."""
    e_nodes = proof_e().nodes
    g: dict[str, Node] = {k: v for k, v in e_nodes.items()}
    g.update(
        {
            "q0": _n(RuleKind.COND_B, 2, 0, N, "q1", "q3", "q3"),
            "q1": _n(RuleKind.BOX_L, 1, 0, N, "q2"),
            "q2": _n(RuleKind.ID, 0, 1, N),
            "q3": _n(RuleKind.CUT_B, 2, 0, N, "q4", "q8"),
            # left: box up D(y) = E(y; 1)
            "q4": _n(RuleKind.WEAK_B, 2, 0, B, "q5"),
            "q5": _n(RuleKind.BOX_R, 1, 0, B, "q6"),
            "q6": _n(RuleKind.CUT_N, 1, 0, N, "q7", "e0"),
            "q7": _n(RuleKind.WEAK_B, 1, 0, N, "q7b"),
            "q7b": _n(RuleKind.S1, 0, 0, N, "q7c"),
            "q7c": _n(RuleKind.ZERO, 0, 0, N),
            # right: from (v, x, y) recurse on (x, v)
            "q8": _n(RuleKind.EXCH_B, 3, 0, N, "q9", pos=1),
            "q9": _n(RuleKind.EXCH_B, 3, 0, N, "q10", pos=0),
            "q10": _n(RuleKind.WEAK_B, 3, 0, N, "q11"),
            "q11": _n(RuleKind.EXCH_B, 2, 0, N, "q0", pos=0),
        }
    )
    return ProofGraph("EPRIME", "q0", g)


def standard_proofs() -> dict[str, ProofGraph]:
    return {
        g.name: g
        for g in (
            proof_i(),
            proof_s(),
            proof_c(),
            proof_e(),
            proof_p(),
            proof_l(),
            proof_n(),
            proof_eprime(),
        )
    }


# ---------------------------------------------------------------------------
# Term corpus


def _rec_s(*args: Term) -> Term:
    return OracleCall("rec", (), tuple(args))


def b_terms() -> list[TermDef]:
    """Closed terms of the base algebra (recursion on notation only)."""
    y0, y1 = Proj("s", 0), Proj("s", 1)
    return [
        TermDef("succ1", 0, 1, S1(y0)),
        TermDef("half", 0, 1, Pred(y0)),
        TermDef("select", 0, 2, Cond(y0, Zero(), S0(y1), S1(y1))),
        # f(x;y) = y with x's digits appended
        TermDef("append", 1, 1, SRecN(y0, S0(y1), S1(y1))),
        # f(x;y) = y with |x| ones appended
        TermDef("lenones", 1, 1, SRecN(y0, S1(y1), S1(y1))),
        # f(x;) = low bit of x
        TermDef("parity", 1, 0, SRecN(Zero(), Zero(), S1(Zero()))),
        # f(x;) = 2^|x| - 1
        TermDef("lenunary", 1, 0, SRecN(Zero(), S1(y0), S1(y0))),
    ]


def nb_terms() -> list[TermDef]:
    """Nested-recursion terms; ex is the exponential doubling function."""
    from .interp import CompSafe

    y0, y1 = Proj("s", 0), Proj("s", 1)
    # ex over an extra ignored safe slot, for composing after padones
    ex2 = SNRec(
        S0(y1),
        OracleCall("rec", (), (y0, OracleCall("rec", (), (y0, y1)))),
    )
    padp = SNRec(
        S1(y0),
        OracleCall("recp", (), (OracleCall("recp", (), (y0,)),)),
        "recp",
    )
    return [
        # twoloops(x;y) = 2^(2^|x|) * padones(x;y): two independent loops
        TermDef("twoloops", 1, 1, CompSafe(ex2, padp)),
        # ex(x;y) = 2^(2^|x|) * y
        TermDef("ex", 1, 1, SNRec(S0(y0), _rec_s(_rec_s(y0)))),
        # padones(x;y) = y with 2^|x| ones appended
        TermDef("padones", 1, 1, SNRec(S1(y0), _rec_s(_rec_s(y0)))),
        # exquad(x;y) = 4^(2^|x|) * y
        TermDef("exquad", 1, 1, SNRec(S0(S0(y0)), _rec_s(_rec_s(y0)))),
        # composition during recursion, unnested: stays in the shallow class
        TermDef("cdr", 1, 1, SNRec(y0, S0(_rec_s(S1(y0))))),
    ]


def term_corpus() -> dict[str, TermDef]:
    return {t.name: t for t in b_terms() + nb_terms()}
