"""Compiling function-algebra terms into proof graphs.

Terms of the base algebra become finite derivations whose recursions
use the explicit recursion rule; eliminating that rule yields circular
proofs whose loops stay on the left of plain cuts.  Nested-recursion
terms compile directly to circular proofs by closing each recursion
through the parameter-passing transformation.
"""

from __future__ import annotations

from typing import Optional

from .kernel import Node, ProofGraph, Rule, RuleKind, Sequent, SType
from .interp import (
    Zero,
    CompNormal,
    CompSafe,
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
    check_term_class,
)
from .transform import ShapeViolation, pass_parameters


class CompileError(Exception):
    pass


N, B = SType.PLAIN, SType.BOXED


class _Graph:
    """Accumulates nodes with structure sharing by construction key."""

    def __init__(self, name: str) -> None:
        self.name = name
        self.nodes: dict[str, Node] = {}
        self.by_key: dict[object, str] = {}
        self.counter = 0

    def add(self, rule: Rule, seq: Sequent, premises: tuple[str, ...], hint: str = "n") -> str:
        key = (rule, seq, premises)
        if key in self.by_key:
            return self.by_key[key]
        nid = f"{hint}{self.counter}"
        self.counter += 1
        self.nodes[nid] = Node(rule, seq, premises)
        self.by_key[key] = nid
        return nid

    def reserve(self, rule_kind: RuleKind, seq: Sequent, hint: str = "n") -> str:
        """Placeholder for a node whose premises close a cycle later."""
        nid = f"{hint}{self.counter}"
        self.counter += 1
        self.nodes[nid] = Node(Rule(rule_kind), seq, ())
        return nid

    def fill(self, nid: str, rule: Rule, premises: tuple[str, ...]) -> None:
        self.nodes[nid] = Node(rule, self.nodes[nid].sequent, premises)

    def graph(self, root: str) -> ProofGraph:
        g = ProofGraph(self.name, root, dict(self.nodes))
        keep = set(g.reachable())
        g.nodes = {k: v for k, v in g.nodes.items() if k in keep}
        return g


def _exchange_up(g: _Graph, kind: RuleKind, seq: Sequent, positions: list[int], inner: str) -> str:
    """Exchange steps, conclusion-to-premise order, bottom id returned."""
    cur = inner
    for p in reversed(positions):
        cur = g.add(Rule(kind, pos=p), seq, (cur,))
    return cur


def _weaken_to(g: _Graph, inner: str, inner_seq: Sequent, m: int, n: int) -> str:
    """Pad a closed sub-proof with unused inputs up to (m; n)."""
    cur, b, p = inner, inner_seq.boxed, inner_seq.plain
    succ = inner_seq.succedent
    while p < n:
        p += 1
        cur = g.add(Rule(RuleKind.WEAK_N), Sequent(b, p, succ), (cur,))
    while b < m:
        b += 1
        cur = g.add(Rule(RuleKind.WEAK_B), Sequent(b, p, succ), (cur,))
    return cur


def _proj_safe(g: _Graph, m: int, n: int, j: int) -> str:
    """Derivation of (m; n) => N returning safe input j."""
    cur = g.add(Rule(RuleKind.ID), Sequent(0, 1), ())
    for i in range(1, n):
        cur = g.add(Rule(RuleKind.WEAK_N), Sequent(0, i + 1), (cur,))
    # the used safe sits at position 0; move it to position j
    cur = _exchange_up(g, RuleKind.EXCH_N, Sequent(0, n), list(range(j - 1, -1, -1)), cur)
    for i in range(m):
        cur = g.add(Rule(RuleKind.WEAK_B), Sequent(i + 1, n), (cur,))
    return cur


def _proj_normal(g: _Graph, m: int, n: int, j: int) -> str:
    """Derivation of (m; n) => N returning normal input j."""
    cur = g.add(Rule(RuleKind.ID), Sequent(0, 1), ())
    # append the ambient safes behind the used one, then rotate it last
    for i in range(n):
        cur = g.add(Rule(RuleKind.WEAK_N), Sequent(0, 2 + i), (cur,))
    cur = _exchange_up(g, RuleKind.EXCH_N, Sequent(0, n + 1), list(range(n - 1, -1, -1)), cur)
    cur = g.add(Rule(RuleKind.BOX_L), Sequent(1, n), (cur,))
    for i in range(m - 1):
        cur = g.add(Rule(RuleKind.WEAK_B), Sequent(i + 2, n), (cur,))
    # the used normal is at the last position; move it down to j
    cur = _exchange_up(g, RuleKind.EXCH_B, Sequent(m, n), list(range(j, m - 1)), cur)
    return cur


def _compile(g: _Graph, term: Term, m: int, n: int, oracle_sigs: dict[str, tuple[int, int]]) -> str:
    """Sub-derivation of (m; n) => N computing the term's value."""
    seq = Sequent(m, n)
    if isinstance(term, Proj):
        if term.sort == "s":
            if not 0 <= term.index < n:
                raise CompileError(f"safe projection {term.index} out of range")
            return _proj_safe(g, m, n, term.index)
        if not 0 <= term.index < m:
            raise CompileError(f"normal projection {term.index} out of range")
        return _proj_normal(g, m, n, term.index)
    if isinstance(term, Zero):
        z = g.add(Rule(RuleKind.ZERO), Sequent(0, 0), ())
        return _weaken_to(g, z, Sequent(0, 0), m, n)
    if isinstance(term, (S0, S1)):
        inner = _compile(g, term.t, m, n, oracle_sigs)
        kind = RuleKind.S0 if isinstance(term, S0) else RuleKind.S1
        return g.add(Rule(kind), seq, (inner,))
    if isinstance(term, Pred):
        if isinstance(term.t, Proj) and term.t.sort == "s" and term.t.index == n - 1:
            zero = _weaken_to(g, g.add(Rule(RuleKind.ZERO), Sequent(0, 0), ()), Sequent(0, 0), m, n - 1)
            keep = _proj_safe(g, m, n, n - 1)
            return g.add(Rule(RuleKind.COND_N), seq, (zero, keep, keep))
        value = _compile(g, term.t, m, n, oracle_sigs)
        # p over the cut value: conditional on the last safe input
        zero = _weaken_to(g, g.add(Rule(RuleKind.ZERO), Sequent(0, 0), ()), Sequent(0, 0), m, n)
        keep = _proj_safe(g, m, n + 1, n)
        body = g.add(Rule(RuleKind.COND_N), Sequent(m, n + 1), (zero, keep, keep))
        return g.add(Rule(RuleKind.CUT_N), seq, (value, body))
    if isinstance(term, Cond):
        w = _compile(g, term.w, m, n, oracle_sigs)
        x = _compile(g, term.x, m, n, oracle_sigs)
        y = _compile(g, term.y, m, n, oracle_sigs)
        z = _compile(g, term.z, m, n, oracle_sigs)
        # branches ignore the conditional's replaced scrutinee slot
        body = g.add(
            Rule(RuleKind.COND_N),
            Sequent(m, n + 1),
            (
                x,
                g.add(Rule(RuleKind.WEAK_N), Sequent(m, n + 1), (y,)),
                g.add(Rule(RuleKind.WEAK_N), Sequent(m, n + 1), (z,)),
            ),
        )
        return g.add(Rule(RuleKind.CUT_N), seq, (w, body))
    if isinstance(term, CompSafe):
        value = _compile(g, term.g, m, n, oracle_sigs)
        body = _compile(g, term.h, m, n + 1, oracle_sigs)
        return g.add(Rule(RuleKind.CUT_N), seq, (value, body))
    if isinstance(term, CompNormal):
        inner = _compile(g, term.g, m, 0, oracle_sigs)
        boxed = g.add(Rule(RuleKind.BOX_R), Sequent(m, 0, B), (inner,))
        for i in range(n):
            boxed = g.add(Rule(RuleKind.WEAK_N), Sequent(m, i + 1, B), (boxed,))
        body = _compile(g, term.h, m + 1, n, oracle_sigs)
        # the cut hands the value over in front; the body wants it last
        body = _exchange_up(g, RuleKind.EXCH_B, Sequent(m + 1, n), list(range(m)), body)
        return g.add(Rule(RuleKind.CUT_B), seq, (boxed, body))
    if isinstance(term, SRecN):
        if m < 1:
            raise CompileError("recursion needs a normal input in front")
        base = _compile(g, term.g, m - 1, n, oracle_sigs)
        h0 = _compile(g, term.h0, m, n + 1, oracle_sigs)
        h1 = _compile(g, term.h1, m, n + 1, oracle_sigs)
        return g.add(Rule(RuleKind.SREC), seq, (base, h0, h1))
    if isinstance(term, SNRec):
        return _compile_snrec(g, term, m, n, oracle_sigs)
    if isinstance(term, OracleCall):
        return _compile_oracle_call(g, term, m, n, oracle_sigs)
    raise CompileError(f"cannot compile {type(term).__name__}")


def _compile_oracle_call(g: _Graph, term: OracleCall, m: int, n: int, oracle_sigs: dict[str, tuple[int, int]]) -> str:
    """Oracle leaf with computed safe arguments and a plain context.

    Arguments are cut in one by one; the ambient inputs are weakened
    away just below the leaf (boxed ones first, so every boxed thread
    ends at a weakening on the path to the leaf).
    """
    if term.name not in oracle_sigs:
        raise CompileError(f"oracle {term.name!r} has no declared arity")
    om, on = oracle_sigs[term.name]
    if om != 0:
        raise CompileError("oracle leaves take safe arguments only")
    if len(term.normal_args) != 0 or len(term.safe_args) != on:
        raise CompileError(f"oracle {term.name!r} arity mismatch")
    leaf = g.add(Rule(RuleKind.ORACLE, oracle=term.name), Sequent(0, on), ())
    # discard the ambient safes: rotate each original safe to the end and weaken
    cur = leaf
    for i in range(n):
        wide = Sequent(0, on + i + 1)
        cur = g.add(Rule(RuleKind.WEAK_N), wide, (cur,))
        cur = _exchange_up(g, RuleKind.EXCH_N, wide, list(range(on + i)), cur)
    for i in range(m):
        cur = g.add(Rule(RuleKind.WEAK_B), Sequent(i + 1, n + on), (cur,))
    # now cut in the argument values, innermost last
    for j in range(on - 1, -1, -1):
        value = _compile(g, term.safe_args[j], m, n + j, {k: v for k, v in oracle_sigs.items()})
        cur = g.add(Rule(RuleKind.CUT_N), Sequent(m, n + j), (value, cur))
    return cur


def _compile_snrec(g: _Graph, term: SNRec, m: int, n: int, oracle_sigs: dict[str, tuple[int, int]]) -> str:
    """Close a nested recursion through parameter passing and a backedge."""
    if m < 1:
        raise CompileError("recursion needs a normal input in front")
    _reject_frozen_oracle_under_loop(term.h, term.rec_name)
    sigs = dict(oracle_sigs)
    sigs[term.rec_name] = (0, n)
    # compile the step over the recursion oracle in its own graph
    sub = _Graph(g.name + "_h")
    h_root = _compile(sub, term.h, m, n, sigs)
    h_graph = sub.graph(h_root)
    starred, star = pass_parameters(h_graph, term.rec_name)
    # import the transformed step proof under fresh ids
    prefix = f"s{g.counter}_"
    g.counter += 1
    for nid, node in starred.nodes.items():
        g.nodes[prefix + nid] = Node(
            node.rule, node.sequent, tuple(prefix + p for p in node.premises)
        )
    base = _compile(g, term.g, m - 1, n, oracle_sigs)
    loop = g.reserve(RuleKind.COND_B, Sequent(m, n), hint="loop")
    # the widened oracle leaves become backedges to the loop head
    for nid, node in list(g.nodes.items()):
        if nid.startswith(prefix) and node.rule.kind is RuleKind.ORACLE and node.rule.oracle == star:
            if node.sequent != Sequent(m, n):
                raise CompileError(f"widened oracle leaf has sequent {node.sequent}")
            _redirect(g, nid, loop)
    g.fill(loop, Rule(RuleKind.COND_B), (base, prefix + starred.root, prefix + starred.root))
    return loop


def _reject_frozen_oracle_under_loop(h: Term, name: str) -> None:
    """Refuse recursive calls captured under a further recursion.

    Closing such a call with a backedge would re-read the loop's
    decremented parameter instead of the frozen one, so the loop gadget
    cannot realise the closure semantics without contraction.
    """

    def scan(t: Term, under: bool) -> None:
        if isinstance(t, OracleCall) and t.name == name and under:
            raise CompileError(
                f"recursive call {name!r} occurs under an inner recursion; "
                "the backedge construction cannot freeze its parameters"
            )
        inner = under or isinstance(t, (SRecN, SNRec))
        for f in getattr(t, "__dataclass_fields__", {}):
            v = getattr(t, f)
            if isinstance(v, Term):
                scan(v, inner)
            elif isinstance(v, tuple):
                for x in v:
                    if isinstance(x, Term):
                        scan(x, inner)

    scan(h, False)


def _redirect(g: _Graph, old: str, new: str) -> None:
    """Point every premise reference at ``old`` to ``new`` and drop it."""
    del g.nodes[old]
    for nid, node in list(g.nodes.items()):
        if old in node.premises:
            g.nodes[nid] = Node(
                node.rule, node.sequent, tuple(new if p == old else p for p in node.premises)
            )


def term_to_derivation(td: TermDef, oracle_sigs: Optional[dict[str, tuple[int, int]]] = None) -> ProofGraph:
    """Finite derivation (recursion rule allowed) computing the term."""
    violations = check_term_class(td.body, "B")
    if violations:
        raise CompileError(f"{td.name} is not in the base algebra: {violations[0]}")
    g = _Graph(td.name + "_deriv")
    root = _compile(g, td.body, td.normals, td.safes, oracle_sigs or {})
    out = g.graph(root)
    return out


def srec_eliminate(graph: ProofGraph) -> ProofGraph:
    """Replace each recursion-rule node by the backedge loop gadget.

    The conditional's recursive branches share the loop edge on the
    left of a plain cut whose right side is the original step proof, so
    the output is safe, progressing and left-leaning.
    """
    out = ProofGraph(graph.name.replace("_deriv", "") + "_circ", graph.root, dict(graph.nodes))
    counter = 0
    for nid in list(out.reachable()):
        node = out.nodes[nid]
        if node.rule.kind is not RuleKind.SREC:
            continue
        base, h0, h1 = node.premises
        seq = node.sequent
        k1 = f"{nid}_k{counter}"
        counter += 1
        if h0 == h1:
            out.nodes[k1] = Node(Rule(RuleKind.CUT_N), seq, (nid, h0))
            branches = (base, k1, k1)
        else:
            k2 = f"{nid}_k{counter}"
            counter += 1
            out.nodes[k1] = Node(Rule(RuleKind.CUT_N), seq, (nid, h0))
            out.nodes[k2] = Node(Rule(RuleKind.CUT_N), seq, (nid, h1))
            branches = (base, k1, k2)
        out.nodes[nid] = Node(Rule(RuleKind.COND_B), seq, branches)
    keep = set(out.reachable())
    out.nodes = {k: v for k, v in out.nodes.items() if k in keep}
    return out


def nb_to_circular(td: TermDef, oracle_sigs: Optional[dict[str, tuple[int, int]]] = None) -> ProofGraph:
    """Circular proof for a nested-recursion term.

    Plain recursion nodes are eliminated afterwards; nested recursions
    close their loops during compilation.  The construction keeps every
    path from the conclusion to an oracle leaf free of boxed cuts, so
    parameter passing stays applicable at each stage.
    """
    violations = check_term_class(td.body, "NB")
    if violations:
        raise CompileError(f"{td.name} is not in the nested algebra: {violations[0]}")
    g = _Graph(td.name + "_nb")
    root = _compile(g, td.body, td.normals, td.safes, oracle_sigs or {})
    out = g.graph(root)
    out = srec_eliminate(out)
    out.name = td.name + "_circ"
    _assert_no_boxed_cut_to_oracles(out)
    return out


def _assert_no_boxed_cut_to_oracles(graph: ProofGraph) -> None:
    reach = graph.reachable()
    radj: dict[str, list[str]] = {x: [] for x in reach}
    for x in reach:
        for p in graph.nodes[x].premises:
            radj[p].append(x)
    frontier = [x for x in reach if graph.nodes[x].rule.kind is RuleKind.ORACLE]
    seen = set(frontier)
    while frontier:
        x = frontier.pop()
        for q in radj[x]:
            if q not in seen:
                seen.add(q)
                frontier.append(q)
    for x in sorted(seen):
        if graph.nodes[x].rule.kind is RuleKind.CUT_B:
            raise ShapeViolation(f"boxed cut at {x} on a path to an oracle leaf")
