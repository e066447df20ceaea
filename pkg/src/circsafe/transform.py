"""Structural transformations on proof graphs.

Includes the canonical tree-with-backpointers presentation (cycle
normal form), promotion of all inputs to the boxed sort, removal of
safe inputs under a boxed succedent, threading of boxed parameters
into oracle leaves, and the reduction of simultaneous recursion to a
single function via rotation tags.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Optional

from .kernel import (
    Node,
    ProofGraph,
    Rule,
    RuleKind,
    Sequent,
    SType,
    validate_graph,
)
from .interp import (
    REC,
    Call,
    OracleCall,
    OracleEnv,
    PPFunction,
    PPProgram,
    Proj,
    S0,
    S1,
    SimRecPP,
    SNRecPP,
    SRecPP,
    TagDispatch,
    Term,
    Zero,
    eval_term,
)


class TransformError(Exception):
    pass


class ShapeViolation(TransformError):
    pass


class NotProgressing(TransformError):
    pass


Pos = tuple[int, ...]


# ---------------------------------------------------------------------------
# Bisimulation minimization and cycle normal form


def bisimulation_classes(graph: ProofGraph) -> dict[str, int]:
    """Partition refinement on (rule, sequent) labels then premise blocks."""
    order = sorted(graph.reachable())
    mapping: dict[str, int] = {}
    blocks: dict[object, int] = {}
    for n in order:
        node = graph.nodes[n]
        key = (node.rule, node.sequent)
        if key not in blocks:
            blocks[key] = len(blocks)
        mapping[n] = blocks[key]
    while True:
        sig_blocks: dict[object, int] = {}
        new: dict[str, int] = {}
        for n in order:
            sig = (mapping[n], tuple(mapping[p] for p in graph.nodes[n].premises))
            if sig not in sig_blocks:
                sig_blocks[sig] = len(sig_blocks)
            new[n] = sig_blocks[sig]
        if new == mapping:
            return mapping
        mapping = new


@dataclass(frozen=True)
class CnfNode:
    rule: Rule
    sequent: Sequent
    children: tuple[Pos, ...]


@dataclass
class CycleNF:
    """Finite unfolding tree with bud-to-companion backpointers."""

    name: str
    tree: dict[Pos, CnfNode] = field(default_factory=dict)
    buds: dict[Pos, Pos] = field(default_factory=dict)  # bud -> companion
    node_of: dict[Pos, str] = field(default_factory=dict)  # source graph node

    @property
    def companions(self) -> dict[Pos, tuple[Pos, ...]]:
        out: dict[Pos, list[Pos]] = {}
        for b, c in sorted(self.buds.items()):
            out.setdefault(c, []).append(b)
        return {c: tuple(bs) for c, bs in sorted(out.items())}

    def sequent_at(self, pos: Pos) -> Sequent:
        if pos in self.tree:
            return self.tree[pos].sequent
        return self.tree[self.buds[pos]].sequent

    @staticmethod
    def position_id(pos: Pos) -> str:
        return "t" + "".join(str(i) for i in pos)


def cycle_normal_form(graph: ProofGraph) -> CycleNF:
    """Unfold the bisimulation-minimized graph, cutting at repetitions.

    Depth-first, leftmost premise first; a node whose minimized class
    already occurs on the current root path becomes a bud pointing at
    that earlier occurrence.  The result is canonical for the graph.
    """
    errors = validate_graph(graph, allow_srec=True, allow_oracle=True)
    if errors:
        raise TransformError(f"invalid input graph: {errors[0]}")
    classes = bisimulation_classes(graph)
    cnf = CycleNF(graph.name)

    def unfold(nid: str, pos: Pos, on_path: dict[int, Pos]) -> None:
        cls = classes[nid]
        cnf.node_of[pos] = nid
        if cls in on_path:
            cnf.buds[pos] = on_path[cls]
            return
        node = graph.nodes[nid]
        children = tuple(pos + (i,) for i in range(len(node.premises)))
        cnf.tree[pos] = CnfNode(node.rule, node.sequent, children)
        sub = dict(on_path)
        sub[cls] = pos
        for i, p in enumerate(node.premises):
            unfold(p, pos + (i,), sub)

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        unfold(graph.root, (), {})
    finally:
        sys.setrecursionlimit(old)
    return cnf


def close_open_sets(cnf: CycleNF, pos: Pos) -> tuple[list[Pos], list[Pos]]:
    """Companions at-or-above ``pos`` of buds above it, and buds above
    ``pos`` whose companion sits strictly below it."""

    def at_or_above(base: Pos, q: Pos) -> bool:
        return q[: len(base)] == base

    close: set[Pos] = set()
    open_: set[Pos] = set()
    for bud, comp in cnf.buds.items():
        if not at_or_above(pos, bud):
            continue
        if at_or_above(pos, comp):
            close.add(comp)
        else:
            open_.add(bud)
    return sorted(close), sorted(open_)


def cnf_to_graph(cnf: CycleNF) -> ProofGraph:
    """Refold the tree into a proof graph, marking companions with dis.

    Buds become premise edges pointing back at their companion's dis
    node, which records its buds' position ids.
    """
    companions = cnf.companions
    nodes: dict[str, Node] = {}
    for pos, cn in cnf.tree.items():
        prem = []
        for child in cn.children:
            if child in cnf.buds:
                prem.append(CycleNF.position_id(cnf.buds[child]))
            else:
                prem.append(CycleNF.position_id(child))
        base = CycleNF.position_id(pos)
        if pos in companions:
            buds = tuple(CycleNF.position_id(b) for b in companions[pos])
            nodes[base] = Node(Rule(RuleKind.DIS, buds=buds), cn.sequent, (base + "c",))
            nodes[base + "c"] = Node(cn.rule, cn.sequent, tuple(prem))
        else:
            nodes[base] = Node(cn.rule, cn.sequent, tuple(prem))
    return ProofGraph(cnf.name + "_cnf", CycleNF.position_id(()), nodes)


# ---------------------------------------------------------------------------
# Box promotion: all inputs become boxed


class _Builder:
    """Node factory with deterministic fresh ids per base node."""

    def __init__(self, nodes: dict[str, Node]) -> None:
        self.nodes = nodes
        self.counters: dict[str, int] = {}

    def fresh(self, base: str) -> str:
        c = self.counters.get(base, 0)
        self.counters[base] = c + 1
        return f"{base}.{c}"

    def exch_chain(self, base: str, seq: Sequent, positions: list[int], inner: str) -> str:
        """Boxed exchange steps applied conclusion-to-premise at ``positions``.

        Returns the id of the conclusion (bottom) node; empty position
        lists return ``inner`` unchanged.
        """
        cur = inner
        for p in reversed(positions):
            nid = self.fresh(base)
            self.nodes[nid] = Node(Rule(RuleKind.EXCH_B, pos=p), seq, (cur,))
            cur = nid
        return cur


def box_promote(graph: ProofGraph) -> ProofGraph:
    """Rebuild the proof with every input boxed and the same values.

    A node over m boxed and n plain inputs becomes a node over m+n
    boxed inputs (original order, safes after normals); plain cuts
    become boxed cuts behind a box-right, plain conditionals become
    boxed ones, and the argument plumbing is explicit exchange chains.
    The output contains no plain weakening, exchange, cut or
    conditional.
    """
    errors = validate_graph(graph, allow_oracle=True)
    if errors:
        raise TransformError(f"invalid input graph: {errors[0]}")

    nodes: dict[str, Node] = {}
    alias: dict[str, str] = {}
    b = _Builder(nodes)

    def promoted(seq: Sequent) -> Sequent:
        return Sequent(seq.boxed + seq.plain, 0, seq.succedent)

    for nid in graph.reachable():
        node = graph.nodes[nid]
        kind = node.rule.kind
        seq = node.sequent
        pseq = promoted(seq)
        k = seq.boxed + seq.plain
        pr = node.premises
        if kind is RuleKind.ID:
            nodes[nid] = Node(Rule(RuleKind.BOX_L), pseq, (nid + ".i",))
            nodes[nid + ".i"] = Node(Rule(RuleKind.ID), Sequent(0, 1), ())
        elif kind is RuleKind.ZERO:
            nodes[nid] = Node(Rule(RuleKind.ZERO), pseq, ())
        elif kind in (RuleKind.S0, RuleKind.S1):
            nodes[nid] = Node(Rule(kind), pseq, (pr[0],))
        elif kind is RuleKind.WEAK_N:
            # rotate the dropped (last) input to the front, weaken it there
            wid = nid + ".w"
            nodes[wid] = Node(Rule(RuleKind.WEAK_B), pseq, (pr[0],))
            head = b.exch_chain(nid, pseq, list(range(k - 2, -1, -1)), wid)
            _claim(nodes, alias, nid, head)
        elif kind is RuleKind.WEAK_B:
            nodes[nid] = Node(Rule(RuleKind.WEAK_B), pseq, (pr[0],))
        elif kind is RuleKind.EXCH_N:
            nodes[nid] = Node(Rule(RuleKind.EXCH_B, pos=seq.boxed + node.rule.pos), pseq, (pr[0],))
        elif kind is RuleKind.EXCH_B:
            nodes[nid] = Node(Rule(RuleKind.EXCH_B, pos=node.rule.pos), pseq, (pr[0],))
        elif kind is RuleKind.BOX_L:
            # first input moves to last place; with one input this is a no-op
            head = b.exch_chain(nid, pseq, list(range(k - 1)), pr[0])
            _claim(nodes, alias, nid, head)
        elif kind is RuleKind.BOX_R:
            nodes[nid] = Node(Rule(RuleKind.BOX_R), pseq, (pr[0],))
        elif kind is RuleKind.CUT_N:
            right_seq = Sequent(k + 1, 0, seq.succedent)
            right = b.exch_chain(nid + ".r", right_seq, list(range(k)), pr[1])
            nodes[nid + ".b"] = Node(Rule(RuleKind.BOX_R), Sequent(k, 0, SType.BOXED), (pr[0],))
            nodes[nid] = Node(Rule(RuleKind.CUT_B), pseq, (nid + ".b", right))
        elif kind is RuleKind.CUT_B:
            nodes[nid] = Node(Rule(RuleKind.CUT_B), pseq, (pr[0], pr[1]))
        elif kind is RuleKind.COND_N:
            branches = [pr[0]]
            for bi in (1, 2):
                # the boxed conditional hands back the scrutinee in front;
                # the original branch expects it last
                branches.append(b.exch_chain(f"{nid}.b{bi}", pseq, list(range(k - 1)), pr[bi]))
            nodes[nid + ".c"] = Node(Rule(RuleKind.COND_B), pseq, tuple(branches))
            head = b.exch_chain(nid, pseq, list(range(k - 2, -1, -1)), nid + ".c")
            _claim(nodes, alias, nid, head)
        elif kind is RuleKind.COND_B:
            nodes[nid] = Node(Rule(RuleKind.COND_B), pseq, tuple(pr))
        elif kind is RuleKind.ORACLE:
            nodes[nid] = Node(Rule(RuleKind.ORACLE, oracle=node.rule.oracle), pseq, ())
        else:
            raise TransformError(f"cannot promote rule {kind.value} at {nid}")

    resolved = {nid: _resolve(alias, nid) for nid in list(nodes) + list(alias)}
    out_nodes = {
        nid: Node(n.rule, n.sequent, tuple(resolved.get(p, p) for p in n.premises))
        for nid, n in nodes.items()
    }
    out = ProofGraph(graph.name + "_boxed", resolved.get(graph.root, graph.root), out_nodes)
    keep = set(out.reachable())
    out.nodes = {kk: v for kk, v in out.nodes.items() if kk in keep}
    return out


def _claim(nodes: dict[str, Node], alias: dict[str, str], want: str, head: str) -> None:
    """Make ``want`` name the chain at ``head``; alias when the chain is empty."""
    if head in nodes and head not in alias and head.startswith(want + "."):
        nodes[want] = nodes.pop(head)
    else:
        alias[want] = head


def _resolve(alias: dict[str, str], nid: str) -> str:
    seen = set()
    while nid in alias:
        if nid in seen:
            raise TransformError("alias cycle")
        seen.add(nid)
        nid = alias[nid]
    return nid


# ---------------------------------------------------------------------------
# Stripping safe inputs under a boxed succedent


def strip_safe_inputs(graph: ProofGraph) -> ProofGraph:
    """For a boxed-succedent root, drop the plain zone without changing
    the boxed-input semantics.

    Only rules with boxed succedents occur below the box-right bar, and
    in a progressing graph that region is acyclic, so the memoized
    recursion terminates; sub-proofs at and above the bar are shared
    unchanged.
    """
    errors = validate_graph(graph, allow_oracle=True)
    if errors:
        raise TransformError(f"invalid input graph: {errors[0]}")
    if graph.nodes[graph.root].sequent.succedent is not SType.BOXED:
        raise TransformError("strip_safe_inputs needs a boxed succedent at the root")

    out_nodes: dict[str, Node] = dict(graph.nodes)
    b = _Builder(out_nodes)
    memo: dict[str, str] = {}
    in_progress: set[str] = set()

    def strip(nid: str) -> str:
        if nid in memo:
            return memo[nid]
        if nid in in_progress:
            raise NotProgressing(f"cycle of boxed-succedent steps through {nid}")
        in_progress.add(nid)
        node = graph.nodes[nid]
        kind = node.rule.kind
        seq = node.sequent
        target = Sequent(seq.boxed, 0, seq.succedent)
        if kind is RuleKind.BOX_R:
            res = nid
        elif kind in (RuleKind.WEAK_N, RuleKind.EXCH_N):
            res = strip(node.premises[0])
        elif kind in (RuleKind.BOX_L, RuleKind.WEAK_B):
            # either way one boxed input of the target is unused
            inner = strip(node.premises[0])
            res = b.fresh(nid)
            out_nodes[res] = Node(Rule(RuleKind.WEAK_B), target, (inner,))
        elif kind is RuleKind.EXCH_B:
            inner = strip(node.premises[0])
            res = b.fresh(nid)
            out_nodes[res] = Node(Rule(RuleKind.EXCH_B, pos=node.rule.pos), target, (inner,))
        elif kind in (RuleKind.S0, RuleKind.S1):
            inner = strip(node.premises[0])
            res = b.fresh(nid)
            out_nodes[res] = Node(Rule(kind), target, (inner,))
        elif kind is RuleKind.CUT_N:
            res = strip(node.premises[1])
        elif kind is RuleKind.CUT_B:
            left = strip(node.premises[0])
            right = strip(node.premises[1])
            res = b.fresh(nid)
            out_nodes[res] = Node(Rule(RuleKind.CUT_B), target, (left, right))
        else:
            raise TransformError(f"rule {kind.value} at {nid} cannot conclude a boxed succedent")
        in_progress.discard(nid)
        memo[nid] = res
        return res

    root = strip(graph.root)
    out = ProofGraph(graph.name + "_stripped", root, out_nodes)
    keep = set(out.reachable())
    out.nodes = {k: v for k, v in out.nodes.items() if k in keep}
    return out


# ---------------------------------------------------------------------------
# Passing boxed parameters into oracle leaves


def pass_parameters(graph: ProofGraph, oracle: str) -> tuple[ProofGraph, str]:
    """Thread the root's boxed inputs into every leaf of ``oracle``.

    Requires the completeness-construction shape: oracle leaves carry
    all-plain contexts and no path from the root to such a leaf passes
    a boxed cut, a box-left, or the leftmost premise of a boxed
    conditional.  Each root thread ends at a boxed weakening on such a
    path; those weakenings are removed and the threads run on into a
    widened oracle (name returned) that takes the root's boxed inputs
    in front of the original context.
    """
    errors = validate_graph(graph, allow_oracle=True)
    if errors:
        raise TransformError(f"invalid input graph: {errors[0]}")
    k = graph.nodes[graph.root].sequent.boxed
    star = oracle + "*"
    reach = graph.reachable()

    # nodes from which an `oracle` leaf is reachable (reverse closure)
    radj: dict[str, list[str]] = {n: [] for n in reach}
    for n in reach:
        for p in graph.nodes[n].premises:
            radj[p].append(n)
    hits: set[str] = set()
    queue = [
        n
        for n in reach
        if graph.nodes[n].rule.kind is RuleKind.ORACLE and graph.nodes[n].rule.oracle == oracle
    ]
    for leaf in queue:
        if graph.nodes[leaf].sequent.boxed != 0:
            raise ShapeViolation(f"oracle leaf {leaf} must have an all-plain context")
    hits.update(queue)
    while queue:
        n = queue.pop()
        for q in radj[n]:
            if q not in hits:
                hits.add(q)
                queue.append(q)

    for nid in sorted(hits):
        kind = graph.nodes[nid].rule.kind
        if kind is RuleKind.CUT_B:
            raise ShapeViolation(f"boxed cut at {nid} on a path to oracle {oracle!r}")
        if kind is RuleKind.BOX_L:
            raise ShapeViolation(f"box-left at {nid} on a path to oracle {oracle!r}")
        if kind is RuleKind.COND_B and graph.nodes[nid].premises[0] in hits:
            raise ShapeViolation(
                f"leftmost premise of the boxed conditional at {nid} reaches oracle {oracle!r}"
            )

    out_nodes: dict[str, Node] = {nid: graph.nodes[nid] for nid in reach}
    b = _Builder(out_nodes)
    memo: dict[tuple, str] = {}

    def widen(seq: Sequent, nd: int) -> Sequent:
        return Sequent(seq.boxed + nd, seq.plain, seq.succedent)

    def off_region(nid: str, dead: tuple[int, ...]) -> str:
        """Original sub-proof with the parked (suffix) boxes weakened away."""
        if not dead:
            return nid
        key = ("off", nid, len(dead))
        if key in memo:
            return memo[key]
        seq = graph.nodes[nid].sequent
        cur = nid
        for i in range(len(dead)):  # innermost first
            small = widen(seq, i + 1)
            wid = b.fresh(nid + ".d")
            out_nodes[wid] = Node(Rule(RuleKind.WEAK_B), small, (cur,))
            cur = b.exch_chain(nid + ".d", small, list(range(small.boxed - 2, -1, -1)), wid)
        memo[key] = cur
        return cur

    def rewrite(nid: str, sig: tuple[int, ...], dead: tuple[int, ...]) -> str:
        """Rewritten node: live root threads ``sig`` in original positions,
        re-inserted threads ``dead`` (sorted) parked as a boxed suffix."""
        if nid not in hits:
            return off_region(nid, dead)
        key = (nid, sig, dead)
        if key in memo:
            return memo[key]
        node = graph.nodes[nid]
        kind = node.rule.kind
        nd = len(dead)
        if len(sig) != node.sequent.boxed:
            raise ShapeViolation(f"{nid}: boxed zone is not made of root threads alone")
        seq = widen(node.sequent, nd)
        oid = b.fresh(nid + ".t")
        memo[key] = oid
        pr = node.premises

        if kind is RuleKind.ORACLE:
            out_nodes[oid] = Node(
                Rule(RuleKind.ORACLE, oracle=star), Sequent(k, node.sequent.plain), ()
            )
            return oid
        if kind is RuleKind.WEAK_B:
            dying = sig[0]
            new_dead = tuple(sorted(dead + (dying,)))
            j = new_dead.index(dying)
            inner = rewrite(pr[0], sig[1:], new_dead)
            # move the kept box from the front to suffix slot j
            target_pos = (len(sig) - 1) + j
            head = b.exch_chain(nid + ".t", seq, list(range(target_pos)), inner)
            memo[key] = head
            return head
        if kind is RuleKind.EXCH_B:
            p = node.rule.pos
            sig2 = sig[:p] + (sig[p + 1], sig[p]) + sig[p + 2 :]
            out_nodes[oid] = Node(node.rule, seq, (rewrite(pr[0], sig2, dead),))
            return oid
        if kind in (RuleKind.S0, RuleKind.S1, RuleKind.WEAK_N, RuleKind.EXCH_N, RuleKind.BOX_R):
            out_nodes[oid] = Node(node.rule, seq, (rewrite(pr[0], sig, dead),))
            return oid
        if kind is RuleKind.CUT_N:
            left = rewrite(pr[0], sig, dead)
            right = rewrite(pr[1], sig, dead)
            out_nodes[oid] = Node(node.rule, seq, (left, right))
            return oid
        if kind is RuleKind.COND_N:
            prems = tuple(rewrite(p, sig, dead) for p in pr)
            out_nodes[oid] = Node(node.rule, seq, prems)
            return oid
        if kind is RuleKind.COND_B:
            # the left premise never reaches the oracle (checked above)
            zero = off_region(pr[0], dead)
            b1 = rewrite(pr[1], sig, dead)
            b2 = rewrite(pr[2], sig, dead)
            out_nodes[oid] = Node(node.rule, seq, (zero, b1, b2))
            return oid
        raise ShapeViolation(f"rule {kind.value} at {nid} on a path to oracle {oracle!r}")

    root = rewrite(graph.root, tuple(range(k)), ()) if graph.root in hits else graph.root
    out = ProofGraph(graph.name + "_pp", root, out_nodes)
    keep = set(out.reachable())
    out.nodes = {kk: v for kk, v in out.nodes.items() if kk in keep}
    return out, star


# ---------------------------------------------------------------------------
# Simultaneous recursion reduction


def rotation_tags(k: int) -> list[tuple[int, ...]]:
    """Tag tuples <i+1, .., k, 1, .., i> in binary, for i = 0..k-1."""
    base = list(range(1, k + 1))
    return [tuple(base[i:] + base[:i]) for i in range(k)]


def numeral(v: int) -> Term:
    t: Term = Zero()
    for ch in format(v, "b") if v else "":
        t = S1(t) if ch == "1" else S0(t)
    return t


@dataclass(frozen=True)
class ReducedSimultaneous:
    """One recursive function plus tag-applying selectors."""

    fn: Term  # SRecPP or SNRecPP over k extra trailing safe inputs
    tags: tuple[tuple[int, ...], ...]
    normals: int
    safes: int

    def selector(self, i: int, env: Optional[OracleEnv], normals, safes) -> int:
        return eval_term(self.fn, env, normals, tuple(safes) + self.tags[i])


def reduce_simultaneous(term: SimRecPP, normals: int, safes: int) -> ReducedSimultaneous:
    """Flatten a simultaneous scheme into a single function.

    The function takes k extra safe inputs carrying a rotation of the
    numerals 1..k and dispatches on them; component i's recursive calls
    to component j pass rotation j (a permutation of any rotation, so
    trailing safe guards stay satisfied).  Unknown tags fall to 0.
    """
    k = len(term.hs)
    if k < 1:
        raise ValueError("need at least one component")
    tags = tuple(rotation_tags(k))

    def rewrite_calls(t: Term) -> Term:
        if isinstance(t, OracleCall) and t.name.startswith(REC) and t.name[len(REC) :].isdigit():
            j = int(t.name[len(REC) :]) - 1
            return OracleCall(
                REC,
                tuple(rewrite_calls(a) for a in t.normal_args),
                tuple(rewrite_calls(a) for a in t.safe_args) + tuple(numeral(v) for v in tags[j]),
            )
        return _map_subterms(t, rewrite_calls)

    cases = tuple((tags[i], rewrite_calls(term.hs[i])) for i in range(k))
    body = TagDispatch(k, cases)
    fn: Term = SRecPP(body) if term.guard_safes else SNRecPP(body)
    return ReducedSimultaneous(fn, tags, normals, safes + k)


def _map_subterms(t: Term, f: Callable[[Term], Term]) -> Term:
    if not hasattr(t, "__dataclass_fields__"):
        return t
    kwargs = {}
    changed = False
    for fld in fields(t):
        v = getattr(t, fld.name)
        if isinstance(v, Term):
            nv = f(v)
            changed = changed or nv is not v
            kwargs[fld.name] = nv
        elif isinstance(v, tuple) and v and all(isinstance(x, Term) for x in v):
            nv = tuple(f(x) for x in v)
            changed = changed or any(a is not b for a, b in zip(v, nv))
            kwargs[fld.name] = nv
    return replace(t, **kwargs) if changed else t


def flatten_program(prog: PPProgram) -> PPProgram:
    """Collapse every mutual-recursion block of a program to one function.

    Per block, a fresh function over k extra tag-carrying safe inputs
    dispatches on the rotation tags; the block's original names remain
    as thin selector wrappers, so callers are unaffected.
    """
    from .interp import _call_sccs  # module-private but shared here

    out: dict[str, PPFunction] = dict(prog.functions)
    for scc in _call_sccs(prog):
        if len(scc) < 2:
            continue
        names = sorted(scc)
        k = len(names)
        f0 = prog.functions[names[0]]
        if any(
            (prog.functions[n].normals, prog.functions[n].safes) != (f0.normals, f0.safes)
            for n in names
        ):
            raise TransformError("mutual block has non-uniform arities; normalize first")
        tags = rotation_tags(k)
        flat = "+".join(names)

        def retarget(t: Term, idx_of: dict[str, int]) -> Term:
            if isinstance(t, Call) and t.name in idx_of:
                j = idx_of[t.name]
                return Call(
                    flat,
                    tuple(retarget(a, idx_of) for a in t.normal_args),
                    tuple(retarget(a, idx_of) for a in t.safe_args)
                    + tuple(numeral(v) for v in tags[j]),
                    guard=t.guard,
                )
            return _map_subterms(t, lambda s: retarget(s, idx_of))

        idx_of = {n: i for i, n in enumerate(names)}
        cases = tuple(
            (tags[i], retarget(prog.functions[names[i]].body, idx_of)) for i in range(k)
        )
        out[flat] = PPFunction(flat, f0.normals, f0.safes + k, TagDispatch(k, cases))
        for i, n in enumerate(names):
            out[n] = PPFunction(
                n,
                f0.normals,
                f0.safes,
                Call(
                    flat,
                    tuple(Proj("n", j) for j in range(f0.normals)),
                    tuple(Proj("s", j) for j in range(f0.safes))
                    + tuple(numeral(v) for v in tags[i]),
                ),
            )
    new = PPProgram(out, prog.guard)
    new.validate()
    return new
