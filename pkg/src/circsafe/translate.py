"""Translating accepted circular proofs into guarded recursion programs.

Each companion of the cycle normal form becomes a named function; the
finite tree segments compile node-by-node through the rule semantics
into expression bodies, buds become guarded calls, and sub-loops that
cannot call back are ordinary composition with earlier functions.
Left-leaning inputs get the stronger guards that also confine the safe
zone, placing the program in the smaller algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .kernel import ProofGraph, RuleKind
from .checker import classify
from .interp import (
    Call,
    Cond,
    OracleCall,
    PPFunction,
    PPProgram,
    Pred,
    Proj,
    S0,
    S1,
    Term,
    Zero,
)
from .transform import CycleNF, Pos, cycle_normal_form


class TranslateError(Exception):
    pass


MAIN = "main"


@dataclass
class TranslationState:
    """Synthesized functions before arity normalization."""

    cnf: CycleNF
    guard: str  # "strict" (nested class) or "strict_safe" (left-leaning)
    fname: dict[Pos, str]
    arities: dict[str, tuple[int, int]]
    bodies: dict[str, Term]
    scc_of: dict[Pos, int]

    def program(self) -> PPProgram:
        fns = {
            name: PPFunction(name, self.arities[name][0], self.arities[name][1], self.bodies[name])
            for name in self.bodies
        }
        prog = PPProgram(fns, self.guard)
        prog.validate()
        return prog


def _companion_sccs(cnf: CycleNF) -> tuple[list[Pos], dict[Pos, int]]:
    """Call-graph components among companions (bud and region edges)."""
    companions = sorted(cnf.companions)
    cset = set(companions)
    targets: dict[Pos, set[Pos]] = {c: set() for c in companions}

    def collect(c: Pos) -> None:
        def go(pos: Pos) -> None:
            if pos in cnf.buds:
                targets[c].add(cnf.buds[pos])
                return
            if pos != c and pos in cset:
                targets[c].add(pos)
                return
            for ch in cnf.tree[pos].children:
                go(ch)

        go(c)

    for c in companions:
        collect(c)

    # Tarjan over the companion graph
    index: dict[Pos, int] = {}
    low: dict[Pos, int] = {}
    on: set[Pos] = set()
    stack: list[Pos] = []
    comp_of: dict[Pos, int] = {}
    counter = [0]
    ncomp = [0]

    def strong(v: Pos) -> None:
        work: list[tuple[Pos, int]] = [(v, 0)]
        while work:
            node, pi = work[-1]
            succs = sorted(targets[node])
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on.add(node)
            advanced = False
            for j in range(pi, len(succs)):
                w = succs[j]
                if w not in index:
                    work[-1] = (node, j + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if w in on:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp_of[w] = ncomp[0]
                    if w == node:
                        break
                ncomp[0] += 1
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])

    for c in companions:
        if c not in index:
            strong(c)
    return companions, comp_of


def synthesize(graph: ProofGraph) -> TranslationState:
    """Build the per-companion functions, genuine arities, no padding yet."""
    cl = classify(graph)
    if cl.cls not in ("CB", "CNB"):
        raise TranslateError(
            f"{graph.name}: only accepted proofs translate (classified {cl.cls}: "
            + "; ".join(cl.diagnostics)
        )
    guard = "strict_safe" if cl.cls == "CB" else "strict"
    cnf = cycle_normal_form(graph)
    companions, scc_of = _companion_sccs(cnf)
    fname = {pos: f"f{i}" for i, pos in enumerate(companions)}
    cset = set(companions)

    arities: dict[str, tuple[int, int]] = {}
    bodies: dict[str, Term] = {}

    def make_call(target: Pos, caller_scc: Optional[int], nenv: list[Term], senv: list[Term]) -> Term:
        seq = cnf.tree[target].sequent
        if len(nenv) != seq.boxed or len(senv) != seq.plain:
            raise TranslateError(
                f"call into {fname[target]} with {len(nenv)};{len(senv)} arguments "
                f"against sequent {seq}"
            )
        guarded = caller_scc is not None and scc_of[target] == caller_scc
        return Call(fname[target], tuple(nenv), tuple(senv), guard=guard if guarded else None)

    def walk(pos: Pos, start: Optional[Pos], caller_scc: Optional[int], nenv: list[Term], senv: list[Term]) -> Term:
        if pos in cnf.buds:
            return make_call(cnf.buds[pos], caller_scc, nenv, senv)
        if pos != start and pos in cset:
            return make_call(pos, caller_scc, nenv, senv)
        node = cnf.tree[pos]
        kind = node.rule.kind
        ch = node.children
        if kind is RuleKind.ID:
            return senv[0]
        if kind is RuleKind.ZERO:
            return Zero()
        if kind is RuleKind.S0:
            return S0(walk(ch[0], start, caller_scc, nenv, senv))
        if kind is RuleKind.S1:
            return S1(walk(ch[0], start, caller_scc, nenv, senv))
        if kind is RuleKind.WEAK_N:
            return walk(ch[0], start, caller_scc, nenv, senv[:-1])
        if kind is RuleKind.WEAK_B:
            return walk(ch[0], start, caller_scc, nenv[1:], senv)
        if kind is RuleKind.EXCH_N:
            p = node.rule.pos
            senv2 = senv[:p] + [senv[p + 1], senv[p]] + senv[p + 2 :]
            return walk(ch[0], start, caller_scc, nenv, senv2)
        if kind is RuleKind.EXCH_B:
            p = node.rule.pos
            nenv2 = nenv[:p] + [nenv[p + 1], nenv[p]] + nenv[p + 2 :]
            return walk(ch[0], start, caller_scc, nenv2, senv)
        if kind is RuleKind.BOX_L:
            return walk(ch[0], start, caller_scc, nenv[1:], senv + [nenv[0]])
        if kind is RuleKind.BOX_R:
            return walk(ch[0], start, caller_scc, nenv, senv)
        if kind is RuleKind.CUT_N:
            v = walk(ch[0], start, caller_scc, nenv, senv)
            return walk(ch[1], start, caller_scc, nenv, senv + [v])
        if kind is RuleKind.CUT_B:
            v = walk(ch[0], start, caller_scc, nenv, senv)
            return walk(ch[1], start, caller_scc, [v] + nenv, senv)
        if kind is RuleKind.COND_N:
            w = senv[-1]
            return Cond(
                w,
                walk(ch[0], start, caller_scc, nenv, senv[:-1]),
                walk(ch[1], start, caller_scc, nenv, senv[:-1] + [Pred(w)]),
                walk(ch[2], start, caller_scc, nenv, senv[:-1] + [Pred(w)]),
            )
        if kind is RuleKind.COND_B:
            x = nenv[0]
            return Cond(
                x,
                walk(ch[0], start, caller_scc, nenv[1:], senv),
                walk(ch[1], start, caller_scc, [Pred(x)] + nenv[1:], senv),
                walk(ch[2], start, caller_scc, [Pred(x)] + nenv[1:], senv),
            )
        if kind is RuleKind.ORACLE:
            return OracleCall(node.rule.oracle, tuple(nenv), tuple(senv))
        raise TranslateError(f"rule {kind.value} at {pos} is not translatable")

    for c in companions:
        seq = cnf.tree[c].sequent
        nenv = [Proj("n", i) for i in range(seq.boxed)]
        senv = [Proj("s", j) for j in range(seq.plain)]
        arities[fname[c]] = (seq.boxed, seq.plain)
        bodies[fname[c]] = walk(c, c, scc_of[c], list(nenv), list(senv))

    root_seq = cnf.tree[()].sequent
    arities[MAIN] = (root_seq.boxed, root_seq.plain)
    nenv = [Proj("n", i) for i in range(root_seq.boxed)]
    senv = [Proj("s", j) for j in range(root_seq.plain)]
    if () in cset:
        bodies[MAIN] = Call(fname[()], tuple(nenv), tuple(senv), guard=None)
    else:
        bodies[MAIN] = walk((), None, None, list(nenv), list(senv))

    return TranslationState(cnf, guard, fname, arities, bodies, scc_of)


def normalize_arities(state: TranslationState) -> TranslationState:
    """Pad every companion function to the block-wide maximum arities.

    Zero fills the fresh slots; the constant is a prefix of everything
    and equal padding never supplies the strict component, so guard
    outcomes on genuine slots are unchanged.
    """
    companion_fns = [state.fname[c] for c in sorted(state.fname)]
    if not companion_fns:
        return state
    big_m = max(state.arities[f][0] for f in companion_fns)
    big_n = max(state.arities[f][1] for f in companion_fns)

    def pad_calls(t: Term) -> Term:
        if isinstance(t, Call) and t.name in state.arities and t.name != MAIN:
            m, n = state.arities[t.name]
            return Call(
                t.name,
                tuple(pad_calls(a) for a in t.normal_args) + tuple(Zero() for _ in range(big_m - m)),
                tuple(pad_calls(a) for a in t.safe_args) + tuple(Zero() for _ in range(big_n - n)),
                guard=t.guard,
            )
        from .transform import _map_subterms

        return _map_subterms(t, pad_calls)

    new_bodies = {name: pad_calls(body) for name, body in state.bodies.items()}
    new_arities = dict(state.arities)
    for f in companion_fns:
        new_arities[f] = (big_m, big_n)
    return TranslationState(
        state.cnf, state.guard, state.fname, new_arities, new_bodies, state.scc_of
    )


def translate(graph: ProofGraph) -> PPProgram:
    """Guarded recursion program computing the proof's function.

    The entry point is the function ``main`` with the root's arities;
    one further function exists per companion of the cycle normal form,
    padded to uniform arities within the block.
    """
    return normalize_arities(synthesize(graph)).program()
