"""Document round-trips, parse errors, DOT export."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circsafe.corpus import proof_i, term_corpus
from circsafe.formats import (
    ParseError,
    export_dot,
    parse_proof,
    parse_terms,
    serialize_program,
    serialize_proof,
    serialize_termdef,
)
from circsafe.interp import eval_pp, eval_term
from circsafe.transform import cnf_to_graph, cycle_normal_form
from circsafe.translate import translate


def test_round_trip_corpus(proofs):
    for name, g in proofs.items():
        text = serialize_proof(g)
        g2 = parse_proof(text)
        assert (g2.name, g2.root, g2.nodes) == (g.name, g.root, g.nodes), name
        assert serialize_proof(g2) == text


def test_s_document_has_nine_nodes(proofs):
    text = serialize_proof(proofs["S"])
    assert sum(1 for line in text.splitlines() if line.startswith("node ")) == 9


def test_undeclared_premise():
    with pytest.raises(ParseError):
        parse_proof("proof x root a\nnode a : s0 seq N => N premises [ghost]\n")


def test_duplicate_id():
    doc = "proof x root a\nnode a : zero seq => N premises []\nnode a : zero seq => N premises []\n"
    with pytest.raises(ParseError):
        parse_proof(doc)


def test_unknown_rule():
    with pytest.raises(ParseError):
        parse_proof("proof x root a\nnode a : frobnicate seq => N premises []\n")


def test_zone_violation():
    with pytest.raises(ParseError) as e:
        parse_proof("proof x root a\nnode a : id seq N,bN => N premises []\n")
    assert "boxed type after a plain one" in str(e.value)


def test_comments_and_blank_lines():
    doc = "# header\n\nproof x root a  # trailing\nnode a : zero seq => N premises []\n"
    g = parse_proof(doc)
    assert g.root == "a"


def test_dis_nodes_round_trip(proofs):
    for name, g in proofs.items():
        folded = cnf_to_graph(cycle_normal_form(g))
        text = serialize_proof(folded)
        back = parse_proof(text)
        assert back.nodes == folded.nodes, name
        assert any(r.rule.buds for r in folded.nodes.values()), name


def test_empty_premises_serialization(proofs):
    text = serialize_proof(proofs["S"])
    assert "premises []" in text


def test_dot_back_edges(proofs):
    assert export_dot(proofs["S"]).count("style=dashed") == 1
    # the diverging proof loops through its boxed cut
    dot_i = export_dot(proof_i())
    assert dot_i.count("style=dashed") == 1
    from circsafe.compilealg import term_to_derivation

    acyclic = term_to_derivation(term_corpus()["append"])
    assert export_dot(acyclic).count("style=dashed") == 0


def test_term_document_round_trips(terms):
    for name, td in terms.items():
        back = parse_terms(serialize_termdef(td))
        assert back.terms[name].body == td.body, name
        assert (back.terms[name].normals, back.terms[name].safes) == (td.normals, td.safes)


def test_program_document_round_trips(proofs):
    for name in ("S", "C", "E", "N"):
        prog = translate(proofs[name])
        back = parse_terms(serialize_program(prog, name)).programs[name]
        assert back.guard == prog.guard
        assert {k: (f.normals, f.safes, f.body) for k, f in back.functions.items()} == {
            k: (f.normals, f.safes, f.body) for k, f in prog.functions.items()
        }


def test_program_document_evaluates():
    doc = (
        "program t guard strictsafe\n"
        "fn main(1;0) = f0(x0;)\n"
        "fn f0(1;0) = cond(x0, s1(0), s1(p(x0)), s0(@f0(p(x0);)))\n"
    )
    prog = parse_terms(doc).programs["t"]
    assert all(eval_pp(prog, "main", None, [x], []) == x + 1 for x in range(40))


def test_oracle_declarations():
    doc = "oracle a(0;2)\ndef f(0;2) = a(;y0,y1)\n"
    td = parse_terms(doc)
    assert td.oracles["a"] == (0, 2)


@given(st.integers(0, 255), st.integers(0, 255))
@settings(max_examples=50)
def test_parsed_term_evaluates_like_source(x, y):
    tc = term_corpus()
    td = tc["append"]
    back = parse_terms(serialize_termdef(td)).terms["append"]
    assert eval_term(back.body, None, [x], [y]) == eval_term(td.body, None, [x], [y])
