import pytest

from parallel_rewrite.document import (
    Document, DocumentError, format_document, format_graph, format_rule, parse_document, tokenize,
)
from parallel_rewrite.terms import App, Var


G_TEXT = """\
graph G {
    node 1 {b};
    node 2 {a, b};
    node 3 {b, s(b)};
    edge 4: 1 -> 2 {a};
    edge 5: 1 -> 3 {b};
}"""


def test_worked_example(example_doc, g_ex):
    assert list(example_doc.graphs) == ['G']
    assert [r.name for r in example_doc.rules] == ['r1']
    r1 = example_doc.rule('r1')
    assert r1.variables == {Var('u'), Var('v')}
    assert r1.rhs.labels['y'] == {App('s', (Var('v'),))}
    assert r1.kept.vertices == {'x', 'y'}
    assert format_graph('G', g_ex) == G_TEXT
    assert example_doc.signature.symbols == {'a': ((), 'T'), 's': (('T',), 'T'), 'b': ((), 'T')}


def test_format_rule(r1):
    text = format_rule(r1)
    assert text.startswith("rule r1 {\n    vars u, v;\n    L {\n        node x {u};\n")
    assert "        edge g': x -> z' {};\n" in text


def test_round_trip(example_doc, conflict_doc, triangle_doc, automorphisms_doc):
    for doc in (example_doc, conflict_doc, triangle_doc, automorphisms_doc):
        text = format_document(doc)
        again = parse_document(text)
        assert format_document(again) == text
        assert again.graphs == doc.graphs


def test_empty_document():
    doc = parse_document("# nothing here\n")
    assert doc.graphs == {}
    assert len(doc.rules) == 0
    assert doc.signature == Document().signature
    assert format_document(doc) == ''


def test_comments_and_quoted_ids():
    doc = parse_document("""
        // a graph with an awkward id
        graph "my graph" { node "a b" {c}; }  # trailing
    """)
    g = doc.graph('my graph')
    assert g.vertices == {'a b'}
    assert format_graph('my graph', g) == 'graph "my graph" {\n    node "a b" {c};\n}'


def test_explicit_signature():
    doc = parse_document("""
        signature { sort Nat; const zero: Nat; fn succ(Nat): Nat; }
        rule inc {
            vars n: Nat;
            L { node x {n}; }
            K { node x; }
            R { node x {succ(n)}; }
        }
        graph G { node 1 {succ(zero)}; }
    """)
    n = doc.rule('inc').variables
    assert n == {Var('n', 'Nat')}
    assert doc.graph('G').labels['1'] == {App('succ', (App('zero', (), 'Nat'),), 'Nat')}
    assert parse_document(format_document(doc)).signature == doc.signature


@pytest.mark.parametrize(
    'text',
    [
        "graph G { node x@1; }",
        "graph G { node 1 {s@(a)}; }",
        'graph G { node "x@1"; }',
    ]
)
def test_fresh_namespace_is_reserved(text):
    with pytest.raises(DocumentError) as e:
        parse_document(text)
    assert e.value.line == 1


@pytest.mark.parametrize(
    'text',
    [
        "graph G { node 1 }",
        "graph G { edge 4: 1 -> 2; }",
        "graph G { node 1; node 1; }",
        "graph G { node 1; } graph G { node 2; }",
        "graph G { node 1 {s(a, b), s(a)}; }",
        "graph G { node 1 {$}; }",
        "signature { const a: S; }",
        "signature { sort S; } graph G { node 1 {a}; }",
        "rule r { vars u; L { node x {u}; } K { node x {u}; node y; } R { node x {u}; node y; } }",
        "rule r { vars u; L { node x {u}; edge f: x -> x; } K { node x; } R { node x; edge f: x -> x; } }",
        "rule r { vars a; L { node x {a}; } K { node x {a}; } R { node x {a}; } } graph G { node 1 {a}; }",
        "rule r { L { node x; } K { node x; } R { node x; } } rule r { L { node y; } K { node y; } R { node y; } }",
    ]
)
def test_rejected(text):
    with pytest.raises(DocumentError):
        parse_document(text)


def test_lexer_position():
    with pytest.raises(DocumentError) as e:
        tokenize("graph G {\n  node 1 {$};\n}")
    assert e.value.line == 2


def test_unknown_names(example_doc):
    with pytest.raises(KeyError):
        example_doc.graph('H')
    with pytest.raises(KeyError):
        example_doc.rule('r2')
