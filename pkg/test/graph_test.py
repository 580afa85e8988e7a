import pytest

from parallel_rewrite.graph import (
    FreshId, Graph, Labelling, Morphism, MorphismKind, classify, compose, find_isomorphism,
    generated_subgraph, identity, image, inverse, is_isomorphic, is_morphism, is_sigma_subgraph,
    is_subgraph, item_key, remove, rename, sorted_items,
)
from parallel_rewrite.terms import App, Var


a = App('a')
b = App('b')
u = Var('u')
v = Var('v')


def s(t):
    return App('s', (t,))


def test_worked_example_graph(g_ex):
    assert g_ex.vertices == {'1', '2', '3'}
    assert g_ex.arrows == {'4', '5'}
    assert g_ex.labels['3'] == {b, s(b)}
    assert g_ex.src['5'] == '1' and g_ex.tgt['5'] == '3'
    assert g_ex.is_sigma_graph
    assert str(g_ex) == "1{b} 2{a, b} 3{b, s(b)} 4:1->2{a} 5:1->3{b}"


@pytest.mark.parametrize(
    ['vertices', 'arrows'],
    [
        ({'x': []}, {'f': ('x', 'y', [])}),
        ({'x': [], 'f': []}, {'f': ('x', 'x', [])}),
        ({'x': [u]}, {}),
    ]
)
def test_build_rejects(vertices, arrows):
    with pytest.raises(ValueError):
        Graph.build(vertices=vertices, arrows=arrows)


def test_labelling():
    l1 = Labelling({'1': [a, b], '2': []})
    l2 = Labelling({'1': [b], '3': [a]})
    assert '2' not in l1
    assert l1['2'] == frozenset()
    assert dict(l1 | l2) == {'1': {a, b}, '3': {a}}
    assert dict(l1 & l2) == {'1': {b}}
    assert dict(l1 - l2) == {'1': {a}}


def test_item_order():
    fresh = FreshId('z', ('r',), note='r')
    assert sorted_items(['10', '9', fresh, 'x', '1']) == ['1', '9', '10', 'x', fresh]
    assert item_key('2') < item_key('10')


def test_is_subgraph(r1, g_ex):
    assert is_subgraph(g_ex, g_ex)
    assert is_subgraph(r1.kept, r1.lhs)
    single = Graph.build(vertices={'x': [u]}, varset=[u])
    other = Graph.build(vertices={'y': [u]}, varset=[u])
    assert not is_subgraph(single, other)


def test_is_sigma_subgraph(r1, g_ex):
    assert is_sigma_subgraph(r1.common, r1.kept)
    assert is_sigma_subgraph(g_ex, g_ex)
    bigger = Graph.build(
        vertices={'x': [u], 'y': [u, v]},
        arrows={'f': ('x', 'y', [])},
        varset=[u, v],
    )
    assert is_subgraph(bigger, r1.lhs)
    assert not is_sigma_subgraph(bigger, r1.kept)


def test_generated_subgraph(g_ex):
    expected = Graph.build(
        vertices={'1': [b], '2': [a, b]},
        arrows={'4': ('1', '2', [a])},
    )
    assert generated_subgraph(g_ex, {'1', '2'}) == expected
    assert generated_subgraph(g_ex, g_ex.vertices) == g_ex
    assert generated_subgraph(g_ex, set()) == Graph.empty()
    with pytest.raises(ValueError):
        generated_subgraph(g_ex, {'4'})


def test_remove(g_ex):
    result = remove(g_ex, {'3'}, {'5'}, Labelling({'2': [b], '3': [b]}))
    assert result == Graph.build(
        vertices={'1': [b], '2': [a]},
        arrows={'4': ('1', '2', [a])},
    )
    assert remove(g_ex) == g_ex

    two = Graph.build(vertices={'p': [], 'q': []}, arrows={'e': ('p', 'q', [])})
    assert remove(two, {'q'}) == Graph.build(vertices={'p': []})

    with pytest.raises(ValueError):
        remove(g_ex, {'9'})
    with pytest.raises(ValueError):
        remove(g_ex, b={'1'})


def test_classify(r1, g_ex, mu):
    m = mu.morphism
    assert m.vmap == {'x': '1', 'y': '2', 'z': '3'}
    assert m.amap == {'f': '4', 'g': '5'}
    assert m.lmap == {u: b, v: a}
    assert classify(m) == MorphismKind.MATCHING
    assert classify(identity(g_ex)) == MorphismKind.ISOMORPHISM

    assert is_morphism(m)

    broken = Morphism(r1.lhs, g_ex, m.vmap, {'f': '5', 'g': '4'}, m.lmap)
    assert classify(broken) is None
    assert not is_morphism(broken)

    with pytest.raises(ValueError):
        classify(Morphism(r1.lhs, g_ex, {'x': '1'}, m.amap, m.lmap))


def test_image(r1, g_ex, mu):
    assert image(mu.morphism, r1.lhs) == Graph.build(
        vertices={'1': [b], '2': [a, b], '3': [b]},
        arrows={'4': ('1', '2', []), '5': ('1', '3', [])},
    )
    assert image(mu.morphism, r1.common) == Graph.build(
        vertices={'1': [], '2': []},
        arrows={'4': ('1', '2', [])},
    )
    assert image(identity(g_ex), g_ex) == g_ex
    with pytest.raises(ValueError):
        image(mu.morphism, g_ex)


def test_find_isomorphism(g_ex):
    mapping = {'1': 'p', '2': 'q', '3': 'r', '4': 'e', '5': 'f'}
    copy = rename(g_ex, mapping)
    iso = find_isomorphism(g_ex, copy)
    assert iso is not None
    assert {**iso.vmap, **iso.amap} == mapping
    assert classify(iso) == MorphismKind.ISOMORPHISM
    assert is_isomorphic(g_ex, g_ex)

    smaller = generated_subgraph(g_ex, {'1', '2'})
    assert find_isomorphism(smaller, g_ex) is None


def test_isomorphism_respects_labels():
    h = Graph.build(vertices={'x': [a], 'y': [b]}, arrows={'f': ('x', 'y', [])})
    g = Graph.build(vertices={'x': [b], 'y': [a]}, arrows={'f': ('x', 'y', [])})
    assert not is_isomorphic(h, g)


def test_rename_must_be_injective(g_ex):
    with pytest.raises(ValueError):
        rename(g_ex, {'1': '2'})


def test_compose(r1, g_ex, mu):
    m = mu.morphism
    assert compose(identity(g_ex), m) == m
    assert compose(m, identity(r1.lhs)) == m

    copy = rename(g_ex, {'1': 'p', '2': 'q', '3': 'r'})
    iso = find_isomorphism(g_ex, copy)
    assert compose(inverse(iso), iso) == identity(g_ex)
    assert classify(compose(iso, m)) == MorphismKind.MATCHING

    with pytest.raises(ValueError):
        compose(m, m)
    with pytest.raises(ValueError):
        inverse(m)


def test_fresh_generation(g_ex):
    assert g_ex.fresh_generation == 0
    first, second = FreshId('z', ('r',)), FreshId('z', ('r',), generation=2)
    assert first != second
    assert str(second) == "z@('r',)#2"
    assert sorted_items([second, first, '1']) == ['1', first, second]
    g = Graph.build(vertices={'1': [], first: [], second: []})
    assert g.fresh_generation == 2
