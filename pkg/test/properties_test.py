import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from parallel_rewrite.graph import (
    Morphism, MorphismKind, classify, generated_subgraph, image, is_isomorphic, is_morphism,
    is_sigma_subgraph, remove, rename, sorted_items,
)
from parallel_rewrite.join import aut_relative, join_graph, join_morphism, meet_graph, meet_morphism
from parallel_rewrite.life import (
    LifeConfig, build_torus, cells_from_graph, grid_from_config, life_rules, life_step, reference_step,
)
from parallel_rewrite.rewrite import Mode, is_regular, rewrite, rewrite_max, rewrite_min
from parallel_rewrite.rules import RuleMatch, as_rule_match, enumerate_all, enumerate_matchings, separation_holds
from parallel_rewrite.symmetry import select_representatives
from parallel_rewrite.terms import apply, match_term, sorted_terms, subterms, variables

from strategies import (
    ground_terms, instances, joinable_pairs, patterns, removals, renaming_morphism, renamings,
    rules_in, sigma_graphs, sigma_subgraphs,
)


modes = st.sampled_from(list(Mode))


def transport(m: RuleMatch, target, mapping=None) -> RuleMatch:
    """`m` as a matching into `target`, its images renamed by `mapping`."""
    mapping = mapping or {}
    morphism = m.morphism
    return as_rule_match(m.rule, Morphism(
        source=morphism.source,
        target=target,
        vmap={x: mapping.get(y, y) for x, y in morphism.vmap.items()},
        amap={x: mapping.get(y, y) for x, y in morphism.amap.items()},
        lmap=dict(morphism.lmap),
    ))


def brute_force_matchings(rule, g):
    """
    Every injective map of L into g, each arrow sent to an arrow between the
    images of its ends, with every substitution over subterms of g's labels.
    """
    lhs = rule.lhs
    lv, la = sorted_items(lhs.vertices), sorted_items(lhs.arrows)
    xs = sorted_terms(rule.variables)
    values = sorted_terms({t for ls in g.labels.values() for label in ls for t in subterms(label)})
    found = set()
    for image_v in itertools.permutations(sorted_items(g.vertices), len(lv)):
        vmap = dict(zip(lv, image_v))
        between = [
            [b for b in sorted_items(g.arrows)
             if g.src[b] == vmap[lhs.src[e]] and g.tgt[b] == vmap[lhs.tgt[e]]]
            for e in la
        ]
        for image_a in itertools.product(*between):
            if len(set(image_a)) != len(image_a):
                continue
            amap = dict(zip(la, image_a))
            for image_x in itertools.product(values, repeat=len(xs)):
                m = Morphism(lhs, g, vmap, amap, dict(zip(xs, image_x)))
                if is_morphism(m) and separation_holds(rule, m):
                    found.add(RuleMatch(rule, m))
    return found


@settings(max_examples=200, deadline=None)
@given(sigma_graphs(), st.data())
def test_removal_keeps_a_subgraph_iff_disjoint(g, data):
    h = data.draw(sigma_subgraphs(g))
    w, b, l = data.draw(removals(g))
    disjoint = not h.vertices & w and not h.arrows & b \
        and all(not h.labels[x] & l[x] for x in h.items)
    assert is_sigma_subgraph(h, remove(g, w, b, l)) == disjoint


@settings(max_examples=200, deadline=None)
@given(joinable_pairs())
def test_meet_and_join_bound_both_sides(pair):
    h, g, _ = pair
    meet, join = meet_graph(h, g), join_graph(h, g)
    assert meet == meet_graph(g, h)
    assert join == join_graph(g, h)
    for side in (h, g):
        assert is_sigma_subgraph(meet, side)
        assert is_sigma_subgraph(side, join)
    assert join_graph(h, meet) == h
    assert meet_graph(h, join) == h


@settings(max_examples=100, deadline=None)
@given(joinable_pairs(), st.data())
def test_renaming_commutes_with_meet_and_join(pair, data):
    h, g, whole = pair
    mapping = data.draw(renamings(whole))
    alpha, beta = renaming_morphism(h, mapping), renaming_morphism(g, mapping)
    assert classify(meet_morphism(alpha, beta)) == MorphismKind.ISOMORPHISM
    assert classify(join_morphism(alpha, beta)) == MorphismKind.ISOMORPHISM


@settings(max_examples=100, deadline=None)
@given(joinable_pairs(max_vertices=4, max_arrows=4))
def test_stabilizer_of_both_sides_stabilizes_meet(pair):
    h, g, _ = pair
    join, meet = join_graph(h, g), meet_graph(h, g)
    for p in aut_relative(join, [h, g]):
        assert classify(p.to_morphism(meet)) == MorphismKind.ISOMORPHISM


@settings(max_examples=200, deadline=None)
@given(joinable_pairs(), st.data())
def test_removal_through_join(pair, data):
    h, g, _ = pair
    join = join_graph(h, g)
    w, b, l = data.draw(removals(join, within=h))
    before = remove(join, w, b, l)
    after = join_graph(remove(h, w, b, l), g)
    assert is_sigma_subgraph(before, after)
    untouched = not w & g.vertices and not b & g.arrows \
        and all(not l[x] & g.labels[x] for x in g.items)
    assert (before == after) == untouched


@settings(max_examples=100, deadline=None)
@given(sigma_graphs(), st.data())
def test_removal_through_isomorphism(g, data):
    w, b, l = data.draw(removals(g))
    mapping = data.draw(renamings(g))
    alpha = renaming_morphism(g, mapping)
    assert image(alpha, g) == alpha.target
    assert image(alpha, remove(g, w, b, l)) == remove(
        alpha.target,
        {mapping[x] for x in w},
        {mapping[e] for e in b},
        {mapping[x]: ls for x, ls in l.items()},
    )


@settings(max_examples=100, deadline=None)
@given(patterns, ground_terms)
def test_match_term(pattern, ground):
    sigma = match_term(pattern, ground)
    if sigma is not None:
        assert set(sigma) == variables(pattern)
        assert apply(sigma, pattern) == ground
        return
    xs = sorted_terms(variables(pattern))
    for values in itertools.product(sorted_terms(subterms(ground)), repeat=len(xs)):
        assert apply(dict(zip(xs, values)), pattern) != ground


@settings(max_examples=200, deadline=None)
@given(instances(max_rules=1, max_vertices=5))
def test_matchings_against_brute_force(instance):
    host, rules = instance
    rule = rules[0]
    matches = enumerate_matchings(rule, host)
    assert matches == sorted(matches)
    assert set(matches) == brute_force_matchings(rule, host)


@settings(max_examples=500, deadline=None)
@given(instances(), st.data())
def test_min_equals_max_iff_regular(instance, data):
    host, rules = instance
    matches = enumerate_all(rules, host)
    chosen = [m for m in matches if data.draw(st.booleans())]
    minimal = rewrite_min(host, chosen)
    maximal = rewrite_max(host, chosen)
    assert is_sigma_subgraph(minimal, maximal)
    assert is_regular(chosen) == (minimal == maximal)


@settings(max_examples=100, deadline=None)
@given(instances(), modes)
def test_unmatched_part_is_preserved(instance, mode):
    host, rules = instance
    matches = enumerate_all(rules, host)
    matched = {m.morphism.vmap[x] for m in matches for x in m.rule.lhs.vertices}
    unmatched = host.vertices - matched
    result = rewrite(host, matches, mode)
    assert generated_subgraph(result, unmatched) == generated_subgraph(host, unmatched)


@settings(max_examples=100, deadline=None)
@given(sigma_graphs(min_vertices=1, max_vertices=3, max_arrows=4), modes, st.data())
def test_disjoint_matchings_rewrite_like_two_steps(g, mode, data):
    rule = data.draw(rules_in(g))
    copy = rename(g, {x: f"c{x}" for x in g.items})
    host = join_graph(g, copy)
    matches = enumerate_matchings(rule, host)
    first = [m for m in matches if set(m.morphism.vmap.values()) <= g.vertices]
    second = [m for m in matches if set(m.morphism.vmap.values()) <= copy.vertices]
    mu, nu = data.draw(st.sampled_from(first)), data.draw(st.sampled_from(second))

    once = rewrite(host, [mu, nu], mode)
    halfway = rewrite(host, [mu], mode)
    twice = rewrite(halfway, [transport(nu, halfway)], mode)
    assert is_isomorphic(once, twice)


@settings(max_examples=100, deadline=None)
@given(instances(), modes, st.data())
def test_rewriting_is_invariant_under_isomorphism(instance, mode, data):
    host, rules = instance
    mapping = data.draw(renamings(host))
    renamed = rename(host, mapping)
    matches = enumerate_all(rules, host)
    moved = [transport(m, renamed, mapping) for m in matches]
    assert sorted(moved) == enumerate_all(rules, renamed)
    assert is_isomorphic(rewrite(host, matches, mode), rewrite(renamed, moved, mode))


@settings(max_examples=100, deadline=None)
@given(instances(max_vertices=4, max_arrows=5), modes, st.integers(0, 2**16))
def test_any_representatives_give_isomorphic_results(instance, mode, seed):
    host, rules = instance
    matches = enumerate_all(rules, host)
    least = select_representatives(matches)
    picked = select_representatives(matches, seed=seed)
    assert len(least) == len(picked)
    assert is_isomorphic(rewrite(host, least, mode), rewrite(host, picked, mode))
    assert is_regular(least) == is_regular(picked)


boards = st.integers(5, 6).flatmap(lambda n: arrays(bool, (n, n)))


def run_life(grid, kind, steps=3):
    """Full and modulo-automorphism steps side by side, checked against the array update."""
    height, width = grid.shape
    cfg = LifeConfig(width=width, height=height, pattern=[(int(r), int(c)) for r, c in np.argwhere(grid)])
    assert (grid_from_config(cfg) == grid).all()
    rules = life_rules()
    g = build_torus(cfg)
    for _ in range(steps):
        full, matches, _ = life_step(g, rules, kind)
        reduced, _, _ = life_step(g, rules, f"auto-{kind}")
        assert full == reduced
        assert is_regular(matches)
        grid = reference_step(grid)
        assert (cells_from_graph(full, width, height) == grid).all()
        g = full


@settings(max_examples=10, deadline=None)
@given(boards, st.sampled_from(['min', 'max']))
def test_life_follows_reference(grid, kind):
    run_life(grid, kind)


@pytest.mark.slow
@settings(max_examples=100, deadline=None)
@given(boards, st.sampled_from(['min', 'max']))
def test_life_follows_reference_at_length(grid, kind):
    run_life(grid, kind)
