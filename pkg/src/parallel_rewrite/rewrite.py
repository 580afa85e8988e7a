"""
Parallel rewriting of a Σ-graph by a set of matchings.

Both constructions join the host with one right-hand side image G^μ per
matching and remove what the matchings delete; `rewrite_min` removes after
joining (deletion wins), `rewrite_max` removes before joining (preservation
wins). They agree exactly when the set of matchings is regular.
"""
import collections
import dataclasses
import enum
import logging
import re
import typing

from . import global_settings
from .graph import (
    FreshId, Graph, Item, Labelling, Morphism, image, is_sigma_subgraph, item_key,
    remove, rename, sorted_items,
)
from .join import join_family, meet_graph
from .rules import RuleMatch, RuleSet, enumerate_all
from .stats import Stats


logger = logging.getLogger(__name__)


class Mode(enum.Enum):
    MIN = 'min'
    MAX = 'max'


@dataclasses.dataclass(frozen=True)
class RhsImage:
    """G^μ, and μ̂: the matching of R in it."""
    graph: Graph
    lifted: Morphism


@dataclasses.dataclass(frozen=True)
class DeletionSpec:
    vertices: typing.FrozenSet[Item] = frozenset()
    arrows: typing.FrozenSet[Item] = frozenset()
    labels: Labelling = dataclasses.field(default_factory=Labelling)


class FreshIdCollision(RuntimeError):
    pass


def fresh_id(item: Item, m: RuleMatch, generation: int = 1) -> FreshId:
    return FreshId(item, m.key, generation, note=m.label)


def build_rhs_image(g: Graph, m: RuleMatch) -> RhsImage:
    """
    G^μ: R mapped into G through μ on the items R shares with K, and onto
    fresh ids tagged with μ's key everywhere else.

    Raises:
        FreshIdCollision: a fresh id is already an item of `g`.
    """
    if g is m.host and 'rhs_image' in m.memo:
        return m.memo['rhs_image']
    rule = m.rule
    rhs, kept = rule.rhs, rule.kept
    mu = m.morphism
    generation = g.fresh_generation + 1
    vmap = {x: mu.vmap[x] if x in kept.vertices else fresh_id(x, m, generation) for x in rhs.vertices}
    amap = {a: mu.amap[a] if a in kept.arrows else fresh_id(a, m, generation) for a in rhs.arrows}
    for x in rhs.vertices - kept.vertices:
        if vmap[x] in g:
            raise FreshIdCollision(f"Fresh id `{vmap[x]}` is already in the host")
    for a in rhs.arrows - kept.arrows:
        if amap[a] in g:
            raise FreshIdCollision(f"Fresh id `{amap[a]}` is already in the host")
    labels = {vmap[x]: mu.terms(rhs.labels[x]) for x in rhs.vertices}
    labels.update((amap[a], mu.terms(rhs.labels[a])) for a in rhs.arrows)
    arrows = frozenset(amap.values())
    graph = Graph(
        vertices=frozenset(vmap.values()),
        arrows=arrows,
        src={amap[a]: vmap[rhs.src[a]] for a in rhs.arrows},
        tgt={amap[a]: vmap[rhs.tgt[a]] for a in rhs.arrows},
        labels=labels,
        varset=g.varset,
    )
    lifted = Morphism(source=rhs, target=graph, vmap=vmap, amap=amap, lmap=dict(mu.lmap))
    result = RhsImage(graph=graph, lifted=lifted)
    if g is m.host:
        m.memo['rhs_image'] = result
    return result


def deletion_spec(matches: typing.Iterable[RuleMatch]) -> DeletionSpec:
    """
    What the matchings delete: the images of L∖K's vertices and arrows,
    and on every matched item the images of the labels L has beyond K.
    """
    vertices: typing.Set[Item] = set()
    arrows: typing.Set[Item] = set()
    labels: typing.Dict[Item, typing.Set] = collections.defaultdict(set)
    for m in matches:
        lhs, kept = m.rule.lhs, m.rule.kept
        mu = m.morphism
        vertices.update(mu.vmap[x] for x in lhs.vertices - kept.vertices)
        arrows.update(mu.amap[a] for a in lhs.arrows - kept.arrows)
        for x, ls in lhs.labels.items():
            deleted = ls - kept.labels[x] if x in kept else ls
            if deleted:
                labels[mu(x)].update(mu.terms(deleted))
    return DeletionSpec(
        vertices=frozenset(vertices),
        arrows=frozenset(arrows),
        labels=Labelling(labels),
    )


def _images(g: Graph, matches: typing.Sequence[RuleMatch]) -> typing.List[Graph]:
    return [build_rhs_image(g, m).graph for m in matches]


def rewrite_min(g: Graph, matches: typing.Sequence[RuleMatch]) -> Graph:
    """G⇓M = (G ⊔ ⨆ G^μ)∖(W, B, l)"""
    deleted = deletion_spec(matches)
    joined = join_family([g] + _images(g, matches))
    return remove(joined, deleted.vertices, deleted.arrows, deleted.labels)


def rewrite_max(g: Graph, matches: typing.Sequence[RuleMatch]) -> Graph:
    """G⇑M = G∖(W, B, l) ⊔ ⨆ G^μ"""
    deleted = deletion_spec(matches)
    return join_family([remove(g, deleted.vertices, deleted.arrows, deleted.labels)] + _images(g, matches))


def rewrite(g: Graph, matches: typing.Sequence[RuleMatch], mode: Mode) -> Graph:
    if mode == Mode.MIN:
        result = rewrite_min(g, matches)
    else:
        result = rewrite_max(g, matches)
    if global_settings.normalize_fresh:
        result = normalize_fresh(result)
    return result


def preserves(mu: RuleMatch, nu: RuleMatch) -> bool:
    """μ preserves ν: ν̂(R_ν) ⊓ μ(L_μ) ◁ μ(K_μ)"""
    created = build_rhs_image(nu.host, nu).graph
    return _preserves(created, *_deletion_sides(mu))


def _deletion_sides(mu: RuleMatch) -> typing.Tuple[Graph, Graph]:
    return image(mu.morphism, mu.rule.lhs), image(mu.morphism, mu.rule.kept)


def _preserves(created: Graph, matched: Graph, kept: Graph) -> bool:
    return is_sigma_subgraph(meet_graph(created, matched), kept)


def _graph_key(g: Graph) -> tuple:
    return (
        g.vertices,
        g.arrows,
        frozenset(g.src.items()),
        frozenset(g.tgt.items()),
        frozenset(g.labels.items()),
    )


def find_conflict(matches: typing.Sequence[RuleMatch]) -> typing.Optional[typing.Tuple[RuleMatch, RuleMatch]]:
    """
    First pair (μ, ν) of `matches` where μ does not preserve ν, or None.

    Matchings with equal images of L and K, or with equal G^ν, are checked
    once; only pairs whose graphs share an item can fail.
    """
    deleting = {}
    for mu in matches:
        matched, kept = _deletion_sides(mu)
        deleting.setdefault((_graph_key(matched), _graph_key(kept)), (mu, matched, kept))
    creating = {}
    for nu in matches:
        created = build_rhs_image(nu.host, nu).graph
        creating.setdefault(_graph_key(created), (nu, created))
    logger.debug(f"Regularity check over {len(deleting)} deleting and {len(creating)} creating sides "
                 f"of {len(matches)} matchings")

    touching = collections.defaultdict(list)
    for key, (mu, matched, kept) in deleting.items():
        for x in matched.items:
            touching[x].append(key)

    for nu, created in creating.values():
        checked = set()
        for x in sorted_items(created.items):
            for key in touching.get(x, ()):
                if key in checked:
                    continue
                checked.add(key)
                mu, matched, kept = deleting[key]
                if not _preserves(created, matched, kept):
                    return mu, nu
    return None


def is_regular(matches: typing.Sequence[RuleMatch]) -> bool:
    """Every matching preserves every other one."""
    return find_conflict(matches) is None


def sequential_step(g: Graph, m: RuleMatch, mode: Mode = Mode.MAX) -> Graph:
    return rewrite(g, [m], mode)


def full_step(
        g: Graph,
        rs: RuleSet,
        mode: Mode = Mode.MAX,
        stats: typing.Optional[Stats] = None,
) -> Graph:
    """One step of full parallel rewriting: every matching of every rule at once."""
    matches = enumerate_all(rs, g)
    logger.info(f"Full step ({mode.value}) over {len(matches)} matching(s)")
    if stats is not None:
        stats.step(matches)
    return rewrite(g, matches, mode)


_NORMALIZED = re.compile(r'@(\d+)')


def normalize_fresh(g: Graph) -> Graph:
    """
    Rename fresh ids to `@1`, `@2`, ... in id order, continuing after the
    highest `@n` already in the graph.
    """
    highest = 0
    fresh = []
    for x in g.items:
        if isinstance(x, FreshId):
            fresh.append(x)
        else:
            match = _NORMALIZED.fullmatch(str(x))
            if match:
                highest = max(highest, int(match.group(1)))
    if not fresh:
        return g
    mapping = {x: f"@{highest + i}" for i, x in enumerate(sorted(fresh, key=item_key), start=1)}
    return rename(g, mapping)
