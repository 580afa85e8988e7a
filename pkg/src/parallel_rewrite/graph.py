"""
Term-labelled graphs ⟨V, A, varset, src, tgt, labels⟩, the subgraph orders,
the removal operators, and morphisms between graphs.

Vertex and arrow ids are hashable values: strings as read from documents, or
`FreshId`s created by rewriting. One graph never uses an id both as a vertex
and as an arrow.
"""
import collections
import collections.abc
import dataclasses
import enum
import functools
import itertools
import logging
import re
import typing

from .terms import Term, Var, apply, label_key, sorted_terms, term_key, variables


logger = logging.getLogger(__name__)

Item = typing.Hashable
Labels = typing.FrozenSet[Term]
EMPTY: Labels = frozenset()


@dataclasses.dataclass(frozen=True)
class FreshId:
    """
    Id of an item created by a rewrite step: `item` of the right-hand side,
    tagged with the canonical key of the matching that created it.

    `generation` is one more than the highest generation of any fresh id in
    the host the step rewrote, so a matching whose key repeats in a later
    step still creates new ids.
    """
    item: Item
    tag: tuple
    generation: int = 1
    note: str = dataclasses.field(default='', compare=False)

    def __str__(self):
        suffix = f"#{self.generation}" if self.generation > 1 else ''
        return f"{self.item}@{self.note or self.tag}{suffix}"

    def __repr__(self):
        return f"<FreshId {self}>"


def _natural(s: str) -> tuple:
    return tuple(
        (0, int(part), '') if part.isdigit() else (1, 0, part)
        for part in re.split(r'(\d+)', s) if part
    )


@functools.lru_cache(maxsize=65536)
def item_key(x: Item) -> tuple:
    """Total order on ids: strings in natural order, then fresh ids."""
    if isinstance(x, FreshId):
        return 1, x.generation, item_key(x.item), x.tag
    s = str(x)
    return 0, _natural(s), s


def sorted_items(items: typing.Iterable[Item]) -> typing.List[Item]:
    return sorted(items, key=item_key)


class Labelling(collections.abc.Mapping):
    """
    Partial map from items to sets of terms. Items that are not mapped
    denote the empty set, so `|`, `&` and `-` are total.
    """
    __slots__ = ('_data',)

    def __init__(self, data: typing.Optional[typing.Mapping[Item, typing.Iterable[Term]]] = None):
        self._data = {}
        for k, v in (data or {}).items():
            v = frozenset(v)
            if v:
                self._data[k] = v

    def __getitem__(self, item: Item) -> Labels:
        return self._data.get(item, EMPTY)

    def __contains__(self, item) -> bool:
        return item in self._data

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        inner = ', '.join(
            f"{k}↦{{{', '.join(str(t) for t in sorted_terms(self._data[k]))}}}"
            for k in sorted_items(self._data)
        )
        return f"<Labelling {{{inner}}}>"

    def __or__(self, other: typing.Mapping[Item, Labels]) -> 'Labelling':
        out = dict(self._data)
        for k in other:
            out[k] = out.get(k, EMPTY) | other[k]
        return Labelling(out)

    def __and__(self, other: typing.Mapping[Item, Labels]) -> 'Labelling':
        return Labelling({k: v & other[k] for k, v in self._data.items() if k in other})

    def __sub__(self, other: typing.Mapping[Item, Labels]) -> 'Labelling':
        return Labelling({k: v - other[k] if k in other else v for k, v in self._data.items()})


@dataclasses.dataclass(frozen=True)
class Graph:
    """
    Graph labelled by finite sets of terms over `varset`.

    `labels` is total on vertices and arrows. Equality is structural.
    Use `Graph.build()` for validated construction.
    """
    vertices: typing.FrozenSet[Item]
    arrows: typing.FrozenSet[Item]
    src: typing.Mapping[Item, Item]
    tgt: typing.Mapping[Item, Item]
    labels: typing.Mapping[Item, Labels]
    varset: typing.FrozenSet[Var] = frozenset()

    @classmethod
    def build(
            cls,
            vertices: typing.Mapping[Item, typing.Iterable[Term]] = None,
            arrows: typing.Mapping[Item, typing.Tuple[Item, Item, typing.Iterable[Term]]] = None,
            varset: typing.Iterable[Var] = (),
    ) -> 'Graph':
        """
        Build a validated graph.

        Args:
            vertices: id -> labels
            arrows: id -> (source id, target id, labels)
            varset: variables the labels may use
        """
        vertices = vertices or {}
        arrows = arrows or {}
        labels = {v: frozenset(ls) for v, ls in vertices.items()}
        src, tgt = {}, {}
        for a, (s, t, ls) in arrows.items():
            src[a] = s
            tgt[a] = t
            labels[a] = frozenset(ls)
        g = cls(
            vertices=frozenset(vertices),
            arrows=frozenset(arrows),
            src=src,
            tgt=tgt,
            labels=labels,
            varset=frozenset(varset),
        )
        g.validate()
        return g

    @classmethod
    def empty(cls, varset: typing.Iterable[Var] = ()) -> 'Graph':
        return cls(frozenset(), frozenset(), {}, {}, {}, frozenset(varset))

    def validate(self) -> None:
        """Raises ValueError when the graph is malformed."""
        shared = self.vertices & self.arrows
        if shared:
            raise ValueError(f"Ids used both as vertex and arrow: {', '.join(map(str, sorted_items(shared)))}")
        for a in self.arrows:
            for end in (self.src, self.tgt):
                if a not in end:
                    raise ValueError(f"Arrow `{a}` has no source or target")
                if end[a] not in self.vertices:
                    raise ValueError(f"Arrow `{a}` ends in unknown vertex `{end[a]}`")
        if set(self.src) != set(self.arrows) or set(self.tgt) != set(self.arrows):
            raise ValueError("Source/target maps are not defined exactly on the arrows")
        if set(self.labels) != self.vertices | self.arrows:
            raise ValueError("Labels are not defined exactly on vertices and arrows")
        for x, ls in self.labels.items():
            for t in ls:
                stray = variables(t) - self.varset
                if stray:
                    raise ValueError(f"Label `{t}` of `{x}` uses variables outside the graph's varset: "
                                     f"{', '.join(sorted(v.name for v in stray))}")

    def __repr__(self):
        return f"<Graph |V|={len(self.vertices)} |A|={len(self.arrows)}>"

    def __str__(self):
        def ls(x):
            return '{' + ', '.join(str(t) for t in sorted_terms(self.labels[x])) + '}'
        parts = [f"{v}{ls(v)}" for v in sorted_items(self.vertices)]
        parts += [f"{a}:{self.src[a]}->{self.tgt[a]}{ls(a)}" for a in sorted_items(self.arrows)]
        return ' '.join(parts)

    def __contains__(self, item) -> bool:
        return item in self.vertices or item in self.arrows

    @property
    def items(self) -> typing.FrozenSet[Item]:
        return self.vertices | self.arrows

    @property
    def is_sigma_graph(self) -> bool:
        return not self.varset

    @functools.cached_property
    def fresh_generation(self) -> int:
        """Highest generation among the graph's fresh ids, 0 if it has none."""
        return max((x.generation for x in self.vertices | self.arrows if isinstance(x, FreshId)), default=0)

    @functools.cached_property
    def out_arrows(self) -> typing.Mapping[Item, typing.Tuple[Item, ...]]:
        out = {v: [] for v in self.vertices}
        for a in sorted_items(self.arrows):
            out[self.src[a]].append(a)
        return {v: tuple(arrows) for v, arrows in out.items()}

    @functools.cached_property
    def in_arrows(self) -> typing.Mapping[Item, typing.Tuple[Item, ...]]:
        out = {v: [] for v in self.vertices}
        for a in sorted_items(self.arrows):
            out[self.tgt[a]].append(a)
        return {v: tuple(arrows) for v, arrows in out.items()}

    @functools.cached_property
    def between(self) -> typing.Mapping[typing.Tuple[Item, Item], typing.Tuple[Item, ...]]:
        out = collections.defaultdict(list)
        for a in sorted_items(self.arrows):
            out[(self.src[a], self.tgt[a])].append(a)
        return {k: tuple(v) for k, v in out.items()}

    def to_dict(self) -> dict:
        """JSON-ready form with sorted arrays."""
        def ls(x):
            return [str(t) for t in sorted_terms(self.labels[x])]
        return {
            'varset': sorted(v.name for v in self.varset),
            'nodes': [[str(v), ls(v)] for v in sorted_items(self.vertices)],
            'edges': [[str(a), str(self.src[a]), str(self.tgt[a]), ls(a)]
                      for a in sorted_items(self.arrows)],
        }


def is_subgraph(h: Graph, g: Graph) -> bool:
    """H < G. Both graphs must share their varset."""
    if h.varset != g.varset:
        return False
    if not (h.vertices <= g.vertices and h.arrows <= g.arrows):
        return False
    return all(h.src[a] == g.src[a] and h.tgt[a] == g.tgt[a] for a in h.arrows)


def is_sigma_subgraph(h: Graph, g: Graph) -> bool:
    """H ◁ G: H < G with pointwise label inclusion."""
    if not is_subgraph(h, g):
        return False
    return all(h.labels[x] <= g.labels[x] for x in h.labels)


def generated_subgraph(g: Graph, w: typing.Iterable[Item]) -> Graph:
    """⟨G⟩_W: vertices W, all arrows of G between them, labels of G."""
    w = frozenset(w)
    if not w <= g.vertices:
        raise ValueError(f"Not vertices of the graph: {', '.join(map(str, sorted_items(w - g.vertices)))}")
    arrows = frozenset(a for a in g.arrows if g.src[a] in w and g.tgt[a] in w)
    return _restrict(g, w, arrows)


def _restrict(g: Graph, vertices: typing.FrozenSet[Item], arrows: typing.FrozenSet[Item]) -> Graph:
    return Graph(
        vertices=vertices,
        arrows=arrows,
        src={a: g.src[a] for a in arrows},
        tgt={a: g.tgt[a] for a in arrows},
        labels={x: g.labels[x] for x in itertools.chain(vertices, arrows)},
        varset=g.varset,
    )


def remove_labels(g: Graph, l: typing.Mapping[Item, Labels]) -> Graph:
    """G∖l"""
    labels = dict(g.labels)
    for x in l:
        if x in labels:
            labels[x] = labels[x] - l[x]
    return dataclasses.replace(g, labels=labels)


def remove_arrows(g: Graph, b: typing.Iterable[Item]) -> Graph:
    """G∖B"""
    b = frozenset(b)
    if not b <= g.arrows:
        raise ValueError(f"Not arrows of the graph: {', '.join(map(str, sorted_items(b - g.arrows)))}")
    return _restrict(g, g.vertices, g.arrows - b)


def remove_vertices(g: Graph, w: typing.Iterable[Item]) -> Graph:
    """G∖W: drops W and every arrow adjacent to W."""
    w = frozenset(w)
    if not w <= g.vertices:
        raise ValueError(f"Not vertices of the graph: {', '.join(map(str, sorted_items(w - g.vertices)))}")
    return generated_subgraph(g, g.vertices - w)


def remove(
        g: Graph,
        w: typing.Iterable[Item] = (),
        b: typing.Iterable[Item] = (),
        l: typing.Mapping[Item, Labels] = None,
) -> Graph:
    """G∖(W,B,l) = ((G∖l)∖B)∖W"""
    if l is not None:
        g = remove_labels(g, l)
    return remove_vertices(remove_arrows(g, b), w)


def rename(g: Graph, mapping: typing.Mapping[Item, Item]) -> Graph:
    """Rename vertex and arrow ids; ids outside `mapping` keep their name."""
    def r(x):
        return mapping.get(x, x)
    renamed = Graph(
        vertices=frozenset(r(v) for v in g.vertices),
        arrows=frozenset(r(a) for a in g.arrows),
        src={r(a): r(s) for a, s in g.src.items()},
        tgt={r(a): r(t) for a, t in g.tgt.items()},
        labels={r(x): ls for x, ls in g.labels.items()},
        varset=g.varset,
    )
    if len(renamed.vertices) + len(renamed.arrows) != len(g.vertices) + len(g.arrows):
        raise ValueError("Renaming is not injective")
    return renamed


class MorphismKind(enum.IntEnum):
    MORPHISM = 1
    MATCHING = 2
    ISOMORPHISM = 3


@dataclasses.dataclass(frozen=True)
class Morphism:
    """
    Triple of vertex map, arrow map and substitution from `source` to `target`.

    No validation happens on construction; see `classify()`.
    """
    source: Graph
    target: Graph
    vmap: typing.Mapping[Item, Item]
    amap: typing.Mapping[Item, Item]
    lmap: typing.Mapping[Var, Term] = dataclasses.field(default_factory=dict)

    def __call__(self, item: Item) -> Item:
        if item in self.vmap:
            return self.vmap[item]
        return self.amap[item]

    def __str__(self):
        pairs = [f"⟨{x},{self.vmap[x]}⟩" for x in sorted_items(self.vmap)]
        pairs += [f"⟨{x},{self.amap[x]}⟩" for x in sorted_items(self.amap)]
        pairs += [f"⟨{v},{self.lmap[v]}⟩" for v in sorted(self.lmap, key=term_key)]
        return '{' + ', '.join(pairs) + '}'

    def term(self, t: Term) -> Term:
        if not self.lmap:
            return t
        return apply(self.lmap, t)

    def terms(self, ts: typing.Iterable[Term]) -> Labels:
        if not self.lmap:
            return frozenset(ts)
        return frozenset(apply(self.lmap, t) for t in ts)


def classify(m: Morphism) -> typing.Optional[MorphismKind]:
    """
    Strongest kind `m` belongs to, or None if it is not a morphism.

    Raises:
        ValueError: the maps are not defined exactly on the source's items
                    and variables.
    """
    h, g = m.source, m.target
    if set(m.vmap) != h.vertices or set(m.amap) != h.arrows:
        raise ValueError("Morphism maps are not defined on exactly the source's vertices and arrows")
    if set(m.lmap) != h.varset:
        raise ValueError("Morphism substitution is not defined on exactly the source's variables")

    if not all(v in g.vertices for v in m.vmap.values()):
        return None
    if not all(a in g.arrows for a in m.amap.values()):
        return None
    for t in m.lmap.values():
        if not variables(t) <= g.varset:
            return None
    for a, fa in m.amap.items():
        if g.src[fa] != m.vmap[h.src[a]] or g.tgt[fa] != m.vmap[h.tgt[a]]:
            return None
    for x in h.labels:
        if not m.terms(h.labels[x]) <= g.labels[m(x)]:
            return None

    injective = len(set(m.vmap.values())) == len(m.vmap) \
        and len(set(m.amap.values())) == len(m.amap)
    if not injective:
        return MorphismKind.MORPHISM

    renaming = all(isinstance(t, Var) for t in m.lmap.values()) \
        and set(m.lmap.values()) == g.varset \
        and len(g.varset) == len(h.varset)
    bijective = renaming \
        and set(m.vmap.values()) == g.vertices \
        and set(m.amap.values()) == g.arrows
    if bijective and all(m.terms(h.labels[x]) == g.labels[m(x)] for x in h.labels):
        return MorphismKind.ISOMORPHISM
    return MorphismKind.MATCHING


def is_morphism(m: Morphism) -> bool:
    return classify(m) is not None


def identity(g: Graph) -> Morphism:
    return Morphism(
        source=g,
        target=g,
        vmap={v: v for v in g.vertices},
        amap={a: a for a in g.arrows},
        lmap={x: x for x in g.varset},
    )


def compose(m2: Morphism, m1: Morphism) -> Morphism:
    """m2∘m1"""
    if m1.target is not m2.source and m1.target != m2.source:
        raise ValueError("Cannot compose: target of the first morphism is not the source of the second")
    return Morphism(
        source=m1.source,
        target=m2.target,
        vmap={x: m2.vmap[y] for x, y in m1.vmap.items()},
        amap={x: m2.amap[y] for x, y in m1.amap.items()},
        lmap={v: m2.term(t) for v, t in m1.lmap.items()},
    )


def inverse(m: Morphism) -> Morphism:
    if classify(m) != MorphismKind.ISOMORPHISM:
        raise ValueError("Only isomorphisms have an inverse")
    return Morphism(
        source=m.target,
        target=m.source,
        vmap={y: x for x, y in m.vmap.items()},
        amap={y: x for x, y in m.amap.items()},
        lmap={y: x for x, y in m.lmap.items()},
    )


def image(m: Morphism, f: Graph) -> Graph:
    """
    α(F) for F ◁ source: the items hit by F in the target, each labelled by
    the union of the images of its preimages' labels.
    """
    if not is_sigma_subgraph(f, m.source):
        raise ValueError("Can only take the image of a Σ-subgraph of the source")
    g = m.target
    labels = collections.defaultdict(set)
    for v in f.vertices:
        labels[m.vmap[v]].update(m.terms(f.labels[v]))
    for a in f.arrows:
        labels[m.amap[a]].update(m.terms(f.labels[a]))
    arrows = frozenset(m.amap[a] for a in f.arrows)
    return Graph(
        vertices=frozenset(m.vmap[v] for v in f.vertices),
        arrows=arrows,
        src={a: g.src[a] for a in arrows},
        tgt={a: g.tgt[a] for a in arrows},
        labels={x: frozenset(ls) for x, ls in labels.items()},
        varset=g.varset,
    )


class Structure:
    """
    A family of Σ-subgraphs of one graph seen over a set of their items:
    which parts every item belongs to, and how the arrows connect.
    The unit of `structure_bijections()`.
    """

    def __init__(
            self,
            parts: typing.Sequence[Graph],
            vertices: typing.Iterable[Item],
            arrows: typing.Iterable[Item],
    ):
        self.parts = tuple(parts)
        self.vertices = sorted_items(vertices)
        self.arrows = sorted_items(arrows)
        self.member = {
            x: tuple(i for i, p in enumerate(self.parts) if x in p)
            for x in itertools.chain(self.vertices, self.arrows)
        }
        self.ends = {}
        self.between = collections.defaultdict(list)
        self.neighbours = {v: set() for v in self.vertices}
        for a in self.arrows:
            part = self.parts[self.member[a][0]]
            s, t = part.src[a], part.tgt[a]
            self.ends[a] = (s, t)
            self.between[(s, t)].append(a)
            self.neighbours[s].add(t)
            self.neighbours[t].add(s)
        incident = {v: [] for v in self.vertices}
        for a, (s, t) in self.ends.items():
            incident[s].append(('out', self.member[a]))
            incident[t].append(('in', self.member[a]))
        self.shape = {v: (self.member[v], tuple(sorted(incident[v]))) for v in self.vertices}
        self.by_shape = collections.defaultdict(list)
        for v in self.vertices:
            self.by_shape[self.shape[v]].append(v)

    def signatures(self, varmap: typing.Mapping[Var, Var]) -> typing.Dict[Item, tuple]:
        """Per item: its label sets in every part containing it, renamed by `varmap`."""
        def sig(x):
            return tuple(
                label_key(apply(varmap, t) for t in self.parts[i].labels[x]) if varmap
                else label_key(self.parts[i].labels[x])
                for i in self.member[x]
            )
        return {x: sig(x) for x in self.member}

    def profile(self, sigs: typing.Mapping[Item, tuple], u: Item, v: Item) -> tuple:
        return tuple(sorted((self.member[a], sigs[a]) for a in self.between.get((u, v), ())))

    def _vertex_order(self) -> typing.List[Item]:
        order = []
        placed = set()
        remaining = list(self.vertices)
        while remaining:
            best = max(remaining, key=lambda v: (
                len(self.neighbours[v] & placed),
                len(self.neighbours[v]),
            ))
            order.append(best)
            placed.add(best)
            remaining.remove(best)
        return order


Bijection = typing.Tuple[typing.Dict[Item, Item], typing.Dict[Item, Item], typing.Dict[Var, Var]]


def structure_bijections(
        source: Structure,
        target: Structure,
        varmaps: typing.Iterable[typing.Mapping[Var, Var]],
) -> typing.Generator[Bijection, None, None]:
    """
    Every bijection from `source` to `target` that preserves part membership,
    the endpoints of arrows within their parts, and the labels of every part
    once variables are renamed by one of `varmaps`.

    Backtracks over vertices, most connected first; arrows between each
    placed pair are then matched up in every possible way.
    """
    if len(source.vertices) != len(target.vertices) or len(source.arrows) != len(target.arrows):
        return
    if sorted(map(len, source.by_shape.values())) != sorted(map(len, target.by_shape.values())):
        return
    if any(len(target.by_shape.get(shape, ())) != len(vs) for shape, vs in source.by_shape.items()):
        return

    order = source._vertex_order()
    tsigs = target.signatures({})

    for varmap in varmaps:
        ssigs = source.signatures(varmap)
        vmap: typing.Dict[Item, Item] = {}
        used: typing.Set[Item] = set()

        def candidates(v):
            anchors = [u for u in source.neighbours[v] if u in vmap]
            if anchors:
                pool = target.neighbours[vmap[anchors[0]]]
                return sorted_items(w for w in pool if target.shape[w] == source.shape[v])
            return target.by_shape.get(source.shape[v], [])

        def consistent(v, w):
            if ssigs[v] != tsigs[w]:
                return False
            if source.profile(ssigs, v, v) != target.profile(tsigs, w, w):
                return False
            placed_s = [u for u in source.neighbours[v] if u in vmap]
            placed_t = {u for u in target.neighbours[w] if u in used}
            if {vmap[u] for u in placed_s} != placed_t:
                return False
            for u in placed_s:
                if source.profile(ssigs, u, v) != target.profile(tsigs, vmap[u], w):
                    return False
                if source.profile(ssigs, v, u) != target.profile(tsigs, w, vmap[u]):
                    return False
            return True

        def place(i):
            if i == len(order):
                yield from _arrow_bijections(source, target, ssigs, tsigs, vmap)
                return
            v = order[i]
            for w in candidates(v):
                if w in used or not consistent(v, w):
                    continue
                vmap[v] = w
                used.add(w)
                yield from place(i + 1)
                del vmap[v]
                used.discard(w)

        for v_map, a_map in place(0):
            yield v_map, a_map, dict(varmap)


def _arrow_bijections(source, target, ssigs, tsigs, vmap):
    groups = []
    for (s, t), arrows in source.between.items():
        by_key = collections.defaultdict(list)
        for a in arrows:
            by_key[(source.member[a], ssigs[a])].append(a)
        t_by_key = collections.defaultdict(list)
        for b in target.between.get((vmap[s], vmap[t]), ()):
            t_by_key[(target.member[b], tsigs[b])].append(b)
        for key, src_arrows in by_key.items():
            groups.append((src_arrows, t_by_key[key]))

    for choice in itertools.product(*(itertools.permutations(tgt) for _, tgt in groups)):
        amap = {}
        for (src_arrows, _), tgt_arrows in zip(groups, choice):
            amap.update(zip(src_arrows, tgt_arrows))
        yield dict(vmap), amap


def variable_bijections(
        xs: typing.Iterable[Var],
        ys: typing.Iterable[Var],
) -> typing.Generator[typing.Dict[Var, Var], None, None]:
    """Sort-preserving bijections between two variable sets."""
    xs = sorted(xs, key=term_key)
    ys = sorted(ys, key=term_key)
    if len(xs) != len(ys):
        return
    for perm in itertools.permutations(ys):
        if all(x.sort == y.sort for x, y in zip(xs, perm)):
            yield dict(zip(xs, perm))


def find_isomorphism(h: Graph, g: Graph) -> typing.Optional[Morphism]:
    """Some isomorphism from H to G, or None."""
    source = Structure([h], h.vertices, h.arrows)
    target = Structure([g], g.vertices, g.arrows)
    for vmap, amap, varmap in structure_bijections(
            source, target, variable_bijections(h.varset, g.varset)):
        return Morphism(source=h, target=g, vmap=vmap, amap=amap, lmap=dict(varmap))
    return None


def is_isomorphic(h: Graph, g: Graph) -> bool:
    return find_isomorphism(h, g) is not None
