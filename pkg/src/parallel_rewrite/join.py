"""
Meet and join of maps and graphs, and the (relative) automorphism groups of
graphs, stored as explicit element lists.
"""
import dataclasses
import functools
import itertools
import logging
import math
import typing

from . import global_settings
from .graph import (
    Graph, Item, Morphism, Structure, is_sigma_subgraph, sorted_items,
    structure_bijections, variable_bijections,
)
from .terms import Var, term_key


logger = logging.getLogger(__name__)

K = typing.TypeVar('K')
V = typing.TypeVar('V')


class NotJoinable(ValueError):
    pass


class GroupTooLarge(RuntimeError):
    pass


def meet_fn(f: typing.Mapping[K, V], g: typing.Mapping[K, V]) -> typing.Dict[K, V]:
    """f⋏g: the pairs f and g have in common."""
    if len(g) < len(f):
        f, g = g, f
    return {k: v for k, v in f.items() if k in g and g[k] == v}


def are_joinable_fns(f: typing.Mapping[K, V], g: typing.Mapping[K, V]) -> bool:
    if len(g) < len(f):
        f, g = g, f
    return all(g[k] == v for k, v in f.items() if k in g)


def join_fn(f: typing.Mapping[K, V], g: typing.Mapping[K, V]) -> typing.Dict[K, V]:
    """f⋎g, defined when f and g agree on their common domain."""
    if not are_joinable_fns(f, g):
        raise NotJoinable("Maps disagree on their common domain")
    out = dict(f)
    out.update(g)
    return out


def are_joinable(h: Graph, g: Graph) -> bool:
    if h.varset != g.varset:
        return False
    if h.vertices & g.arrows or h.arrows & g.vertices:
        return False
    return are_joinable_fns(h.src, g.src) and are_joinable_fns(h.tgt, g.tgt)


def meet_graph(h: Graph, g: Graph) -> Graph:
    """H⊓G"""
    if not are_joinable(h, g):
        raise NotJoinable("Graphs are not joinable")
    vertices = h.vertices & g.vertices
    arrows = h.arrows & g.arrows
    return Graph(
        vertices=vertices,
        arrows=arrows,
        src={a: h.src[a] for a in arrows},
        tgt={a: h.tgt[a] for a in arrows},
        labels={x: h.labels[x] & g.labels[x] for x in itertools.chain(vertices, arrows)},
        varset=h.varset,
    )


def join_graph(h: Graph, g: Graph) -> Graph:
    """H⊔G"""
    return join_family([h, g])


def join_family(graphs: typing.Sequence[Graph]) -> Graph:
    """
    ⨆ of a family of pairwise joinable graphs, in a single pass.

    Raises:
        NotJoinable: two members disagree on an item.
    """
    if not graphs:
        raise ValueError("Cannot join an empty family")
    varset = graphs[0].varset
    vertices: typing.Set[Item] = set()
    arrows: typing.Set[Item] = set()
    src: typing.Dict[Item, Item] = {}
    tgt: typing.Dict[Item, Item] = {}
    labels: typing.Dict[Item, typing.FrozenSet] = {}
    for g in graphs:
        if g.varset != varset:
            raise NotJoinable("Graphs over different variable sets")
        if not g.vertices.isdisjoint(arrows) or not g.arrows.isdisjoint(vertices):
            raise NotJoinable("An id is a vertex in one graph and an arrow in another")
        for a in g.arrows:
            s = src.setdefault(a, g.src[a])
            t = tgt.setdefault(a, g.tgt[a])
            if s != g.src[a] or t != g.tgt[a]:
                raise NotJoinable(f"Arrow `{a}` has different endpoints in two graphs")
        vertices |= g.vertices
        arrows |= g.arrows
        for x, ls in g.labels.items():
            old = labels.get(x)
            labels[x] = ls if old is None else old | ls
    return Graph(
        vertices=frozenset(vertices),
        arrows=frozenset(arrows),
        src=src,
        tgt=tgt,
        labels=labels,
        varset=varset,
    )


def meet_morphism(alpha: Morphism, beta: Morphism) -> Morphism:
    """α⋏β from H⊓G to H′⊓G′"""
    return Morphism(
        source=meet_graph(alpha.source, beta.source),
        target=meet_graph(alpha.target, beta.target),
        vmap=meet_fn(alpha.vmap, beta.vmap),
        amap=meet_fn(alpha.amap, beta.amap),
        lmap=meet_fn(alpha.lmap, beta.lmap),
    )


def join_morphism(alpha: Morphism, beta: Morphism) -> Morphism:
    """α⋎β from H⊔G to H′⊔G′"""
    return Morphism(
        source=join_graph(alpha.source, beta.source),
        target=join_graph(alpha.target, beta.target),
        vmap=join_fn(alpha.vmap, beta.vmap),
        amap=join_fn(alpha.amap, beta.amap),
        lmap=join_fn(alpha.lmap, beta.lmap),
    )


@dataclasses.dataclass(frozen=True)
class Carrier:
    """Ordered vertices, arrows and variables a group acts on."""
    vertices: typing.Tuple[Item, ...]
    arrows: typing.Tuple[Item, ...]
    variables: typing.Tuple[Var, ...]

    @classmethod
    def of(cls, vertices, arrows, variables) -> 'Carrier':
        return cls(
            tuple(sorted_items(vertices)),
            tuple(sorted_items(arrows)),
            tuple(sorted(variables, key=term_key)),
        )

    @property
    def items(self) -> tuple:
        return self.vertices + self.arrows + self.variables

    def index(self) -> typing.Dict[typing.Hashable, int]:
        return {x: i for i, x in enumerate(self.items)}

    def __len__(self):
        return len(self.vertices) + len(self.arrows) + len(self.variables)


class Permutation:
    """
    A permutation of a carrier's vertices, arrows and variables, each mapped
    within its own kind. Composition reads right to left: (p * q)(x) = p(q(x)).
    """
    __slots__ = ('carrier', 'images', '_index')

    def __init__(self, carrier: Carrier, images: typing.Sequence[int], index=None):
        self.carrier = carrier
        self.images = tuple(images)
        self._index = index if index is not None else carrier.index()

    @classmethod
    def from_maps(
            cls,
            carrier: Carrier,
            vmap: typing.Mapping[Item, Item],
            amap: typing.Mapping[Item, Item],
            varmap: typing.Mapping[Var, Var],
            index=None,
    ) -> 'Permutation':
        index = index if index is not None else carrier.index()
        images = [index[vmap.get(v, v)] for v in carrier.vertices]
        images += [index[amap.get(a, a)] for a in carrier.arrows]
        images += [index[varmap.get(x, x)] for x in carrier.variables]
        return cls(carrier, images, index)

    def __call__(self, x):
        return self.carrier.items[self.images[self._index[x]]]

    def __mul__(self, other: 'Permutation') -> 'Permutation':
        if other.carrier != self.carrier:
            raise ValueError("Permutations act on different carriers")
        return Permutation(self.carrier, [self.images[j] for j in other.images], self._index)

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.images == other.images and self.carrier == other.carrier

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"<Permutation {self}>"

    def __str__(self):
        return ''.join('(' + ' '.join(str(x) for x in cycle) + ')' for cycle in self.cycles())

    def inverse(self) -> 'Permutation':
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(self.carrier, inv, self._index)

    @property
    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> typing.List[tuple]:
        """Cycles in carrier order, fixpoints included."""
        items = self.carrier.items
        seen = set()
        out = []
        for start in range(len(items)):
            if start in seen:
                continue
            cycle = []
            i = start
            while i not in seen:
                seen.add(i)
                cycle.append(items[i])
                i = self.images[i]
            out.append(tuple(cycle))
        return out

    def vertex_map(self) -> typing.Dict[Item, Item]:
        return {v: self(v) for v in self.carrier.vertices}

    def arrow_map(self) -> typing.Dict[Item, Item]:
        return {a: self(a) for a in self.carrier.arrows}

    def variable_map(self) -> typing.Dict[Var, Var]:
        return {x: self(x) for x in self.carrier.variables}

    def to_morphism(self, source: Graph, target: typing.Optional[Graph] = None) -> Morphism:
        """This permutation restricted to `source`'s items, as a morphism."""
        return Morphism(
            source=source,
            target=target if target is not None else source,
            vmap={v: self(v) for v in source.vertices},
            amap={a: self(a) for a in source.arrows},
            lmap={x: self(x) for x in source.varset},
        )


class PermGroup:
    """
    A finite permutation group, as the sorted list of its elements.

    Group laws are verified on construction (the closure check is skipped
    above `global_settings.verify_group_limit` elements).
    """

    def __init__(self, carrier: Carrier, elements: typing.Iterable[typing.Sequence[int]]):
        self.carrier = carrier
        self._index = carrier.index()
        images = set()
        for e in elements:
            images.add(tuple(e))
            if len(images) > global_settings.max_group_order:
                raise GroupTooLarge(f"Group has more than {global_settings.max_group_order} elements")
        self._elements = sorted(images)
        self._verify()

    def __len__(self):
        return len(self._elements)

    def __iter__(self) -> typing.Iterator[Permutation]:
        for images in self._elements:
            yield Permutation(self.carrier, images, self._index)

    def __contains__(self, p: Permutation) -> bool:
        return p.carrier == self.carrier and p.images in self._image_set

    def __eq__(self, other):
        if not isinstance(other, PermGroup):
            return NotImplemented
        return self.carrier == other.carrier and self._elements == other._elements

    def __repr__(self):
        return f"<PermGroup order={len(self)} on {len(self.carrier)} items>"

    @property
    def order(self) -> int:
        return len(self._elements)

    @property
    def identity(self) -> Permutation:
        return Permutation(self.carrier, range(len(self.carrier)), self._index)

    @functools.cached_property
    def _image_set(self) -> typing.FrozenSet[tuple]:
        return frozenset(self._elements)

    def _verify(self) -> None:
        elements = self._image_set
        identity = tuple(range(len(self.carrier)))
        if identity not in elements:
            raise ValueError("Permutation set does not contain the identity")
        for e in self:
            if e.inverse().images not in elements:
                raise ValueError(f"Permutation set is not closed under inverses: {e}")
        if len(self) > global_settings.verify_group_limit:
            logger.debug(f"Skipping closure check on group of order {len(self)}")
            return

        # Grow the subgroup generated by the elements seen so far; a set that
        # is closed under composition generates nothing outside itself.
        generated = {identity}
        generators = []
        for e in self._elements:
            if e in generated:
                continue
            generators.append(e)
            queue = list(generated)
            while queue:
                x = queue.pop()
                for g in generators:
                    y = tuple(x[j] for j in g)
                    if y not in generated:
                        if y not in elements:
                            raise ValueError("Permutation set is not closed under composition")
                        generated.add(y)
                        queue.append(y)
        logger.debug(f"Verified group of order {len(self)} with {len(generators)} generators")

    def restrict(
            self,
            vertices: typing.Iterable[Item],
            arrows: typing.Iterable[Item],
            variables: typing.Iterable[Var],
    ) -> 'PermGroup':
        """
        Restriction of every element to an invariant part of the carrier.

        Raises:
            ValueError: some element moves an item out of the part.
        """
        sub = Carrier.of(vertices, arrows, variables)
        sub_index = sub.index()
        restricted = []
        for p in self:
            try:
                restricted.append(tuple(sub_index[p(x)] for x in sub.items))
            except KeyError:
                raise ValueError(f"{p} does not leave the restricted carrier invariant") from None
        return PermGroup(sub, restricted)

    def summary(self) -> str:
        return f"order {self.order}, acting on {len(self.carrier.vertices)} vertices, " \
               f"{len(self.carrier.arrows)} arrows, {len(self.carrier.variables)} variables"


def _cap_check(count: int) -> None:
    if count > global_settings.max_group_order:
        raise GroupTooLarge(f"Group has more than {global_settings.max_group_order} elements")


def aut_graph(g: Graph) -> PermGroup:
    """Aut(G): every bijection mapping G onto itself."""
    structure = Structure([g], g.vertices, g.arrows)
    return _group_from_core(g, structure)


def aut_relative(g: Graph, parts: typing.Sequence[Graph]) -> PermGroup:
    """
    Aut_G(H₁,…,Hₙ): permutations of G's vertices, arrows and variables that
    map every part onto itself. Items outside all parts move freely.

    Raises:
        ValueError: a part is not a Σ-subgraph of G.
        GroupTooLarge: the group exceeds `global_settings.max_group_order`.
    """
    for h in parts:
        if not is_sigma_subgraph(h, g):
            raise ValueError("Every part must be a Σ-subgraph of the graph")
    if len(parts) == 1:
        core = aut_graph(parts[0])
        maps = [(p.vertex_map(), p.arrow_map(), p.variable_map()) for p in core]
        return _extend_freely(g, parts, maps)

    touched_v = set().union(*(h.vertices for h in parts)) if parts else set()
    touched_a = set().union(*(h.arrows for h in parts)) if parts else set()
    structure = Structure(parts, touched_v, touched_a)
    maps = []
    for found in structure_bijections(structure, structure, variable_bijections(g.varset, g.varset)):
        maps.append(found)
        _cap_check(len(maps))
    return _extend_freely(g, parts, maps)


def _group_from_core(g: Graph, structure: Structure) -> PermGroup:
    carrier = Carrier.of(g.vertices, g.arrows, g.varset)
    index = carrier.index()
    elements = []
    for vmap, amap, varmap in structure_bijections(
            structure, structure, variable_bijections(g.varset, g.varset)):
        elements.append(Permutation.from_maps(carrier, vmap, amap, varmap, index).images)
        _cap_check(len(elements))
    return PermGroup(carrier, elements)


def _extend_freely(g: Graph, parts: typing.Sequence[Graph], maps) -> PermGroup:
    free_v = sorted_items(g.vertices - set().union(*(h.vertices for h in parts)))
    free_a = sorted_items(g.arrows - set().union(*(h.arrows for h in parts)))
    _cap_check(len(maps) * math.factorial(len(free_v)) * math.factorial(len(free_a)))
    logger.debug(f"Extending {len(maps)} core elements over {len(free_v)} free vertices "
                 f"and {len(free_a)} free arrows")

    carrier = Carrier.of(g.vertices, g.arrows, g.varset)
    index = carrier.index()
    elements = []
    for vmap, amap, varmap in maps:
        for pv in itertools.permutations(free_v):
            for pa in itertools.permutations(free_a):
                full_v = dict(vmap)
                full_v.update(zip(free_v, pv))
                full_a = dict(amap)
                full_a.update(zip(free_a, pa))
                elements.append(Permutation.from_maps(carrier, full_v, full_a, varmap, index).images)
    return PermGroup(carrier, elements)
