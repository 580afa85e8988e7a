"""
Rules ⟨L, K, R⟩ and their matchings in Σ-graphs.
"""
import collections.abc
import dataclasses
import functools
import logging
import typing

from .graph import (
    Graph, Item, Labels, Morphism, MorphismKind, classify, is_sigma_subgraph,
    item_key, sorted_items,
)
from .join import are_joinable, join_graph, meet_graph
from .terms import Term, Var, apply, is_ground, match_term, sorted_terms, term_key, variables


logger = logging.getLogger(__name__)


class UnknownName(KeyError):
    """A graph or rule name that a document or rule set does not define."""


class InvalidRule(ValueError):
    def __init__(self, name: str, diagnostics: typing.Sequence[str]):
        super().__init__(f"Rule `{name}` is invalid: " + '; '.join(diagnostics))
        self.diagnostics = list(diagnostics)


@dataclasses.dataclass(frozen=True, eq=False)
class Rule:
    """
    A rule ⟨L, K, R⟩ over the variables X. Rules compare by identity.
    """
    name: str
    lhs: Graph
    kept: Graph
    rhs: Graph
    variables: typing.FrozenSet[Var] = frozenset()

    def __repr__(self):
        return f"<Rule {self.name}>"

    @functools.cached_property
    def common(self) -> Graph:
        """L⊓R"""
        return meet_graph(self.lhs, self.rhs)

    @functools.cached_property
    def union(self) -> Graph:
        """L⊔R"""
        return join_graph(self.lhs, self.rhs)

    @functools.cached_property
    def canonical_items(self) -> typing.Tuple[tuple, tuple, tuple]:
        return (
            tuple(sorted_items(self.lhs.vertices)),
            tuple(sorted_items(self.lhs.arrows)),
            tuple(sorted(self.variables, key=term_key)),
        )

    @functools.cached_property
    def _plan(self) -> '_SearchPlan':
        return _SearchPlan(self)


def validate_rule(r: Rule) -> typing.List[str]:
    """Every violated condition of rule validity, one message each."""
    problems = []
    for part, g in (('L', r.lhs), ('K', r.kept), ('R', r.rhs)):
        if g.varset != r.variables:
            problems.append(f"{part} is not labelled over the rule's variables")
    if not are_joinable(r.lhs, r.rhs):
        problems.append("L and R are not joinable")
    elif not is_sigma_subgraph(meet_graph(r.lhs, r.rhs), r.kept):
        problems.append("L⊓R is not a Σ-subgraph of K")
    if not is_sigma_subgraph(r.kept, r.lhs):
        problems.append("K is not a Σ-subgraph of L")

    def occurring(g):
        out = set()
        for ls in g.labels.values():
            for t in ls:
                out |= variables(t)
        return out
    in_lhs = occurring(r.lhs)
    if in_lhs != set(r.variables):
        missing = ', '.join(sorted(v.name for v in set(r.variables) - in_lhs))
        problems.append(f"variables not occurring in L: {missing}")
    stray = occurring(r.rhs) - in_lhs
    if stray:
        problems.append(f"variables of R not occurring in L: {', '.join(sorted(v.name for v in stray))}")
    return problems


def check_rule(r: Rule) -> Rule:
    problems = validate_rule(r)
    if problems:
        raise InvalidRule(r.name, problems)
    return r


class RuleSet(collections.abc.Sequence):
    """
    Finite list of rules with distinct names and distinct L-carriers.
    """

    def __init__(self, rules: typing.Iterable[Rule] = ()):
        self._rules = tuple(rules)
        names = set()
        carriers = set()
        for r in self._rules:
            if r.name in names:
                raise ValueError(f"Duplicate rule name `{r.name}`")
            names.add(r.name)
            carrier = r.lhs.vertices | r.lhs.arrows
            if carrier in carriers:
                raise ValueError(f"Rule `{r.name}` has the same left-hand side items as another rule")
            carriers.add(carrier)

    def __getitem__(self, i):
        return self._rules[i]

    def __len__(self):
        return len(self._rules)

    def __repr__(self):
        return f"<RuleSet {', '.join(r.name for r in self._rules)}>"

    def by_name(self, name: str) -> Rule:
        for r in self._rules:
            if r.name == name:
                return r
        raise UnknownName(f"No rule named `{name}`")


class RuleMatch:
    """
    A matching of a rule's left-hand side in a Σ-graph.

    Identified by `key`: the rule name and the images of L's vertices,
    arrows and variables in canonical order.
    """
    __slots__ = ('rule', 'morphism', 'key', '_label', 'memo')

    def __init__(self, rule: Rule, morphism: Morphism):
        self.rule = rule
        self.morphism = morphism
        self._label = None
        # graphs derived from this matching in its own host
        self.memo: typing.Dict[str, typing.Any] = {}
        vertices, arrows, variables_ = rule.canonical_items
        self.key = (
            rule.name,
            tuple(item_key(morphism.vmap[v]) for v in vertices),
            tuple(item_key(morphism.amap[a]) for a in arrows),
            tuple(term_key(morphism.lmap[x]) for x in variables_),
        )

    def __eq__(self, other):
        if not isinstance(other, RuleMatch):
            return NotImplemented
        return self.key == other.key

    def __lt__(self, other: 'RuleMatch'):
        return self.key < other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"<RuleMatch {self.label}>"

    def __str__(self):
        return self.label

    def __call__(self, item: Item) -> Item:
        return self.morphism(item)

    @property
    def label(self) -> str:
        if self._label is None:
            self._label = f"{self.rule.name}{self.morphism}"
        return self._label

    @property
    def host(self) -> Graph:
        return self.morphism.target

    @property
    def substitution(self) -> typing.Mapping[Var, Term]:
        return self.morphism.lmap

    def to_dict(self) -> dict:
        m = self.morphism
        return {
            'rule': self.rule.name,
            'vertices': {str(x): str(m.vmap[x]) for x in sorted_items(m.vmap)},
            'arrows': {str(x): str(m.amap[x]) for x in sorted_items(m.amap)},
            'substitution': {x.name: str(m.lmap[x]) for x in sorted(m.lmap, key=term_key)},
        }


def separation_holds(rule: Rule, m: Morphism) -> bool:
    """λ(l_L(x)∖l_K(x)) ∩ λ(l_K(x)) = ∅ for every item x of K."""
    for x, deleted, kept in rule._plan.separation:
        if m.terms(deleted) & m.terms(kept):
            return False
    return True


def as_rule_match(rule: Rule, morphism: Morphism) -> RuleMatch:
    """
    Wrap an arbitrary morphism from L as a RuleMatch.

    Raises:
        ValueError: the morphism is not a matching of the rule.
    """
    if morphism.source is not rule.lhs and morphism.source != rule.lhs:
        raise ValueError("Morphism does not start at the rule's left-hand side")
    kind = classify(morphism)
    if kind is None or kind < MorphismKind.MATCHING:
        raise ValueError(f"Not a matching of rule `{rule.name}`")
    if not morphism.target.is_sigma_graph:
        raise ValueError("Rules match in Σ-graphs only")
    if not separation_holds(rule, morphism):
        raise ValueError(f"Matching of rule `{rule.name}` violates the separation condition")
    return RuleMatch(rule, morphism)


class _SearchPlan:
    """
    Order in which the matcher places L's vertices: most connected to the
    already placed ones first. Every arrow is placed right after the later of
    its endpoints.
    """

    def __init__(self, rule: Rule):
        lhs = rule.lhs
        out_degree = {v: len(lhs.out_arrows[v]) for v in lhs.vertices}
        in_degree = {v: len(lhs.in_arrows[v]) for v in lhs.vertices}

        placed: typing.Set[Item] = set()
        remaining = sorted_items(lhs.vertices)
        self.steps = []  # (vertex, anchor arrow to a placed vertex or None, arrows to place next)
        while remaining:
            def weight(v):
                links = sum(1 for a in lhs.out_arrows[v] if lhs.tgt[a] in placed) \
                    + sum(1 for a in lhs.in_arrows[v] if lhs.src[a] in placed)
                return links, out_degree[v] + in_degree[v], len(lhs.labels[v])
            v = max(remaining, key=weight)
            remaining.remove(v)
            anchor = None
            for a in lhs.in_arrows[v]:
                if lhs.src[a] in placed:
                    anchor = (lhs.src[a], a, 'out')
                    break
            if anchor is None:
                for a in lhs.out_arrows[v]:
                    if lhs.tgt[a] in placed:
                        anchor = (lhs.tgt[a], a, 'in')
                        break
            placed.add(v)
            arrows = tuple(sorted_items(
                a for a in set(lhs.out_arrows[v]) | set(lhs.in_arrows[v])
                if lhs.src[a] in placed and lhs.tgt[a] in placed
            ))
            self.steps.append((v, anchor, arrows))

        self.out_degree = out_degree
        self.in_degree = in_degree
        self.patterns = {x: _Patterns(lhs.labels[x]) for x in lhs.labels}

        self.separation = []
        for x in sorted_items(rule.kept.vertices | rule.kept.arrows):
            deleted = lhs.labels[x] - rule.kept.labels[x]
            if deleted and rule.kept.labels[x]:
                self.separation.append((x, deleted, rule.kept.labels[x]))


class _Patterns:
    """The label set of one L item, split into ground terms and patterns."""
    __slots__ = ('ground', 'open')

    def __init__(self, terms: Labels):
        self.ground = frozenset(t for t in terms if is_ground(t))
        self.open = tuple((t, variables(t)) for t in sorted_terms(terms) if not is_ground(t))

    def extensions(
            self,
            host: Labels,
            sigma: typing.Dict[Var, Term],
    ) -> typing.Generator[typing.Dict[Var, Term], None, None]:
        """Every extension of `sigma` mapping all these terms into `host`."""
        if not self.ground <= host:
            return
        if not self.open:
            yield sigma
            return
        yield from self._extend(0, _terms_by_sort(host), host, sigma)

    def _extend(self, i, by_sort, host, sigma):
        if i == len(self.open):
            yield sigma
            return
        pattern, pattern_vars = self.open[i]
        if pattern_vars.issubset(sigma):
            if apply(sigma, pattern) in host:
                yield from self._extend(i + 1, by_sort, host, sigma)
            return
        # instances share the pattern's sort
        for t in by_sort.get(pattern.sort, ()):
            extended = match_term(pattern, t, sigma)
            if extended is not None:
                yield from self._extend(i + 1, by_sort, host, extended)


@functools.lru_cache(maxsize=65536)
def _terms_by_sort(host: Labels) -> typing.Mapping[str, typing.Tuple[Term, ...]]:
    out = collections.defaultdict(list)
    for t in sorted_terms(host):
        out[t.sort].append(t)
    return {sort: tuple(ts) for sort, ts in out.items()}


def enumerate_matchings(rule: Rule, g: Graph) -> typing.List[RuleMatch]:
    """
    Matches(r, G): every matching of `rule` in the Σ-graph `g`, sorted by key.
    """
    if not g.is_sigma_graph:
        raise ValueError("Rules match in Σ-graphs only")
    lhs = rule.lhs
    plan = rule._plan
    if len(lhs.vertices) > len(g.vertices) or len(lhs.arrows) > len(g.arrows):
        return []

    all_vertices = sorted_items(g.vertices)
    vmap: typing.Dict[Item, Item] = {}
    amap: typing.Dict[Item, Item] = {}
    used_v: typing.Set[Item] = set()
    used_a: typing.Set[Item] = set()
    found: typing.List[RuleMatch] = []

    successors: typing.Dict[Item, typing.List[Item]] = {}
    predecessors: typing.Dict[Item, typing.List[Item]] = {}

    def candidates(anchor):
        if anchor is None:
            return all_vertices
        u, _, direction = anchor
        w = vmap[u]
        if direction == 'out':
            if w not in successors:
                successors[w] = sorted_items({g.tgt[b] for b in g.out_arrows[w]})
            return successors[w]
        if w not in predecessors:
            predecessors[w] = sorted_items({g.src[b] for b in g.in_arrows[w]})
        return predecessors[w]

    def place_vertex(i, sigma):
        if i == len(plan.steps):
            m = Morphism(source=lhs, target=g, vmap=dict(vmap), amap=dict(amap), lmap=dict(sigma))
            if separation_holds(rule, m):
                found.append(RuleMatch(rule, m))
            return
        v, anchor, arrows = plan.steps[i]
        patterns = plan.patterns[v]
        for w in candidates(anchor):
            if w in used_v:
                continue
            if len(g.out_arrows[w]) < plan.out_degree[v] or len(g.in_arrows[w]) < plan.in_degree[v]:
                continue
            for extended in patterns.extensions(g.labels[w], sigma):
                vmap[v] = w
                used_v.add(w)
                place_arrows(i, arrows, 0, extended)
                del vmap[v]
                used_v.discard(w)

    def place_arrows(i, arrows, j, sigma):
        if j == len(arrows):
            place_vertex(i + 1, sigma)
            return
        a = arrows[j]
        patterns = plan.patterns[a]
        for b in g.between.get((vmap[lhs.src[a]], vmap[lhs.tgt[a]]), ()):
            if b in used_a:
                continue
            for extended in patterns.extensions(g.labels[b], sigma):
                amap[a] = b
                used_a.add(b)
                place_arrows(i, arrows, j + 1, extended)
                del amap[a]
                used_a.discard(b)

    place_vertex(0, {})
    found.sort()
    logger.log(logging.INFO - 1, f"Rule {rule.name}: {len(found)} matching(s)")
    return found


def enumerate_all(rs: RuleSet, g: Graph) -> typing.List[RuleMatch]:
    """Matches(𝓡, G), sorted by key."""
    out = []
    for r in rs:
        out.extend(enumerate_matchings(r, g))
    out.sort()
    return out
