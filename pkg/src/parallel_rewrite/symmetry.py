"""
Rule automorphisms and rewriting modulo automorphisms.

Two matchings of a rule are equivalent when one is the other composed with
an automorphism of the rule; rewriting with one representative per class
yields isomorphic results whichever representatives are picked.
"""
import dataclasses
import functools
import logging
import random
import typing

from .graph import Graph, Morphism, MorphismKind, classify
from .join import Permutation, PermGroup, aut_relative
from .rewrite import Mode, rewrite
from .rules import Rule, RuleMatch, RuleSet, enumerate_all
from .stats import Stats


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class RuleAut:
    rule: Rule
    group: PermGroup

    @property
    def order(self) -> int:
        return self.group.order


@dataclasses.dataclass(frozen=True)
class MatchClass:
    representative: RuleMatch
    members: typing.Tuple[RuleMatch, ...]

    def __len__(self):
        return len(self.members)


@functools.lru_cache(maxsize=None)
def aut_rule(rule: Rule) -> RuleAut:
    """
    Aut(r): the permutations of L⊔R stabilizing L, K and R, restricted to L.

    Raises:
        GroupTooLarge: see `join.aut_relative`.
    """
    parts = (rule.lhs, rule.kept, rule.rhs)
    stabilizer = aut_relative(rule.union, parts)
    for p in stabilizer:
        for part in parts:
            if classify(p.to_morphism(part)) != MorphismKind.ISOMORPHISM:
                raise RuntimeError(f"{p} does not map a part of rule `{rule.name}` onto itself")
    group = stabilizer.restrict(rule.lhs.vertices, rule.lhs.arrows, rule.variables)
    logger.log(logging.INFO - 1, f"Aut({rule.name}): {group.summary()}")
    return RuleAut(rule=rule, group=group)


def apply_automorphism(mu: RuleMatch, sigma: Permutation) -> RuleMatch:
    """μ∘σ"""
    m = mu.morphism
    return RuleMatch(mu.rule, Morphism(
        source=m.source,
        target=m.target,
        vmap={x: m.vmap[sigma(x)] for x in m.vmap},
        amap={a: m.amap[sigma(a)] for a in m.amap},
        lmap={v: m.lmap[sigma(v)] for v in m.lmap},
    ))


def equivalent(mu: RuleMatch, nu: RuleMatch) -> bool:
    if mu.rule is not nu.rule:
        return False
    return any(apply_automorphism(mu, sigma) == nu for sigma in aut_rule(mu.rule).group)


def classes(matches: typing.Iterable[RuleMatch]) -> typing.List[MatchClass]:
    """
    The ≈-classes of `matches`, each computed as μ∘Aut(r_μ) and listed by
    representative (the least member).
    """
    out = []
    seen = set()
    for mu in sorted(matches):
        if mu.key in seen:
            continue
        aut = aut_rule(mu.rule)
        members = {}
        for sigma in aut.group:
            nu = apply_automorphism(mu, sigma)
            members[nu.key] = nu
        if aut.order % len(members) != 0:
            raise RuntimeError(f"Class of {mu} has {len(members)} members, "
                               f"which does not divide |Aut({mu.rule.name})| = {aut.order}")
        substitution = list(mu.substitution.values())
        if len(set(substitution)) == len(substitution) and len(members) != aut.order:
            raise RuntimeError(f"Class of injective {mu} has {len(members)} members, "
                               f"expected {aut.order}")
        ordered = tuple(sorted(members.values()))
        seen.update(members)
        out.append(MatchClass(representative=ordered[0], members=ordered))
    out.sort(key=lambda c: c.representative.key)
    for c in out:
        logger.log(logging.INFO - 2, f"Class of {len(c)} with representative {c.representative}")
    return out


def select_representatives(
        matches: typing.Iterable[RuleMatch],
        seed: typing.Optional[int] = None,
) -> typing.List[RuleMatch]:
    """
    One matching per class: the least one, or with `seed` a member picked at
    random.
    """
    cs = classes(matches)
    if seed is None:
        return [c.representative for c in cs]
    rng = random.Random(seed)
    return sorted(rng.choice(c.members) for c in cs)


def step_modulo_aut(
        g: Graph,
        rs: RuleSet,
        mode: Mode = Mode.MAX,
        seed: typing.Optional[int] = None,
        stats: typing.Optional[Stats] = None,
) -> Graph:
    """One step of parallel rewriting modulo automorphisms."""
    matches = enumerate_all(rs, g)
    representatives = select_representatives(matches, seed=seed)
    logger.info(f"Step modulo automorphisms ({mode.value}): {len(representatives)} class(es) "
                f"out of {len(matches)} matching(s)")
    if stats is not None:
        stats.step(matches, representatives)
    return rewrite(g, representatives, mode)
