"""
Many-sorted terms with variables: the label algebra of every graph.

Terms are immutable values. Substitutions are plain dicts from `Var` to `Term`.
"""
import dataclasses
import functools
import logging
import typing


logger = logging.getLogger(__name__)

DEFAULT_SORT = 'T'


class SortError(TypeError):
    pass


class UnboundVariable(KeyError):
    pass


@functools.total_ordering
class Term:
    """
    Base class of `Var` and `App`.

    Terms are totally ordered by `term_key()`: variables first, then
    applications by symbol name and arguments.
    """
    __slots__ = ()

    def __lt__(self, other):
        if not isinstance(other, Term):
            return NotImplemented
        return term_key(self) < term_key(other)


@dataclasses.dataclass(frozen=True, eq=True)
class Var(Term):
    name: str
    sort: str = DEFAULT_SORT

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"<Var {self.name}:{self.sort}>"


@dataclasses.dataclass(frozen=True, eq=True)
class App(Term):
    symbol: str
    args: typing.Tuple[Term, ...] = ()
    # The result sort follows from the symbol, so it takes no part in equality.
    sort: str = dataclasses.field(default=DEFAULT_SORT, compare=False)

    def __str__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(str(a) for a in self.args)})"

    def __repr__(self):
        return f"<App {self}:{self.sort}>"


Substitution = typing.Dict[Var, Term]


@functools.lru_cache(maxsize=65536)
def term_key(t: Term) -> tuple:
    if isinstance(t, Var):
        return 0, t.name, t.sort
    return 1, t.symbol, tuple(term_key(a) for a in t.args)


def label_key(terms: typing.Iterable[Term]) -> tuple:
    """Canonical, comparable form of a set of terms."""
    return tuple(sorted(term_key(t) for t in terms))


def sorted_terms(terms: typing.Iterable[Term]) -> typing.List[Term]:
    return sorted(terms, key=term_key)


def variables(t: Term) -> typing.FrozenSet[Var]:
    if isinstance(t, Var):
        return frozenset([t])
    out = frozenset()
    for a in t.args:
        out |= variables(a)
    return out


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    return all(is_ground(a) for a in t.args)


def apply(sigma: typing.Mapping[Var, Term], t: Term) -> Term:
    """
    Homomorphic extension of `sigma` applied to `t`.

    Raises:
        UnboundVariable: `t` contains a variable outside `sigma`'s domain.
    """
    if isinstance(t, Var):
        try:
            return sigma[t]
        except KeyError:
            raise UnboundVariable(f"Variable `{t.name}` is not bound") from None
    if not t.args:
        return t
    return App(t.symbol, tuple(apply(sigma, a) for a in t.args), t.sort)


def match_term(
        pattern: Term,
        ground: Term,
        partial: typing.Optional[typing.Mapping[Var, Term]] = None,
) -> typing.Optional[Substitution]:
    """
    One-sided matching of `pattern` against the ground term `ground`.

    Returns the least extension of `partial` that makes `pattern` equal to
    `ground`, or None when there is none. `partial` is never modified.

    Raises:
        SortError: a variable of one sort would be bound to a term of another.
    """
    sigma = dict(partial) if partial is not None else {}
    if _match_into(pattern, ground, sigma):
        return sigma
    return None


def _match_into(pattern: Term, ground: Term, sigma: Substitution) -> bool:
    if isinstance(pattern, Var):
        if pattern.sort != ground.sort:
            raise SortError(f"Variable `{pattern.name}` of sort {pattern.sort} "
                            f"cannot match `{ground}` of sort {ground.sort}")
        bound = sigma.get(pattern)
        if bound is None:
            sigma[pattern] = ground
            return True
        return bound == ground
    if not isinstance(ground, App) \
            or pattern.symbol != ground.symbol \
            or len(pattern.args) != len(ground.args):
        return False
    for p, g in zip(pattern.args, ground.args):
        if not _match_into(p, g, sigma):
            return False
    return True


def subterms(t: Term) -> typing.FrozenSet[Term]:
    out = {t}
    if isinstance(t, App):
        for a in t.args:
            out |= subterms(a)
    return frozenset(out)


@dataclasses.dataclass(frozen=True)
class Signature:
    """
    Sorts and function symbols.

    With `implicit` set, symbols are declared on first use over the default
    sort; this is how documents without a `signature` block are read.
    """
    sorts: typing.FrozenSet[str] = frozenset([DEFAULT_SORT])
    symbols: typing.Mapping[str, typing.Tuple[typing.Tuple[str, ...], str]] = \
        dataclasses.field(default_factory=dict)
    implicit: bool = dataclasses.field(default=False, compare=False)

    def declare_sort(self, name: str) -> 'Signature':
        if name in self.symbols:
            raise SortError(f"`{name}` is already a symbol")
        return dataclasses.replace(self, sorts=self.sorts | {name})

    def declare_symbol(
            self,
            name: str,
            arg_sorts: typing.Sequence[str],
            result: str,
    ) -> 'Signature':
        arity = (tuple(arg_sorts), result)
        for s in (*arg_sorts, result):
            if s not in self.sorts:
                raise SortError(f"Undeclared sort `{s}` in declaration of `{name}`")
        if name in self.sorts:
            raise SortError(f"`{name}` is already a sort")
        existing = self.symbols.get(name)
        if existing is not None and existing != arity:
            raise SortError(f"Symbol `{name}` redeclared with a different arity")
        symbols = dict(self.symbols)
        symbols[name] = arity
        return dataclasses.replace(self, symbols=symbols)

    def infer(self, name: str, arity: int) -> 'Signature':
        """Declare `name` over the default sort if not known yet."""
        if name in self.symbols:
            return self
        if not self.implicit:
            raise SortError(f"Undeclared symbol `{name}`")
        logger.debug(f"Inferring symbol {name}/{arity}")
        return self.declare_symbol(name, [DEFAULT_SORT] * arity, DEFAULT_SORT)

    def app(self, symbol: str, args: typing.Sequence[Term] = ()) -> App:
        try:
            arg_sorts, result = self.symbols[symbol]
        except KeyError:
            raise SortError(f"Undeclared symbol `{symbol}`") from None
        if len(arg_sorts) != len(args):
            raise SortError(f"`{symbol}` takes {len(arg_sorts)} argument(s), "
                            f"got {len(args)}")
        for expected, a in zip(arg_sorts, args):
            if a.sort != expected:
                raise SortError(f"Argument `{a}` of `{symbol}` has sort {a.sort}, "
                                f"expected {expected}")
        return App(symbol, tuple(args), result)

    def const(self, symbol: str) -> App:
        return self.app(symbol, ())

    def var(self, name: str, sort: str = DEFAULT_SORT) -> Var:
        if name in self.symbols or name in self.sorts:
            raise SortError(f"Variable name `{name}` clashes with a symbol or sort")
        if sort not in self.sorts:
            raise SortError(f"Undeclared sort `{sort}` for variable `{name}`")
        return Var(name, sort)

    def check(self, t: Term) -> None:
        """Raises SortError unless `t` is well-sorted over this signature."""
        if isinstance(t, Var):
            if t.sort not in self.sorts:
                raise SortError(f"Undeclared sort `{t.sort}` for variable `{t.name}`")
            return
        for a in t.args:
            self.check(a)
        rebuilt = self.app(t.symbol, t.args)
        if rebuilt.sort != t.sort:
            raise SortError(f"`{t}` has sort {t.sort}, expected {rebuilt.sort}")
