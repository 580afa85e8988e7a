"""
Text format for signatures, graphs and rules.

    signature { sort T; const a: T; fn s(T): T; }
    graph G { node 1 {b}; node 2 {a, b}; edge 4: 1 -> 2 {a}; }
    rule r1 {
        vars u, v;
        L { node x {u}; ... }
        K { ... }
        R { ... }
    }

K and R refer to L's items by name. Ids containing `@` are reserved for
items created by rewriting. Without a `signature` block, every symbol is
declared on first use over a single sort.
"""
import collections
import dataclasses
import logging
import pathlib
import re
import typing

from funcparserlib.lexer import LexerError, Token, TokenSpec, make_tokenizer
from funcparserlib.parser import NoParseError, finished, forward_decl, many, maybe, some, tok

from .graph import Graph, Item, sorted_items
from .rules import Rule, RuleSet, UnknownName, validate_rule
from .terms import DEFAULT_SORT, Signature, SortError, Term, Var, sorted_terms, term_key


logger = logging.getLogger(__name__)


class DocumentError(ValueError):
    def __init__(self, msg: str, line: typing.Optional[int] = None, column: typing.Optional[int] = None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ''
        super().__init__(f"{where}{msg}")


@dataclasses.dataclass(frozen=True)
class Document:
    signature: Signature = dataclasses.field(default_factory=Signature)
    graphs: typing.Mapping[str, Graph] = dataclasses.field(default_factory=dict)
    rules: RuleSet = dataclasses.field(default_factory=RuleSet)

    def graph(self, name: str) -> Graph:
        try:
            return self.graphs[name]
        except KeyError:
            raise UnknownName(f"No graph named `{name}`") from None

    def rule(self, name: str) -> Rule:
        return self.rules.by_name(name)


SortDecl = collections.namedtuple('SortDecl', 'name')
SymbolDecl = collections.namedtuple('SymbolDecl', 'name args result')
SignatureDecl = collections.namedtuple('SignatureDecl', 'decls')
TermNode = collections.namedtuple('TermNode', 'head args')
NodeDecl = collections.namedtuple('NodeDecl', 'id labels')
EdgeDecl = collections.namedtuple('EdgeDecl', 'id src tgt labels')
GraphDecl = collections.namedtuple('GraphDecl', 'name items')
VarDecl = collections.namedtuple('VarDecl', 'name sort')
RuleDecl = collections.namedtuple('RuleDecl', 'name vars lhs kept rhs')

_BARE_ID = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_']*")


def tokenize(text: str) -> typing.List[Token]:
    specs = [
        TokenSpec('Space', r'[ \t\r\n]+'),
        TokenSpec('Comment', r'(#|//)[^\n]*'),
        TokenSpec('Op', r'->|[{}();,:]'),
        TokenSpec('Name', r"[A-Za-z0-9_][A-Za-z0-9_'@]*"),
        TokenSpec('String', r'"[^"\n]*"'),
    ]
    useless = ['Space', 'Comment']
    t = make_tokenizer(specs)
    try:
        return [x for x in t(text) if x.type not in useless]
    except LexerError as e:
        line, column = e.place
        raise DocumentError(f"Cannot tokenize: {e.msg!r}", line, column) from None


def _grammar():
    def kw(s):
        return tok('Name', s)

    def op(s):
        return tok('Op', s)

    def comma_list(p):
        return p + many(-op(',') + p) >> (lambda x: [x[0]] + x[1])

    name = some(lambda t: t.type == 'Name').named('name')
    ident = some(lambda t: t.type in ('Name', 'String')).named('id')

    term = forward_decl()
    term.define(name + maybe(-op('(') + comma_list(term) + -op(')'))
                >> (lambda x: TermNode(x[0], x[1] or [])))
    labels = -op('{') + maybe(comma_list(term)) + -op('}') >> (lambda x: x or [])

    node = -kw('node') + ident + maybe(labels) + -op(';') \
        >> (lambda x: NodeDecl(x[0], x[1] or []))
    edge = -kw('edge') + ident + -op(':') + ident + -op('->') + ident + maybe(labels) + -op(';') \
        >> (lambda x: EdgeDecl(x[0], x[1], x[2], x[3] or []))
    body = -op('{') + many(node | edge) + -op('}')

    sort_decl = -kw('sort') + name + -op(';') >> SortDecl
    const_decl = -kw('const') + name + -op(':') + name + -op(';') \
        >> (lambda x: SymbolDecl(x[0], [], x[1]))
    fn_decl = -kw('fn') + name + -op('(') + maybe(comma_list(name)) + -op(')') + -op(':') + name + -op(';') \
        >> (lambda x: SymbolDecl(x[0], x[1] or [], x[2]))
    signature = -kw('signature') + -op('{') + many(sort_decl | const_decl | fn_decl) + -op('}') \
        >> SignatureDecl

    graph = -kw('graph') + ident + body >> (lambda x: GraphDecl(x[0], x[1]))

    var_decl = name + maybe(-op(':') + name) >> (lambda x: VarDecl(x[0], x[1]))
    var_list = -kw('vars') + comma_list(var_decl) + -op(';')
    rule = -kw('rule') + ident + -op('{') + maybe(var_list) \
        + -kw('L') + body + -kw('K') + body + -kw('R') + body + -op('}') \
        >> (lambda x: RuleDecl(x[0], x[1] or [], x[2], x[3], x[4]))

    return many(signature | graph | rule) + -finished


_DOCUMENT = _grammar()


def _unquote(t: Token) -> str:
    if t.type == 'String':
        return t.value[1:-1]
    return t.value


def _fail(msg: str, t: Token):
    line, column = t.start
    raise DocumentError(msg, line, column)


class _Builder:
    def __init__(self, decls):
        self.decls = decls
        signatures = [d for d in decls if isinstance(d, SignatureDecl)]
        self.signature = Signature(implicit=not signatures)
        for s in signatures:
            self._declare(s)

    def _declare(self, s: SignatureDecl) -> None:
        for d in s.decls:
            if isinstance(d, SortDecl):
                self._guard(lambda: self.signature.declare_sort(d.name.value), d.name)
        for d in s.decls:
            if isinstance(d, SymbolDecl):
                self._guard(lambda: self.signature.declare_symbol(
                    d.name.value, [a.value for a in d.args], d.result.value), d.name)

    def _guard(self, make_signature, at: Token) -> None:
        try:
            self.signature = make_signature()
        except SortError as e:
            _fail(str(e), at)

    def term(self, node: TermNode, scope: typing.Mapping[str, Var]) -> Term:
        head = node.head.value
        if head in scope:
            if node.args:
                _fail(f"Variable `{head}` cannot be applied to arguments", node.head)
            return scope[head]
        if '@' in head:
            _fail(f"Symbol `{head}` uses the reserved `@` namespace", node.head)
        args = [self.term(a, scope) for a in node.args]
        try:
            if self.signature.implicit:
                self.signature = self.signature.infer(head, len(args))
            return self.signature.app(head, args)
        except SortError as e:
            _fail(str(e), node.head)

    def graph(self, items, scope: typing.Mapping[str, Var], at: Token) -> Graph:
        vertices, arrows = {}, {}
        for d in items:
            x = self.ident(d.id)
            if x in vertices or x in arrows:
                _fail(f"Duplicate id `{x}`", d.id)
            labels = [self.term(t, scope) for t in d.labels]
            if isinstance(d, NodeDecl):
                vertices[x] = labels
            else:
                arrows[x] = (self.ident(d.src), self.ident(d.tgt), labels)
        try:
            return Graph.build(vertices=vertices, arrows=arrows, varset=scope.values())
        except ValueError as e:
            _fail(str(e), at)

    @staticmethod
    def ident(t: Token) -> str:
        x = _unquote(t)
        if '@' in x:
            _fail(f"Id `{x}` uses the reserved `@` namespace", t)
        if not x:
            _fail("Empty id", t)
        return x

    def rule(self, d: RuleDecl) -> Rule:
        scope = {}
        for v in d.vars:
            sort = v.sort.value if v.sort is not None else DEFAULT_SORT
            if v.name.value in scope:
                _fail(f"Duplicate variable `{v.name.value}`", v.name)
            try:
                scope[v.name.value] = self.signature.var(v.name.value, sort)
            except SortError as e:
                _fail(str(e), v.name)
        name = self.ident(d.name)
        r = Rule(
            name=name,
            lhs=self.graph(d.lhs, scope, d.name),
            kept=self.graph(d.kept, scope, d.name),
            rhs=self.graph(d.rhs, scope, d.name),
            variables=frozenset(scope.values()),
        )
        problems = validate_rule(r)
        if problems:
            _fail(f"Invalid rule `{name}`: " + '; '.join(problems), d.name)
        return r

    def build(self) -> Document:
        graphs = {}
        rules = []
        rule_names = set()
        for d in self.decls:
            if isinstance(d, GraphDecl):
                name = self.ident(d.name)
                if name in graphs:
                    _fail(f"Duplicate graph `{name}`", d.name)
                graphs[name] = self.graph(d.items, {}, d.name)
            elif isinstance(d, RuleDecl):
                r = self.rule(d)
                if r.name in rule_names:
                    _fail(f"Duplicate rule `{r.name}`", d.name)
                rule_names.add(r.name)
                rules.append(r)
        try:
            rule_set = RuleSet(rules)
        except ValueError as e:
            raise DocumentError(str(e)) from None
        # Symbols declared in later graphs may clash with variables of earlier rules.
        for r in rules:
            for v in r.variables:
                if v.name in self.signature.symbols:
                    raise DocumentError(f"Variable `{v.name}` of rule `{r.name}` clashes with a symbol")
        return Document(signature=self.signature, graphs=graphs, rules=rule_set)


def parse_document(text: str) -> Document:
    """
    Raises:
        DocumentError: syntax, arity, sort or namespace violations, and
                       malformed graphs or rules.
    """
    tokens = tokenize(text)
    try:
        decls = _DOCUMENT.parse(tokens)
    except NoParseError as e:
        where = re.search(r'(\d+),(\d+)-', e.msg)
        if where:
            raise DocumentError(f"Syntax error: {e.msg}", int(where.group(1)), int(where.group(2))) from None
        raise DocumentError(f"Syntax error: {e.msg}") from None
    doc = _Builder(decls).build()
    logger.debug(f"Parsed {len(doc.graphs)} graph(s) and {len(doc.rules)} rule(s)")
    return doc


def load(path: typing.Union[str, pathlib.Path]) -> Document:
    return parse_document(pathlib.Path(path).read_text(encoding='utf-8'))


def format_id(x: Item) -> str:
    s = str(x)
    if _BARE_ID.fullmatch(s):
        return s
    return '"' + s + '"'


def _format_labels(terms) -> str:
    return '{' + ', '.join(str(t) for t in sorted_terms(terms)) + '}'


def format_graph_body(g: Graph, indent: str) -> typing.List[str]:
    lines = [f"{indent}node {format_id(v)} {_format_labels(g.labels[v])};"
             for v in sorted_items(g.vertices)]
    lines += [f"{indent}edge {format_id(a)}: {format_id(g.src[a])} -> {format_id(g.tgt[a])} "
              f"{_format_labels(g.labels[a])};"
              for a in sorted_items(g.arrows)]
    return lines


def format_graph(name: str, g: Graph) -> str:
    return '\n'.join([f"graph {format_id(name)} {{"] + format_graph_body(g, '    ') + ['}'])


def format_signature(sig: Signature) -> typing.Optional[str]:
    if not sig.symbols and sig.sorts == {DEFAULT_SORT}:
        return None
    lines = ['signature {']
    lines += [f"    sort {s};" for s in sorted(sig.sorts)]
    for name in sorted(sig.symbols):
        args, result = sig.symbols[name]
        if args:
            lines.append(f"    fn {name}({', '.join(args)}): {result};")
        else:
            lines.append(f"    const {name}: {result};")
    lines.append('}')
    return '\n'.join(lines)


def format_rule(r: Rule) -> str:
    lines = [f"rule {format_id(r.name)} {{"]
    if r.variables:
        decls = [v.name if v.sort == DEFAULT_SORT else f"{v.name}: {v.sort}"
                 for v in sorted(r.variables, key=term_key)]
        lines.append(f"    vars {', '.join(decls)};")
    for part, g in (('L', r.lhs), ('K', r.kept), ('R', r.rhs)):
        lines.append(f"    {part} {{")
        lines += format_graph_body(g, '        ')
        lines.append('    }')
    lines.append('}')
    return '\n'.join(lines)


def format_document(doc: Document) -> str:
    """Canonical text: parsing it gives back an equal document."""
    blocks = []
    signature = format_signature(doc.signature)
    if signature is not None:
        blocks.append(signature)
    blocks += [format_graph(name, g) for name, g in doc.graphs.items()]
    blocks += [format_rule(r) for r in doc.rules]
    return '\n\n'.join(blocks) + '\n' if blocks else ''
