from . import global_settings
from .__meta__ import __version__  # export package-wide
from .document import Document, DocumentError, format_document, load, parse_document
from .graph import FreshId, Graph, Labelling, Morphism, MorphismKind, classify, find_isomorphism, is_isomorphic
from .join import GroupTooLarge, NotJoinable, PermGroup, Permutation, aut_graph, join_family, join_graph, meet_graph
from .rewrite import Mode, find_conflict, full_step, is_regular, preserves, rewrite, rewrite_max, rewrite_min
from .rules import InvalidRule, Rule, RuleMatch, RuleSet, enumerate_all, enumerate_matchings
from .symmetry import aut_rule, classes, equivalent, select_representatives, step_modulo_aut
from .terms import App, Signature, SortError, Term, Var
