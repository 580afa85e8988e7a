import argparse
import json
import logging
import sys

from parallel_rewrite import __version__, global_settings
from parallel_rewrite.document import Document, DocumentError, format_document, format_graph, load
from parallel_rewrite.graph import find_isomorphism, sorted_items
from parallel_rewrite.join import GroupTooLarge, aut_graph
from parallel_rewrite.life import (
    MODES, PRESETS, LifeConfig, build_torus, cells_from_graph, grid_from_config, life_rules,
    life_step, parse_coords, reference_step, render,
)
from parallel_rewrite.rewrite import Mode, find_conflict, full_step
from parallel_rewrite.rules import UnknownName, enumerate_all, enumerate_matchings
from parallel_rewrite.stats import Stats
from parallel_rewrite.symmetry import aut_rule, classes, step_modulo_aut

logging.getLogger(None).setLevel(logging.INFO + 1)  # Set just above INFO
log_file_handler = logging.StreamHandler()
log_file_handler.setFormatter(logging.Formatter(
    fmt="[%(name)s %(levelname)s] %(message)s"
))
logging.getLogger(None).addHandler(log_file_handler)
logger = logging.getLogger(None)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


def emit(data) -> None:
    print(json.dumps(data, indent=2, ensure_ascii=False))


def _document_to_dict(doc: Document) -> dict:
    return {
        'signature': {
            'sorts': sorted(doc.signature.sorts),
            'symbols': {name: {'args': list(args), 'result': result}
                        for name, (args, result) in sorted(doc.signature.symbols.items())},
        },
        'graphs': {name: g.to_dict() for name, g in doc.graphs.items()},
        'rules': [{
            'name': r.name,
            'vars': sorted(v.name for v in r.variables),
            'L': r.lhs.to_dict(),
            'K': r.kept.to_dict(),
            'R': r.rhs.to_dict(),
        } for r in doc.rules],
    }


def cmd_parse(args) -> int:
    doc = load(args.file)
    if args.json:
        emit(_document_to_dict(doc))
    else:
        print(format_document(doc), end='')
    return EXIT_OK


def cmd_match(args) -> int:
    doc = load(args.file)
    g = doc.graph(args.graph)
    if args.rule is not None:
        matches = enumerate_matchings(doc.rule(args.rule), g)
    else:
        matches = enumerate_all(doc.rules, g)
    logger.log(logging.INFO + 1, f"{len(matches)} matching(s) in graph {args.graph}")

    if args.classes:
        found = classes(matches)
        if args.json:
            emit([{'representative': c.representative.to_dict(), 'size': len(c)} for c in found])
        else:
            for c in found:
                print(f"[{len(c)}] {c.representative}")
        return EXIT_OK

    if args.json:
        emit([m.to_dict() for m in matches])
    else:
        for m in matches:
            print(m)
    return EXIT_OK


def cmd_step(args) -> int:
    doc = load(args.file)
    g = doc.graph(args.graph)
    mode = Mode(args.mode)
    if args.seed is not None and not args.modulo_aut:
        logger.warning("--seed only affects --modulo-aut; ignoring")
    stats = Stats()
    for i in range(args.steps):
        if args.modulo_aut:
            g = step_modulo_aut(g, doc.rules, mode, seed=args.seed, stats=stats)
        else:
            g = full_step(g, doc.rules, mode, stats=stats)
        logger.info(f"Step {i + 1}: applied {len(stats.last_applied)} of {len(stats.last_matches)} matching(s)")
    logger.log(logging.INFO + 1, stats.summary())

    if args.json:
        emit(g.to_dict())
    else:
        print(format_graph(args.graph, g))
    return EXIT_OK


def cmd_check_regular(args) -> int:
    doc = load(args.file)
    matches = enumerate_all(doc.rules, doc.graph(args.graph))
    conflict = find_conflict(matches)
    if args.json:
        emit({
            'matchings': len(matches),
            'regular': conflict is None,
            'conflict': None if conflict is None else [m.to_dict() for m in conflict],
        })
    elif conflict is None:
        print(f"regular ({len(matches)} matchings)")
    else:
        mu, nu = conflict
        print("not regular")
        print(f"  {mu}")
        print(f"  does not preserve")
        print(f"  {nu}")
    return EXIT_OK if conflict is None else EXIT_FAILED


def cmd_aut(args) -> int:
    doc = load(args.file)
    if args.rule is not None:
        group = aut_rule(doc.rule(args.rule)).group
    else:
        group = aut_graph(doc.graph(args.graph))
    if args.json:
        emit({'order': group.order, 'elements': [str(p) for p in group]})
    else:
        print(f"order {group.order}")
        for p in group:
            print(p)
    return EXIT_OK


def cmd_iso(args) -> int:
    doc = load(args.file)
    iso = find_isomorphism(doc.graph(args.graph), doc.graph(args.other))
    if args.json:
        emit({
            'isomorphic': iso is not None,
            'mapping': None if iso is None else {
                str(x): str(iso(x)) for x in sorted_items(list(iso.vmap) + list(iso.amap))
            },
        })
    elif iso is None:
        print("not isomorphic")
    else:
        print(iso)
    return EXIT_OK if iso is not None else EXIT_FAILED


def cmd_life(args) -> int:
    cfg = LifeConfig(
        width=args.width,
        height=args.height,
        pattern=parse_coords(args.cells) if args.cells is not None else args.pattern,
        steps=args.steps,
        mode=args.mode,
    )
    rules = life_rules()
    g = build_torus(cfg)
    grid = grid_from_config(cfg)
    stats = Stats()
    frames = [render(grid)]
    report = []
    ok = True
    for i in range(cfg.steps):
        g, matches, applied = life_step(g, rules, cfg.mode, seed=args.seed, stats=stats)
        step_report = {'step': i + 1, 'matchings': len(matches), 'applied': len(applied)}
        grid_after = cells_from_graph(g, cfg.width, cfg.height)
        if args.verify:
            expected = reference_step(grid)
            step_report['oracle'] = bool((expected == grid_after).all())
            step_report['regular'] = find_conflict(matches) is None
            if not (step_report['oracle'] and step_report['regular']):
                logger.error(f"Step {i + 1} failed verification: {step_report}")
                ok = False
        grid = grid_after
        frames.append(render(grid))
        report.append(step_report)
    logger.log(logging.INFO + 1, stats.summary())

    if args.json:
        emit({'frames': [f.split('\n') for f in frames], 'steps': report})
    else:
        for i, frame in enumerate(frames):
            print(f"step {i}:")
            print(frame)
            print()
    return EXIT_OK if ok else EXIT_FAILED


def main(args=None):
    """
    Main entry point.

    Args:
        args : list
            A of arguments as if they were input in the command line. Leave it
            None to use sys.argv.

    Returns:
        exit code: 0 on success, 1 when a check fails, 2 on bad input.
    """

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--json', action='store_true',
                        help="Emit machine-readable JSON instead of text")

    parser = argparse.ArgumentParser('parallel-rewrite',
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter,
                                     description="Parallel rewriting of term-labelled graphs: "
                                                 "matching, full parallel steps, regularity checks "
                                                 "and rewriting modulo rule automorphisms.")
    parser.add_argument('--version', '-V', action='version', version=f"parallel_rewrite v{__version__}")
    parser.add_argument('--verbose', '-v', action='count', default=0,
                        help="Increase verbosity, can be used multiple times for increased verbosity")
    parser.add_argument('--max-group-order', type=int, default=global_settings.max_group_order,
                        help="Abort automorphism group enumeration above this many elements")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('parse', parents=[common], help="Parse a document and print it in canonical form")
    p.add_argument('file')
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser('match', parents=[common], help="List the matchings of the rules in a graph")
    p.add_argument('file')
    p.add_argument('--graph', required=True)
    p.add_argument('--rule', help="Only this rule (default: all rules)")
    p.add_argument('--classes', action='store_true',
                   help="Group matchings into classes modulo rule automorphisms")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser('step', parents=[common], help="Rewrite a graph with all matchings at once")
    p.add_argument('file')
    p.add_argument('--graph', required=True)
    p.add_argument('--mode', choices=[m.value for m in Mode], default=Mode.MAX.value,
                   help="min: deletion takes priority; max: preservation takes priority")
    p.add_argument('--steps', type=int, default=1)
    p.add_argument('--modulo-aut', action='store_true',
                   help="Apply one matching per class modulo rule automorphisms")
    p.add_argument('--seed', type=int,
                   help="Pick class representatives at random with this seed instead of the least one")
    p.add_argument('--normalize-fresh', action='store_true',
                   help="Rename created items to @1, @2, ... after every step")
    p.set_defaults(func=cmd_step)

    p = sub.add_parser('check-regular', parents=[common],
                       help="Check whether the matchings in a graph preserve each other (exit 1 if not)")
    p.add_argument('file')
    p.add_argument('--graph', required=True)
    p.set_defaults(func=cmd_check_regular)

    p = sub.add_parser('aut', parents=[common], help="Automorphism group of a rule or a graph")
    p.add_argument('file')
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument('--rule')
    which.add_argument('--graph')
    p.set_defaults(func=cmd_aut)

    p = sub.add_parser('iso', parents=[common], help="Find an isomorphism between two graphs (exit 1 if none)")
    p.add_argument('file')
    p.add_argument('--graph', required=True)
    p.add_argument('--other', required=True)
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser('life', parents=[common], help="Run Conway's Game of Life on a torus",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument('--width', type=int, default=5)
    p.add_argument('--height', type=int, default=5)
    p.add_argument('--pattern', choices=sorted(PRESETS), default='blinker')
    p.add_argument('--cells', metavar="R,C;R,C",
                   help="Live cells as row,column pairs (overrides --pattern)")
    p.add_argument('--steps', type=int, default=1)
    p.add_argument('--mode', choices=MODES, default='max',
                   help="auto-* modes apply one matching per class modulo rule automorphisms")
    p.add_argument('--seed', type=int)
    p.add_argument('--verify', action='store_true',
                   help="Compare every step with a direct array computation and check regularity")
    p.set_defaults(func=cmd_life)

    args = parser.parse_args(args)

    for i in range(0, args.verbose):
        logging.getLogger(None).setLevel(logging.getLogger(None).level - 1)

    global_settings.max_group_order = args.max_group_order
    if getattr(args, 'normalize_fresh', False):
        global_settings.normalize_fresh = True

    try:
        return args.func(args)
    except UnknownName as e:
        logger.error(e.args[0] if e.args else str(e))
        return EXIT_INPUT
    except (DocumentError, OSError, ValueError) as e:
        logger.error(str(e))
        return EXIT_INPUT
    except GroupTooLarge as e:
        logger.error(str(e))
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
