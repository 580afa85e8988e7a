"""
Conway's Game of Life as a rewrite system on a torus.

Every cell is a vertex labelled {1} (alive) or {0} (dead); neighbouring cells
are joined by a pair of opposite arrows. Three rules flip the state of a cell:
death by overpopulation, birth, and death by isolation. Survival needs no rule.
"""
import dataclasses
import functools
import logging
import typing

import numpy as np

from .graph import Graph
from .rewrite import Mode, full_step
from .rules import Rule, RuleMatch, RuleSet
from .stats import Stats
from .symmetry import step_modulo_aut
from .terms import DEFAULT_SORT, Signature


logger = logging.getLogger(__name__)

SIGNATURE = Signature().declare_symbol('0', [], DEFAULT_SORT).declare_symbol('1', [], DEFAULT_SORT)
DEAD = SIGNATURE.const('0')
ALIVE = SIGNATURE.const('1')

OFFSETS = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]

PRESETS = {
    'blinker': [(1, 2), (2, 2), (3, 2)],
    'block': [(1, 1), (1, 2), (2, 1), (2, 2)],
    'glider': [(0, 1), (1, 2), (2, 0), (2, 1), (2, 2)],
}

MODES = ('min', 'max', 'auto-min', 'auto-max')


@dataclasses.dataclass(frozen=True)
class LifeConfig:
    width: int = 5
    height: int = 5
    pattern: typing.Union[str, typing.Sequence[typing.Tuple[int, int]]] = 'blinker'
    steps: int = 1
    mode: str = 'max'

    def __post_init__(self):
        if self.width < 3 or self.height < 3:
            raise ValueError("A torus needs at least 3 rows and 3 columns for every cell "
                             "to have 8 distinct neighbours")
        if self.steps < 0:
            raise ValueError("Number of steps must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"Unknown mode `{self.mode}`, expected one of {', '.join(MODES)}")

    def cells(self) -> typing.FrozenSet[typing.Tuple[int, int]]:
        """
        Live cells as (row, column).

        Raises:
            ValueError: unknown preset, or a cell outside the board.
        """
        if isinstance(self.pattern, str):
            try:
                cells = PRESETS[self.pattern]
            except KeyError:
                raise ValueError(f"Unknown pattern `{self.pattern}`") from None
        else:
            cells = self.pattern
        for r, c in cells:
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise ValueError(f"Cell ({r}, {c}) is outside the {self.height}×{self.width} board")
        return frozenset(cells)


def parse_coords(s: str) -> typing.List[typing.Tuple[int, int]]:
    """`r,c;r,c;...` -> [(r, c), ...]"""
    out = []
    for pair in s.split(';'):
        pair = pair.strip()
        if not pair:
            continue
        try:
            r, c = (int(x) for x in pair.split(','))
        except ValueError:
            raise ValueError(f"Unrecognized cell `{pair}`, expected `row,column`") from None
        out.append((r, c))
    return out


def cell_id(r: int, c: int) -> str:
    return f"c{r}_{c}"


def _neighbourhood_rule(name: str, centre, neighbours: typing.Sequence, result) -> Rule:
    """
    Centre x labelled `centre` with one neighbour per entry of `neighbours`.
    Only the centre's label is deleted; R sets it to `result`.
    """
    vertices = {'x': [centre]}
    arrows = {}
    for i, state in enumerate(neighbours, start=1):
        n = f"n{i}"
        vertices[n] = [state]
        arrows[f"o{i}"] = ('x', n, [])
        arrows[f"i{i}"] = (n, 'x', [])
    lhs = Graph.build(vertices=vertices, arrows=arrows)
    kept_vertices = dict(vertices)
    kept_vertices['x'] = []
    kept = Graph.build(vertices=kept_vertices, arrows=arrows)
    rhs = Graph.build(vertices={'x': [result]})
    return Rule(name=name, lhs=lhs, kept=kept, rhs=rhs)


@functools.lru_cache(maxsize=None)
def life_rules() -> RuleSet:
    """The three rules; every call returns the same RuleSet."""
    return RuleSet([
        _neighbourhood_rule('overpopulation', ALIVE, [ALIVE] * 4, DEAD),
        _neighbourhood_rule('birth', DEAD, [ALIVE] * 3 + [DEAD] * 5, ALIVE),
        _neighbourhood_rule('isolation', ALIVE, [DEAD] * 7, DEAD),
    ])


def build_torus(cfg: LifeConfig) -> Graph:
    live = cfg.cells()
    vertices = {
        cell_id(r, c): [ALIVE if (r, c) in live else DEAD]
        for r in range(cfg.height) for c in range(cfg.width)
    }
    pairs = set()
    for r in range(cfg.height):
        for c in range(cfg.width):
            for dr, dc in OFFSETS:
                other = ((r + dr) % cfg.height, (c + dc) % cfg.width)
                pairs.add(tuple(sorted([(r, c), other])))
    arrows = {}
    for (r1, c1), (r2, c2) in pairs:
        arrows[f"e{r1}_{c1}_{r2}_{c2}"] = (cell_id(r1, c1), cell_id(r2, c2), [])
        arrows[f"e{r2}_{c2}_{r1}_{c1}"] = (cell_id(r2, c2), cell_id(r1, c1), [])
    return Graph.build(vertices=vertices, arrows=arrows)


def grid_from_config(cfg: LifeConfig) -> np.ndarray:
    grid = np.zeros((cfg.height, cfg.width), dtype=bool)
    for r, c in cfg.cells():
        grid[r, c] = True
    return grid


def cells_from_graph(g: Graph, width: int, height: int) -> np.ndarray:
    """
    Raises:
        ValueError: a cell is missing or is not labelled with exactly one state.
    """
    grid = np.zeros((height, width), dtype=bool)
    for r in range(height):
        for c in range(width):
            labels = g.labels.get(cell_id(r, c))
            if labels == {ALIVE}:
                grid[r, c] = True
            elif labels != {DEAD}:
                raise ValueError(f"Cell ({r}, {c}) has no single state: {labels}")
    return grid


def render(grid: np.ndarray) -> str:
    return '\n'.join(''.join('#' if alive else '.' for alive in row) for row in grid)


def reference_step(grid: np.ndarray) -> np.ndarray:
    """Conway's update rule on a torus, computed directly on the array."""
    neighbours = sum(
        np.roll(np.roll(grid.astype(int), dr, axis=0), dc, axis=1)
        for dr, dc in OFFSETS
    )
    return (grid & ((neighbours == 2) | (neighbours == 3))) | (~grid & (neighbours == 3))


def life_step(
        g: Graph,
        rules: RuleSet,
        mode: str = 'max',
        seed: typing.Optional[int] = None,
        stats: typing.Optional[Stats] = None,
) -> typing.Tuple[Graph, typing.List[RuleMatch], typing.List[RuleMatch]]:
    """
    One step in one of `MODES`: a full step, or with `auto-*` a step modulo
    automorphisms.

    Returns:
        (next graph, all matchings, matchings applied)
    """
    stats = stats if stats is not None else Stats()
    rewrite_mode = Mode.MIN if mode.endswith('min') else Mode.MAX
    if mode.startswith('auto'):
        after = step_modulo_aut(g, rules, rewrite_mode, seed=seed, stats=stats)
    else:
        after = full_step(g, rules, rewrite_mode, stats=stats)
    logger.info(f"Life step ({mode}): {len(stats.last_matches)} matching(s), {len(stats.last_applied)} applied")
    return after, stats.last_matches, stats.last_applied
