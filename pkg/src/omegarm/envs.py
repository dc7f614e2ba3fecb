"""Built-in environments, each generated as a validated ModelBundle.

``lemma1`` is the single-state letter-choice world where the per-step
reward and the acceptance objective pull apart; ``two_wecs`` offers two
accepting loops with different per-step rewards; ``office``/``office_zap``
reconstruct the patrol grid, the latter with the hazardous wire blocking
the short route between rooms A and B.

The office wall layout is read off the drawn figure; door openings and the
wire position are documented in the README, and the resulting product size
is this artifact's own reference number.
"""

from __future__ import annotations

from dataclasses import dataclass

from .guards import parse_guard
from .machine import MachineEdge, OmegaRewardMachine
from .mdp import Mdp, MdpAction
from .modelfile import ModelBundle


def _edge(ap, source, guard_text, target, reward=0.0, accepting=False) -> MachineEdge:
    return MachineEdge(source, parse_guard(guard_text, ap), target, float(reward), accepting)


def lemma1_env() -> ModelBundle:
    """One MDP state, one action, and a machine that lets the agent emit
    either a rewarding non-accepting letter or a free accepting one.

    The product has a single state with two actions; no positional strategy
    is optimal for both coordinates at once, but stitched strategies come
    arbitrarily close.
    """
    ap: tuple[str, ...] = ()
    m = Mdp(
        n_states=1,
        init=0,
        ap=ap,
        labels=(frozenset(),),
        actions=((MdpAction("emit", ((0, 1.0),)),),),
        state_names=("s0",),
    )
    machine = OmegaRewardMachine(
        n_states=1,
        init=0,
        ap=ap,
        edges=(
            _edge(ap, 0, "true", 0, reward=1.0, accepting=False),  # letter a
            _edge(ap, 0, "true", 0, reward=0.0, accepting=True),  # letter b
        ),
    )
    return ModelBundle(m, machine)


def two_wecs_env() -> ModelBundle:
    """Initial choice between two absorbing accepting loops whose letters
    pay 1 and 2 per step; six product states in total (a four-cycle and a
    self-loop)."""
    ap = ("LO", "HI")
    empty = frozenset()
    lo = frozenset(("LO",))
    hi = frozenset(("HI",))
    go = lambda t: (MdpAction("go", ((t, 1.0),)),)
    m = Mdp(
        n_states=6,
        init=0,
        ap=ap,
        labels=(empty, lo, lo, lo, lo, hi),
        actions=(
            (MdpAction("high", ((5, 1.0),)), MdpAction("low", ((1, 1.0),))),
            go(2),
            go(3),
            go(4),
            go(1),
            go(5),
        ),
        state_names=("choice", "lo0", "lo1", "lo2", "lo3", "hi"),
    )
    machine = OmegaRewardMachine(
        n_states=1,
        init=0,
        ap=ap,
        edges=(
            _edge(ap, 0, "LO", 0, reward=1.0, accepting=True),
            _edge(ap, 0, "HI", 0, reward=2.0, accepting=True),
            _edge(ap, 0, "!LO & !HI", 0),
        ),
    )
    defaults = {"f": 500, "alpha": 0.005, "epsilon": 0.2, "ep-n": 30000}
    return ModelBundle(m, machine, defaults)


@dataclass(frozen=True)
class GridSpec:
    """Office grid geometry: cell coordinates run x 0..width-1 (east),
    y 0..height-1 (north); walls block unordered cell-edge pairs."""

    width: int
    height: int
    walls: frozenset[tuple[tuple[int, int], tuple[int, int]]]
    home: tuple[int, int]
    wire: tuple[tuple[int, int], tuple[int, int]]  # blocked passage while unfixed
    corners: dict[str, tuple[int, int]]
    coffee: tuple[tuple[int, int], ...]
    mail: tuple[int, int]
    office: tuple[int, int]
    zap_prob: float = 0.2
    slip_prob: float = 0.0

    def check(self) -> None:
        cells = [self.home, self.mail, self.office, *self.coffee, *self.corners.values()]
        for x, y in cells:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"cell ({x},{y}) outside the {self.width}x{self.height} grid")
        if not (0 <= self.zap_prob <= 1):
            raise ValueError(f"zap probability {self.zap_prob} outside [0, 1]")


def _wall(a: tuple[int, int], b: tuple[int, int]):
    return (a, b) if a <= b else (b, a)


def office_grid() -> GridSpec:
    """The 12x9 patrol office: corner rooms A/B/C/D, a lower and an upper
    horizontal wall with door gaps, three interior vertical walls, and the
    dangling wire in the left door of the lower wall."""
    walls = set()
    for x in range(12):  # lower wall, rows 2|3, doors at columns 1 and 10
        if x not in (1, 10):
            walls.add(_wall((x, 2), (x, 3)))
    for x in (0, 2, 3, 5, 6, 8):  # upper wall, rows 5|6; columns 9-11 stay open
        walls.add(_wall((x, 5), (x, 6)))
    for col in (2, 5, 8):  # vertical walls with doors at rows 1 and 7
        for y in range(9):
            if y not in (1, 7):
                walls.add(_wall((col, y), (col + 1, y)))
    spec = GridSpec(
        width=12,
        height=9,
        walls=frozenset(walls),
        home=(2, 1),
        wire=_wall((1, 2), (1, 3)),
        corners={"A": (1, 1), "B": (1, 7), "C": (10, 7), "D": (10, 1)},
        coffee=((3, 6), (8, 2)),
        mail=(7, 4),
        office=(4, 4),
    )
    spec.check()
    return spec


_MOVES = (("N", 0, 1), ("S", 0, -1), ("E", 1, 0), ("W", -1, 0))


def office_env(zap: bool) -> ModelBundle:
    """Patrol grid with the A-B-C-D machine; ``zap`` adds the wire hazard.

    With zap, the wire passage is impassable until fixed; a ``fix`` action
    in the cell below the wire succeeds with probability 4/5 (setting a
    persistent bit that opens the passage) and otherwise moves to an
    absorbing damaged state. Movement is deterministic and blocked moves
    are no-ops.
    """
    grid = office_grid()
    ap = ("A", "B", "C", "D")
    corner_of = {cell: name for name, cell in grid.corners.items()}
    n_cells = grid.width * grid.height

    def cell_id(x: int, y: int) -> int:
        return y * grid.width + x

    def state_id(x: int, y: int, fixed: int) -> int:
        return fixed * n_cells + cell_id(x, y) if zap else cell_id(x, y)

    n_states = (2 * n_cells + 1) if zap else n_cells
    damaged = n_states - 1 if zap else None
    fix_cell = min(grid.wire)  # cell below the wire

    labels: list[frozenset[str]] = []
    actions: list[tuple[MdpAction, ...]] = []
    names: list[str] = []
    layers = (0, 1) if zap else (0,)
    for fixed in layers:
        for y in range(grid.height):
            for x in range(grid.width):
                name = corner_of.get((x, y))
                labels.append(frozenset((name,)) if name else frozenset())
                names.append(f"({x},{y})" + ("+fixed" if zap and fixed else ""))
                acts = []
                for move, dx, dy in _MOVES:
                    nx, ny = x + dx, y + dy
                    out = (
                        not (0 <= nx < grid.width and 0 <= ny < grid.height)
                        or _wall((x, y), (nx, ny)) in grid.walls
                        or (zap and not fixed and _wall((x, y), (nx, ny)) == grid.wire)
                    )
                    target = state_id(x, y, fixed) if out else state_id(nx, ny, fixed)
                    acts.append(MdpAction(move, ((target, 1.0),)))
                if zap and not fixed and (x, y) == fix_cell:
                    acts.append(
                        MdpAction(
                            "fix",
                            ((state_id(x, y, 1), 1.0 - grid.zap_prob), (damaged, grid.zap_prob)),
                        )
                    )
                actions.append(tuple(acts))
    if zap:
        labels.append(frozenset())
        names.append("damaged")
        actions.append((MdpAction("stay", ((damaged, 1.0),)),))

    m = Mdp(
        n_states=n_states,
        init=state_id(*grid.home, 0),
        ap=ap,
        labels=tuple(labels),
        actions=tuple(actions),
        state_names=tuple(names),
    )
    machine = OmegaRewardMachine(
        n_states=5,
        init=0,
        ap=ap,
        edges=(
            _edge(ap, 0, "!A", 0),
            _edge(ap, 0, "A", 1),
            _edge(ap, 1, "!B", 1),
            _edge(ap, 1, "B", 2),
            _edge(ap, 2, "!C", 2),
            _edge(ap, 2, "C", 3),
            _edge(ap, 3, "!D", 3),
            _edge(ap, 3, "D", 4),
            _edge(ap, 4, "true", 0, reward=1.0, accepting=True),
        ),
    )
    defaults = {"zeta": 0.5, "init": 7, "ep-l": 100, "ep-n": 350000} if zap else None
    return ModelBundle(m, machine, defaults)


ENVIRONMENTS = {
    "lemma1": lemma1_env,
    "two_wecs": two_wecs_env,
    "office": lambda: office_env(zap=False),
    "office_zap": lambda: office_env(zap=True),
}


def load_env(name: str) -> ModelBundle:
    if name not in ENVIRONMENTS:
        known = ", ".join(sorted(ENVIRONMENTS))
        raise ValueError(f"unknown environment {name!r} (valid names: {known})")
    return ENVIRONMENTS[name]()
