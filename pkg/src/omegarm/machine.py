"""Omega-regular reward machines: guarded, nondeterministic edges that
carry scalar rewards and accepting marks.

Acceptance lives on edges; a machine with all rewards zeroed is a plain
Buchi automaton, one with all accepting marks cleared is a plain reward
machine (see :func:`as_buchi` / :func:`as_reward_machine`).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

from .guards import GuardExpr, eval_guard
from .mdp import Mdp


@dataclass(frozen=True)
class MachineEdge:
    source: int
    guard: GuardExpr
    target: int
    reward: float
    accepting: bool


@dataclass(frozen=True)
class MachineStep:
    """One enabled move of the machine: target state, reward, accepting mark."""

    target: int
    reward: float
    accepting: bool


@dataclass(frozen=True)
class OmegaRewardMachine:
    """Machine over the alphabet 2^ap.

    The edge list may be nondeterministic: several edges of the same source
    may be enabled on the same label. Input-enabledness is only meaningful
    relative to a paired MDP and is checked by :func:`completeness_check`.
    """

    n_states: int
    init: int
    ap: tuple[str, ...]
    edges: tuple[MachineEdge, ...]

    def edges_from(self, u: int) -> tuple[MachineEdge, ...]:
        return tuple(e for e in self.edges if e.source == u)


def step(rm: OmegaRewardMachine, u: int, label) -> list[MachineStep]:
    """All enabled moves of the machine from ``u`` on ``label``, in edge
    declaration order. An empty result is returned as-is; the product
    construction treats it as a modelling error, other callers may not."""
    out = []
    for e in rm.edges:
        if e.source == u and eval_guard(e.guard, label):
            out.append(MachineStep(e.target, e.reward, e.accepting))
    return out


def completeness_check(rm: OmegaRewardMachine, m: Mdp) -> list[tuple[int, frozenset[str]]]:
    """Gaps (u, label) where the machine has no enabled edge.

    Enumerates the labels occurring on MDP-reachable states and the machine
    states reachable under any sequence of those labels; this
    over-approximates the pairs the product can actually visit, so an empty
    result guarantees the product construction cannot get stuck. Reports,
    never raises.
    """
    if tuple(rm.ap) != tuple(m.ap):
        raise ValueError("machine and MDP declare different ap lists")
    reachable_states = {m.init}
    queue = deque([m.init])
    while queue:
        s = queue.popleft()
        for act in m.actions[s]:
            for t, _ in act.dist:
                if t not in reachable_states:
                    reachable_states.add(t)
                    queue.append(t)
    labels = {m.labels[s] for s in reachable_states}

    reachable_u = {rm.init}
    queue = deque([rm.init])
    while queue:
        u = queue.popleft()
        for label in labels:
            for move in step(rm, u, label):
                if move.target not in reachable_u:
                    reachable_u.add(move.target)
                    queue.append(move.target)

    gaps = []
    for u in sorted(reachable_u):
        for label in sorted(labels, key=sorted):
            if not step(rm, u, label):
                gaps.append((u, label))
    return gaps


def as_buchi(rm: OmegaRewardMachine) -> OmegaRewardMachine:
    """Same structure with every reward zeroed."""
    return replace(rm, edges=tuple(replace(e, reward=0.0) for e in rm.edges))


def as_reward_machine(rm: OmegaRewardMachine) -> OmegaRewardMachine:
    """Same structure with every accepting mark cleared."""
    return replace(rm, edges=tuple(replace(e, accepting=False) for e in rm.edges))
