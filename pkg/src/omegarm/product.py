"""Synchronous product of a labelled MDP with a reward machine.

Product states are (MDP state, machine state) pairs; product actions fold
the machine's nondeterministic choice into the action space, so the agent
resolves it. Only the fragment reachable from the initial pair is built.
"""

from __future__ import annotations

from dataclasses import dataclass

from .machine import MachineStep, OmegaRewardMachine, step
from .mdp import Mdp, MdpAction


class IncompleteMachineError(ValueError):
    """The machine had no enabled edge on a reachable (state, label) pair."""

    def __init__(self, gaps):
        self.gaps = list(gaps)
        listing = ", ".join(f"(u{u}, {{{' '.join(sorted(label))}}})" for u, label in self.gaps)
        super().__init__(f"machine is incomplete on reachable pairs: {listing}")


@dataclass(frozen=True)
class ProductMdp:
    """Explicit product with transition rewards and accepting transitions.

    ``mdp`` holds the pair states and folded actions; ``rewards`` maps
    (state, action index, target) to the machine edge's reward and
    ``accepting`` is the set of accepting transition triples. ``state_pairs``
    and ``action_pairs`` map back to the factors; they are None for raw
    instances assembled via :meth:`from_parts` (random test models).
    """

    mdp: Mdp
    rewards: dict
    accepting: frozenset
    state_pairs: tuple[tuple[int, int], ...] | None = None
    action_pairs: tuple[tuple[tuple[int, MachineStep], ...], ...] | None = None
    base: Mdp | None = None
    machine: OmegaRewardMachine | None = None

    @classmethod
    def from_parts(cls, mdp: Mdp, rewards=None, accepting=()) -> "ProductMdp":
        return cls(mdp=mdp, rewards=dict(rewards or {}), accepting=frozenset(accepting))

    @property
    def n_states(self) -> int:
        return self.mdp.n_states

    def max_abs_reward(self) -> float:
        return max((abs(r) for r in self.rewards.values()), default=0.0)


def _distinct_steps(moves: list[MachineStep]) -> list[MachineStep]:
    """Drop exact duplicates, keep declaration order; steps differing in
    reward or accepting mark stay distinct choices."""
    seen = set()
    out = []
    for move in moves:
        key = (move.target, move.reward, move.accepting)
        if key not in seen:
            seen.add(key)
            out.append(move)
    return out


def build_product(m: Mdp, rm: OmegaRewardMachine) -> ProductMdp:
    """Explicit reachable product from the initial pair.

    Action ordering is MDP-action-major, machine-step-minor in declaration
    order; state indices follow breadth-first discovery, so the construction
    is deterministic. Raises IncompleteMachineError listing every (machine
    state, label) gap encountered during exploration.
    """
    if tuple(m.ap) != tuple(rm.ap):
        raise ValueError("machine and MDP declare different ap lists")
    index: dict[tuple[int, int], int] = {}
    pairs: list[tuple[int, int]] = []

    def intern(pair: tuple[int, int]) -> int:
        if pair not in index:
            index[pair] = len(pairs)
            pairs.append(pair)
        return index[pair]

    intern((m.init, rm.init))
    actions: list[tuple[MdpAction, ...]] = []
    action_pairs: list[tuple[tuple[int, MachineStep], ...]] = []
    rewards: dict = {}
    accepting: set = set()
    gaps: dict[tuple[int, frozenset[str]], None] = {}
    q = 0
    while q < len(pairs):  # intern() appends, so this is a worklist sweep
        s, u = pairs[q]
        label = m.labels[s]
        moves = _distinct_steps(step(rm, u, label))
        if not moves:
            gaps[(u, label)] = None
            actions.append(())
            action_pairs.append(())
            q += 1
            continue
        target_count: dict[int, int] = {}
        for move in moves:
            target_count[move.target] = target_count.get(move.target, 0) + 1
        rows: list[MdpAction] = []
        row_pairs: list[tuple[int, MachineStep]] = []
        for a_idx, act in enumerate(m.actions[s]):
            ordinal: dict[int, int] = {}
            for move in moves:
                k = ordinal.get(move.target, 0)
                ordinal[move.target] = k + 1
                suffix = f".{k}" if target_count[move.target] > 1 else ""
                name = f"{act.name}/{move.target}{suffix}"
                dist = tuple((intern((t, move.target)), p) for t, p in act.dist)
                j = len(rows)
                rows.append(MdpAction(name, dist))
                row_pairs.append((a_idx, move))
                for q2, _ in dist:
                    rewards[(q, j, q2)] = move.reward
                    if move.accepting:
                        accepting.add((q, j, q2))
        actions.append(tuple(rows))
        action_pairs.append(tuple(row_pairs))
        q += 1
    if gaps:
        raise IncompleteMachineError(sorted(gaps, key=lambda g: (g[0], sorted(g[1]))))
    names = tuple(f"({m.state_name(s)},{u})" for s, u in pairs)
    product_mdp = Mdp(
        n_states=len(pairs),
        init=0,
        ap=m.ap,
        labels=tuple(m.labels[s] for s, _ in pairs),
        actions=tuple(actions),
        state_names=names,
    )
    return ProductMdp(
        mdp=product_mdp,
        rewards=rewards,
        accepting=frozenset(accepting),
        state_pairs=tuple(pairs),
        action_pairs=tuple(action_pairs),
        base=m,
        machine=rm,
    )


class DisabledActionError(ValueError):
    """A step was requested with an action not enabled at the current state."""


class LazyProduct:
    """On-the-fly product walker: one episode, one owner.

    Steps are sampled with a caller-supplied random generator and agree
    exactly with the explicit product's distributions, rewards, and
    accepting marks.
    """

    def __init__(self, m: Mdp, rm: OmegaRewardMachine):
        if tuple(m.ap) != tuple(rm.ap):
            raise ValueError("machine and MDP declare different ap lists")
        self.mdp = m
        self.machine = rm
        self.state = (m.init, rm.init)

    def reset(self) -> tuple[int, int]:
        self.state = (self.mdp.init, self.machine.init)
        return self.state

    def enabled(self) -> list[tuple[int, MachineStep]]:
        """Product actions at the current pair, in the explicit ordering."""
        s, u = self.state
        moves = _distinct_steps(step(self.machine, u, self.mdp.labels[s]))
        return [(a_idx, move) for a_idx in range(len(self.mdp.actions[s])) for move in moves]

    def step(self, a_idx: int, u_next: int, rng, pick: int = 0):
        """Take MDP action ``a_idx`` jointly with the machine move to
        ``u_next``; ``pick`` selects among distinct parallel moves to the
        same target. Returns ((s', u'), reward, accepting flag)."""
        s, u = self.state
        if not (0 <= a_idx < len(self.mdp.actions[s])):
            raise DisabledActionError(f"action {a_idx} not enabled in state {s}")
        moves = [
            mv
            for mv in _distinct_steps(step(self.machine, u, self.mdp.labels[s]))
            if mv.target == u_next
        ]
        if pick >= len(moves):
            raise DisabledActionError(
                f"machine cannot move {u} -> {u_next} on label "
                f"{{{' '.join(sorted(self.mdp.labels[s]))}}}"
            )
        move = moves[pick]
        dist = self.mdp.actions[s][a_idx].dist
        draw = rng.random()
        acc = 0.0
        s_next = dist[-1][0]
        for t, p in dist:
            acc += p
            if draw < acc:
                s_next = t
                break
        self.state = (s_next, move.target)
        return self.state, move.reward, move.accepting
