"""Labelled MDPs, positional strategies, and their exact chain analysis.

The model checker is cross-checked against the end-component oracle here,
so this module deliberately keeps two independent views of the same
structure: the action-table numerics in :mod:`omegarm.chains` and the
purely graph-theoretic MEC decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import chains

VALIDATION_TOL = 1e-9


@dataclass(frozen=True)
class MdpAction:
    """Named action with its probability distribution over target states."""

    name: str
    dist: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class Mdp:
    """Finite labelled MDP with per-state enabled actions.

    ``labels[s]`` is the set of atomic propositions true in state ``s``;
    ``actions[s]`` the tuple of actions enabled there. Instances are
    immutable and safe to share.
    """

    n_states: int
    init: int
    ap: tuple[str, ...]
    labels: tuple[frozenset[str], ...]
    actions: tuple[tuple[MdpAction, ...], ...]
    state_names: tuple[str, ...] | None = None

    def state_name(self, s: int) -> str:
        return self.state_names[s] if self.state_names else str(s)

    def action_table(self, rewards=None) -> chains.Table:
        """Numeric action table; ``rewards`` maps (s, a_idx, t) to a float."""
        table: chains.Table = []
        for s, acts in enumerate(self.actions):
            rows = []
            for j, act in enumerate(acts):
                targets = [t for t, _ in act.dist]
                probs = [p for _, p in act.dist]
                rew = None
                if rewards is not None:
                    rew = [rewards.get((s, j, t), 0.0) for t in targets]
                rows.append(chains.make_row(targets, probs, rew))
            table.append(rows)
        return table


@dataclass(frozen=True)
class PositionalStrategy:
    """Pure or mixed stationary strategy.

    ``choice[s]`` is either an action index (pure) or a dict mapping action
    indices to positive weights summing to 1 (mixed).
    """

    choice: tuple

    @classmethod
    def pure(cls, actions) -> "PositionalStrategy":
        return cls(tuple(int(a) for a in actions))

    @classmethod
    def uniform(cls, m: Mdp, allowed=None) -> "PositionalStrategy":
        out = []
        for s in range(m.n_states):
            idxs = list(allowed[s]) if allowed is not None else range(len(m.actions[s]))
            idxs = list(idxs)
            out.append({j: 1.0 / len(idxs) for j in idxs})
        return cls(tuple(out))

    def distribution(self, s: int) -> dict[int, float]:
        c = self.choice[s]
        if isinstance(c, dict):
            return c
        return {c: 1.0}


@dataclass(frozen=True)
class Mec:
    """Maximal end component: a closed, strongly connected sub-MDP."""

    states: frozenset[int]
    actions: tuple[tuple[int, tuple[int, ...]], ...]  # (state, kept action indices)

    def actions_of(self, s: int) -> tuple[int, ...]:
        for state, acts in self.actions:
            if state == s:
                return acts
        return ()


def validate(m: Mdp) -> list[str]:
    """All structural invariants, every violation reported (no short-circuit)."""
    errors = []
    if m.n_states < 1:
        errors.append("model must have at least one state")
    if not (0 <= m.init < m.n_states):
        errors.append(f"initial state {m.init} out of range")
    if len(m.labels) != m.n_states or len(m.actions) != m.n_states:
        errors.append("labels/actions must cover every state")
        return errors
    declared = set(m.ap)
    for s in range(m.n_states):
        for name in m.labels[s]:
            if name not in declared:
                errors.append(f"state {s}: label {name!r} not in the ap list")
        if not m.actions[s]:
            errors.append(f"state {s} has no enabled action")
        for act in m.actions[s]:
            mass = 0.0
            for t, p in act.dist:
                if not (0 <= t < m.n_states):
                    errors.append(f"state {s} action {act.name!r}: target {t} out of range")
                if p <= 0:
                    errors.append(f"state {s} action {act.name!r}: probability {p} not positive")
                mass += p
            if abs(mass - 1.0) > VALIDATION_TOL:
                errors.append(f"state {s} action {act.name!r}: probability mass {mass!r} != 1")
    return errors


def _strategy_chain(m: Mdp, sigma: PositionalStrategy, rewards=None) -> chains.Chain:
    chain: chains.Chain = []
    for s in range(m.n_states):
        mix: dict[int, float] = {}
        rew: dict[int, float] = {}
        for j, weight in sigma.distribution(s).items():
            act = m.actions[s][j]
            for t, p in act.dist:
                mix[t] = mix.get(t, 0.0) + weight * p
                if rewards is not None:
                    rew[t] = rew.get(t, 0.0) + weight * p * rewards.get((s, j, t), 0.0)
        targets = sorted(mix)
        probs = [mix[t] for t in targets]
        # fold the strategy/action mixture into a per-target expected reward
        step = [rew.get(t, 0.0) / mix[t] for t in targets] if rewards is not None else None
        chain.append(chains.make_row(targets, probs, step))
    return chain


def evaluate_positional(m: Mdp, sigma: PositionalStrategy, rewards, lam: float) -> np.ndarray:
    """Exact discounted value of ``sigma``: solves v = R + lam * P v.

    ``rewards`` maps (state, action index, target) triples to floats;
    missing triples are 0. Requires 0 <= lam < 1.
    """
    if not (0 <= lam < 1):
        raise ValueError(f"discount factor {lam} outside [0, 1)")
    return chains.chain_discounted_value(_strategy_chain(m, sigma, rewards), lam)


def buchi_prob_of_strategy(m: Mdp, sigma: PositionalStrategy, accepting) -> np.ndarray:
    """Probability that ``sigma`` generates a run taking accepting
    transitions infinitely often, per start state.

    ``accepting`` is a set of (state, action index, target) triples. In the
    induced chain this is the probability of reaching a bottom SCC that
    contains an accepting transition whose source, chosen action support,
    and target all lie inside it.
    """
    chain = _strategy_chain(m, sigma)
    n = m.n_states
    n_comp, labels = chains.scc_labels(n, chains.chain_edges(chain))
    bottom = chains.bottom_states(chain)
    good = np.zeros(n, dtype=bool)
    for s in range(n):
        if not bottom[s]:
            continue
        for j in sigma.distribution(s):
            for t, p in m.actions[s][j].dist:
                # inside a bottom SCC the chosen actions' support cannot leave
                # it, so membership of the target settles the whole triple
                if p > 0 and (s, j, t) in accepting and labels[t] == labels[s]:
                    good[s] = True
    return chains.chain_reach_probability(chain, good)


def mec_decomposition(m: Mdp) -> list[Mec]:
    """All maximal end components, by iterated SCC refinement.

    Repeatedly drops actions whose support leaves their state's current SCC
    and states left with no action; the surviving SCCs are the MECs. States
    in no MEC (transient under every strategy) are simply absent from the
    result.
    """
    alive = set(range(m.n_states))
    avail = {s: set(range(len(m.actions[s]))) for s in alive}
    while True:
        edges = []
        for s in alive:
            for j in avail[s]:
                for t, _ in m.actions[s][j].dist:
                    edges.append((s, t))
        _, labels = chains.scc_labels(m.n_states, edges)
        changed = False
        for s in list(alive):
            for j in list(avail[s]):
                if any(
                    t not in alive or labels[t] != labels[s]
                    for t, _ in m.actions[s][j].dist
                ):
                    avail[s].discard(j)
                    changed = True
            if not avail[s]:
                alive.discard(s)
                changed = True
        if not changed:
            break
    groups: dict[int, list[int]] = {}
    for s in alive:
        groups.setdefault(int(labels[s]), []).append(s)
    mecs = []
    for members in groups.values():
        members.sort()
        mecs.append(
            Mec(
                states=frozenset(members),
                actions=tuple((s, tuple(sorted(avail[s]))) for s in members),
            )
        )
    mecs.sort(key=lambda mec: min(mec.states))
    return mecs
