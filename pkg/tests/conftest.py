"""Shared generators and independent brute-force oracles.

The oracles here deliberately avoid the production algorithms they check:
end components by subset enumeration, almost-sure reachability by a
test-local alternation, acceptance values by strategy enumeration.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from omegarm.mdp import Mdp, MdpAction, PositionalStrategy, buchi_prob_of_strategy, mec_decomposition
from omegarm.product import ProductMdp


def random_mdp(rng: random.Random, max_states=8, max_actions=3, max_support=3) -> Mdp:
    n = rng.randint(1, max_states)
    actions = []
    for s in range(n):
        rows = []
        for j in range(rng.randint(1, max_actions)):
            support = rng.sample(range(n), rng.randint(1, min(max_support, n)))
            weights = [rng.uniform(0.1, 1.0) for _ in support]
            total = sum(weights)
            dist = tuple((t, w / total) for t, w in zip(support, weights))
            rows.append(MdpAction(f"a{j}", dist))
        actions.append(tuple(rows))
    return Mdp(
        n_states=n,
        init=rng.randrange(n),
        ap=(),
        labels=tuple(frozenset() for _ in range(n)),
        actions=tuple(actions),
    )


def random_product(rng: random.Random, max_states=8, max_actions=3, accept_prob=0.15) -> ProductMdp:
    m = random_mdp(rng, max_states, max_actions)
    rewards = {}
    accepting = set()
    for s in range(m.n_states):
        for j, act in enumerate(m.actions[s]):
            for t, _ in act.dist:
                rewards[(s, j, t)] = rng.uniform(-1.0, 2.0)
                if rng.random() < accept_prob:
                    accepting.add((s, j, t))
    return ProductMdp.from_parts(m, rewards, accepting)


def _strongly_connected_subset(m: Mdp, subset: frozenset[int], internal) -> bool:
    """Strong connectivity of `subset` using only the internal actions."""
    if len(subset) == 1:
        (s,) = subset
        return bool(internal[s])  # needs a closed action; self-loop connectivity is trivial
    succ = {
        s: {t for j in internal[s] for t, _ in m.actions[s][j].dist} for s in subset
    }
    start = next(iter(subset))

    def reach(start, edges):
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in edges.get(x, ()):
                if y in subset and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    if reach(start, succ) != subset:
        return False
    pred: dict[int, set[int]] = {s: set() for s in subset}
    for s, targets in succ.items():
        for t in targets:
            if t in subset:
                pred[t].add(s)
    return reach(start, pred) == subset


def brute_force_mec_states(m: Mdp) -> set[frozenset[int]]:
    """Maximal end components by exhaustive subset enumeration (|S| <= ~10)."""
    ecs = []
    states = list(range(m.n_states))
    for size in range(1, m.n_states + 1):
        for combo in itertools.combinations(states, size):
            subset = frozenset(combo)
            internal = {
                s: [
                    j
                    for j, act in enumerate(m.actions[s])
                    if all(t in subset for t, _ in act.dist)
                ]
                for s in subset
            }
            if any(not internal[s] for s in subset):
                continue
            if _strongly_connected_subset(m, subset, internal):
                ecs.append(subset)
    return {ec for ec in ecs if not any(ec < other for other in ecs)}


def almost_sure_reach(m: Mdp, targets: set[int]) -> set[int]:
    """Test-local oracle: states that can reach ``targets`` with probability
    one. Targets are treated as absorbing successes."""
    alive = set(range(m.n_states))
    avail = {
        s: (set() if s in targets else set(range(len(m.actions[s])))) for s in alive
    }
    while True:
        # backward reachability toward targets through allowed actions
        pred: dict[int, set[int]] = {s: set() for s in alive}
        for s in alive:
            for j in avail[s]:
                for t, _ in m.actions[s][j].dist:
                    if t in alive:
                        pred[t].add(s)
        reach = set(t for t in targets if t in alive)
        stack = list(reach)
        while stack:
            x = stack.pop()
            for s in pred[x]:
                if s not in reach:
                    reach.add(s)
                    stack.append(s)
        changed = alive - reach
        if not changed:
            return alive
        alive &= reach
        stack = list(changed)
        removed = set(changed)
        while stack:
            bad = stack.pop()
            for s in list(alive):
                for j in list(avail[s]):
                    if any(t == bad for t, _ in m.actions[s][j].dist):
                        avail[s].discard(j)
                if not avail[s] and s not in targets:
                    alive.discard(s)
                    if s not in removed:
                        removed.add(s)
                        stack.append(s)


def oracle_q1(product: ProductMdp) -> set[int]:
    """Almost-sure winning states via accepting MECs plus a.s. reachability."""
    m = product.mdp
    winning: set[int] = set()
    for mec in mec_decomposition(m):
        accepting_inside = any(
            (s, j, t) in product.accepting
            for s, acts in mec.actions
            for j in acts
            for t, _ in m.actions[s][j].dist
        )
        if accepting_inside:
            winning |= mec.states
    if not winning:
        return set()
    return almost_sure_reach(m, winning)


def enumerate_positional_optimum(product: ProductMdp) -> np.ndarray:
    """Best acceptance probability over all pure positional strategies."""
    m = product.mdp
    best = np.zeros(m.n_states)
    for combo in itertools.product(*(range(len(m.actions[s])) for s in range(m.n_states))):
        sigma = PositionalStrategy.pure(combo)
        best = np.maximum(best, buchi_prob_of_strategy(m, sigma, product.accepting))
    return best
