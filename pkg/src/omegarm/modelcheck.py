"""Exact model checking of the combined acceptance-then-discounted objective.

Pipeline on a known product: qualitative analysis finds the almost-sure
winning region and a witness strategy; quantitative analysis extends it to
optimal acceptance probabilities via policy iteration with exact solves
(same optimum as the minimising linear program); pruning drops every
state-action pair that loses acceptance probability; the discounted
optimum over the pruned action sets and a stitched finite-memory strategy
realise near-optimality, since a single strategy attaining both optima may
not exist.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import chains
from .mdp import Mdp, MdpAction, PositionalStrategy, buchi_prob_of_strategy, evaluate_positional
from .product import ProductMdp

SAFE_ACTION_TOL = 1e-9


@dataclass(frozen=True)
class BuchiSolution:
    """Optimal acceptance probabilities with their safe-action structure.

    ``p[q]`` is the optimal probability of taking accepting transitions
    infinitely often from ``q``; ``q1`` the states where it is 1;
    ``safe_actions[q]`` the actions preserving ``p``; ``witness`` a
    positional strategy achieving ``p`` everywhere.
    """

    p: np.ndarray
    q1: frozenset[int]
    safe_actions: tuple[tuple[int, ...], ...]
    witness: tuple[int, ...]


@dataclass(frozen=True)
class PrunedProduct:
    """Action-subset view of a product after removing unsafe pairs."""

    product: ProductMdp
    kept: tuple[tuple[int, ...], ...]
    alive: frozenset[int]

    def to_mdp(self) -> Mdp:
        """Materialise the pruned sub-MDP (mainly for validation)."""
        old = self.product.mdp
        if len(self.alive) != old.n_states:
            raise ValueError("pruning removed states; materialisation unsupported")
        return Mdp(
            n_states=old.n_states,
            init=old.init,
            ap=old.ap,
            labels=old.labels,
            actions=tuple(
                tuple(old.actions[s][j] for j in self.kept[s]) for s in range(old.n_states)
            ),
            state_names=old.state_names,
        )


@dataclass(frozen=True)
class DiscountedSolution:
    """Optimal discounted values over the pruned action sets.

    ``tau`` is greedy with lowest-index tie-breaking, in original action
    indices of the unpruned product.
    """

    rho: np.ndarray
    tau: tuple[int, ...]


@dataclass(frozen=True)
class StitchedStrategy:
    """Play ``head`` for the first ``switch_step`` product steps, ``tail``
    afterwards (both positional, original action indices)."""

    switch_step: int
    head: tuple[int, ...]
    tail: tuple[int, ...]


def qualitative(product: ProductMdp) -> tuple[frozenset[int], dict[int, int]]:
    """Almost-sure winning region and a witness strategy on it.

    Alternates two removals to a fixed point: drop states from which no
    accepting transition is reachable with positive probability, then
    recursively drop state-action pairs leading to dropped states (and
    states left without actions). The surviving states are exactly those
    from which acceptance can be forced with probability 1; the witness
    always has positive probability of taking an accepting transition
    within a bounded number of steps while staying inside.
    """
    m = product.mdp
    n = m.n_states
    alive = np.ones(n, dtype=bool)
    avail = [set(range(len(m.actions[s]))) for s in range(n)]
    witness: dict[int, int] = {}
    while True:
        # states carrying a currently usable accepting transition
        sources: dict[int, int] = {}
        for (s, j, t) in product.accepting:
            if alive[s] and alive[t] and j in avail[s]:
                if s not in sources or j < sources[s]:
                    sources[s] = j
        # backward reachability toward those sources; remember one forward
        # action per state: that is the witness strategy of this round
        dist: dict[int, int] = {}
        round_witness: dict[int, int] = {}
        queue = deque()
        for s, j in sources.items():
            dist[s] = 0
            round_witness[s] = j
            queue.append(s)
        preds: dict[int, list[tuple[int, int]]] = {t: [] for t in range(n)}
        for s in range(n):
            if not alive[s]:
                continue
            for j in avail[s]:
                for t, _ in m.actions[s][j].dist:
                    if alive[t]:
                        preds[t].append((s, j))
        while queue:
            t = queue.popleft()
            for s, j in preds[t]:
                if s not in dist:
                    dist[s] = dist[t] + 1
                    round_witness[s] = j
                    queue.append(s)
        changed = False
        for s in range(n):
            if alive[s] and s not in dist:
                alive[s] = False
                changed = True
        # recursively drop pairs reaching dropped states
        drop_queue = deque(np.flatnonzero(~alive))
        dropped = set(int(x) for x in drop_queue)
        while drop_queue:
            bad = drop_queue.popleft()
            for s in range(n):
                if not alive[s]:
                    continue
                for j in list(avail[s]):
                    if any(t == bad for t, _ in m.actions[s][j].dist):
                        avail[s].discard(j)
                        changed = True
                if not avail[s]:
                    alive[s] = False
                    if s not in dropped:
                        dropped.add(s)
                        drop_queue.append(s)
        witness = round_witness
        if not changed:
            break
    q1 = frozenset(int(s) for s in np.flatnonzero(alive))
    return q1, {s: witness[s] for s in q1}


def quantitative(product: ProductMdp) -> BuchiSolution:
    """Optimal acceptance probabilities from every state.

    The probabilities are the least fixed point of the max-reachability
    equations toward the almost-sure region, computed by policy iteration
    with exact solves; safe actions are those within SAFE_ACTION_TOL of the
    state value.
    """
    m = product.mdp
    n = m.n_states
    q1, q1_witness = qualitative(product)
    table = m.action_table()
    target_mask = np.zeros(n, dtype=bool)
    for s in q1:
        target_mask[s] = True
    p, reach_policy = chains.optimal_reach_probability(table, target_mask)

    safe: list[tuple[int, ...]] = []
    witness: list[int] = []
    for s in range(n):
        keep = []
        for j, (targets, probs, _) in enumerate(table[s]):
            p_sa = float(np.dot(probs, p[targets]))
            if abs(p_sa - p[s]) <= SAFE_ACTION_TOL:
                keep.append(j)
        safe.append(tuple(keep))
        if s in q1:
            witness.append(q1_witness[s])
        elif p[s] > 0:
            witness.append(reach_policy[s])
        else:
            witness.append(keep[0] if keep else 0)
    return BuchiSolution(p=p, q1=q1, safe_actions=tuple(safe), witness=tuple(witness))


def prune(product: ProductMdp, sol: BuchiSolution) -> PrunedProduct:
    """Keep only acceptance-preserving actions; then drop states with no
    action left, repeating until stable. (With exact safe sets every state
    retains its value-achieving action, so the state loop is a safeguard.)"""
    m = product.mdp
    kept = [set(sol.safe_actions[s]) for s in range(m.n_states)]
    alive = set(range(m.n_states))
    changed = True
    while changed:
        changed = False
        for s in list(alive):
            for j in list(kept[s]):
                if any(t not in alive for t, _ in m.actions[s][j].dist):
                    kept[s].discard(j)
                    changed = True
            if not kept[s] and s in alive:
                alive.discard(s)
                changed = True
    return PrunedProduct(
        product=product,
        kept=tuple(tuple(sorted(kept[s])) for s in range(m.n_states)),
        alive=frozenset(alive),
    )


def discounted_optimal(pruned: PrunedProduct, lam: float) -> DiscountedSolution:
    """Optimal discounted values over the pruned action sets.

    Values are NaN on states pruned away entirely (none, in practice).
    """
    if not (0 <= lam < 1):
        raise ValueError(f"discount factor {lam} outside [0, 1)")
    product = pruned.product
    m = product.mdp
    n = m.n_states
    if not pruned.alive:
        raise ValueError("pruned product is empty")
    alive = sorted(pruned.alive)
    pos = {s: i for i, s in enumerate(alive)}
    table: chains.Table = []
    for s in alive:
        rows = []
        for j in pruned.kept[s]:
            targets = [pos[t] for t, _ in m.actions[s][j].dist]
            probs = [p for _, p in m.actions[s][j].dist]
            rewards = [product.rewards.get((s, j, t), 0.0) for t, _ in m.actions[s][j].dist]
            rows.append(chains.make_row(targets, probs, rewards))
        table.append(rows)
    values, policy = chains.optimal_discounted(table, lam)

    rho = np.full(n, np.nan)
    tau = []
    for i, s in enumerate(alive):
        rho[s] = values[i]
    for s in range(n):
        if s in pruned.alive:
            # greedy with lowest-index tie-breaking over original indices
            best_j = None
            best_q = -math.inf
            for j in pruned.kept[s]:
                q_val = sum(
                    p * (product.rewards.get((s, j, t), 0.0) + lam * rho[t])
                    for t, p in m.actions[s][j].dist
                )
                if q_val > best_q + SAFE_ACTION_TOL:
                    best_q = q_val
                    best_j = j
            tau.append(best_j)
        else:
            tau.append(0)
    return DiscountedSolution(rho=rho, tau=tuple(tau))


def stitch_steps(lam: float, eps: float, rmax: float) -> int:
    """Smallest k with lam**k * rmax / (1 - lam) <= eps (0 when rmax is 0)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if rmax == 0:
        return 0
    bound = rmax / (1.0 - lam)
    if bound <= eps:
        return 0
    return max(0, math.ceil(math.log(eps / bound) / math.log(lam)))


def stitch(
    sol: BuchiSolution, disc: DiscountedSolution, lam: float, eps: float, rmax: float
) -> StitchedStrategy:
    """Discount-greedy head for k steps, acceptance-optimal tail after."""
    return StitchedStrategy(
        switch_step=stitch_steps(lam, eps, rmax), head=disc.tau, tail=sol.witness
    )


def evaluate_stitched(
    product: ProductMdp, st: StitchedStrategy, lam: float
) -> tuple[float, float]:
    """Exact acceptance probability and discounted value of a stitched
    strategy from the initial state.

    Works on the finite-memory chain over (state, steps taken): the head
    phase is propagated forward step by step, the tail contributes its
    exactly solved value and acceptance probability at the switch point.
    Acceptance is a tail event, so only the tail strategy's probability
    matters.
    """
    m = product.mdp
    n = m.n_states
    head = PositionalStrategy.pure(st.head)
    tail = PositionalStrategy.pure(st.tail)
    v_tail = evaluate_positional(m, tail, product.rewards, lam)
    b_tail = buchi_prob_of_strategy(m, tail, product.accepting)

    p_head = np.zeros((n, n))
    r_head = np.zeros(n)
    for s in range(n):
        j = st.head[s]
        for t, p in m.actions[s][j].dist:
            p_head[s, t] += p
            r_head[s] += p * product.rewards.get((s, j, t), 0.0)

    mu = np.zeros(n)
    mu[m.init] = 1.0
    value = 0.0
    scale = 1.0
    for _ in range(st.switch_step):
        value += scale * float(mu @ r_head)
        mu = mu @ p_head
        scale *= lam
    value += scale * float(mu @ v_tail)
    psat = float(mu @ b_tail)
    return psat, value


@dataclass(frozen=True)
class ModelCheckResult:
    """Everything the pipeline produces for one product and discount."""

    product: ProductMdp
    lam: float
    buchi: BuchiSolution
    pruned: PrunedProduct
    discounted: DiscountedSolution

    @property
    def blike(self) -> np.ndarray:
        return self.buchi.p

    @property
    def bval(self) -> np.ndarray:
        return self.discounted.rho

    @property
    def rmax(self) -> float:
        prod = self.product
        m = prod.mdp
        best = 0.0
        for s in range(m.n_states):
            for j in self.pruned.kept[s]:
                for t, _ in m.actions[s][j].dist:
                    best = max(best, abs(prod.rewards.get((s, j, t), 0.0)))
        return best

    def stitched(self, eps: float) -> StitchedStrategy:
        return stitch(self.buchi, self.discounted, self.lam, eps, self.rmax)


def model_check(product: ProductMdp, lam: float) -> ModelCheckResult:
    """Run the full pipeline: qualitative, quantitative, prune, discounted."""
    sol = quantitative(product)
    pruned = prune(product, sol)
    disc = discounted_optimal(pruned, lam)
    return ModelCheckResult(
        product=product, lam=lam, buchi=sol, pruned=pruned, discounted=disc
    )


def values_csv(result: ModelCheckResult) -> str:
    """CSV rows (state, p, rho, safe action list), state index ascending."""
    m = result.product.mdp
    lines = ["state,p,rho,safe_actions"]
    for s in range(m.n_states):
        names = ";".join(m.actions[s][j].name for j in result.buchi.safe_actions[s])
        rho = result.discounted.rho[s]
        rho_text = f"{rho:.12g}" if not math.isnan(rho) else "nan"
        lines.append(f"{s},{result.buchi.p[s]:.12g},{rho_text},{names}")
    return "\n".join(lines) + "\n"


def strategy_text(m: Mdp, strategy) -> str:
    """Line-oriented strategy dump: one ``state -> action`` line per state."""
    lines = []
    for s in range(m.n_states):
        j = strategy[s]
        lines.append(f"{s} -> {m.actions[s][j].name}")
    return "\n".join(lines) + "\n"
