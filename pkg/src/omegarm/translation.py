"""Two-phase total-reward translation of a product MDP.

The translated MDP runs two copies of the product plus a trap state ``t``.
Copy 0 is the discount phase: base rewards are paid undiscounted, and each
step stays in copy 0 with probability lam and leaks to copy 1 with
probability 1 - lam, so the expected total reward collected in copy 0
equals the lam-discounted value. Copy 1 is the acceptance phase: rewards
are zero except that every traversal of an accepting base transition
diverts to the trap with probability 1 - zeta, paying f on entry; the trap
is absorbing with reward 0.

With zeta close to 1 the optimal copy-1 value approaches f times the
optimal acceptance probability, and with f large the copy-0 value
approaches the sum of the discounted optimum and that term, so one exact
(or learned) solve of this MDP recovers both coordinates of the combined
objective.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from . import chains
from .product import DisabledActionError, ProductMdp


@dataclass(frozen=True)
class TranslatedAction:
    """Sampling-ready row: aligned targets, probabilities (plus running
    totals), rewards, and accepting-traversal flags."""

    name: str
    targets: tuple[int, ...]
    probs: tuple[float, ...]
    cum: tuple[float, ...]
    rewards: tuple[float, ...]
    accepting: tuple[bool, ...]


def copy0_index(q: int) -> int:
    return q


def copy1_index(q: int, n: int) -> int:
    return n + q


def trap_index(n: int) -> int:
    return 2 * n


@dataclass(frozen=True)
class TranslatedMdp:
    """Explicit translated MDP over (q, copy) pairs plus the trap state.

    State indexing: q is (q, 0), n + q is (q, 1), 2n is the trap, where n
    is the number of product states. Copy 0 and copy 1 share the product's
    per-state action sets; the trap has a single self-loop.
    """

    product: ProductMdp
    lam: float
    zeta: float
    f: float
    action_specs: tuple[tuple[TranslatedAction, ...], ...]

    @property
    def n_base(self) -> int:
        return self.product.mdp.n_states

    @property
    def n_states(self) -> int:
        return 2 * self.product.mdp.n_states + 1

    @property
    def initial(self) -> int:
        return copy0_index(self.product.mdp.init)

    @property
    def trap(self) -> int:
        return trap_index(self.n_base)

    def state_name(self, i: int) -> str:
        n = self.n_base
        if i == self.trap:
            return "t"
        copy = 0 if i < n else 1
        return f"({self.product.mdp.state_name(i % n)},{copy})"

    def sample(self, state: int, action: int, rng) -> tuple[int, float, bool]:
        """One random step; returns (next state, reward, flag signalling a
        traversal of an accepting base transition in copy 1)."""
        rows = self.action_specs[state]
        if not (0 <= action < len(rows)):
            raise DisabledActionError(f"action {action} not enabled in translated state {state}")
        row = rows[action]
        i = bisect_right(row.cum, rng.random())
        if i >= len(row.targets):  # guard against cum rounding a hair under 1
            i = len(row.targets) - 1
        return row.targets[i], row.rewards[i], row.accepting[i]

    def action_table(self) -> chains.Table:
        return [
            [chains.make_row(row.targets, row.probs, row.rewards) for row in rows]
            for rows in self.action_specs
        ]


@dataclass(frozen=True)
class TotalValueSolution:
    """Optimal expected total reward of a translated MDP with a witness."""

    v: np.ndarray
    witness: tuple[int, ...]


def _cumulative(probs) -> tuple[float, ...]:
    out = []
    total = 0.0
    for p in probs:
        total += p
        out.append(total)
    return tuple(out)


def translate(product: ProductMdp, lam: float, zeta: float, f: float) -> TranslatedMdp:
    """Build the explicit translated MDP.

    Requires lam in (0,1) and f >= 1. zeta = 0 is accepted as a boundary
    case (the first accepting traversal in copy 1 goes straight to the
    trap) alongside the usual zeta in (0,1).
    """
    if not (0 < lam < 1):
        raise ValueError(f"lam must lie in (0, 1), got {lam}")
    if not (0 <= zeta < 1):
        raise ValueError(f"zeta must lie in [0, 1), got {zeta}")
    if f < 1:
        raise ValueError(f"f must be >= 1, got {f}")
    m = product.mdp
    n = m.n_states
    trap = trap_index(n)
    specs: list[tuple[TranslatedAction, ...]] = []
    for q in range(n):  # copy 0: pay base rewards, leak to copy 1
        rows = []
        for j, act in enumerate(m.actions[q]):
            targets: list[int] = []
            probs: list[float] = []
            rewards: list[float] = []
            for t, p in act.dist:
                r = product.rewards.get((q, j, t), 0.0)
                targets.append(copy0_index(t))
                probs.append(lam * p)
                rewards.append(r)
                targets.append(copy1_index(t, n))
                probs.append((1.0 - lam) * p)
                rewards.append(r)
            rows.append(
                TranslatedAction(
                    act.name,
                    tuple(targets),
                    tuple(probs),
                    _cumulative(probs),
                    tuple(rewards),
                    (False,) * len(targets),
                )
            )
        specs.append(tuple(rows))
    for q in range(n):  # copy 1: reward-free except the trap payoff
        rows = []
        for j, act in enumerate(m.actions[q]):
            targets = []
            probs = []
            rewards = []
            flags: list[bool] = []
            trap_mass = 0.0
            for t, p in act.dist:
                if (q, j, t) in product.accepting:
                    trap_mass += (1.0 - zeta) * p
                    if zeta > 0.0:
                        targets.append(copy1_index(t, n))
                        probs.append(zeta * p)
                        rewards.append(0.0)
                        flags.append(True)
                else:
                    targets.append(copy1_index(t, n))
                    probs.append(p)
                    rewards.append(0.0)
                    flags.append(False)
            if trap_mass > 0.0:
                targets.append(trap)
                probs.append(trap_mass)
                rewards.append(f)
                flags.append(True)
            rows.append(
                TranslatedAction(
                    act.name,
                    tuple(targets),
                    tuple(probs),
                    _cumulative(probs),
                    tuple(rewards),
                    tuple(flags),
                )
            )
        specs.append(tuple(rows))
    specs.append(
        (
            TranslatedAction(
                "stay", (trap,), (1.0,), (1.0,), (0.0,), (False,)
            ),
        )
    )
    return TranslatedMdp(product=product, lam=lam, zeta=zeta, f=f, action_specs=tuple(specs))


def solve_total(tm: TranslatedMdp) -> TotalValueSolution:
    """Optimal expected total reward, solved exactly by policy iteration.

    The value exists and is finite for every strategy: copy 0 leaks mass
    1 - lam per step, copy 1 pays only the one-off trap entry, and the trap
    is absorbing and reward-free.
    """
    v, policy = chains.optimal_total(tm.action_table())
    return TotalValueSolution(v=v, witness=tuple(policy))
