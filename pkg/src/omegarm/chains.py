"""Graph and linear-algebra workhorses shared by the exact solvers.

Everything operates on an *action table*: ``table[s]`` is the sequence of
actions enabled in state ``s``, each a triple of aligned numpy arrays
``(targets, probs, rewards)``. A Markov chain is the induced special case
with one chosen row per state.

All solves are exact (dense LU) with checked residuals; the policy
iteration routines replace linear programming for max-reachability,
discounted, and total-reward objectives on these desk-scale models.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

SOLVE_RESIDUAL = 1e-10
BELLMAN_TOL = 1e-9
# minimal q-value gain before policy iteration switches an action; switching
# only on strict improvement is what makes the iterations cycle-free
IMPROVE_TOL = 1e-9

ActionRow = tuple[np.ndarray, np.ndarray, np.ndarray]
Table = list[list[ActionRow]]
Chain = list[ActionRow]


class SolverError(RuntimeError):
    """An exact solve failed its residual bound or hit an impossible case.

    This always indicates a bug or a violated precondition upstream, never
    an expected runtime condition.
    """


def make_row(targets, probs, rewards=None) -> ActionRow:
    t = np.asarray(targets, dtype=np.int64)
    p = np.asarray(probs, dtype=np.float64)
    r = np.zeros(len(t)) if rewards is None else np.asarray(rewards, dtype=np.float64)
    return (t, p, r)


def induce_chain(table: Table, policy) -> Chain:
    """Fix one action per state. ``policy[s]`` is an action index."""
    return [table[s][policy[s]] for s in range(len(table))]


def scc_labels(n: int, edges) -> tuple[int, np.ndarray]:
    """Strongly connected components of the graph given as (src, dst) pairs."""
    if not edges:
        return n, np.arange(n)
    src, dst = zip(*edges)
    data = np.ones(len(src), dtype=np.int8)
    graph = csr_matrix((data, (src, dst)), shape=(n, n))
    return connected_components(graph, directed=True, connection="strong")


def chain_edges(chain: Chain) -> list[tuple[int, int]]:
    out = []
    for s, (targets, _, _) in enumerate(chain):
        for t in targets:
            out.append((s, int(t)))
    return out


def bottom_states(chain: Chain) -> np.ndarray:
    """Boolean mask of states lying in a bottom SCC of the chain."""
    n = len(chain)
    n_comp, labels = scc_labels(n, chain_edges(chain))
    is_bottom_comp = np.ones(n_comp, dtype=bool)
    for s in range(n):
        for t in chain[s][0]:
            if labels[int(t)] != labels[s]:
                is_bottom_comp[labels[s]] = False
                break
    return is_bottom_comp[labels]


def backward_reachable(n: int, chain_or_table, targets) -> np.ndarray:
    """Mask of states with a path (possibly empty) into ``targets``.

    Accepts a chain or a full table; for a table any enabled action counts.
    """
    preds: list[list[int]] = [[] for _ in range(n)]
    for s, rows in enumerate(chain_or_table):
        if rows and isinstance(rows, tuple):
            rows = [rows]
        for row in rows:
            for t in row[0]:
                preds[int(t)].append(s)
    mask = np.zeros(n, dtype=bool)
    queue = deque()
    for t in targets:
        if not mask[t]:
            mask[t] = True
            queue.append(t)
    while queue:
        t = queue.popleft()
        for s in preds[t]:
            if not mask[s]:
                mask[s] = True
                queue.append(s)
    return mask


def _solve_checked(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        x = scipy.linalg.solve(a, b)
    except (scipy.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise SolverError(f"singular linear system: {exc}") from exc
    residual = np.max(np.abs(a @ x - b)) if len(b) else 0.0
    if residual > SOLVE_RESIDUAL:
        raise SolverError(f"linear solve residual {residual:.3e} exceeds {SOLVE_RESIDUAL}")
    return x


def dense_matrix(chain: Chain) -> np.ndarray:
    n = len(chain)
    mat = np.zeros((n, n))
    for s, (targets, probs, _) in enumerate(chain):
        np.add.at(mat[s], targets, probs)
    return mat


def expected_rewards(chain: Chain) -> np.ndarray:
    return np.array([float(np.dot(probs, rewards)) for _, probs, rewards in chain])


def chain_discounted_value(chain: Chain, lam: float) -> np.ndarray:
    """Solve v = r + lam * P v exactly. Requires lam < 1."""
    n = len(chain)
    mat = dense_matrix(chain)
    return _solve_checked(np.eye(n) - lam * mat, expected_rewards(chain))


def chain_total_value(chain: Chain) -> np.ndarray:
    """Expected total (undiscounted) reward of a chain.

    Finite only when every recurrent class is reward-free: the value is then
    zero on bottom SCCs and solves a nonsingular transient system elsewhere.
    A reward-bearing bottom SCC raises SolverError (diverging total reward).
    """
    n = len(chain)
    bottom = bottom_states(chain)
    for s in range(n):
        if bottom[s] and len(chain[s][2]) and np.max(np.abs(chain[s][2])) > 1e-9:
            raise SolverError(f"total reward diverges: recurrent state {s} has nonzero reward")
    v = np.zeros(n)
    transient = np.flatnonzero(~bottom)
    if len(transient):
        mat = dense_matrix(chain)
        sub = mat[np.ix_(transient, transient)]
        rhs = expected_rewards(chain)[transient]
        v[transient] = _solve_checked(np.eye(len(transient)) - sub, rhs)
    return v


def chain_reach_probability(chain: Chain, target_mask) -> np.ndarray:
    """Probability of ever visiting the target set, per start state."""
    n = len(chain)
    target_mask = np.asarray(target_mask, dtype=bool)
    can = backward_reachable(n, chain, np.flatnonzero(target_mask))
    p = np.zeros(n)
    p[target_mask] = 1.0
    inner = np.flatnonzero(can & ~target_mask)
    if len(inner):
        mat = dense_matrix(chain)
        sub = mat[np.ix_(inner, inner)]
        direct = mat[np.ix_(inner, np.flatnonzero(target_mask))].sum(axis=1)
        p[inner] = _solve_checked(np.eye(len(inner)) - sub, direct)
    return np.clip(p, 0.0, 1.0)


class _FlatTable:
    """Array-of-entries view of an action table for vectorised sweeps."""

    def __init__(self, table: Table):
        self.n_states = len(table)
        lengths = []
        targets = []
        probs = []
        rewards = []
        row_state = []
        row_ptr = [0]
        for rows in table:
            for t, p, r in rows:
                targets.append(t)
                probs.append(p)
                rewards.append(r)
                lengths.append(len(t))
            row_ptr.append(row_ptr[-1] + len(rows))
        self.n_rows = len(lengths)
        self.row_ptr = np.array(row_ptr)
        self.targets = np.concatenate(targets) if targets else np.zeros(0, dtype=np.int64)
        self.probs = np.concatenate(probs) if probs else np.zeros(0)
        self.rewards = np.concatenate(rewards) if rewards else np.zeros(0)
        self.entry_row = np.repeat(np.arange(self.n_rows), lengths)
        self.expected_reward = np.bincount(
            self.entry_row, weights=self.probs * self.rewards, minlength=self.n_rows
        )

    def q_values(self, v: np.ndarray, discount: float) -> np.ndarray:
        cont = np.bincount(
            self.entry_row, weights=self.probs * v[self.targets], minlength=self.n_rows
        )
        return self.expected_reward + discount * cont

    def state_max(self, q_rows: np.ndarray) -> np.ndarray:
        return np.maximum.reduceat(q_rows, self.row_ptr[:-1])

    def improve(self, q_rows: np.ndarray, policy: np.ndarray) -> bool:
        """Switch to the lowest-index action gaining more than IMPROVE_TOL.

        Switching only on strict improvement keeps the iteration cycle-free
        and, for total-reward models, prevents adopting tie actions that
        would close a value-overestimating recurrent class.
        """
        best = self.state_max(q_rows)
        current = q_rows[self.row_ptr[:-1] + policy]
        improvable = np.flatnonzero(best > current + IMPROVE_TOL)
        for s in improvable:
            lo, hi = self.row_ptr[s], self.row_ptr[s + 1]
            q = q_rows[lo:hi]
            policy[s] = int(np.flatnonzero(q >= best[s] - IMPROVE_TOL)[0])
        return len(improvable) > 0

    def check_bellman(self, v: np.ndarray, discount: float) -> None:
        residual = np.max(np.abs(self.state_max(self.q_values(v, discount)) - v))
        if residual > BELLMAN_TOL:
            raise SolverError(
                f"policy iteration ended with Bellman residual {residual:.3e}"
            )


def optimal_discounted(table: Table, lam: float) -> tuple[np.ndarray, list[int]]:
    """Policy iteration with exact solves for the discounted objective.

    A short value-iteration warm start picks the initial policy; the exact
    solves do the rest in a handful of rounds.
    """
    flat = _FlatTable(table)
    v = np.zeros(flat.n_states)
    for _ in range(200):
        new_v = flat.state_max(flat.q_values(v, lam))
        if np.max(np.abs(new_v - v)) < 1e-6:
            v = new_v
            break
        v = new_v
    policy = np.zeros(flat.n_states, dtype=np.int64)
    flat.improve(flat.q_values(v, lam), policy)
    v = chain_discounted_value(induce_chain(table, policy), lam)
    for _ in range(10000):
        if not flat.improve(flat.q_values(v, lam), policy):
            break
        v = chain_discounted_value(induce_chain(table, policy), lam)
    else:  # pragma: no cover
        raise SolverError("discounted policy iteration did not converge")
    flat.check_bellman(v, lam)
    return v, [int(a) for a in policy]


def optimal_total(table: Table) -> tuple[np.ndarray, list[int]]:
    """Policy iteration with exact solves for the total-reward objective.

    Sound on models where every strategy has finite value and recurrent
    classes are reward-free (reachability-style rewards, the two-phase
    reward translation); strict-improvement switching keeps new recurrent
    classes value-correct.
    """
    flat = _FlatTable(table)
    policy = np.zeros(flat.n_states, dtype=np.int64)
    v = chain_total_value(induce_chain(table, policy))
    for _ in range(10000):
        if not flat.improve(flat.q_values(v, 1.0), policy):
            break
        v = chain_total_value(induce_chain(table, policy))
    else:  # pragma: no cover
        raise SolverError("total-reward policy iteration did not converge")
    flat.check_bellman(v, 1.0)
    return v, [int(a) for a in policy]


def optimal_reach_probability(table: Table, target_mask) -> tuple[np.ndarray, list[int]]:
    """Maximal probability of reaching the target set, with a witness policy.

    Encoded as a total-reward problem: targets become absorbing and every
    transition into the target set pays 1 once.
    """
    n = len(table)
    target_mask = np.asarray(target_mask, dtype=bool)
    reach_table: Table = []
    for s in range(n):
        if target_mask[s]:
            reach_table.append([make_row([s], [1.0])])
        else:
            rows = []
            for targets, probs, _ in table[s]:
                rows.append((targets, probs, target_mask[targets].astype(np.float64)))
            reach_table.append(rows)
    v, policy = optimal_total(reach_table)
    p = np.clip(v, 0.0, 1.0)
    p[target_mask] = 1.0
    return p, policy
