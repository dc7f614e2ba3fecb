"""Tabular Q-learning on the translated MDP, plus exact certification.

Learning is model-free (it only touches the sampler), deterministic per
seed, and never trusted: the greedy strategy is re-evaluated exactly on
the known model, and the report compares it against the model-checked
optimum.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from . import modelcheck
from .product import ProductMdp
from .translation import TranslatedMdp


@dataclass(frozen=True)
class Hyperparams:
    """Learning knobs; defaults match the evaluation table's default row.

    ``lam`` is the external discount embedded in the translation, ``gamma``
    the learner's own discount on the translated total-reward MDP; they are
    independent. ``ep_len`` is the number of steps without an accepting
    traversal in copy 1 that must be exceeded for an episode to reset.
    """

    f: float = 10.0
    zeta: float = 0.99
    gamma: float = 0.999
    alpha: float = 0.01
    epsilon: float = 0.1
    init: float = 0.0
    ep_len: int = 20
    ep_num: int = 20000
    lam: float = 0.99
    seed: int = 0

    def validate(self) -> list[str]:
        errors = []
        if not (0 < self.gamma <= 1):
            errors.append(f"gamma {self.gamma} outside (0, 1]")
        if not (0 < self.alpha <= 1):
            errors.append(f"alpha {self.alpha} outside (0, 1]")
        if not (0 <= self.epsilon <= 1):
            errors.append(f"epsilon {self.epsilon} outside [0, 1]")
        if self.ep_len < 1:
            errors.append(f"ep-l {self.ep_len} must be >= 1")
        if self.ep_num < 0:
            errors.append(f"ep-n {self.ep_num} must be >= 0")
        if not (0 < self.lam < 1):
            errors.append(f"lambda {self.lam} outside (0, 1)")
        if not (0 <= self.zeta < 1):
            errors.append(f"zeta {self.zeta} outside [0, 1)")
        if self.f < 1:
            errors.append(f"f {self.f} must be >= 1")
        return errors

    def with_overrides(self, overrides: dict | None) -> "Hyperparams":
        """Apply file-default overrides keyed by flag names (``ep-l`` etc.)."""
        if not overrides:
            return self
        rename = {"ep-l": "ep_len", "ep-n": "ep_num", "lambda": "lam"}
        fields = {}
        for key, value in overrides.items():
            attr = rename.get(key, key)
            if attr not in self.__dataclass_fields__:
                raise ValueError(f"unknown hyperparameter {key!r}")
            if attr in ("ep_len", "ep_num", "seed"):
                value = int(value)
            fields[attr] = value
        return replace(self, **fields)


@dataclass
class QTable:
    """Action values per translated state; rows follow the sampler's
    action ordering."""

    values: list[list[float]]


def q_learn(tm: TranslatedMdp, hp: Hyperparams, episode_hook=None) -> QTable:
    """Standard epsilon-greedy tabular Q-learning on the translated sampler.

    Episodes start at (q0, copy 0) and end on reaching the trap (treated as
    value 0, no bootstrap) or once more than ``ep_len`` steps pass without
    an accepting traversal in copy 1 (a truncation: the last update still
    bootstraps). Given the seed, the result is bit-identical across runs.
    """
    problems = hp.validate()
    if problems:
        raise ValueError("; ".join(problems))
    rng = random.Random(hp.seed)
    rng_random = rng.random
    rng_randrange = rng.randrange
    sample = tm.sample
    q = [[hp.init] * len(rows) for rows in tm.action_specs]
    trap = tm.trap
    start = tm.initial
    alpha = hp.alpha
    gamma = hp.gamma
    epsilon = hp.epsilon
    ep_len = hp.ep_len
    for episode in range(hp.ep_num):
        s = start
        since_accept = 0
        while True:
            qs = q[s]
            if rng_random() < epsilon:
                a = rng_randrange(len(qs))
            else:
                a = 0
                best = qs[0]
                for i in range(1, len(qs)):
                    if qs[i] > best:
                        best = qs[i]
                        a = i
            nxt, reward, accepting = sample(s, a, rng)
            if nxt == trap:
                target = reward
            else:
                qn = q[nxt]
                best = qn[0]
                for i in range(1, len(qn)):
                    if qn[i] > best:
                        best = qn[i]
                target = reward + gamma * best
            qs[a] += alpha * (target - qs[a])
            since_accept = 0 if accepting else since_accept + 1
            if nxt == trap or since_accept > ep_len:
                break
            s = nxt
        if episode_hook is not None:
            episode_hook(episode + 1, q)
    return QTable(values=q)


def greedy(q: QTable) -> list[int]:
    """Argmax action per translated state, lowest index on ties."""
    out = []
    for row in q.values:
        best = 0
        for i in range(1, len(row)):
            if row[i] > row[best]:
                best = i
        out.append(best)
    return out


@dataclass(frozen=True)
class LearnReport:
    """Exact certification of a strategy on translated states.

    All numbers come from exact solves on the known model, never from
    learner estimates; gaps compare against the model-checked optimum at
    the initial state.
    """

    strategy: tuple[int, ...]
    switch_step: int
    eps: float
    psat: float
    value: float
    blike: float
    bval: float

    @property
    def psat_gap(self) -> float:
        return self.blike - self.psat

    @property
    def value_gap(self) -> float:
        return self.bval - self.value

    def text(self) -> str:
        lines = [
            f"psat = {self.psat:.9f}",
            f"value = {self.value:.9f}",
            f"blike = {self.blike:.9f}",
            f"bval = {self.bval:.9f}",
            f"psat_gap = {self.psat_gap:.9f}",
            f"value_gap = {self.value_gap:.9f}",
            f"switch_step = {self.switch_step}",
            f"eps = {self.eps:.9f}",
        ]
        return "\n".join(lines) + "\n"


def certify(
    product: ProductMdp,
    strategy,
    lam: float,
    eps: float,
    result: modelcheck.ModelCheckResult | None = None,
) -> LearnReport:
    """Certify a strategy on translated states against the exact optimum.

    Copy-0 choices become the head, copy-1 choices the tail of a stitched
    strategy with the standard switch point; the stitched strategy is then
    evaluated exactly. A precomputed model-check result may be passed to
    avoid recomputation.
    """
    if result is None:
        result = modelcheck.model_check(product, lam)
    n = product.mdp.n_states
    head = tuple(int(strategy[q]) for q in range(n))
    tail = tuple(int(strategy[n + q]) for q in range(n))
    stitched = modelcheck.StitchedStrategy(
        switch_step=modelcheck.stitch_steps(lam, eps, result.rmax), head=head, tail=tail
    )
    psat, value = modelcheck.evaluate_stitched(product, stitched, lam)
    q0 = product.mdp.init
    return LearnReport(
        strategy=tuple(int(a) for a in strategy),
        switch_step=stitched.switch_step,
        eps=eps,
        psat=psat,
        value=value,
        blike=float(result.blike[q0]),
        bval=float(result.bval[q0]),
    )


def training_curve(
    tm: TranslatedMdp,
    hp: Hyperparams,
    every: int,
    eps: float = 0.1,
) -> tuple[QTable, list[tuple[int, float]]]:
    """Train while certifying the greedy strategy every ``every`` episodes.

    Returns the final table and (episode, certified value) samples.
    """
    result = modelcheck.model_check(tm.product, tm.lam)
    curve: list[tuple[int, float]] = []

    def hook(episode: int, values) -> None:
        if every > 0 and episode % every == 0:
            report = certify(tm.product, greedy(QTable(values)), tm.lam, eps, result)
            curve.append((episode, report.value))

    table = q_learn(tm, hp, episode_hook=hook)
    return table, curve


def curve_csv(curve) -> str:
    lines = ["episode,value"]
    for episode, value in curve:
        lines.append(f"{episode},{value:.12g}")
    return "\n".join(lines) + "\n"
