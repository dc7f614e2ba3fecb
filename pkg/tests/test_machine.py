import itertools
import random

import pytest

from omegarm.envs import office_env
from omegarm.guards import eval_guard, parse_guard
from omegarm.machine import (
    MachineEdge,
    MachineStep,
    OmegaRewardMachine,
    as_buchi,
    as_reward_machine,
    completeness_check,
    step,
)
from omegarm.mdp import Mdp, MdpAction


def machine_from(ap, triples):
    edges = tuple(
        MachineEdge(src, parse_guard(guard, ap), dst, reward, acc)
        for src, guard, dst, reward, acc in triples
    )
    return OmegaRewardMachine(
        n_states=max((max(e.source, e.target) for e in edges), default=0) + 1,
        init=0,
        ap=ap,
        edges=edges,
    )


def test_true_edge_always_enabled():
    rm = machine_from((), [(0, "true", 0, 0.0, True)])
    assert step(rm, 0, frozenset()) == [MachineStep(0, 0.0, True)]


def test_patrol_machine_advances_on_room_visit():
    bundle = office_env(zap=False)
    rm = bundle.machine
    assert [s.target for s in step(rm, 0, frozenset({"A"}))] == [1]
    assert [s.target for s in step(rm, 0, frozenset())] == [0]
    final = step(rm, 4, frozenset({"B"}))
    assert final == [MachineStep(0, 1.0, True)]


def test_nondeterministic_edges_all_returned_in_order():
    ap = ("x",)
    rm = machine_from(
        ap,
        [(0, "x", 0, 1.0, False), (0, "true", 1, 0.0, True), (1, "true", 1, 0.0, False)],
    )
    moves = step(rm, 0, frozenset({"x"}))
    assert moves == [MachineStep(0, 1.0, False), MachineStep(1, 0.0, True)]


def test_step_matches_guard_filter_on_random_machines():
    rng = random.Random(17)
    ap = ("a", "b", "c")
    guard_pool = ["true", "false", "a", "!a", "a & b", "a | !c", "!(a | b) & !c", "b | c"]
    for _ in range(50):
        triples = [
            (
                rng.randrange(3),
                rng.choice(guard_pool),
                rng.randrange(3),
                float(rng.randint(-2, 2)),
                rng.random() < 0.3,
            )
            for _ in range(rng.randint(1, 8))
        ]
        rm = machine_from(ap, triples)
        for r in range(len(ap) + 1):
            for combo in itertools.combinations(ap, r):
                label = frozenset(combo)
                for u in range(rm.n_states):
                    want = [
                        MachineStep(e.target, e.reward, e.accepting)
                        for e in rm.edges
                        if e.source == u and eval_guard(e.guard, label)
                    ]
                    assert step(rm, u, label) == want


def test_completeness_office_machine_ok():
    bundle = office_env(zap=True)
    assert completeness_check(bundle.machine, bundle.mdp) == []


def test_completeness_reports_missing_edge():
    bundle = office_env(zap=False)
    rm = bundle.machine
    gappy = OmegaRewardMachine(
        rm.n_states,
        rm.init,
        rm.ap,
        tuple(e for e in rm.edges if not (e.source == 1 and e.target == 2)),
    )
    gaps = completeness_check(gappy, bundle.mdp)
    assert (1, frozenset({"B"})) in gaps


def test_completeness_true_loop_machine_vs_unlabelled_mdp():
    rm = machine_from((), [(0, "true", 0, 0.0, False)])
    m = Mdp(
        n_states=2,
        init=0,
        ap=(),
        labels=(frozenset(), frozenset()),
        actions=(
            (MdpAction("a", ((1, 1.0),)),),
            (MdpAction("a", ((0, 1.0),)),),
        ),
    )
    assert completeness_check(rm, m) == []


def test_completeness_rejects_ap_mismatch():
    rm = machine_from(("x",), [(0, "true", 0, 0.0, False)])
    m = Mdp(1, 0, ("y",), (frozenset(),), ((MdpAction("a", ((0, 1.0),)),),))
    with pytest.raises(ValueError):
        completeness_check(rm, m)


def test_as_buchi_zeroes_rewards_idempotently():
    bundle = office_env(zap=False)
    stripped = as_buchi(bundle.machine)
    assert all(e.reward == 0.0 for e in stripped.edges)
    assert as_buchi(stripped) == stripped


def test_as_reward_machine_keeps_structure():
    bundle = office_env(zap=False)
    cleared = as_reward_machine(bundle.machine)
    assert cleared.n_states == 5
    assert len(cleared.edges) == len(bundle.machine.edges)
    assert not any(e.accepting for e in cleared.edges)


def test_projections_commute_and_trivialise():
    bundle = office_env(zap=False)
    rm = bundle.machine
    both = as_buchi(as_reward_machine(rm))
    assert both == as_reward_machine(as_buchi(rm))
    assert all(e.reward == 0.0 and not e.accepting for e in both.edges)
