"""Reward machines with acceptance marks over labelled MDPs: parsing,
exact model checking, the two-phase reward translation, tabular
Q-learning, and exact certification of learned strategies."""

from .chains import SolverError
from .envs import ENVIRONMENTS, GridSpec, lemma1_env, load_env, office_env, two_wecs_env
from .guards import (
    GuardExpr,
    GuardSyntaxError,
    UnknownAtomError,
    eval_guard,
    guard_to_text,
    parse_guard,
)
from .learn import Hyperparams, LearnReport, QTable, certify, greedy, q_learn
from .machine import (
    MachineEdge,
    MachineStep,
    OmegaRewardMachine,
    as_buchi,
    as_reward_machine,
    completeness_check,
    step,
)
from .mdp import (
    Mdp,
    MdpAction,
    Mec,
    PositionalStrategy,
    buchi_prob_of_strategy,
    evaluate_positional,
    mec_decomposition,
    validate,
)
from .modelcheck import (
    BuchiSolution,
    DiscountedSolution,
    ModelCheckResult,
    StitchedStrategy,
    discounted_optimal,
    evaluate_stitched,
    model_check,
    prune,
    qualitative,
    quantitative,
    stitch,
    stitch_steps,
)
from .modelfile import (
    ModelBundle,
    ModelFormatError,
    ModelSemanticError,
    parse_model_file,
    serialize_model,
)
from .product import DisabledActionError, IncompleteMachineError, LazyProduct, ProductMdp, build_product
from .translation import TotalValueSolution, TranslatedMdp, solve_total, translate

__version__ = "0.1.0"
