"""Batch command-line front-end.

Exit codes: 0 success, 1 input error (missing/invalid model), 2 parameter
error, 3 internal invariant violation. Learning flags mirror the
evaluation table's column names; file ``defaults`` sections override the
built-in defaults and explicit flags override both.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

from . import modelcheck
from .chains import SolverError
from .envs import ENVIRONMENTS, load_env
from .learn import Hyperparams, QTable, certify, curve_csv, greedy, q_learn, training_curve
from .modelfile import ModelBundle, parse_model_file, serialize_model
from .product import ProductMdp, build_product
from .translation import solve_total, translate


class InputError(Exception):
    pass


def _load_bundle(args) -> ModelBundle:
    if getattr(args, "env", None):
        try:
            return load_env(args.env)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    path = Path(args.input)
    if not path.exists():
        raise InputError(f"no such model file: {path}")
    try:
        return parse_model_file(path.read_text())
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _hyperparams(args, bundle: ModelBundle) -> Hyperparams:
    hp = Hyperparams().with_overrides(bundle.defaults)
    explicit = {}
    for field in dataclass_fields(Hyperparams):
        value = getattr(args, field.name, None)
        if value is not None:
            explicit[field.name] = value
    hp = Hyperparams(**{**hp.__dict__, **explicit})
    problems = hp.validate()
    if problems:
        raise ParameterError("; ".join(problems))
    return hp


class ParameterError(Exception):
    pass


def _add_model_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--env", choices=sorted(ENVIRONMENTS), help="built-in environment")
    group.add_argument("--input", help="model file in the bundle format")


def _add_hyper_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--f", type=float, dest="f", default=None)
    parser.add_argument("--zeta", type=float, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--init", type=float, default=None)
    parser.add_argument("--ep-l", type=int, dest="ep_len", default=None)
    parser.add_argument("--ep-n", type=int, dest="ep_num", default=None)
    parser.add_argument("--lambda", type=float, dest="lam", default=None)
    parser.add_argument("--seed", type=int, default=None)


def _build(bundle: ModelBundle) -> ProductMdp:
    try:
        return build_product(bundle.mdp, bundle.machine)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_mc(args) -> int:
    bundle = _load_bundle(args)
    lam = args.lam if args.lam is not None else 0.99
    if not (0 <= lam < 1):
        raise ParameterError(f"lambda {lam} outside [0, 1)")
    if args.eps is not None and args.eps <= 0:
        raise ParameterError(f"eps {args.eps} must be positive")
    product = _build(bundle)
    result = modelcheck.model_check(product, lam)
    q0 = product.mdp.init
    print(f"states = {product.mdp.n_states}")
    print(f"psat = {result.blike[q0]:.6f}")
    print(f"bval = {result.bval[q0]:.6f}")
    if args.out_values:
        Path(args.out_values).write_text(modelcheck.values_csv(result))
    if args.out_strategy:
        eps = args.eps if args.eps is not None else 0.1
        st = result.stitched(eps)
        text = [f"# switch_step {st.switch_step}", "# head"]
        text.append(modelcheck.strategy_text(product.mdp, st.head).rstrip("\n"))
        text.append("# tail")
        text.append(modelcheck.strategy_text(product.mdp, st.tail).rstrip("\n"))
        Path(args.out_strategy).write_text("\n".join(text) + "\n")
    return 0


def cmd_translate(args) -> int:
    bundle = _load_bundle(args)
    hp = _hyperparams(args, bundle)
    product = _build(bundle)
    tm = translate(product, hp.lam, hp.zeta, hp.f)
    solution = solve_total(tm)
    print(f"states = {tm.n_states}")
    print(f"value_copy0 = {solution.v[tm.initial]:.6f}")
    print(f"value_copy1 = {solution.v[tm.initial + tm.n_base]:.6f}")
    if args.out:
        lines = ["state,name,value"]
        for i in range(tm.n_states):
            lines.append(f"{i},{tm.state_name(i)},{solution.v[i]:.12g}")
        Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def _write_translated_strategy(path: Path, tm, strategy) -> None:
    lines = []
    for i, a in enumerate(strategy):
        name = tm.action_specs[i][a].name
        lines.append(f"{i} -> {name}")
    path.write_text("\n".join(lines) + "\n")


def cmd_learn(args) -> int:
    bundle = _load_bundle(args)
    hp = _hyperparams(args, bundle)
    if args.eps <= 0:
        raise ParameterError(f"eps {args.eps} must be positive")
    product = _build(bundle)
    tm = translate(product, hp.lam, hp.zeta, hp.f)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.curve_every > 0:
        table, curve = training_curve(tm, hp, args.curve_every, args.eps)
        (out_dir / "curve.csv").write_text(curve_csv(curve))
    else:
        table = q_learn(tm, hp)
    strategy = greedy(table)
    report = certify(product, strategy, hp.lam, args.eps)
    (out_dir / "report.txt").write_text(report.text())
    _write_translated_strategy(out_dir / "strategy.txt", tm, strategy)
    print(report.text(), end="")
    return 0


def cmd_certify(args) -> int:
    bundle = _load_bundle(args)
    hp = _hyperparams(args, bundle)
    if args.eps <= 0:
        raise ParameterError(f"eps {args.eps} must be positive")
    product = _build(bundle)
    tm = translate(product, hp.lam, hp.zeta, hp.f)
    path = Path(args.strategy)
    if not path.exists():
        raise InputError(f"no such strategy file: {path}")
    strategy = [0] * tm.n_states
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            state_text, action_name = (part.strip() for part in line.split("->"))
            state = int(state_text)
            names = [row.name for row in tm.action_specs[state]]
            strategy[state] = names.index(action_name)
        except (ValueError, IndexError) as exc:
            raise InputError(f"{path}: line {line_no}: bad strategy line {raw!r}") from exc
    report = certify(product, strategy, hp.lam, args.eps)
    print(report.text(), end="")
    return 0


def cmd_env(args) -> int:
    try:
        bundle = load_env(args.name)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    text = serialize_model(bundle)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omegarm",
        description="Model checking, reward translation, Q-learning, and "
        "certification for reward machines with acceptance marks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mc = sub.add_parser("mc", help="model check a bundle")
    _add_model_source(p_mc)
    p_mc.add_argument("--lambda", type=float, dest="lam", default=None)
    p_mc.add_argument("--eps", type=float, default=None, help="stitching tolerance")
    p_mc.add_argument("--out-values", default=None)
    p_mc.add_argument("--out-strategy", default=None)
    p_mc.set_defaults(func=cmd_mc)

    p_tr = sub.add_parser("translate", help="build and solve the translated MDP")
    _add_model_source(p_tr)
    _add_hyper_flags(p_tr)
    p_tr.add_argument("--out", default=None)
    p_tr.set_defaults(func=cmd_translate)

    p_learn = sub.add_parser("learn", help="tabular Q-learning plus certification")
    _add_model_source(p_learn)
    _add_hyper_flags(p_learn)
    p_learn.add_argument("--eps", type=float, default=0.1, help="stitching tolerance")
    p_learn.add_argument("--out-dir", default=".")
    p_learn.add_argument("--curve-every", type=int, default=0)
    p_learn.set_defaults(func=cmd_learn)

    p_cert = sub.add_parser("certify", help="certify a learned strategy file")
    _add_model_source(p_cert)
    _add_hyper_flags(p_cert)
    p_cert.add_argument("--eps", type=float, default=0.1, help="stitching tolerance")
    p_cert.add_argument("--strategy", required=True)
    p_cert.set_defaults(func=cmd_certify)

    p_env = sub.add_parser("env", help="emit a built-in environment as a model file")
    p_env.add_argument("name")
    p_env.add_argument("--out", default="-")
    p_env.set_defaults(func=cmd_env)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
