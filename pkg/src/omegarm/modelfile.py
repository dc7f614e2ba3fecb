"""Line-oriented text format for labelled MDPs paired with reward machines.

Layout (``#`` starts a comment, sections in this order, ``defaults``
optional)::

    mdp
    ap: A B C D
    states: 5
    init: 0
    label 0: A
    label 3: A B
    action 0 east: 1 0.8, 2 0.2
    orm
    states: 2
    init: 0
    edge 0 "!A" 0 reward 0
    edge 0 "A"  1 reward 1 accepting
    edge 1 "true" 0 reward 0
    defaults
    f: 500

Unlabelled states carry the empty label; ``accepting`` marks an edge as
accepting; rewards are decimal literals. The machine reads the MDP's ap
list, so both sides of a bundle always agree on it. Exact duplicate edge
declarations are unioned. State names are derived metadata of built-in
environments and are not part of the format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .guards import GuardSyntaxError, UnknownAtomError, guard_to_text, parse_guard
from .machine import MachineEdge, OmegaRewardMachine
from .mdp import Mdp, MdpAction, validate

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_EDGE_RE = re.compile(
    r'^edge\s+(\d+)\s+"([^"]*)"\s+(\d+)\s+reward\s+(\S+)(\s+accepting)?$'
)
_ACTION_RE = re.compile(rf"^action\s+(\d+)\s+({_IDENT})\s*:\s*(.*)$")
_LABEL_RE = re.compile(r"^label\s+(\d+)\s*:\s*(.*)$")
_KEYVAL_RE = re.compile(rf"^({_IDENT}(?:-{_IDENT})*)\s*:\s*(\S+)$")


class ModelFormatError(ValueError):
    """Syntax error in a model file; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ModelSemanticError(ValueError):
    """The file parsed but violates model invariants; lists every problem."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class ModelBundle:
    """A parsed MDP/machine pair plus optional hyperparameter defaults."""

    mdp: Mdp
    machine: OmegaRewardMachine
    defaults: dict[str, float] | None = None

    def without_names(self) -> "ModelBundle":
        return replace(self, mdp=replace(self.mdp, state_names=None))


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out).strip()


def _int_field(text: str, what: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ModelFormatError(f"bad {what} {text!r}", line_no) from None


def _float_field(text: str, what: str, line_no: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ModelFormatError(f"bad {what} {text!r}", line_no) from None


def parse_model_file(text: str) -> ModelBundle:
    """Parse and validate a model bundle.

    Raises ModelFormatError with a line number for syntax problems and
    ModelSemanticError with the full list of violations otherwise.
    """
    lines = [(i + 1, _strip_comment(raw)) for i, raw in enumerate(text.splitlines())]
    lines = [(no, ln) for no, ln in lines if ln]
    pos = 0

    def expect_section(name: str) -> int:
        nonlocal pos
        if pos >= len(lines) or lines[pos][1] != name:
            at = lines[pos][0] if pos < len(lines) else len(text.splitlines()) + 1
            raise ModelFormatError(f"expected {name!r} section", at)
        pos += 1
        return pos

    def scalar(key: str) -> tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            raise ModelFormatError(f"expected {key!r} line", len(text.splitlines()) + 1)
        no, ln = lines[pos]
        if not ln.startswith(key):
            raise ModelFormatError(f"expected {key!r} line", no)
        pos += 1
        return no, ln[len(key):].strip()

    expect_section("mdp")
    no, ap_text = scalar("ap:")
    ap = tuple(ap_text.split())
    for name in ap:
        if not re.fullmatch(_IDENT, name):
            raise ModelFormatError(f"bad proposition name {name!r}", no)
    no, n_text = scalar("states:")
    n_states = _int_field(n_text, "state count", no)
    no, init_text = scalar("init:")
    init = _int_field(init_text, "initial state", no)

    labels: dict[int, frozenset[str]] = {}
    actions: dict[int, list[MdpAction]] = {}
    semantic: list[str] = []
    while pos < len(lines):
        no, ln = lines[pos]
        if m := _LABEL_RE.match(ln):
            s = _int_field(m.group(1), "state id", no)
            labels[s] = frozenset(m.group(2).split())
            pos += 1
        elif m := _ACTION_RE.match(ln):
            s = _int_field(m.group(1), "state id", no)
            name = m.group(2)
            dist = []
            for part in m.group(3).split(","):
                fields = part.split()
                if len(fields) != 2:
                    raise ModelFormatError(f"bad transition {part.strip()!r}", no)
                dist.append(
                    (
                        _int_field(fields[0], "target state", no),
                        _float_field(fields[1], "probability", no),
                    )
                )
            actions.setdefault(s, []).append(MdpAction(name, tuple(dist)))
            pos += 1
        elif ln == "orm":
            break
        else:
            raise ModelFormatError(f"unexpected line {ln!r}", no)

    for s in labels:
        if not (0 <= s < n_states):
            semantic.append(f"label for undeclared state {s}")
    for s in actions:
        if not (0 <= s < n_states):
            semantic.append(f"action for undeclared state {s}")
    m = Mdp(
        n_states=n_states,
        init=init,
        ap=ap,
        labels=tuple(labels.get(s, frozenset()) for s in range(n_states)),
        actions=tuple(tuple(actions.get(s, ())) for s in range(n_states)),
    )
    semantic.extend(validate(m))

    expect_section("orm")
    no, n_text = scalar("states:")
    rm_states = _int_field(n_text, "machine state count", no)
    no, init_text = scalar("init:")
    rm_init = _int_field(init_text, "machine initial state", no)
    edges: list[MachineEdge] = []
    while pos < len(lines):
        no, ln = lines[pos]
        if ln == "defaults":
            break
        em = _EDGE_RE.match(ln)
        if em is None:
            raise ModelFormatError(f"unexpected line {ln!r}", no)
        source = _int_field(em.group(1), "machine state", no)
        target = _int_field(em.group(3), "machine state", no)
        reward = _float_field(em.group(4), "reward", no)
        try:
            guard = parse_guard(em.group(2), ap)
        except (GuardSyntaxError, UnknownAtomError) as exc:
            raise ModelFormatError(f"bad guard: {exc}", no) from exc
        edge = MachineEdge(source, guard, target, reward, bool(em.group(5)))
        if edge not in edges:  # duplicate declarations are unioned
            edges.append(edge)
        pos += 1
    for e in edges:
        if not (0 <= e.source < rm_states) or not (0 <= e.target < rm_states):
            semantic.append(f"machine edge {e.source}->{e.target} out of range")
    if not (0 <= rm_init < rm_states):
        semantic.append(f"machine initial state {rm_init} out of range")
    machine = OmegaRewardMachine(rm_states, rm_init, ap, tuple(edges))

    defaults = None
    if pos < len(lines) and lines[pos][1] == "defaults":
        pos += 1
        defaults = {}
        while pos < len(lines):
            no, ln = lines[pos]
            km = _KEYVAL_RE.match(ln)
            if km is None:
                raise ModelFormatError(f"bad defaults line {ln!r}", no)
            raw = km.group(2)
            try:
                value: float = int(raw)
            except ValueError:
                value = _float_field(raw, "defaults value", no)
            defaults[km.group(1)] = value
            pos += 1
    if pos < len(lines):
        raise ModelFormatError(f"unexpected line {lines[pos][1]!r}", lines[pos][0])

    if semantic:
        raise ModelSemanticError(semantic)
    return ModelBundle(m, machine, defaults)


def serialize_model(bundle: ModelBundle) -> str:
    """Canonical text for a bundle; reparses to an equal bundle (state
    names excepted, they are not part of the format)."""
    m, rm = bundle.mdp, bundle.machine
    out = ["mdp"]
    out.append(("ap: " + " ".join(m.ap)).rstrip())
    out.append(f"states: {m.n_states}")
    out.append(f"init: {m.init}")
    for s in range(m.n_states):
        if m.labels[s]:
            out.append(f"label {s}: " + " ".join(sorted(m.labels[s])))
    for s in range(m.n_states):
        for act in m.actions[s]:
            dist = ", ".join(f"{t} {p!r}" for t, p in act.dist)
            out.append(f"action {s} {act.name}: {dist}")
    out.append("orm")
    out.append(f"states: {rm.n_states}")
    out.append(f"init: {rm.init}")
    for e in rm.edges:
        acc = " accepting" if e.accepting else ""
        out.append(f'edge {e.source} "{guard_to_text(e.guard)}" {e.target} reward {e.reward!r}{acc}')
    if bundle.defaults:
        out.append("defaults")
        for key, value in bundle.defaults.items():
            out.append(f"{key}: {value!r}" if isinstance(value, float) else f"{key}: {value}")
    return "\n".join(out) + "\n"
