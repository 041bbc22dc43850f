"""Scenario file loader.

Scenario files are YAML documents whose probabilities and payoffs are
written as exact fraction strings (``"7/10"``).  Validation errors carry
the line of the offending node so that authoring mistakes are easy to
locate.

Layout::

    states:
      - {name: innocent, prob: "7/10"}
      - {name: guilty,  prob: "3/10"}
    outcomes: [acquit, convict]
    scf:
      innocent: {acquit: "1"}
      guilty:   {convict: "1"}
    agents:
      - cost: "1"
        u: {"guilty,convict": "2"}      # optional "state,outcome" overrides
      - cost: "1"
    perturbation:                        # optional
      kind: ladder          # or: general
      depth: 100
      eta: "1/100"
      pi: ["1/3", "1/3", "1/3"]          # general kind only
      bias:
        - {agent: 1, circumstance: 0, cost: "5", u: {"*,convict": "10"}}
"""

from __future__ import annotations

from fractions import Fraction

import yaml

from .core import (
    AgentPayoff,
    Lottery,
    ModelError,
    OutcomeSpace,
    ScenarioModel,
    SocialChoiceFunction,
    StateSpace,
)
from .numeric import rat
from .perturbations import BiasSpec, Perturbation, build_general_ladder, build_ladder


class ScenarioFileError(ValueError):
    """Loader error with a file line attached when one is known."""

    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line + 1})" if line is not None else ""
        super().__init__(f"{message}{where}")


def _build(node):
    """Turn a YAML node graph into plain values, remembering source lines."""
    if isinstance(node, yaml.ScalarNode):
        value = yaml.SafeLoader("").construct_scalar(node)
        tag = node.tag
        if tag.endswith(":int"):
            value = int(value)
        elif tag.endswith(":float"):
            value = float(value)
        elif tag.endswith(":bool"):
            value = value.lower() in ("true", "yes", "on")
        elif tag.endswith(":null"):
            value = None
        return value, node.start_mark.line
    if isinstance(node, yaml.SequenceNode):
        return [_build(child) for child in node.value], node.start_mark.line
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, val_node in node.value:
            key, _ = _build(key_node)
            out[key] = _build(val_node)
        return out, node.start_mark.line
    raise ScenarioFileError(f"unsupported YAML node {node!r}")


def _rat(entry, what):
    value, line = entry
    try:
        return rat(value)
    except (TypeError, ValueError):
        raise ScenarioFileError(f"{what}: expected a rational, got {value!r}", line)


def _require(mapping, key, line, what):
    if key not in mapping:
        raise ScenarioFileError(f"{what}: missing key {key!r}", line)
    return mapping[key]


def load_scenario(path, exact: bool = True) -> tuple[ScenarioModel, Perturbation | None]:
    """Parse and validate a scenario file.

    Returns the canonicalized scenario and the optional perturbation
    described in the file (``None`` when no perturbation block exists).
    """
    with open(path) as fh:
        text = fh.read()
    return parse_scenario(text, exact=exact)


def parse_scenario(text: str, exact: bool = True):
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioFileError(f"not valid YAML: {exc}", mark.line if mark else None)
    if node is None:
        raise ScenarioFileError("empty scenario file")
    doc, top_line = _build(node)
    if not isinstance(doc, dict):
        raise ScenarioFileError("scenario file must be a mapping", top_line)

    states_entry = _require(doc, "states", top_line, "scenario")
    states_raw, states_line = states_entry
    labels, prior = [], []
    for item, line in states_raw:
        if not isinstance(item, dict):
            raise ScenarioFileError("states: each entry must be a mapping", line)
        name, _ = _require(item, "name", line, "state")
        labels.append(str(name))
        prior.append(_rat(_require(item, "prob", line, f"state {name!r}"), f"state {name!r} prob"))

    outcomes_raw, out_line = _require(doc, "outcomes", top_line, "scenario")
    outcomes = [str(o) for o, _ in outcomes_raw]

    try:
        state_space = StateSpace(tuple(labels), tuple(prior))
        outcome_space = OutcomeSpace(tuple(outcomes))
    except ModelError as exc:
        raise ScenarioFileError(str(exc), states_line)

    scf_raw, scf_line = _require(doc, "scf", top_line, "scenario")
    lots = []
    for label in labels:
        if label not in scf_raw:
            raise ScenarioFileError(f"scf: missing row for state {label!r}", scf_line)
        row, row_line = scf_raw[label]
        weights = [Fraction(0)] * len(outcomes)
        for oname, entry in row.items():
            if oname not in outcomes:
                raise ScenarioFileError(f"scf[{label}]: unknown outcome {oname!r}", row_line)
            weights[outcomes.index(oname)] = _rat(entry, f"scf[{label}][{oname}]")
        try:
            lots.append(Lottery(tuple(weights)))
        except ModelError as exc:
            raise ScenarioFileError(f"scf[{label}]: {exc}", row_line)

    agents_raw, agents_line = _require(doc, "agents", top_line, "scenario")
    if len(agents_raw) != 2:
        raise ScenarioFileError("agents: exactly two agents are supported", agents_line)
    payoffs = []
    for i, (agent, line) in enumerate(agents_raw):
        cost = _rat(_require(agent, "cost", line, f"agent {i + 1}"), f"agent {i + 1} cost")
        table = {}
        if "u" in agent and agent["u"][0]:
            u_raw, u_line = agent["u"]
            for key, entry in u_raw.items():
                parts = [p.strip() for p in str(key).split(",")]
                if len(parts) != 2:
                    raise ScenarioFileError(
                        f"agent {i + 1} u: key must be 'state,outcome', got {key!r}", u_line
                    )
                sname, oname = parts
                s_idx = range(len(labels)) if sname == "*" else [labels.index(sname)] if sname in labels else None
                if s_idx is None:
                    raise ScenarioFileError(f"agent {i + 1} u: unknown state {sname!r}", u_line)
                if oname not in outcomes:
                    raise ScenarioFileError(f"agent {i + 1} u: unknown outcome {oname!r}", u_line)
                value = _rat(entry, f"agent {i + 1} u[{key}]")
                for s in s_idx:
                    table[(s, outcomes.index(oname))] = value
        u = tuple(
            tuple(table.get((s, o), Fraction(0)) for o in range(len(outcomes)))
            for s in range(len(labels))
        )
        try:
            payoffs.append(AgentPayoff(u, cost))
        except ModelError as exc:
            raise ScenarioFileError(f"agent {i + 1}: {exc}", line)

    scenario = ScenarioModel(
        state_space, outcome_space, SocialChoiceFunction(tuple(lots)), tuple(payoffs)
    ).canonicalize()
    if not exact:
        scenario = _to_float(scenario)

    perturbation = None
    if "perturbation" in doc:
        perturbation = _parse_perturbation(doc["perturbation"], scenario, labels, outcomes)
    return scenario, perturbation


def _parse_perturbation(entry, scenario, labels, outcomes):
    block, line = entry
    kind, kind_line = _require(block, "kind", line, "perturbation")
    biases = []
    if "bias" in block:
        for item, b_line in block["bias"][0]:
            agent = item.get("agent", (1, b_line))[0]
            if agent not in (1, 2):
                raise ScenarioFileError("bias: agent must be 1 or 2", b_line)
            circ, _ = _require(item, "circumstance", b_line, "bias")
            cost = None
            if "cost" in item:
                cost = _rat(item["cost"], "bias cost")
            overrides = {}
            if "u" in item and item["u"][0]:
                u_raw, u_line = item["u"]
                # Same "state,outcome" keys as agent u tables; '*' spans states.
                order = list(scenario.state_space.states)
                for key, val in u_raw.items():
                    sname, oname = [p.strip() for p in str(key).split(",")]
                    value = _rat(val, f"bias u[{key}]")
                    targets = range(scenario.n) if sname == "*" else [order.index(sname)]
                    for s in targets:
                        overrides[(s, outcomes.index(oname))] = value
            biases.append(BiasSpec(agent - 1, circ, overrides, cost))

    if kind == "ladder":
        depth = block.get("depth", (100, line))[0]
        eta = _rat(_require(block, "eta", line, "perturbation"), "eta")
        return build_ladder(scenario, depth, eta, biases)
    if kind == "general":
        pi_raw, pi_line = _require(block, "pi", line, "perturbation")
        pi = tuple(_rat(p, "pi entry") for p in pi_raw)
        return build_general_ladder(scenario, pi, biases)
    raise ScenarioFileError(f"perturbation: unknown kind {kind!r}", kind_line)


def _to_float(scenario: ScenarioModel) -> ScenarioModel:
    ss = StateSpace(scenario.state_space.states, tuple(float(p) for p in scenario.prior))
    scf = SocialChoiceFunction(
        tuple(Lottery(tuple(float(w) for w in lot.weights)) for lot in scenario.scf.lotteries)
    )
    payoffs = tuple(
        AgentPayoff(tuple(tuple(float(v) for v in row) for row in p.u), float(p.cost))
        for p in scenario.payoffs
    )
    return ScenarioModel(ss, scenario.outcome_space, scf, payoffs)
