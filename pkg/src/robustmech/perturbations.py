"""Finite perturbed environments: circumstance ladders, information
partitions, perturbed payoffs and costs, and their size measures.

A countable circumstance space is truncated to ``T + 1`` elements with the
geometric tail mass collapsed onto the last circumstance, which always
carries normal payoffs.  Every perturbation records its truncation tail
mass so callers can report it next to their results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import AgentPayoff, ModelError, ScenarioModel
from .numeric import Number, rat


@dataclass(frozen=True)
class BiasSpec:
    """Payoff/cost override for one agent at one circumstance.

    ``u_overrides`` maps (state index, outcome index) -> value and is
    applied on top of the agent's unperturbed table; ``cost`` replaces the
    unperturbed learning cost when given.
    """

    agent: int
    circumstance: int
    u_overrides: dict[tuple[int, int], Number] = field(default_factory=dict)
    cost: Number | None = None


def ladder_partition(size: int, offset: int) -> tuple[tuple[int, ...], ...]:
    """Pairing partition of circumstances 0..size-1.

    ``offset=0`` gives {w0},{w1,w2},... and ``offset=1`` gives
    {w0,w1},{w2,w3},...; a leftover element becomes a singleton.
    """
    blocks = []
    start = 0
    if offset == 0:
        blocks.append((0,))
        start = 1
    while start < size:
        blocks.append(tuple(range(start, min(start + 2, size))))
        start += 2
    return tuple(blocks)


@dataclass(frozen=True)
class Perturbation:
    """Circumstance ladder with partitions and perturbed payoffs."""

    scenario: ScenarioModel
    pi: tuple[Number, ...]
    partitions: tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]
    biases: tuple[BiasSpec, ...] = ()
    tail_mass: Number = Fraction(0)

    def __post_init__(self):
        total = sum(self.pi)
        if total != 1 and abs(total - 1) > 1e-9:
            raise ModelError("circumstance distribution must sum to one")
        for part in self.partitions:
            seen = sorted(w for block in part for w in block)
            if seen != list(range(len(self.pi))):
                raise ModelError("partition must cover circumstances exactly once")
        for b in self.biases:
            if not 0 <= b.circumstance < len(self.pi):
                raise ModelError("bias refers to a missing circumstance")
        object.__setattr__(self, "_bias_map", {
            (b.agent, b.circumstance): b for b in self.biases
        })

    @property
    def size(self) -> int:
        return len(self.pi)

    def type_elements(self, agent: int) -> tuple[tuple[int, ...], ...]:
        return self.partitions[agent]

    def type_of(self, agent: int, circ: int) -> int:
        for idx, block in enumerate(self.partitions[agent]):
            if circ in block:
                return idx
        raise ModelError(f"circumstance {circ} not in agent {agent} partition")

    def type_prob(self, agent: int, type_index: int) -> Number:
        return sum(self.pi[w] for w in self.partitions[agent][type_index])

    def cost(self, agent: int, circ: int) -> Number:
        bias = self._bias_map.get((agent, circ))
        if bias is not None and bias.cost is not None:
            return bias.cost
        return self.scenario.payoffs[agent].cost

    def utility(self, agent: int, circ: int, state: int, outcome: int) -> Number:
        bias = self._bias_map.get((agent, circ))
        if bias is not None and (state, outcome) in bias.u_overrides:
            return bias.u_overrides[(state, outcome)]
        return self.scenario.payoffs[agent].u[state][outcome]

    def is_biased_at(self, agent: int, circ: int) -> bool:
        bias = self._bias_map.get((agent, circ))
        if bias is None:
            return False
        base = self.scenario.payoffs[agent]
        if bias.cost is not None and bias.cost != base.cost:
            return True
        return any(
            value != base.u[s][o] for (s, o), value in bias.u_overrides.items()
        )

    def type_is_normal(self, agent: int, type_index: int) -> bool:
        """A type is normal iff payoffs and cost match the unperturbed model
        on every circumstance of its partition element."""
        return not any(
            self.is_biased_at(agent, w) for w in self.partitions[agent][type_index]
        )


def unperturbed(scenario: ScenarioModel) -> Perturbation:
    """Single-circumstance perturbation equal to the unperturbed model."""
    one = (Fraction(1),)
    return Perturbation(scenario, one, (((0,),), ((0,),)))


def build_ladder(
    scenario: ScenarioModel,
    depth: int,
    eta: Number | str,
    biases: list[BiasSpec] | None = None,
    tail: str = "collapse",
) -> Perturbation:
    """Geometric circumstance ladder truncated at ``depth``.

    Circumstance ``w_t`` has probability ``eta * (1 - eta)^t`` for
    ``t < depth``.  With ``tail="collapse"`` the residual mass
    ``(1 - eta)^depth`` sits on the last circumstance, so the mass of
    ``w_0`` is exactly ``eta``; with ``tail="renormalize"`` the geometric
    weights extend through the last circumstance and are rescaled to sum
    to one, which preserves the 1/(2-eta) posterior at every rung of the
    ladder, including the top one.  Contagion arguments need the second
    form: collapsing the tail inverts the last type's posterior and lets
    the boundary types keep a self-sustaining coordination pair.  The last
    circumstance keeps normal payoffs either way.  Agent 1's partition is
    {w0},{w1,w2},...; agent 2's is {w0,w1},{w2,w3},...
    """
    eta = rat(eta)
    if not 0 < eta < 1:
        raise ModelError("eta must lie strictly between 0 and 1")
    if depth < 2:
        raise ModelError("ladder depth must be at least 2")
    pi = [eta * (1 - eta) ** t for t in range(depth)]
    if tail == "collapse":
        tail_mass = (1 - eta) ** depth
        pi.append(tail_mass)
    elif tail == "renormalize":
        pi.append(eta * (1 - eta) ** depth)
        total = sum(pi)
        pi = [p / total for p in pi]
        tail_mass = 1 - total
    else:
        raise ModelError(f"unknown tail convention {tail!r}")
    return Perturbation(
        scenario,
        tuple(pi),
        (ladder_partition(depth + 1, 0), ladder_partition(depth + 1, 1)),
        tuple(biases or ()),
        tail_mass=tail_mass,
    )


def build_general_ladder(
    scenario: ScenarioModel,
    pi: tuple[Number, ...],
    biases: list[BiasSpec] | None = None,
) -> Perturbation:
    """Ladder partition structure with an arbitrary finite distribution."""
    pi = tuple(rat(p) if not isinstance(p, float) else p for p in pi)
    return Perturbation(
        scenario,
        pi,
        (ladder_partition(len(pi), 0), ladder_partition(len(pi), 1)),
        tuple(biases or ()),
    )


def simple_bias_ladder(
    scenario: ScenarioModel,
    depth: int,
    eta: Number | str,
    biased_agent: int,
    u_overrides: dict[tuple[int, int], Number],
    biased_cost: Number | None = None,
    tail: str = "collapse",
) -> Perturbation:
    """Ladder with a single biased circumstance ``w0`` for one agent."""
    bias = BiasSpec(biased_agent, 0, dict(u_overrides), biased_cost)
    return build_ladder(scenario, depth, eta, [bias], tail=tail)


def eta_of(perturbation: Perturbation) -> Number:
    """One minus the probability that both agents are normal types."""
    normal = [
        {
            idx
            for idx in range(len(perturbation.partitions[agent]))
            if perturbation.type_is_normal(agent, idx)
        }
        for agent in (0, 1)
    ]
    mass = sum(
        perturbation.pi[w]
        for w in range(perturbation.size)
        if perturbation.type_of(0, w) in normal[0]
        and perturbation.type_of(1, w) in normal[1]
    )
    return 1 - mass


def is_c_bounded(perturbation: Perturbation, c_bar: Number) -> bool:
    """True iff every perturbed learning cost is at most ``c_bar``."""
    return all(
        perturbation.cost(agent, w) <= c_bar
        for agent in (0, 1)
        for w in range(perturbation.size)
    )


def posterior(perturbation: Perturbation, agent: int, type_index: int) -> dict[int, Number]:
    """Bayes posterior over the opponent's types given one's own type."""
    element = perturbation.partitions[agent][type_index]
    total = sum(perturbation.pi[w] for w in element)
    if total == 0:
        raise ModelError("posterior of a zero-probability type")
    other = 1 - agent
    out: dict[int, Number] = {}
    for w in element:
        opp = perturbation.type_of(other, w)
        out[opp] = out.get(opp, 0) + perturbation.pi[w] / total
    return out
