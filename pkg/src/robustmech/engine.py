"""Strategies and payoff computation for the induced incomplete-information
game.

A pure strategy is a tuple of messages indexed by information realization:
state index in the baseline, signal index when a signal structure is
present.  A non-constant tuple implies paying the (circumstance-dependent)
learning cost.  Type strategies are finite-support mixtures stored as
``{pure_tuple: weight}`` dicts, and a profile is a pair of
``{type_index: TypeStrategy}`` maps.

All computations are pure functions of immutable inputs; the ``Game``
wrapper only memoizes derived tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Lottery, ModelError, ScenarioModel, tv_distance
from .mechanisms import Mechanism
from .numeric import Number, rat
from .perturbations import Perturbation, unperturbed

PureStrategy = tuple[int, ...]
TypeStrategy = dict[PureStrategy, Number]
StrategyProfile = list[dict[int, TypeStrategy]]


@dataclass(frozen=True)
class TrembleSpec:
    """Intended messages go through w.p. ``1 - tau``; otherwise the realized
    message is drawn from the agent's noise distribution."""

    tau: Number
    noise: tuple[dict[int, Number], dict[int, Number]]

    def __post_init__(self):
        if not 0 <= self.tau < 1:
            raise ModelError("tremble probability must lie in [0, 1)")
        for dist in self.noise:
            if any(p < 0 for p in dist.values()) or sum(dist.values()) != 1:
                raise ModelError("tremble noise must be a distribution")

    @staticmethod
    def uniform(tau: Number, messages: tuple[tuple[int, ...], tuple[int, ...]]) -> "TrembleSpec":
        noise = tuple({m: Fraction(1, len(ms)) for m in ms} for ms in messages)
        return TrembleSpec(rat(tau), noise)

    @staticmethod
    def point(tau: Number, messages, target: tuple[int, int]) -> "TrembleSpec":
        noise = tuple(
            {m: Fraction(1) if m == target[i] else Fraction(0) for m in messages[i]}
            for i in range(2)
        )
        return TrembleSpec(rat(tau), noise)


@dataclass(frozen=True)
class SignalStructure:
    """Joint distribution of the state and both agents' private signals,
    with per-agent meaning maps into state indices (1-based)."""

    sizes: tuple[int, int]
    joint: dict[tuple[int, int, int], Number]  # (state, s1, s2) -> prob, 0-based
    meanings: tuple[tuple[int, ...], tuple[int, ...]]  # h_i, 1-based state index

    def __post_init__(self):
        if sum(self.joint.values()) != 1:
            raise ModelError("signal joint distribution must sum to one")
        for i in (0, 1):
            if len(self.meanings[i]) != self.sizes[i]:
                raise ModelError("meaning map must cover every signal")

    def theta_marginal(self, n: int) -> tuple[Number, ...]:
        out = [Fraction(0)] * n
        for (theta, _, _), p in self.joint.items():
            out[theta] += p
        return tuple(out)

    def signal_prob(self, agent: int, k: int) -> Number:
        pos = 1 + agent
        return sum(p for key, p in self.joint.items() if key[pos] == k)


def revealing_signals(scenario: ScenarioModel) -> SignalStructure:
    """Each agent's signal equals the state; size zero."""
    n = scenario.n
    joint = {(j, j, j): scenario.prior[j] for j in range(n)}
    h = tuple(range(1, n + 1))
    return SignalStructure((n, n), joint, (h, h))


def mislabel_signals(scenario: ScenarioModel, delta: Number) -> SignalStructure:
    """Both agents always see the same signal, whose meaning differs from
    the state (cyclic shift) with probability ``delta``; size is exactly
    ``delta``."""
    delta = rat(delta)
    n = scenario.n
    joint: dict[tuple[int, int, int], Number] = {}
    for j in range(n):
        joint[(j, j, j)] = joint.get((j, j, j), Fraction(0)) + scenario.prior[j] * (1 - delta)
        k = (j + 1) % n
        joint[(j, k, k)] = joint.get((j, k, k), Fraction(0)) + scenario.prior[j] * delta
    h = tuple(range(1, n + 1))
    return SignalStructure((n, n), joint, (h, h))


def size_of_signal_structure(
    structure: SignalStructure, prior: tuple[Number, ...]
) -> Number:
    """Smallest ``tau`` satisfying both agreement conditions, after checking
    that the state marginal matches the prior."""
    n = len(prior)
    marginal = structure.theta_marginal(n)
    if any(marginal[j] != prior[j] for j in range(n)):
        raise ModelError("signal structure marginal on states differs from the prior")
    tau = Fraction(0)
    for agent in (0, 1):
        h_own = structure.meanings[agent]
        h_opp = structure.meanings[1 - agent]
        for k in range(structure.sizes[agent]):
            total = structure.signal_prob(agent, k)
            if total == 0:
                continue
            agree = sum(
                p
                for (theta, s1, s2), p in structure.joint.items()
                if (s1 if agent == 0 else s2) == k
                and h_opp[s2 if agent == 0 else s1] == h_own[k]
            )
            tau = max(tau, 1 - agree / total)
        matched = sum(
            p
            for (theta, s1, s2), p in structure.joint.items()
            if h_own[s1 if agent == 0 else s2] == theta + 1
        )
        tau = max(tau, 1 - matched)
    return tau


def is_constant(strategy: PureStrategy) -> bool:
    return len(set(strategy)) <= 1


def learning_cost_of(strategy: PureStrategy, cost: Number) -> Number:
    """Zero for constant intent vectors, the learning cost otherwise."""
    return 0 * cost if is_constant(strategy) else cost


@dataclass
class Game:
    """A mechanism played under a perturbation, with optional signal noise
    and trembles.  Derived tables are memoized; inputs stay immutable."""

    scenario: ScenarioModel
    mechanism: Mechanism
    perturbation: Perturbation | None = None
    signals: SignalStructure | None = None
    tremble: TrembleSpec | None = None
    _pair_cache: dict = field(default_factory=dict, repr=False)
    _inner_cache: dict = field(default_factory=dict, repr=False)
    _u_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.perturbation is None:
            self.perturbation = unperturbed(self.scenario)
        if self.perturbation.scenario is not self.scenario:
            raise ModelError("perturbation was built for a different scenario")

    # -- information -------------------------------------------------------

    @property
    def coords(self) -> list[tuple[int, int, int, Number]]:
        """Joint support of (state, own-coordinate, opp-coordinate)."""
        if self.signals is None:
            return [(j, j, j, self.scenario.prior[j]) for j in range(self.scenario.n)]
        return [(theta, k1, k2, p) for (theta, k1, k2), p in self.signals.joint.items() if p]

    def strategy_length(self, agent: int) -> int:
        if self.signals is None:
            return self.scenario.n
        return self.signals.sizes[agent]

    def truthful(self, agent: int) -> PureStrategy:
        """Report the state index, or the meaning of the signal."""
        if self.signals is None:
            return tuple(range(1, self.scenario.n + 1))
        return self.signals.meanings[agent]

    # -- realized-message tables -------------------------------------------

    def realized(self, agent: int, intended: int) -> list[tuple[int, Number]]:
        if self.tremble is None or self.tremble.tau == 0:
            return [(intended, Fraction(1))]
        tau = self.tremble.tau
        dist: dict[int, Number] = {intended: 1 - tau}
        for m, p in self.tremble.noise[agent].items():
            if p:
                dist[m] = dist.get(m, Fraction(0)) + tau * p
        return list(dist.items())

    def pair_values(self, m1: int, m2: int):
        """Expected transfers and outcome lottery for an intended pair."""
        key = (m1, m2)
        hit = self._pair_cache.get(key)
        if hit is not None:
            return hit
        t1 = t2 = Fraction(0)
        parts = []
        for a, p in self.realized(0, m1):
            for b, q in self.realized(1, m2):
                w = p * q
                t1 += w * self.mechanism.t(0, a, b)
                t2 += w * self.mechanism.t(1, a, b)
                parts.append((w, self.mechanism.g(a, b)))
        lot = Lottery.mix(parts)
        self._pair_cache[key] = (t1, t2, lot)
        return t1, t2, lot

    def _expected_u(self, agent: int, circ: int, state: int, m1: int, m2: int) -> Number:
        key = (agent, circ, state, m1, m2)
        hit = self._u_cache.get(key)
        if hit is not None:
            return hit
        lot = self.pair_values(m1, m2)[2]
        value = sum(
            w * self.perturbation.utility(agent, circ, state, y)
            for y, w in enumerate(lot.weights)
            if w
        )
        self._u_cache[key] = value
        return value

    # -- payoffs -----------------------------------------------------------

    def inner_value(self, agent: int, circ: int, own: PureStrategy, opp: PureStrategy) -> Number:
        """Expected payoff at a fixed circumstance against an opponent pure
        strategy, integrating over states, signals, and trembles."""
        key = (agent, circ, own, opp)
        hit = self._inner_cache.get(key)
        if hit is not None:
            return hit
        total = Fraction(0)
        for theta, k1, k2, p in self.coords:
            if agent == 0:
                m1, m2 = own[k1], opp[k2]
            else:
                m1, m2 = opp[k1], own[k2]
            t = self.pair_values(m1, m2)[agent]
            total += p * (t + self._expected_u(agent, circ, theta, m1, m2))
        if not is_constant(own):
            total -= self.perturbation.cost(agent, circ)
        self._inner_cache[key] = total
        return total

    def opponent_side(self, profile: StrategyProfile, agent: int) -> dict[int, TypeStrategy]:
        return profile[1 - agent]


def expected_payoff(
    game: Game,
    agent: int,
    type_index: int,
    strategy: PureStrategy,
    opponent: dict[int, TypeStrategy],
) -> Number:
    """Interim expected payoff of a type playing a pure strategy against the
    opponent side of a profile."""
    pert = game.perturbation
    element = pert.partitions[agent][type_index]
    total_mass = sum(pert.pi[w] for w in element)
    if total_mass == 0:
        raise ModelError("expected payoff of a zero-probability type")
    value = Fraction(0)
    for w in element:
        mass = pert.pi[w]
        if mass == 0:
            continue
        opp_type = pert.type_of(1 - agent, w)
        for r, weight in opponent[opp_type].items():
            if weight:
                value += mass * weight * game.inner_value(agent, w, strategy, r)
    return value / total_mass


def mixture_payoff(
    game: Game,
    agent: int,
    type_index: int,
    mixture: TypeStrategy,
    opponent: dict[int, TypeStrategy],
) -> Number:
    return sum(
        w * expected_payoff(game, agent, type_index, s, opponent)
        for s, w in mixture.items()
        if w
    )


def outcome_distribution(game: Game, profile: StrategyProfile, state: int) -> Lottery:
    """Implemented lottery conditional on the state, integrating over
    circumstances, signals, mixtures, and trembles."""
    pert = game.perturbation
    coords = [
        (k1, k2, p / game.scenario.prior[state])
        for theta, k1, k2, p in game.coords
        if theta == state
    ]
    parts = []
    for w in range(pert.size):
        mass = pert.pi[w]
        if mass == 0:
            continue
        mix1 = profile[0][pert.type_of(0, w)]
        mix2 = profile[1][pert.type_of(1, w)]
        for s1, w1 in mix1.items():
            for s2, w2 in mix2.items():
                weight = mass * w1 * w2
                if not weight:
                    continue
                for k1, k2, pc in coords:
                    lot = game.pair_values(s1[k1], s2[k2])[2]
                    parts.append((weight * pc, lot))
    return Lottery.mix(parts)


def max_tv_to_target(game: Game, profile: StrategyProfile) -> Number:
    return max(
        tv_distance(outcome_distribution(game, profile, j), game.scenario.scf(j))
        for j in range(game.scenario.n)
    )


# -- restricted strategy sets and replacements -----------------------------


def full_strategy_set(messages: tuple[int, ...], length: int) -> list[PureStrategy]:
    return [tuple(s) for s in itertools.product(messages, repeat=length)]


def restricted_strategy_set(
    variant: str,
    n: int,
    meanings: tuple[int, ...] | None = None,
) -> list[PureStrategy]:
    """The pure strategies kept by each construction's restricted game.

    ``"sqr"``: entry ``j`` may be the status-quo message or the state index.
    ``"asqr"``: any negative message is also allowed.
    ``"signals"``: per signal, negatives, the status quo, or the signal's
    meaning (pass the agent's meaning map).
    """
    negatives = tuple(range(-n, -1))
    if variant == "sqr":
        choice = [(1,) if j == 1 else (1, j) for j in range(1, n + 1)]
    elif variant == "asqr":
        choice = [
            negatives + (1,) if j == 1 else negatives + (1, j) for j in range(1, n + 1)
        ]
    elif variant == "signals":
        if meanings is None:
            raise ModelError("signals variant needs the agent's meaning map")
        choice = [
            negatives + (1,) if h == 1 else negatives + (1, h) for h in meanings
        ]
    else:
        raise ModelError(f"unknown restricted-set variant {variant!r}")
    return sorted(itertools.product(*choice))


def canonical_replacement(
    strategy: PureStrategy,
    variant: str,
    n: int,
    meanings: tuple[int, ...] | None = None,
) -> PureStrategy:
    """Map a strategy outside the restricted set to its canonical stand-in.

    The plain-rule variant replaces invalid entries by the status quo
    message; the augmented variants flip invalid entries to their negative,
    except a wholly-constant high vector which flips as a whole.
    """
    if meanings is None:
        meanings = tuple(range(1, n + 1))
    if variant == "sqr":
        allowed = [{1, j} for j in meanings]
        if all(m in a for m, a in zip(strategy, allowed)):
            raise ModelError("strategy already belongs to the restricted set")
        return tuple(m if m in a else 1 for m, a in zip(strategy, allowed))
    if variant in ("asqr", "signals"):
        negatives = set(range(-n, -1))
        allowed = [negatives | {1, j} for j in meanings]
        if all(m in a for m, a in zip(strategy, allowed)):
            raise ModelError("strategy already belongs to the restricted set")
        if is_constant(strategy) and strategy[0] >= 2:
            return tuple(-m for m in strategy)
        return tuple(m if m in a else -m for m, a in zip(strategy, allowed))
    raise ModelError(f"unknown replacement variant {variant!r}")


# -- profile helpers -------------------------------------------------------


def pure_profile(game: Game, strategies: tuple[PureStrategy, PureStrategy]) -> StrategyProfile:
    """Every type of each agent plays the given pure strategy."""
    pert = game.perturbation
    return [
        {t: {strategies[agent]: Fraction(1)} for t in range(len(pert.partitions[agent]))}
        for agent in (0, 1)
    ]


def truthful_profile(game: Game) -> StrategyProfile:
    return pure_profile(game, (game.truthful(0), game.truthful(1)))
