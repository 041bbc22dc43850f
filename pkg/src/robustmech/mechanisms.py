"""Mechanism factories and reward-schedule solving/validation.

Message conventions (integers):

* plain and Maskin rules use ``1..n``;
* augmented/modified rules use ``{-n,...,-2} U {1} U {2,...,n}``;
* the one-respondent rule of the full-implementation result uses ``1..n``
  for the respondent and the single message ``1`` for the other agent.

Reward schedules are solved as the lexicographically minimal grid points
satisfying the relevant constraint system with at least one full grid
step of strict slack, so strictness survives exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Lottery, ModelError, ScenarioModel, is_generic
from .numeric import Number, fmt, rat


class InfeasibleScheduleError(ValueError):
    """No reward schedule satisfies the requested constraint system."""


@dataclass(frozen=True)
class RewardSchedule:
    """Diagonal rewards ``R^j``, optional base reward ``R^0`` and penalty x."""

    kind: str  # "sqr" | "asqr" | "msqr"
    rewards: dict[int, Number]  # j -> R^j; includes 0 for asqr/msqr
    penalty: Number | None = None  # x, modified rule only
    cost: Number = Fraction(1)  # c (or c-bar for the plain rule)

    def r(self, j: int) -> Number:
        return self.rewards[j]

    @property
    def top(self) -> Number:
        return self.rewards[max(self.rewards)]


@dataclass(frozen=True)
class Constraint:
    name: str
    slack: Number

    @property
    def ok(self) -> bool:
        return self.slack > 0


def check_reward_constraints(
    schedule: RewardSchedule, prior: tuple[Number, ...], c: Number, kind: str | None = None
) -> list[Constraint]:
    """Exact slack of every strict inequality the schedule must satisfy.

    All inequalities are strict, matching how the incentive arguments use
    them; a slack of zero therefore fails.
    """
    kind = kind or schedule.kind
    q = prior
    n = len(q)
    R = schedule.rewards
    out: list[Constraint] = []
    if kind == "sqr":
        out.append(Constraint("R1 > 0", R[1]))
        # Needed so replacing a constant misreport with a learning strategy
        # gains more at the top state than the worst-case learning cost.
        out.append(Constraint("R1*q1 > c_bar", R[1] * q[0] - c))
        for j in range(2, n + 1):
            out.append(Constraint(f"R{j} > R1 + 2c/q{j}", R[j] - R[1] - 2 * c / q[j - 1]))
    elif kind == "asqr":
        out.append(Constraint("R0 > 0", R[0]))
        for j in range(1, n + 1):
            out.append(Constraint(f"R{j} > R{j - 1}", R[j] - R[j - 1]))
        out.append(Constraint("R1 > R0 + 2c/q1", R[1] - R[0] - 2 * c / q[0]))
        for j in range(2, n + 1):
            out.append(Constraint(f"R{j} > R1 + 2c/q{j}", R[j] - R[1] - 2 * c / q[j - 1]))
        out.append(Constraint("R0*q1 > Rn*q2", R[0] * q[0] - R[n] * q[1]))
    elif kind == "msqr":
        x = schedule.penalty
        if x is None:
            raise ModelError("modified rule needs a penalty")
        out.append(Constraint("x > c/qn", x - c / q[n - 1]))
        for j in range(0, n + 1):
            out.append(Constraint(f"R{j} > x", R[j] - x))
        out.append(Constraint("R1 > R0 + 4c/q1", R[1] - R[0] - 4 * c / q[0]))
        for j in range(2, n + 1):
            out.append(Constraint(f"R{j} > R1 + x + 2c/q{j}", R[j] - R[1] - x - 2 * c / q[j - 1]))
        for j in range(2, n + 1):
            out.append(Constraint(f"x*q1 > q{j}*(R{j}-R0)", x * q[0] - q[j - 1] * (R[j] - R[0])))
    else:
        raise ModelError(f"unknown schedule kind {kind!r}")
    return out


def _grid_ceil(value: Number, step: Number) -> Number:
    k = math.ceil(Fraction(value) / Fraction(step))
    return k * step


def solve_rewards(
    prior: tuple[Number, ...],
    c: Number,
    kind: str,
    step: Number = 1,
    margin: int = 1,
) -> RewardSchedule:
    """Lexicographically minimal grid schedule with ``margin`` steps of slack.

    The ratio constraints of the augmented and modified rules require a
    generic prior; a tied maximum raises :class:`InfeasibleScheduleError`.
    """
    c = rat(c)
    step = rat(step)
    q = tuple(rat(p) for p in prior)
    n = len(q)
    slack = margin * step
    if kind == "sqr":
        r1 = _grid_ceil(max(slack, c / q[0] + slack), step)
        rewards = {1: r1}
        for j in range(2, n + 1):
            rewards[j] = _grid_ceil(r1 + 2 * c / q[j - 1] + slack, step)
        return RewardSchedule("sqr", rewards, cost=c)

    generic, _ = is_generic(q)
    if not generic:
        raise InfeasibleScheduleError(
            "ratio constraints need a unique strictly-most-likely state"
        )

    if kind == "asqr":
        r0 = _grid_ceil(slack, step)
        while True:
            rewards = {0: r0}
            rewards[1] = _grid_ceil(r0 + 2 * c / q[0] + slack, step)
            for j in range(2, n + 1):
                bound = max(rewards[j - 1] + slack, rewards[1] + 2 * c / q[j - 1] + slack)
                rewards[j] = _grid_ceil(bound, step)
            if r0 * q[0] - rewards[n] * q[1] >= slack * q[0]:
                return RewardSchedule("asqr", rewards, cost=c)
            r0 += step

    if kind == "msqr":
        x = _grid_ceil(c / q[n - 1] + slack, step)
        while True:
            rewards = {0: _grid_ceil(x + slack, step)}
            rewards[1] = _grid_ceil(rewards[0] + 4 * c / q[0] + slack, step)
            for j in range(2, n + 1):
                bound = max(
                    rewards[j - 1] + slack,
                    rewards[1] + x + 2 * c / q[j - 1] + slack,
                )
                rewards[j] = _grid_ceil(bound, step)
            if all(
                x * q[0] - q[j - 1] * (rewards[j] - rewards[0]) >= slack * q[0]
                for j in range(2, n + 1)
            ):
                return RewardSchedule("msqr", rewards, penalty=x, cost=c)
            x += step

    raise ModelError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class Mechanism:
    """Finite message sets with an outcome map into lotteries and transfers."""

    kind: str
    messages: tuple[tuple[int, ...], tuple[int, ...]]
    outcome: dict[tuple[int, int], Lottery]
    transfer: dict[tuple[int, int], tuple[Number, Number]]
    schedule: RewardSchedule | None = None

    def __post_init__(self):
        pairs = {(a, b) for a in self.messages[0] for b in self.messages[1]}
        if set(self.outcome) != pairs or set(self.transfer) != pairs:
            raise ModelError("outcome/transfer maps must be total on M1 x M2")

    def g(self, m1: int, m2: int) -> Lottery:
        return self.outcome[(m1, m2)]

    def t(self, agent: int, m1: int, m2: int) -> Number:
        return self.transfer[(m1, m2)][agent]

    @property
    def transfer_bound(self) -> Number:
        """Largest absolute transfer, the scale used by the impossibility
        construction."""
        return max(abs(v) for pair in self.transfer.values() for v in pair)


def _validated(schedule, prior, c, kind):
    report = check_reward_constraints(schedule, prior, c, kind)
    bad = [r for r in report if not r.ok]
    if bad:
        raise InfeasibleScheduleError(
            "; ".join(f"{r.name} violated (slack {fmt(r.slack)})" for r in bad)
        )
    return schedule


def build_maskin(scenario: ScenarioModel, reward: Number) -> Mechanism:
    """Symmetric matching rule: agree and implement the report, disagree
    and implement the midpoint lottery with zero transfers."""
    reward = rat(reward)
    if scenario.n != 2:
        raise ModelError("matching rule is defined for binary state spaces")
    if reward <= 0:
        raise ModelError("reward R must be positive")
    f = scenario.scf
    mid = Lottery.mix([(Fraction(1, 2), f(0)), (Fraction(1, 2), f(1))])
    msgs = (1, 2)
    outcome, transfer = {}, {}
    for a in msgs:
        for b in msgs:
            if a == b:
                outcome[(a, b)] = f(a - 1)
                transfer[(a, b)] = (reward, reward)
            else:
                outcome[(a, b)] = mid
                transfer[(a, b)] = (Fraction(0), Fraction(0))
    return Mechanism("maskin", (msgs, msgs), outcome, transfer)


def build_status_quo(
    scenario: ScenarioModel,
    c_bar: Number,
    schedule: RewardSchedule | None = None,
    validate: bool = True,
) -> Mechanism:
    """Status quo rule with ascending transfers: ``n`` messages per agent,
    matching reports implement the reported state, anything else the
    status quo ``f(theta^1)``."""
    c_bar = rat(c_bar)
    if c_bar < scenario.max_cost:
        raise ModelError("cost bound must dominate the unperturbed costs")
    n = scenario.n
    if schedule is None:
        schedule = solve_rewards(scenario.prior, c_bar, "sqr")
    if validate:
        _validated(schedule, scenario.prior, c_bar, "sqr")
    msgs = tuple(range(1, n + 1))
    f = scenario.scf
    outcome, transfer = {}, {}
    for a in msgs:
        for b in msgs:
            outcome[(a, b)] = f(a - 1) if a == b else f(0)
            r = schedule.r(a) if a == b else Fraction(0)
            transfer[(a, b)] = (r, r)
    return Mechanism("sqr", (msgs, msgs), outcome, transfer, schedule)


def augmented_messages(n: int) -> tuple[int, ...]:
    return tuple(range(-n, -1)) + tuple(range(1, n + 1))


def _magnitude_outcome(scenario: ScenarioModel, msgs):
    f = scenario.scf
    out = {}
    for a in msgs:
        for b in msgs:
            out[(a, b)] = f(abs(a) - 1) if abs(a) == abs(b) else f(0)
    return out


def build_augmented_status_quo(
    scenario: ScenarioModel,
    schedule: RewardSchedule | None = None,
    validate: bool = True,
) -> Mechanism:
    """Augmented rule: ``2n - 1`` messages, negative messages mirror the
    positive ones in outcomes but coordinate on the base reward ``R^0``."""
    if not scenario.generic:
        raise ModelError("augmented rule needs a generic prior")
    n = scenario.n
    c = scenario.max_cost
    if schedule is None:
        schedule = solve_rewards(scenario.prior, c, "asqr")
    if validate:
        _validated(schedule, scenario.prior, c, "asqr")
    msgs = augmented_messages(n)
    outcome = _magnitude_outcome(scenario, msgs)
    transfer = {}
    for a in msgs:
        for b in msgs:
            if a == b and a >= 1:
                r = schedule.r(a)
            elif a <= 1 and b <= 1 and (a, b) != (1, 1):
                r = schedule.r(0)
            else:
                r = Fraction(0)
            transfer[(a, b)] = (r, r)
    return Mechanism("asqr", (msgs, msgs), outcome, transfer, schedule)


def build_modified_status_quo(
    scenario: ScenarioModel,
    schedule: RewardSchedule | None = None,
    validate: bool = True,
) -> Mechanism:
    """Modified rule: same outcomes as the augmented rule, but a sender of
    a high message pays penalty ``x`` when the opponent stays low."""
    if not scenario.generic:
        raise ModelError("modified rule needs a generic prior")
    n = scenario.n
    c = scenario.max_cost
    if schedule is None:
        schedule = solve_rewards(scenario.prior, c, "msqr")
    if validate:
        _validated(schedule, scenario.prior, c, "msqr")
    msgs = augmented_messages(n)
    outcome = _magnitude_outcome(scenario, msgs)
    x = schedule.penalty

    def t_for(own: int, other: int, j_equal: bool) -> Number:
        if j_equal and own >= 1:
            return schedule.r(own)
        if own <= 1:
            return schedule.r(0)
        if own >= 2 and other <= 1:
            return schedule.r(0) - x
        return Fraction(0)

    transfer = {}
    for a in msgs:
        for b in msgs:
            same = a == b
            transfer[(a, b)] = (t_for(a, b, same), t_for(b, a, same))
    return Mechanism("msqr", (msgs, msgs), outcome, transfer, schedule)


def build_one_respondent(
    scenario: ScenarioModel, respondent: int, transfers: dict[int, Number]
) -> Mechanism:
    """Mechanism that asks only one agent: the respondent picks a state
    index and is paid a state-class reward; the other agent is ignored."""
    n = scenario.n
    resp_msgs = tuple(range(1, n + 1))
    other_msgs = (1,)
    msgs = (resp_msgs, other_msgs) if respondent == 0 else (other_msgs, resp_msgs)
    outcome, transfer = {}, {}
    for a in msgs[0]:
        for b in msgs[1]:
            pick = a if respondent == 0 else b
            outcome[(a, b)] = scenario.scf(pick - 1)
            pay = transfers[pick]
            transfer[(a, b)] = (pay, Fraction(0)) if respondent == 0 else (Fraction(0), pay)
    return Mechanism("one-respondent", msgs, outcome, transfer)


def export_mechanism(mechanism: Mechanism) -> str:
    """Tabular text form: one row per message pair for auditability."""
    lines = ["m1\tm2\toutcome\tt1\tt2"]
    for a in mechanism.messages[0]:
        for b in mechanism.messages[1]:
            lot = ",".join(fmt(w) for w in mechanism.outcome[(a, b)].weights)
            t1, t2 = mechanism.transfer[(a, b)]
            lines.append(f"{a}\t{b}\t{lot}\t{fmt(t1)}\t{fmt(t2)}")
    return "\n".join(lines) + "\n"


def import_mechanism(text: str, kind: str = "imported") -> Mechanism:
    """Inverse of :func:`export_mechanism`."""
    rows = [ln for ln in text.strip().splitlines() if ln.strip()]
    if rows and rows[0].startswith("m1"):
        rows = rows[1:]
    outcome, transfer = {}, {}
    m1s, m2s = set(), set()
    for ln in rows:
        a, b, lot, t1, t2 = ln.split("\t")
        a, b = int(a), int(b)
        m1s.add(a)
        m2s.add(b)
        outcome[(a, b)] = Lottery(tuple(rat(w) for w in lot.split(",")))
        transfer[(a, b)] = (rat(t1), rat(t2))
    return Mechanism(kind, (tuple(sorted(m1s)), tuple(sorted(m2s))), outcome, transfer)
