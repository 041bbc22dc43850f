"""Equilibrium verification, best responses, dominance thresholds,
iterated elimination, and a small exact bimatrix solver.

Everything here works over finite strategy sets with exact arithmetic when
the scenario is exact.  Best-response ties are broken by canonical
strategy order: lexicographic over intent vectors with ascending message
numbers, so negative messages come before positive ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .core import ModelError, ScenarioModel
from .engine import (
    Game,
    PureStrategy,
    StrategyProfile,
    TypeStrategy,
    expected_payoff,
    is_constant,
    max_tv_to_target,
    mixture_payoff,
)
from .mechanisms import Mechanism
from .numeric import Number


def best_response(
    game: Game,
    agent: int,
    type_index: int,
    opponent: dict[int, TypeStrategy],
    strategy_set: list[PureStrategy],
) -> tuple[list[PureStrategy], Number]:
    """All exact maximizers over the strategy set, canonically ordered,
    with the attained value."""
    if not strategy_set:
        raise ModelError("empty strategy set")
    best_value = None
    winners: list[PureStrategy] = []
    for s in sorted(strategy_set):
        v = expected_payoff(game, agent, type_index, s, opponent)
        if best_value is None or v > best_value:
            best_value, winners = v, [s]
        elif v == best_value:
            winners.append(s)
    return winners, best_value


@dataclass(frozen=True)
class EquilibriumReport:
    """Best-response residuals of a profile plus implementation metrics."""

    residuals: dict[tuple[int, int], Number]  # (agent, type) -> gain from best deviation
    max_residual: Number
    is_equilibrium: bool
    epsilon: Number
    truthful_mass: Number | None
    max_tv: Number


def truthful_probability_mass(game: Game, profile: StrategyProfile) -> Number:
    """Probability that both agents' realized intent is the truthful one."""
    pert = game.perturbation
    mass = Fraction(0)
    for w in range(pert.size):
        p = pert.pi[w]
        if not p:
            continue
        w1 = profile[0][pert.type_of(0, w)].get(game.truthful(0), Fraction(0))
        w2 = profile[1][pert.type_of(1, w)].get(game.truthful(1), Fraction(0))
        mass += p * w1 * w2
    return mass


def verify_equilibrium(
    game: Game,
    profile: StrategyProfile,
    strategy_sets: tuple[list[PureStrategy], list[PureStrategy]],
    epsilon: Number = 0,
) -> EquilibriumReport:
    """Interim check: for every positive-probability type, the residual is
    the best pure deviation value minus the prescribed mixture's value.
    Pure deviations suffice because payoffs are affine in own mixtures."""
    residuals: dict[tuple[int, int], Number] = {}
    pert = game.perturbation
    for agent in (0, 1):
        opponent = profile[1 - agent]
        for t in range(len(pert.partitions[agent])):
            if pert.type_prob(agent, t) == 0:
                continue
            _, best_value = best_response(game, agent, t, opponent, strategy_sets[agent])
            own = mixture_payoff(game, agent, t, profile[agent][t], opponent)
            residuals[(agent, t)] = best_value - own
    max_res = max(residuals.values())
    return EquilibriumReport(
        residuals=residuals,
        max_residual=max_res,
        is_equilibrium=max_res <= epsilon,
        epsilon=epsilon,
        truthful_mass=truthful_probability_mass(game, profile),
        max_tv=max_tv_to_target(game, profile),
    )


# -- gamma dominance -------------------------------------------------------


@dataclass(frozen=True)
class DominanceCertificate:
    """Threshold above which truthful reporting is the strict best reply
    whenever the opponent's truthful weight exceeds it.

    ``witness`` records, for each agent and deviation, the truth-vs-truth
    gain, the adversarial worst-case gain with its per-state message
    choices, and that deviation's own threshold.
    """

    gamma: Number
    witness: tuple[dict, ...]

    @property
    def below_half(self) -> bool:
        return self.gamma < Fraction(1, 2)


def _coordinate_values(game: Game, agent: int, messages_own, messages_opp):
    """phi[k][m][b]: prior-weighted payoff of intended pair at state k."""
    n = game.scenario.n
    table = {}
    for k in range(n):
        q = game.scenario.prior[k]
        for m in messages_own:
            for b in messages_opp:
                m1, m2 = (m, b) if agent == 0 else (b, m)
                t = game.pair_values(m1, m2)[agent]
                table[(k, m, b)] = q * (t + game._expected_u(agent, 0, k, m1, m2))
    return table


def gamma_dominance_threshold(
    mechanism: Mechanism,
    scenario: ScenarioModel,
    restricted_sets: tuple[list[PureStrategy], list[PureStrategy]],
    c_bar: Number,
) -> DominanceCertificate:
    """Exact threshold for truthful reporting on the unperturbed scenario.

    Against a mixture putting weight gamma on the truthful opponent and
    1 - gamma on an adversarial restricted strategy, the gain of truth over
    a deviation is linear in gamma; the adversarial side separates across
    states because the restricted sets are products over coordinates, so
    the worst case is a per-state minimum.  The reported gamma is the
    largest root across agents and deviations (zero when every deviation
    is dominated outright); strictness holds for truthful weight above it.

    The learning-cost bound ``c_bar`` is charged in place of the scenario
    cost, which makes the certificate valid for every cost profile below
    the bound.
    """
    truth = tuple(range(1, scenario.n + 1))
    gamma = Fraction(0)
    witness = []
    for agent in (0, 1):
        own_set = restricted_sets[agent]
        opp_set = restricted_sets[1 - agent]
        if truth not in own_set:
            raise ModelError("restricted set must contain the truthful strategy")
        game = Game(scenario, mechanism)
        msgs_own = sorted({m for s in own_set for m in s})
        msgs_opp = sorted({m for s in opp_set for m in s})
        phi = _coordinate_values(game, agent, msgs_own, msgs_opp)
        allowed = [sorted({r[k] for r in opp_set}) for k in range(scenario.n)]
        separable = len(opp_set) == _product(len(a) for a in allowed)
        for s in own_set:
            if s == truth:
                continue
            cost_term = (0 if is_constant(s) else c_bar) - c_bar  # truth is non-constant
            d_truth = cost_term + sum(
                phi[(k, truth[k], truth[k])] - phi[(k, s[k], truth[k])]
                for k in range(scenario.n)
            )
            if d_truth <= 0:
                raise ModelError(
                    f"truthful reporting is not strictly dominant at gamma=1 "
                    f"(deviation {s} gains {-d_truth})"
                )
            if separable:
                picks = []
                d_adv = cost_term
                for k in range(scenario.n):
                    b_best = min(
                        allowed[k],
                        key=lambda b: phi[(k, truth[k], b)] - phi[(k, s[k], b)],
                    )
                    picks.append(b_best)
                    d_adv += phi[(k, truth[k], b_best)] - phi[(k, s[k], b_best)]
            else:
                best = None
                for r in opp_set:
                    v = cost_term + sum(
                        phi[(k, truth[k], r[k])] - phi[(k, s[k], r[k])]
                        for k in range(scenario.n)
                    )
                    if best is None or v < best[0]:
                        best = (v, r)
                d_adv, picks = best[0], list(best[1])
            root = Fraction(0) if d_adv > 0 else d_adv / (d_adv - d_truth)
            gamma = max(gamma, root)
            witness.append(
                {
                    "agent": agent,
                    "deviation": s,
                    "gain_vs_truthful": d_truth,
                    "worst_case_gain": d_adv,
                    "adversary": tuple(picks),
                    "threshold": root,
                }
            )
    return DominanceCertificate(gamma, tuple(witness))


def _product(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


# -- best-response iteration ----------------------------------------------


@dataclass(frozen=True)
class BRIterationResult:
    profile: StrategyProfile
    rounds: int
    converged: bool
    cycled: bool
    report: EquilibriumReport | None


def iterate_best_response(
    game: Game,
    strategy_sets: tuple[list[PureStrategy], list[PureStrategy]],
    initial: StrategyProfile | None = None,
    max_rounds: int = 200,
) -> BRIterationResult:
    """Synchronous pure best-response iteration from the truthful profile
    (or a given start).  Ties resolve to the canonically first maximizer.
    On convergence the fixed point is re-verified."""
    from .engine import truthful_profile

    pert = game.perturbation
    profile = initial if initial is not None else truthful_profile(game)
    seen = {_profile_key(profile): 0}
    rounds = 0
    cycled = False
    for rounds in range(1, max_rounds + 1):
        nxt: StrategyProfile = [{}, {}]
        for agent in (0, 1):
            opponent = profile[1 - agent]
            for t in range(len(pert.partitions[agent])):
                if pert.type_prob(agent, t) == 0:
                    nxt[agent][t] = dict(profile[agent][t])
                    continue
                winners, _ = best_response(game, agent, t, opponent, strategy_sets[agent])
                nxt[agent][t] = {winners[0]: Fraction(1)}
        key = _profile_key(nxt)
        if key == _profile_key(profile):
            report = verify_equilibrium(game, nxt, strategy_sets)
            return BRIterationResult(nxt, rounds, True, False, report)
        if key in seen:
            cycled = True
            profile = nxt
            break
        seen[key] = rounds
        profile = nxt
    return BRIterationResult(profile, rounds, False, cycled, None)


def _profile_key(profile: StrategyProfile):
    return tuple(
        tuple(sorted((t, tuple(sorted(mix.items()))) for t, mix in side.items()))
        for side in profile
    )


# -- iterated strict dominance --------------------------------------------


def iterated_dominance(
    game: Game,
    strategy_sets: tuple[list[PureStrategy], list[PureStrategy]],
    mixture_denominator: int = 0,
    max_rounds: int = 10_000,
) -> tuple[list[dict[int, list[PureStrategy]]], int]:
    """Interim iterated elimination of strictly dominated strategies.

    A type's strategy is eliminated when some other surviving strategy
    (or, if ``mixture_denominator`` > 0, a two-point mixture on that grid)
    does strictly better against every selection of surviving opponent
    strategies.  The worst case separates across opponent types, so each
    comparison is a sum of per-opponent-type minima.  Returns the
    surviving sets per (agent, type) and the number of rounds to the
    fixed point.
    """
    pert = game.perturbation
    surviving: list[dict[int, list[PureStrategy]]] = [
        {
            t: sorted(strategy_sets[agent])
            for t in range(len(pert.partitions[agent]))
        }
        for agent in (0, 1)
    ]
    rounds = 0
    while rounds < max_rounds:
        changed = False
        for agent in (0, 1):
            opp = 1 - agent
            for t, pool in surviving[agent].items():
                if pert.type_prob(agent, t) == 0 or len(pool) <= 1:
                    continue
                keep = [
                    s
                    for s in pool
                    if not _is_dominated(
                        game, agent, t, s, pool, surviving[opp], mixture_denominator
                    )
                ]
                if len(keep) != len(pool):
                    surviving[agent][t] = keep
                    changed = True
        if not changed:
            break
        rounds += 1
    return surviving, rounds


def _type_groups(game: Game, agent: int, t: int):
    """Own-type circumstances grouped by the opponent type they induce."""
    pert = game.perturbation
    groups: dict[int, list[int]] = {}
    for w in pert.partitions[agent][t]:
        if pert.pi[w]:
            groups.setdefault(pert.type_of(1 - agent, w), []).append(w)
    return groups


def _pair_margin(game: Game, agent: int, t: int, better, worse, opp_surviving):
    """Worst-case payoff gain of ``better`` over ``worse``; ``better`` may
    be a pure strategy or a [(strategy, weight)] mixture."""
    pert = game.perturbation
    total = Fraction(0)
    for opp_type, circs in _type_groups(game, agent, t).items():
        best = None
        for r in opp_surviving[opp_type]:
            gain = Fraction(0)
            for w in circs:
                mass = pert.pi[w]
                if isinstance(better, tuple):
                    up = game.inner_value(agent, w, better, r)
                else:
                    up = sum(
                        wt * game.inner_value(agent, w, s, r) for s, wt in better
                    )
                gain += mass * (up - game.inner_value(agent, w, worse, r))
            if best is None or gain < best:
                best = gain
        total += best
    return total


def _is_dominated(game, agent, t, s, pool, opp_surviving, mixture_denominator):
    for other in pool:
        if other == s:
            continue
        if _pair_margin(game, agent, t, other, s, opp_surviving) > 0:
            return True
    if mixture_denominator > 1:
        for a, b in itertools.combinations([x for x in pool if x != s], 2):
            for k in range(1, mixture_denominator):
                w = Fraction(k, mixture_denominator)
                mix = [(a, w), (b, 1 - w)]
                if _pair_margin(game, agent, t, mix, s, opp_surviving) > 0:
                    return True
    return False


# -- exact bimatrix solving ------------------------------------------------


def solve_linear(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gaussian elimination over the rationals; None when singular or
    inconsistent."""
    n = len(matrix)
    m = len(matrix[0]) if n else 0
    aug = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    pivots = []
    row = 0
    for col in range(m):
        pivot = next((r for r in range(row, n) if aug[r][col] != 0), None)
        if pivot is None:
            continue
        aug[row], aug[pivot] = aug[pivot], aug[row]
        factor = aug[row][col]
        aug[row] = [v / factor for v in aug[row]]
        for r in range(n):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
        if row == n:
            break
    for r in range(row, n):
        if aug[r][m] != 0:
            return None
    if len(pivots) < m:
        return None
    out = [Fraction(0)] * m
    for r, col in enumerate(pivots):
        out[col] = aug[r][m]
    return out


def support_enumeration_nash(
    a: list[list[Number]], b: list[list[Number]]
) -> tuple[tuple[Number, ...], tuple[Number, ...], Number, Number]:
    """One exact Nash equilibrium of a bimatrix game.

    Supports are scanned by total size then lexicographically, so the
    output is deterministic.  Returns the two mixtures and their values.
    """
    rows, cols = len(a), len(a[0])
    a = [[Fraction(x) if not isinstance(x, Fraction) else x for x in row] for row in a]
    b = [[Fraction(x) if not isinstance(x, Fraction) else x for x in row] for row in b]
    supports_r = _supports(rows)
    supports_c = _supports(cols)
    for size in range(2, rows + cols + 1):
        for sr in supports_r:
            for sc in supports_c:
                if len(sr) + len(sc) != size:
                    continue
                result = _try_supports(a, b, sr, sc)
                if result is not None:
                    return result
    raise ModelError("no equilibrium found; inputs are not a finite bimatrix game")


def _supports(k: int):
    out = []
    for size in range(1, k + 1):
        out.extend(itertools.combinations(range(k), size))
    return sorted(out, key=lambda s: (len(s), s))


def _try_supports(a, b, sr, sc):
    rows, cols = len(a), len(a[0])
    # Column player's mixture equalizes row payoffs on sr; likewise for rows.
    y = _equalizing(
        [[a[i][j] for j in sc] for i in sr], len(sc)
    )
    x = _equalizing(
        [[b[i][j] for i in sr] for j in sc], len(sr)
    )
    if x is None or y is None:
        return None
    xs = [Fraction(0)] * rows
    ys = [Fraction(0)] * cols
    for idx, i in enumerate(sr):
        xs[i] = x[idx]
    for idx, j in enumerate(sc):
        ys[j] = y[idx]
    va = [sum(a[i][j] * ys[j] for j in range(cols)) for i in range(rows)]
    vb = [sum(b[i][j] * xs[i] for i in range(rows)) for j in range(cols)]
    value_a = va[sr[0]]
    value_b = vb[sc[0]]
    if any(va[i] > value_a for i in range(rows)):
        return None
    if any(vb[j] > value_b for j in range(cols)):
        return None
    return tuple(xs), tuple(ys), value_a, value_b


def _equalizing(payoff_rows, width):
    """Opponent mixture making all listed payoff rows equal, or None."""
    k = len(payoff_rows)
    matrix = []
    rhs = []
    for r in range(1, k):
        matrix.append([payoff_rows[r][j] - payoff_rows[0][j] for j in range(width)])
        rhs.append(Fraction(0))
    matrix.append([Fraction(1)] * width)
    rhs.append(Fraction(1))
    sol = solve_linear(matrix, rhs)
    if sol is None or any(v < 0 for v in sol):
        return None
    return sol
