"""Detection-aware beliefs and the generic cooperation-rationality engine.

A cooperator of type (alpha, beta) believes every other player independently
cooperates with probability beta, and that any deviation from intended
cooperation is independently detected by each other player with probability
alpha, in which case the detector defects.  On the path of play the others
therefore cooperate with probability beta; after a deviation the mixture over
detection sets collapses to independent cooperation with probability
(1 - alpha) * beta.

The engine below decides whether cooperating is a weak best response against
these beliefs by evaluating every deviation strategy exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exact import to_exact
from .games import SocialDilemma, Strategy

SUBSET_ENUM_BUDGET = 4096  # largest 2^(n-1) we expand when cross-checking


@dataclass(frozen=True)
class TranslucentType:
    """Detection probability alpha and cooperation belief beta, both in [0,1]."""

    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_exact(self.alpha))
        object.__setattr__(self, "beta", to_exact(self.beta))
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class OthersBehaviorModel:
    """Independent cooperate/defect distribution for each other player.

    ``cooperate_probs[j]`` is the cooperation probability of the j-th other
    player (players other than the focal one, in index order).  ``mode`` is
    "on_path" for undisturbed play or "post_deviation" for beliefs after an
    intended cooperator deviates.
    """

    cooperate_probs: tuple
    mode: str

    def __post_init__(self):
        probs = tuple(to_exact(p) for p in self.cooperate_probs)
        object.__setattr__(self, "cooperate_probs", probs)
        for p in probs:
            if not 0 <= p <= 1:
                raise ValueError(f"cooperation probability {p} outside [0, 1]")
        if self.mode not in ("on_path", "post_deviation"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def num_others(self) -> int:
        return len(self.cooperate_probs)

    def profile_distribution(self):
        """Pairs (cooperation pattern, probability) over {C, D}^(n-1).

        Patterns are tuples of booleans (True = cooperates), aligned with
        ``cooperate_probs``.
        """
        for pattern in itertools.product((True, False), repeat=self.num_others):
            p = Fraction(1)
            for coop, q in zip(pattern, self.cooperate_probs):
                p *= q if coop else 1 - q
            yield pattern, p

    def count_distribution(self) -> tuple:
        """P(exactly k others cooperate) for k = 0..n-1, exact.

        Computed by convolving the per-player Bernoulli distributions, so
        heterogeneous probabilities are handled too.
        """
        dist = [Fraction(1)]
        for q in self.cooperate_probs:
            nxt = [Fraction(0)] * (len(dist) + 1)
            for k, p in enumerate(dist):
                nxt[k] += p * (1 - q)
                nxt[k + 1] += p * q
            dist = nxt
        return tuple(dist)


def on_path_beliefs(t: TranslucentType, n: int) -> OthersBehaviorModel:
    """Beliefs of an undisturbed cooperator: others cooperate w.p. beta."""
    if n < 2:
        raise ValueError("need at least 2 players")
    return OthersBehaviorModel((t.beta,) * (n - 1), "on_path")


def deviation_mixture_distribution(t: TranslucentType, n: int) -> dict:
    """The detection-set mixture over cooperation patterns, expanded.

    Sums, over subsets J of the other players (the detectors, who defect for
    sure), alpha^|J| (1-alpha)^(n-1-|J|) times the conditional distribution in
    which players outside J cooperate independently with probability beta.
    Exponential in n; used to cross-check the product short cut.
    """
    others = n - 1
    dist: dict = {}
    for detectors in itertools.product((False, True), repeat=others):
        weight = Fraction(1)
        for d in detectors:
            weight *= t.alpha if d else 1 - t.alpha
        if weight == 0:
            continue
        free = [j for j in range(others) if not detectors[j]]
        for coop_free in itertools.product((True, False), repeat=len(free)):
            p = weight
            pattern = [False] * others
            for j, coop in zip(free, coop_free):
                p *= t.beta if coop else 1 - t.beta
                pattern[j] = coop
            if p:
                key = tuple(pattern)
                dist[key] = dist.get(key, Fraction(0)) + p
    return dist


def deviation_belief_mixture(t: TranslucentType, n: int,
                             budget: int = SUBSET_ENUM_BUDGET) -> OthersBehaviorModel:
    """Post-deviation beliefs: others cooperate w.p. (1 - alpha) * beta.

    When 2^(n-1) fits the budget, the detection-set mixture is expanded
    explicitly and checked to coincide with the product model; beyond the
    budget the product form is returned directly.
    """
    if n < 2:
        raise ValueError("need at least 2 players")
    gamma = (1 - t.alpha) * t.beta
    model = OthersBehaviorModel((gamma,) * (n - 1), "post_deviation")
    if 2 ** (n - 1) <= budget:
        mixture = deviation_mixture_distribution(t, n)
        for pattern, p in model.profile_distribution():
            if mixture.get(pattern, Fraction(0)) != p:
                raise AssertionError(
                    "detection-set mixture disagrees with the product model; "
                    f"pattern {pattern}: {mixture.get(pattern)} vs {p}"
                )
    return model


# ---------------------------------------------------------------------------
# expected utilities and the rationality verdict


def expected_utility(d: SocialDilemma, i: int, strategy: Strategy,
                     model: OthersBehaviorModel, method: str = "auto") -> Fraction:
    """E[u_i(strategy, s_-i)] with the others drawn from ``model``.

    ``method`` "counts" aggregates over cooperator counts (valid for the
    symmetric dilemmas), "enumerate" expands all cooperation patterns, and
    "auto" picks counts for symmetric games.
    """
    if model.num_others != d.num_players - 1:
        raise ValueError("model size does not match the game")
    if method == "auto":
        method = "counts" if d.game.symmetric else "enumerate"
    if method == "counts":
        total = Fraction(0)
        for k, p in enumerate(model.count_distribution()):
            if p:
                total += p * d.payoff_vs_counts(i, strategy, k)
        return total
    if method == "enumerate":
        others = [j for j in range(d.num_players) if j != i]
        total = Fraction(0)
        for pattern, p in model.profile_distribution():
            if not p:
                continue
            profile = [None] * d.num_players
            profile[i] = strategy
            for j, coop in zip(others, pattern):
                profile[j] = d.cooperate_strategy(j) if coop else d.defect_strategy(j)
            total += p * d.payoff(tuple(profile), i)
        return total
    raise ValueError(f"unknown method {method!r}")


def expected_utility_cooperate(d: SocialDilemma, i: int, t: TranslucentType,
                               method: str = "auto") -> Fraction:
    """Expected payoff of cooperating under on-path beliefs."""
    model = on_path_beliefs(t, d.num_players)
    return expected_utility(d, i, d.cooperate_strategy(i), model, method)


def expected_utility_deviation(d: SocialDilemma, i: int, t: TranslucentType,
                               s_dev: Strategy, method: str = "auto") -> Fraction:
    """Expected payoff of playing ``s_dev`` under post-deviation beliefs."""
    model = deviation_belief_mixture(t, d.num_players, budget=1)
    return expected_utility(d, i, s_dev, model, method)


@dataclass(frozen=True)
class RationalityReport:
    """Verdict on whether intended cooperation is a weak best response."""

    rational: bool
    best_deviation: Optional[Strategy]
    eu_cooperate: Fraction
    eu_best_deviation: Optional[Fraction]


class CooperationScanner:
    """Reusable cooperation-rationality engine for one symmetric dilemma.

    Precomputes the payoff of every (strategy, cooperator count) pair once,
    scaled to a common integer denominator, so that scanning a grid of types
    costs only integer arithmetic: binomial count weights as integers and
    one cross-multiplied comparison at the end.  Everything stays exact and
    the verdicts are identical to ``is_cooperation_rational``.
    """

    def __init__(self, d: SocialDilemma, i: int = 0):
        from math import comb, lcm

        if not d.game.symmetric:
            raise ValueError("count aggregation needs a symmetric dilemma")
        self.dilemma = d
        self.player = i
        self.others = d.num_players - 1
        self.binom = [comb(self.others, k) for k in range(self.others + 1)]
        coop = d.cooperate_strategy(i)
        coop_row = [d.payoff_vs_counts(i, coop, k)
                    for k in range(self.others + 1)]
        dev_rows = []
        for s in d.game.strategy_sets[i]:
            if s == coop:
                continue
            dev_rows.append((s, [d.payoff_vs_counts(i, s, k)
                                 for k in range(self.others + 1)]))
        scale = lcm(*(u.denominator for _, row in dev_rows for u in row),
                    *(u.denominator for u in coop_row))
        self.scale = scale
        self.coop_row = [int(u * scale) for u in coop_row]
        # sparse integer rows: (count, scaled payoff) with zeros dropped
        self.deviations = [
            (s, tuple((k, int(u * scale)) for k, u in enumerate(row) if u))
            for s, row in dev_rows
        ]

    def _weights(self, p: Fraction) -> tuple:
        """Unnormalized binomial weights over cooperator counts: entry k is
        C(n-1,k) * num^k * (den-num)^(n-1-k); the denominator is den^(n-1)."""
        num, den = p.numerator, p.denominator
        comp = den - num
        n = self.others
        return ([self.binom[k] * num ** k * comp ** (n - k) for k in range(n + 1)],
                den ** n)

    def verdict(self, t: TranslucentType) -> RationalityReport:
        w_path, den_path = self._weights(t.beta)
        coop_int = 0
        for w, u in zip(w_path, self.coop_row):
            if w and u:
                coop_int += w * u
        w_dev, den_dev = self._weights((1 - t.alpha) * t.beta)
        best_dev = None
        best_int = None
        for s, row in self.deviations:
            eu = 0
            for k, u in row:
                eu += w_dev[k] * u
            if best_int is None or eu > best_int:
                best_int = eu
                best_dev = s
        eu_coop = Fraction(coop_int, den_path * self.scale)
        if best_int is None:
            return RationalityReport(True, None, eu_coop, None)
        # coop_int/(den_path * scale) >= best_int/(den_dev * scale)
        rational = coop_int * den_dev >= best_int * den_path
        eu_best = Fraction(best_int, den_dev * self.scale)
        return RationalityReport(rational, best_dev, eu_coop, eu_best)


def is_cooperation_rational(d: SocialDilemma, i: int, t, *,
                            method: str = "auto") -> RationalityReport:
    """Decide rationality of cooperation by checking every deviation.

    Cooperation is rational iff its on-path expected payoff is >= the
    post-deviation expected payoff of every alternative strategy (weak
    inequality; parameter boundaries count as rational).  The best deviation
    reported is the first maximizer in strategy order.
    """
    if not isinstance(t, TranslucentType):
        t = TranslucentType(*t)
    if (method == "auto" and d.game.symmetric) or method == "counts":
        return CooperationScanner(d, i).verdict(t)

    coop = d.cooperate_strategy(i)
    eu_coop = expected_utility_cooperate(d, i, t, method)
    dev_model = deviation_belief_mixture(t, d.num_players, budget=1)
    best_dev = None
    best_eu = None
    for s in d.game.strategy_sets[i]:
        if s == coop:
            continue
        eu = expected_utility(d, i, s, dev_model, method)
        if best_eu is None or eu > best_eu:
            best_eu = eu
            best_dev = s
    rational = best_eu is None or eu_coop >= best_eu
    return RationalityReport(rational, best_dev, eu_coop, best_eu)
