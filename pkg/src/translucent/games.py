"""Normal-form games and the four canonical social dilemmas.

A social dilemma here is a finite game with a unique pure Nash profile and a
unique welfare-maximizing pure profile that strictly improves every player's
payoff over the Nash profile.  "Cooperate" means playing one's component of
the welfare profile, "defect" the Nash component.

Payoffs are computed by rule, never by materialized matrices, so price/claim
ranges and contribution grids can be large; exhaustive checks take an explicit
profile budget.  All payoffs are exact Fractions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterator, Optional, Sequence

from .exact import Numeric, to_exact

Strategy = Hashable
Profile = tuple  # tuple[Strategy, ...]

COOPERATE = "C"
DEFECT = "D"

KINDS = ("pd", "pgg", "bertrand", "td")


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would exceed the configured budget."""

    def __init__(self, required: int, budget: int, what: str = "profiles"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration requires {required} {what}, exceeding budget {budget}"
        )


@dataclass(frozen=True)
class NormalFormGame:
    """Finite N-player game with indexed strategy sets and a payoff rule.

    ``payoff_rule(profile, i)`` must be total over the product of the
    strategy sets and return an exact number.  ``symmetric`` marks games
    whose payoff depends only on own strategy and the multiset of others'
    strategies; the engines use it to aggregate over counts.
    """

    num_players: int
    strategy_sets: tuple
    payoff_rule: Callable[[Profile, int], Fraction] = field(compare=False)
    symmetric: bool = False
    name: str = "custom"

    def __post_init__(self):
        if self.num_players < 2:
            raise ValueError("a game needs at least 2 players")
        if len(self.strategy_sets) != self.num_players:
            raise ValueError("one strategy set per player required")
        object.__setattr__(
            self, "strategy_sets", tuple(tuple(s) for s in self.strategy_sets)
        )
        for i, s in enumerate(self.strategy_sets):
            if not s:
                raise ValueError(f"strategy set of player {i} is empty")
            if len(set(s)) != len(s):
                raise ValueError(f"strategy set of player {i} has duplicates")

    def payoff(self, profile: Profile, i: int) -> Fraction:
        self._check_profile(profile)
        if not 0 <= i < self.num_players:
            raise IndexError(f"player index {i} out of range 0..{self.num_players - 1}")
        return to_exact(self.payoff_rule(tuple(profile), i))

    def payoffs(self, profile: Profile) -> tuple:
        return tuple(self.payoff(profile, i) for i in range(self.num_players))

    def strategy_index(self, i: int, strategy: Strategy) -> int:
        try:
            return self.strategy_sets[i].index(strategy)
        except ValueError:
            raise ValueError(f"{strategy!r} is not a strategy of player {i}") from None

    def profile_count(self) -> int:
        n = 1
        for s in self.strategy_sets:
            n *= len(s)
        return n

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*self.strategy_sets)

    def _check_profile(self, profile: Sequence) -> None:
        if len(profile) != self.num_players:
            raise ValueError(
                f"profile has {len(profile)} entries for {self.num_players} players"
            )
        for i, s in enumerate(profile):
            if s not in self.strategy_sets[i]:
                raise ValueError(f"{s!r} is not a strategy of player {i}")


@dataclass(frozen=True)
class SocialDilemma:
    """A game tagged with its unique Nash and welfare-maximizing profiles."""

    game: NormalFormGame
    kind: str
    params: dict = field(compare=False)
    nash_profile: Profile
    welfare_profile: Profile

    @property
    def num_players(self) -> int:
        return self.game.num_players

    def cooperate_strategy(self, i: int) -> Strategy:
        return self.welfare_profile[i]

    def defect_strategy(self, i: int) -> Strategy:
        return self.nash_profile[i]

    def payoff(self, profile: Profile, i: int) -> Fraction:
        return self.game.payoff(profile, i)

    def payoff_vs_counts(self, i: int, strategy: Strategy, k_cooperating: int) -> Fraction:
        """Payoff of ``i`` playing ``strategy`` when exactly ``k_cooperating``
        of the other players cooperate and the rest defect.

        Only meaningful for symmetric dilemmas; the profile is materialized
        and fed through the ordinary payoff rule so there is a single source
        of truth for payoffs.
        """
        n = self.num_players
        if not 0 <= k_cooperating <= n - 1:
            raise ValueError(f"cooperator count {k_cooperating} out of range")
        profile = []
        placed = 0
        for j in range(n):
            if j == i:
                profile.append(strategy)
            elif placed < k_cooperating:
                profile.append(self.cooperate_strategy(j))
                placed += 1
            else:
                profile.append(self.defect_strategy(j))
        return self.game.payoff(tuple(profile), i)


def payoff(game, profile: Profile, i: int) -> Fraction:
    """Evaluate a payoff; accepts a NormalFormGame or a SocialDilemma."""
    if isinstance(game, SocialDilemma):
        game = game.game
    return game.payoff(profile, i)


# ---------------------------------------------------------------------------
# factories


def make_prisoners_dilemma(b: Numeric, c: Numeric) -> SocialDilemma:
    """Two players pay a cost c > 0 to grant the other a benefit b > c."""
    b, c = to_exact(b), to_exact(c)
    if not c > 0:
        raise ValueError(f"cost must be positive, got c={c}")
    if not b > c:
        raise ValueError(f"benefit must exceed cost, got b={b} <= c={c}")

    def rule(profile, i):
        u = Fraction(0)
        if profile[1 - i] == COOPERATE:
            u += b
        if profile[i] == COOPERATE:
            u -= c
        return u

    game = NormalFormGame(2, ((COOPERATE, DEFECT), (COOPERATE, DEFECT)), rule,
                          symmetric=True, name="pd")
    return SocialDilemma(game, "pd", {"b": b, "c": c},
                         nash_profile=(DEFECT, DEFECT),
                         welfare_profile=(COOPERATE, COOPERATE))


def make_public_goods(n: int, rho: Numeric, grid: int = 100) -> SocialDilemma:
    """n players split a pool multiplied by rho*n; contributions on a grid.

    Each player holds one unit and contributes a grid multiple of 1/grid;
    u_i = 1 - x_i + rho * sum(x).  The default grid of 100 steps is whole
    cents on a one-dollar endowment.
    """
    if n < 2:
        raise ValueError("public goods game needs n >= 2 players")
    rho = to_exact(rho)
    if not (Fraction(1, n) < rho < 1):
        raise ValueError(
            f"marginal return must lie strictly between 1/{n} and 1, got {rho}; "
            "at the endpoints the Nash/welfare profiles are not unique"
        )
    if grid < 1:
        raise ValueError("grid must have at least one step")
    levels = tuple(Fraction(k, grid) for k in range(grid + 1))

    def rule(profile, i):
        return 1 - profile[i] + rho * sum(profile)

    game = NormalFormGame(n, (levels,) * n, rule, symmetric=True, name="pgg")
    return SocialDilemma(game, "pgg", {"n": n, "rho": rho, "grid": grid},
                         nash_profile=(Fraction(0),) * n,
                         welfare_profile=(Fraction(1),) * n)


def make_bertrand(n: int, l: int, h: int) -> SocialDilemma:
    """n firms pick integer prices in [l, h]; the lowest price wins the sale.

    Ties split the sale price equally among the tied firms.
    """
    if n < 2:
        raise ValueError("bertrand competition needs n >= 2 players")
    if not (isinstance(l, int) and isinstance(h, int)):
        raise TypeError("price floor and reservation value must be integers")
    if l < 2:
        raise ValueError(
            f"price floor must be at least 2, got {l}: with a floor of 0 or 1 "
            "the pure Nash equilibrium is not unique"
        )
    if not l < h:
        raise ValueError(f"price floor {l} must be below reservation value {h}")
    prices = tuple(range(l, h + 1))

    def rule(profile, i):
        low = min(profile)
        if profile[i] != low:
            return Fraction(0)
        return Fraction(low, profile.count(low))

    game = NormalFormGame(n, (prices,) * n, rule, symmetric=True, name="bertrand")
    return SocialDilemma(game, "bertrand", {"n": n, "l": l, "h": h},
                         nash_profile=(l,) * n, welfare_profile=(h,) * n)


def make_travelers_dilemma(l: int, h: int, bonus: Numeric) -> SocialDilemma:
    """Two travelers claim integer amounts in [l, h]; the lower claim wins.

    Equal claims pay face value; otherwise the lower claimant receives the
    low claim plus the bonus and the higher claimant the low claim minus it.
    Any bonus > 0 is accepted; note that for bonus <= 1 the high-claim pair
    is also a Nash equilibrium, so the social-dilemma axioms need bonus > 1.
    """
    if not (isinstance(l, int) and isinstance(h, int)):
        raise TypeError("claim bounds must be integers")
    if not 0 < l < h:
        raise ValueError(f"claim bounds must satisfy 0 < l < h, got l={l}, h={h}")
    bonus = to_exact(bonus)
    if not bonus > 0:
        raise ValueError(f"bonus must be positive, got {bonus}")
    claims = tuple(range(l, h + 1))

    def rule(profile, i):
        mine, other = profile[i], profile[1 - i]
        if mine == other:
            return Fraction(mine)
        if mine < other:
            return mine + bonus
        return other - bonus

    game = NormalFormGame(2, (claims, claims), rule, symmetric=True, name="td")
    return SocialDilemma(game, "td", {"l": l, "h": h, "bonus": bonus},
                         nash_profile=(l, l), welfare_profile=(h, h))


_FACTORIES = {
    "pd": lambda params: make_prisoners_dilemma(params["b"], params["c"]),
    "pgg": lambda params: make_public_goods(int(params["n"]), params["rho"],
                                            int(params.get("grid", 100))),
    "bertrand": lambda params: make_bertrand(int(params["n"]), int(params["l"]),
                                             int(params["h"])),
    "td": lambda params: make_travelers_dilemma(int(params["l"]), int(params["h"]),
                                                params["bonus"]),
}


def make_dilemma(kind: str, params: dict) -> SocialDilemma:
    if kind not in _FACTORIES:
        raise ValueError(f"unknown dilemma kind {kind!r}, expected one of {KINDS}")
    return _FACTORIES[kind](params)


# ---------------------------------------------------------------------------
# mixed profiles


class MixedProfile:
    """Per-player probability distribution over that player's strategies.

    Distributions are stored as (strategy, probability) pairs with exact
    probabilities; zero-probability strategies are dropped from the support.
    Instances are immutable by convention.
    """

    def __init__(self, game: NormalFormGame, distributions: Sequence[dict]):
        if len(distributions) != game.num_players:
            raise ValueError("one distribution per player required")
        self.game = game
        dists = []
        for i, dist in enumerate(distributions):
            clean = {}
            for s, p in dist.items():
                if s not in game.strategy_sets[i]:
                    raise ValueError(f"{s!r} is not a strategy of player {i}")
                p = to_exact(p)
                if p < 0:
                    raise ValueError(f"negative probability for player {i}")
                if p > 0:
                    clean[s] = p
            if sum(clean.values()) != 1:
                raise ValueError(f"distribution of player {i} does not sum to 1")
            dists.append(clean)
        self.distributions = tuple(dists)

    @classmethod
    def pure(cls, game: NormalFormGame, profile: Profile) -> "MixedProfile":
        return cls(game, [{s: Fraction(1)} for s in profile])

    @classmethod
    def two_point(cls, dilemma: SocialDilemma, betas: Sequence[Numeric]) -> "MixedProfile":
        """Each player cooperates with probability beta_i, else defects."""
        if len(betas) != dilemma.num_players:
            raise ValueError("one beta per player required")
        dists = []
        for i, beta in enumerate(betas):
            beta = to_exact(beta)
            if not 0 <= beta <= 1:
                raise ValueError(f"beta of player {i} must lie in [0, 1]")
            dists.append({dilemma.cooperate_strategy(i): beta,
                          dilemma.defect_strategy(i): 1 - beta})
        return cls(dilemma.game, dists)

    def prob(self, i: int, strategy: Strategy) -> Fraction:
        return self.distributions[i].get(strategy, Fraction(0))

    def support(self, i: int) -> tuple:
        return tuple(s for s in self.game.strategy_sets[i]
                     if s in self.distributions[i])

    def others_support_profiles(self, i: int) -> Iterator[tuple]:
        """Pairs (s_minus_i, probability) over the others' joint support."""
        others = [j for j in range(self.game.num_players) if j != i]
        supports = [self.support(j) for j in others]
        for combo in itertools.product(*supports):
            p = Fraction(1)
            for j, s in zip(others, combo):
                p *= self.prob(j, s)
            yield combo, p

    def expected_payoff(self, i: int, strategy: Strategy) -> Fraction:
        """E[u_i(strategy, s_-i)] with s_-i drawn from the others' mixture."""
        if strategy not in self.game.strategy_sets[i]:
            raise ValueError(f"{strategy!r} is not a strategy of player {i}")
        rule = self.game.payoff_rule  # support profiles are valid by construction
        total = Fraction(0)
        for combo, p in self.others_support_profiles(i):
            profile = list(combo)
            profile.insert(i, strategy)
            total += p * to_exact(rule(tuple(profile), i))
        return total

    def is_pure(self) -> bool:
        return all(len(d) == 1 for d in self.distributions)

    def pure_profile(self) -> Profile:
        if not self.is_pure():
            raise ValueError("profile is mixed")
        return tuple(next(iter(d)) for d in self.distributions)

    def support_profiles(self) -> Iterator[Profile]:
        return itertools.product(*(self.support(i)
                                   for i in range(self.game.num_players)))

    def joint_prob(self, profile: Profile) -> Fraction:
        p = Fraction(1)
        for i, s in enumerate(profile):
            p *= self.prob(i, s)
        return p

    def __repr__(self):
        parts = []
        for d in self.distributions:
            parts.append("{" + ", ".join(f"{s!r}: {p}" for s, p in d.items()) + "}")
        return f"MixedProfile([{', '.join(parts)}])"


# ---------------------------------------------------------------------------
# exhaustive verification


@dataclass(frozen=True)
class DilemmaReport:
    """Result of exhaustively checking the social-dilemma axioms."""

    nash_equilibria: tuple
    welfare_maximizers: tuple
    unique_nash: Optional[Profile]
    unique_welfare: Optional[Profile]
    dominance_ok: bool

    @property
    def is_social_dilemma(self) -> bool:
        return (self.unique_nash is not None
                and self.unique_welfare is not None
                and self.dominance_ok)


def _check_budget(game: NormalFormGame, budget: int) -> None:
    required = game.profile_count()
    if required > budget:
        raise BudgetExceededError(required, budget)


def enumerate_pure_nash(game: NormalFormGame, budget: int = 10_000_000) -> list:
    """All pure Nash equilibria, by exhaustive unilateral-deviation checks."""
    _check_budget(game, budget)
    result = []
    for profile in game.profiles():
        if _is_pure_nash(game, profile):
            result.append(profile)
    return result


def _is_pure_nash(game: NormalFormGame, profile: Profile) -> bool:
    # internal loop over generated profiles: call the rule directly, the
    # per-call validation of payoff() would dominate large enumerations
    rule = game.payoff_rule
    for i in range(game.num_players):
        base = rule(profile, i)
        mutable = list(profile)
        for s in game.strategy_sets[i]:
            if s == profile[i]:
                continue
            mutable[i] = s
            if rule(tuple(mutable), i) > base:
                return False
        mutable[i] = profile[i]
    return True


def verify_social_dilemma(game, budget: int = 10_000_000) -> DilemmaReport:
    """Exhaustively find pure Nash profiles and welfare maximizers.

    Reports uniqueness of both and whether the welfare profile strictly
    improves every player's payoff over the Nash profile.
    """
    if isinstance(game, SocialDilemma):
        game = game.game
    _check_budget(game, budget)
    nash = tuple(enumerate_pure_nash(game, budget))

    rule = game.payoff_rule
    best_welfare = None
    maximizers = []
    for profile in game.profiles():
        w = sum(rule(profile, i) for i in range(game.num_players))
        if best_welfare is None or w > best_welfare:
            best_welfare = w
            maximizers = [profile]
        elif w == best_welfare:
            maximizers.append(profile)
    maximizers = tuple(maximizers)

    unique_nash = nash[0] if len(nash) == 1 else None
    unique_welfare = maximizers[0] if len(maximizers) == 1 else None
    dominance_ok = False
    if unique_nash is not None and unique_welfare is not None:
        dominance_ok = all(
            game.payoff(unique_welfare, i) > game.payoff(unique_nash, i)
            for i in range(game.num_players)
        )
    return DilemmaReport(nash, maximizers, unique_nash, unique_welfare, dominance_ok)


def minimize_payoff(game: NormalFormGame, i: int, strategy: Strategy,
                    budget: int = 10_000_000) -> Fraction:
    """min over the others' pure profiles of u_i(strategy, s_-i).

    Symmetric games are reduced to multisets of the others' strategies;
    otherwise the full product is enumerated against the budget.
    """
    others = [j for j in range(game.num_players) if j != i]
    if game.symmetric:
        from math import comb

        pool = game.strategy_sets[others[0]] if others else ()
        required = comb(len(pool) + len(others) - 1, len(others))
        if required > budget:
            raise BudgetExceededError(required, budget, "opponent multisets")
        combos = itertools.combinations_with_replacement(pool, len(others))
    else:
        required = 1
        for j in others:
            required *= len(game.strategy_sets[j])
        if required > budget:
            raise BudgetExceededError(required, budget, "opponent profiles")
        combos = itertools.product(*(game.strategy_sets[j] for j in others))
    best = None
    for combo in combos:
        profile = list(combo)
        profile.insert(i, strategy)
        u = game.payoff(tuple(profile), i)
        if best is None or u < best:
            best = u
    return best


# ---------------------------------------------------------------------------
# JSON description format: {"kind": ..., "params": {...}, "grid": int?}


def dilemma_to_json(d: SocialDilemma) -> dict:
    params = {}
    for key, value in d.params.items():
        if key == "grid":
            continue
        f = to_exact(value)
        params[key] = f.numerator if f.denominator == 1 else float(f)
    doc = {"kind": d.kind, "params": params}
    if d.kind == "pgg":
        doc["grid"] = d.params["grid"]
    return doc


def dilemma_from_json(doc) -> SocialDilemma:
    if isinstance(doc, str):
        doc = json.loads(doc, parse_float=Fraction)
    if not isinstance(doc, dict):
        raise ValueError("game description must be a JSON object")
    for key in ("kind", "params"):
        if key not in doc:
            raise ValueError(f"game description is missing {key!r}")
    kind = doc["kind"]
    params = dict(doc["params"])
    if "grid" in doc:
        params["grid"] = doc["grid"]
    return make_dilemma(kind, params)
