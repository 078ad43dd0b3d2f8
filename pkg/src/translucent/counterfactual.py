"""Finite counterfactual structures: states, beliefs, and closest-state maps.

A structure is a tuple (states, strat, closest, beliefs) over a finite game:
``strat`` assigns a pure strategy profile to every state, ``closest`` says
which state would result if a player switched strategies, and ``beliefs``
gives each player a probability measure over states at every state.  The
axioms checked by the validator:

* CS1: the closest state under a switch actually plays the switched strategy;
* CS2: switching to one's current strategy leaves the state unchanged;
* PR1: a player's beliefs put probability 1 on states with their own
  current strategy;
* PR2: a player's beliefs put probability 1 on states where they hold those
  same beliefs;
* NORM: every belief measure sums to 1 (within 1e-12).

Expected utility at a state evaluates the player's current strategy against
the opponents' profiles in the belief support; expected utility on a switch
re-weights states through the closest-state map first, which is what lets a
deviation change what the player expects the others to do.

States, strategies and profiles are referenced by dense integer indices.
Belief measures are stored sparsely per state (their supports are small in
every structure built here); the closest-state map is stored as one dense
column of state indices per (player, strategy).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exact import to_exact
from .games import (BudgetExceededError, MixedProfile, NormalFormGame, Profile,
                    SocialDilemma, Strategy)

NORM_TOL = Fraction(1, 10 ** 12)
MISSING = -1


class IncoherentProfileError(ValueError):
    """Raised when a structure construction needs coherence and it fails."""

    def __init__(self, player: int, strategy, deviation):
        self.witness = (player, strategy, deviation)
        super().__init__(
            f"profile is not coherent: player {player} playing {strategy!r} "
            f"cannot justify staying when switching to {deviation!r} beats even "
            "the worst opponent reply"
        )


@dataclass(frozen=True)
class Violation:
    """One structure-axiom failure, as data."""

    axiom: str
    state: int
    player: Optional[int] = None
    strategy: Optional[object] = None
    detail: str = ""

    def __str__(self):
        parts = [f"{self.axiom} violated at state {self.state}"]
        if self.player is not None:
            parts.append(f"player {self.player}")
        if self.strategy is not None:
            parts.append(f"strategy {self.strategy!r}")
        if self.detail:
            parts.append(self.detail)
        return ", ".join(parts)


@dataclass(frozen=True)
class StateUtilityReport:
    """Expected utilities at a state, and the rationality verdict there."""

    eu: Fraction
    eu_switch: dict
    rational: bool


@dataclass(frozen=True)
class CounterfactualStructure:
    """Immutable finite counterfactual structure.

    ``states`` holds the strategy profile of each state; ``aux`` optionally
    carries extra per-state annotation (e.g. detection bits) that plays no
    role in the axioms.  ``closest_columns[(i, j)]`` maps every state to the
    state reached when player ``i`` switches to their j-th strategy.
    ``beliefs[i][k]`` is player i's measure at state k as a sparse mapping
    from state index to probability.  ``game`` may be None for structures
    loaded from files; axiom validation works without it, utilities need it.
    """

    strategy_sets: tuple
    states: tuple
    closest_columns: dict = field(compare=False)
    beliefs: tuple = field(compare=False)
    aux: Optional[tuple] = None
    game: Optional[NormalFormGame] = field(default=None, compare=False)

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_players(self) -> int:
        return len(self.strategy_sets)

    def strat(self, omega: int) -> Profile:
        return self.states[omega]

    def strategy_index(self, i: int, strategy: Strategy) -> int:
        try:
            return self.strategy_sets[i].index(strategy)
        except ValueError:
            raise ValueError(f"{strategy!r} is not a strategy of player {i}") from None

    def closest(self, omega: int, i: int, strategy: Strategy) -> int:
        target = self.closest_columns[(i, self.strategy_index(i, strategy))][omega]
        if target == MISSING:
            raise ValueError(
                f"closest-state entry missing for state {omega}, player {i}, "
                f"strategy {strategy!r}"
            )
        return target

    def belief(self, i: int, omega: int) -> dict:
        return self.beliefs[i][omega]


# ---------------------------------------------------------------------------
# axiom validation


def validate_structure(m: CounterfactualStructure) -> list:
    """Check CS1, CS2, PR1, PR2 and normalization; violations come back as
    data, in deterministic (state, player, strategy) order."""
    violations = []
    n_states = m.num_states

    for omega in range(n_states):
        profile = m.states[omega]
        for i in range(m.num_players):
            own = profile[i]
            for j, s in enumerate(m.strategy_sets[i]):
                target = m.closest_columns[(i, j)][omega]
                if not 0 <= target < n_states:
                    violations.append(Violation(
                        "CS1", omega, i, s,
                        "missing or out-of-range closest-state entry"))
                    continue
                if m.states[target][i] != s:
                    violations.append(Violation(
                        "CS1", omega, i, s,
                        f"closest state {target} plays {m.states[target][i]!r}"))
                if s == own and target != omega:
                    violations.append(Violation(
                        "CS2", omega, i, s,
                        f"keeping the current strategy moved the state to {target}"))

    for i in range(m.num_players):
        for omega in range(n_states):
            dist = m.beliefs[i][omega]
            total = sum(dist.values(), Fraction(0))
            if abs(total - 1) > NORM_TOL:
                violations.append(Violation(
                    "NORM", omega, i, detail=f"belief mass sums to {total}"))
            own = m.states[omega][i]
            for target, p in dist.items():
                if p <= 0:
                    continue
                if m.states[target][i] != own:
                    violations.append(Violation(
                        "PR1", omega, i,
                        detail=f"positive mass on state {target} where the "
                               f"player uses {m.states[target][i]!r}"))
                if m.beliefs[i][target] != dist:
                    violations.append(Violation(
                        "PR2", omega, i,
                        detail=f"positive mass on state {target} with "
                               "different beliefs"))
    return violations


# ---------------------------------------------------------------------------
# derived beliefs and expected utilities


def derived_beliefs(m: CounterfactualStructure, i: int, omega: int,
                    s_dev: Strategy) -> dict:
    """Pushforward of player i's beliefs at ``omega`` through the
    closest-state map under a switch to ``s_dev``; sums to 1."""
    j = m.strategy_index(i, s_dev)
    column = m.closest_columns[(i, j)]
    out: dict = {}
    for source, p in m.belief(i, omega).items():
        target = column[source]
        if target == MISSING:
            raise ValueError(
                f"closest-state entry missing for state {source}, player {i}, "
                f"strategy {s_dev!r}")
        out[target] = out.get(target, Fraction(0)) + p
    return out


def _require_game(m: CounterfactualStructure) -> NormalFormGame:
    if m.game is None:
        raise ValueError("structure has no attached game; utilities need one")
    return m.game


def eu_at_state(m: CounterfactualStructure, i: int, omega: int) -> Fraction:
    """Expected utility of player i's current strategy at ``omega``."""
    game = _require_game(m)
    own = m.states[omega][i]
    total = Fraction(0)
    for target, p in m.belief(i, omega).items():
        profile = list(m.states[target])
        profile[i] = own
        total += p * game.payoff(tuple(profile), i)
    return total


def eu_at_state_switch(m: CounterfactualStructure, i: int, omega: int,
                       s_dev: Strategy) -> Fraction:
    """Expected utility at ``omega`` if player i switched to ``s_dev``,
    with beliefs pushed through the closest-state map."""
    game = _require_game(m)
    total = Fraction(0)
    for target, p in derived_beliefs(m, i, omega, s_dev).items():
        profile = list(m.states[target])
        profile[i] = s_dev
        total += p * game.payoff(tuple(profile), i)
    return total


def is_rational_at(m: CounterfactualStructure, i: int, omega: int) -> StateUtilityReport:
    """Rationality of player i at a state: the current strategy must match
    or beat every switch (weak inequality)."""
    eu = eu_at_state(m, i, omega)
    switches = {}
    for s in m.strategy_sets[i]:
        switches[s] = eu_at_state_switch(m, i, omega, s)
    rational = all(eu >= v for v in switches.values())
    return StateUtilityReport(eu, switches, rational)


# ---------------------------------------------------------------------------
# constructions


def _as_game(game) -> NormalFormGame:
    return game.game if isinstance(game, SocialDilemma) else game


def _full_state_space(game: NormalFormGame, budget: int) -> tuple:
    count = game.profile_count()
    if count > budget:
        raise BudgetExceededError(count, budget, "states")
    return tuple(game.profiles())


def build_nash_structure(game, sigma: MixedProfile,
                         budget: int = 100_000) -> CounterfactualStructure:
    """The opaque structure witnessing a Nash equilibrium.

    States are all pure profiles; a switch moves only the switching player's
    coordinate, and beliefs at a state are the equilibrium mixture of the
    others given one's own current strategy.  Rejects profiles that are not
    Nash equilibria (every support strategy must attain the player's best
    payoff against the others' mixture).
    """
    game = _as_game(game)
    for i in range(game.num_players):
        payoffs = {s: sigma.expected_payoff(i, s) for s in game.strategy_sets[i]}
        best = max(payoffs.values())
        for s in sigma.support(i):
            if payoffs[s] != best:
                better = next(t for t, v in payoffs.items() if v == best)
                raise ValueError(
                    f"not a Nash equilibrium: player {i} gains by switching "
                    f"from {s!r} to {better!r}")

    states = _full_state_space(game, budget)
    index = {p: k for k, p in enumerate(states)}

    columns = {}
    for i in range(game.num_players):
        for j, s in enumerate(game.strategy_sets[i]):
            col = []
            for profile in states:
                moved = list(profile)
                moved[i] = s
                col.append(index[tuple(moved)])
            columns[(i, j)] = tuple(col)

    others_mixtures = []
    for i in range(game.num_players):
        pairs = list(sigma.others_support_profiles(i))
        others_mixtures.append(pairs)

    beliefs = []
    for i in range(game.num_players):
        per_state = []
        cache: dict = {}
        for profile in states:
            own = profile[i]
            if own not in cache:
                dist = {}
                for combo, p in others_mixtures[i]:
                    joint = list(combo)
                    joint.insert(i, own)
                    dist[index[tuple(joint)]] = p
                cache[own] = dist
            per_state.append(cache[own])
        beliefs.append(tuple(per_state))

    return CounterfactualStructure(game.strategy_sets, states, columns,
                                   tuple(beliefs), aux=None, game=game)


def build_coherent_structure(game, sigma: MixedProfile, *, strict: bool = True,
                             budget: int = 100_000) -> CounterfactualStructure:
    """The punishment structure witnessing a coherent profile.

    On the support, a switch routes to the deviation paired with the worst
    opponent reply for that deviation (the lexicographically smallest
    minimizer, for determinism); off the support the map is opaque.  With
    ``strict`` the construction fails on incoherent profiles, naming the
    witnessing (player, support strategy, deviation); without it the same
    structure is built anyway, which then simply fails rationality where
    coherence fails.
    """
    game = _as_game(game)
    states = _full_state_space(game, budget)
    index = {p: k for k, p in enumerate(states)}
    n = game.num_players

    punish = {}
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for s in game.strategy_sets[i]:
            best_profile = None
            best_value = None
            for combo in itertools.product(*(game.strategy_sets[j] for j in others)):
                profile = list(combo)
                profile.insert(i, s)
                u = game.payoff(tuple(profile), i)
                if best_value is None or u < best_value:
                    best_value = u
                    best_profile = combo
            punish[(i, s)] = (best_profile, best_value)

    if strict:
        for i in range(n):
            for s in sigma.support(i):
                u = sigma.expected_payoff(i, s)
                for s_dev in game.strategy_sets[i]:
                    if u < punish[(i, s_dev)][1]:
                        raise IncoherentProfileError(i, s, s_dev)

    columns = {}
    for i in range(n):
        support = set(sigma.support(i))
        for j, s_dev in enumerate(game.strategy_sets[i]):
            col = []
            for k, profile in enumerate(states):
                own = profile[i]
                if own == s_dev:
                    col.append(k)
                elif own in support:
                    joint = list(punish[(i, s_dev)][0])
                    joint.insert(i, s_dev)
                    col.append(index[tuple(joint)])
                else:
                    moved = list(profile)
                    moved[i] = s_dev
                    col.append(index[tuple(moved)])
            columns[(i, j)] = tuple(col)

    beliefs = []
    for i in range(n):
        support = set(sigma.support(i))
        pairs = list(sigma.others_support_profiles(i))
        cache: dict = {}
        per_state = []
        for k, profile in enumerate(states):
            own = profile[i]
            if own in support:
                if own not in cache:
                    dist = {}
                    for combo, p in pairs:
                        joint = list(combo)
                        joint.insert(i, own)
                        dist[index[tuple(joint)]] = p
                    cache[own] = dist
                per_state.append(cache[own])
            else:
                per_state.append({k: Fraction(1)})
        beliefs.append(tuple(per_state))

    return CounterfactualStructure(game.strategy_sets, states, columns,
                                   tuple(beliefs), aux=None, game=game)


def build_typed_dilemma_structure(d: SocialDilemma, alphas: Sequence, betas: Sequence,
                                  budget: int = 100_000) -> CounterfactualStructure:
    """Detection-bit structure for a dilemma with per-player types.

    States pair every pure profile with a detection-bit vector; a switch by
    player i sends each other player j to their defect component when j's bit
    is set and leaves them in place otherwise.  Player i's beliefs keep their
    own strategy and bit, draw each other player's strategy from the
    cooperate/defect mixture with probability beta_j, and set each other
    player's bit independently with probability alpha_i.

    For the 2-player prisoner's dilemma this is exactly the 16-state machine
    used by the typed equilibrium analysis; for other dilemmas and player
    counts it is this library's generalization of that machine (used to
    cross-check the belief-model engine), not a construction with external
    standing.
    """
    n = d.num_players
    if len(alphas) != n or len(betas) != n:
        raise ValueError("one alpha and one beta per player required")
    alphas = [to_exact(a) for a in alphas]
    betas = [to_exact(b) for b in betas]
    for v in (*alphas, *betas):
        if not 0 <= v <= 1:
            raise ValueError(f"type parameters must lie in [0, 1], got {v}")

    game = d.game
    count = game.profile_count() * 2 ** n
    if count > budget:
        raise BudgetExceededError(count, budget, "states")

    bit_space = tuple(itertools.product((0, 1), repeat=n))
    states = []
    aux = []
    index = {}
    for profile in game.profiles():
        for bits in bit_space:
            index[(profile, bits)] = len(states)
            states.append(profile)
            aux.append(bits)
    states = tuple(states)
    aux = tuple(aux)

    columns = {}
    for i in range(n):
        defect = d.defect_strategy(i)
        for j, s_dev in enumerate(game.strategy_sets[i]):
            col = []
            for k in range(len(states)):
                profile, bits = states[k], aux[k]
                if profile[i] == s_dev:
                    col.append(k)
                    continue
                moved = list(profile)
                moved[i] = s_dev
                for other in range(n):
                    if other != i and bits[other]:
                        moved[other] = d.defect_strategy(other)
                col.append(index[(tuple(moved), bits)])
            columns[(i, j)] = tuple(col)

    beliefs = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        cache: dict = {}
        per_state = []
        for k in range(len(states)):
            profile, bits = states[k], aux[k]
            key = (profile[i], bits[i])
            if key not in cache:
                dist = {}
                strategy_choices = []
                for j in others:
                    strategy_choices.append((
                        (d.cooperate_strategy(j), betas[j]),
                        (d.defect_strategy(j), 1 - betas[j]),
                    ))
                for picks in itertools.product(*strategy_choices):
                    p_strat = Fraction(1)
                    chosen = {}
                    for j, (s, p) in zip(others, picks):
                        p_strat *= p
                        chosen[j] = s
                    if p_strat == 0:
                        continue
                    for other_bits in itertools.product((0, 1), repeat=len(others)):
                        p = p_strat
                        for bit in other_bits:
                            p *= alphas[i] if bit else 1 - alphas[i]
                        if p == 0:
                            continue
                        target_profile = list(profile)
                        target_bits = list(bits)
                        for j, s in chosen.items():
                            target_profile[j] = s
                        for j, bit in zip(others, other_bits):
                            target_bits[j] = bit
                        target_profile[i] = profile[i]
                        target_bits[i] = bits[i]
                        target = index[(tuple(target_profile), tuple(target_bits))]
                        dist[target] = dist.get(target, Fraction(0)) + p
                cache[key] = dist
            per_state.append(cache[key])
        beliefs.append(tuple(per_state))

    return CounterfactualStructure(game.strategy_sets, states, columns,
                                   tuple(beliefs), aux=aux, game=game)


def build_typed_pd_structure(alpha_1, alpha_2, beta_1, beta_2, b, c) -> CounterfactualStructure:
    """The 16-state detection-bit structure for the prisoner's dilemma with
    player types (alpha_1, alpha_2) and cooperation beliefs (beta_1, beta_2)."""
    from .games import make_prisoners_dilemma

    d = make_prisoners_dilemma(b, c)
    return build_typed_dilemma_structure(d, (alpha_1, alpha_2), (beta_1, beta_2))


# ---------------------------------------------------------------------------
# JSON import/export; the validator doubles as the format's linter


def structure_to_json(m: CounterfactualStructure, budget: int = 200_000) -> dict:
    """Serialize a structure.

    Strategy labels become display strings, profiles become index lists, and
    probabilities are written as exact fraction strings.  Closest-state
    entries forced by CS2 (switching to the current strategy) are omitted.
    """
    entries = m.num_states * sum(len(s) for s in m.strategy_sets)
    if entries > budget:
        raise BudgetExceededError(entries, budget, "closest-state entries")

    strategy_index = [
        {s: j for j, s in enumerate(strats)} for strats in m.strategy_sets
    ]
    states_doc = []
    for k in range(m.num_states):
        profile = [strategy_index[i][s] for i, s in enumerate(m.states[k])]
        entry = {"profile": profile}
        entry["aux"] = list(m.aux[k]) if m.aux is not None else None
        states_doc.append(entry)

    closest_doc = []
    for omega in range(m.num_states):
        for i in range(m.num_players):
            own = strategy_index[i][m.states[omega][i]]
            for j in range(len(m.strategy_sets[i])):
                if j == own:
                    continue
                closest_doc.append({
                    "state": omega, "player": i, "strategy": j,
                    "target": m.closest_columns[(i, j)][omega],
                })

    beliefs_doc = []
    for i in range(m.num_players):
        for omega in range(m.num_states):
            dist = {str(t): str(p) for t, p in sorted(m.beliefs[i][omega].items())}
            beliefs_doc.append({"player": i, "state": omega, "dist": dist})

    return {
        "players": m.num_players,
        "strategies": [[str(s) for s in strats] for strats in m.strategy_sets],
        "states": states_doc,
        "closest": closest_doc,
        "beliefs": beliefs_doc,
    }


def structure_from_json(doc, game: Optional[NormalFormGame] = None) -> CounterfactualStructure:
    """Parse a structure document (dict or JSON text).

    Missing closest-state entries other than the CS2-forced ones are kept as
    holes that ``validate_structure`` reports; the validator is the linter
    for this format.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    for key in ("players", "strategies", "states", "closest", "beliefs"):
        if key not in doc:
            raise ValueError(f"structure document is missing {key!r}")
    n = int(doc["players"])
    strategy_sets = tuple(tuple(s) for s in doc["strategies"])
    if len(strategy_sets) != n:
        raise ValueError("one strategy list per player required")
    if game is not None:
        strategy_sets = game.strategy_sets

    states = []
    aux = []
    for entry in doc["states"]:
        profile = tuple(strategy_sets[i][int(j)]
                        for i, j in enumerate(entry["profile"]))
        states.append(profile)
        aux.append(tuple(entry["aux"]) if entry.get("aux") is not None else None)
    states = tuple(states)
    has_aux = any(a is not None for a in aux)

    columns = {}
    for i in range(n):
        for j in range(len(strategy_sets[i])):
            columns[(i, j)] = [MISSING] * len(states)
    for k, profile in enumerate(states):
        for i in range(n):
            own = strategy_sets[i].index(profile[i])
            columns[(i, own)][k] = k
    for entry in doc["closest"]:
        omega, i, j = int(entry["state"]), int(entry["player"]), int(entry["strategy"])
        columns[(i, j)][omega] = int(entry["target"])
    columns = {key: tuple(col) for key, col in columns.items()}

    beliefs = [[{} for _ in states] for _ in range(n)]
    for entry in doc["beliefs"]:
        i, omega = int(entry["player"]), int(entry["state"])
        dist = {int(t): Fraction(p) for t, p in entry["dist"].items()}
        beliefs[i][omega] = dist
    beliefs = tuple(tuple(per_state) for per_state in beliefs)

    return CounterfactualStructure(strategy_sets, states, columns, beliefs,
                                   aux=tuple(aux) if has_aux else None, game=game)
