"""Closed-form cooperation conditions for the four social dilemmas.

Each predicate decides, from the game parameters and a type (alpha, beta)
alone, whether intended cooperation is a weak best response:

* prisoner's dilemma:   alpha * beta * b >= c
* traveler's dilemma:   b * (1 - alpha*beta) <= (H - L) * beta, and for
                        alpha < 1/2 additionally
                        b * (1 - 2*alpha) <= 1 + alpha*(H - L - 1)
                        (the undercut-by-one deviation; see note below)
* public goods:         alpha * beta * rho * (N - 1) >= 1 - rho
* bertrand:             beta^(N-1) >= f(gamma, N) * L * N / H,
                        gamma = (1 - alpha) * beta

where f(gamma, N) = sum_k C(N-1, k) (1-gamma)^k gamma^(N-1-k) / (k+1) is the
expected reciprocal share of a price-floor tie.

Note on the traveler's dilemma branch: equating the cooperation payoff with
the payoff of undercutting to H-1 gives b*(1-2a) <= 1 + a*(H-L-1); the often
quoted cap (H-L-1)/(1-2a) is strictly looser and disagrees with brute-force
best-response checks (e.g. L=2, H=13, b=8, alpha=1/4, beta=0.9:
EU(cooperate)=11.1 < EU(claim 12)=11.55).  We use the exact branch.

Note on bertrand: the predicate above intentionally ignores the undercut
deviation to H-1, whose payoff gamma^(N-1) * (H-1) can exceed the cooperation
payoff beta^(N-1) * H / N when alpha is small.  ``bertrand_undercut_condition``
exposes that guard separately; the conjunction of the two is exactly the
brute-force verdict, while the bare predicate is the one whose feasible
region is monotone in N and L/H.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from .exact import Numeric, to_exact

_NEAR_ONE = 1 - 1e-9


@dataclass(frozen=True)
class CooperationVerdict:
    """Outcome of a closed-form cooperation test.

    ``rational`` holds iff ``binding_quantity >= threshold``; the two numbers
    are the sides of the game's (denominator-cleared) inequality, taken from
    the tightest condition when a game has more than one.
    """

    rational: bool
    binding_quantity: Fraction
    threshold: Fraction


def f_gamma_sum(gamma: Numeric, n: int):
    """f(gamma, N) by its defining binomial sum."""
    _check_players(n)
    if isinstance(gamma, float):
        _check_unit_float(gamma, "gamma")
        return sum(comb(n - 1, k) * (1 - gamma) ** k * gamma ** (n - 1 - k) / (k + 1)
                   for k in range(n))
    g = _unit(gamma, "gamma")
    return sum((comb(n - 1, k) * (1 - g) ** k * g ** (n - 1 - k) * Fraction(1, k + 1)
                for k in range(n)), Fraction(0))


def f_gamma(gamma: Numeric, n: int):
    """Expected reciprocal tie count f(gamma, N).

    Uses the closed identity (1 - gamma^N) / (N * (1 - gamma)) away from
    gamma = 1 and the binomial sum next to it; float in, float out, exact in,
    exact out.
    """
    _check_players(n)
    if isinstance(gamma, float):
        _check_unit_float(gamma, "gamma")
        if gamma < _NEAR_ONE:
            return (1 - gamma ** n) / (n * (1 - gamma))
        return f_gamma_sum(gamma, n)
    g = _unit(gamma, "gamma")
    if g == 1:
        return f_gamma_sum(g, n)
    return (1 - g ** n) / (n * (1 - g))


def cooperation_condition(kind: str, params: dict, alpha: Numeric,
                          beta: Numeric) -> CooperationVerdict:
    """Evaluate the game's closed-form cooperation condition at (alpha, beta).

    Parameter domains match the game factories, except that the public-goods
    marginal return may equal 1 here (cooperation is then rational for every
    type, the limit case of the condition).
    """
    a = _unit(alpha, "alpha")
    b_ = _unit(beta, "beta")
    if kind == "pd":
        b, c = _params_pd(params)
        conditions = [(a * b_ * b, c)]
    elif kind == "td":
        l, h, bonus = _params_td(params)
        conditions = [((h - l) * b_, bonus * (1 - a * b_))]
        if a < Fraction(1, 2):
            conditions.append((1 + a * (h - l - 1), bonus * (1 - 2 * a)))
    elif kind == "pgg":
        n, rho = _params_pgg(params, allow_rho_one=True)
        conditions = [(a * b_ * rho * (n - 1), 1 - rho)]
    elif kind == "bertrand":
        n, l, h = _params_bertrand(params)
        gamma = (1 - a) * b_
        conditions = [(b_ ** (n - 1), f_gamma(gamma, n) * l * n / Fraction(h))]
    else:
        raise ValueError(f"unknown dilemma kind {kind!r}")

    rational = all(lhs >= rhs for lhs, rhs in conditions)
    binding, threshold = min(conditions, key=lambda c: c[0] - c[1])
    return CooperationVerdict(rational, binding, threshold)


def bertrand_lower_bound_check(beta: Numeric, l: int, h: int, n: int) -> bool:
    """True iff beta^(N-1) < L/H, which makes cooperation irrational for
    every alpha (f >= 1/N bounds the tie term from below)."""
    _params_bertrand({"n": n, "l": l, "h": h})
    b_ = _unit(beta, "beta")
    return b_ ** (n - 1) < Fraction(l, h)


def bertrand_undercut_condition(params: dict, alpha: Numeric, beta: Numeric) -> bool:
    """True iff cooperating survives the undercut to H-1:
    beta^(N-1) * H / N >= gamma^(N-1) * (H-1)."""
    n, l, h = _params_bertrand(params)
    a = _unit(alpha, "alpha")
    b_ = _unit(beta, "beta")
    gamma = (1 - a) * b_
    return b_ ** (n - 1) * Fraction(h, n) >= gamma ** (n - 1) * (h - 1)


# ---------------------------------------------------------------------------
# parameter validation (shared with the equilibrium-condition layer)


def _check_players(n: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"need an integer player count >= 2, got {n!r}")


def _check_unit_float(x: float, name: str) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def _unit(x: Numeric, name: str) -> Fraction:
    v = to_exact(x)
    if not 0 <= v <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


def _params_pd(params: dict):
    b, c = to_exact(params["b"]), to_exact(params["c"])
    if not c > 0:
        raise ValueError(f"cost must be positive, got c={c}")
    if not b > c:
        raise ValueError(f"benefit must exceed cost, got b={b} <= c={c}")
    return b, c


def _params_td(params: dict):
    l, h = int(params["l"]), int(params["h"])
    bonus = to_exact(params["bonus"])
    if not 0 < l < h:
        raise ValueError(f"claim bounds must satisfy 0 < l < h, got l={l}, h={h}")
    if not bonus > 0:
        raise ValueError(f"bonus must be positive, got {bonus}")
    return l, h, bonus


def _params_pgg(params: dict, allow_rho_one: bool = False):
    n = int(params["n"])
    _check_players(n)
    rho = to_exact(params["rho"])
    top_ok = rho <= 1 if allow_rho_one else rho < 1
    if not (Fraction(1, n) < rho and top_ok):
        raise ValueError(f"marginal return out of range for n={n}: {rho}")
    return n, rho


def _params_bertrand(params: dict):
    n, l, h = int(params["n"]), int(params["l"]), int(params["h"])
    _check_players(n)
    if l < 2:
        raise ValueError(f"price floor must be at least 2, got {l}")
    if not l < h:
        raise ValueError(f"price floor {l} must be below reservation value {h}")
    return n, l, h
