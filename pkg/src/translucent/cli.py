"""Batch command-line front end.

Subcommands: ``check``, ``sweep``, ``equilibrium``, ``population``,
``validate-structure``, ``qre``.  Every command is driven by a single JSON
config (numbers are parsed as exact decimals), prints its report to stdout,
and optionally copies it to ``--out``.  Outputs are byte-deterministic:
floats carry 12 significant digits with a ``.`` separator, JSON keys are
sorted, and sweep rows come out in lexicographic grid order no matter how
the grid is evaluated.

Exit codes: 0 on success, 1 when the command's domain check fails (structure
violations, an unconverged fixed point, spot-check mismatches), 2 on input
errors.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import random
import sys
from fractions import Fraction

from . import __version__
from .alt_models import logit_qre
from .beliefs import TranslucentType, is_cooperation_rational
from .closed_form import cooperation_condition, f_gamma
from .counterfactual import structure_from_json, validate_structure
from .equilibrium import MixedProfile, is_coherent, te_condition, te_condition_typed
from .exact import format_number, to_exact
from .games import BudgetExceededError, make_dilemma

PARAM_ORDER = {
    "pd": ("b", "c"),
    "pgg": ("n", "rho"),
    "bertrand": ("n", "l", "h"),
    "td": ("l", "h", "bonus"),
}

SWEEP_HEADER = "kind,param_snapshot,alpha,beta,rational,binding,threshold"


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# config plumbing


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh, parse_float=Fraction)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc


def _require(cfg: dict, key: str, path: str = "$"):
    if key not in cfg:
        raise CliError(f"{path}.{key}: required key is missing")
    return cfg[key]


def _number(value, path: str):
    try:
        return to_exact(value)
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: expected a number, got {value!r}") from exc


def _grid(value, path: str) -> list:
    """A grid is a list of numbers or a {start, stop, step} range (stop
    inclusive up to exact arithmetic)."""
    if isinstance(value, list):
        if not value:
            raise CliError(f"{path}: grid list is empty")
        return [_number(v, f"{path}[{k}]") for k, v in enumerate(value)]
    if isinstance(value, dict):
        for key in ("start", "stop", "step"):
            if key not in value:
                raise CliError(f"{path}.{key}: required range key is missing")
        start = _number(value["start"], f"{path}.start")
        stop = _number(value["stop"], f"{path}.stop")
        step = _number(value["step"], f"{path}.step")
        if step <= 0:
            raise CliError(f"{path}.step: step must be positive")
        if stop < start:
            raise CliError(f"{path}: stop is below start")
        out = []
        v = start
        while v <= stop:
            out.append(v)
            v += step
        return out
    return [_number(value, path)]


def _jsonable(value):
    """Normalize report values: exact integers stay ints, every other number
    is rounded to 12 significant digits."""
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, (Fraction, float)):
        f = to_exact(value)
        if f.denominator == 1:
            return f.numerator
        return float(f"{float(f):.12g}")
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


def _dump_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def _params_from_config(cfg: dict, kind: str) -> dict:
    raw = _require(cfg, "params")
    if not isinstance(raw, dict):
        raise CliError("$.params: expected an object")
    if kind not in PARAM_ORDER:
        raise CliError(f"$.kind: unknown kind {kind!r}")
    params = {}
    for key in PARAM_ORDER[kind]:
        params[key] = _number(_require(raw, key, "$.params"), f"$.params.{key}")
    if kind == "pgg":
        grid = cfg.get("grid", raw.get("grid", 100))
        params["grid"] = int(grid)
    for key in ("n", "l", "h"):
        if key in params:
            if to_exact(params[key]).denominator != 1:
                raise CliError(f"$.params.{key}: expected an integer")
            params[key] = int(to_exact(params[key]))
    return params


def _snapshot(kind: str, params: dict) -> str:
    keys = PARAM_ORDER[kind]
    return ";".join(f"{k}={format_number(params[k])}" for k in keys)


# ---------------------------------------------------------------------------
# commands


def cmd_check(cfg: dict, budget: int) -> tuple:
    kind = _require(cfg, "kind")
    params = _params_from_config(cfg, kind)
    alpha = _number(_require(cfg, "alpha"), "$.alpha")
    beta = _number(_require(cfg, "beta"), "$.beta")
    try:
        d = make_dilemma(kind, params)
        t = TranslucentType(alpha, beta)
        closed = cooperation_condition(kind, params, alpha, beta)
        engine = is_cooperation_rational(d, 0, t)
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc)) from exc
    report = {
        "kind": kind,
        "params": {k: v for k, v in params.items()},
        "alpha": alpha,
        "beta": beta,
        "closed_form": {
            "rational": closed.rational,
            "binding": closed.binding_quantity,
            "threshold": closed.threshold,
        },
        "engine": {
            "rational": engine.rational,
            "best_deviation": engine.best_deviation,
            "eu_cooperate": engine.eu_cooperate,
            "eu_best_deviation": engine.eu_best_deviation,
        },
        "agreement": closed.rational == engine.rational,
    }
    if alpha == 0:
        report["note"] = "opaque"
    return _dump_report(report), 0


def _sweep_rows(kind: str, mode: str, cfg: dict):
    """Yield (param_dict, alpha, beta, rational, binding, threshold) in
    lexicographic grid order."""
    raw_params = _require(cfg, "params")
    if not isinstance(raw_params, dict):
        raise CliError("$.params: expected an object")
    keys = PARAM_ORDER[kind]
    grids = []
    for key in keys:
        grids.append(_grid(_require(raw_params, key, "$.params"),
                           f"$.params.{key}"))
    pgg_grid = int(cfg.get("grid", 100))

    if mode == "qre":
        lam_grid = _grid(_require(cfg, "lambda"), "$.lambda")
        alphas, betas = lam_grid, [None]
    else:
        betas = _grid(_require(cfg, "beta"), "$.beta")
        if mode in ("cooperation", "te_typed"):
            alphas = _grid(_require(cfg, "alpha"), "$.alpha")
        else:
            alphas = [None]

    for combo in itertools.product(*grids):
        params = dict(zip(keys, combo))
        for key in ("n", "l", "h"):
            if key in params:
                if to_exact(params[key]).denominator != 1:
                    raise CliError(f"$.params.{key}: expected an integer")
                params[key] = int(to_exact(params[key]))
        if kind == "pgg":
            params["grid"] = pgg_grid
        n_players = int(params.get("n", 2))
        for alpha in alphas:
            for beta in betas:
                try:
                    if mode == "cooperation":
                        verdict = cooperation_condition(kind, params, alpha, beta)
                        row = (verdict.rational, verdict.binding_quantity,
                               verdict.threshold)
                    elif mode == "te":
                        ok = te_condition(kind, params, [beta] * n_players)
                        row = (ok, *_te_margin(kind, params, None, beta, n_players))
                    elif mode == "te_typed":
                        res = te_condition_typed(kind, params,
                                                 [alpha] * n_players,
                                                 [beta] * n_players)
                        ok = (res.readings.get("n_minus_1")
                              if res.holds is None else res.holds)
                        row = (ok, *_te_margin(kind, params, alpha, beta, n_players))
                    else:  # qre
                        d = make_dilemma(kind, params)
                        res = logit_qre(d, alpha, max_iter=int(cfg.get("max_iter", 20_000)))
                        if not res.converged:
                            raise CliError(
                                f"qre did not converge at lambda={alpha} "
                                f"(residual {res.residual:.3e})", code=1)
                        coop = res.prob(0, d.cooperate_strategy(0))
                        beta = to_exact(coop)
                        row = (to_exact(coop) <= Fraction(1, 2),
                               Fraction(1, 2), to_exact(coop))
                except CliError:
                    raise
                except (ValueError, TypeError) as exc:
                    raise CliError(str(exc)) from exc
                yield params, alpha, beta, row


def _te_margin(kind, params, alpha, beta, n):
    """Representative (binding, threshold) pair for homogeneous TE sweeps."""
    beta = to_exact(beta)
    a = to_exact(alpha) if alpha is not None else Fraction(1)
    if kind == "pd":
        return (a * beta * to_exact(params["b"]), to_exact(params["c"]))
    if kind == "td":
        hl = params["h"] - params["l"]
        factor = 1 - a * beta if alpha is not None else 1 - beta
        return (hl * beta, to_exact(params["bonus"]) * factor)
    if kind == "pgg":
        rho = to_exact(params["rho"])
        return (a * rho * beta * (params["n"] - 1), 1 - rho)
    gamma = (1 - a) * beta if alpha is not None else None
    if gamma is None:
        return (beta ** (params["n"] - 1), Fraction(params["l"], params["h"]))
    return (beta ** (params["n"] - 1),
            f_gamma(gamma, params["n"]) * params["l"] * params["n"]
            / Fraction(params["h"]))


def cmd_sweep(cfg: dict, budget: int) -> tuple:
    kind = _require(cfg, "kind")
    if kind not in PARAM_ORDER:
        raise CliError(f"$.kind: unknown kind {kind!r}")
    mode = cfg.get("mode", "cooperation")
    if mode not in ("cooperation", "te", "te_typed", "qre"):
        raise CliError(f"$.mode: unknown mode {mode!r}")

    rows = []
    out = io.StringIO()
    out.write(SWEEP_HEADER + "\n")
    count = 0
    for params, alpha, beta, (rational, binding, threshold) in \
            _sweep_rows(kind, mode, cfg):
        count += 1
        if count > budget:
            raise CliError(f"sweep exceeds budget of {budget} rows")
        snapshot = _snapshot(kind, params)
        out.write(",".join([
            kind, snapshot,
            format_number(alpha) if alpha is not None else "",
            format_number(beta),
            "true" if rational else "false",
            format_number(binding),
            format_number(threshold),
        ]) + "\n")
        rows.append((params, alpha, beta, rational))

    exit_code = 0
    if cfg.get("spot_check") and mode == "cooperation":
        mismatches = _spot_check(kind, rows)
        if mismatches:
            for params, alpha, beta, rational, engine_verdict in mismatches:
                print(f"spot-check mismatch: {_snapshot(kind, params)} "
                      f"alpha={format_number(alpha)} beta={format_number(beta)} "
                      f"closed-form={str(rational).lower()} "
                      f"engine={str(engine_verdict).lower()}", file=sys.stderr)
            exit_code = 1
    return out.getvalue(), exit_code


def _spot_check(kind: str, rows: list) -> list:
    """Re-verify a deterministic 1% sample of sweep rows with the generic
    engine; returns the disagreeing rows."""
    rng = random.Random(0)
    sample_size = max(1, len(rows) // 100)
    sample = rng.sample(range(len(rows)), sample_size)
    mismatches = []
    games = {}
    for idx in sorted(sample):
        params, alpha, beta, rational = rows[idx]
        key = tuple(sorted(params.items()))
        if key not in games:
            games[key] = make_dilemma(kind, params)
        d = games[key]
        verdict = is_cooperation_rational(d, 0, TranslucentType(alpha, beta))
        if verdict.rational != rational:
            mismatches.append((params, alpha, beta, rational, verdict.rational))
    return mismatches


def cmd_equilibrium(cfg: dict, budget: int) -> tuple:
    kind = _require(cfg, "kind")
    params = _params_from_config(cfg, kind)
    betas = _require(cfg, "betas")
    if not isinstance(betas, list):
        raise CliError("$.betas: expected a list of numbers")
    betas = [_number(v, f"$.betas[{k}]") for k, v in enumerate(betas)]
    alphas = cfg.get("alphas")
    if alphas is not None:
        if not isinstance(alphas, list):
            raise CliError("$.alphas: expected a list of numbers")
        alphas = [_number(v, f"$.alphas[{k}]") for k, v in enumerate(alphas)]
    try:
        d = make_dilemma(kind, params)
        sigma = MixedProfile.two_point(d, betas)
        untyped = te_condition(kind, params, betas)
        coherence = is_coherent(d, sigma, budget)
        typed = (te_condition_typed(kind, params, alphas, betas)
                 if alphas is not None else None)
    except BudgetExceededError as exc:
        raise CliError(str(exc)) from exc
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc)) from exc
    report = {
        "kind": kind,
        "params": params,
        "betas": betas,
        "te_condition": untyped,
        "coherent": coherence.coherent,
        "witness": list(coherence.witness) if coherence.witness else None,
        "agreement": untyped == coherence.coherent,
    }
    if typed is not None:
        report["alphas"] = alphas
        report["te_condition_typed"] = {
            "holds": typed.holds,
            "readings": typed.readings,
        }
    return _dump_report(report), 0


def cmd_population(cfg: dict, budget: int) -> tuple:
    kind = _require(cfg, "kind")
    params = _params_from_config(cfg, kind)
    spec = _require(cfg, "population")
    if not isinstance(spec, dict):
        raise CliError("$.population: expected an object")

    types = []
    if "types" in spec:
        raw = spec["types"]
        if not isinstance(raw, list) or not raw:
            raise CliError("$.population.types: expected a nonempty list")
        for k, entry in enumerate(raw):
            path = f"$.population.types[{k}]"
            if not isinstance(entry, dict):
                raise CliError(f"{path}: expected an object")
            types.append((
                _number(_require(entry, "alpha", path), f"{path}.alpha"),
                _number(_require(entry, "beta", path), f"{path}.beta"),
                _number(_require(entry, "weight", path), f"{path}.weight"),
            ))
    elif "grid" in spec:
        grid = spec["grid"]
        if not isinstance(grid, dict):
            raise CliError("$.population.grid: expected an object")
        alphas = _grid(_require(grid, "alpha", "$.population.grid"),
                       "$.population.grid.alpha")
        betas = _grid(_require(grid, "beta", "$.population.grid"),
                      "$.population.grid.beta")
        w = Fraction(1, len(alphas) * len(betas))
        types = [(a, b, w) for a in alphas for b in betas]
    else:
        raise CliError("$.population: expected either 'types' or 'grid'")

    total = sum((w for _, _, w in types), Fraction(0))
    if abs(total - 1) > Fraction(1, 10 ** 9):
        raise CliError(f"$.population: weights sum to {float(total):.12g}, "
                       "expected 1 within 1e-9")
    if any(w < 0 for _, _, w in types):
        raise CliError("$.population: weights must be nonnegative")

    rate = Fraction(0)
    for alpha, beta, w in types:
        try:
            verdict = cooperation_condition(kind, params, alpha, beta)
        except (ValueError, TypeError) as exc:
            raise CliError(str(exc)) from exc
        if verdict.rational:
            rate += w
    report = {
        "kind": kind,
        "params": params,
        "num_types": len(types),
        "cooperation_rate": rate,
    }
    return _dump_report(report), 0


def cmd_validate_structure(path: str) -> tuple:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    try:
        m = structure_from_json(doc)
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise CliError(f"{path}: malformed structure document: {exc}") from exc
    violations = validate_structure(m)
    if not violations:
        return f"{path}: no violations ({m.num_states} states)\n", 0
    lines = [str(v) for v in violations]
    return "\n".join(lines) + "\n", 1


def cmd_qre(cfg: dict, budget: int) -> tuple:
    kind = _require(cfg, "kind")
    params = _params_from_config(cfg, kind)
    lam = _number(_require(cfg, "lambda"), "$.lambda")
    try:
        d = make_dilemma(kind, params)
        res = logit_qre(
            d, lam,
            damping=float(cfg.get("damping", 0.5)),
            tol=float(cfg.get("tol", 1e-10)),
            max_iter=int(cfg.get("max_iter", 20_000)),
            budget=budget,
        )
    except BudgetExceededError as exc:
        raise CliError(str(exc)) from exc
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc)) from exc
    report = {
        "kind": kind,
        "params": params,
        "lambda": lam,
        "profile": [
            {str(s): f"{p:.12g}" for s, p in sorted(dist.items(), key=lambda t: str(t[0]))}
            for dist in res.distributions
        ],
        "residual": f"{res.residual:.6e}",
        "iterations": res.iterations,
        "converged": res.converged,
    }
    return _dump_report(report), 0 if res.converged else 1


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="translucent",
        description="Cooperation and equilibrium analysis for social dilemmas "
                    "with detection-aware beliefs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, with_config in (
        ("check", True), ("sweep", True), ("equilibrium", True),
        ("population", True), ("qre", True),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", help="also write the report to this path")
        p.add_argument("--budget", type=int, default=10_000_000,
                       help="enumeration budget")

    p = sub.add_parser("validate-structure")
    p.add_argument("file", help="structure JSON document to lint")
    p.add_argument("--out", help="also write the report to this path")
    p.add_argument("--budget", type=int, default=10_000_000)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate-structure":
            output, code = cmd_validate_structure(args.file)
        else:
            cfg = _load_config(args.config)
            handler = {
                "check": cmd_check,
                "sweep": cmd_sweep,
                "equilibrium": cmd_equilibrium,
                "population": cmd_population,
                "qre": cmd_qre,
            }[args.command]
            output, code = handler(cfg, args.budget)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    sys.stdout.write(output)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
