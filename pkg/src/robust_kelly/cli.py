"""Command-line front end: ``robust-kelly {hyperplanes,optimize,backtest,worst-case}``.

Exit codes: 0 success, 2 input/config error, 3 optimization/solver failure.
Every flag can also come from a ``ROBUST_KELLY_<FLAG>`` environment variable;
an explicit flag wins.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ambiguity as amb
from . import backtest as bt
from . import hyperplane as hp
from . import lp
from . import robust as rb
from .scenarios import DataError, ScenarioSet, compute_returns, load_prices, make_scenarios

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


class ConfigError(ValueError):
    pass


def _env(name: str, default=None):
    return os.environ.get(f"ROBUST_KELLY_{name}", default)


def _clean(obj):
    """Round floats to 12 significant digits; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(f"{x:.12g}")
        return 0.0 if x == 0 else x
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    prices_path: Path | None
    scenarios_inline: dict | None
    ambiguity: dict
    epsilon: float = 0.01
    n_hyperplanes: int | None = None
    L: float = 1.0
    k_min: object = 0.0
    k_max: object = None  # None -> L / n
    costs: object = bt.DEFAULT_COST
    risk_free_total: float = bt.DEFAULT_RISK_FREE_TOTAL
    initial_wealth: float = 1.0
    split: int | None = None
    solver: str = "simplex"

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(raw, base=path.parent)

    @classmethod
    def from_dict(cls, raw: dict, base: Path = Path(".")) -> "RunConfig":
        known = {"prices_path", "scenarios", "ambiguity", "epsilon", "n_hyperplanes", "leverage", "L",
                 "k_min", "k_max", "costs", "risk_free_total", "initial_wealth", "split", "solver"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if ("prices_path" in raw) == ("scenarios" in raw):
            raise ConfigError("config needs exactly one of prices_path or scenarios")
        prices = raw.get("prices_path")
        if prices is not None:
            prices = Path(prices)
            if not prices.is_absolute():
                prices = base / prices
        cfg = cls(
            prices_path=prices,
            scenarios_inline=raw.get("scenarios"),
            ambiguity=raw.get("ambiguity", {"type": "box", "gamma": 0.0}),
            epsilon=float(raw.get("epsilon", 0.01)),
            n_hyperplanes=raw.get("n_hyperplanes"),
            L=float(raw.get("leverage", raw.get("L", 1.0))),
            k_min=raw.get("k_min", 0.0),
            k_max=raw.get("k_max"),
            costs=raw.get("costs", bt.DEFAULT_COST),
            risk_free_total=float(raw.get("risk_free_total", bt.DEFAULT_RISK_FREE_TOTAL)),
            initial_wealth=float(raw.get("initial_wealth", 1.0)),
            split=raw.get("split"),
            solver=raw.get("solver", "simplex"),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.n_hyperplanes is not None and int(self.n_hyperplanes) < 2:
            raise ConfigError("n_hyperplanes must be at least 2")
        if not self.L >= 1:
            raise ConfigError("leverage must be at least 1")
        if not self.initial_wealth > 0:
            raise ConfigError("initial_wealth must be positive")
        c = np.asarray(self.costs, dtype=float)
        if np.any(c < 0) or np.any(c >= 1):
            raise ConfigError("costs must lie in [0, 1)")
        if self.solver not in ("simplex", "highs"):
            raise ConfigError("solver must be 'simplex' or 'highs'")
        if self.k_max is not None and np.any(np.asarray(self.k_min, float) > np.asarray(self.k_max, float)):
            raise ConfigError("k_min exceeds k_max")
        if self.split is not None and int(self.split) < 2:
            raise ConfigError("split must leave at least 2 in-sample price rows")

    # -- derived objects -------------------------------------------------

    def lp_solver(self) -> lp.Solver:
        return lp.scipy_solve if self.solver == "highs" else lp.solve

    def price_table(self):
        return load_prices(self.prices_path) if self.prices_path is not None else None

    def samples(self) -> tuple[ScenarioSet, ScenarioSet | None]:
        """In-sample scenarios and the optional out-of-sample scenarios."""
        if self.scenarios_inline is not None:
            sc = self.scenarios_inline
            return make_scenarios(sc["returns"], sc.get("nominal"), sc.get("tickers")), None
        table = self.price_table()
        if self.split is None:
            return compute_returns(table), None
        s = int(self.split)
        if s >= len(table.dates):
            raise ConfigError("split leaves no out-of-sample periods")
        return compute_returns(table.slice_rows(0, s)), compute_returns(table.slice_rows(s - 1))

    def constraints(self, n: int) -> rb.TradingConstraints:
        k_max = self.L / n if self.k_max is None else self.k_max
        tc = rb.TradingConstraints(self.L, self.k_min, k_max)
        try:
            tc.bounds(n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return tc

    def ambiguity_set(self, scenarios: ScenarioSet) -> amb.AmbiguitySet:
        return amb.from_json(self.ambiguity, nominal=scenarios.nominal)


def _load_weights(path) -> rb.Weights:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"weights file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"weights file is not valid JSON: {exc}") from None
    if "k" not in raw and isinstance(raw.get("weights"), dict):
        raw = raw["weights"]
    if "k" not in raw:
        raise ConfigError('weights JSON needs a "k" list')
    return rb.Weights.from_k(raw["k"])


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_hyperplanes(args) -> int:
    try:
        eps, xmin, xmax = float(args.eps), float(args.xmin), float(args.xmax)
    except (TypeError, ValueError):
        raise ConfigError("--eps, --xmin and --xmax must be numbers") from None
    if not eps > 0:
        raise ConfigError("epsilon must be positive")
    if not xmin > -1:
        raise ConfigError("x_min must exceed -1")
    hs = hp.generate(xmin, xmax, eps)
    if args.out:
        stem = Path(args.out)
        _write(stem.with_suffix(".csv"), hp.to_csv(hs))
        _write(stem.with_suffix(".json"), dumps(hp.summary(hs)))
    else:
        sys.stdout.write(hp.to_csv(hs))
        sys.stdout.write(dumps(hp.summary(hs)))
    return EXIT_OK


def optimize_config(cfg: RunConfig) -> rb.RobustSolution:
    scen, _ = cfg.samples()
    aset = cfg.ambiguity_set(scen)
    tc = cfg.constraints(scen.n)
    solver = cfg.lp_solver()
    if cfg.n_hyperplanes is not None:
        lo, hi = rb.hyperplane_domain(scen, tc, solver)
        approx = hp.generate_count(lo, hi, int(cfg.n_hyperplanes))
    else:
        approx = cfg.epsilon
    return rb.solve_robust(scen, aset, tc, approx, solver)


def cmd_optimize(args) -> int:
    cfg = RunConfig.load(args.config)
    sol = optimize_config(cfg)
    text = dumps(sol.to_json())
    if args.out:
        _write(Path(args.out), text)
    k = ", ".join(f"{v:.6g}" for v in sol.weights.k)
    print(f"K_h = [{k}]")
    print(f"M = {sol.hyperplanes.M} (epsilon = {sol.hyperplanes.epsilon:.6g})")
    print(f"nominal ELG = {sol.nominal_elg:.6g}")
    print(f"worst-case ELG = {sol.worst_case_elg:.6g}")
    print(f"LP value = {sol.lp_value:.6g}")
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def _backtest_one(scen: ScenarioSet, weights: rb.Weights, cfg: RunConfig):
    traj = bt.run(scen.returns, weights, cfg.costs, cfg.initial_wealth)
    rep = bt.report(traj, cfg.risk_free_total / traj.N if traj.N else None)
    return traj, rep


def cmd_backtest(args) -> int:
    cfg = RunConfig.load(args.config)
    weights = _load_weights(args.weights)
    ins, oos = cfg.samples()
    if weights.n != ins.n:
        raise ConfigError(f"weights have {weights.n} entries, data has {ins.n} assets")
    out_dir = Path(args.out) if args.out else None
    parts = [("in_sample", ins)] + ([("out_of_sample", oos)] if oos is not None else [])
    reports = {}
    for label, scen in parts:
        traj, rep = _backtest_one(scen, weights, cfg)
        name = "trajectory" if oos is None else f"{label}_trajectory"
        if out_dir is not None:
            _write(out_dir / f"{name}.csv", traj.to_csv())
        reports[label] = rep.to_json()
    payload = reports["in_sample"] if oos is None else reports
    if out_dir is not None:
        _write(out_dir / "report.json", dumps(payload))
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def cmd_worst_case(args) -> int:
    cfg = RunConfig.load(args.config)
    weights = _load_weights(args.weights)
    scen, _ = cfg.samples()
    if weights.n != scen.n:
        raise ConfigError(f"weights have {weights.n} entries, data has {scen.n} assets")
    aset = cfg.ambiguity_set(scen)
    value, p_star = rb.worst_case_elg(scen, aset, weights, cfg.lp_solver())
    sys.stdout.write(dumps({"value": value, "p_star": p_star}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-kelly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hyperplanes", help="tangent points for log(1+x) at tolerance eps")
    p.add_argument("--eps", default=_env("EPS", "0.01"))
    p.add_argument("--xmin", default=_env("XMIN"), required=_env("XMIN") is None)
    p.add_argument("--xmax", default=_env("XMAX"), required=_env("XMAX") is None)
    p.add_argument("--out", default=_env("OUT"), help="path stem; writes <stem>.csv and <stem>.json")
    p.set_defaults(func=cmd_hyperplanes)

    p = sub.add_parser("optimize", help="solve the robust hyperplane LP")
    p.add_argument("--config", default=_env("CONFIG"), required=_env("CONFIG") is None)
    p.add_argument("--out", default=_env("OUT"), help="solution JSON path")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("backtest", help="simulate fixed weights on the configured prices")
    p.add_argument("--config", default=_env("CONFIG"), required=_env("CONFIG") is None)
    p.add_argument("--weights", default=_env("WEIGHTS"), required=_env("WEIGHTS") is None)
    p.add_argument("--out", default=_env("OUT"), help="output directory")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("worst-case", help="worst-case expected log-growth of given weights")
    p.add_argument("--config", default=_env("CONFIG"), required=_env("CONFIG") is None)
    p.add_argument("--weights", default=_env("WEIGHTS"), required=_env("WEIGHTS") is None)
    p.set_defaults(func=cmd_worst_case)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except rb.SurvivalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (rb.OptimizationError, lp.LpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, DataError, amb.AmbiguityError, hp.HyperplaneError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
