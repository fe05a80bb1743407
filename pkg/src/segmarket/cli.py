"""Command-line scenario runner.

    segmarket <mode> --config path.json [--strict] [--out dir]

Each run writes ``<mode>.json`` (and CSV curves where the mode has any) into
``--out``. Exit status: 0 success, 2 bad config, 3 failed verification under
``--strict``, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._numerics import DEFAULT_GRID, ConvergenceError
from .dist import Distribution, DistributionError, Uniform, from_dict
from .duopoly import (
    REGIMES,
    DuopolyConfig,
    benchmark_price,
    cost_curves,
    duopoly_welfare,
    rich_evidence_duopoly,
    simple_evidence_duopoly,
)
from .monopoly import (
    EPS_MASS,
    EPS_PRICE,
    MAX_SEGMENTS,
    MonopolySegmentation,
    benchmark_surplus,
    greedy_segmentation,
    optimal_posted_price,
    segmentation_from_cutoffs,
    segmentation_welfare,
    simple_evidence_equilibria,
)
from .partition import (
    EXHAUSTIVE_MAX_N,
    DiscreteInstance,
    PartitionError,
    discretize_equal_mass,
    exhaustive_partition_search,
    greedy_discrete,
    optimal_partition_dp,
)
from .verify import default_tolerance, verify_duopoly, verify_monopoly_segmentation, verify_pareto_vs_benchmark

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_NUMERIC = 0, 2, 3, 4

GRID_ENV = "SEGMARKET_GRID"
DEFAULT_GRIDS = {"optimizer": DEFAULT_GRID, "types": 1000, "prices": 1000, "curve": 1001}

_COMMON = {"grids", "tolerance"}
_SEGMENTATION = {"eps_price", "eps_mass", "max_segments"}
MODE_FIELDS = {
    "monopoly-greedy": {"distribution"} | _SEGMENTATION,
    "monopoly-simple": {"distribution"},
    "monopoly-optimal": {"instance", "distribution", "n_grid"},
    "monopoly-verify": {"distribution", "segmentation"} | _SEGMENTATION,
    "duopoly-benchmark": {"distribution", "V"},
    "duopoly-simple": {"distribution", "V"},
    "duopoly-rich": {"distribution", "V"} | _SEGMENTATION,
    "duopoly-welfare": {"distribution", "V", "regimes"} | _SEGMENTATION,
    "figure-pack": {"monopoly", "duopoly", "V"} | _SEGMENTATION,
}
MODES = tuple(MODE_FIELDS)


class ConfigError(ValueError):
    """The scenario file is unreadable or inconsistent with the mode."""


def grids_from_env(env=None) -> dict:
    """Defaults overridden by ``SEGMARKET_GRID``.

    The variable holds either one integer, applied to the type, price and
    curve grids, or ``name=int`` pairs separated by commas.
    """
    env = os.environ if env is None else env
    grids = dict(DEFAULT_GRIDS)
    raw = env.get(GRID_ENV, "").strip()
    if not raw:
        return grids
    try:
        if "=" not in raw:
            n = int(raw)
            grids.update(types=n, prices=n, curve=n)
        else:
            for item in raw.split(","):
                key, value = item.split("=")
                key = key.strip()
                if key not in grids:
                    raise ConfigError(f"{GRID_ENV}: unknown grid {key!r}")
                grids[key] = int(value)
    except ValueError as exc:
        raise ConfigError(f"{GRID_ENV}={raw!r} is not a grid override: {exc}") from exc
    return grids


def _grids(cfg: dict, env=None) -> dict:
    grids = grids_from_env(env)
    extra = cfg.get("grids", {})
    if not isinstance(extra, dict) or set(extra) - set(grids):
        raise ConfigError(f"grids must be an object with keys from {sorted(grids)}")
    grids.update({k: int(v) for k, v in extra.items()})
    if any(v < 3 for v in grids.values()):
        raise ConfigError("grid sizes must be at least 3")
    return grids


def load_config(path: str | Path, mode: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - MODE_FIELDS[mode] - _COMMON
    if unknown:
        raise ConfigError(f"unknown fields for {mode}: {sorted(unknown)}")
    return cfg


def _distribution(desc, default: Distribution | None = None) -> Distribution:
    if desc is None:
        if default is None:
            raise ConfigError("missing field 'distribution'")
        return default
    try:
        return from_dict(desc)
    except (DistributionError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"bad distribution: {exc}") from exc


def _duopoly_config(desc, V, default=None) -> DuopolyConfig:
    d = _distribution(desc, default)
    try:
        return DuopolyConfig(d, 3.0 if V is None else float(V))
    except (DistributionError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _seg_params(cfg: dict) -> dict:
    try:
        out = {
            "eps_price": float(cfg.get("eps_price", EPS_PRICE)),
            "eps_mass": float(cfg.get("eps_mass", EPS_MASS)),
            "max_segments": int(cfg.get("max_segments", MAX_SEGMENTS)),
        }
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad truncation parameter: {exc}") from exc
    if out["eps_price"] <= 0 or out["eps_mass"] <= 0 or out["max_segments"] < 1:
        raise ConfigError("eps_price and eps_mass must be positive and max_segments at least 1")
    return out


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_csv(path: Path, columns: dict) -> None:
    """Header row plus one row per index; floats written with ``repr``."""
    names = list(columns)
    n = len(next(iter(columns.values())))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(n):
            w.writerow([_fmt(columns[c][i]) for c in names])


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def _interim_columns(d: Distribution, seg: MonopolySegmentation, n: int, p_star: float) -> dict:
    v = np.linspace(d.support_lo, d.support_hi, n)
    price = seg.price_at(v)
    return {
        "v": v,
        "price": price,
        "surplus": np.maximum(v - price, 0.0),
        "benchmark_surplus": benchmark_surplus(d, p_star)(v),
    }


def _segment_columns(d: Distribution, seg: MonopolySegmentation) -> dict:
    rows = seg.segments()
    return {
        "segment": list(range(1, len(rows) + 1)),
        "lo": [r[0] for r in rows],
        "hi": [r[1] for r in rows],
        "price": [r[2] for r in rows],
        "mass": [float(d.cdf(r[1])) - float(d.cdf(r[0])) for r in rows],
    }


def _rich_columns(eq) -> dict:
    cols = {"firm": [], "s": [], "cutoff": [], "price": []}
    for firm in ("L", "R"):
        side = eq.side(firm)
        for s, c in enumerate(side.cutoffs):
            cols["firm"].append(firm)
            cols["s"].append(s)
            cols["cutoff"].append(c)
            # s = 0 is the firm's own location, which carries no price
            cols["price"].append(side.prices[s - 1] if s > 0 else "")
    return cols


# --- modes; each returns (result, verification reports, csv tables) ---


def _monopoly_greedy(cfg, grids, tol):
    d = _distribution(cfg.get("distribution"))
    p_star = optimal_posted_price(d, n_grid=grids["optimizer"])
    seg = greedy_segmentation(d, **_seg_params(cfg), n_grid=grids["optimizer"])
    welfare = segmentation_welfare(d, seg, n_grid=grids["curve"])
    bench = segmentation_welfare(d, MonopolySegmentation.posted(d, p_star.p))
    reports = [
        verify_monopoly_segmentation(d, seg, n_types=grids["types"], n_prices=grids["prices"], tol=tol),
        verify_pareto_vs_benchmark(d, seg, p_star=p_star.p, n_types=grids["types"], tol=tol),
    ]
    result = {
        "p_star": p_star.p,
        "segmentation": seg.to_dict(d),
        "welfare": welfare.to_dict(),
        "benchmark_welfare": bench.to_dict(),
    }
    tables = {
        "segments": _segment_columns(d, seg),
        "interim": _interim_columns(d, seg, grids["curve"], p_star.p),
    }
    return result, reports, tables


def _monopoly_simple(cfg, grids, tol):
    d = _distribution(cfg.get("distribution"))
    eqs = simple_evidence_equilibria(d, n_grid=grids["prices"])
    result = {
        "p_star": eqs[0].p_star,
        "equilibria": [
            {
                "name": e.name,
                "nd_price": e.nd_price,
                "nd_set": e.nd_set,
                "cutoff": e.cutoff,
                "best_response_slack": e.best_response_slack,
                "revealing_price_rule": e.revealing_price_rule,
                "verified": e.verified,
                "nd_price_at_least_p_star": e.nd_price >= e.p_star - 1e-10,
            }
            for e in eqs
        ],
    }
    return result, [], {}


def _monopoly_optimal(cfg, grids, tol):
    if "instance" in cfg:
        if "distribution" in cfg or "n_grid" in cfg:
            raise ConfigError("give either 'instance' or 'distribution' with 'n_grid', not both")
        try:
            inst = DiscreteInstance.from_dict(cfg["instance"])
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"bad instance: {exc}") from exc
    else:
        d = _distribution(cfg.get("distribution"))
        if "n_grid" not in cfg:
            raise ConfigError("a continuous distribution needs 'n_grid'")
        try:
            inst = discretize_equal_mass(d, int(cfg["n_grid"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    greedy = greedy_discrete(inst)
    dp = optimal_partition_dp(inst)
    result = {"n": inst.n, "greedy": greedy.to_dict(), "dp": dp.to_dict(), "gap": greedy.avg_price - dp.avg_price}
    if inst.n <= EXHAUSTIVE_MAX_N:
        ex = exhaustive_partition_search(inst)
        result["exhaustive"] = ex.to_dict()
        result["dp_matches_exhaustive"] = ex.boundaries == dp.boundaries and ex.avg_price == dp.avg_price
    return result, [], {}


def _monopoly_verify(cfg, grids, tol):
    d = _distribution(cfg.get("distribution"))
    p_star = optimal_posted_price(d, n_grid=grids["optimizer"]).p
    desc = cfg.get("segmentation", "greedy")
    if desc == "greedy":
        seg = greedy_segmentation(d, **_seg_params(cfg), n_grid=grids["optimizer"])
    elif desc == "posted":
        seg = MonopolySegmentation.posted(d, p_star)
    elif isinstance(desc, dict) and set(desc) <= {"cutoffs", "prices"} and "cutoffs" in desc:
        try:
            seg = segmentation_from_cutoffs(d, desc["cutoffs"], desc.get("prices"))
        except ValueError as exc:
            raise ConfigError(f"bad segmentation: {exc}") from exc
    else:
        raise ConfigError("segmentation must be 'greedy', 'posted' or {'cutoffs': [...], 'prices': [...]}")
    reports = [
        verify_monopoly_segmentation(d, seg, n_types=grids["types"], n_prices=grids["prices"], tol=tol),
        verify_pareto_vs_benchmark(d, seg, p_star=p_star, n_types=grids["types"], tol=tol),
    ]
    return {"p_star": p_star, "segmentation": seg.to_dict(d)}, reports, {}


def _duopoly_benchmark(cfg, grids, tol):
    dc = _duopoly_config(cfg.get("distribution"), cfg.get("V"))
    try:
        b = benchmark_price(dc, n_grid=grids["prices"])
    except (DistributionError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    w = duopoly_welfare(dc, "benchmark", b, n_grid=grids["curve"])
    return {"p_star": b.p_star, "fixed_point_slack": b.fixed_point_slack, "welfare": w.to_dict()}, [], {}


def _duopoly_simple(cfg, grids, tol):
    dc = _duopoly_config(cfg.get("distribution"), cfg.get("V"))
    eq = simple_evidence_duopoly(dc, n_grid=grids["optimizer"])
    rep = verify_duopoly(dc, eq, n_types=grids["types"], n_prices=grids["prices"], tol=tol)
    w = duopoly_welfare(dc, "simple", eq, n_grid=grids["curve"])
    return {"equilibrium": eq.to_dict(), "welfare": w.to_dict()}, [rep], {}


def _duopoly_rich(cfg, grids, tol):
    dc = _duopoly_config(cfg.get("distribution"), cfg.get("V"))
    eq = rich_evidence_duopoly(dc, **_seg_params(cfg), n_grid=grids["optimizer"])
    rep = verify_duopoly(dc, eq, n_types=grids["types"], n_prices=grids["prices"], tol=tol)
    w = duopoly_welfare(dc, "rich", eq, n_grid=grids["curve"])
    return {"equilibrium": eq.to_dict(), "welfare": w.to_dict()}, [rep], {"cutoffs": _rich_columns(eq)}


def _welfare_tables(dc, regimes, cfg, grids):
    eqs = {}
    if "simple" in regimes:
        eqs["simple"] = simple_evidence_duopoly(dc, n_grid=grids["optimizer"])
    if "rich" in regimes:
        eqs["rich"] = rich_evidence_duopoly(dc, **_seg_params(cfg), n_grid=grids["optimizer"])
    if "benchmark" in regimes:
        try:
            eqs["benchmark"] = benchmark_price(dc, n_grid=grids["prices"])
        except (DistributionError, ValueError) as exc:
            raise ConfigError(f"benchmark regime unavailable: {exc}") from exc
    welfare = {r: duopoly_welfare(dc, r, eqs.get(r), n_grid=grids["curve"]).to_dict() for r in regimes}
    curves = cost_curves(dc, regimes, n_grid=grids["curve"], eqs=eqs)
    return eqs, welfare, curves


def _duopoly_welfare(cfg, grids, tol):
    dc = _duopoly_config(cfg.get("distribution"), cfg.get("V"))
    regimes = cfg.get("regimes", list(REGIMES))
    if not isinstance(regimes, list) or not regimes or set(regimes) - set(REGIMES):
        raise ConfigError(f"regimes must be a non-empty list drawn from {list(REGIMES)}")
    regimes = [r for r in REGIMES if r in regimes]
    eqs, welfare, curves = _welfare_tables(dc, regimes, cfg, grids)
    result = {"regimes": welfare}
    if "benchmark" in welfare:
        base = welfare["benchmark"]["expected_cost"]
        result["cost_ratio_to_benchmark"] = {r: w["expected_cost"] / base for r, w in welfare.items()}
    return result, [], {"costs": curves}


def _figure_pack(cfg, grids, tol):
    d = _distribution(cfg.get("monopoly"), Uniform(0.0, 1.0))
    dc = _duopoly_config(cfg.get("duopoly"), cfg.get("V"), Uniform(-1.0, 1.0))
    p_star = optimal_posted_price(d, n_grid=grids["optimizer"]).p
    seg = greedy_segmentation(d, **_seg_params(cfg), n_grid=grids["optimizer"])
    eqs, welfare, curves = _welfare_tables(dc, list(REGIMES), cfg, grids)
    reports = [
        verify_monopoly_segmentation(d, seg, n_types=grids["types"], n_prices=grids["prices"], tol=tol),
        verify_duopoly(dc, eqs["simple"], n_types=grids["types"], n_prices=grids["prices"], tol=tol),
        verify_duopoly(dc, eqs["rich"], n_types=grids["types"], n_prices=grids["prices"], tol=tol),
    ]
    result = {
        "monopoly": {"p_star": p_star, "segmentation": seg.to_dict(d)},
        "duopoly": {"simple": eqs["simple"].to_dict(), "rich": eqs["rich"].to_dict(), "welfare": welfare},
    }
    tables = {
        "staircase": _interim_columns(d, seg, grids["curve"], p_star),
        "duopoly-cutoffs": _rich_columns(eqs["rich"]),
        "costs": curves,
    }
    return result, reports, tables


RUNNERS = {
    "monopoly-greedy": _monopoly_greedy,
    "monopoly-simple": _monopoly_simple,
    "monopoly-optimal": _monopoly_optimal,
    "monopoly-verify": _monopoly_verify,
    "duopoly-benchmark": _duopoly_benchmark,
    "duopoly-simple": _duopoly_simple,
    "duopoly-rich": _duopoly_rich,
    "duopoly-welfare": _duopoly_welfare,
    "figure-pack": _figure_pack,
}


def _tolerance(cfg: dict) -> float | None:
    if "tolerance" not in cfg:
        return None
    tol = cfg["tolerance"]
    if not isinstance(tol, (int, float)) or tol < 0:
        raise ConfigError("tolerance must be a nonnegative number")
    return float(tol)


def _effective_tolerance(cfg: dict, tol: float | None) -> float | None:
    if tol is not None:
        return tol
    desc = cfg.get("distribution") or cfg.get("monopoly")
    if desc is None:
        return None
    return default_tolerance(_distribution(desc))


def run(mode: str, config_path: str | Path, out_dir: str | Path = ".", *, strict: bool = False, env=None) -> int:
    """Run one scenario and write its artifacts; returns the exit status."""
    try:
        if mode not in RUNNERS:
            raise ConfigError(f"unknown mode {mode!r}")
        cfg = load_config(config_path, mode)
        grids = _grids(cfg, env)
        tol = _tolerance(cfg)
        result, reports, tables = RUNNERS[mode](cfg, grids, tol)
        tol_used = _effective_tolerance(cfg, tol)
    except (ConfigError, DistributionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, PartitionError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    passed = all(r.passed for r in reports)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "tool": "segmarket",
        "version": __version__,
        "mode": mode,
        "config_echo": cfg,
        "grid_sizes": grids,
        "tolerances": {
            "verification": tol_used,
            "eps_price": _seg_params(cfg)["eps_price"],
            "eps_mass": _seg_params(cfg)["eps_mass"],
            "max_segments": _seg_params(cfg)["max_segments"],
        },
        "result": result,
        "verification": [r.to_dict() for r in reports],
        "passed": passed,
        "csv": sorted(f"{mode}-{name}.csv" for name in tables),
    }
    write_json(out / f"{mode}.json", report)
    for name, cols in tables.items():
        write_csv(out / f"{mode}-{name}.csv", cols)

    print(f"{mode}: wrote {out / (mode + '.json')}" + (f" and {len(tables)} CSV file(s)" if tables else ""))
    for r in reports:
        status = "ok" if r.passed else "FAILED " + ", ".join(r.failed())
        print(f"  {r.subject}: {status} (worst violation {r.worst_violation:.3g})")
    if strict and not passed:
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="segmarket", description="Equilibrium pricing under verifiable disclosure.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--strict", action="store_true", help="exit 3 when any verification check fails")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.mode, args.config, args.out, strict=args.strict)


if __name__ == "__main__":
    sys.exit(main())
