"""Command-line front end: analyze, table1, sweep, simulate.

Configuration is a YAML file with the sections network / params /
controller / output / run; unknown keys are rejected so typos fail
loudly. All numeric CSV output uses 6 significant digits and is
byte-identical across reruns for identical config and seeds.
"""

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

import numpy as np
import yaml

from . import analytic, h2, sim
from .errors import (ConfigError, ConvergenceError, FreqPerfError,
                     GraphError, ParameterError, SimulationError,
                     StabilityError)
from .graph import NetworkGraph, build_from_edges, build_path, spectrum
from .models import (GridParameters, assemble_broadcast, assemble_dapi,
                     assemble_primal_dual, augment_frequency_penalty,
                     check_assumptions, perturbed_parameters)

# Five-bus benchmark defaults used throughout the shipped experiments.
DEFAULT_CONFIG = {
    "network": {"kind": "path", "n": 5, "weight": 1.0},
    "params": {"m": 1.0, "d": 1.0, "b": 1.0, "k": 4.0,
               "tau_mu": 6.0, "tau_nu": 6.0, "tau": 6.0, "gamma": 5.0},
    "controller": {"kind": "broadcast"},
    "output": {"kind": "cost"},
    "run": {"kind": "h2"},
}

# Benchmark reference values for the five-bus path network:
# sqrt_pi -> (pd alpha=0, pd alpha=5, dapi gamma=5, broadcast).
REFERENCE_TABLE = {
    0.0: (0.417, 0.569, 0.088, 0.083),
    0.3: (0.639, 0.791, 0.311, 0.308),
    0.6: (1.307, 1.458, 0.981, 0.983),
    0.9: (2.421, 2.569, 2.095, 2.108),
    1.2: (3.980, 4.125, 3.656, 3.683),
    1.5: (5.984, 6.125, 5.663, 5.708),
}
TABLE_COLUMNS = ("pd_alpha0", "pd_alpha5", "dapi_gamma5", "broadcast")

_SCHEMA = {
    "network": {"kind", "n", "weight", "edges"},
    "params": {"m", "d", "b", "k", "tau_mu", "tau_nu", "tau",
               "gamma", "alpha", "r"},
    "controller": {"kind", "alpha", "gamma"},
    "output": {"kind", "sqrt_pi"},
    "run": {"kind", "seeds", "dt", "horizon", "burn_in", "method",
            "variable", "grid", "preset", "seed"},
}


def _fmt(x) -> str:
    return f"{float(x):.6g}"


def load_config(path) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    return validate_config(raw)


def validate_config(raw: dict) -> dict:
    cfg = {k: dict(v) for k, v in DEFAULT_CONFIG.items()}
    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    for section, keys in raw.items():
        if not isinstance(keys, dict):
            raise ConfigError(f"section {section!r} must be a mapping")
        bad = set(keys) - _SCHEMA[section]
        if bad:
            raise ConfigError(
                f"unknown key(s) in {section!r}: {sorted(bad)}"
            )
        cfg[section].update(keys)
    if cfg["network"]["kind"] not in ("path", "edges"):
        raise ConfigError("network.kind must be 'path' or 'edges'")
    if cfg["controller"]["kind"] not in ("broadcast", "primal_dual", "dapi"):
        raise ConfigError(
            "controller.kind must be broadcast, primal_dual, or dapi"
        )
    if cfg["output"]["kind"] not in ("cost", "cost_plus_frequency"):
        raise ConfigError(
            "output.kind must be 'cost' or 'cost_plus_frequency'"
        )
    return cfg


def graph_from_config(cfg: dict) -> NetworkGraph:
    net = cfg["network"]
    if net["kind"] == "path":
        return build_path(int(net["n"]), float(net.get("weight", 1.0)))
    edges = [(int(i), int(j), float(w)) for i, j, w in net["edges"]]
    return build_from_edges(int(net["n"]), edges)


def params_from_config(cfg: dict) -> GridParameters:
    p = dict(cfg["params"])
    ctrl = cfg["controller"]
    if ctrl["kind"] == "primal_dual" and "alpha" in ctrl:
        p["alpha"] = float(ctrl["alpha"])
    if ctrl["kind"] == "dapi" and "gamma" in ctrl:
        p["gamma"] = float(ctrl["gamma"])
    return GridParameters(**p)


_ASSEMBLERS = {
    "broadcast": assemble_broadcast,
    "primal_dual": assemble_primal_dual,
    "dapi": assemble_dapi,
}


def model_from_config(cfg: dict, g=None, params=None):
    g = graph_from_config(cfg) if g is None else g
    params = params_from_config(cfg) if params is None else params
    model = _ASSEMBLERS[cfg["controller"]["kind"]](g, params)
    if cfg["output"]["kind"] == "cost_plus_frequency":
        sqrt_pi = float(cfg["output"].get("sqrt_pi", 0.0))
        model = augment_frequency_penalty(model, sqrt_pi**2)
    return model, g, params


def _analytic_value(kind: str, params: GridParameters, g: NetworkGraph):
    """Matching closed form, or (None, reason) when not applicable."""
    report = check_assumptions(params, g)
    if kind == "broadcast":
        if "broadcast_h2" in report.valid_formulas:
            return analytic.broadcast_h2(params), None
        return None, "not applicable (non-uniform parameters)"
    if kind == "primal_dual":
        if params.alpha != 0.0:
            return None, "not applicable (alpha > 0: only an upper bound exists)"
        if "pd_h2_exact_alpha0" in report.valid_formulas:
            return analytic.pd_h2_exact_alpha0(params, g.n), None
        return None, "not applicable (non-uniform parameters)"
    if "dapi_h2" in report.valid_formulas:
        return analytic.dapi_h2(params, spectrum(g))[0], None
    return None, "not applicable (non-uniform parameters)"


def cmd_analyze(cfg: dict) -> dict:
    """Numerical H2 plus the matching analytic value when assumptions hold."""
    model, g, params = model_from_config(cfg)
    numerical = h2.h2_norm(model)
    record = {
        "controller": cfg["controller"]["kind"],
        "n": g.n,
        "output": cfg["output"]["kind"],
        "numerical_h2_sq": numerical.value,
        "residual": numerical.diagnostics["residual"],
    }
    if cfg["output"]["kind"] == "cost_plus_frequency" and \
            float(cfg["output"].get("sqrt_pi", 0.0)) > 0:
        record["analytic_h2_sq"] = None
        record["analytic_note"] = "not applicable (frequency-penalty output)"
    else:
        value, reason = _analytic_value(cfg["controller"]["kind"], params, g)
        if value is None:
            record["analytic_h2_sq"] = None
            record["analytic_note"] = reason
        else:
            record["analytic_h2_sq"] = value
            record["rel_err"] = abs(numerical.value - value) / abs(value)
    if cfg["controller"]["kind"] == "primal_dual" and params.alpha > 0 \
            and params.is_uniform(g.n):
        record["upper_bound"] = analytic.pd_h2_upper_bound(
            params, g.n, params.alpha)
    return record


def table1_rows(rel_tol: float = 0.05) -> list:
    """Benchmark table: computed vs reference squared H2 norms.

    One row per frequency penalty; each controller column carries the
    computed value, the reference value, and the absolute deviation.
    Rows where any cell deviates more than rel_tol relative get a
    topology flag (the benchmark's exact network is an assumption).
    """
    g = build_path(5, 1.0)
    base = GridParameters(m=1.0, d=1.0, b=1.0, k=4.0,
                          tau_mu=6.0, tau_nu=6.0, tau=6.0, gamma=5.0)
    models = (
        assemble_primal_dual(g, replace(base, alpha=0.0)),
        assemble_primal_dual(g, replace(base, alpha=5.0)),
        assemble_dapi(g, base),
        assemble_broadcast(g, base),
    )
    rows = []
    for sqrt_pi, refs in sorted(REFERENCE_TABLE.items()):
        row = {"sqrt_pi": sqrt_pi}
        flagged = False
        for name, model, ref in zip(TABLE_COLUMNS, models, refs):
            value = h2.h2_norm(
                augment_frequency_penalty(model, sqrt_pi**2)).value
            row[name] = value
            row[f"{name}_ref"] = ref
            row[f"{name}_dev"] = abs(value - ref)
            if abs(value - ref) > rel_tol * abs(ref):
                flagged = True
        row["topology_flag"] = (
            "network-topology-assumption-exceeded" if flagged else ""
        )
        rows.append(row)
    return rows


def cmd_table1(out=None) -> str:
    rows = table1_rows()
    header = ["sqrt_pi"]
    for name in TABLE_COLUMNS:
        header += [name, f"{name}_ref", f"{name}_dev"]
    header.append("topology_flag")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [_fmt(row[h]) if h != "topology_flag" else row[h] for h in header]
        )
    return _emit(buf.getvalue(), out)


def cmd_sweep(cfg: dict) -> list:
    """Sweep n, gamma, or alpha; numerical plus analytic where valid."""
    run = cfg["run"]
    variable = run.get("variable")
    grid = run.get("grid")
    if variable not in ("n", "gamma", "alpha"):
        raise ConfigError("run.variable must be one of n, gamma, alpha")
    if not grid or list(grid) != sorted(grid):
        raise ConfigError("run.grid must be a nonempty ascending list")
    rows = []
    for point in grid:
        sub = {k: dict(v) for k, v in cfg.items()}
        if variable == "n":
            if sub["network"]["kind"] != "path":
                raise ConfigError("n sweeps require a path network")
            sub["network"]["n"] = int(point)
        elif variable == "gamma":
            sub["params"]["gamma"] = float(point)
            sub["controller"].pop("gamma", None)
        else:
            sub["params"]["alpha"] = float(point)
            sub["controller"].pop("alpha", None)
        try:
            record = cmd_analyze(sub)
        except FreqPerfError as exc:
            raise type(exc)(f"sweep failed at {variable} = {point}: {exc}")
        rows.append({
            variable: point,
            "numerical_h2_sq": record["numerical_h2_sq"],
            "analytic_h2_sq": record.get("analytic_h2_sq"),
        })
    return rows


def _sweep_csv(cfg: dict, out=None) -> str:
    rows = cmd_sweep(cfg)
    variable = cfg["run"]["variable"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([variable, "numerical_h2_sq", "analytic_h2_sq"])
    for row in rows:
        analytic_cell = (
            "" if row["analytic_h2_sq"] is None else _fmt(row["analytic_h2_sq"])
        )
        writer.writerow([_fmt(row[variable]),
                         _fmt(row["numerical_h2_sq"]), analytic_cell])
    return _emit(buf.getvalue(), out)


def figure1_comparison(master_seed: int = 0) -> dict:
    """Steady-state variance of the three controllers with non-uniform
    parameters drawn from seeded uniform [0.5, 1.5] scalings."""
    g = build_path(5, 1.0)
    nominal = GridParameters(m=1.0, d=1.0, b=1.0, k=4.0,
                             tau_mu=6.0, tau_nu=6.0, tau=6.0, gamma=1.0,
                             alpha=1.0)
    params = perturbed_parameters(nominal, g.n, master_seed)
    estimates = {}
    for tag, assembler in (("primal_dual_alpha1", assemble_primal_dual),
                           ("dapi_gamma1", assemble_dapi),
                           ("broadcast", assemble_broadcast)):
        model = assembler(g, params)
        est = sim.estimate_steady_state_variance(model, master_seed=master_seed)
        estimates[tag] = {"mean_sq": est.mean_sq, "ci_low": est.ci_low,
                          "ci_high": est.ci_high, "n_seeds": est.n_seeds}
    pd_var = estimates["primal_dual_alpha1"]["mean_sq"]
    estimates["pd_largest"] = bool(
        pd_var > estimates["dapi_gamma1"]["mean_sq"]
        and pd_var > estimates["broadcast"]["mean_sq"]
    )
    estimates["master_seed"] = master_seed
    return estimates


def cmd_simulate(cfg: dict, out=None, seed=None) -> dict:
    """Monte Carlo variance estimate; writes a trace CSV and a JSON record."""
    run = cfg["run"]
    master_seed = int(seed if seed is not None else run.get("seed", 0))
    if run.get("preset") == "figure1":
        record = figure1_comparison(master_seed)
        _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", out)
        return record
    model, g, params = model_from_config(cfg)
    kwargs = {k: run[k] for k in ("dt", "horizon", "burn_in")
              if run.get(k) is not None}
    method = run.get("method", "exact")
    est = sim.estimate_steady_state_variance(
        model, n_seeds=int(run.get("seeds", 20)), master_seed=master_seed,
        method=method, **kwargs)
    settings = sim.default_sim_settings(model, method)
    settings.update(kwargs)
    trace = sim.simulate(model, np.random.SeedSequence(master_seed).spawn(1)[0],
                         settings["dt"], settings["horizon"], method=method)
    record = {
        "controller": cfg["controller"]["kind"],
        "n": g.n,
        "mean_sq": est.mean_sq,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "n_seeds": est.n_seeds,
        "burn_in": est.burn_in,
        "dt": settings["dt"],
        "horizon": settings["horizon"],
        "method": method,
        "master_seed": master_seed,
    }
    if out:
        trace_path = f"{out}.trace.csv"
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["t"] + [f"y{i + 1}" for i in range(trace.outputs.shape[1])]
                + ["yTy"]
            )
            ysq = trace.output_sq
            for i, t in enumerate(trace.times):
                writer.writerow([_fmt(t)] + [_fmt(v) for v in trace.outputs[i]]
                                + [_fmt(ysq[i])])
        with open(out, "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
        record["trace_csv"] = trace_path
    else:
        print(json.dumps(record, indent=2, sort_keys=True))
    return record


def _emit(text: str, out=None) -> str:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _record_to_text(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    keys = list(record)
    writer.writerow(keys)
    writer.writerow(
        [_fmt(record[k]) if isinstance(record[k], (int, float))
         and not isinstance(record[k], bool) else record[k] for k in keys]
    )
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqperf",
        description="H2 performance of secondary frequency controllers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "table1", "sweep", "simulate"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML experiment configuration")
        p.add_argument("--out", help="output file path")
        p.add_argument("--seed", type=int, help="master RNG seed")
        p.add_argument("--format", choices=("csv", "json"), default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config)
        else:
            cfg = validate_config({})
        if args.command == "analyze":
            record = cmd_analyze(cfg)
            _emit(_record_to_text(record, args.format), args.out)
        elif args.command == "table1":
            cmd_table1(args.out)
        elif args.command == "sweep":
            _sweep_csv(cfg, args.out)
        else:
            cmd_simulate(cfg, args.out, args.seed)
    except (ConfigError, GraphError, ParameterError, OSError,
            yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (StabilityError, ConvergenceError, SimulationError,
            FreqPerfError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
