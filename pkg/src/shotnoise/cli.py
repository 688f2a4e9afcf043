"""Command-line entry point: ``shotnoise <subcommand> --config PATH``.

Exit codes: 0 success, 1 invalid configuration or I/O failure, 2 a verify
gate failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from shotnoise.config import ConfigError, ExperimentConfig, config_hash, load_config
from shotnoise.kernels import closed_form_scaling, scaling_g
from shotnoise.limit import limit_covariance_matrix, sample_limit_batch
from shotnoise.renewal import SCALINGS
from shotnoise.rng import RngStream
from shotnoise import verify

SUBCOMMANDS = ("simulate", "verify", "limit-sample", "kernel-probe", "report")
SCHEMA_VERSION = 1

EXIT_OK, EXIT_INVALID, EXIT_GATE = 0, 1, 2

COV_RATIO_PAIRS = ((0.5, 0.0), (0.5, 0.2), (1.0, 0.0))
COV_RATIO_T_GRID = (1e3, 1e6, 1e9, 1e12)
KARAMATA_T_GRID = tuple(10.0**k for k in range(2, 11))


def _clean(obj):
    """JSON-safe copy: numpy to builtins, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: Path, obj):
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(path: Path, kind: str, digest: str, columns, rows):
    lines = [f"# shotnoise {kind} schema=v{SCHEMA_VERSION} config_hash={digest}", ",".join(columns)]
    lines.extend(",".join(repr(float(x)) if isinstance(x, float) else str(x) for x in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- subcommands ----------------------------------------------------------------------


def cmd_simulate(cfg: ExperimentConfig, out: Path, digest: str) -> int:
    exp = verify.run_fdd_experiment(
        cfg.law, cfg.response_kernel, cfg.t, cfg.u_grid, cfg.replications,
        cfg.master_seed, cfg.workers, cfg.scaling,
    )
    u = exp.report.u_grid
    rows = ((i, u[k], float(z)) for i, zs in enumerate(exp.samples) for k, z in enumerate(zs))
    write_csv(out / "samples.csv", "samples", digest, ("replication_index", "u", "Z"), rows)
    return EXIT_OK


def evaluate_gates(cfg: ExperimentConfig, report: dict, checks: dict) -> list[dict]:
    g = cfg.gates
    gates = [
        {
            "name": "cov_max_deviation",
            "value": report["max_abs_deviation"],
            "se": report["max_deviation_se"],
            "threshold": g["cov_max_deviation"],
            "passed": report["max_abs_deviation"] <= g["cov_max_deviation"],
        }
    ]
    if not report["marginals"]:
        gates.append({
            "name": "marginal_sample_size",
            "value": report["replications"],
            "threshold": verify.MIN_NORMALITY,
            "passed": False,
        })
    for k, m in enumerate(report["marginals"]):
        for key, gate in (("skewness", "marginal_abs_skewness"), ("excess_kurtosis", "marginal_abs_excess_kurtosis")):
            val = m[key]
            gates.append({
                "name": f"{gate}[u={report['u_grid'][k]}]",
                "value": val,
                "threshold": g[gate],
                "passed": (not m["degenerate"]) and abs(val) <= g[gate],
            })
    for p in report["projections"]:
        gates.append({
            "name": f"projection_variance_abs[alphas={p['alphas']}]",
            "value": p["deviation"],
            "se": p["variance_se"],
            "threshold": g["projection_variance_abs"],
            "passed": abs(p["deviation"]) <= g["projection_variance_abs"],
        })
    by_pair = {}
    for row in checks["cov_ratio"]:
        by_pair.setdefault((row["a"], row["b"]), []).append(row["error"])
    for (a, b), errs in by_pair.items():
        gates.append({
            "name": f"cov_ratio_error_decreasing[a={a},b={b}]",
            "value": errs[-1],
            "passed": all(e2 < e1 for e1, e2 in zip(errs, errs[1:])),
        })
    return gates


def deterministic_checks(cfg: ExperimentConfig) -> dict:
    kernel = cfg.response_kernel
    checks = {
        "cov_ratio": verify.cov_ratio_report(kernel, COV_RATIO_T_GRID, COV_RATIO_PAIRS),
        "karamata": verify.karamata_report(kernel, [t for t in KARAMATA_T_GRID if t > kernel.t_min]),
    }
    if kernel.is_neg_half:
        checks["scaling_consistency"] = verify.scaling_consistency_report(kernel, COV_RATIO_T_GRID, (0.25, 0.5, 0.75))
    return checks


def cmd_verify(cfg: ExperimentConfig, out: Path, digest: str) -> int:
    exp = verify.run_fdd_experiment(
        cfg.law, cfg.response_kernel, cfg.t, cfg.u_grid, cfg.replications,
        cfg.master_seed, cfg.workers, cfg.scaling, cfg.alphas,
    )
    report = exp.report.to_dict()
    checks = deterministic_checks(cfg)
    gates = evaluate_gates(cfg, report, checks)
    failed = [g["name"] for g in gates if not g["passed"]]
    doc = {
        "schema": f"shotnoise.report v{SCHEMA_VERSION}",
        "config_hash": digest,
        "config": {k: v for k, v in cfg.to_dict().items() if k != "out_dir"},
        "experiment": report,
        "deterministic_checks": checks,
        "gates": gates,
        "failed_gates": failed,
        "passed": not failed,
    }
    write_json(out / "report.json", doc)
    for name, rows in checks.items():
        if rows:
            cols = list(rows[0])
            write_csv(out / f"{name}.csv", name, digest, cols, ([r[c] for c in cols] for r in rows))
    return EXIT_OK if not failed else EXIT_GATE


def cmd_limit_sample(cfg: ExperimentConfig, out: Path, digest: str) -> int:
    u = np.asarray(cfg.u_grid, dtype=float)
    x = sample_limit_batch(u, RngStream(cfg.master_seed, 0), cfg.replications)
    rows = ((i, float(u[k]), float(v)) for i, xs in enumerate(x) for k, v in enumerate(xs))
    write_csv(out / "limit_samples.csv", "limit_samples", digest, ("replication", "u", "X"), rows)
    write_json(out / "limit_covariance.json", {
        "schema": f"shotnoise.limit_covariance v{SCHEMA_VERSION}",
        "config_hash": digest,
        "u_grid": u,
        "covariance": limit_covariance_matrix(u),
    })
    return EXIT_OK


def cmd_kernel_probe(cfg: ExperimentConfig, out: Path, digest: str) -> int:
    kernel = cfg.response_kernel
    u = [float(x) for x in cfg.u_grid]
    ts = np.geomspace(kernel.t_min, cfg.t, cfg.probe_points)
    scale = scaling_g if cfg.scaling == "inverse" else closed_form_scaling
    cols = ["t", "h", "H", "m"] + [f"g_u={x!r}" for x in u]
    rows = []
    for t in ts:
        t = float(t)
        g = [float(scale(kernel, t, x)) for x in u]
        rows.append([t, float(kernel.h(t)), float(kernel.H(t)), float(kernel.m(t))] + g)
    write_csv(out / "kernel_probe.csv", "kernel_probe", digest, cols, rows)
    return EXIT_OK


def cmd_report(cfg: ExperimentConfig, out: Path, digest: str) -> int:
    path = out / "report.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error: {path}: {exc.strerror}; run 'verify' first", file=sys.stderr)
        return EXIT_INVALID
    if doc.get("config_hash") != digest:
        print(f"warning: {path} was produced by config {doc.get('config_hash')}, not {digest}", file=sys.stderr)
    exp = doc["experiment"]
    print(f"t={exp['config']['t']!r} replications={exp['replications']} workers={exp['workers']}")
    print(f"max |cov - limit| = {exp['max_abs_deviation']:.4f} (SE {exp['max_deviation_se']:.4f})")
    for g in doc["gates"]:
        print(f"{'PASS' if g['passed'] else 'FAIL'}  {g['name']}  value={g.get('value')}  threshold={g.get('threshold')}")
    return EXIT_OK if doc.get("passed") else EXIT_GATE


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "limit-sample": cmd_limit_sample,
    "kernel-probe": cmd_kernel_probe,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shotnoise", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--replications", type=int, metavar="N")
    p.add_argument("--workers", type=int, metavar="N")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--scaling", choices=SCALINGS)
    return p


def run(subcommand: str, cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[subcommand](cfg, out, config_hash(cfg))
    except OSError as exc:
        print(f"error: {exc.filename or out}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(
            master_seed=args.seed,
            replications=args.replications,
            workers=args.workers,
            out_dir=args.out,
            scaling=args.scaling,
        )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
