"""``photeleport`` command line.

    photeleport run --config scenarios/polarization.yaml --out results/
    photeleport run --scenario algebra-selftest --seed 3
    photeleport run all --strict
    photeleport validate scenarios/full.yaml

Each run writes ``manifest.json`` (deterministic for a given config and seed),
``timings.json``, ``report.txt`` and the scenario's CSV tables into the output
directory (``--out``, else ``$PHOTELEPORT_OUT``, else ``./photeleport-out``).
Exit status: 0 all checks pass, 1 a check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, checks as C
from .config import SCENARIOS, ConfigError, ScenarioConfig, config_echo, validate_config
from .field import (
    BELL_KINDS,
    PhotonWaveFunction,
    build_epr_pair,
    gaussian_packet,
    plane_wave,
)
from .kernels import BACKEND
from .propagator import sweep_csv
from .teleportation import (
    HELICITY_ORDER,
    corrective_unitary_table,
    decompose_initial_state,
    relativistic_contrast,
    run_full_teleport,
    run_nonrel_limit,
    run_polarization_teleport,
)

OUT_ENV = "PHOTELEPORT_OUT"
DEFAULT_OUT = "photeleport-out"


@dataclass
class RunResult:
    manifest: dict
    timings: dict
    tables: dict = field(default_factory=dict)  # file name -> CSV text
    report: str = ""

    def failed(self, strict: bool = False) -> list:
        return [
            c for c in self.manifest["checks"]
            if not c["passed"] and (strict or c["severity"] == "error")
        ]


def _c2(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _fmt_index(v, collinear: bool) -> str:
    # collinear grids print the axis index; 3D grids print "nx|ny|nz"
    return str(v[2]) if collinear else "|".join(map(str, v))


def _check_rows(checks) -> list:
    return [c.to_dict() for c in checks]


# -- scenarios ----------------------------------------------------------------------------

def _algebra(cfg: ScenarioConfig):
    return C.suite_algebra(cfg.seed, cfg.algebra.n_words), {}, {}


def _bell(cfg: ScenarioConfig):
    p = cfg.polarization
    return C.suite_bell(cfg.gauge_angle, p.k2, p.k3), {}, {}


def _propagator(cfg: ScenarioConfig):
    p = cfg.propagator
    checks, data = C.suite_propagator(
        p.compare_half_extent, p.compare_spacing, p.smearing_sigma, p.regulator,
        p.x0, p.r_max, p.r_step,
    )
    summary = {"light_cone_peak_r": data["peak"], "grid_vs_quadrature": data["deviations"]}
    return checks, summary, {"light_cone.csv": sweep_csv(data["samples"])}


def _polarization(cfg: ScenarioConfig):
    p = cfg.polarization
    args = (p.k1, p.k2, p.k3, cfg.gauge_angle)
    rep = run_polarization_teleport(p.f_plus, p.f_minus, *args)
    dec = decompose_initial_state(p.f_plus, p.f_minus, *args)
    table = corrective_unitary_table()
    checks = [C._c("decomposition_residual", "Bell expansion of the initial state is exact",
                   dec.residual_max, "<", 1e-12)]
    rows = ["channel,raw_plus_re,raw_plus_im,raw_minus_re,raw_minus_im,fidelity,probability"]
    channels = {}
    for kind in BELL_KINDS:
        ch = rep.channels[kind]
        checks.append(C._c(f"{kind}_fidelity", f"{kind} channel restores the input after correction",
                           ch.fidelity, ">=", 1 - 1e-10))
        checks.append(C._c(f"{kind}_probability_dev", f"{kind} channel probability is 1/4",
                           abs(ch.probability - 0.25), "<", 1e-10))
        channels[kind] = {
            "raw": [_c2(v) for v in ch.raw],
            "fidelity": ch.fidelity,
            "probability": ch.probability,
            "corrective_unitary": [[_c2(v) for v in row] for row in table[kind].corrective_unitary],
        }
        rows.append(",".join([kind, *(repr(x) for v in ch.raw for x in _c2(v)),
                              repr(float(ch.fidelity)), repr(float(ch.probability))]))
    if p.random_inputs:
        extra, _ = C.suite_polarization(cfg.seed, cfg.gauge_angle, p.random_inputs)
        for c in extra:
            c.name = f"random_inputs.{c.name}"
        checks += extra
    summary = {"channels": channels, "retained_fraction": rep.retained_fraction,
               "n_outcomes": rep.extras["n_outcomes"]}
    return checks, summary, {"channels.csv": "\n".join(rows) + "\n"}


def _packet(cfg: ScenarioConfig) -> PhotonWaveFunction:
    grid, pk = cfg.grid.build(), cfg.packet
    if pk.kind == "plane":
        return plane_wave(grid, pk.center, pk.helicity)
    return gaussian_packet(grid, pk.center, pk.sigma, pk.helicity, pk.x_center, cutoff=pk.cutoff)


def _full(cfg: ScenarioConfig):
    f = _packet(cfg)
    epr = build_epr_pair(f.grid, cfg.epr.x0, cfg.epr.support)
    rep = run_full_teleport(f, epr, cfg.gauge_angle)
    ex = rep.extras
    fsupp = {m.momentum_index for m in f.amplitudes}
    overlap = fsupp & (epr.support(0) | epr.support(1))
    checks = [
        C._c("full_probability_sum_dev", "outcome probabilities (all contractions) sum to 1",
             abs(ex["full_probability_sum"] - 1), "<", 1e-8),
        C._c("factorized_probability_sum_dev", "normalized factorized probabilities sum to 1",
             abs(ex["factorized_probability_sum"] - 1), "<", 1e-8),
    ]
    if overlap:
        # exchange present: the protocol cannot be exact, flag it without failing
        checks.append(C._c("exchange_ratio", "|exchange|/|direct| vanishes (supports overlap)",
                           rep.exchange_ratio, "<", 1e-10, severity="warning"))
    else:
        checks += [
            C._c("max_outcome_exchange_ratio", "disjoint supports: no exchange on any outcome",
                 ex["max_outcome_exchange_ratio"], "<", 1e-10),
            C._c("full_vs_factorized", "disjoint supports: full == factorized on leg-3 outcomes",
                 ex["max_rel_full_vs_factorized_leg3_outcomes"], "<", 1e-10),
        ]
    rows = ["bell,p,q,detector_k,detector_s,prob_full,prob_factorized"]
    for (kind, (p, q), d), pf, pz in zip(ex["outcome_labels"], ex["probabilities_full"],
                                         ex["probabilities_factorized"]):
        p, q, k = (_fmt_index(v, f.grid.collinear) for v in (p, q, d.momentum_index))
        rows.append(f"{kind},{p},{q},{k},{d.helicity},{float(pf)!r},{float(pz)!r}")
    summary = {
        "n_outcomes": ex["n_outcomes"],
        "supports_overlap": bool(overlap),
        "exchange_ratio": rep.exchange_ratio,
        "max_rel_full_vs_factorized_leg3_outcomes": ex["max_rel_full_vs_factorized_leg3_outcomes"],
        "factorized_raw_norm": ex["factorized_raw_norm"],
        "channel_probabilities": {k: rep.channels[k].probability for k in BELL_KINDS},
    }
    return checks, summary, {"outcomes.csv": "\n".join(rows) + "\n"}


def _nonrel(cfg: ScenarioConfig):
    f = _packet(cfg)
    # the relativistic contrast grid has no k = 0 mode
    f = PhotonWaveFunction(f.grid, {m: c for m, c in f.amplitudes.items() if any(m.momentum_index)})
    f = f.normalized()
    n = cfg.nonrel
    r = run_nonrel_limit(f, n.Y, n.P, n.X, n.Q, cfg.gauge_angle)
    rel = relativistic_contrast(f, n.Y, n.P, n.X, n.Q)
    checks = [
        C._c("max_elementwise_deviation", "galilean teleported packet == shifted, phased input",
             r.max_deviation, "<", 1e-8),
        C._c("fidelity", "galilean teleported packet fidelity", r.fidelity, ">=", 1 - 1e-8),
        C._c("relativistic_gap", "relativistic measure teleports worse",
             r.fidelity - rel.fidelity, ">", 0.0),
    ]
    rows = ["site,helicity,amp_re,amp_im,expected_re,expected_im"]
    for i, site in enumerate(r.sites):
        for j, s in enumerate(HELICITY_ORDER):
            a, e = r.amplitudes[i, j], r.expected[i, j]
            rows.append(f"{site[2]},{s},{a.real!r},{a.imag!r},{e.real!r},{e.imag!r}")
    summary = {"fidelity": r.fidelity, "relativistic_fidelity": rel.fidelity,
               "gap": r.fidelity - rel.fidelity, "n_sites": len(r.sites)}
    return checks, summary, {"teleported_packet.csv": "\n".join(rows) + "\n"}


RUNNERS = {
    "algebra-selftest": _algebra,
    "bell-check": _bell,
    "propagator-sweep": _propagator,
    "teleport-polarization": _polarization,
    "teleport-full": _full,
    "nonrel-limit": _nonrel,
}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return _c2(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _manifest(scenario: str, echo: dict, checks: list, summary: dict, files) -> dict:
    rows = _check_rows(checks)
    return _jsonable({
        "artifact": {"name": "photeleport", "version": __version__},
        "scenario": scenario,
        "config": echo,
        "checks": rows,
        "passed": all(r["passed"] for r in rows if r["severity"] == "error"),
        "summary": summary,
        "outputs": sorted(files),
    })


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    t = time.perf_counter()
    checks, summary, tables = RUNNERS[cfg.scenario](cfg)
    elapsed = time.perf_counter() - t
    tables = dict(tables)
    tables["checks.csv"] = _checks_csv(checks)
    manifest = _manifest(cfg.scenario, config_echo(cfg), checks, summary, tables)
    timings = {"backend": BACKEND, "seconds": {cfg.scenario: elapsed}}
    return RunResult(manifest, timings, tables, _report(manifest, timings))


def run_all(seed: int = 1) -> RunResult:
    """Every acceptance criterion, one manifest."""
    all_checks, seconds, criteria = [], {}, []
    for n, key, title, budget, _ in C.ACCEPTANCE:
        checks, dt = C.run_criterion(n, seed)
        for c in checks:
            c.name = f"{n}.{key}.{c.name}"
        all_checks += checks
        seconds[f"{n}.{key}"] = dt
        criteria.append({"number": n, "key": key, "title": title,
                         "passed": all(c.passed for c in checks), "runtime_budget_s": budget})
    tables = {"checks.csv": _checks_csv(all_checks)}
    manifest = _manifest("all", {"seed": seed}, all_checks, {"criteria": criteria}, tables)
    timings = {"backend": BACKEND, "seconds": seconds}
    return RunResult(manifest, timings, tables, _report(manifest, timings))


def _checks_csv(checks) -> str:
    rows = ["name,value,op,limit,severity,passed,invariant"]
    for c in checks:
        inv = c.invariant.replace('"', "'")
        rows.append(f'{c.name},{c.value!r},{c.op},{c.limit!r},{c.severity},{c.passed},"{inv}"')
    return "\n".join(rows) + "\n"


def _report(manifest: dict, timings: dict) -> str:
    rows = manifest["checks"]
    w = max([len(r["name"]) for r in rows] + [5])
    lines = [f"photeleport {manifest['artifact']['version']}  scenario: {manifest['scenario']}", ""]
    lines.append(f"{'check':<{w}}  {'value':>14}  op  {'limit':>12}  status")
    for r in rows:
        status = "pass" if r["passed"] else ("FAIL" if r["severity"] == "error" else "warn")
        lines.append(f"{r['name']:<{w}}  {r['value']:>14.6g}  {r['op']:<2}  {r['limit']:>12.6g}  {status}")
    lines.append("")
    total = sum(timings["seconds"].values())
    lines.append(f"overall: {'PASS' if manifest['passed'] else 'FAIL'}   ({total:.2f} s, {timings['backend']} kernels)")
    return "\n".join(lines) + "\n"


def write_outputs(result: RunResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(result.manifest, indent=2, sort_keys=True) + "\n")
    (out / "timings.json").write_text(json.dumps(result.timings, indent=2, sort_keys=True) + "\n")
    (out / "report.txt").write_text(result.report)
    for name, text in result.tables.items():
        (out / name).write_text(text)


# -- argument handling -----------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="photeleport", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"photeleport {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario, or 'all' acceptance criteria")
    run.add_argument("target", nargs="?", choices=["all"], help="run every acceptance criterion")
    run.add_argument("--config", type=Path, help="scenario YAML file")
    run.add_argument("--scenario", choices=SCENARIOS, help="scenario name (overrides the file)")
    run.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    run.add_argument("--seed", type=int, help="seed for randomized property runs")
    run.add_argument("--strict", action="store_true", help="treat warnings as failures")
    val = sub.add_parser("validate", help="validate a scenario file without running it")
    val.add_argument("config", type=Path)
    return ap


def _load(path: Path | None, **overrides) -> ScenarioConfig:
    text = path.read_text() if path is not None else ""
    return validate_config(text, **overrides)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = _load(args.config)
            print(json.dumps(config_echo(cfg), indent=2, sort_keys=True))
            return 0
        if args.target == "all":
            if args.config or args.scenario:
                raise ConfigError(["run all takes no --config/--scenario"])
            result = run_all(1 if args.seed is None else args.seed)
        else:
            if args.config is None and args.scenario is None:
                raise ConfigError(["need --config PATH or --scenario NAME"])
            cfg = _load(args.config, scenario=args.scenario, seed=args.seed)
            result = run_scenario(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = args.out or Path(os.environ.get(OUT_ENV, DEFAULT_OUT))
    write_outputs(result, out)
    sys.stdout.write(result.report)
    failed = result.failed(args.strict)
    for c in failed:
        print(f"failed: {c['name']}: {c['invariant']} (value {c['value']:.6g}, need {c['op']} {c['limit']:.6g})",
              file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
