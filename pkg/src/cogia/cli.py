"""Command-line front end: verification, DoF regions and rate sweeps.

Subcommands
-----------
verify      run the construction over many channel draws and report the
            worst residual interference plus water-filling KKT checks
dof-region  enumerate the achievable DoF region and export it as CSV
rates       Monte Carlo rate sweep over (budget, split) pairs

Exit codes: 0 success, 1 usage or I/O error, 2 infeasible allocation or
oversized grid.  All data files are CSV with '.' decimals, comma
separators, LF line endings and a mandatory header row; every run also
writes a JSON manifest sufficient to reproduce it.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .dof import (
    closed_form_feasible,
    enumerate_region,
    grid_size,
    grid_tuples,
    projected_frontier,
)
from .errors import (
    CogiaError,
    GridTooLarge,
    InfeasibleAlloc,
    ScenarioError,
    TooManyDegenerateDraws,
)
from .alignment import build_all, effective_channels, interference_report
from .numerics import DEFAULT_POLICY, svd_factor
from .rates import kkt_violation, pcell_sum_rate, rate_region_sweep, scell_sum_rate
from .scenario import Scenario, derive_seed, generate_channels, load_scenario

_REPORT_COLUMNS = [
    "pcell_intra_at_P2",
    "pcell_intra_at_P1",
    "scell_intra_at_S2",
    "scell_intra_at_S1",
    "intercell_post_at_P1",
    "intercell_post_at_P2",
    "cross_stream_at_P1",
    "cross_stream_at_P2",
    "cross_stream_at_S1",
    "cross_stream_at_S2",
]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_manifest(out_dir: Path, command: str, scenario: Scenario, seed: int, outputs: list[Path]) -> Path:
    canonical = json.dumps(scenario.raw, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    manifest = {
        "tool": "cogia",
        "version": __version__,
        "command": command,
        "scenario_digest": digest,
        "scenario": scenario.raw,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [
            {"path": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()} for p in outputs
        ],
    }
    path = out_dir / f"manifest_{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def cmd_verify(args) -> int:
    scenario = load_scenario(args.config)
    if scenario.alloc is None:
        print("verify requires an 'alloc' object in the scenario", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else scenario.seed
    trials = args.trials if args.trials is not None else scenario.trials
    dims, alloc, noise = scenario.dims, scenario.alloc, scenario.noise
    pol = DEFAULT_POLICY

    verdict = closed_form_feasible(dims, alloc)
    if not verdict.feasible:
        print(f"allocation {alloc.as_tuple()} infeasible for dims {dims.as_tuple()}:", file=sys.stderr)
        for v in verdict.violated:
            print(f"  violated: {v}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    worst_overall = 0.0
    kkt_overall = 0.0
    try:
        for t in range(trials):
            trial_seed = derive_seed(seed, t)
            ch = generate_channels(dims, trial_seed)
            prs = build_all(ch, alloc, trial_seed, pol)
            report = interference_report(ch, prs, pol)
            eff = effective_channels(ch, prs)
            rp = pcell_sum_rate(prs, eff, noise, pol)
            rs = scell_sum_rate(prs, eff, noise, pol)
            kkt = _trial_kkt(prs, eff, noise, rp, rs)
            worst_overall = max(worst_overall, report.worst_case)
            kkt_overall = max(kkt_overall, kkt)
            rows.append(
                [t, report.worst_case]
                + [report.entries[c] for c in _REPORT_COLUMNS]
                + [kkt, rp.sum_rate, rs.sum_rate, rp.uncharged_correction_power]
            )
    except CogiaError as exc:
        print(f"construction failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    report_path = out_dir / "verify_report.csv"
    _write_csv(
        report_path,
        ["trial", "worst_case"] + _REPORT_COLUMNS + ["kkt_gap", "R_P", "R_S", "uncharged_correction_power"],
        rows,
    )
    manifest = _write_manifest(out_dir, "verify", scenario, seed, [report_path])
    _say(args, f"trials: {trials}")
    _say(args, f"worst residual interference (relative): {worst_overall:.3e}")
    _say(args, f"worst water-filling KKT gap: {kkt_overall:.3e}")
    _say(args, f"wrote {report_path} and {manifest}")
    if worst_overall <= pol.zero_tol:
        _say(args, "PASS: intra- and inter-cell interference cancelled to tolerance")
        return 0
    print(f"FAIL: worst residual {worst_overall:.3e} exceeds {pol.zero_tol:.1e}", file=sys.stderr)
    return 2


def _trial_kkt(prs, eff, noise, rp, rs) -> float:
    """Worst KKT gap across both cells of one trial."""
    gap = 0.0
    specs = [
        (prs.U_P1.T @ eff.G_P1, noise.sigma2_P1, rp.allocation),
        (prs.U_P2.T @ eff.G_P2, noise.sigma2_P2, rp.allocation),
        (eff.D_S1, noise.sigma2_S1, rs.allocation),
        (eff.D_S2, noise.sigma2_S2, rs.allocation),
    ]
    user_idx = {id(rp.allocation): 0, id(rs.allocation): 0}
    for E, s2, cell in specs:
        if E.shape[1] == 0:
            continue
        _, gammas, _ = svd_factor(E)
        res = cell.users[user_idx[id(cell)]]
        user_idx[id(cell)] += 1
        gap = max(gap, kkt_violation(res, gammas, s2))
    return gap


def cmd_dof_region(args) -> int:
    scenario = load_scenario(args.config)
    seed = args.seed if args.seed is not None else scenario.seed
    trials = args.trials if args.trials is not None else scenario.trials
    dims = scenario.dims
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        region = enumerate_region(dims, mode="closed_form", seed=seed, cap=scenario.grid_cap)
    except GridTooLarge as exc:
        print(f"grid too large: {exc}", file=sys.stderr)
        return 2

    feasible = set(region.points)
    frontier = set(region.frontier)
    header = ["d_P1", "d_P2", "d_S1", "d_S2", "feasible", "frontier"]
    rows = [
        list(t.as_tuple()) + [int(t in feasible), int(t in frontier)]
        for t in grid_tuples(dims)
    ]
    region_path = out_dir / "region.csv"
    _write_csv(region_path, header, rows)

    projected_path = out_dir / "region_projected.csv"
    _write_csv(projected_path, ["dS_sum", "dP_sum_max"], [list(p) for p in projected_frontier(region)])

    outputs = [region_path, projected_path]
    if args.constructive:
        try:
            region_c = enumerate_region(
                dims, mode="constructive", seed=seed, trials=trials, cap=scenario.grid_cap
            )
        except (GridTooLarge, TooManyDegenerateDraws) as exc:
            print(f"constructive enumeration failed: {exc}", file=sys.stderr)
            return 2
        feasible_c = set(region_c.points)
        frontier_c = set(region_c.frontier)
        rows_c = [
            list(t.as_tuple()) + [int(t in feasible_c), int(t in frontier_c)]
            for t in grid_tuples(dims)
        ]
        constructive_path = out_dir / "region_constructive.csv"
        _write_csv(constructive_path, header, rows_c)
        diff_rows = [
            list(t.as_tuple()) + [int(t in feasible), int(t in feasible_c)]
            for t in grid_tuples(dims)
            if (t in feasible) != (t in feasible_c)
        ]
        diff_path = out_dir / "region_diff.csv"
        _write_csv(diff_path, ["d_P1", "d_P2", "d_S1", "d_S2", "closed_form", "constructive"], diff_rows)
        outputs += [constructive_path, diff_path]
        _say(args, f"closed-form vs constructive differences: {len(diff_rows)}")

    manifest = _write_manifest(out_dir, "dof-region", scenario, seed, outputs)
    _say(args, f"feasible tuples: {len(region.points)} of {grid_size(dims)}; frontier size: {len(region.frontier)}")
    _say(args, "wrote " + ", ".join(str(p) for p in outputs + [manifest]))
    return 0


def cmd_rates(args) -> int:
    scenario = load_scenario(args.config)
    if not scenario.splits:
        print("rates requires 'alloc' or 'splits' in the scenario", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else scenario.seed
    trials = args.trials if args.trials is not None else scenario.trials
    dims, noise = scenario.dims, scenario.noise
    sigma2s = (noise.sigma2_P1, noise.sigma2_P2, noise.sigma2_S1, noise.sigma2_S2)

    try:
        points = rate_region_sweep(
            dims, scenario.splits, scenario.budgets, trials=trials, seed=seed, sigma2s=sigma2s
        )
    except (InfeasibleAlloc, ScenarioError) as exc:
        print(f"infeasible rate sweep: {exc}", file=sys.stderr)
        return 2
    except TooManyDegenerateDraws as exc:
        print(f"rate sweep failed: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rates_path = out_dir / "rates.csv"
    header = [
        "qav", "d_P1", "d_P2", "d_S1", "d_S2",
        "R_P_mean", "R_S_mean", "R_P_stderr", "R_S_stderr", "trials", "seed",
    ]
    rows = [
        [pt.Qav, *pt.alloc.as_tuple(), pt.R_P, pt.R_S, pt.R_P_stderr, pt.R_S_stderr, pt.trials, seed]
        for pt in points
    ]
    _write_csv(rates_path, header, rows)
    manifest = _write_manifest(out_dir, "rates", scenario, seed, [rates_path])
    _say(args, f"rate points: {len(points)} ({len(scenario.splits)} splits x {len(scenario.budgets)} budgets)")
    _say(args, f"wrote {rates_path} and {manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogia",
        description="Two-cell cognitive network interference-alignment simulator",
    )
    parser.add_argument("--version", action="version", version=f"cogia {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default="./out", help="output directory (default ./out)")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--trials", type=int, default=None, help="override the scenario trial count")
        p.add_argument("--quiet", action="store_true", help="suppress informational output")

    p_verify = sub.add_parser("verify", help="check interference cancellation numerically")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_region = sub.add_parser("dof-region", help="enumerate the achievable DoF region")
    common(p_region)
    p_region.add_argument(
        "--constructive",
        action="store_true",
        help="also enumerate by explicit construction and emit a diff file",
    )
    p_region.set_defaults(func=cmd_dof_region)

    p_rates = sub.add_parser("rates", help="Monte Carlo sum-rate sweep")
    common(p_rates)
    p_rates.set_defaults(func=cmd_rates)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
