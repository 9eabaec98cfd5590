"""Feasibility of stream allocations and achievable DoF regions.

Feasibility is decided two independent ways:

* :func:`closed_form_feasible` evaluates the analytic predicate: the
  secondary antenna-difference bound, the secondary receive bound, the
  primary antenna bound, the zero-forcing receiver dimension count, and
  the right-inverse condition for correction vectors.
* :func:`constructive_check` actually draws channels and runs the full
  construction, declaring a tuple feasible only when every trial cancels
  all interference to numerical precision and every effective channel
  has full column rank.

The closed form carries no bound not validated by the constructive
oracle; the maximum sum-DoF constants quoted elsewhere in the literature
are deliberately not asserted here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from .alignment import build_all, effective_channels, interference_report
from .errors import (
    DegenerateChannel,
    GridTooLarge,
    InfeasibleAlloc,
    NoComplement,
    RankDeficient,
    TooManyDegenerateDraws,
)
from .numerics import DEFAULT_POLICY, TolerancePolicy, rank_under_policy
from .scenario import NetworkDims, StreamAlloc, derive_seed, generate_channels

__all__ = [
    "Violation",
    "FeasibilityVerdict",
    "DofRegion",
    "closed_form_feasible",
    "constructive_check",
    "enumerate_region",
    "grid_tuples",
    "projected_frontier",
    "MAX_DEGENERATE_RETRIES",
]

MAX_DEGENERATE_RETRIES = 10


@dataclass(frozen=True)
class Violation:
    """One violated feasibility condition."""

    condition: str
    detail: str
    origin: str  # "structural" | "derived" | "constructive"

    def __str__(self) -> str:
        return f"{self.condition} [{self.origin}]: {self.detail}"


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    violated: tuple[Violation, ...] = ()

    def __post_init__(self) -> None:
        assert self.feasible == (len(self.violated) == 0)


@dataclass(frozen=True)
class DofRegion:
    """Feasible allocation tuples for one antenna quartet."""

    dims: NetworkDims
    points: tuple[StreamAlloc, ...]
    frontier: tuple[StreamAlloc, ...]


def closed_form_feasible(dims: NetworkDims, d: StreamAlloc) -> FeasibilityVerdict:
    """Analytic feasibility predicate for (dims, d).

    Conditions (i) d_Sj <= M_S - N_S and (ii) d_Sj <= N_S bound the
    secondary cell; (iii) d_Pi <= M_P bounds the primary transmit side;
    (iv) N_P >= d_Pi + d_S1 + d_S2 (for served primary users) is the
    zero-forcing receiver dimension count and (v) M_S >= N_P whenever
    corrections are needed is the right-inverse requirement.  (iv) and
    (v) are labeled as derived from the construction.
    """
    v: list[Violation] = []
    headroom = max(dims.M_S - dims.N_S, 0)
    for name, d_j in (("d_S1", d.d_S1), ("d_S2", d.d_S2)):
        if d_j > headroom:
            v.append(
                Violation(
                    f"{name} <= M_S - N_S",
                    f"{d_j} > {dims.M_S} - {dims.N_S} = {dims.M_S - dims.N_S}",
                    "structural",
                )
            )
        if d_j > dims.N_S:
            v.append(Violation(f"{name} <= N_S", f"{d_j} > {dims.N_S}", "structural"))
    Z = dims.Z
    needs_corrections = False
    for name, d_i in (("d_P1", d.d_P1), ("d_P2", d.d_P2)):
        if d_i > dims.M_P:
            v.append(Violation(f"{name} <= M_P", f"{d_i} > {dims.M_P}", "structural"))
        if d_i >= 1 and dims.N_P < d_i + d.d_S1 + d.d_S2:
            v.append(
                Violation(
                    f"N_P >= {name} + d_S1 + d_S2",
                    f"{dims.N_P} < {d_i} + {d.d_S1} + {d.d_S2}",
                    "derived",
                )
            )
        if d_i > Z:
            needs_corrections = True
    if needs_corrections and dims.M_S < dims.N_P:
        v.append(
            Violation(
                "M_S >= N_P when d_Pi > Z",
                f"{dims.M_S} < {dims.N_P} with Z = {Z}",
                "derived",
            )
        )
    return FeasibilityVerdict(feasible=not v, violated=tuple(v))


def _full_column_rank(M: np.ndarray, pol: TolerancePolicy) -> bool:
    if M.shape[1] == 0:
        return True
    s = np.linalg.svd(M, compute_uv=False)
    return rank_under_policy(s, pol) == M.shape[1]


def constructive_check(
    dims: NetworkDims,
    d: StreamAlloc,
    trials: int = 20,
    seed: int = 0,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> FeasibilityVerdict:
    """Feasibility by running the full construction on random channels.

    Every trial must finish with worst-case residual interference at or
    below ``zero_tol`` and full-column-rank effective channels.  A
    structural failure (InfeasibleAlloc, NoComplement, RankDeficient) on
    a generic draw marks the tuple infeasible immediately; degenerate
    draws are redrawn up to MAX_DEGENERATE_RETRIES times per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for t in range(trials):
        for attempt in range(MAX_DEGENERATE_RETRIES):
            trial_seed = derive_seed(seed, t, attempt)
            ch = generate_channels(dims, trial_seed)
            try:
                prs = build_all(ch, d, trial_seed, pol)
            except DegenerateChannel:
                continue
            except (InfeasibleAlloc, NoComplement, RankDeficient) as exc:
                return FeasibilityVerdict(
                    False,
                    (Violation("construction succeeds", f"trial {t}: {type(exc).__name__}: {exc}", "constructive"),),
                )
            report = interference_report(ch, prs, pol)
            if report.worst_case > pol.zero_tol:
                return FeasibilityVerdict(
                    False,
                    (Violation(
                        "residual interference <= zero_tol",
                        f"trial {t}: worst_case = {report.worst_case:.3e}",
                        "constructive",
                    ),),
                )
            eff = effective_channels(ch, prs)
            streams = (
                (prs.U_P1.T @ eff.G_P1, "P1"),
                (prs.U_P2.T @ eff.G_P2, "P2"),
                (eff.D_S1, "S1"),
                (eff.D_S2, "S2"),
            )
            if not all(_full_column_rank(M, pol) for M, _ in streams):
                bad = [name for M, name in streams if not _full_column_rank(M, pol)]
                return FeasibilityVerdict(
                    False,
                    (Violation(
                        "effective channels have full column rank",
                        f"trial {t}: rank-deficient at {', '.join(bad)}",
                        "constructive",
                    ),),
                )
            break
        else:
            raise TooManyDegenerateDraws(
                f"trial {t} hit {MAX_DEGENERATE_RETRIES} degenerate draws for dims {dims.as_tuple()}"
            )
    return FeasibilityVerdict(True)


def grid_tuples(dims: NetworkDims) -> Iterator[StreamAlloc]:
    """All allocation tuples with d_Pi <= M_P and d_Sj <= M_S, lexicographic."""
    for d_P1 in range(dims.M_P + 1):
        for d_P2 in range(dims.M_P + 1):
            for d_S1 in range(dims.M_S + 1):
                for d_S2 in range(dims.M_S + 1):
                    yield StreamAlloc(d_P1, d_P2, d_S1, d_S2)


def grid_size(dims: NetworkDims) -> int:
    return (dims.M_P + 1) ** 2 * (dims.M_S + 1) ** 2


def _compute_frontier(points: list[StreamAlloc]) -> tuple[StreamAlloc, ...]:
    if not points:
        return ()
    arr = np.array([p.as_tuple() for p in points], dtype=np.int64)
    n = len(points)
    dominated = np.zeros(n, dtype=bool)
    chunk = 512
    for start in range(0, n, chunk):
        block = arr[start : start + chunk]  # (b, 4)
        ge = (arr[:, None, :] >= block[None, :, :]).all(axis=2)  # (n, b)
        gt = (arr[:, None, :] > block[None, :, :]).any(axis=2)
        dominated[start : start + chunk] = (ge & gt).any(axis=0)
    return tuple(p for p, dom in zip(points, dominated) if not dom)


def enumerate_region(
    dims: NetworkDims,
    mode: Literal["closed_form", "constructive"] = "closed_form",
    seed: int = 0,
    trials: int = 20,
    cap: int = 10_000,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> DofRegion:
    """Enumerate the achievable DoF region over the full tuple grid."""
    size = grid_size(dims)
    if size > cap:
        raise GridTooLarge(f"grid has {size} tuples, cap is {cap}")
    if mode not in ("closed_form", "constructive"):
        raise ValueError(f"unknown mode {mode!r}")
    points: list[StreamAlloc] = []
    for alloc in grid_tuples(dims):
        if mode == "closed_form":
            ok = closed_form_feasible(dims, alloc).feasible
        else:
            ok = constructive_check(dims, alloc, trials=trials, seed=derive_seed(seed, *alloc.as_tuple()), pol=pol).feasible
        if ok:
            points.append(alloc)
    return DofRegion(dims=dims, points=tuple(points), frontier=_compute_frontier(points))


def projected_frontier(region: DofRegion) -> list[tuple[int, int]]:
    """(d_S1+d_S2, max d_P1+d_P2) pairs for plotting the region projection."""
    best: dict[int, int] = {}
    for p in region.points:
        ds = p.d_S1 + p.d_S2
        dp = p.d_P1 + p.d_P2
        if dp >= best.get(ds, -1):
            best[ds] = dp
    return sorted(best.items())
