"""Monte-Carlo experiment harness over the construction and search routines.

Five batch modes: ``sweep`` (constructed size scaling across mean degree),
``threshold`` (bisection for the probability where the r-tuple search
crosses 50 percent success), ``compare`` (random seed sets above and below
the critical size against constructed ones), ``generations`` (round counts
and per-round growth checks on near-threshold finds), and ``partial``
(random half activations and how little they leave behind).

Reproducibility contract: each trial's seed is a stable hash of
(master_seed, mode, n, d-or-p, trial index, role), so results do not
depend on execution order and the rendered output is byte-identical
across reruns and across worker counts.  Wall-clock timings are therefore
never written into output files; they appear only in the stderr summary.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import io
import json
import math
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .bounds import critical_random_seed_size
from .construct import StageParams, TupleSearchParams, construct_contagious, search_minimal_tuple
from .graph import GnpParams, sample_gnp
from .percolation import percolate

__all__ = [
    "CSV_HEADER_V1",
    "ExperimentRecord",
    "ExperimentConfig",
    "ExperimentOutcome",
    "derive_seed",
    "normalized_size",
    "growth_violations",
    "statistical_thresholds",
    "run_experiment",
    "render_csv",
    "render_json",
]

MODES = ("sweep", "threshold", "compare", "generations", "partial")

CSV_HEADER_V1 = [
    "mode",
    "n",
    "d",
    "p",
    "r",
    "trial",
    "rng_seed",
    "variant",
    "seed_size",
    "active_count",
    "tau",
    "contagious",
    "success",
    "constructed_size",
    "exact_size",
    "normalized_size",
    "value",
    "value2",
]


@functools.cache
def statistical_thresholds() -> dict:
    """Pass/fail cutoffs for the statistical checks, frozen in package data."""
    path = resources.files("contagion").joinpath("data/statistical_thresholds.json")
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit seed from the master seed and a label tuple.

    Uses blake2b over the repr of the tuple, so the value depends only on
    the arguments, never on execution order or process identity.
    """
    payload = repr((int(master_seed),) + tuple(parts)).encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def normalized_size(size: int, n: int, d: float, r: int) -> float | None:
    """Seed-set size rescaled by d^(r/(r-1)) * log2(d) / n; None when d <= 1."""
    if d <= 1.0:
        return None
    return size * d ** (r / (r - 1)) * math.log2(d) / n


def growth_violations(per_round_counts, seed_count: int, n: int, p: float) -> int:
    """Count rounds that break the quadratic growth cap.

    In the regime p <= 1 / sqrt(2 e n), once the active count k has reached
    log2 n, a single round activating k^2 or more vertices is a violation
    of the expected growth profile and gets flagged, not raised.
    """
    if n < 2 or p > 1.0 / math.sqrt(2.0 * math.e * n):
        return 0
    k = seed_count
    floor_k = math.log2(n)
    violations = 0
    for newly in per_round_counts:
        if k >= floor_k and newly >= k * k:
            violations += 1
        k += newly
    return violations


@dataclass(frozen=True)
class ExperimentRecord:
    """One output row.  ``variant`` names the row kind within its mode.

    ``value``/``value2`` carry the variant-specific payload (documented per
    mode in the README).  Unused fields stay None and render as empty CSV
    cells or JSON nulls.
    """

    mode: str
    n: int
    d: float | None
    p: float | None
    r: int
    trial: int
    rng_seed: int
    variant: str
    seed_size: int | None = None
    active_count: int | None = None
    tau: int | None = None
    contagious: bool | None = None
    success: bool | None = None
    constructed_size: int | None = None
    exact_size: int | None = None
    normalized_size: float | None = None
    value: float | None = None
    value2: float | None = None

    def sort_key(self):
        return (
            self.mode,
            self.n,
            self.d if self.d is not None else -1.0,
            self.p if self.p is not None else -1.0,
            self.trial,
            self.variant,
        )

    def to_row(self) -> list[str]:
        out = []
        for name in CSV_HEADER_V1:
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out

    def to_json_dict(self) -> dict:
        return {name: getattr(self, name) for name in CSV_HEADER_V1}


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one batch run.

    ``out``, ``fmt``, and ``jobs`` steer I/O and parallelism only; they are
    excluded from serialized output so reruns stay byte-identical whatever
    the destination or worker count.
    """

    mode: str
    n_list: tuple[int, ...]
    d_list: tuple[float, ...] | None = None
    p_list: tuple[float, ...] | None = None
    r: int = 2
    trials: int = 5
    master_seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    jobs: int = 1
    c1: float = 0.1
    k_target: int | None = None
    probe_trials: int = 30
    rel_tol: float = 0.1
    p_max_factor: float = 32.0
    threshold_mult: float = 4.0
    partial_slack: float | None = None
    partial_d0: float = 10.0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ValueError("n_list must be nonempty with positive entries")
        if int(self.r) != self.r or self.r < 2:
            raise ValueError("r must be an integer >= 2")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        if not (0 < self.rel_tol < 1):
            raise ValueError("rel_tol must lie in (0, 1)")

    def serializable(self) -> dict:
        skip = {"out", "jobs"}
        data = {k: v for k, v in asdict(self).items() if k not in skip}
        data["n_list"] = list(self.n_list)
        data["d_list"] = list(self.d_list) if self.d_list is not None else None
        data["p_list"] = list(self.p_list) if self.p_list is not None else None
        return data


@dataclass
class ExperimentOutcome:
    records: list[ExperimentRecord]
    summary: dict
    flagged: bool


def _require(config: ExperimentConfig, attr: str) -> tuple:
    values = getattr(config, attr)
    if not values:
        raise ValueError(f"mode {config.mode!r} requires {attr}")
    return values


def _map_tasks(fn: Callable, config: ExperimentConfig, tasks: list[tuple]) -> list:
    if config.jobs <= 1 or len(tasks) <= 1:
        return [fn(config, *task) for task in tasks]
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(functools.partial(fn, config), *zip(*tasks)))


def _median(values) -> float | None:
    values = [v for v in values if v is not None]
    return float(statistics.median(values)) if values else None


# ---------------------------------------------------------------- sweep


def _sweep_trial(config: ExperimentConfig, n: int, d: float, trial: int) -> list[ExperimentRecord]:
    seed = derive_seed(config.master_seed, "sweep", n, float(d), trial)
    p = d / n
    graph = sample_gnp(GnpParams(n, p, derive_seed(seed, "graph")))
    seeds, trace = construct_contagious(graph, StageParams(r=config.r))
    result = percolate(graph, seeds, config.r)
    size = len(seeds)
    return [
        ExperimentRecord(
            mode="sweep",
            n=n,
            d=float(d),
            p=p,
            r=config.r,
            trial=trial,
            rng_seed=seed,
            variant="construct",
            seed_size=size,
            active_count=result.active_count,
            tau=result.tau,
            contagious=result.contagious,
            success=result.contagious,
            constructed_size=size,
            normalized_size=normalized_size(size, n, d, config.r),
            value=1.0 if trace.fallback_used else 0.0,
        )
    ]


def run_sweep(config: ExperimentConfig) -> ExperimentOutcome:
    d_list = _require(config, "d_list")
    tasks = [(n, float(d), t) for n in config.n_list for d in d_list for t in range(config.trials)]
    records = [rec for batch in _map_tasks(_sweep_trial, config, tasks) for rec in batch]
    records.sort(key=ExperimentRecord.sort_key)
    lo, hi = statistical_thresholds()["sweep_normalized_band"]
    flagged = False
    summary: dict = {"groups": []}
    for n in config.n_list:
        for d in d_list:
            group = [r for r in records if r.n == n and r.d == float(d)]
            norms = [r.normalized_size for r in group if r.normalized_size is not None]
            out_of_band = [x for x in norms if not (lo <= x <= hi)]
            flagged = flagged or bool(out_of_band)
            summary["groups"].append(
                {
                    "n": n,
                    "d": float(d),
                    "median_size": _median([r.constructed_size for r in group]),
                    "median_normalized": _median(norms),
                    "out_of_band": len(out_of_band),
                }
            )
    summary["normalized_band"] = [lo, hi]
    return ExperimentOutcome(records, summary, flagged)


# ------------------------------------------------------------- threshold


def _tuple_params(config: ExperimentConfig, n: int, rng_seed: int) -> TupleSearchParams:
    if config.k_target is not None:
        k = max(config.r + 1, config.k_target)
        return TupleSearchParams(
            r=config.r,
            k_target=k,
            c1=config.c1,
            max_iterations=max(1, n // (2 * k)),
            rng_seed=rng_seed,
        )
    return TupleSearchParams.for_graph(n, r=config.r, c1=config.c1, rng_seed=rng_seed)


def _threshold_trial(config: ExperimentConfig, n: int, p: float, trial: int) -> ExperimentRecord:
    seed = derive_seed(config.master_seed, "threshold", n, float(p), trial)
    graph = sample_gnp(GnpParams(n, p, derive_seed(seed, "graph")))
    params = _tuple_params(config, n, derive_seed(seed, "search"))
    found = search_minimal_tuple(graph, params)
    tau = found[1].tau if found else None
    active = found[1].active_count if found else None
    return ExperimentRecord(
        mode="threshold",
        n=n,
        d=p * n,
        p=float(p),
        r=config.r,
        trial=trial,
        rng_seed=seed,
        variant="probe",
        seed_size=config.r if found else None,
        active_count=active,
        tau=tau,
        contagious=bool(found) or None,
        success=found is not None,
    )


def predicted_threshold(n: int, r: int) -> float:
    """Theory-scale crossing point (n * (ln n)^(r-1)) ** (-1/r); bracket seed."""
    return (n * math.log(n) ** (r - 1)) ** (-1.0 / r)


def run_threshold(config: ExperimentConfig) -> ExperimentOutcome:
    records: list[ExperimentRecord] = []
    summary: dict = {"per_n": []}
    flagged = False
    for n in config.n_list:
        rate_cache: dict[float, float] = {}

        def rate(p: float) -> float:
            if p not in rate_cache:
                tasks = [(n, p, t) for t in range(config.probe_trials)]
                probe = _map_tasks(_threshold_trial, config, tasks)
                records.extend(probe)
                rate_cache[p] = sum(1 for r in probe if r.success) / len(probe)
            return rate_cache[p]

        p_pred = predicted_threshold(n, config.r)
        cap = min(0.5, p_pred * config.p_max_factor)
        floor = p_pred / config.p_max_factor
        hi = p_pred
        no_crossing = False
        while rate(hi) < 0.5:
            hi *= 2.0
            if hi > cap:
                no_crossing = True
                break
        p50 = p_lo = p_hi = ratio = None
        if not no_crossing:
            lo = hi / 2.0
            while rate(lo) >= 0.5:
                lo /= 2.0
                if lo < floor:
                    break
            while hi - lo > config.rel_tol * hi:
                mid = (lo + hi) / 2.0
                if rate(mid) >= 0.5:
                    hi = mid
                else:
                    lo = mid
            p_lo, p_hi = lo, hi
            p50 = (lo + hi) / 2.0
            ratio = p50 * (n * math.log(n) ** (config.r - 1)) ** (1.0 / config.r)
            records.append(
                ExperimentRecord(
                    mode="threshold",
                    n=n,
                    d=p50 * n,
                    p=p50,
                    r=config.r,
                    trial=-1,
                    rng_seed=0,
                    variant="summary",
                    success=True,
                    value=p50,
                    value2=ratio,
                )
            )
        else:
            flagged = True
        summary["per_n"].append(
            {
                "n": n,
                "p50": p50,
                "p_lo": p_lo,
                "p_hi": p_hi,
                "ratio": ratio,
                "no_crossing": no_crossing,
                "probes": sorted(rate_cache),
            }
        )
    ratios = [e["ratio"] for e in summary["per_n"] if e["ratio"] is not None]
    if len(ratios) >= 2:
        summary["ratio_spread"] = max(ratios) / min(ratios)
    records.sort(key=ExperimentRecord.sort_key)
    return ExperimentOutcome(records, summary, flagged)


# --------------------------------------------------------------- compare


def _compare_trial(config: ExperimentConfig, n: int, d: float, trial: int) -> list[ExperimentRecord]:
    seed = derive_seed(config.master_seed, "compare", n, float(d), trial)
    p = d / n
    r = config.r
    graph = sample_gnp(GnpParams(n, p, derive_seed(seed, "graph")))
    a_c = critical_random_seed_size(n, p, r)
    cuts = statistical_thresholds()
    full_fraction = cuts["cascade_fraction"]
    stall_cap = cuts["stall_slack"] * 2.0 * (
        math.factorial(r - 1) / (n * p**r)
    ) ** (1.0 / (r - 1))
    common = dict(mode="compare", n=n, d=float(d), p=p, r=r, trial=trial, rng_seed=seed)
    records = []

    size_hi = min(n, int(2.0 * a_c))
    rng_hi = np.random.Generator(np.random.PCG64(derive_seed(seed, "cascade")))
    res_hi = percolate(graph, rng_hi.choice(n, size=size_hi, replace=False), r)
    frac_hi = res_hi.active_count / n
    records.append(
        ExperimentRecord(
            **common,
            variant="random_cascade",
            seed_size=size_hi,
            active_count=res_hi.active_count,
            tau=res_hi.tau,
            contagious=res_hi.contagious,
            success=frac_hi >= full_fraction,
            value=frac_hi,
            value2=a_c,
        )
    )

    size_lo = min(n, int(a_c / 2.0))
    rng_lo = np.random.Generator(np.random.PCG64(derive_seed(seed, "stall")))
    res_lo = percolate(graph, rng_lo.choice(n, size=size_lo, replace=False), r)
    records.append(
        ExperimentRecord(
            **common,
            variant="random_stall",
            seed_size=size_lo,
            active_count=res_lo.active_count,
            tau=res_lo.tau,
            contagious=res_lo.contagious,
            success=res_lo.active_count <= stall_cap,
            value=float(res_lo.active_count),
            value2=stall_cap,
        )
    )

    seeds, trace = construct_contagious(graph, StageParams(r=r))
    records.append(
        ExperimentRecord(
            **common,
            variant="construct",
            seed_size=len(seeds),
            constructed_size=len(seeds),
            success=True,
            normalized_size=normalized_size(len(seeds), n, d, r),
            value=1.0 if trace.fallback_used else 0.0,
        )
    )

    # Integer bisection over random-set size: smallest size whose fresh
    # random draw reaches the full-cascade fraction in this trial.
    def cascades(size: int) -> bool:
        if size >= n:
            return True
        if size <= 0:
            return False
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "bisect", size)))
        res = percolate(graph, rng.choice(n, size=size, replace=False), r)
        return res.active_count >= full_fraction * n

    hi_s = size_hi if frac_hi >= full_fraction else max(1, 2 * size_hi)
    while hi_s < n and not cascades(hi_s):
        hi_s = min(n, 2 * hi_s)
    lo_s = 0
    while hi_s - lo_s > 1:
        mid = (lo_s + hi_s) // 2
        if cascades(mid):
            hi_s = mid
        else:
            lo_s = mid
    records.append(
        ExperimentRecord(
            **common,
            variant="critical_size",
            seed_size=hi_s,
            success=True,
            value=float(hi_s),
            value2=a_c,
        )
    )
    return records


def run_compare(config: ExperimentConfig) -> ExperimentOutcome:
    d_list = _require(config, "d_list")
    for n in config.n_list:
        for d in d_list:
            p = d / n
            if d < 5.0 or p > 0.5 * n ** (-1.0 / config.r):
                warnings.warn(
                    f"compare mode outside its sparse regime at n={n}, d={d}; "
                    "dichotomy predictions may not apply",
                    stacklevel=2,
                )
    tasks = [(n, float(d), t) for n in config.n_list for d in d_list for t in range(config.trials)]
    records = [rec for batch in _map_tasks(_compare_trial, config, tasks) for rec in batch]
    records.sort(key=ExperimentRecord.sort_key)
    cuts = statistical_thresholds()
    flagged = False
    summary: dict = {"groups": []}
    for n in config.n_list:
        for d in d_list:
            group = [r for r in records if r.n == n and r.d == float(d)]
            cascade = [r for r in group if r.variant == "random_cascade"]
            stall = [r for r in group if r.variant == "random_stall"]
            crit = [r for r in group if r.variant == "critical_size"]
            cascade_rate = sum(1 for r in cascade if r.success) / len(cascade)
            stall_rate = sum(1 for r in stall if r.success) / len(stall)
            if cascade_rate < cuts["cascade_pass_rate"] or stall_rate < cuts["stall_pass_rate"]:
                flagged = True
            summary["groups"].append(
                {
                    "n": n,
                    "d": float(d),
                    "cascade_pass_rate": cascade_rate,
                    "stall_pass_rate": stall_rate,
                    "predicted_critical": crit[0].value2 if crit else None,
                    "median_empirical_critical": _median([r.value for r in crit]),
                    "median_constructed": _median(
                        [r.constructed_size for r in group if r.variant == "construct"]
                    ),
                }
            )
    return ExperimentOutcome(records, summary, flagged)


# ----------------------------------------------------------- generations


def _generations_trial(config: ExperimentConfig, n: int, p: float, trial: int) -> ExperimentRecord:
    seed = derive_seed(config.master_seed, "generations", n, float(p), trial)
    graph = sample_gnp(GnpParams(n, p, derive_seed(seed, "graph")))
    params = _tuple_params(config, n, derive_seed(seed, "search"))
    found = search_minimal_tuple(graph, params)
    if found is None:
        return ExperimentRecord(
            mode="generations",
            n=n,
            d=p * n,
            p=float(p),
            r=config.r,
            trial=trial,
            rng_seed=seed,
            variant="tuple",
            success=False,
        )
    _, result = found
    violations = growth_violations(result.per_round_counts, len(result.seeds), n, p)
    return ExperimentRecord(
        mode="generations",
        n=n,
        d=p * n,
        p=float(p),
        r=config.r,
        trial=trial,
        rng_seed=seed,
        variant="tuple",
        seed_size=config.r,
        active_count=result.active_count,
        tau=result.tau,
        contagious=result.contagious,
        success=True,
        value=float(violations),
    )


def run_generations(config: ExperimentConfig) -> ExperimentOutcome:
    pairs: list[tuple[int, float]] = []
    for n in config.n_list:
        if config.p_list:
            pairs.extend((n, float(p)) for p in config.p_list)
        else:
            pairs.append((n, config.threshold_mult * predicted_threshold(n, config.r)))
    tasks = [(n, p, t) for n, p in pairs for t in range(config.trials)]
    records = _map_tasks(_generations_trial, config, tasks)
    records.sort(key=ExperimentRecord.sort_key)
    cuts = statistical_thresholds()
    flagged = False
    summary: dict = {"groups": []}
    for n, p in pairs:
        group = [r for r in records if r.n == n and r.p == p]
        found = [r for r in group if r.success]
        violations = int(sum(r.value or 0.0 for r in found))
        median_tau = _median([r.tau for r in found])
        tau_cap = None
        if n > 3:
            tau_cap = cuts["tau_cap_multiplier"] * math.log(math.log(n))
        if violations > 0:
            flagged = True
        if median_tau is not None and tau_cap is not None and median_tau > tau_cap:
            flagged = True
        summary["groups"].append(
            {
                "n": n,
                "p": p,
                "found": len(found),
                "trials": len(group),
                "median_tau": median_tau,
                "tau_cap": tau_cap,
                "growth_violations": violations,
            }
        )
    return ExperimentOutcome(records, summary, flagged)


# ---------------------------------------------------------------- partial


def _partial_trial(config: ExperimentConfig, n: int, d: float, trial: int) -> ExperimentRecord:
    seed = derive_seed(config.master_seed, "partial", n, float(d), trial)
    p = d / n if n else 0.0
    graph = sample_gnp(GnpParams(n, p, derive_seed(seed, "graph")))
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "half")))
    half = math.ceil(n / 2)
    result = percolate(graph, rng.choice(n, size=half, replace=False), config.r)
    inactive = n - result.active_count
    slack = config.partial_slack
    if slack is None:
        slack = statistical_thresholds()["partial_slack"]
    bound = slack * max(1.0, n / d**3) if d > 0 else None
    out_of_model = d < config.partial_d0
    return ExperimentRecord(
        mode="partial",
        n=n,
        d=float(d),
        p=p,
        r=config.r,
        trial=trial,
        rng_seed=seed,
        variant="partial_out_of_model" if out_of_model else "partial",
        seed_size=half,
        active_count=result.active_count,
        tau=result.tau,
        contagious=result.contagious,
        success=(inactive <= bound) if bound is not None else None,
        value=float(inactive),
        value2=bound,
    )


def run_partial(config: ExperimentConfig) -> ExperimentOutcome:
    d_list = _require(config, "d_list")
    tasks = [(n, float(d), t) for n in config.n_list for d in d_list for t in range(config.trials)]
    records = _map_tasks(_partial_trial, config, tasks)
    records.sort(key=ExperimentRecord.sort_key)
    cuts = statistical_thresholds()
    flagged = False
    summary: dict = {"groups": []}
    for n in config.n_list:
        for d in d_list:
            group = [r for r in records if r.n == n and r.d == float(d)]
            in_model = [r for r in group if r.variant == "partial"]
            rate = None
            if in_model:
                rate = sum(1 for r in in_model if r.success) / len(in_model)
                if rate < cuts["partial_pass_rate"]:
                    flagged = True
            summary["groups"].append(
                {
                    "n": n,
                    "d": float(d),
                    "in_model": len(in_model),
                    "out_of_model": len(group) - len(in_model),
                    "pass_rate": rate,
                    "max_inactive": max((r.value for r in group), default=None),
                }
            )
    return ExperimentOutcome(records, summary, flagged)


# ------------------------------------------------------------ dispatch/IO


_RUNNERS = {
    "sweep": run_sweep,
    "threshold": run_threshold,
    "compare": run_compare,
    "generations": run_generations,
    "partial": run_partial,
}


def run_experiment(config: ExperimentConfig) -> ExperimentOutcome:
    return _RUNNERS[config.mode](config)


def render_csv(records: list[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER_V1)
    for rec in records:
        writer.writerow(rec.to_row())
    return buf.getvalue()


def render_json(config: ExperimentConfig, outcome: ExperimentOutcome) -> str:
    doc = {
        "schema": "contagion-records-v1",
        "config": config.serializable(),
        "flagged": outcome.flagged,
        "summary": outcome.summary,
        "records": [rec.to_json_dict() for rec in outcome.records],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_output(config: ExperimentConfig, outcome: ExperimentOutcome) -> str:
    if config.fmt == "json":
        return render_json(config, outcome)
    return render_csv(outcome.records)
