"""Experiment orchestration: mode dispatch, reports, and file emission.

Every mode is a deterministic function of its configuration (seed included),
so rerunning a config produces byte-identical output files.  Wall-clock
duration is kept on the in-memory report and printed by the CLI, but never
written to the output files, which would break that guarantee.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import serialize
from .config import ConfigError, ExperimentConfig, config_to_mapping
from .dimension import DimensionFit, dimension_of_p, empirical_dimension, fit_dimension
from .graphs import ThresholdSpec, connected_components, extract_links
from .likelihood import (
    ORACLE_CAP_DEFAULT,
    LikelihoodQuery,
    MaximizationResult,
    brute_force_profile,
    maximize_profile,
)
from .relational import IterationHistory, IteratorConfig, NoiseSpec, run_iterator

__all__ = ["PipelineError", "ExperimentReport", "run_experiment", "emit_report", "TOOL_VERSION"]

TOOL_VERSION = "0.1.0"

# Gebits below this size are not worth a dimension measurement.
MIN_MEASURABLE_GEBIT = 10


class PipelineError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


@contextmanager
def _stage(name: str):
    try:
        yield
    except (ConfigError, PipelineError):
        raise
    except ValueError as exc:
        # invalid inputs keep their type so the CLI can exit with the
        # validation status rather than the runtime one
        raise ValueError(f"stage '{name}': {exc}") from exc
    except Exception as exc:
        raise PipelineError(f"stage '{name}': {exc}") from exc


@dataclass(eq=False)
class ExperimentReport:
    """Everything a run produced: config echo, JSON-ready results, artifacts.

    ``artifacts`` holds non-JSON objects (histories, profiles) needed for CSV
    emission; ``results`` is the deterministic JSON payload.
    """

    config: ExperimentConfig
    version: str
    duration_seconds: float
    results: dict
    artifacts: dict = field(default_factory=dict)


def _fit_dict(fit: DimensionFit | None) -> dict | None:
    if fit is None:
        return None
    return {
        "d": fit.d,
        "log_amplitude": fit.log_amplitude,
        "residual": fit.residual,
        "points_used": fit.points_used,
    }


def _max_result_dict(result: MaximizationResult, query: LikelihoodQuery) -> dict:
    return {
        "N": query.total_n,
        "p": query.link_prob,
        "L": result.profile.depth,
        "D": list(result.profile.shells),
        "log_prob": result.log_prob,
        "method": result.method,
    }


def _snapshot_dict(snap) -> dict:
    return {
        "step": snap.step,
        "fro_norm": snap.fro_norm,
        "max_abs": snap.max_abs,
        "sigma_max": snap.sigma_max,
        "sigma_min": snap.sigma_min,
        "links_above_threshold": snap.links_above_threshold,
    }


def _iterator_config(config: ExperimentConfig, record_matrices: bool) -> IteratorConfig:
    return IteratorConfig(
        n=config.n,
        steps=config.steps,
        alpha=config.alpha,
        start_scale=config.start_scale,
        sigma_floor_ratio=config.sigma_floor_ratio,
        seed=config.seed,
        record_every=config.record_every,
        record_matrices=record_matrices,
        link_threshold=(
            config.link_threshold if config.link_threshold is not None
            else config.threshold_value
        ),
    )


def _noise_spec(config: ExperimentConfig) -> NoiseSpec:
    return NoiseSpec(
        background_sigma=config.background_sigma,
        rare_prob=config.rare_prob,
        rare_lo=config.rare_lo,
        rare_hi=config.rare_hi,
    )


def _run_iterate(config: ExperimentConfig) -> tuple[dict, dict]:
    with _stage("iterator"):
        history = run_iterator(_iterator_config(config, config.record_matrices), _noise_spec(config))
    results = {
        "history": [_snapshot_dict(s) for s in history.snapshots],
        "final": _snapshot_dict(history.snapshots[-1]),
    }
    return results, {"history": history}


def _run_maximize(config: ExperimentConfig) -> tuple[dict, dict]:
    query = LikelihoodQuery(config.total_n, config.link_prob)
    with _stage("maximize"):
        result = maximize_profile(query, (config.depth_min, config.depth_max))
    oracle = None
    agrees = None
    if config.total_n <= ORACLE_CAP_DEFAULT:
        with _stage("oracle"):
            oracle = brute_force_profile(query)
        agrees = abs(oracle.log_prob - result.log_prob) <= 1e-9
    fit = None
    try:
        fit = fit_dimension(result.profile, config.trim_floor)
    except ValueError:
        pass  # profiles too shallow to fit are reported without a dimension
    results = {
        "optimum": _max_result_dict(result, query),
        "oracle": _max_result_dict(oracle, query) if oracle else None,
        "oracle_agrees": agrees,
        "fit": _fit_dict(fit),
    }
    return results, {"profile": result.profile, "fit": fit}


def _run_fit(config: ExperimentConfig) -> tuple[dict, dict]:
    with _stage("load-profile"):
        shells = serialize.read_profile_csv(config.profile_path)
    with _stage("dimension-fit"):
        fit = fit_dimension(shells, config.trim_floor)
    results = {
        "fit": _fit_dict(fit),
        "profile": {"total_n": 1 + int(round(sum(shells))), "shells": shells},
    }
    return results, {"fit": fit}


def _run_sweep(config: ExperimentConfig) -> tuple[dict, dict]:
    points = []
    for p in sorted(config.p_grid):
        with _stage(f"sweep p={serialize.fmt_value(p)}"):
            points.append(
                dimension_of_p(
                    config.total_n, p, (config.depth_min, config.depth_max), config.trim_floor
                )
            )
    results = {
        "curve": [
            {
                "p": pt.link_prob,
                "log10_p": float(np.log10(pt.link_prob)),
                "d": pt.d,
                "L": pt.depth,
                "log_prob": pt.log_prob,
            }
            for pt in points
        ]
    }
    return results, {"curve": points}


def _census_gebits(matrix: np.ndarray, config: ExperimentConfig):
    spec = ThresholdSpec(config.threshold_mode, config.threshold_value)
    graph = extract_links(matrix, spec)
    comps = connected_components(graph)
    return [g for g in comps if g.size >= 2]


def _match_chains(prev: list[tuple[int, frozenset]], current: list[frozenset], threshold: float):
    """Greedy best-overlap matching between consecutive census generations."""
    scored = []
    for ci, cur in enumerate(current):
        for pi, (chain_id, old) in enumerate(prev):
            inter = len(cur & old)
            if inter == 0:
                continue
            jac = inter / len(cur | old)
            if jac >= threshold:
                scored.append((-jac, pi, ci, chain_id))
    scored.sort()
    taken_prev: set[int] = set()
    assignment: dict[int, int] = {}
    for neg_jac, pi, ci, chain_id in scored:
        if pi in taken_prev or ci in assignment:
            continue
        taken_prev.add(pi)
        assignment[ci] = chain_id
    return assignment


def _run_emerge(config: ExperimentConfig) -> tuple[dict, dict]:
    with _stage("iterator"):
        history = run_iterator(_iterator_config(config, True), _noise_spec(config))
    census_rows: list[dict] = []
    chains: dict[int, int] = {}  # chain id -> records survived
    live: list[tuple[int, frozenset]] = []
    next_chain = 0
    with _stage("census"):
        for snap in history.snapshots:
            if snap.step == 0:
                continue
            gebits = _census_gebits(snap.matrix, config)
            node_sets = [frozenset(g.nodes) for g in gebits]
            assignment = _match_chains(live, node_sets, config.jaccard_threshold)
            new_live = []
            for ci, nodes in enumerate(node_sets):
                chain_id = assignment.get(ci)
                if chain_id is None:
                    chain_id = next_chain
                    next_chain += 1
                    chains[chain_id] = 0
                chains[chain_id] += 1
                new_live.append((chain_id, nodes))
            live = new_live
            sizes = [g.size for g in gebits]
            histogram: dict[str, int] = {}
            for size in sizes:
                histogram[str(size)] = histogram.get(str(size), 0) + 1
            largest_fit = None
            if gebits and gebits[0].size >= MIN_MEASURABLE_GEBIT:
                try:
                    largest_fit = empirical_dimension(
                        gebits[0],
                        max_roots=config.max_roots,
                        seed=config.seed,
                        trim_floor=config.trim_floor,
                    )
                except ValueError:
                    largest_fit = None
            census_rows.append(
                {
                    "step": snap.step,
                    "n_gebits": len(gebits),
                    "n_linked_nodes": sum(sizes),
                    "sizes": sizes,
                    "size_histogram": dict(sorted(histogram.items(), key=lambda kv: int(kv[0]))),
                    "largest_size": sizes[0] if sizes else 0,
                    "largest_dimension": _fit_dict(largest_fit),
                }
            )
    lifetimes = sorted(chains.values(), reverse=True)
    results = {
        "initial": _snapshot_dict(history.snapshots[0]),
        "census": census_rows,
        "lifetimes": {
            "count": len(lifetimes),
            "mean": float(np.mean(lifetimes)) if lifetimes else None,
            "max": max(lifetimes) if lifetimes else None,
            "records_per_gebit": lifetimes,
        },
    }
    return results, {"history": history, "census_rows": census_rows}


_RUNNERS = {
    "iterate": _run_iterate,
    "maximize": _run_maximize,
    "fit": _run_fit,
    "sweep": _run_sweep,
    "emerge": _run_emerge,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch one experiment and collect its report."""
    started = time.perf_counter()
    results, artifacts = _RUNNERS[config.mode](config)
    return ExperimentReport(
        config=config,
        version=TOOL_VERSION,
        duration_seconds=time.perf_counter() - started,
        results=results,
        artifacts=artifacts,
    )


def emit_report(report: ExperimentReport, fmt: str, out_dir) -> list[Path]:
    """Write the report to ``out_dir`` as JSON or as the mode's CSV artifacts.

    Identical reports produce byte-identical files.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format '{fmt}'")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mode = report.config.mode
    written: list[Path] = []
    if fmt == "json":
        payload = {
            "version": report.version,
            "mode": mode,
            "config": config_to_mapping(report.config),
            "results": report.results,
        }
        written.append(serialize.write_json_report(out / "report.json", payload))
        return written

    if mode == "iterate":
        history: IterationHistory = report.artifacts["history"]
        written.append(serialize.write_history_csv(out / "history.csv", history.snapshots))
        written.append(serialize.write_matrix_csv(out / "final_matrix.csv", history.final_matrix))
        if report.config.record_matrices:
            for snap in history.snapshots:
                written.append(
                    serialize.write_matrix_csv(out / f"matrix_step{snap.step:06d}.csv", snap.matrix)
                )
    elif mode == "maximize":
        written.append(serialize.write_profile_csv(out / "profile.csv", report.artifacts["profile"]))
    elif mode == "fit":
        written.append(serialize.write_fit_csv(out / "fit.csv", report.artifacts["fit"]))
    elif mode == "sweep":
        written.append(serialize.write_curve_csv(out / "curve.csv", report.artifacts["curve"]))
    elif mode == "emerge":
        written.append(serialize.write_census_csv(out / "census.csv", report.artifacts["census_rows"]))
    return written
