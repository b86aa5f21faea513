"""Multi-seed experiment driver with baselines and file outputs.

One experiment preprocesses a matrix once, then for every seed runs the full
pipeline, clusters, and (when ground truth is available) evaluates. Two
baselines on the same preprocessed data put the numbers in context: k-means
on a single PCA embedding, and k-means on the average of the per-scale
embeddings. Per-seed results are written as they finish, so a crash in a
later seed preserves earlier output.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import classical_mds, cluster_distances, kmeans_euclidean
from .config import PipelineConfig, config_to_mapping
from .data import DataError, ExpressionMatrix, preprocess
from .grassmann import GrassmannMetric
from .mdr import MdrMethod, build_stack, pca_reduce
from .metrics import EvaluationReport, evaluate
from .pipeline import DistanceMatrix, RunReport, run_mgm
from .scales import ScaleSamplingSpec, sample_scales

__all__ = [
    "SeedOutcome",
    "ExperimentResult",
    "run_experiment",
    "export_scatter",
    "save_distance_matrix",
    "load_distance_matrix",
    "metrics_payload",
]


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    labels: np.ndarray
    method: str
    evaluation: EvaluationReport | None
    report: RunReport | None = None


@dataclass(frozen=True)
class ExperimentResult:
    outcomes: tuple[SeedOutcome, ...]
    baselines: dict[str, tuple[SeedOutcome, ...]]
    checksum: str
    out_dir: Path | None

    def mean_metrics(self) -> dict[str, float] | None:
        return _mean_metrics(self.outcomes)

    def baseline_mean_metrics(self) -> dict[str, dict[str, float] | None]:
        return {name: _mean_metrics(runs) for name, runs in self.baselines.items()}


def _mean_metrics(outcomes) -> dict[str, float] | None:
    evals = [o.evaluation for o in outcomes if o.evaluation is not None]
    if not evals:
        return None
    keys = evals[0].to_dict().keys()
    return {k: float(np.mean([e.to_dict()[k] for e in evals])) for k in keys}


def metrics_payload(
    evaluation: EvaluationReport | None, method: str, seed: int, k: int
) -> dict:
    payload: dict = {} if evaluation is None else evaluation.to_dict()
    payload.update({"method": method, "seed": seed, "k": k})
    return payload


def save_distance_matrix(
    d: DistanceMatrix, path: str | Path, report: RunReport | None = None
) -> None:
    """Write the full matrix with 17 significant digits (lossless for float64)
    plus a JSON sidecar describing how it was produced."""
    path = Path(path)
    np.savetxt(path, d.values, delimiter=",", fmt="%.17g")
    meta = {"metric": d.metric.value, "sample_count": d.size}
    if report is not None:
        meta.update(
            {
                "scales": list(report.scales),
                "nominal_rank": report.nominal_rank,
                "embedding_dim": report.embedding_dim,
                "seed": report.seed,
            }
        )
    path.with_suffix(path.suffix + ".meta.json").write_text(
        json.dumps(meta, indent=2) + "\n"
    )


def load_distance_matrix(path: str | Path) -> tuple[DistanceMatrix, dict | None]:
    """Read a matrix written by save_distance_matrix; the sidecar is optional
    and supplies the metric (chordal assumed without one)."""
    path = Path(path)
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as err:
        raise DataError(f"cannot read distance matrix {path}: {err}")
    meta = None
    meta_path = path.with_suffix(path.suffix + ".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    metric = GrassmannMetric.parse(meta["metric"]) if meta else GrassmannMetric.CHORDAL
    try:
        dmat = DistanceMatrix(values=values, metric=metric)
    except ValueError as err:
        raise DataError(f"{path} is not a valid distance matrix: {err}")
    return dmat, meta


def export_scatter(
    d: DistanceMatrix, labels, path: str | Path
) -> np.ndarray:
    """Write a 2-d classical-MDS view of a distance matrix as x,y,label rows.

    Degenerate directions (no positive eigenvalue) are padded with zeros, so
    the file always has two coordinate columns.
    """
    m = d.size
    if m < 3:
        raise DataError(f"scatter export needs at least 3 samples, got {m}")
    if labels is not None and len(labels) != m:
        raise DataError(f"{len(labels)} labels for {m} samples")
    coords = classical_mds(d.values, 2)
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((m, 2 - coords.shape[1]))])
    path = Path(path)
    with open(path, "w") as handle:
        handle.write("x,y,label\n")
        for i in range(m):
            label = "" if labels is None else str(labels[i])
            handle.write(f"{coords[i, 0]:.17g},{coords[i, 1]:.17g},{label}\n")
    return coords


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_labels(path: Path, labels: np.ndarray) -> None:
    path.write_text("\n".join(str(int(v)) for v in labels) + "\n")


def _persist_outcome(
    out_dir: Path | None,
    group: str,
    outcome: SeedOutcome,
    k: int,
    d: DistanceMatrix | None = None,
    save_distance: bool = False,
) -> None:
    if out_dir is None:
        return
    seed_dir = out_dir / group / f"seed_{outcome.seed}"
    seed_dir.mkdir(parents=True, exist_ok=True)
    _write_json(
        seed_dir / "metrics.json",
        metrics_payload(outcome.evaluation, outcome.method, outcome.seed, k),
    )
    _write_labels(seed_dir / "labels.csv", outcome.labels)
    if outcome.report is not None:
        _write_json(seed_dir / "run_report.json", outcome.report.to_dict())
    if save_distance and d is not None:
        save_distance_matrix(d, seed_dir / "distance_matrix.csv", outcome.report)


def run_experiment(
    matrix: ExpressionMatrix,
    cfg: PipelineConfig,
    out_dir: str | Path | None = None,
    save_distance: bool = False,
    with_baselines: bool = True,
    parallel_seeds: bool = False,
) -> ExperimentResult:
    """Run the pipeline for every configured seed, plus baselines.

    Evaluation requires matrix.labels; without them only predicted labels are
    produced. Seeds run sequentially unless parallel_seeds is set; outputs
    are position-addressed per seed either way, so the flag never changes
    results.
    """
    pre = preprocess(
        matrix,
        normalize=cfg.normalize,
        log_transform=cfg.log_transform,
        top_features=cfg.top_features,
    )
    checksum = hashlib.sha256(
        np.ascontiguousarray(pre.values).tobytes()
    ).hexdigest()
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        lines = [f"{k} = {v}" for k, v in config_to_mapping(cfg).items()]
        (out_path / "config.txt").write_text("\n".join(lines) + "\n")
    truth = pre.labels

    def run_one_seed(seed: int) -> SeedOutcome:
        cells, dmat, report = run_mgm(pre, cfg, seed=seed)
        result = cluster_distances(
            dmat, cfg.clustering_method, cfg.k, seed=seed, mds_dim=cfg.mds_dim
        )
        evaluation = evaluate(result.labels, truth) if truth is not None else None
        outcome = SeedOutcome(
            seed=seed,
            labels=result.labels,
            method=cfg.clustering_method.value,
            evaluation=evaluation,
            report=report,
        )
        _persist_outcome(out_path, "mgm", outcome, cfg.k, dmat, save_distance)
        return outcome

    if parallel_seeds and len(cfg.seeds) > 1:
        with ThreadPoolExecutor(max_workers=len(cfg.seeds)) as pool:
            outcomes = tuple(pool.map(run_one_seed, cfg.seeds))
    else:
        outcomes = tuple(run_one_seed(seed) for seed in cfg.seeds)

    baselines: dict[str, tuple[SeedOutcome, ...]] = {}
    if with_baselines:
        baselines["baseline_pca"] = _pca_baseline(pre, cfg, out_path)
        baselines["baseline_avg_embedding"] = _avg_embedding_baseline(
            pre, cfg, out_path
        )

    result = ExperimentResult(
        outcomes=outcomes, baselines=baselines, checksum=checksum, out_dir=out_path
    )
    if out_path is not None:
        summary = {
            "checksum": checksum,
            "seeds": list(cfg.seeds),
            "k": cfg.k,
            "metric": cfg.metric.value,
            "scales": list(outcomes[0].report.scales) if outcomes[0].report else None,
            "mgm": {
                "method": cfg.clustering_method.value,
                "mean": result.mean_metrics(),
                "per_seed": [
                    metrics_payload(o.evaluation, o.method, o.seed, cfg.k)
                    for o in outcomes
                ],
            },
            "baselines": {
                name: {
                    "mean": _mean_metrics(runs),
                    "per_seed": [
                        metrics_payload(o.evaluation, o.method, o.seed, cfg.k)
                        for o in runs
                    ],
                }
                for name, runs in baselines.items()
            },
        }
        _write_json(out_path / "summary.json", summary)
    return result


def _evaluate_baseline(
    points: np.ndarray,
    pre: ExpressionMatrix,
    cfg: PipelineConfig,
    out_path: Path | None,
    group: str,
) -> tuple[SeedOutcome, ...]:
    outcomes = []
    for seed in cfg.seeds:
        result = kmeans_euclidean(points, cfg.k, seed=seed)
        evaluation = (
            evaluate(result.labels, pre.labels) if pre.labels is not None else None
        )
        outcome = SeedOutcome(
            seed=seed,
            labels=result.labels,
            method=f"{group}+kmeans",
            evaluation=evaluation,
        )
        _persist_outcome(out_path, group, outcome, cfg.k)
        outcomes.append(outcome)
    return tuple(outcomes)


def _baseline_input(pre: ExpressionMatrix, cfg: PipelineConfig) -> np.ndarray:
    values = pre.values
    if cfg.pca_dim is not None:
        values = pca_reduce(values, cfg.pca_dim)
    return values


def _pca_baseline(
    pre: ExpressionMatrix, cfg: PipelineConfig, out_path: Path | None
) -> tuple[SeedOutcome, ...]:
    values = _baseline_input(pre, cfg)
    dim = min(cfg.embedding.embedding_dim, *values.shape)
    points = pca_reduce(values, dim)
    return _evaluate_baseline(points, pre, cfg, out_path, "baseline_pca")


def _avg_embedding_baseline(
    pre: ExpressionMatrix, cfg: PipelineConfig, out_path: Path | None
) -> tuple[SeedOutcome, ...]:
    values = _baseline_input(pre, cfg)
    m = values.shape[0]
    spec = cfg.scales
    if cfg.embedding.method is MdrMethod.LAPLACIAN_EIGENMAPS and spec.max_scale > m - 1:
        spec = ScaleSamplingSpec(
            min_scale=spec.min_scale,
            max_scale=m - 1,
            count=spec.count,
            power=spec.power,
        )
    stack = build_stack(values, sample_scales(spec), cfg.embedding, seed=cfg.seeds[0])
    points = np.mean(np.stack(stack.embeddings), axis=0)
    return _evaluate_baseline(points, pre, cfg, out_path, "baseline_avg_embedding")
