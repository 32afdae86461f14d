"""Command-line front end.

Every command is deterministic given its full argument list: stochastic
commands require an explicit seed, and measured wall times are zeroed in
file output unless ``--timings`` is passed, so identical invocations
produce byte-identical files.

Exit codes: 0 success/pass, 1 assertion failure (axiom violations or a
failed relabeling check), 2 input validation error, 3 compute error.
"""

from __future__ import annotations

import json
import os
from functools import wraps
from pathlib import Path

import click
import numpy as np

from .axioms import TRANSFORM_KINDS, AxiomReport, TransformSpec, check_axioms
from .dataset import (
    DistanceConfig,
    GranulometryError,
    ValidationError,
    dense_labels,
)
from .distance import pairwise_distances
from . import io as gio
from .measures import MEASURE_IDS, CORE_MEASURE_IDS, measure_dataset
from .synth import (
    SYNTH_DISTANCE,
    GaussianPairConfig,
    HierarchyConfig,
    bundled_corpus,
    generate_hierarchy,
    relabel_monotonicity,
    separation_sweep,
    sweep_summary_json,
)
from .taster import (
    DEFAULT_SEED_FRACTION,
    default_target_size,
    pairwise_class_granularity,
    run_taster,
    selection_json,
)

EXIT_ASSERTION = 1
EXIT_VALIDATION = 2
EXIT_COMPUTE = 3


def _guarded(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_VALIDATION)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_VALIDATION)
        except GranulometryError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_COMPUTE)
        except (FloatingPointError, np.linalg.LinAlgError) as exc:
            click.echo(f"compute error: {exc}", err=True)
            raise SystemExit(EXIT_COMPUTE)

    return wrapper


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _parse_measures(text: str) -> list[str]:
    if text.strip() == "all":
        return list(MEASURE_IDS)
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise ValidationError("no measures requested")
    for name in names:
        if name not in MEASURE_IDS:
            raise ValidationError(
                f"unknown measure {name!r}; expected one of {MEASURE_IDS} or 'all'"
            )
    return names


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValidationError("grid must be 'start:stop:step' or a single value")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValidationError("grid needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    values = [start + i * step for i in range(count)]
    return [v for v in values if v <= stop + 1e-9]


def _load_dataset_inputs(features, distances, labels, config):
    """Returns (features or None, distance values or None, dense labels,
    original class ids)."""
    if (features is None) == (distances is None):
        raise ValidationError("provide exactly one of --features or --distances")
    if features is not None:
        ds = gio.load_dataset(features, labels, config)
        return ds.features, None, ds.labels, ds.class_ids
    dense, class_ids = dense_labels(gio.read_labels_auto(labels))
    V = gio.load_distances(distances)
    if V.shape[0] != dense.shape[0]:
        raise ValidationError(
            f"row-count mismatch: {V.shape[0]} distance rows, {dense.shape[0]} labels"
        )
    return None, V, dense, class_ids


def _dataset_options(fn):
    fn = click.option("--features", type=str, default=None, help="Feature file (binary or CSV).")(fn)
    fn = click.option("--distances", type=str, default=None, help="Distance matrix file (binary or CSV), bypassing features.")(fn)
    fn = click.option("--labels", type=str, required=True, help="Label file (text or CSV).")(fn)
    fn = click.option("--metric", type=click.Choice(["euclidean", "cosine"]), default="euclidean", show_default=True)(fn)
    fn = click.option("--normalize/--no-normalize", default=True, show_default=True, help="l2-normalize rows before euclidean distance.")(fn)
    fn = click.option("--threads", type=int, default=os.cpu_count() or 1, show_default="all cores", help="Worker threads for distance computation (results are thread-count independent).")(fn)
    return fn


@click.group()
def main() -> None:
    """Dataset granularity measurement toolkit."""


@main.command()
@_dataset_options
@click.option("--measures", default="rankm", show_default=True, help="Comma-separated measure ids, or 'all'.")
@click.option("--seed", type=int, default=None, help="Seed for sampled computations (required if they trigger).")
@click.option("--budget", type=int, default=None, help="Sample budget for the estimated gamma index.")
@click.option("--output", type=str, default=None, help="Output JSON path (default: stdout).")
@click.option("--timings", is_flag=True, help="Include measured wall times (breaks byte-identical reruns).")
@_guarded
def measure(features, distances, labels, metric, normalize, threads, measures, seed, budget, output, timings):
    """Compute granularity measures on a dataset."""
    config = DistanceConfig(metric=metric, normalize=normalize)
    names = _parse_measures(measures)
    X, V, dense, _ = _load_dataset_inputs(features, distances, labels, config)
    results = measure_dataset(
        features=X,
        distances=V,
        labels=dense,
        config=config,
        measures=names,
        seed=seed,
        budget=budget,
        threads=threads,
    )
    payload = [r.to_dict(runtime_ms=None if timings else 0.0) for r in results]
    _write_text(output, json.dumps(payload, indent=2, sort_keys=False) + "\n")


@main.command()
@_dataset_options
@click.option("--measure", "measure_id", default="rankm", show_default=True, help="Measure for the pair table.")
@click.option("--seed", type=int, default=None)
@click.option("--output", type=str, default=None, help="Output CSV path (default: stdout).")
@_guarded
def pairwise(features, distances, labels, metric, normalize, threads, measure_id, seed, output):
    """Write the k-by-k table of two-class granularity values."""
    config = DistanceConfig(metric=metric, normalize=normalize)
    X, V, dense, class_ids = _load_dataset_inputs(features, distances, labels, config)
    if V is None:
        V = pairwise_distances(X, config, threads=threads)
    table = pairwise_class_granularity(V, dense, measure=measure_id, seed=seed)
    _write_text(output, table.to_csv(class_ids))


@main.command()
@_dataset_options
@click.option("--measure", "measure_id", default="rankm", show_default=True)
@click.option("--target-size", type=int, default=None, help="Classes per taster (default: 25% of k, rounded half-up).")
@click.option("--seed-fraction", type=float, default=DEFAULT_SEED_FRACTION, show_default=True)
@click.option("--random", "with_random", is_flag=True, help="Also emit a random baseline selection.")
@click.option("--seed", type=int, default=None, help="Seed for the random baseline (required with --random).")
@click.option("--outdir", type=str, required=True, help="Directory for bitter.json/sweet.json/random.json/table.csv.")
@_guarded
def taster(features, distances, labels, metric, normalize, threads, measure_id, target_size, seed_fraction, with_random, seed, outdir):
    """Extract fine-grained (bitter) and coarse-grained (sweet) class subsets."""
    config = DistanceConfig(metric=metric, normalize=normalize)
    X, V, dense, class_ids = _load_dataset_inputs(features, distances, labels, config)
    if V is None:
        V = pairwise_distances(X, config, threads=threads)
    k = int(class_ids.shape[0])
    if target_size is None and default_target_size(k) < 2:
        raise ValidationError(
            f"too few classes for default fractions (k={k}); pass --target-size"
        )
    if with_random and seed is None:
        raise ValidationError("--random requires --seed")
    result = run_taster(
        V,
        dense,
        measure=measure_id,
        target_size=target_size,
        seed_fraction=seed_fraction,
        random_seed=seed if with_random else None,
    )
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.csv").write_text(result.table.to_csv(class_ids), encoding="utf-8")
    for kind, sel in result.selections.items():
        (out / f"{kind}.json").write_text(selection_json(sel, class_ids), encoding="utf-8")


@main.command()
@click.option("--measures", default="all", show_default=True, help="Comma-separated measure ids, or 'all'.")
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, required=True, help="Base seed for the perturbation streams.")
@click.option("--strength", type=float, default=0.5, show_default=True, help="Multiplier spread for the consistency transform.")
@click.option("--alpha", type=float, default=7.3, show_default=True, help="Scale factor for the scale transform.")
@click.option("--threads", type=int, default=os.cpu_count() or 1, show_default="all cores")
@click.option("--output", type=str, default=None, help="Output JSONL path (default: stdout).")
@_guarded
def axioms(measures, trials, seed, strength, alpha, threads, output):
    """Check the three measure axioms on the bundled random corpus.

    Exits 1 if any (measure, transform) combination records a violation.
    """
    names = _parse_measures(measures)
    corpus = bundled_corpus()
    totals: dict[tuple[str, str], list] = {}
    for inst_i, ds in enumerate(corpus):
        D = pairwise_distances(ds.features, SYNTH_DISTANCE, threads=threads)
        for name in names:
            specs = [
                TransformSpec(kind=k, seed=seed + 1000 * inst_i, strength=strength, alpha=alpha)
                for k in TRANSFORM_KINDS
            ]
            for report in check_axioms(D, ds.labels, name, specs, trials=trials):
                key = (report.measure, report.kind)
                agg = totals.setdefault(key, [0, 0, 0.0])
                agg[0] += report.trials
                agg[1] += report.violations
                agg[2] = max(agg[2], report.max_violation)
    reports = [
        AxiomReport(measure=m, kind=k, trials=t, violations=v, max_violation=mx)
        for (m, k), (t, v, mx) in totals.items()
    ]
    _write_text(output, AxiomReport.to_json_lines(reports))
    bad = sum(r.violations for r in reports)
    if bad:
        click.echo(f"axiom violations: {bad}", err=True)
        raise SystemExit(EXIT_ASSERTION)


@main.command()
@click.option("--m", "grid", default="0.5:4.0:0.5", show_default=True, help="Separation grid start:stop:step.")
@click.option("--samples-per-class", type=int, default=1000, show_default=True)
@click.option("--dims", type=int, default=2, show_default=True)
@click.option("--repeats", type=int, default=10, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--measures", default=",".join(CORE_MEASURE_IDS), show_default=True)
@click.option("--threads", type=int, default=os.cpu_count() or 1, show_default="all cores")
@click.option("--output", type=str, default=None, help="Long-format CSV path (default: stdout).")
@click.option("--summary", type=str, default=None, help="Optional JSON summary path.")
@_guarded
def simulate(grid, samples_per_class, dims, repeats, seed, measures, threads, output, summary):
    """Sweep two-Gaussian separation and record measure curves."""
    names = _parse_measures(measures)
    seps = _parse_grid(grid)
    config = GaussianPairConfig(
        separation=seps[0],
        samples_per_class=samples_per_class,
        dims=dims,
        repeats=repeats,
        seed=seed,
    )
    report = separation_sweep(seps, config, measures=names, threads=threads)
    _write_text(output, report.to_csv())
    if summary is not None:
        _write_text(summary, sweep_summary_json(report))


@main.command("relabel-eval")
@click.option("--measure", "measure_id", default="rankm", show_default=True)
@click.option("--shuffles", type=int, default=100, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--n-super", type=int, default=10, show_default=True)
@click.option("--subs-per-super", type=int, default=4, show_default=True)
@click.option("--samples-per-sub", type=int, default=25, show_default=True)
@click.option("--dims", type=int, default=2, show_default=True)
@click.option("--super-separation", type=float, default=50.0, show_default=True)
@click.option("--sub-radius", type=float, default=1.5, show_default=True)
@click.option("--noise-sigma", type=float, default=1.0, show_default=True)
@click.option("--threads", type=int, default=os.cpu_count() or 1, show_default="all cores")
@click.option("--output", type=str, default=None, help="Output JSON path (default: stdout).")
@_guarded
def relabel_eval(measure_id, shuffles, seed, n_super, subs_per_super, samples_per_sub, dims, super_separation, sub_radius, noise_sigma, threads, output):
    """Split planted superclasses step by step; the measure must not rise.

    Exits 1 when the non-increase check fails for a non-exempt measure.
    """
    config = HierarchyConfig(
        n_super=n_super,
        subs_per_super=subs_per_super,
        samples_per_sub=samples_per_sub,
        dims=dims,
        super_separation=super_separation,
        sub_radius=sub_radius,
        noise_sigma=noise_sigma,
        seed=seed,
    )
    hierarchy = generate_hierarchy(config)
    report = relabel_monotonicity(
        hierarchy, measure=measure_id, shuffles=shuffles, seed=seed, threads=threads
    )
    _write_text(output, json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n")
    if report.exempt:
        click.echo(f"warning: {measure_id} exempt from monotonicity", err=True)
    if not report.passed:
        click.echo(
            f"monotonicity FAIL: {report.violations} increase(s) across {shuffles} shuffles",
            err=True,
        )
        raise SystemExit(EXIT_ASSERTION)


@main.command()
@click.argument("input_path", type=str)
@click.argument("output_path", type=str)
@click.option("--kind", type=click.Choice(["features", "distances", "labels"]), required=True)
@click.option("--to", "target", type=click.Choice(["binary", "csv", "text"]), required=True)
@_guarded
def convert(input_path, output_path, kind, target):
    """Convert between the CSV/text and binary container formats."""
    if kind == "features":
        X = gio.read_features_auto(input_path)
        if target == "binary":
            gio.write_features_binary(output_path, X)
        elif target == "csv":
            gio.write_features_csv(output_path, X)
        else:
            raise ValidationError("features convert to 'binary' or 'csv'")
    elif kind == "distances":
        V = gio.read_distances_auto(input_path)
        if target == "binary":
            gio.write_distances_binary(output_path, V)
        elif target == "csv":
            gio.write_features_csv(output_path, V)
        else:
            raise ValidationError("distances convert to 'binary' or 'csv'")
    else:
        y = gio.read_labels_auto(input_path)
        if target == "text":
            gio.write_labels_text(output_path, y)
        elif target == "csv":
            gio.write_labels_csv(output_path, y)
        else:
            raise ValidationError("labels convert to 'text' or 'csv'")


if __name__ == "__main__":
    main()
