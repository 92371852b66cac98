"""Command-line interface: segment, classify, sweep, compare and serve.

Parameter precedence is flags over ``--config`` JSON over the built-in
defaults, and every command echoes the effective parameter set into its
output directory as ``params.json``.  Exit codes: 0 success, 1 runtime
failure, 2 usage or validation error.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .classify import (ParseError, apply_classification, classify_regions,
                       eval_expr, parse_expr)
from .core import (ParamError, PipelineParams, RgbImage, export_region_table,
                   load_image, load_label_matrix, save_label_matrix)
from .optimize import (GroundTruthStates, compare_segmenters,
                       load_ground_truth, sample_labels, threshold_sweep)
from .regions import extract_regions
from .render import encode_png, render_classification_overlay, render_overlay, \
    step_to_png
from .watershed import segment

_PARAM_FLAG_MAP = {
    "clip_limit": "equalization_clip_limit",
    "background_size": "background_size",
    "median_size": "median_size",
    "gaussian_radius": "gaussian_radius",
    "min_area": "min_area",
    "max_area": "max_area",
    "min_signal": "min_signal",
    "expr": "classifier_expr",
    "threshold": "classifier_threshold",
    "equalize": "enable_equalization",
    "background_subtract": "enable_background_subtraction",
    "smooth": "enable_smoothing",
}


def param_options(fn):
    opts = [
        click.option("--clip-limit", type=float, default=None,
                     help="Equalization clip limit in [0, 1]."),
        click.option("--background-size", type=int, default=None,
                     help="Background median size, odd px."),
        click.option("--median-size", type=int, default=None,
                     help="Smoothing median size, odd px."),
        click.option("--gaussian-radius", type=float, default=None,
                     help="Gaussian smoothing radius, px."),
        click.option("--min-area", type=int, default=None,
                     help="Minimum object area, px^2."),
        click.option("--max-area", type=int, default=None,
                     help="Maximum object area, px^2."),
        click.option("--min-signal", type=float, default=None,
                     help="Minimum mean raw intensity in [0, 1]."),
        click.option("--expr", default=None,
                     help="Classification function over R, G, B."),
        click.option("--threshold", default=None,
                     help='Classification threshold (number or "auto").'),
        click.option("--equalize/--no-equalize", "equalize", default=None,
                     help="Toggle histogram equalization."),
        click.option("--background-subtract/--no-background-subtract",
                     "background_subtract", default=None,
                     help="Toggle background subtraction."),
        click.option("--smooth/--no-smooth", "smooth", default=None,
                     help="Toggle median+Gaussian smoothing."),
        click.option("--config", type=click.Path(), default=None,
                     help="JSON file of pipeline parameters."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _parse_threshold(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise click.UsageError(f'threshold must be a number or "auto", got {text!r}')


def build_params(config, **flags) -> PipelineParams:
    data = PipelineParams().to_dict()
    if config is not None:
        path = Path(config)
        if not path.is_file():
            raise click.UsageError(f"file not found: {path}")
        try:
            data.update(PipelineParams.from_json(path.read_text()).to_dict())
        except ParamError as exc:
            raise click.UsageError(f"invalid config {path}: {exc}")
    for flag, field in _PARAM_FLAG_MAP.items():
        value = flags.get(flag)
        if value is not None:
            data[field] = _parse_threshold(value) if flag == "threshold" else value
    try:
        return PipelineParams.from_dict(data)
    except ParamError as exc:
        lines = [f"  --{k.replace('_', '-')}: {v}" for k, v in sorted(exc.errors.items())]
        raise click.UsageError("invalid parameters:\n" + "\n".join(lines))


def _load_input_image(path: str) -> RgbImage:
    p = Path(path)
    if not p.is_file():
        raise click.UsageError(f"file not found: {p}")
    try:
        return load_image(p)
    except ValueError as exc:
        raise click.ClickException(str(exc))


def _prepare_out(out: str, params: PipelineParams) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "params.json").write_text(params.to_json() + "\n")
    return out_dir


def _report_parse_error(expr: str, exc: ParseError) -> None:
    click.echo(f"error: {exc}", err=True)
    click.echo(f"  {expr}", err=True)
    click.echo(f"  {' ' * exc.position}^", err=True)
    sys.exit(2)


@click.group()
@click.version_option(package_name="cellflood")
def main():
    """Watershed segmentation and classification of fluorescence images."""


@main.command("segment")
@click.argument("image", type=click.Path())
@param_options
@click.option("--out", default="out", show_default=True,
              help="Output directory.")
@click.option("--save-steps", is_flag=True,
              help="Also write each intermediate step image.")
def cmd_segment(image, out, save_steps, config, **flags):
    """Segment IMAGE and write labels, region table and overlay."""
    params = build_params(config, **flags)
    img = _load_input_image(image)
    out_dir = _prepare_out(out, params)

    result = segment(img, params)
    table = extract_regions(result.labels, img)

    save_label_matrix(result.labels, out_dir / "labels.png")
    export_region_table(table, out_dir / "regions.csv")
    (out_dir / "overlay.png").write_bytes(
        encode_png(render_overlay(img, result.labels)))
    if save_steps:
        steps_dir = out_dir / "steps"
        steps_dir.mkdir(exist_ok=True)
        for i, (name, step) in enumerate(result.intermediates.items()):
            (steps_dir / f"{i:02d}_{name}.png").write_bytes(step_to_png(step))
    click.echo(f"regions: {result.labels.n_objects}")


@main.command("classify")
@click.argument("image", type=click.Path())
@param_options
@click.option("--labels", "labels_path", type=click.Path(), default=None,
              help="Existing label PNG; segments the image when omitted.")
@click.option("--out", default="out", show_default=True)
@click.option("--display-scale", is_flag=True,
              help="Evaluate f and threshold on the 0-255 display scale.")
def cmd_classify(image, labels_path, out, display_scale, config, **flags):
    """Classify segmented objects into state 1 / state 2."""
    params = build_params(config, **flags)
    img = _load_input_image(image)

    try:
        ast = parse_expr(params.classifier_expr)
    except ParseError as exc:
        _report_parse_error(params.classifier_expr, exc)

    if labels_path is not None:
        p = Path(labels_path)
        if not p.is_file():
            raise click.UsageError(f"file not found: {p}")
        labels = load_label_matrix(p)
    else:
        labels = segment(img, params).labels

    out_dir = _prepare_out(out, params)
    table = extract_regions(labels, img)
    if labels.n_objects == 0:
        raise click.ClickException("no regions to classify")
    try:
        result = classify_regions(table, ast, params.classifier_threshold,
                                  display_scale=display_scale)
    except ValueError as exc:
        raise click.ClickException(str(exc))

    apply_classification(table, result)
    export_region_table(table, out_dir / "regions.csv")
    (out_dir / "overlay_classified.png").write_bytes(
        encode_png(render_classification_overlay(img, labels, result.states)))
    with open(out_dir / "f_histogram.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, count in zip(result.hist_edges[:-1], result.hist_edges[1:],
                                 result.hist_counts):
            writer.writerow([f"{lo:.9g}", f"{hi:.9g}", int(count)])

    counts = result.state_counts()
    if result.threshold_mode == "otsu":
        click.echo(f"threshold (otsu): {result.threshold_used:.9g}")
    else:
        click.echo(f"threshold: {result.threshold_used:.9g}")
    click.echo(f"state 1: {counts[1]}")
    click.echo(f"state 2: {counts[2]}")


@main.command("sweep")
@click.argument("image", type=click.Path(), required=False)
@param_options
@click.option("--f-values", "f_values_path", type=click.Path(), default=None,
              help="CSV of label,f_value (instead of segmenting IMAGE).")
@click.option("--truth", "truth_path", type=click.Path(), required=True,
              help="Ground-truth CSV with header label,state.")
@click.option("--range", "range_", nargs=2, type=float, default=(0.0, 2.0),
              show_default=True, help="Threshold range lo hi.")
@click.option("--steps", type=int, default=201, show_default=True)
@click.option("--sample", type=int, default=None,
              help="Randomly subsample this many truth entries.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for --sample.")
@click.option("--out", default="out", show_default=True)
def cmd_sweep(image, f_values_path, truth_path, range_, steps, sample, seed,
              out, config, **flags):
    """Sweep the classification threshold against manual ground truth."""
    params = build_params(config, **flags)
    if steps < 2:
        raise click.UsageError("steps must be >= 2")
    lo, hi = range_
    if not lo < hi:
        raise click.UsageError("range must satisfy lo < hi")

    truth_file = Path(truth_path)
    if not truth_file.is_file():
        raise click.UsageError(f"file not found: {truth_file}")
    truth = load_ground_truth(truth_file)
    if not isinstance(truth, GroundTruthStates):
        raise click.UsageError(f"{truth_file}: expected label,state ground truth")

    if f_values_path is not None:
        fp = Path(f_values_path)
        if not fp.is_file():
            raise click.UsageError(f"file not found: {fp}")
        f_values = {}
        with open(fp, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["label", "f_value"]:
                raise click.UsageError(f"{fp}: expected header label,f_value")
            for row in reader:
                if row:
                    f_values[int(row[0])] = float(row[1])
    elif image is not None:
        img = _load_input_image(image)
        try:
            ast = parse_expr(params.classifier_expr)
        except ParseError as exc:
            _report_parse_error(params.classifier_expr, exc)
        labels = segment(img, params).labels
        table = extract_regions(labels, img)
        f_values = {r.label: eval_expr(ast, r.pixels_r, r.pixels_g, r.pixels_b)
                    for r in table}
    else:
        raise click.UsageError("provide IMAGE or --f-values")

    if sample is not None:
        picked = set(sample_labels(truth.labels(), sample, seed))
        truth = GroundTruthStates.from_pairs(
            [(l, s) for l, s in truth.entries if l in picked])

    try:
        result = threshold_sweep(f_values, truth, (lo, hi), steps)
    except ValueError as exc:
        raise click.UsageError(str(exc))

    out_dir = _prepare_out(out, params)
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "accuracy"])
        # repr round-trips exactly, so sweep data compares equal across
        # the CLI, library and HTTP interfaces
        for t, a in zip(result.thresholds, result.accuracies):
            writer.writerow([repr(float(t)), repr(float(a))])
    (out_dir / "sweep.json").write_text(json.dumps({
        "optimal_threshold": result.optimal_threshold,
        "optimal_accuracy": result.optimal_accuracy,
        "range": [lo, hi],
        "steps": steps,
        "n_plateaus": result.n_plateaus,
    }, indent=2) + "\n")
    click.echo(f"optimal threshold: {result.optimal_threshold:.9g}")
    click.echo(f"optimal accuracy: {result.optimal_accuracy:.9g}")


@main.command("compare")
@click.argument("image", type=click.Path())
@param_options
@click.option("--out", default="out", show_default=True)
def cmd_compare(image, out, config, **flags):
    """Compare Otsu thresholding, naive watershed and the full pipeline."""
    params = build_params(config, **flags)
    img = _load_input_image(image)
    out_dir = _prepare_out(out, params)

    res = compare_segmenters(img, params)
    rows = [
        ("otsu_threshold", res.otsu_cc),
        ("naive_watershed", res.naive_watershed),
        ("custom_watershed", res.custom),
    ]
    for name, lm in rows:
        (out_dir / f"overlay_{name}.png").write_bytes(
            encode_png(render_overlay(img, lm)))
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "regions"])
        for name, lm in rows:
            writer.writerow([name, lm.n_objects])
    for name, lm in rows:
        click.echo(f"{name}: {lm.n_objects}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="CELLFLOOD_HOST")
@click.option("--port", type=int, default=8000, show_default=True,
              envvar="CELLFLOOD_PORT")
@click.option("--max-upload-bytes", type=int, default=64 * 1024 * 1024,
              show_default=True, envvar="CELLFLOOD_MAX_UPLOAD_BYTES")
@click.option("--session-ttl-seconds", type=float, default=3600.0,
              show_default=True, envvar="CELLFLOOD_SESSION_TTL_SECONDS")
@click.option("--ui-dir", type=click.Path(), default=None,
              envvar="CELLFLOOD_UI_DIR",
              help="Directory of built web UI assets to serve at /.")
def cmd_serve(host, port, max_upload_bytes, session_ttl_seconds, ui_dir):
    """Run the HTTP service backing the interactive tuning UI."""
    import uvicorn

    from .server import ServerConfig, create_app

    app = create_app(ServerConfig(max_upload_bytes=max_upload_bytes,
                                  session_ttl_seconds=session_ttl_seconds,
                                  ui_dir=Path(ui_dir) if ui_dir else None))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
