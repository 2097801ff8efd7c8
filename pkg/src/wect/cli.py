"""Command-line front end: ``wect <command> ...``.

Exit codes: 0 success, 1 contract violation / bad computation input,
2 I/O or parse failure (click usage errors also exit 2).
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import analysis, ingest
from .complex import WeightedComplex, image_to_weighted_complex
from .errors import ParseError
from .metric import DistanceMatrix, distance_matrix, register_rotation
from .pipeline import PipelineConfig, complex_wect, wect_features
from .transform import Wect

CONFIG_KEYS = ("directions", "samples", "lo", "hi", "window_fraction", "sigma_fraction",
               "smooth", "register", "normalize", "seed")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def guarded(fn):
    """Map library exceptions onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ParseError, OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def config_options(fn):
    opts = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                     help="TOML file with pipeline defaults; command-line flags override it."),
        click.option("--directions", type=int, default=25, show_default=True, help="Number of directions n."),
        click.option("--samples", type=int, default=50, show_default=True, help="Filtration samples m."),
        click.option("--lo", type=float, default=-1.0, show_default=True),
        click.option("--hi", type=float, default=1.0, show_default=True),
        click.option("--window-fraction", type=float, default=0.2, show_default=True,
                     help="Gaussian half-width as a fraction of m."),
        click.option("--sigma-fraction", type=float, default=1.0 / 3.0, show_default=True,
                     help="Gaussian std as a fraction of the half-width."),
        click.option("--smooth/--no-smooth", default=True, show_default=True),
        click.option("--register/--no-register", default=True, show_default=True),
        click.option("--normalize/--no-normalize", default=True, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def resolve_config(ctx: click.Context, params: dict) -> PipelineConfig:
    values = {}
    path = params.pop("config_file", None)
    if path:
        try:
            import tomllib as tomli
        except ImportError:
            import tomli

        with open(path, "rb") as fh:
            data = tomli.load(fh)
        values.update(data.get("pipeline", data))
    for key in CONFIG_KEYS:
        source = ctx.get_parameter_source(key)
        if key not in values or source not in (click.core.ParameterSource.DEFAULT, None):
            values[key] = params[key]
    for key in CONFIG_KEYS:
        params.pop(key, None)
    return PipelineConfig.from_mapping(values)


def load_input(path: str, mask: Optional[str] = None):
    """Return a WeightedComplex or a Wect from a JSON file, or a complex from a PGM image."""
    if path.endswith(".json"):
        d = json.loads(Path(path).read_text())
        if "matrix" in d:
            return Wect.from_dict(d)
        return WeightedComplex.from_dict(d)
    image = ingest.read_pgm(ingest.read_bytes(path))
    mask_img = None
    if mask is not None:
        mask_img = (ingest.read_pgm(ingest.read_bytes(mask)) > 0).astype(np.uint8)
    return image_to_weighted_complex(image, mask_img)


def _as_wect(obj, config: PipelineConfig, weighted: bool) -> Wect:
    if isinstance(obj, Wect):
        return obj
    return complex_wect(obj if weighted else obj.unit_weights(), config, weighted)


@click.group()
def main() -> None:
    """Weighted Euler curve transforms of segmented grayscale images."""


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--mask", type=click.Path(exists=True, dir_okay=False), help="Binary mask PGM (pixels > 0 kept).")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None, help="Output JSON (default stdout).")
@guarded
def convert(image, mask, out):
    """Convert a PGM image to a weighted simplicial complex (JSON)."""
    K = load_input(image, mask)
    if K.is_empty():
        click.echo("warning: no selected pixels; writing the empty complex", err=True)
    _emit(_dump(K.to_dict()), out)


def _transform_command(weighted_default: bool):
    @click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
    @click.option("--mask", type=click.Path(exists=True, dir_okay=False))
    @click.option("--unit-weights", is_flag=True, default=not weighted_default,
                  help="Ignore weights (plain Euler curve transform).")
    @click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
    @click.option("-o", "--out", type=click.Path(dir_okay=False), default=None)
    @config_options
    @click.pass_context
    @guarded
    def command(ctx, input_path, mask, unit_weights, fmt, out, **params):
        config = resolve_config(ctx, params)
        K = load_input(input_path, mask)
        if isinstance(K, Wect):
            raise ValueError("input is already a WECT")
        w = _as_wect(K, config, weighted=not unit_weights)
        if fmt == "csv":
            _emit(w.to_csv(), out)
        else:
            d = w.to_dict()
            d["config"] = config.to_dict()
            d["unit_weights"] = bool(unit_weights)
            _emit(_dump(d), out)

    return command


main.command("wect", help="Compute the (smoothed) weighted Euler curve transform.")(_transform_command(True))
main.command("ect", help="Compute the (smoothed) unweighted Euler curve transform.")(_transform_command(False))


@main.command()
@click.argument("wects", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--register/--no-register", default=False, show_default=True,
              help="Minimise over cyclic rotations of the second argument.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None, help="CSV output (default stdout).")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None,
              help="Also write JSON with the shift matrix.")
@guarded
def distmat(wects, register, threads, out, json_out):
    """Pairwise L2 distances between WECT JSON files."""
    ws = [Wect.from_json(Path(p).read_text()) for p in wects]
    D = distance_matrix(ws, register=register, workers=threads)
    _emit(D.to_csv(), out)
    if json_out:
        d = D.to_dict()
        d["config"] = {"register": register, "inputs": list(wects)}
        Path(json_out).write_text(_dump(d))


@main.command()
@click.argument("distances", type=click.Path(exists=True, dir_okay=False))
@click.option("-k", "--clusters", type=int, required=True, help="Number of clusters to cut.")
@click.option("--dendrogram", type=click.Path(dir_okay=False), default=None, help="Dendrogram JSON output.")
@click.option("--labels", type=click.Path(dir_okay=False), default=None, help="Labels CSV (default stdout).")
@guarded
def cluster(distances, clusters, dendrogram, labels):
    """Ward clustering of a distance matrix (CSV or JSON)."""
    text = Path(distances).read_text()
    D = DistanceMatrix.from_dict(json.loads(text)) if distances.endswith(".json") else DistanceMatrix.from_csv(text)
    dend = analysis.ward_cluster(D)
    lab = analysis.cut(dend, clusters)
    if dendrogram:
        d = dend.to_dict()
        d["config"] = {"k": clusters, "linkage": "ward"}
        Path(dendrogram).write_text(_dump(d))
    _emit("".join(f"{v}\n" for v in lab), labels)


@main.command()
@click.option("--images", "images_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="IDX image file (e.g. train-images-idx3-ubyte[.gz]).")
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="IDX label file (e.g. train-labels-idx1-ubyte[.gz]).")
@click.option("--representation", type=click.Choice(["raw", "ect", "wect"]), default="wect", show_default=True)
@click.option("--per-class", type=int, default=100, show_default=True)
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--lam", type=float, default=1e-4, show_default=True, help="SVM regularization.")
@click.option("--epochs", type=int, default=50, show_default=True)
@click.option("--multiclass", type=click.Choice(["ovo", "ovr"]), default="ovo", show_default=True,
              help="One-vs-one voting or one-vs-rest reduction.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None)
@config_options
@click.pass_context
@guarded
def classify(ctx, images_path, labels_path, representation, per_class, folds, lam, epochs, multiclass, threads, out,
             **params):
    """Balanced-subset k-fold linear SVM accuracy for raw / ECT / WECT features."""
    config = resolve_config(ctx, params)
    data = ingest.subsample_balanced(ingest.load_mnist(images_path, labels_path), per_class, config.seed)
    X = classification_features(data.images, representation, config, threads)
    report = analysis.cross_validate(X, data.labels, folds, lam, epochs, config.seed, threads, multiclass)
    d = report.to_dict()
    d["config"] = dict(config.to_dict(), representation=representation, per_class=per_class, folds=folds,
                       lam=lam, epochs=epochs, multiclass=multiclass, n_samples=len(data), n_features=int(X.shape[1]))
    _emit(_dump(d), out)


def classification_features(images, representation: str, config: PipelineConfig, threads: int = 1) -> np.ndarray:
    images = np.asarray(images)
    if representation == "raw":
        return images.reshape(len(images), -1).astype(float)
    return wect_features(images, config, weighted=representation == "wect", workers=threads)


@main.command()
@click.argument("first", type=click.Path(exists=True, dir_okay=False))
@click.argument("second", type=click.Path(exists=True, dir_okay=False))
@click.option("--unit-weights", is_flag=True, default=False)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None)
@config_options
@click.pass_context
@guarded
def register(ctx, first, second, unit_weights, out, **params):
    """Rotation that best aligns SECOND to FIRST (cyclic shift of directions)."""
    config = resolve_config(ctx, params)
    a = _as_wect(load_input(first), config, not unit_weights)
    b = _as_wect(load_input(second), config, not unit_weights)
    k, d = register_rotation(a, b)
    result = {"shift": k, "angle": 2 * np.pi * k / a.scheme.n, "distance": d, "config": config.to_dict()}
    _emit(_dump(result), out)


if __name__ == "__main__":
    main()
