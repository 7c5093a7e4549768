"""Command-line pipeline: ingest -> window -> train -> eval / predict / serve.

Every command writes a run manifest (parameters, seeds, input digests) next
to its outputs and never leaves partial output behind: results are computed
first, then written through atomic renames.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import json
import sys
import zipfile
from pathlib import Path

import click

from . import __version__
from .errors import DivergedLossError, PipelineError, ShapeMismatchError
from .ingest import (
    DEFAULT_CLASS_SET,
    LabeledSegment,
    RawRecording,
    apply_trim,
    parse_annotations,
    parse_recording,
    write_recording,
)
from .manifest import atomic_write_text, write_manifest
from .metrics import confusion, eval_report, render_report, report_to_json
from .nn.checkpoint import load_checkpoint, save_checkpoint
from .train import TrainConfig, predict, train
from .windows import ClassMap, balance, load_dataset, save_dataset, slide, split

SEGMENT_SUFFIX = ".csv"


def _split_classes(text: str) -> tuple[str, ...]:
    classes = tuple(c.strip().lower() for c in text.split(",") if c.strip())
    if len(classes) < 2:
        raise click.UsageError(f"need at least two classes, got {text!r}")
    return classes


@click.group()
@click.version_option(__version__)
def cli():
    """Eating-gesture recognition pipeline."""


# --- ingest -------------------------------------------------------------------

def _read_pairs(recordings, annotations, zips):
    """Collect (name, recording text, annotation text) triples from inputs."""
    if len(recordings) != len(annotations):
        raise click.UsageError(
            f"{len(recordings)} recordings but {len(annotations)} annotation files"
        )
    pairs = []
    for rec_path, ann_path in zip(recordings, annotations):
        pairs.append(
            (
                Path(rec_path).stem,
                Path(rec_path).read_text(encoding="utf-8"),
                Path(ann_path).read_text(encoding="utf-8"),
            )
        )
    for zip_path in zips:
        with zipfile.ZipFile(zip_path) as zf:
            members = [m for m in zf.namelist() if not m.endswith("/")]
            csvs = [m for m in members if m.lower().endswith(".csv")]
            jsons = [m for m in members if m.lower().endswith(".json")]
            if len(csvs) != 1 or len(jsons) != 1:
                raise PipelineError(
                    f"{zip_path}: expected one .csv and one .json member, got {members}"
                )
            pairs.append(
                (
                    Path(zip_path).stem,
                    zf.read(csvs[0]).decode("utf-8"),
                    zf.read(jsons[0]).decode("utf-8"),
                )
            )
    if not pairs:
        raise click.UsageError("no inputs: pass --recording/--annotations or --zip")
    return pairs


def run_ingest(recordings, annotations, zips, out_dir, classes) -> list[Path]:
    """Parse and trim everything first, then write segment files atomically."""
    out_dir = Path(out_dir)
    staged: list[tuple[Path, str]] = []
    for name, rec_text, ann_text in _read_pairs(recordings, annotations, zips):
        rec = parse_recording(rec_text, device_id=name)
        spans = parse_annotations(ann_text, classes)
        for span in spans:
            if not span.confirmed:
                click.echo(
                    f"warning: skipping unconfirmed span {span.span_id} "
                    f"({span.label}) of {name}",
                    err=True,
                )
                continue
            seg = apply_trim(rec, span)
            seg_rec = RawRecording(
                device_id=seg.source, t_ms=seg.t_ms, values=seg.values,
                nominal_rate_hz=rec.nominal_rate_hz,
            )
            path = out_dir / span.label / f"{name}_{span.span_id}{SEGMENT_SUFFIX}"
            staged.append((path, write_recording(seg_rec)))
    for path, text in staged:
        atomic_write_text(path, text)
    return [p for p, _ in staged]


@cli.command("ingest")
@click.option("--recording", "-r", "recordings", multiple=True, type=click.Path(exists=True))
@click.option("--annotations", "-a", "annotations", multiple=True, type=click.Path(exists=True))
@click.option("--zip", "-z", "zips", multiple=True, type=click.Path(exists=True))
@click.option("--out", "-o", "out_dir", required=True, type=click.Path())
@click.option("--classes", default=",".join(DEFAULT_CLASS_SET), show_default=True)
def cmd_ingest(recordings, annotations, zips, out_dir, classes):
    """Cut confirmed, trimmed spans out of recordings into segment files."""
    class_set = _split_classes(classes)
    outputs = run_ingest(recordings, annotations, zips, out_dir, class_set)
    write_manifest(
        Path(out_dir) / "ingest.manifest.json",
        "ingest",
        {"classes": list(class_set)},
        list(recordings) + list(annotations) + list(zips),
        outputs,
    )
    click.echo(f"wrote {len(outputs)} segment files to {out_dir}")


# --- window -------------------------------------------------------------------

def load_segments(segments_dir) -> list[LabeledSegment]:
    """Read `<dir>/<label>/*.csv` segment files in sorted order."""
    segments_dir = Path(segments_dir)
    segments = []
    for label_dir in sorted(p for p in segments_dir.iterdir() if p.is_dir()):
        for path in sorted(label_dir.glob(f"*{SEGMENT_SUFFIX}")):
            rec = parse_recording(path.read_text(encoding="utf-8"), device_id=path.stem)
            segments.append(
                LabeledSegment(
                    label=label_dir.name.lower(),
                    t_ms=rec.t_ms,
                    values=rec.values,
                    source=path.stem,
                )
            )
    if not segments:
        raise PipelineError(f"no segment files under {segments_dir}")
    return segments


def run_window(
    segments_dir, out_dir, size, step, ratio, balance_seed, split_seed,
    positive, binary,
):
    segments = load_segments(segments_dir)
    names = tuple(sorted({s.label for s in segments}))
    class_map = ClassMap.from_labels(names, positive)
    balanced = balance(segments, seed=balance_seed, size=size, step=step)
    ds = slide(balanced, class_map, size=size, step=step)
    if binary:
        ds = ds.collapse_to_binary()
    pair = split(ds, ratio=ratio, seed=split_seed)
    out_dir = Path(out_dir)
    save_dataset(pair.train, out_dir / "train.bwds")
    save_dataset(pair.test, out_dir / "test.bwds")
    return pair


@cli.command("window")
@click.option("--segments", "segments_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", "out_dir", required=True, type=click.Path())
@click.option("--window-size", "-W", "size", default=150, show_default=True)
@click.option("--step", "-S", default=10, show_default=True)
@click.option("--ratio", default=0.8, show_default=True)
@click.option("--balance-seed", default=0, show_default=True)
@click.option("--split-seed", default=0, show_default=True)
@click.option("--positive", default="eating", show_default=True)
@click.option("--binary/--multiclass", default=True, show_default=True,
              help="Collapse labels to positive-vs-other for the 2-neuron head.")
def cmd_window(segments_dir, out_dir, size, step, ratio, balance_seed, split_seed, positive, binary):
    """Balance segments, cut sliding windows, split train/test."""
    if step <= 0 or size <= 0 or step > size:
        raise click.UsageError(f"need 0 < step <= window size, got {size}/{step}")
    if not 0 < ratio < 1:
        raise click.UsageError(f"ratio must be in (0, 1), got {ratio}")
    pair = run_window(
        segments_dir, out_dir, size, step, ratio, balance_seed, split_seed,
        positive, binary,
    )
    inputs = sorted(str(p) for p in Path(segments_dir).rglob(f"*{SEGMENT_SUFFIX}"))
    write_manifest(
        Path(out_dir) / "window.manifest.json",
        "window",
        {
            "window_size": size, "step": step, "ratio": ratio,
            "balance_seed": balance_seed, "split_seed": split_seed,
            "positive": positive, "binary": binary,
            "classes": list(pair.train.class_map.names),
        },
        inputs,
        [str(Path(out_dir) / "train.bwds"), str(Path(out_dir) / "test.bwds")],
    )
    click.echo(
        f"train {len(pair.train)} windows, test {len(pair.test)} windows, "
        f"classes {pair.train.class_map.names}"
    )


# --- train --------------------------------------------------------------------

def run_train(train_path, test_path, out_dir, cfg: TrainConfig):
    train_ds = load_dataset(train_path)
    test_ds = load_dataset(test_path)
    if train_ds.window_size != test_ds.window_size:
        raise ShapeMismatchError(
            f"train window size {train_ds.window_size} != test {test_ds.window_size}"
        )
    if train_ds.class_map != test_ds.class_map:
        raise ShapeMismatchError("train/test class maps differ")
    from .windows import SplitPair

    pair = SplitPair(train=train_ds, test=test_ds, seed=cfg.seed)
    out_dir = Path(out_dir)
    try:
        params, history = train(pair, cfg)
    except DivergedLossError as exc:
        if exc.params is not None:
            save_checkpoint(
                exc.params, out_dir / "checkpoint.json",
                class_map=train_ds.class_map, window_size=train_ds.window_size,
            )
            if exc.history is not None:
                atomic_write_text(out_dir / "history.csv", exc.history.to_csv())
        raise
    save_checkpoint(
        params, out_dir / "checkpoint.json",
        class_map=train_ds.class_map, window_size=train_ds.window_size,
    )
    atomic_write_text(out_dir / "history.csv", history.to_csv())
    preds = predict(params, test_ds, batch_size=cfg.batch_size)
    matrix = confusion(test_ds.labels, preds, len(test_ds.class_map), test_ds.class_map.names)
    report = eval_report(matrix, 1)
    atomic_write_text(out_dir / "report.txt", render_report(report))
    atomic_write_text(out_dir / "report.json", report_to_json(report))
    atomic_write_text(out_dir / "confusion.csv", matrix.to_csv())
    return params, history, report


@cli.command("train")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--out", "-o", "out_dir", required=True, type=click.Path())
@click.option("--lr", default=0.0025, show_default=True)
@click.option("--epochs", default=50, show_default=True)
@click.option("--batch-size", default=1024, show_default=True)
@click.option("--l2", "lam", default=0.0015, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--precision", type=click.Choice(["32", "64"]), default="32", show_default=True)
@click.option("--optimizer", type=click.Choice(["adam", "sgd"]), default="adam", show_default=True)
@click.option("--clip-norm", type=float, default=None)
@click.option("--hidden", default=64, show_default=True)
def cmd_train(train_path, test_path, out_dir, lr, epochs, batch_size, lam, seed,
              precision, optimizer, clip_norm, hidden):
    """Train the classifier and report on the test split."""
    ds_probe = load_dataset(train_path)
    cfg = TrainConfig(
        window_size=ds_probe.window_size,
        step=ds_probe.step,
        learning_rate=lr,
        epochs=epochs,
        batch_size=batch_size,
        lam=lam,
        seed=seed,
        precision=precision,
        optimizer=optimizer,
        clip_norm=clip_norm,
        hidden=hidden,
    )
    out = Path(out_dir)
    manifest_params = {
        "learning_rate": lr, "epochs": epochs, "batch_size": batch_size,
        "l2": lam, "seed": seed, "precision": precision,
        "optimizer": optimizer, "clip_norm": clip_norm, "hidden": hidden,
        "window_size": cfg.window_size, "step": cfg.step,
    }
    try:
        params, history, report = run_train(train_path, test_path, out, cfg)
    finally:
        if (out / "checkpoint.json").exists():
            write_manifest(
                out / "train.manifest.json",
                "train",
                manifest_params,
                [train_path, test_path],
                [str(out / "checkpoint.json"), str(out / "history.csv")],
            )
    if history.test_acc:
        click.echo(
            f"epochs {len(history)}: final test acc {history.test_acc[-1]:.4f}, "
            f"test loss {history.test_loss[-1]:.4f}"
        )
    click.echo(render_report(report))


# --- eval / predict -------------------------------------------------------------

def _check_window_size(ckpt, ds):
    if ckpt["window_size"] is not None and ckpt["window_size"] != ds.window_size:
        raise ShapeMismatchError(
            f"checkpoint was trained on windows of {ckpt['window_size']} samples "
            f"but the dataset has windows of {ds.window_size}"
        )
    if ckpt["params"].dims.classes != len(ds.class_map):
        raise ShapeMismatchError(
            f"checkpoint has {ckpt['params'].dims.classes} classes, "
            f"dataset {len(ds.class_map)}"
        )


def run_eval(checkpoint_path, dataset_path, beta):
    ckpt = load_checkpoint(checkpoint_path)
    ds = load_dataset(dataset_path)
    _check_window_size(ckpt, ds)
    preds = predict(ckpt["params"], ds)
    matrix = confusion(ds.labels, preds, len(ds.class_map), ds.class_map.names)
    return eval_report(matrix, beta)


@cli.command("eval")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--beta", default=1.0, show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
def cmd_eval(checkpoint_path, dataset_path, beta, out_dir):
    """Evaluate a checkpoint on a dataset and print the metric table."""
    report = run_eval(checkpoint_path, dataset_path, beta)
    text = render_report(report)
    click.echo(text, nl=False)
    if out_dir:
        out = Path(out_dir)
        atomic_write_text(out / "report.txt", text)
        atomic_write_text(out / "report.json", report_to_json(report))
        atomic_write_text(out / "confusion.csv", report.matrix.to_csv())
        write_manifest(
            out / "eval.manifest.json",
            "eval",
            {"beta": beta},
            [checkpoint_path, dataset_path],
            [str(out / "report.txt"), str(out / "report.json"), str(out / "confusion.csv")],
        )


@cli.command("predict")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
def cmd_predict(checkpoint_path, dataset_path, out_path):
    """Write per-window predictions as CSV (index,label_index,label)."""
    ckpt = load_checkpoint(checkpoint_path)
    ds = load_dataset(dataset_path)
    _check_window_size(ckpt, ds)
    preds = predict(ckpt["params"], ds)
    lines = ["index,label_index,label"]
    for i, k in enumerate(preds):
        lines.append(f"{i},{int(k)},{ds.class_map.names[int(k)]}")
    text = "\n".join(lines) + "\n"
    if out_path:
        atomic_write_text(out_path, text)
        write_manifest(
            Path(out_path).with_suffix(".manifest.json"),
            "predict",
            {},
            [checkpoint_path, dataset_path],
            [str(out_path)],
        )
    else:
        click.echo(text, nl=False)


# --- serve ----------------------------------------------------------------------

@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--store", "store_dir", default=None, type=click.Path(),
              help="Upload store directory; HARLSTM_STORE env var overrides the default.")
@click.option("--classes", default=",".join(DEFAULT_CLASS_SET), show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(),
              help="Static annotator UI assets; HARLSTM_UI env var also works.")
def cmd_serve(host, port, store_dir, classes, ui_dir):
    """Run the upload/annotation service until interrupted."""
    import os

    import uvicorn

    from .service import STORE_ENV, create_app

    store_dir = store_dir or os.environ.get(STORE_ENV) or "./store"
    class_set = _split_classes(classes)
    app = create_app(store_dir, class_set, ui_dir=ui_dir)
    atomic_write_text(
        Path(store_dir) / "serve.manifest.json",
        json.dumps(
            {"command": "serve", "params": {"host": host, "port": port,
             "classes": list(class_set), "ui_dir": ui_dir}},
            indent=2, sort_keys=True,
        ) + "\n",
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DivergedLossError as exc:
        click.echo(f"error: training diverged: {exc}", err=True)
        return 3
    except (PipelineError, FileNotFoundError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
