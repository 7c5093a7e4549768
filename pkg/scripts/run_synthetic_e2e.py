#!/usr/bin/env python3
"""End-to-end experiment on the synthetic four-activity corpus.

Generates skewed segments, balances, windows (150/10), trains the stacked
LSTM with the default hyperparameters, and prints the evaluation report
plus the eating-vs-other collapse. Mirrors the heavyweight acceptance run;
handy for profiling and for eyeballing training curves.

Usage: python scripts/run_synthetic_e2e.py [--seed N] [--epochs N]
                                           [--batch-size N] [--out DIR]
"""

import argparse
import os
import time

# single-threaded BLAS wins at these matrix shapes; set before numpy loads
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

from harlstm.metrics import collapse_matrix, confusion, eval_report, render_report  # noqa: E402
from harlstm.synth import make_corpus  # noqa: E402
from harlstm.train import TrainConfig, predict, train  # noqa: E402
from harlstm.windows import ClassMap, balance, slide, split  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--batch-size", type=int, default=128)
    ap.add_argument("--out", default=None, help="write checkpoint/history here")
    args = ap.parse_args()

    tic = time.perf_counter()
    segments = make_corpus(args.seed)
    balanced = balance(segments, seed=args.seed, size=150, step=10)
    class_map = ClassMap.from_labels(sorted({s.label for s in segments}), "eating")
    ds = slide(balanced, class_map, size=150, step=10)
    pair = split(ds, ratio=0.8, seed=args.seed)
    print(f"{len(ds)} windows after balancing {ds.class_counts()}")
    print(f"train {len(pair.train)} / test {len(pair.test)}")

    cfg = TrainConfig(
        window_size=150, step=10, learning_rate=0.0025, epochs=args.epochs,
        batch_size=args.batch_size, lam=0.0015, seed=args.seed,
        precision="float32",
    )
    params, history = train(pair, cfg)
    for e in range(0, len(history), max(1, len(history) // 10)):
        print(f"epoch {e:3d}: train {history.train_acc[e]:.4f}/{history.train_loss[e]:.4f}"
              f"  test {history.test_acc[e]:.4f}/{history.test_loss[e]:.4f}"
              f"  ({history.seconds[e]:.1f}s)")

    preds = predict(params, pair.test)
    matrix = confusion(pair.test.labels, preds, len(class_map), class_map.names)
    print()
    print(render_report(eval_report(matrix, 1)))
    collapsed = collapse_matrix(matrix, class_map.positive_index)
    print(render_report(eval_report(collapsed, 1)))
    print(f"total {time.perf_counter() - tic:.0f}s")

    if args.out:
        from harlstm.nn.checkpoint import save_checkpoint
        from harlstm.manifest import atomic_write_text
        from pathlib import Path

        out = Path(args.out)
        save_checkpoint(params, out / "checkpoint.json", class_map=class_map,
                        window_size=150)
        atomic_write_text(out / "history.csv", history.to_csv())
        print(f"wrote {out}/checkpoint.json and history.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
