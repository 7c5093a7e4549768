#!/usr/bin/env python3
"""Plot a training history CSV (loss and accuracy curves per epoch).

Usage: python scripts/plot_history.py runs/history.csv [-o plot.png]
"""

import argparse
import csv


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("history_csv")
    ap.add_argument("-o", "--out", default=None, help="save instead of showing")
    args = ap.parse_args()

    import matplotlib

    if args.out:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(csv.DictReader(open(args.history_csv)))
    epochs = [int(r["epoch"]) for r in rows]
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(11, 4))
    ax_loss.plot(epochs, [float(r["train_loss"]) for r in rows], label="train")
    ax_loss.plot(epochs, [float(r["test_loss"]) for r in rows], label="test")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("loss")
    ax_loss.legend()
    ax_acc.plot(epochs, [float(r["train_acc"]) for r in rows], label="train")
    ax_acc.plot(epochs, [float(r["test_acc"]) for r in rows], label="test")
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0, 1.02)
    ax_acc.legend()
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=120)
        print(f"wrote {args.out}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
