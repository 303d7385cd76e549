#!/usr/bin/env python3
"""Efficiency study: epoch wall-clock and accuracy as streams get longer.

Streams are linearly upsampled by growing factors; the log-signature
classifier keeps its fixed number of recurrent steps while the frame-level
LSTM unrolls over every frame.
"""

import argparse

import numpy as np

from logsigrnn import ModelConfig, TrainSettings, gen_synthetic, train, upsample_linear
from logsigrnn.neural import evaluate_model


def median_epoch(trace, timed=3):
    return float(np.median([r["seconds"] for r in trace[1:]][-timed:]))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=300)
    parser.add_argument("--factors", default="1,2,4,8")
    parser.add_argument("--epochs", type=int, default=9)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    data = gen_synthetic(args.count, seed=11)
    split = int(args.count * 2 / 3)
    train_set, eval_set = data.subset(range(split)), data.subset(range(split, args.count))
    factors = [int(f) for f in args.factors.split(",")]

    config = ModelConfig(
        variant="el-logsig-rnn", degree=2, num_segments=4, embed_channels=6,
        embed_dim=8, hidden=32, cell="lstm", num_classes=4, use_accumulative=False,
    )
    baseline = ModelConfig(variant="frame-rnn", hidden=32, cell="lstm", num_classes=4)

    print(f"{'k':>3} {'logsig_s':>9} {'logsig_acc':>11} {'lstm_s':>8} {'lstm_acc':>9}")
    rows = {}
    for k in factors:
        up_train = [upsample_linear(s, k) for s in train_set.samples]
        up_eval = [upsample_linear(s, k) for s in eval_set.samples]
        res = train(config, up_train, train_set.labels, TrainSettings(epochs=args.epochs, seed=args.seed))
        acc = evaluate_model(config, up_eval, eval_set.labels, params=res.params).accuracy
        res_b = train(baseline, up_train, train_set.labels,
                      TrainSettings(learning_rate=0.05, epochs=args.epochs, seed=args.seed, clip_norm=2.0))
        acc_b = evaluate_model(baseline, up_eval, eval_set.labels, params=res_b.params).accuracy
        rows[k] = (median_epoch(res.trace), acc, median_epoch(res_b.trace), acc_b)
        print(f"{k:>3} {rows[k][0]:9.3f} {rows[k][1]:11.4f} {rows[k][2]:8.3f} {rows[k][3]:9.4f}")

    first, last = rows[factors[0]], rows[factors[-1]]
    print(f"\nepoch-time growth {factors[0]} -> {factors[-1]}: "
          f"logsig x{last[0] / first[0]:.2f}, frame-LSTM x{last[2] / first[2]:.2f}")


if __name__ == "__main__":
    main()
