#!/usr/bin/env python3
"""Train the toy 4-class classifier end to end through the CLI and report
held-out accuracy.  Writes the stream files, config, and checkpoint into a
working directory."""

import argparse
import pathlib
import sys

from logsigrnn import gen_synthetic, save_streams
from logsigrnn.cli import main as cli_main

CONFIG = """\
variant = el-logsig-rnn
degree = 2
num_segments = 4
embed_channels = 6
embed_dim = 8
hidden = 32
cell = lstm
num_classes = 4
learning_rate = 0.01
momentum = 0.9
batch_size = 32
epochs = 40
seed = 0
"""


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="toy_run")
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()

    work = pathlib.Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    data = gen_synthetic(1000, seed=args.seed)
    save_streams(data.subset(range(800)), work / "train.jsonl")
    save_streams(data.subset(range(800, 1000)), work / "test.jsonl")
    (work / "config.txt").write_text(CONFIG)

    code = cli_main(
        ["train", str(work / "config.txt"), str(work / "train.jsonl"), str(work / "model.ckpt")]
    )
    if code != 0:
        sys.exit(code)
    sys.exit(cli_main(["eval", str(work / "model.ckpt"), str(work / "test.jsonl")]))


if __name__ == "__main__":
    main()
