"""Convert a CSV of 28x28 digits (784 pixel columns, label last) into shuffled IDX files."""

import argparse
import gzip
import struct
from pathlib import Path

import numpy as np


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", type=Path, help="mnist_5k.csv.gz or an uncompressed CSV")
    parser.add_argument("out", type=Path)
    parser.add_argument("--train", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=20161005)
    args = parser.parse_args()

    opener = gzip.open if args.csv.suffix == ".gz" else open
    with opener(args.csv, "rt") as f:
        table = np.loadtxt(f, delimiter=",", dtype=np.int64)
    if table.shape[1] != 785:
        raise SystemExit(f"expected 785 columns, got {table.shape[1]}")

    order = np.random.default_rng(args.seed).permutation(len(table))
    table = table[order]
    images, labels = table[:, :784], table[:, 784]
    train, test = slice(0, args.train), slice(args.train, len(table))

    args.out.mkdir(parents=True, exist_ok=True)
    write_images(args.out / "train-images-idx3-ubyte", images[train])
    write_labels(args.out / "train-labels-idx1-ubyte", labels[train])
    write_images(args.out / "t10k-images-idx3-ubyte", images[test])
    write_labels(args.out / "t10k-labels-idx1-ubyte", labels[test])


if __name__ == "__main__":
    main()
