#!/usr/bin/env python3
import argparse
import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from scanpath.synthetic import (
    blob_dataset,
    centered_saliency_dataset,
    peaked_saliency_dataset,
    write_synthetic,
)

logger = logging.getLogger(__name__)

KINDS = ("blobs", "centered", "peaked")


def build(kind: str, n: int, size: int, seed: int):
    if kind == "blobs":
        return blob_dataset(n=n, size=size, seed=seed)
    if kind == "centered":
        return centered_saliency_dataset(n=n, grid=size, seed=seed)
    return peaked_saliency_dataset(n=n, grid=size, seed=seed)


def main():
    parser = argparse.ArgumentParser(description="Write a synthetic scanpath dataset in the canonical format.")
    parser.add_argument("kind", choices=KINDS, help="Which synthetic dataset to build.")
    parser.add_argument("out_dir", help="Directory for dataset.jsonl, images/ and saliency/.")
    parser.add_argument("--n", type=int, default=None, help="Number of images (default depends on kind).")
    parser.add_argument("--size", type=int, default=None, help="Image / saliency grid size in pixels.")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    n = args.n if args.n is not None else {"blobs": 4, "centered": 10, "peaked": 50}[args.kind]
    size = args.size if args.size is not None else (16 if args.kind == "blobs" else 32)
    path = write_synthetic(build(args.kind, n, size, args.seed), args.out_dir)
    logger.info("Dataset ready: %s", path)


if __name__ == "__main__":
    main()
