#!/usr/bin/env python3
# Copyright 2026 The Layerspin Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the bundled MNIST subset under data/mnist/ in IDX format.

Source: the `mnist` npm package (v1.1.0, MIT), which ships 10,000 genuine
MNIST digits as per-class JSON arrays of pixel/255 rounded to 3 decimals.
Rounding is well below half a gray level, so round(v * 255) recovers the
original byte exactly.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 tools/prepare_mnist_subset.py package/src/digits data/mnist

The first TRAIN_PER_CLASS digits of every class form the training file and
the remainder form the test file. Both files are shuffled with a fixed seed
so class order is interleaved like the official distribution.
"""

import argparse
import gzip
import json
import random
import struct
from pathlib import Path

TRAIN_PER_CLASS = 600
SHUFFLE_SEED = 20190612


def write_idx(path: Path, images, labels_path: Path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with gzip.GzipFile(labels_path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=Path)
    ap.add_argument("out_dir", type=Path)
    args = ap.parse_args()

    train, test = [], []
    for digit in range(10):
        data = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        if len(data) % 784:
            raise SystemExit(f"{digit}.json: length {len(data)} not a multiple of 784")
        for i in range(len(data) // 784):
            px = [round(v * 255) for v in data[i * 784:(i + 1) * 784]]
            if min(px) < 0 or max(px) > 255:
                raise SystemExit(f"{digit}.json: pixel out of range in sample {i}")
            (train if i < TRAIN_PER_CLASS else test).append((px, digit))

    rng = random.Random(SHUFFLE_SEED)
    rng.shuffle(train)
    rng.shuffle(test)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, rows in (("train", train), ("t10k", test)):
        write_idx(args.out_dir / f"{name}-images-idx3-ubyte.gz", [r[0] for r in rows],
                  args.out_dir / f"{name}-labels-idx1-ubyte.gz", [r[1] for r in rows])
        print(f"{name}: {len(rows)} samples")


if __name__ == "__main__":
    main()
