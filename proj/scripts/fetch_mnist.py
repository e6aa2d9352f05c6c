#!/usr/bin/env python3
# Copyright 2026 The binet Authors
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
"""Build MNIST IDX files for binet.

If the four standard MNIST IDX files are already available somewhere, point
binet at that directory instead. This script is a fallback for machines that
can reach an npm registry but not the MNIST mirrors: the npm package
``mnist@1.1.0`` ships 10,000 real MNIST digits as normalized floats. They are
converted back to bytes and split per class, first 80% to train and the rest
to test, so the split is deterministic.
"""

import argparse
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile

PACKAGE = "mnist@1.1.0"
ROWS = COLS = 28


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), ROWS, COLS))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(bytes(labels))


def load_digits(package_dir):
    per_class = []
    for digit in range(10):
        doc = json.loads((package_dir / "src" / "digits" / f"{digit}.json").read_text())
        data = doc["data"]
        n = len(data) // (ROWS * COLS)
        samples = []
        for i in range(n):
            px = data[i * ROWS * COLS:(i + 1) * ROWS * COLS]
            samples.append([max(0, min(255, round(v * 255.0))) for v in px])
        per_class.append(samples)
    return per_class


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data/mnist", help="output directory")
    parser.add_argument("--train-fraction", type=float, default=0.8)
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(["npm", "pack", PACKAGE, "--silent"], cwd=tmp, check=True,
                       stdout=subprocess.DEVNULL)
        tgz = next(pathlib.Path(tmp).glob("mnist-*.tgz"))
        with tarfile.open(tgz) as tar:
            tar.extractall(tmp)
        per_class = load_digits(pathlib.Path(tmp) / "package")

    train_x, train_y, test_x, test_y = [], [], [], []
    for label, samples in enumerate(per_class):
        cut = int(len(samples) * args.train_fraction)
        train_x += samples[:cut]
        train_y += [label] * cut
        test_x += samples[cut:]
        test_y += [label] * (len(samples) - cut)

    # Interleave classes so that file order is not sorted by label.
    def interleave(xs, ys):
        order = sorted(range(len(ys)), key=lambda i: ((i * 7919) % len(ys), i))
        return [xs[i] for i in order], [ys[i] for i in order]

    train_x, train_y = interleave(train_x, train_y)
    test_x, test_y = interleave(test_x, test_y)
    write_idx_images(out / "train-images-idx3-ubyte", train_x)
    write_idx_labels(out / "train-labels-idx1-ubyte", train_y)
    write_idx_images(out / "t10k-images-idx3-ubyte", test_x)
    write_idx_labels(out / "t10k-labels-idx1-ubyte", test_y)
    print(f"wrote {len(train_y)} train / {len(test_y)} test digits to {out}")


if __name__ == "__main__":
    main()
