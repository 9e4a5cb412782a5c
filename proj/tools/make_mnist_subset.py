#!/usr/bin/env python3
"""Convert the digit JSON files shipped with the npm `mnist` package into
gzipped IDX files.

Each source image stores intensities as value/255 rounded to three decimals,
so round(v * 255) recovers the original byte. The first 80% of every digit
file goes to the train split, the rest to the test split. Samples are
interleaved round-robin by class so both splits read like a mixed stream.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist-subset
"""
import gzip
import json
import struct
import sys
from pathlib import Path


def load_digit(path):
    data = json.loads(Path(path).read_text())["data"]
    assert len(data) % 784 == 0
    return [bytes(round(v * 255) for v in data[k:k + 784]) for k in range(0, len(data), 784)]


def interleave(per_class):
    out = []
    cursors = [0] * 10
    while any(cursors[c] < len(per_class[c]) for c in range(10)):
        for c in range(10):
            if cursors[c] < len(per_class[c]):
                out.append((per_class[c][cursors[c]], c))
                cursors[c] += 1
    return out


def write_split(out_dir, prefix, samples):
    with gzip.GzipFile(out_dir / f"{prefix}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), 28, 28))
        for img, _ in samples:
            f.write(img)
    with gzip.GzipFile(out_dir / f"{prefix}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for _, label in samples))


def main():
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    dst.mkdir(parents=True, exist_ok=True)
    digits = [load_digit(src / f"{d}.json") for d in range(10)]
    train = [imgs[: int(0.8 * len(imgs))] for imgs in digits]
    test = [imgs[int(0.8 * len(imgs)):] for imgs in digits]
    write_split(dst, "train", interleave(train))
    write_split(dst, "t10k", interleave(test))


if __name__ == "__main__":
    main()
