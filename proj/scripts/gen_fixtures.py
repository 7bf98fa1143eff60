#!/usr/bin/env python3
#
# Copyright 2026 The augscore Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Regenerates the synthetic fixtures under fixtures/ (deterministic)."""

import json
import pathlib
import random

import os
import sys

ROOT = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else (
    pathlib.Path(__file__).resolve().parent.parent / "fixtures")
N_HIGH = int(os.environ.get("N_HIGH", 4))
N_LOW1 = int(os.environ.get("N_LOW1", 1))
NOISE = float(os.environ.get("NOISE", 0.1))

SHARED = ["ice", "water", "cup", "warm", "cold", "room", "table", "change",
          "melts", "liquid", "solid", "temperature", "heat", "minutes", "sample"]
LOW = ["sun", "because", "gets", "turns", "disappears", "wet", "puddle", "goes",
       "away", "bigger", "smaller", "color", "shiny", "quickly", "soft"]
HIGH = ["particles", "molecules", "energy", "transfer", "kinetic", "vibrate",
        "faster", "bonds", "break", "spread", "thermal", "absorb", "collide",
        "motion", "apart"]
GLUE = ["the", "a", "it", "is", "and", "to", "of", "in", "when", "so"]


def response(rng, label):
    if label == "1":
        words = rng.sample(HIGH, N_HIGH) + rng.sample(LOW, N_LOW1) + rng.sample(SHARED, 4)
    else:
        words = rng.sample(LOW, 3) + rng.sample(SHARED, 4)
        if rng.random() < NOISE:
            words += rng.sample(HIGH, 1)
    words += rng.sample(GLUE, 3)
    rng.shuffle(words)
    cut = rng.randint(3, len(words) - 3)
    first = " ".join(words[:cut])
    second = " ".join(words[cut:])
    return first[0].upper() + first[1:] + ", " + second + "."


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    rng = random.Random(266)
    rows = []
    labels = ["0"] * 193 + ["1"] * 73
    rng.shuffle(labels)
    for i, label in enumerate(labels):
        rows.append({"id": f"r{i + 1:03d}", "text": response(rng, label), "label": label})
    write_jsonl(ROOT / "synthetic_imbalanced.jsonl", rows)

    gold = [{"id": f"g{i + 1:03d}", "text": response(rng, "1"), "label": "1",
             "source": "gold_standard"} for i in range(140)]
    write_jsonl(ROOT / "gold_standard_pool.jsonl", gold)


if __name__ == "__main__":
    main()
