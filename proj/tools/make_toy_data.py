# Copyright 2026 The attncap Authors. All Rights Reserved.
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

"""Writes the bundled toy dataset into data/toy.

Ten 16x32 feature grids (one per image), one caption each, a compound
lexicon, and a labelled grammar set. Output is byte-for-byte stable.

    python3 tools/make_toy_data.py [out_dir]
"""

import random
import struct
import sys
from pathlib import Path

REGIONS, DIM = 16, 32

CAPTIONS = [
    "ایک آدمی سڑک پر یہاں وہاں چل رہا ہے۔",
    "دو بچے پارک میں کھیل رہے ہیں۔",
    "ایک کتا گھاس پر بیٹھا ہے۔",
    "ایک عورت کھانا پکا رہی ہے۔",
    "لڑکا صبح صبح سائیکل چلا رہا ہے۔",
    "ایک بلی دیوار پر سو رہی ہے۔",
    "لوگ بازار میں خریداری کر رہے ہیں۔",
    "ایک پرندہ درخت پر بیٹھا ہے۔",
    "دو آدمی فٹبال کھیل رہے ہیں۔",
    "ایک لڑکی کتاب پڑھ رہی ہے۔",
]

LEXICON = ["یہاں وہاں", "صبح صبح"]

# extra well-formed sentences for the grammar set
MORE = [
    "ایک بچہ پانی پی رہا ہے۔",
    "دو عورتیں باتیں کر رہی ہیں۔",
    "ایک آدمی گاڑی چلا رہا ہے۔",
    "بچے اسکول جا رہے ہیں۔",
    "ایک لڑکا کرکٹ کھیل رہا ہے۔",
    "ایک گائے کھیت میں کھڑی ہے۔",
]


def grid(index):
    rng = random.Random(1000 + index)
    vals = [rng.uniform(-1.0, 1.0) for _ in range(REGIONS * DIM)]
    return struct.pack("<4sIII", b"FGRD", 1, REGIONS, DIM) + struct.pack(
        "<%dd" % len(vals), *vals)


def scramble(sentence, rng):
    # verb-final order broken: words reversed, punctuation kept at the end
    words = sentence.rstrip("۔").split(" ")
    bad = list(reversed(words))
    if rng.random() < 0.5 and len(bad) > 2:
        bad[1], bad[2] = bad[2], bad[1]
    return " ".join(bad) + "۔"


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/toy")
    (out / "features").mkdir(parents=True, exist_ok=True)
    lines = []
    for i, text in enumerate(CAPTIONS, start=1):
        image_id = "img%02d" % i
        (out / "features" / (image_id + ".fgrd")).write_bytes(grid(i))
        lines.append("%s\t0\t%s\n" % (image_id, text))
    (out / "captions.tsv").write_text("".join(lines), encoding="utf-8")
    (out / "lexicon.txt").write_text("\n".join(LEXICON) + "\n", encoding="utf-8")

    rng = random.Random(42)
    rows = []
    for k, text in enumerate(CAPTIONS + MORE, start=1):
        rows.append("g%02da\t1\t%s\n" % (k, text))
        rows.append("g%02db\t0\t%s\n" % (k, scramble(text, rng)))
    (out / "grammar.tsv").write_text("".join(rows), encoding="utf-8")


if __name__ == "__main__":
    main()
