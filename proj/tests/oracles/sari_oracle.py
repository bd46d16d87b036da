# Copyright 2026 The Spanedit Authors.
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

"""Reference SARI used to freeze the C++ test fixtures.

Run: python3 tests/oracles/sari_oracle.py [--random N]
"""

import random
import sys
from collections import Counter
from fractions import Fraction


def grams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def scale(c, k):
    return Counter({g: v * k for g, v in c.items()})


def mean_ratio(num, den, keys):
    keys = list(keys)
    if not keys:
        return Fraction(1)
    return sum(Fraction(num[g], den[g]) for g in keys) / len(keys)


def f1(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else Fraction(0)


def order(src, hyp, refs, n):
    k = len(refs)
    s, c = scale(grams(src, n), k), scale(grams(hyp, n), k)
    r = Counter()
    for ref in refs:
        r.update(grams(ref, n))

    added = set(c) - set(s)
    good = added & set(r)
    addable = set(r) - set(s)
    add_p = Fraction(len(good), len(added)) if added else Fraction(1)
    add_r = Fraction(len(good), len(addable)) if addable else Fraction(1)

    keep = s & c
    keep_good = keep & r
    keep_all = s & r
    keep_p = mean_ratio(keep_good, keep, keep)
    keep_r = mean_ratio(keep_good, keep_all, keep_all)

    dele = s - c
    del_good = dele - r
    del_p = mean_ratio(del_good, dele, dele)
    return f1(add_p, add_r), f1(keep_p, keep_r), del_p


def sari(src, hyp, refs):
    parts = [order(src, hyp, refs, n) for n in range(1, 5)]
    add, keep, dele = (sum(p[i] for p in parts) / 4 for i in range(3))
    return add, keep, dele, (add + keep + dele) / 3


CASES = [
    ("a b c d", "a b c d", ["a x c d"]),
    ("a b c d", "a x c d", ["a x c d"]),
    ("a b c d", "a b c d", ["a b c d"]),
    ("the cat sat on the mat", "the cat sat on mat",
     ["the cat sat on mat", "a cat sat on the mat"]),
    ("a b a b", "a c", ["a c", "b a c"]),
]

def random_cases(count, seed=2026):
    rng = random.Random(seed)
    words = "a b c d e f".split()

    def sentence():
        return " ".join(rng.choice(words) for _ in range(rng.randint(1, 7)))

    for _ in range(count):
        yield sentence(), sentence(), [sentence()
                                       for _ in range(rng.randint(1, 3))]


def emit_cxx(cases):
    for src, hyp, refs in cases:
        score = sari(src.split(), hyp.split(), [r.split() for r in refs])[3]
        ref_list = ", ".join(f'"{r}"' for r in refs)
        print(f'    {{"{src}", "{hyp}", {{{ref_list}}}, '
              f'{float(100 * score):.17g}}},')


if __name__ == "__main__":
    if len(sys.argv) == 3 and sys.argv[1] == "--random":
        emit_cxx(random_cases(int(sys.argv[2])))
        sys.exit(0)
    for src, hyp, refs in CASES:
        add, keep, dele, score = sari(src.split(), hyp.split(),
                                      [r.split() for r in refs])
        print(f"{src!r} {hyp!r} {refs!r}")
        print(f"  add={float(add):.17g} keep={float(keep):.17g} "
              f"del={float(dele):.17g} sari100={float(100 * score):.17g}")
