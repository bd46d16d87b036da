// Copyright 2026 The Spanedit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "support/toy_tasks.h"

#include <algorithm>
#include <random>

#include "spanedit/editops.h"

namespace spanedit::testing {
namespace {

const std::vector<std::string> kConsonantNouns = {
    "cat", "dog", "man", "car", "tree", "book",
    "sun", "hat", "pen", "cup", "box", "bed"};
const std::vector<std::string> kVowelNouns = {"apple", "egg", "ice", "owl",
                                              "urn",   "elk", "oak", "ant"};
const std::vector<std::string> kFillers = {"saw", "near", "and", "has",
                                           "with", "likes"};

// Swaps the first two letters: "dog" -> "odg".
std::string Misspell(const std::string& word) {
  std::string out = word;
  std::swap(out[0], out[1]);
  return out;
}

bool IsNoun(const std::string& w) {
  return std::find(kConsonantNouns.begin(), kConsonantNouns.end(), w) !=
             kConsonantNouns.end() ||
         std::find(kVowelNouns.begin(), kVowelNouns.end(), w) !=
             kVowelNouns.end();
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int Uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  bool Coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  const T& Pick(const std::vector<T>& v) {
    return v[Uniform(0, static_cast<int>(v.size()) - 1)];
  }

  // "the dog saw an apple near a cat ." with `phrases` noun phrases.
  std::vector<std::string> Sentence(int phrases) {
    std::vector<std::string> s;
    for (int i = 0; i < phrases; ++i) {
      if (i > 0) s.push_back(Pick(kFillers));
      const bool vowel = Coin(0.4);
      const std::string& noun = vowel ? Pick(kVowelNouns) : Pick(kConsonantNouns);
      s.push_back(Coin(0.5) ? "the" : (vowel ? "an" : "a"));
      s.push_back(noun);
    }
    s.push_back(".");
    return s;
  }

 private:
  std::mt19937_64 rng_;
};

// Indices of nouns in `s`.
std::vector<int> NounPositions(const std::vector<std::string>& s) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    if (IsNoun(s[i])) out.push_back(i);
  }
  return out;
}

// Misspells nouns at `positions` (ascending) in a copy of `s`.
std::vector<std::string> WithTypos(std::vector<std::string> s,
                                   const std::vector<int>& positions) {
  for (int p : positions) s[p] = Misspell(s[p]);
  return s;
}

// Chooses `count` noun positions at least two tokens apart.
std::vector<int> SpreadNouns(Gen& gen, const std::vector<std::string>& s,
                             int count) {
  std::vector<int> nouns = NounPositions(s);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<int> chosen;
    std::vector<int> pool = nouns;
    while (static_cast<int>(chosen.size()) < count && !pool.empty()) {
      const int k = gen.Uniform(0, static_cast<int>(pool.size()) - 1);
      chosen.push_back(pool[k]);
      pool.erase(pool.begin() + k);
    }
    std::sort(chosen.begin(), chosen.end());
    bool ok = static_cast<int>(chosen.size()) == count;
    for (std::size_t i = 1; ok && i < chosen.size(); ++i) {
      ok = chosen[i] - chosen[i - 1] >= 2;
    }
    if (ok) return chosen;
  }
  return {};
}

}  // namespace

std::vector<ToyPair> RuleEditCorpus(int size, std::uint64_t seed) {
  Gen gen(seed);
  std::vector<ToyPair> pairs;
  while (static_cast<int>(pairs.size()) < size) {
    std::vector<std::string> tgt = gen.Sentence(gen.Uniform(2, 3));
    std::vector<std::string> src = tgt;
    const int kind = gen.Uniform(0, 5);
    if (kind == 0) {
      // identity
    } else if (kind <= 2) {
      // "an apple" written as "a apple"
      std::vector<int> spots;
      for (int i = 0; i < static_cast<int>(src.size()); ++i) {
        if (src[i] == "an") spots.push_back(i);
      }
      if (spots.empty()) continue;
      src[gen.Pick(spots)] = "a";
    } else if (kind == 3) {
      // doubled filler
      std::vector<int> spots;
      for (int i = 0; i < static_cast<int>(src.size()); ++i) {
        if (std::find(kFillers.begin(), kFillers.end(), src[i]) !=
            kFillers.end()) {
          spots.push_back(i);
        }
      }
      if (spots.empty()) continue;
      const int at = gen.Pick(spots);
      src.insert(src.begin() + at, src[at]);
    } else {
      src.pop_back();  // missing period
    }
    pairs.push_back({std::move(src), std::move(tgt), {}});
  }
  return pairs;
}

std::vector<ToyPair> NoisyTaggedCorpus(int size, std::uint64_t seed) {
  Gen gen(seed);
  std::vector<ToyPair> pairs;
  while (static_cast<int>(pairs.size()) < size) {
    const std::vector<std::string> clean = gen.Sentence(gen.Uniform(2, 3));
    // Build source and target left to right, tagging each changed region.
    std::vector<std::string> src, tgt, tags;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const std::string& w = clean[i];
      if (w == "an" && gen.Coin(0.35)) {
        src.push_back("a");
        tgt.push_back("an");
        tags.push_back("DET");
      } else if (w == "the" && gen.Coin(0.2)) {
        // Noise: a redundant "the" that the reference drops half the time.
        src.push_back("the");
        tgt.push_back("the");
        src.push_back("the");
        if (gen.Coin(0.5)) {
          tags.push_back("DET");
        } else {
          tgt.push_back("the");
        }
        // the actual article follows
        src.push_back(clean[i + 1]);
        tgt.push_back(clean[i + 1]);
        ++i;
      } else if (IsNoun(w) && gen.Coin(0.3)) {
        src.push_back(Misspell(w));
        tgt.push_back(w);
        tags.push_back("SPELL");
      } else {
        src.push_back(w);
        tgt.push_back(w);
        if (i + 1 < clean.size() && IsNoun(w) && clean[i + 1] != "." &&
            gen.Coin(0.1)) {
          // Noise: an optional comma after a noun.
          tgt.push_back(",");
          tags.push_back("PUNCT");
        }
      }
    }
    if (CountChangedRegions(Ids(ToyVocabulary(), src),
                            Ids(ToyVocabulary(), tgt)) !=
        static_cast<int>(tags.size())) {
      continue;  // adjacent changes merged; keep annotations exact
    }
    pairs.push_back({std::move(src), std::move(tgt), std::move(tags)});
  }
  return pairs;
}

std::vector<ToyPair> LeftmostFixCorpus(int size, std::uint64_t seed) {
  Gen gen(seed);
  std::vector<ToyPair> pairs;
  while (static_cast<int>(pairs.size()) < size) {
    const std::vector<std::string> clean = gen.Sentence(gen.Uniform(2, 3));
    const int errors = gen.Uniform(0, 2);
    const std::vector<int> at = SpreadNouns(gen, clean, errors);
    if (static_cast<int>(at.size()) != errors) continue;
    std::vector<std::string> src = WithTypos(clean, at);
    std::vector<int> rest(at.begin() + (errors > 0 ? 1 : 0), at.end());
    pairs.push_back({std::move(src), WithTypos(clean, rest), {}});
  }
  return pairs;
}

ToyPair MultiErrorPair(int errors, std::uint64_t seed) {
  Gen gen(seed);
  while (true) {
    const std::vector<std::string> clean = gen.Sentence(3);
    const std::vector<int> at = SpreadNouns(gen, clean, errors);
    if (static_cast<int>(at.size()) != errors) continue;
    return {WithTypos(clean, at), clean, {}};
  }
}

std::vector<ToyPair> HighCopyCorpus(int size, std::uint64_t seed) {
  Gen gen(seed);
  std::vector<ToyPair> pairs;
  while (static_cast<int>(pairs.size()) < size) {
    std::vector<std::string> clean = gen.Sentence(gen.Uniform(7, 9));
    if (clean.size() < 24 || clean.size() > 28) continue;
    const std::vector<int> at = SpreadNouns(gen, clean, 1);
    if (at.empty()) continue;
    pairs.push_back({WithTypos(clean, at), clean, {}});
  }
  return pairs;
}

Vocabulary ToyVocabulary() {
  std::vector<std::string> words = {"the", "a", "an", ".", ","};
  for (const auto* list : {&kConsonantNouns, &kVowelNouns}) {
    for (const auto& w : *list) {
      words.push_back(w);
      words.push_back(Misspell(w));
    }
  }
  words.insert(words.end(), kFillers.begin(), kFillers.end());
  return Vocabulary(words);
}

std::vector<TokenId> Ids(const Vocabulary& vocab,
                         const std::vector<std::string>& words) {
  return vocab.Encode(words);
}

std::vector<TrainExample> MakeExamples(const std::vector<ToyPair>& pairs,
                                       const Vocabulary& vocab,
                                       const TagSet& tagset) {
  std::vector<TrainExample> out;
  for (const auto& p : pairs) {
    std::optional<std::vector<TagId>> tags;
    if (!p.region_tags.empty()) {
      tags.emplace();
      for (const auto& t : p.region_tags) tags->push_back(tagset.Lookup(t));
    }
    out.push_back(MakeExample(SourceSequence(Ids(vocab, p.source)),
                              TargetSequence{Ids(vocab, p.target)}, tags,
                              tagset));
  }
  return out;
}

ModelConfig ToyConfig(const Vocabulary& vocab, const TagSet& tagset,
                      ModelMode mode) {
  ModelConfig c;
  c.vocab_size = static_cast<int>(vocab.size());
  c.tagset_size = static_cast<int>(tagset.size());
  c.mode = mode;
  return c;
}

double GreedyExactMatch(const EditModel& model,
                        const std::vector<TrainExample>& examples,
                        const DecodeParams& params) {
  int hits = 0;
  for (const auto& ex : examples) {
    try {
      hits += GreedyDecode(model, ex.source, params).output == ex.target;
    } catch (const SearchError&) {
      // an unfinished search counts as a miss
    }
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

int TrainUntil(EditModel& model, const std::vector<TrainExample>& examples,
               int max_steps, int chunk, double target_rate,
               std::uint64_t seed, double* final_rate) {
  Trainer trainer(model, examples, OptimizerConfig{}, seed);
  DecodeParams greedy;
  greedy.beam_size = 1;
  double rate = 0;
  while (trainer.steps_done() < max_steps) {
    trainer.Run(std::min(chunk, max_steps - trainer.steps_done()));
    rate = GreedyExactMatch(model, examples, greedy);
    if (rate >= target_rate) break;
  }
  if (final_rate != nullptr) *final_rate = rate;
  return trainer.steps_done();
}

}  // namespace spanedit::testing
