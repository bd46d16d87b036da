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

#include <cmath>
#include <limits>
#include <memory>

#include <gtest/gtest.h>

#include "spanedit/decoder.h"
#include "spanedit/editops.h"
#include "support/gradcheck.h"
#include "support/toy_tasks.h"

namespace spanedit {
namespace {

using testing::Ids;
using testing::MakeExamples;
using testing::RuleEditCorpus;
using testing::ToyConfig;
using testing::ToyVocabulary;

DecodeParams Plain(int beam) {
  DecodeParams p;
  p.beam_size = beam;
  return p;
}

int CountOps(const EditSequence& e, TagId tag) {
  int n = 0;
  for (const auto& op : e.ops) n += op.tag == tag;
  return n;
}

// One toy edit model trained on a small rule corpus, shared by the suite.
class TrainedDecoderTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    vocab_ = new Vocabulary(ToyVocabulary());
    const TagSet tags = BuiltinTagSet("trivial");
    train_ = new std::vector<TrainExample>(
        MakeExamples(RuleEditCorpus(32, 7), *vocab_, tags));
    model_ = new EditModel(ToyConfig(*vocab_, tags, ModelMode::kEdit), 3);
    testing::TrainUntil(*model_, *train_, 1500, 100, 1.0, 5);
    inputs_ = new std::vector<SourceSequence>();
    for (const auto& pair : RuleEditCorpus(50, 99)) {
      inputs_->emplace_back(Ids(*vocab_, pair.source));
    }
  }
  static void TearDownTestSuite() {
    delete inputs_;
    delete model_;
    delete train_;
    delete vocab_;
  }

  static Vocabulary* vocab_;
  static std::vector<TrainExample>* train_;
  static EditModel* model_;
  static std::vector<SourceSequence>* inputs_;
};

Vocabulary* TrainedDecoderTest::vocab_ = nullptr;
std::vector<TrainExample>* TrainedDecoderTest::train_ = nullptr;
EditModel* TrainedDecoderTest::model_ = nullptr;
std::vector<SourceSequence>* TrainedDecoderTest::inputs_ = nullptr;

TEST_F(TrainedDecoderTest, ReproducesTrainingTargets) {
  int ok = 0;
  for (const auto& ex : *train_) {
    const auto hyps = BeamDecode(*model_, ex.source, Plain(4));
    ok += hyps.front().output == ex.target;
  }
  EXPECT_GE(ok, 31) << ok << "/32";
}

TEST_F(TrainedDecoderTest, BeamOneMatchesGreedy) {
  for (const auto& src : *inputs_) {
    const auto beam = BeamDecode(*model_, src, Plain(1));
    ASSERT_EQ(beam.size(), 1u);
    const Hypothesis greedy = GreedyDecode(*model_, src, Plain(1));
    EXPECT_EQ(beam[0].edits, greedy.edits);
    EXPECT_NEAR(beam[0].score, greedy.score, 1e-9);
  }
}

TEST_F(TrainedDecoderTest, EveryHypothesisIsValidAndRescores) {
  for (bool shortcuts : {false, true}) {
    DecodeParams p = Plain(4);
    p.shortcuts = shortcuts;
    p.lambda_tag = 0.75;
    p.lambda_span = 1.25;
    for (const auto& src : *inputs_) {
      for (const auto& h : BeamDecode(*model_, src, p)) {
        const ValidationReport report = Validate(h.edits, src.length());
        EXPECT_TRUE(report.valid()) << report.ToString();
        EXPECT_EQ(ApplyEdits(src, h.edits), h.output);
        EXPECT_NEAR(h.raw_score, ScoreEdits(*model_, src, h.edits, p), 1e-9);
        EXPECT_EQ(h.score, h.raw_score);  // alpha 0, no identity penalty
      }
    }
  }
}

TEST_F(TrainedDecoderTest, UnitWeightsGiveTeacherForcedLogProb) {
  for (const auto& src : *inputs_) {
    const auto h = BeamDecode(*model_, src, Plain(2)).front();
    double sum = 0;
    for (const auto& s : model_->TeacherForcedLogProbs(src, h.edits)) {
      sum += s.tag + s.span + s.replacement;
    }
    EXPECT_NEAR(h.score, sum, 1e-9);
  }
}

TEST_F(TrainedDecoderTest, DoublingLambdasKeepsArgmax) {
  for (const auto& src : *inputs_) {
    DecodeParams p = Plain(3);
    p.lambda_tag = 0.5;
    p.lambda_span = 1.5;
    p.lambda_replacement = 1.0;
    DecodeParams q = p;
    q.lambda_tag *= 2;
    q.lambda_span *= 2;
    q.lambda_replacement *= 2;
    const auto a = BeamDecode(*model_, src, p).front();
    const auto b = BeamDecode(*model_, src, q).front();
    EXPECT_EQ(a.edits, b.edits);
    EXPECT_NEAR(b.score, 2 * a.score, 1e-9);
  }
}

TEST_F(TrainedDecoderTest, WiderBeamNeverScoresLower) {
  int violations = 0;
  for (const auto& src : *inputs_) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int beam = 1; beam <= 6; ++beam) {
      const double best = BeamDecode(*model_, src, Plain(beam)).front().score;
      if (best < prev - 1e-12) ++violations;
      prev = std::max(prev, best);
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST_F(TrainedDecoderTest, EvaluationCountsAtBeamOne) {
  for (const auto& src : *inputs_) {
    DecodeStats plain, fast;
    const auto h = BeamDecode(*model_, src, Plain(1), &plain).front();
    const int n = static_cast<int>(h.edits.ops.size()) - 1;
    EXPECT_EQ(plain.total(), 3 * (n + 1));
    EXPECT_EQ(plain.tag_evaluations, n + 1);

    DecodeParams p = Plain(1);
    p.shortcuts = true;
    const auto g = BeamDecode(*model_, src, p, &fast).front();
    const int m = static_cast<int>(g.edits.ops.size()) - 1;
    const int selfs = CountOps(g.edits, kSelfTag);
    // Each SELF step costs 2 evaluations, the EOS step 1, others 3.
    EXPECT_EQ(fast.total(), 3 * (m + 1) - selfs - 2);
    EXPECT_EQ(fast.span_evaluations, m);
    EXPECT_EQ(fast.replacement_evaluations, m - selfs);
  }
}

TEST_F(TrainedDecoderTest, RoundsStayUnderTheCap) {
  for (const auto& src : *inputs_) {
    DecodeStats stats;
    BeamDecode(*model_, src, Plain(4), &stats);
    EXPECT_LE(stats.rounds, Plain(4).EffectiveMaxSteps(src.length()));
    EXPECT_EQ(stats.passes, 1);
  }
}

TEST_F(TrainedDecoderTest, OnePassRefinementIsBeamDecode) {
  for (const auto& src : *inputs_) {
    const auto a = BeamDecode(*model_, src, Plain(3));
    const auto b = IterativeRefine(*model_, src, Plain(3));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].edits, b[i].edits);
      EXPECT_EQ(a[i].score, b[i].score);
    }
  }
}

TEST_F(TrainedDecoderTest, ZeroIdentityPenaltyDemotesIdentity) {
  // Corrected sentences make the identity the natural first choice.
  int flipped = 0;
  for (const auto& ex : *train_) {
    const SourceSequence src(ex.target.tokens);
    DecodeParams p = Plain(4);
    p.refinement_passes = 2;
    const bool identity_first = IterativeRefine(*model_, src, p).front().identity;
    p.identity_penalty = 0;
    const auto hyps = IterativeRefine(*model_, src, p);
    if (hyps.size() > 1) EXPECT_FALSE(hyps.front().identity);
    for (const auto& h : hyps) {
      if (h.identity) {
        EXPECT_EQ(h.score, -std::numeric_limits<double>::infinity());
      }
    }
    flipped += identity_first && !hyps.front().identity;
  }
  EXPECT_GT(flipped, 0) << "the penalty never changed the ranking";
}

TEST_F(TrainedDecoderTest, FullOracleReproducesGold) {
  int ok = 0;
  for (const auto& ex : *train_) {
    const auto c = OracleConstraint::FromEdits(ex.edits, true, true, false);
    const auto hyps = ConstrainedDecode(*model_, ex.source, Plain(4), c);
    EXPECT_EQ(hyps.front().edits.ops.size(), ex.edits.ops.size());
    for (std::size_t i = 0; i < ex.edits.ops.size(); ++i) {
      EXPECT_EQ(hyps.front().edits.ops[i].tag, ex.edits.ops[i].tag);
      EXPECT_EQ(hyps.front().edits.ops[i].span_end, ex.edits.ops[i].span_end);
    }
    ok += hyps.front().output == ex.target;
  }
  EXPECT_GE(ok, 31);
}

TEST_F(TrainedDecoderTest, OracleConstraintErrors) {
  const auto& ex = train_->front();
  EXPECT_THROW(ConstrainedDecode(*model_, ex.source, Plain(2), {}),
               std::invalid_argument);
  OracleConstraint empty;
  empty.tags = std::vector<TagId>{};
  EXPECT_THROW(ConstrainedDecode(*model_, ex.source, Plain(2), empty),
               std::invalid_argument);
  // A reference without its final EOS label runs out before EOS.
  OracleConstraint cut = OracleConstraint::FromEdits(ex.edits, true, false,
                                                      false);
  cut.tags->pop_back();
  EXPECT_THROW(ConstrainedDecode(*model_, ex.source, Plain(2), cut),
               SearchError);
}

TEST_F(TrainedDecoderTest, ModeChecks) {
  EXPECT_THROW(FullSequenceDecode(*model_, inputs_->front(), Plain(1)),
               std::logic_error);
}

TEST(DecoderSearchErrorTest, NeverEndingModelRaisesWithPartial) {
  const TagSet tags = BuiltinTagSet("trivial");
  EditModel model(testing::TinyConfig(12, static_cast<int>(tags.size()),
                                      ModelMode::kEdit),
                  4);
  // Push all tag mass onto NON_SELF so no hypothesis reaches EOS in time.
  auto& b = model.parameter("edit/tag_head/b").mutable_value();
  b(0, kEosTag) = -1e4;
  b(0, kSelfTag) = -1e4;
  b(0, 2) = 1e4;
  const SourceSequence src({4, 5, 6});
  try {
    BeamDecode(model, src, Plain(2));
    FAIL() << "expected SearchError";
  } catch (const SearchError& e) {
    EXPECT_FALSE(e.best_partial().ops.empty());
    EXPECT_EQ(e.best_partial().source_len, 3);
  }
  EXPECT_THROW(GreedyDecode(model, src, Plain(1)), SearchError);
}

TEST(FullSequenceDecodeTest, BeamOneIsGreedyAndCountsTokens) {
  EditModel model(testing::TinyConfig(12, 3, ModelMode::kFullSequence), 6);
  // Make EOS likely enough that searches end well inside the cap.
  model.parameter("replacement_head/b").mutable_value()(0, kEosId) = 3;
  for (int k = 0; k < 20; ++k) {
    const SourceSequence src({4 + k % 8, 5, 4 + (k * 3) % 8});
    DecodeStats stats;
    const auto beam = FullSequenceDecode(model, src, Plain(1), &stats);
    const Hypothesis greedy = GreedyDecode(model, src, Plain(1));
    EXPECT_EQ(beam.front().output, greedy.output);
    EXPECT_NEAR(beam.front().score, greedy.score, 1e-9);
    EXPECT_EQ(stats.token_evaluations, beam.front().output.length() + 1);
  }
}

TEST(DecodeParamsTest, ValidationAndDefaults) {
  DecodeParams p;
  EXPECT_NO_THROW(p.Validate());
  EXPECT_EQ(p.EffectiveMaxSteps(5), 42);
  p.max_steps = 20;
  EXPECT_EQ(p.EffectiveMaxSteps(4), 20);
  EXPECT_THROW(p.EffectiveMaxSteps(5), std::invalid_argument);  // < 3(I+2)
  p = DecodeParams{};
  p.beam_size = 0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = DecodeParams{};
  p.lambda_span = -1;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = DecodeParams{};
  p.refinement_passes = 0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

TEST(DecodeParamsTest, JsonRoundTripAndOverrides) {
  DecodeParams p;
  p.beam_size = 12;
  p.lambda_tag = 0.5;
  p.length_norm_alpha = 0.6;
  p.identity_penalty = 0.25;
  p.refinement_passes = 3;
  p.shortcuts = true;
  const DecodeParams q = DecodeParams::FromJson(p.ToJson());
  EXPECT_EQ(q.ToJson(), p.ToJson());
  const DecodeParams r = DecodeParams::FromJson(R"({"beam_size": 2})", p);
  EXPECT_EQ(r.beam_size, 2);
  EXPECT_EQ(r.lambda_tag, 0.5);
  EXPECT_THROW(DecodeParams::FromJson(R"({"beam": 2})"), DataError);
  EXPECT_THROW(DecodeParams::FromJson("[1]"), DataError);
}

TEST(LengthPenaltyTest, Values) {
  EXPECT_DOUBLE_EQ(LengthPenalty(7, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(LengthPenalty(1, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(LengthPenalty(7, 1.0), 2.0);
  EXPECT_NEAR(LengthPenalty(13, 0.5), std::sqrt(3.0), 1e-12);
}

TEST(GridSearchTest, VisitsWholeGridAndKeepsFirstTie) {
  const DecodeParams base;
  const auto flat = GridSearchLambdas(base, [](const DecodeParams&) {
    return 1.0;
  });
  EXPECT_EQ(flat.evaluations, 125);
  EXPECT_EQ(flat.best.lambda_tag, 0.5);
  EXPECT_EQ(flat.best.lambda_span, 0.5);
  EXPECT_EQ(flat.best.lambda_replacement, 0.5);
  const auto peaked = GridSearchLambdas(base, [](const DecodeParams& p) {
    return -std::abs(p.lambda_tag - 1.25) - std::abs(p.lambda_span - 0.75) -
           std::abs(p.lambda_replacement - 1.5);
  });
  EXPECT_EQ(peaked.best.lambda_tag, 1.25);
  EXPECT_EQ(peaked.best.lambda_span, 0.75);
  EXPECT_EQ(peaked.best.lambda_replacement, 1.5);
  EXPECT_EQ(peaked.best_objective, 0.0);
}

}  // namespace
}  // namespace spanedit
