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

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "spanedit/checkpoint.h"
#include "spanedit/editops.h"
#include "spanedit/trainer.h"
#include "support/gradcheck.h"

namespace spanedit {
namespace {

using testing::TinyConfig;

constexpr int kVocab = 12;

std::vector<TrainExample> Corpus() {
  const TagSet tags = BuiltinTagSet("trivial");
  std::vector<TrainExample> out;
  out.push_back(MakeExample(SourceSequence({4, 5, 6}),
                            TargetSequence({4, 9, 6}), std::nullopt, tags));
  out.push_back(MakeExample(SourceSequence({7, 8}), TargetSequence({7, 8}),
                            std::nullopt, tags));
  out.push_back(MakeExample(SourceSequence({5, 6, 7}),
                            TargetSequence({10, 5, 7}), std::nullopt, tags));
  return out;
}

bool SameParameters(const EditModel& a, const EditModel& b) {
  const auto& pa = a.parameters();
  const auto& pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].tensor.value() != pb[i].tensor.value()) return false;
  }
  return true;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("spanedit_trainer_" + std::to_string(::testing::UnitTest::GetInstance()
                                                      ->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& f) const { return path_ / f; }

 private:
  std::filesystem::path path_;
};

TEST(MakeExampleTest, AnchorsLeadingInsertion) {
  const TrainExample ex = MakeExample(SourceSequence({4, 5}),
                                      TargetSequence({9, 4, 5}), std::nullopt,
                                      BuiltinTagSet("trivial"));
  for (const auto& op : ex.edits.ops) EXPECT_GE(op.span_end, 1);
  EXPECT_EQ(ApplyEdits(ex.source, ex.edits), ex.target);
}

TEST(TrainerTest, ZeroStepsLeaveParametersUntouched) {
  EditModel model(TinyConfig(kVocab, 3, ModelMode::kEdit), 5);
  const EditModel before = model.Clone();
  Trainer trainer(model, Corpus(), OptimizerConfig{}, 1);
  EXPECT_TRUE(trainer.Run(0).empty());
  EXPECT_EQ(trainer.steps_done(), 0);
  EXPECT_TRUE(SameParameters(model, before));
}

TEST(TrainerTest, SameSeedSameTrajectory) {
  OptimizerConfig opt;
  opt.batch_size = 2;
  EditModel a(TinyConfig(kVocab, 3, ModelMode::kEdit), 5);
  EditModel b(TinyConfig(kVocab, 3, ModelMode::kEdit), 5);
  const auto ra = Trainer(a, Corpus(), opt, 9).Run(15);
  const auto rb = Trainer(b, Corpus(), opt, 9).Run(15);
  ASSERT_EQ(ra.size(), 15u);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].step, static_cast<int>(i) + 1);
    EXPECT_EQ(ra[i].loss.total, rb[i].loss.total);
  }
  EXPECT_TRUE(SameParameters(a, b));
}

TEST(TrainerTest, LossDecreases) {
  EditModel model(TinyConfig(kVocab, 3, ModelMode::kEdit), 6);
  OptimizerConfig opt;
  opt.learning_rate = 5e-3;
  Trainer trainer(model, Corpus(), opt, 2);
  const auto records = trainer.Run(150);
  EXPECT_LT(records.back().loss.total, 0.5 * records.front().loss.total);
}

TEST(TrainerTest, NonFiniteLossRaisesNumericalError) {
  EditModel model(TinyConfig(kVocab, 3, ModelMode::kEdit), 7);
  model.parameter("edit/tag_head/w").mutable_value()(0, 0) =
      std::numeric_limits<double>::quiet_NaN();
  Trainer trainer(model, Corpus(), OptimizerConfig{}, 3);
  try {
    trainer.Step();
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos)
        << e.what();
  }
}

TEST(TrainerTest, RejectsBadInputs) {
  EditModel model(TinyConfig(kVocab, 3, ModelMode::kEdit), 7);
  EXPECT_THROW(Trainer(model, {}, OptimizerConfig{}, 1), DataError);
  OptimizerConfig opt;
  opt.learning_rate = 0;
  EXPECT_THROW(opt.Validate(), std::invalid_argument);
}

TEST(TrainerTest, LossCsvHasHeaderAndRows) {
  EditModel model(TinyConfig(kVocab, 3, ModelMode::kEdit), 8);
  const auto records = Trainer(model, Corpus(), OptimizerConfig{}, 4).Run(3);
  std::ostringstream csv;
  WriteLossCsv(csv, records);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,tag_ce,span_ce,replacement_ce,total");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.rfind(std::to_string(rows) + ",", 0), 0u) << line;
  }
  EXPECT_EQ(rows, 3);
}

TEST(TrainerTest, FullSequenceModelTrains) {
  EditModel model(TinyConfig(kVocab, 3, ModelMode::kFullSequence), 9);
  OptimizerConfig opt;
  opt.learning_rate = 5e-3;
  const auto records = Trainer(model, Corpus(), opt, 2).Run(100);
  EXPECT_EQ(records.front().loss.tag_ce, 0);
  EXPECT_LT(records.back().loss.total, 0.5 * records.front().loss.total);
}

TEST(CheckpointTest, RoundTripPreservesEverything) {
  TempDir dir;
  const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g", "h"};
  const Vocabulary vocab(words);
  const TagSet tags = BuiltinTagSet("trivial");
  EditModel model(TinyConfig(static_cast<int>(vocab.size()),
                             static_cast<int>(tags.size()), ModelMode::kEdit),
                  12);
  Trainer(model, Corpus(), OptimizerConfig{}, 4).Run(5);
  SaveCheckpoint(dir / "m.ckpt", model, vocab, tags, TokenizeMode::kCharacter,
                 12);
  const Checkpoint ck = LoadCheckpoint(dir / "m.ckpt");
  EXPECT_TRUE(SameParameters(ck.model, model));
  EXPECT_EQ(ck.vocabulary, vocab);
  EXPECT_EQ(ck.tagset, tags);
  EXPECT_EQ(ck.tokenize, TokenizeMode::kCharacter);
  EXPECT_EQ(ck.seed, 12u);
  EXPECT_EQ(ModelConfigToJson(ck.model.config()),
            ModelConfigToJson(model.config()));
}

TEST(CheckpointTest, BadFilesRaiseDataError) {
  TempDir dir;
  EXPECT_THROW(LoadCheckpoint(dir / "missing.ckpt"), DataError);
  {
    std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  }
  EXPECT_THROW(LoadCheckpoint(dir / "junk.ckpt"), DataError);

  const Vocabulary vocab(std::vector<std::string>{"a", "b", "c", "d", "e",
                                                  "f", "g", "h"});
  const EditModel model(TinyConfig(kVocab, 3, ModelMode::kEdit), 1);
  SaveCheckpoint(dir / "ok.ckpt", model, vocab, BuiltinTagSet("trivial"),
                 TokenizeMode::kWhitespace, 1);
  const auto size = std::filesystem::file_size(dir / "ok.ckpt");
  std::filesystem::resize_file(dir / "ok.ckpt", size - 16);
  EXPECT_THROW(LoadCheckpoint(dir / "ok.ckpt"), DataError);
}

TEST(CheckpointTest, ConfigJsonRoundTrip) {
  ModelConfig c = ModelConfig::Base(40, 7);
  c.decoder_b_encoder_attention = true;
  const ModelConfig back = ModelConfigFromJson(ModelConfigToJson(c));
  EXPECT_EQ(ModelConfigToJson(back), ModelConfigToJson(c));
  EXPECT_THROW(ModelConfigFromJson("{not json"), DataError);
}

}  // namespace
}  // namespace spanedit
