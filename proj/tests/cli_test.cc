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
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.h"
#include "json.hpp"

namespace spanedit::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Result {
  int code = 0;
  std::string out, err;
};

Result RunCli(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "spanedit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = Run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

constexpr char kPairs[] =
    "Less channels means less choices .\tFewer channels means fewer choices .\n"
    "he go home\the goes home .\n"
    "the cat sat\tthe cat sat\n"
    "a an apple\tan apple\n";

constexpr char kTinyConfig[] =
    R"({"model": {"hidden_units": 8, "encoder_layers": 1,
                  "decoder_a_layers": 1, "decoder_b_layers": 1,
                  "attention_heads": 2, "filter_units": 16,
                  "max_positions": 16},
        "optimizer": {"learning_rate": 0.01, "batch_size": 2},
        "steps": 20})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("spanedit_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    Write("pairs.tsv", kPairs);
    Write("tiny.json", kTinyConfig);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return Path(name);
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(RunCli({}).code, kExitUsage);
  EXPECT_EQ(RunCli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(RunCli({"extract"}).code, kExitUsage);  // --input missing
  EXPECT_EQ(RunCli({"extract", "--input", Path("pairs.tsv"), "--bogus"}).code,
            kExitUsage);
  EXPECT_EQ(RunCli({"extract", "--input", Path("pairs.tsv"), "--tagset",
                    "no-such-tagset"})
                .code,
            kExitUsage);
  const Result help = RunCli({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("extract"), std::string::npos);
}

TEST_F(CliTest, ExtractThenApplyRestoresTargets) {
  const Result ex = RunCli({"extract", "--input", Path("pairs.tsv"), "--output",
                            Path("edits.jsonl")});
  ASSERT_EQ(ex.code, kExitOk) << ex.err;
  Write("src.txt",
        "Less channels means less choices .\nhe go home\nthe cat sat\n"
        "a an apple\n");
  const Result ap = RunCli({"apply", "--edits", Path("edits.jsonl"), "--src",
                            Path("src.txt")});
  ASSERT_EQ(ap.code, kExitOk) << ap.err;
  EXPECT_EQ(ap.out,
            "Fewer channels means fewer choices .\nhe goes home .\n"
            "the cat sat\nan apple\n");
  // Same thing through stdin.
  const Result piped = RunCli({"apply", "--edits", "-"}, Slurp(Path("edits.jsonl")));
  EXPECT_EQ(piped.code, kExitOk);
  EXPECT_EQ(piped.out, ap.out);
  Write("other.txt", "x\ny\nz\nw\n");
  EXPECT_EQ(RunCli({"apply", "--edits", Path("edits.jsonl"), "--src",
                    Path("other.txt")})
                .code,
            kExitData);
}

TEST_F(CliTest, BadInputsExitTwoAndNameTheLine) {
  EXPECT_EQ(RunCli({"extract", "--input", Path("missing.tsv")}).code, kExitData);
  Write("bad.tsv", "a b\ta c\nno tab here\n");
  const Result bad = RunCli({"extract", "--input", Path("bad.tsv")});
  EXPECT_EQ(bad.code, kExitData);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;

  RunCli({"extract", "--input", Path("pairs.tsv"), "--output", Path("e.jsonl")});
  std::string lines = Slurp(Path("e.jsonl"));
  lines.insert(lines.find('\n') + 1, "{\"src\": [\"x\"], \"edits\": 7}\n");
  Write("broken.jsonl", lines);
  const Result ap = RunCli({"apply", "--edits", Path("broken.jsonl")});
  EXPECT_EQ(ap.code, kExitData);
  EXPECT_NE(ap.err.find("line 2"), std::string::npos) << ap.err;
}

TEST_F(CliTest, ScoreFixtures) {
  Write("src.txt", "a b c d\na b c d\n");
  Write("ref.txt", "a x c d\na x c d\n");
  Write("hyp.txt", "a x c d\na b c d\n");
  const Result r = RunCli({"score", "--hyp", Path("hyp.txt"), "--ref",
                           Path("ref.txt"), "--src", Path("src.txt"),
                           "--metrics", "ser,exact,sari,span_prf", "--json", "-"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json report = json::parse(r.out);
  ASSERT_EQ(report.size(), 4u);
  EXPECT_EQ(report[0]["metric"], "ser");
  EXPECT_DOUBLE_EQ(report[0]["value"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(report[1]["value"].get<double>(), 0.5);
  EXPECT_NEAR(report[2]["value"].get<double>(),
              (100.0 + 44.642857142857146) / 2, 1e-9);
  // Gold has two substitutions, the hypothesis gets one of them.
  EXPECT_EQ(report[3]["true_positives"], 1);
  EXPECT_EQ(report[3]["hyp_count"], 1);
  EXPECT_EQ(report[3]["gold_count"], 2);

  const Result table = RunCli({"score", "--hyp", Path("hyp.txt"), "--ref",
                               Path("ref.txt")});
  EXPECT_EQ(table.code, kExitOk);
  EXPECT_NE(table.out.find("ser"), std::string::npos);
  EXPECT_NE(table.out.find("exact"), std::string::npos);

  EXPECT_EQ(RunCli({"score", "--hyp", Path("hyp.txt"), "--ref", Path("ref.txt"),
                    "--metrics", "bleu"})
                .code,
            kExitUsage);
  Write("short.txt", "a x c d\n");
  EXPECT_EQ(RunCli({"score", "--hyp", Path("hyp.txt"), "--ref",
                    Path("short.txt")})
                .code,
            kExitData);
}

TEST_F(CliTest, TrainIsDeterministic) {
  for (const char* name : {"a", "b"}) {
    const Result r = RunCli({"train", "--config", Path("tiny.json"), "--seed",
                             "7", "--input", Path("pairs.tsv"), "--checkpoint",
                             Path(std::string(name) + ".ckpt")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  const std::string a = Slurp(Path("a.ckpt.loss.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "step,tag_ce,span_ce,replacement_ce,total");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 21);
  EXPECT_EQ(a, Slurp(Path("b.ckpt.loss.csv")));
  EXPECT_EQ(Slurp(Path("a.ckpt")), Slurp(Path("b.ckpt")));

  RunCli({"train", "--config", Path("tiny.json"), "--seed", "8", "--input",
          Path("pairs.tsv"), "--checkpoint", Path("c.ckpt")});
  EXPECT_NE(a, Slurp(Path("c.ckpt.loss.csv")));
}

TEST_F(CliTest, TrainConfigErrors) {
  Write("extra.json", R"({"steps": 1, "schedule": "cosine"})");
  EXPECT_EQ(RunCli({"train", "--config", Path("extra.json"), "--input",
                    Path("pairs.tsv"), "--checkpoint", Path("x.ckpt")})
                .code,
            kExitData);
  EXPECT_EQ(RunCli({"train", "--config", Path("tiny.json"), "--input",
                    Path("pairs.tsv"), "--checkpoint", Path("x.ckpt"),
                    "--steps", "-1"})
                .code,
            kExitUsage);
}

TEST_F(CliTest, DecodeIsDeterministicAndChecksInputs) {
  ASSERT_EQ(RunCli({"train", "--config", Path("tiny.json"), "--input",
                    Path("pairs.tsv"), "--checkpoint", Path("m.ckpt"),
                    "--steps", "40"})
                .code,
            kExitOk);
  Write("src.txt", "he go home\nthe cat sat\n");
  const std::vector<std::string> args = {
      "decode", "--checkpoint", Path("m.ckpt"), "--input", Path("src.txt"),
      "--beam", "2", "--max-steps", "60"};
  const Result a = RunCli(args);
  const Result b = RunCli(args);
  ASSERT_EQ(a.code, b.code);
  EXPECT_EQ(a.out, b.out);
  if (a.code == kExitOk) {
    EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 2);
  } else {
    // An undertrained model may fail to finish; that is a search error.
    EXPECT_EQ(a.code, kExitNumerical) << a.err;
  }

  EXPECT_EQ(RunCli({"decode", "--checkpoint", Path("none.ckpt"), "--input",
                    Path("src.txt")})
                .code,
            kExitData);
  EXPECT_EQ(RunCli({"decode", "--checkpoint", Path("m.ckpt"), "--input",
                    Path("src.txt"), "--mode", "fullseq"})
                .code,
            kExitUsage);
  EXPECT_EQ(RunCli({"decode", "--checkpoint", Path("m.ckpt"), "--input",
                    Path("src.txt"), "--beam", "0"})
                .code,
            kExitUsage);
  EXPECT_EQ(RunCli({"decode", "--checkpoint", Path("m.ckpt"), "--input",
                    Path("src.txt"), "--oracle-tags"})
                .code,
            kExitUsage);
}

TEST_F(CliTest, BenchRejectsMismatchedModels) {
  ASSERT_EQ(RunCli({"train", "--config", Path("tiny.json"), "--input",
                    Path("pairs.tsv"), "--checkpoint", Path("e.ckpt"),
                    "--steps", "1"})
                .code,
            kExitOk);
  EXPECT_EQ(RunCli({"bench", "--edit-checkpoint", Path("e.ckpt"),
                    "--fullseq-checkpoint", Path("e.ckpt"), "--input",
                    Path("pairs.tsv")})
                .code,
            kExitUsage);
  EXPECT_EQ(RunCli({"bench", "--edit-checkpoint", Path("e.ckpt"),
                    "--fullseq-checkpoint", Path("e.ckpt"), "--input",
                    Path("pairs.tsv"), "--buckets", "5,2"})
                .code,
            kExitUsage);
}

}  // namespace
}  // namespace spanedit::cli
