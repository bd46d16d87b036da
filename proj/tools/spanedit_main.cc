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

// Sample usage:
//   spanedit extract --input pairs.tsv --tagset errant > edits.jsonl
//   spanedit apply --edits edits.jsonl
//   spanedit train --input pairs.tsv --checkpoint model.ckpt --steps 500
//   spanedit decode --checkpoint model.ckpt --input src.txt --beam 4
//   spanedit score --hyp out.txt --ref ref.txt --metrics ser,exact

#include <iostream>

#include "cli.h"

int main(int argc, char** argv) {
  return spanedit::cli::Run(argc, argv, std::cin, std::cout, std::cerr);
}
