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

// The spanedit command line: extract, apply, train, decode, score, bench.

#ifndef SPANEDIT_TOOLS_CLI_H_
#define SPANEDIT_TOOLS_CLI_H_

#include <iosfwd>

namespace spanedit::cli {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

// Runs one command. Results go to `out`, diagnostics to `err`; `in` backs
// the "-" file name.
int Run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace spanedit::cli

#endif  // SPANEDIT_TOOLS_CLI_H_
