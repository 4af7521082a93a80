//
// Copyright 2026 The ONNG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef ONNG_SUBPROCESS_H_
#define ONNG_SUBPROCESS_H_

#include <filesystem>
#include <string>
#include <vector>

namespace onng {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  // execvp failed (binary missing or not executable).
  bool spawn_failed = false;
  // stdout and stderr interleaved, capped at a few MiB.
  std::string output;
  double seconds = 0.0;
};

// Runs argv[0] (PATH lookup) in its own process group; the whole group is
// killed when `timeout_seconds` elapses.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& cwd,
                          double timeout_seconds);

}  // namespace onng

#endif  // ONNG_SUBPROCESS_H_
