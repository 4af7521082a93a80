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

#ifndef ONNG_OBFUSCATE_H_
#define ONNG_OBFUSCATE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "onng/corpus.h"

namespace onng {

// Portable 64-bit generator; identical streams on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in [0, n), n > 0, without modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

// Independent stream for one identifier and retry number.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                             std::uint32_t attempt);

const std::vector<char32_t>& default_char_pool();
// Parses the `U+XXXX` lines of a pool file; `#` starts a comment.
std::vector<char32_t> load_char_pool(const std::filesystem::path& path);

struct ObfuscationParams {
  double lambda = 0.0;
  double exponent = 2.5;
  double insertion_ratio = 0.4;
  double deletion_ratio = 0.3;
  std::vector<char32_t> char_pool = default_char_pool();
  std::uint64_t seed = 42;

  // Throws DomainError on any violated invariant.
  void validate() const;
};

double noise_to_prob(double lambda, double exponent = 2.5);

// Event counts from perturbation, for calibration checks.
struct PerturbStats {
  std::uint64_t characters = 0;
  std::uint64_t substitutions = 0;
  // Deletion draws where the non-empty guard could not have fired.
  std::uint64_t deletion_trials = 0;
  std::uint64_t deletions = 0;
  std::uint64_t insertions = 0;
  std::int64_t length_delta = 0;
};

// Substitution, then deletion, then insertion, then first-character repair.
std::string perturb_identifier(std::string_view name,
                               const ObfuscationParams& params,
                               SplitMix64& rng, PerturbStats* stats = nullptr);

struct RenameMap {
  std::map<std::string, std::string> entries;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

constexpr int kRenameRetryBound = 64;

// Names that no rename value may take besides keywords, tactics and the
// prelude: common root-namespace names of the toolchain's core library.
const std::set<std::string>& reserved_core_names();

RenameMap build_rename_map(const Corpus& corpus,
                           const ObfuscationParams& params);

// Rewrites every occurrence of a map key, strips comments and re-orders.
Corpus apply_rename(const Corpus& corpus, const RenameMap& map);

nlohmann::ordered_json rename_map_to_json(const RenameMap& map);
RenameMap rename_map_from_json(const nlohmann::json& doc);

}  // namespace onng

#endif  // ONNG_OBFUSCATE_H_
