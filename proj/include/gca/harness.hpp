// Copyright 2026 The GCA Authors
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

#pragma once

#include "gca/auction.hpp"
#include "gca/oracle.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace gca {

/// Thin portable wrapper over mt19937_64. The bounded draws are computed here
/// rather than through <random> distributions so generated corpora are the
/// same on every standard library.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {}

  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
  /// Uniform in [0, 1).
  double unit();

private:
  std::mt19937_64 engine_;
};

struct GenParams
{
  std::size_t   n          = 0;
  std::size_t   m          = 1;
  std::size_t   max_bundle = 1;
  Money         lo         = 1.0;
  Money         hi         = 100.0;
  std::uint64_t seed       = 0;
};

void validate(GenParams const &params);

/// Each patient draws a bundle size in [1, max_bundle], a bundle without
/// replacement from [0, m) and a valuation in [lo, hi] rounded to 6 decimals.
Instance gen_random_instance(GenParams const &params);

/// Bounds from which per-seed generation parameters are drawn.
struct CorpusShape
{
  std::size_t n_min = 1;
  std::size_t n_max = 8;
  std::size_t m_min = 2;
  std::size_t m_max = 6;
  Money       lo    = 1.0;
  Money       hi    = 100.0;
};

GenParams              params_for_seed(std::uint64_t seed, CorpusShape const &shape);
std::vector<GenParams> make_corpus(std::uint64_t first_seed, std::uint64_t last_seed,
                                   CorpusShape const &shape);

/// Tight family: one bid on all m experts at 1.05*sqrt(m) and m unit bids on
/// single experts. Greedy keeps the big bid; the optimum keeps the m singles.
Instance tight_family(std::size_t m);

/// Deviation reports for every patient. Hypothetical true values are its
/// reported value, `trials_per_patient` evenly spaced points in [0, 2 * v_max]
/// and one representative of every outcome class from its deviation grid.
std::vector<DeviationReport> check_ic(Instance const &instance, PaymentRule rule,
                                      std::size_t trials_per_patient);

struct Violation
{
  PatientId   patient_id = 0;
  std::string detail;
};

/// Every winner must keep winning after raising its valuation or after
/// shrinking its demand to a non-empty strict subset.
std::vector<Violation> check_monotonicity(Instance const &instance, std::size_t samples,
                                          std::uint64_t seed = 0);

/// Losers pay nothing and winners pay at most their reported valuation.
std::vector<Violation> check_individual_rationality(Instance const &instance,
                                                    MechanismResult const &result);

/// Critical charges against bisection (1e-6) and a +-1e-4 sharpness probe.
std::vector<Violation> check_critical_agreement(Instance const &instance);

/// greedy / optimum welfare, 1.0 when the optimum is zero.
double check_approx_ratio(Instance const &instance);

inline double approx_bound(std::size_t m)
{
  return m == 0 ? 1.0 : 1.0 / std::sqrt(static_cast<double>(m));
}

/// True when the two payment rules disagree on some winner's charge.
bool rules_diverge(Instance const &instance);

enum class Property : std::size_t
{
  kIc,
  kIr,
  kMono,
  kRatio,
  kCrit,
};

inline constexpr std::size_t kPropertyCount = 5;

std::string             to_string(Property p);
std::optional<Property> parse_property(std::string const &text);

struct PropertySet
{
  std::array<bool, kPropertyCount> enabled{};

  bool contains(Property p) const { return enabled[static_cast<std::size_t>(p)]; }
  void insert(Property p) { enabled[static_cast<std::size_t>(p)] = true; }

  static PropertySet all();
  /// Comma-separated property names; throws std::invalid_argument on unknown names.
  static PropertySet parse(std::string const &text);
};

struct Witness
{
  std::uint64_t seed = 0;
  std::string   detail;
  Instance      instance;
};

struct PropertyStats
{
  std::size_t            checked    = 0;
  std::size_t            violations = 0;
  std::optional<Witness> first_witness;
};

struct FuzzReport
{
  PaymentRule                               rule = PaymentRule::kCritical;
  PropertySet                               properties;
  std::size_t                               instances_run = 0;
  std::array<PropertyStats, kPropertyCount> stats{};
  double                                    ratio_min        = 1.0;
  std::size_t                               rule_divergences = 0;

  PropertyStats const &operator[](Property p) const { return stats[static_cast<std::size_t>(p)]; }
  std::size_t          total_violations() const;
};

struct BatchOptions
{
  std::size_t ic_trials    = 5;
  std::size_t mono_samples = 4;
  std::size_t threads      = 0;  // 0 = hardware concurrency
};

/// Generates, runs and checks every instance of the batch. Instances may be
/// evaluated in parallel; the report is merged in input order.
FuzzReport run_batch(std::span<GenParams const> params, PropertySet properties, PaymentRule rule,
                     BatchOptions const &options = {});

struct BenchRow
{
  std::size_t n                = 0;
  double      literal_seconds  = 0.0;
  double      critical_seconds = 0.0;
};

/// Times sort + allocation + payment for each size under both rules.
std::vector<BenchRow> run_bench(std::span<std::size_t const> sizes, std::size_t m,
                                std::size_t max_bundle, std::uint64_t seed);

/// Largest time growth between consecutive rows, normalized to a doubling of n.
double worst_doubling_factor(std::span<BenchRow const> rows);

}  // namespace gca
