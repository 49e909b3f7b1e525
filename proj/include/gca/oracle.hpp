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

#include <cstddef>
#include <vector>

namespace gca {

/// Brute-force ground truth for the greedy mechanism. Everything here is
/// deliberately slow and independent of the payment code paths.

inline constexpr std::size_t kMaxExhaustivePatients = 25;

class InstanceTooLarge : public std::length_error
{
public:
  using std::length_error::length_error;
};

struct OptResult
{
  Money                  opt_welfare = 0.0;
  std::vector<PatientId> opt_winners;  // ascending
};

/// Maximum-welfare conflict-free subset by exhaustive enumeration. Ties within
/// 1e-9 go to the lexicographically smallest winner list.
OptResult optimal_welfare(Instance const &instance);

bool verify_conflict_free(Instance const &instance, std::span<PatientId const> winners);

/// True when `patient` wins the greedy allocation while reporting `valuation`.
bool wins_at(Instance const &instance, PatientId patient, Money valuation);

/// Infimum winning valuation of `patient`, found by bisection on repeated
/// greedy runs to 1e-9 absolute.
Money critical_value_bisect(Instance const &instance, PatientId patient);

struct DeviationReport
{
  PatientId patient_id             = 0;
  Money     true_value             = 0.0;
  Money     best_deviation_value   = 0.0;
  Money     truthful_utility       = 0.0;
  Money     best_deviation_utility = 0.0;
  bool      violation              = false;
};

inline constexpr Money kUtilityTolerance = 1e-9;

/// The valuations worth trying as misreports for `patient`: zero, every
/// threshold where its outcome or ranking can change (nudged both ways), the
/// midpoints between them, and values above all of them.
std::vector<Money> deviation_grid(Instance const &instance, PatientId patient);

/// Best utility reachable by misreporting the valuation, for a patient whose
/// real value is `true_value`.
DeviationReport deviation_search(Instance const &instance, PatientId patient, Money true_value,
                                 PaymentRule rule);

/// Same search over a precomputed grid and for several true values at once.
std::vector<DeviationReport> deviation_search(Instance const &instance, PatientId patient,
                                              std::span<Money const> true_values,
                                              std::span<Money const> grid, PaymentRule rule);

}  // namespace gca
