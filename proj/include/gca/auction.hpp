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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gca {

using Money     = double;
using PatientId = std::size_t;

/// Index of an expert in [0, m).
enum class ExpertId : std::uint32_t
{
};

constexpr std::uint32_t index_of(ExpertId e) noexcept
{
  return static_cast<std::uint32_t>(e);
}

/// Sorted, duplicate-free set of experts.
using Bundle = std::vector<ExpertId>;

/// Raised when a bid or instance violates its structural invariants.
class MalformedInput : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A single-minded patient's report: the bundle of experts demanded and the
/// value attached to receiving all of it.
struct Bid
{
  PatientId patient_id = 0;
  Bundle    demand;
  Money     valuation = 0.0;

  bool operator==(Bid const &) const = default;
};

/// Throws MalformedInput unless the demand is non-empty, strictly increasing
/// and the valuation is finite and non-negative.
void validate_bid(Bid const &bid);

/// Builds a bid from an unordered expert list. Duplicates are rejected.
Bid make_bid(PatientId id, std::vector<std::uint32_t> experts, Money valuation);

/// The expert universe plus the ordered bid profile. Patient ids always equal
/// list positions and every demand is inside [0, num_experts).
class Instance
{
public:
  Instance() = default;
  Instance(std::size_t num_experts, std::vector<Bid> bids);

  std::size_t            num_experts() const noexcept { return num_experts_; }
  std::size_t            size() const noexcept { return bids_.size(); }
  bool                   empty() const noexcept { return bids_.empty(); }
  std::span<Bid const>   bids() const noexcept { return bids_; }
  Bid const             &bid(PatientId id) const { return bids_.at(id); }
  Money                  max_valuation() const noexcept;

  /// Same profile with patient `id` reporting `valuation` instead.
  Instance with_valuation(PatientId id, Money valuation) const;
  /// Same profile with patient `id` reporting `demand` instead.
  Instance with_demand(PatientId id, Bundle demand) const;
  /// The profile of everyone but `id`, renumbered densely.
  Instance without(PatientId id) const;

  bool operator==(Instance const &) const = default;

private:
  std::size_t      num_experts_ = 0;
  std::vector<Bid> bids_;
};

/// Ranking key valuation / sqrt(|demand|).
struct Score
{
  double value = 0.0;

  auto operator<=>(Score const &) const = default;
};

Score score(Bid const &bid);

bool bundles_intersect(Bundle const &a, Bundle const &b) noexcept;

struct Allocation
{
  std::vector<PatientId>       winners;  // ascending
  std::map<PatientId, Bundle>  granted;

  bool is_winner(PatientId id) const { return granted.contains(id); }
  bool operator==(Allocation const &) const = default;
};

struct PaymentVector
{
  std::vector<Money>                    charges;
  std::vector<std::optional<PatientId>> critical_index;

  bool operator==(PaymentVector const &) const = default;
};

enum class PaymentRule
{
  kPaperLiteral,
  kCritical,
};

std::string            to_string(PaymentRule rule);
std::optional<PaymentRule> parse_rule(std::string const &text);

struct MechanismResult
{
  PaymentRule            rule = PaymentRule::kPaperLiteral;
  Allocation             allocation;
  PaymentVector          payments;
  Money                  welfare = 0.0;
  std::vector<PatientId> sorted_order;

  bool operator==(MechanismResult const &) const = default;
};

/// Patient ids by descending score, ties to the lower id.
std::vector<PatientId> sort_patients(Instance const &instance);

/// Scans `order` admitting every bid disjoint from the experts taken so far.
Allocation greedy_allocate(Instance const &instance, std::span<PatientId const> order);
Allocation greedy_allocate(Instance const &instance);

/// Charges each winner i the amount v_j * sqrt(|D_i| / |D_j|) where j is the
/// earliest bid after i in `order` that intersects D_i and is disjoint from
/// every other bid ahead of it. Winners with no such j pay zero.
PaymentVector payment_paper_literal(Instance const &instance, std::span<PatientId const> order,
                                    Allocation const &allocation);

/// Charges each winner its critical value: the infimum valuation at which it
/// still wins with everyone else fixed.
PaymentVector payment_critical(Instance const &instance, std::span<PatientId const> order,
                               Allocation const &allocation);
PaymentVector payment_critical(Instance const &instance, Allocation const &allocation);

MechanismResult run_mechanism(Instance const &instance, PaymentRule rule);

/// Quasi-linear utility of a single-minded patient.
Money utility(Money true_value, bool won, Money charge) noexcept;

}  // namespace gca
