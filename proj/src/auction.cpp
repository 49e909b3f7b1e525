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

#include "gca/auction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace gca {

void validate_bid(Bid const &bid)
{
  auto const prefix = "patient " + std::to_string(bid.patient_id) + ": ";
  if (bid.demand.empty())
  {
    throw MalformedInput(prefix + "demand is empty");
  }
  if (!std::isfinite(bid.valuation))
  {
    throw MalformedInput(prefix + "valuation is not finite");
  }
  if (bid.valuation < 0.0)
  {
    throw MalformedInput(prefix + "valuation is negative");
  }
  for (std::size_t k = 1; k < bid.demand.size(); ++k)
  {
    if (bid.demand[k - 1] == bid.demand[k])
    {
      throw MalformedInput(prefix + "duplicate expert " + std::to_string(index_of(bid.demand[k])));
    }
    if (bid.demand[k - 1] > bid.demand[k])
    {
      throw MalformedInput(prefix + "demand is not sorted");
    }
  }
}

Bid make_bid(PatientId id, std::vector<std::uint32_t> experts, Money valuation)
{
  std::sort(experts.begin(), experts.end());
  Bid bid{id, {}, valuation};
  bid.demand.reserve(experts.size());
  for (auto e : experts)
  {
    bid.demand.push_back(static_cast<ExpertId>(e));
  }
  validate_bid(bid);
  return bid;
}

Instance::Instance(std::size_t num_experts, std::vector<Bid> bids)
  : num_experts_(num_experts)
  , bids_(std::move(bids))
{
  for (std::size_t i = 0; i < bids_.size(); ++i)
  {
    auto const &bid = bids_[i];
    if (bid.patient_id != i)
    {
      throw MalformedInput("patient at position " + std::to_string(i) + " has id " +
                           std::to_string(bid.patient_id));
    }
    validate_bid(bid);
    if (index_of(bid.demand.back()) >= num_experts_)
    {
      throw MalformedInput("patient " + std::to_string(i) + ": expert " +
                           std::to_string(index_of(bid.demand.back())) + " out of range [0, " +
                           std::to_string(num_experts_) + ")");
    }
  }
}

Money Instance::max_valuation() const noexcept
{
  Money best = 0.0;
  for (auto const &bid : bids_)
  {
    best = std::max(best, bid.valuation);
  }
  return best;
}

Instance Instance::with_valuation(PatientId id, Money valuation) const
{
  auto bids           = bids_;
  bids.at(id).valuation = valuation;
  return Instance(num_experts_, std::move(bids));
}

Instance Instance::with_demand(PatientId id, Bundle demand) const
{
  auto bids          = bids_;
  bids.at(id).demand = std::move(demand);
  return Instance(num_experts_, std::move(bids));
}

Instance Instance::without(PatientId id) const
{
  std::vector<Bid> bids;
  bids.reserve(bids_.size());
  for (auto const &bid : bids_)
  {
    if (bid.patient_id == id)
    {
      continue;
    }
    bids.push_back(bid);
    bids.back().patient_id = bids.size() - 1;
  }
  return Instance(num_experts_, std::move(bids));
}

Score score(Bid const &bid)
{
  if (bid.demand.empty())
  {
    throw MalformedInput("patient " + std::to_string(bid.patient_id) + ": demand is empty");
  }
  return Score{bid.valuation / std::sqrt(static_cast<double>(bid.demand.size()))};
}

bool bundles_intersect(Bundle const &a, Bundle const &b) noexcept
{
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end())
  {
    if (*ia == *ib)
    {
      return true;
    }
    if (*ia < *ib)
    {
      ++ia;
    }
    else
    {
      ++ib;
    }
  }
  return false;
}

std::string to_string(PaymentRule rule)
{
  return rule == PaymentRule::kCritical ? "critical" : "literal";
}

std::optional<PaymentRule> parse_rule(std::string const &text)
{
  if (text == "literal" || text == "paper-literal")
  {
    return PaymentRule::kPaperLiteral;
  }
  if (text == "critical")
  {
    return PaymentRule::kCritical;
  }
  return std::nullopt;
}

std::vector<PatientId> sort_patients(Instance const &instance)
{
  std::vector<Score> scores;
  scores.reserve(instance.size());
  for (auto const &bid : instance.bids())
  {
    scores.push_back(score(bid));
  }
  std::vector<PatientId> order(instance.size());
  std::iota(order.begin(), order.end(), PatientId{0});
  std::sort(order.begin(), order.end(), [&](PatientId a, PatientId b) {
    if (scores[a] != scores[b])
    {
      return scores[a] > scores[b];
    }
    return a < b;
  });
  return order;
}

namespace {

class TakenSet
{
public:
  explicit TakenSet(std::size_t num_experts)
    : taken_(num_experts, 0)
  {}

  bool disjoint(Bundle const &bundle) const
  {
    return std::none_of(bundle.begin(), bundle.end(),
                        [&](ExpertId e) { return taken_[index_of(e)] != 0; });
  }

  void take(Bundle const &bundle)
  {
    for (auto e : bundle)
    {
      taken_[index_of(e)] = 1;
    }
  }

private:
  std::vector<char> taken_;
};

PaymentVector zero_payments(std::size_t n)
{
  return PaymentVector{std::vector<Money>(n, 0.0), std::vector<std::optional<PatientId>>(n)};
}

Money rescaled_charge(Bid const &winner, Bid const &blocker)
{
  return score(blocker).value * std::sqrt(static_cast<double>(winner.demand.size()));
}

}  // namespace

Allocation greedy_allocate(Instance const &instance, std::span<PatientId const> order)
{
  Allocation allocation;
  TakenSet   taken(instance.num_experts());
  for (auto id : order)
  {
    auto const &bid = instance.bid(id);
    if (taken.disjoint(bid.demand))
    {
      taken.take(bid.demand);
      allocation.granted.emplace(id, bid.demand);
    }
  }
  for (auto const &[id, bundle] : allocation.granted)
  {
    allocation.winners.push_back(id);
  }
  return allocation;
}

Allocation greedy_allocate(Instance const &instance)
{
  auto const order = sort_patients(instance);
  return greedy_allocate(instance, order);
}

PaymentVector payment_paper_literal(Instance const &instance, std::span<PatientId const> order,
                                    Allocation const &allocation)
{
  auto payments = zero_payments(instance.size());

  std::vector<std::size_t> position(instance.size());
  for (std::size_t p = 0; p < order.size(); ++p)
  {
    position[order[p]] = p;
  }

  // The first two demanders of each expert in sorted order are enough to tell
  // whether a bid has zero, one or several conflicting bids ahead of it.
  constexpr PatientId kNone = static_cast<PatientId>(-1);
  std::vector<std::array<PatientId, 2>> first_demanders(instance.num_experts(), {kNone, kNone});
  for (auto id : order)
  {
    for (auto e : instance.bid(id).demand)
    {
      auto &slot = first_demanders[index_of(e)];
      if (slot[0] == kNone)
      {
        slot[0] = id;
      }
      else if (slot[1] == kNone)
      {
        slot[1] = id;
      }
    }
  }

  for (auto j : order)
  {
    PatientId   unique_conflict = kNone;
    bool        several         = false;
    for (auto e : instance.bid(j).demand)
    {
      for (auto other : first_demanders[index_of(e)])
      {
        if (other == kNone || position[other] >= position[j])
        {
          continue;
        }
        if (unique_conflict == kNone)
        {
          unique_conflict = other;
        }
        else if (unique_conflict != other)
        {
          several = true;
        }
      }
      if (several)
      {
        break;
      }
    }
    if (several || unique_conflict == kNone)
    {
      continue;
    }
    auto const i = unique_conflict;
    if (allocation.is_winner(i) && !payments.critical_index[i])
    {
      payments.critical_index[i] = j;
      payments.charges[i]        = rescaled_charge(instance.bid(i), instance.bid(j));
    }
  }
  return payments;
}

PaymentVector payment_critical(Instance const &instance, std::span<PatientId const> order,
                               Allocation const &allocation)
{
  auto payments = zero_payments(instance.size());
  for (auto i : allocation.winners)
  {
    auto const &winner = instance.bid(i);
    TakenSet    taken(instance.num_experts());
    for (auto k : order)
    {
      if (k == i)
      {
        continue;
      }
      auto const &bid = instance.bid(k);
      if (!taken.disjoint(bid.demand))
      {
        continue;
      }
      if (bundles_intersect(bid.demand, winner.demand))
      {
        payments.critical_index[i] = k;
        payments.charges[i]        = rescaled_charge(winner, bid);
        break;
      }
      taken.take(bid.demand);
    }
  }
  return payments;
}

PaymentVector payment_critical(Instance const &instance, Allocation const &allocation)
{
  auto const order = sort_patients(instance);
  return payment_critical(instance, order, allocation);
}

MechanismResult run_mechanism(Instance const &instance, PaymentRule rule)
{
  MechanismResult result;
  result.rule         = rule;
  result.sorted_order = sort_patients(instance);
  result.allocation   = greedy_allocate(instance, result.sorted_order);
  result.payments     = rule == PaymentRule::kCritical
                            ? payment_critical(instance, result.sorted_order, result.allocation)
                            : payment_paper_literal(instance, result.sorted_order, result.allocation);
  for (auto id : result.allocation.winners)
  {
    result.welfare += instance.bid(id).valuation;
  }
  return result;
}

Money utility(Money true_value, bool won, Money charge) noexcept
{
  return won ? true_value - charge : 0.0;
}

}  // namespace gca
