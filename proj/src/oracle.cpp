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

#include "gca/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gca {

namespace {

constexpr Money kWelfareTieTolerance = 1e-9;
constexpr Money kBisectTolerance     = 1e-9;
constexpr Money kThresholdNudge      = 1e-6;

struct SubsetSearch
{
  Instance const        &instance;
  std::vector<int>       usage;
  std::vector<PatientId> current;
  OptResult              best;
  bool                   have_best = false;

  bool fits(Bundle const &demand) const
  {
    return std::none_of(demand.begin(), demand.end(),
                        [&](ExpertId e) { return usage[index_of(e)] != 0; });
  }

  void mark(Bundle const &demand, int delta)
  {
    for (auto e : demand)
    {
      usage[index_of(e)] += delta;
    }
  }

  void consider_current()
  {
    Money welfare = 0.0;
    for (auto id : current)
    {
      welfare += instance.bid(id).valuation;
    }
    if (!have_best || welfare > best.opt_welfare + kWelfareTieTolerance ||
        (welfare >= best.opt_welfare - kWelfareTieTolerance &&
         std::lexicographical_compare(current.begin(), current.end(), best.opt_winners.begin(),
                                      best.opt_winners.end())))
    {
      best.opt_welfare = welfare;
      best.opt_winners = current;
      have_best        = true;
    }
  }

  void visit(PatientId next)
  {
    if (next == instance.size())
    {
      consider_current();
      return;
    }
    auto const &demand = instance.bid(next).demand;
    if (fits(demand))
    {
      mark(demand, +1);
      current.push_back(next);
      visit(next + 1);
      current.pop_back();
      mark(demand, -1);
    }
    visit(next + 1);
  }
};

}  // namespace

OptResult optimal_welfare(Instance const &instance)
{
  if (instance.size() > kMaxExhaustivePatients)
  {
    throw InstanceTooLarge("exhaustive optimum supports at most " +
                           std::to_string(kMaxExhaustivePatients) + " patients, got " +
                           std::to_string(instance.size()));
  }
  SubsetSearch search{instance, std::vector<int>(instance.num_experts(), 0), {}, {}};
  search.visit(0);
  return search.best;
}

bool verify_conflict_free(Instance const &instance, std::span<PatientId const> winners)
{
  for (std::size_t a = 0; a < winners.size(); ++a)
  {
    for (std::size_t b = a + 1; b < winners.size(); ++b)
    {
      if (winners[a] == winners[b])
      {
        continue;
      }
      if (bundles_intersect(instance.bid(winners[a]).demand, instance.bid(winners[b]).demand))
      {
        return false;
      }
    }
  }
  return true;
}

bool wins_at(Instance const &instance, PatientId patient, Money valuation)
{
  return greedy_allocate(instance.with_valuation(patient, valuation)).is_winner(patient);
}

Money critical_value_bisect(Instance const &instance, PatientId patient)
{
  if (wins_at(instance, patient, 0.0))
  {
    return 0.0;
  }
  Money lo = 0.0;
  Money hi = instance.max_valuation() * std::sqrt(static_cast<double>(instance.num_experts())) + 1.0;
  if (!wins_at(instance, patient, hi))
  {
    throw std::logic_error("patient " + std::to_string(patient) +
                           " loses at every valuation; allocation is not monotone");
  }
  while (hi - lo > kBisectTolerance)
  {
    auto const mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi)
    {
      break;
    }
    if (wins_at(instance, patient, mid))
    {
      hi = mid;
    }
    else
    {
      lo = mid;
    }
  }
  return hi;
}

std::vector<Money> deviation_grid(Instance const &instance, PatientId patient)
{
  auto const &own       = instance.bid(patient);
  auto const  own_scale = std::sqrt(static_cast<double>(own.demand.size()));

  std::vector<Money> thresholds{0.0, critical_value_bisect(instance, patient)};
  for (auto const &bid : instance.bids())
  {
    if (bid.patient_id != patient)
    {
      thresholds.push_back(score(bid).value * own_scale);
    }
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<Money> grid{0.0, 2.0 * instance.max_valuation(), 2.0 * thresholds.back() + 1.0};
  for (std::size_t k = 0; k < thresholds.size(); ++k)
  {
    auto const t = thresholds[k];
    grid.push_back(t);
    grid.push_back(t + kThresholdNudge);
    if (t - kThresholdNudge > 0.0)
    {
      grid.push_back(t - kThresholdNudge);
    }
    if (k + 1 < thresholds.size())
    {
      grid.push_back(t + (thresholds[k + 1] - t) / 2.0);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

struct Outcome
{
  bool  won    = false;
  Money charge = 0.0;
};

Outcome outcome_at(Instance const &instance, PatientId patient, Money report, PaymentRule rule)
{
  auto const result = run_mechanism(instance.with_valuation(patient, report), rule);
  return {result.allocation.is_winner(patient), result.payments.charges[patient]};
}

}  // namespace

std::vector<DeviationReport> deviation_search(Instance const &instance, PatientId patient,
                                              std::span<Money const> true_values,
                                              std::span<Money const> grid, PaymentRule rule)
{
  std::vector<Outcome> outcomes;
  outcomes.reserve(grid.size());
  for (auto report : grid)
  {
    outcomes.push_back(outcome_at(instance, patient, report, rule));
  }

  std::vector<DeviationReport> reports;
  reports.reserve(true_values.size());
  for (auto true_value : true_values)
  {
    auto const truthful = outcome_at(instance, patient, true_value, rule);

    DeviationReport report;
    report.patient_id             = patient;
    report.true_value             = true_value;
    report.truthful_utility       = utility(true_value, truthful.won, truthful.charge);
    report.best_deviation_value   = true_value;
    report.best_deviation_utility = report.truthful_utility;
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
      auto const u = utility(true_value, outcomes[k].won, outcomes[k].charge);
      if (u > report.best_deviation_utility)
      {
        report.best_deviation_utility = u;
        report.best_deviation_value   = grid[k];
      }
    }
    report.violation = report.best_deviation_utility > report.truthful_utility + kUtilityTolerance;
    reports.push_back(report);
  }
  return reports;
}

DeviationReport deviation_search(Instance const &instance, PatientId patient, Money true_value,
                                 PaymentRule rule)
{
  auto const grid = deviation_grid(instance, patient);
  return deviation_search(instance, patient, std::span<Money const>(&true_value, 1), grid, rule)
      .front();
}

}  // namespace gca
