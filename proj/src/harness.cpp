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

#include "gca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gca {

std::uint64_t Rng::below(std::uint64_t bound)
{
  if (bound == 0)
  {
    throw std::invalid_argument("Rng::below: empty range");
  }
  // reject the low remainder so that r % bound is unbiased
  auto const threshold = (0 - bound) % bound;
  for (;;)
  {
    auto const r = engine_();
    if (r >= threshold)
    {
      return r % bound;
    }
  }
}

double Rng::unit()
{
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

void validate(GenParams const &params)
{
  if (params.m == 0 && params.n > 0)
  {
    throw std::invalid_argument("m must be positive when n > 0");
  }
  if (params.n > 0 && (params.max_bundle < 1 || params.max_bundle > params.m))
  {
    throw std::invalid_argument("max_bundle must lie in [1, m]");
  }
  if (!(params.lo >= 0.0) || !(params.hi > params.lo) || !std::isfinite(params.hi))
  {
    throw std::invalid_argument("valuation range must satisfy 0 <= lo < hi");
  }
}

Instance gen_random_instance(GenParams const &params)
{
  validate(params);
  Rng                        rng(params.seed);
  std::vector<std::uint32_t> experts(params.m);
  std::vector<Bid>           bids;
  bids.reserve(params.n);
  for (std::size_t i = 0; i < params.n; ++i)
  {
    auto const size = rng.between(1, params.max_bundle);
    std::iota(experts.begin(), experts.end(), 0u);
    for (std::size_t k = 0; k < size; ++k)
    {
      std::swap(experts[k], experts[k + rng.below(params.m - k)]);
    }
    auto const raw = params.lo + rng.unit() * (params.hi - params.lo);
    auto const valuation = std::round(raw * 1e6) / 1e6;
    bids.push_back(make_bid(i, {experts.begin(), experts.begin() + static_cast<std::ptrdiff_t>(size)},
                            valuation));
  }
  return Instance(params.m, std::move(bids));
}

GenParams params_for_seed(std::uint64_t seed, CorpusShape const &shape)
{
  if (shape.n_min > shape.n_max || shape.m_min > shape.m_max || shape.m_min == 0)
  {
    throw std::invalid_argument("corpus shape bounds are inconsistent");
  }
  Rng       rng(seed ^ 0x9e3779b97f4a7c15ULL);
  GenParams params;
  params.n          = rng.between(shape.n_min, shape.n_max);
  params.m          = rng.between(shape.m_min, shape.m_max);
  params.max_bundle = rng.between(1, params.m);
  params.lo         = shape.lo;
  params.hi         = shape.hi;
  params.seed       = seed;
  return params;
}

std::vector<GenParams> make_corpus(std::uint64_t first_seed, std::uint64_t last_seed,
                                   CorpusShape const &shape)
{
  std::vector<GenParams> corpus;
  for (auto seed = first_seed; seed <= last_seed; ++seed)
  {
    corpus.push_back(params_for_seed(seed, shape));
    if (seed == last_seed)
    {
      break;
    }
  }
  return corpus;
}

Instance tight_family(std::size_t m)
{
  std::vector<Bid>           bids;
  std::vector<std::uint32_t> everyone(m);
  std::iota(everyone.begin(), everyone.end(), 0u);
  bids.push_back(make_bid(0, everyone, 1.05 * std::sqrt(static_cast<double>(m))));
  for (std::uint32_t e = 0; e < m; ++e)
  {
    bids.push_back(make_bid(bids.size(), {e}, 1.0));
  }
  return Instance(m, std::move(bids));
}

std::vector<DeviationReport> check_ic(Instance const &instance, PaymentRule rule,
                                      std::size_t trials_per_patient)
{
  auto const span = 2.0 * std::max(instance.max_valuation(), 1.0);

  std::vector<DeviationReport> reports;
  for (auto const &bid : instance.bids())
  {
    std::vector<Money> true_values{bid.valuation};
    for (std::size_t k = 0; k < trials_per_patient; ++k)
    {
      auto const fraction =
          trials_per_patient == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(trials_per_patient - 1);
      true_values.push_back(fraction * span);
    }
    auto const grid = deviation_grid(instance, bid.patient_id);
    true_values.insert(true_values.end(), grid.begin(), grid.end());
    auto found = deviation_search(instance, bid.patient_id, true_values, grid, rule);
    reports.insert(reports.end(), found.begin(), found.end());
  }
  return reports;
}

namespace {

std::string describe(double value)
{
  std::ostringstream out;
  out.precision(12);
  out << value;
  return out.str();
}

Bundle random_strict_subset(Bundle const &demand, Rng &rng)
{
  auto const k = demand.size();
  Bundle     subset;
  if (k < 63)
  {
    auto const mask = rng.between(1, (std::uint64_t{1} << k) - 2);
    for (std::size_t b = 0; b < k; ++b)
    {
      if ((mask >> b) & 1U)
      {
        subset.push_back(demand[b]);
      }
    }
    return subset;
  }
  do
  {
    subset.clear();
    for (auto e : demand)
    {
      if (rng.below(2) == 1)
      {
        subset.push_back(e);
      }
    }
  } while (subset.empty() || subset.size() == k);
  return subset;
}

}  // namespace

std::vector<Violation> check_monotonicity(Instance const &instance, std::size_t samples,
                                          std::uint64_t seed)
{
  std::vector<Violation> violations;
  auto const             allocation = greedy_allocate(instance);
  for (auto i : allocation.winners)
  {
    auto const &bid = instance.bid(i);
    for (auto raised : {bid.valuation * 1.1, bid.valuation * 10.0, bid.valuation + 1.0})
    {
      if (raised > bid.valuation && !wins_at(instance, i, raised))
      {
        violations.push_back({i, "loses after raising valuation to " + describe(raised)});
      }
    }
    if (bid.demand.size() < 2)
    {
      continue;
    }
    Rng rng(seed ^ (0xa0761d6478bd642fULL * (i + 1)));
    for (std::size_t s = 0; s < samples; ++s)
    {
      auto subset = random_strict_subset(bid.demand, rng);
      if (!greedy_allocate(instance.with_demand(i, subset)).is_winner(i))
      {
        violations.push_back({i, "loses after shrinking demand to " + std::to_string(subset.size()) +
                                     " experts"});
      }
    }
  }
  return violations;
}

std::vector<Violation> check_individual_rationality(Instance const &instance,
                                                    MechanismResult const &result)
{
  std::vector<Violation> violations;
  for (auto const &bid : instance.bids())
  {
    auto const charge = result.payments.charges.at(bid.patient_id);
    if (!result.allocation.is_winner(bid.patient_id))
    {
      if (charge != 0.0)
      {
        violations.push_back({bid.patient_id, "loser charged " + describe(charge)});
      }
    }
    else if (charge < 0.0 || charge > bid.valuation + kUtilityTolerance)
    {
      violations.push_back({bid.patient_id, "winner with valuation " + describe(bid.valuation) +
                                                " charged " + describe(charge)});
    }
  }
  return violations;
}

std::vector<Violation> check_critical_agreement(Instance const &instance)
{
  constexpr Money kAgreement = 1e-6;
  constexpr Money kSharpness = 1e-4;

  std::vector<Violation> violations;
  auto const             result = run_mechanism(instance, PaymentRule::kCritical);
  for (auto i : result.allocation.winners)
  {
    auto const charge = result.payments.charges[i];
    auto const bisect = critical_value_bisect(instance, i);
    if (std::abs(charge - bisect) > kAgreement)
    {
      violations.push_back({i, "critical charge " + describe(charge) + " vs bisection " +
                                   describe(bisect)});
    }
    auto const nudge = 1e-6 * std::max(1.0, charge);
    if (!wins_at(instance, i, charge + nudge) || !wins_at(instance, i, charge + kSharpness))
    {
      violations.push_back({i, "loses just above its critical value " + describe(charge)});
    }
    if ((charge > nudge && wins_at(instance, i, charge - nudge)) ||
        (charge > 1e-3 && wins_at(instance, i, charge - kSharpness)))
    {
      violations.push_back({i, "wins just below its critical value " + describe(charge)});
    }
  }
  return violations;
}

double check_approx_ratio(Instance const &instance)
{
  auto const allocation = greedy_allocate(instance);
  Money      greedy     = 0.0;
  for (auto id : allocation.winners)
  {
    greedy += instance.bid(id).valuation;
  }
  auto const opt = optimal_welfare(instance).opt_welfare;
  return opt == 0.0 ? 1.0 : greedy / opt;
}

bool rules_diverge(Instance const &instance)
{
  auto const literal  = run_mechanism(instance, PaymentRule::kPaperLiteral);
  auto const critical = run_mechanism(instance, PaymentRule::kCritical);
  for (std::size_t i = 0; i < instance.size(); ++i)
  {
    if (std::abs(literal.payments.charges[i] - critical.payments.charges[i]) > kUtilityTolerance)
    {
      return true;
    }
  }
  return false;
}

std::string to_string(Property p)
{
  switch (p)
  {
  case Property::kIc:
    return "ic";
  case Property::kIr:
    return "ir";
  case Property::kMono:
    return "mono";
  case Property::kRatio:
    return "ratio";
  case Property::kCrit:
    return "crit";
  }
  return "?";
}

std::optional<Property> parse_property(std::string const &text)
{
  for (std::size_t k = 0; k < kPropertyCount; ++k)
  {
    auto const p = static_cast<Property>(k);
    if (to_string(p) == text)
    {
      return p;
    }
  }
  return std::nullopt;
}

PropertySet PropertySet::all()
{
  PropertySet set;
  set.enabled.fill(true);
  return set;
}

PropertySet PropertySet::parse(std::string const &text)
{
  PropertySet       set;
  std::stringstream in(text);
  std::string       name;
  while (std::getline(in, name, ','))
  {
    if (name.empty())
    {
      continue;
    }
    if (name == "all")
    {
      return all();
    }
    auto const p = parse_property(name);
    if (!p)
    {
      throw std::invalid_argument("unknown property '" + name + "'");
    }
    set.insert(*p);
  }
  return set;
}

std::size_t FuzzReport::total_violations() const
{
  std::size_t total = 0;
  for (auto const &s : stats)
  {
    total += s.violations;
  }
  return total;
}

namespace {

struct Finding
{
  std::size_t violations = 0;
  std::string detail;
};

struct InstanceOutcome
{
  Instance                            instance;
  std::array<Finding, kPropertyCount> findings{};
  double                              ratio    = 1.0;
  bool                                diverged = false;
};

void record(Finding &finding, std::vector<Violation> const &violations, std::string const &prefix = {})
{
  finding.violations += violations.size();
  if (finding.detail.empty() && !violations.empty())
  {
    finding.detail = prefix + "patient " + std::to_string(violations.front().patient_id) + ": " +
                     violations.front().detail;
  }
}

InstanceOutcome evaluate(GenParams const &params, PropertySet const &properties, PaymentRule rule,
                         BatchOptions const &options)
{
  InstanceOutcome out;
  out.instance        = gen_random_instance(params);
  auto const &instance = out.instance;
  auto finding = [&](Property p) -> Finding & { return out.findings[static_cast<std::size_t>(p)]; };

  if (properties.contains(Property::kIc))
  {
    for (auto const &report : check_ic(instance, rule, options.ic_trials))
    {
      if (report.violation)
      {
        auto &f = finding(Property::kIc);
        if (f.violations++ == 0)
        {
          f.detail = "patient " + std::to_string(report.patient_id) + " with true value " +
                     describe(report.true_value) + ": truthful utility " +
                     describe(report.truthful_utility) + ", reporting " +
                     describe(report.best_deviation_value) + " yields " +
                     describe(report.best_deviation_utility);
        }
      }
    }
  }
  if (properties.contains(Property::kIr))
  {
    for (auto r : {PaymentRule::kPaperLiteral, PaymentRule::kCritical})
    {
      record(finding(Property::kIr), check_individual_rationality(instance, run_mechanism(instance, r)),
             to_string(r) + " rule, ");
    }
  }
  if (properties.contains(Property::kMono))
  {
    record(finding(Property::kMono), check_monotonicity(instance, options.mono_samples, params.seed));
  }
  if (properties.contains(Property::kRatio))
  {
    out.ratio = check_approx_ratio(instance);
    if (out.ratio < approx_bound(instance.num_experts()) - 1e-9)
    {
      auto &f = finding(Property::kRatio);
      f.violations = 1;
      f.detail     = "ratio " + describe(out.ratio) + " below 1/sqrt(" +
                 std::to_string(instance.num_experts()) + ")";
    }
  }
  if (properties.contains(Property::kCrit))
  {
    record(finding(Property::kCrit), check_critical_agreement(instance));
  }
  out.diverged = rules_diverge(instance);
  return out;
}

}  // namespace

FuzzReport run_batch(std::span<GenParams const> params, PropertySet properties, PaymentRule rule,
                     BatchOptions const &options)
{
  std::vector<InstanceOutcome> outcomes(params.size());

  auto threads = options.threads != 0 ? options.threads
                                      : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, params.size()));

  std::atomic<std::size_t> next{0};
  auto                     worker = [&] {
    for (auto k = next.fetch_add(1); k < params.size(); k = next.fetch_add(1))
    {
      outcomes[k] = evaluate(params[k], properties, rule, options);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t)
    {
      pool.emplace_back(worker);
    }
    worker();
  }

  FuzzReport report;
  report.rule          = rule;
  report.properties    = properties;
  report.instances_run = params.size();
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    auto const &outcome = outcomes[k];
    for (std::size_t p = 0; p < kPropertyCount; ++p)
    {
      if (!properties.enabled[p])
      {
        continue;
      }
      auto &stats = report.stats[p];
      ++stats.checked;
      stats.violations += outcome.findings[p].violations;
      if (!stats.first_witness && outcome.findings[p].violations > 0)
      {
        stats.first_witness = Witness{params[k].seed, outcome.findings[p].detail, outcome.instance};
      }
    }
    if (properties.contains(Property::kRatio))
    {
      report.ratio_min = std::min(report.ratio_min, outcome.ratio);
    }
    report.rule_divergences += outcome.diverged ? 1 : 0;
  }
  return report;
}

namespace {

template <typename F>
double seconds_per_call(F &&call)
{
  using Clock = std::chrono::steady_clock;
  constexpr double kMinSample = 0.02;

  std::size_t reps = 1;
  double      best = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt)
  {
    auto const start = Clock::now();
    for (std::size_t r = 0; r < reps; ++r)
    {
      call();
    }
    double const elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (elapsed < kMinSample)
    {
      reps *= 2;
      continue;
    }
    best = best == 0.0 ? elapsed / static_cast<double>(reps)
                       : std::min(best, elapsed / static_cast<double>(reps));
    if (attempt >= 5 && best > 0.0)
    {
      break;
    }
  }
  return best;
}

}  // namespace

std::vector<BenchRow> run_bench(std::span<std::size_t const> sizes, std::size_t m,
                                std::size_t max_bundle, std::uint64_t seed)
{
  std::vector<BenchRow> rows;
  for (auto n : sizes)
  {
    auto const instance = gen_random_instance(GenParams{n, m, max_bundle, 1.0, 100.0, seed});
    BenchRow   row{n, 0.0, 0.0};
    row.literal_seconds =
        seconds_per_call([&] { (void)run_mechanism(instance, PaymentRule::kPaperLiteral); });
    row.critical_seconds =
        seconds_per_call([&] { (void)run_mechanism(instance, PaymentRule::kCritical); });
    rows.push_back(row);
  }
  return rows;
}

double worst_doubling_factor(std::span<BenchRow const> rows)
{
  double worst = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k)
  {
    auto const doublings =
        std::log2(static_cast<double>(rows[k].n) / static_cast<double>(rows[k - 1].n));
    if (doublings <= 0.0)
    {
      continue;
    }
    for (auto [prev, cur] : {std::pair{rows[k - 1].literal_seconds, rows[k].literal_seconds},
                             std::pair{rows[k - 1].critical_seconds, rows[k].critical_seconds}})
    {
      if (prev > 0.0)
      {
        worst = std::max(worst, std::pow(cur / prev, 1.0 / doublings));
      }
    }
  }
  return worst;
}

}  // namespace gca
