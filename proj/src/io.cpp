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

#include "gca/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace gca {

using Json = nlohmann::ordered_json;

std::string format_valuation(Money value)
{
  std::array<char, 400> buffer{};
  auto const [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value,
                                       std::chars_format::fixed);
  if (ec != std::errc{})
  {
    throw std::invalid_argument("valuation cannot be formatted");
  }
  return {buffer.data(), end};
}

std::string format_money(Money value)
{
  if (value == 0.0)
  {
    value = 0.0;  // drop the sign of -0
  }
  std::array<char, 400> buffer{};
  auto const written = std::snprintf(buffer.data(), buffer.size(), "%.9f", value);
  return {buffer.data(), static_cast<std::size_t>(written)};
}

Money parse_money(std::string_view text, std::string const &path)
{
  if (!text.empty() && text.front() == '-')
  {
    throw ParseError(path + ": negative valuation '" + std::string(text) + "'");
  }
  auto const dot        = text.find('.');
  auto const integral   = text.substr(0, dot);
  auto const fractional = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  auto const all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (integral.empty() || !all_digits(integral) || !all_digits(fractional) ||
      (dot != std::string_view::npos && fractional.empty()))
  {
    throw ParseError(path + ": '" + std::string(text) + "' is not a decimal number");
  }
  Money value = 0.0;
  auto const [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value))
  {
    throw ParseError(path + ": '" + std::string(text) + "' is out of range");
  }
  return value;
}

namespace {

Json parse_json(std::string_view text)
{
  try
  {
    return Json::parse(text);
  }
  catch (Json::parse_error const &e)
  {
    throw ParseError(std::string("malformed syntax: ") + e.what());
  }
}

Json const &member(Json const &object, char const *key, std::string const &path)
{
  if (!object.is_object())
  {
    throw ParseError(path + ": expected an object");
  }
  auto it = object.find(key);
  if (it == object.end())
  {
    throw ParseError(path + ": missing field '" + key + "'");
  }
  return *it;
}

std::uint64_t as_unsigned(Json const &value, std::string const &path)
{
  if (!value.is_number_unsigned())
  {
    throw ParseError(path + ": expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

std::string as_string(Json const &value, std::string const &path)
{
  if (!value.is_string())
  {
    throw ParseError(path + ": expected a string");
  }
  return value.get<std::string>();
}

Json const &as_array(Json const &value, std::string const &path)
{
  if (!value.is_array())
  {
    throw ParseError(path + ": expected an array");
  }
  return value;
}

void expect_version(Json const &root, std::string_view expected)
{
  auto const version = as_string(member(root, "version", "$"), "$.version");
  if (version != expected)
  {
    throw ParseError("$.version: unknown version '" + version + "', expected '" +
                     std::string(expected) + "'");
  }
}

Json index_array(std::span<PatientId const> ids)
{
  auto array = Json::array();
  for (auto id : ids)
  {
    array.push_back(id);
  }
  return array;
}

Json instance_json(Instance const &instance)
{
  Json root;
  root["version"]     = kInstanceFormat;
  root["num_experts"] = instance.num_experts();
  root["patients"]    = Json::array();
  for (auto const &bid : instance.bids())
  {
    Json patient;
    patient["id"]        = bid.patient_id;
    patient["valuation"] = format_valuation(bid.valuation);
    patient["demand"]    = Json::array();
    for (auto e : bid.demand)
    {
      patient["demand"].push_back(index_of(e));
    }
    root["patients"].push_back(std::move(patient));
  }
  return root;
}

}  // namespace

Instance parse_instance(std::string_view text)
{
  auto const root = parse_json(text);
  expect_version(root, kInstanceFormat);
  auto const num_experts = as_unsigned(member(root, "num_experts", "$"), "$.num_experts");
  auto const &patients   = as_array(member(root, "patients", "$"), "$.patients");

  std::vector<Bid> bids;
  for (std::size_t i = 0; i < patients.size(); ++i)
  {
    auto const path = "$.patients[" + std::to_string(i) + "]";
    auto const &p   = patients[i];
    auto const id   = as_unsigned(member(p, "id", path), path + ".id");
    if (id != i)
    {
      throw ParseError(path + ".id: expected id " + std::to_string(i) + ", got " + std::to_string(id));
    }
    auto const valuation =
        parse_money(as_string(member(p, "valuation", path), path + ".valuation"), path + ".valuation");

    auto const &demand = as_array(member(p, "demand", path), path + ".demand");
    if (demand.empty())
    {
      throw ParseError(path + ".demand: patient " + std::to_string(i) + " demands no experts");
    }
    std::vector<std::uint32_t> experts;
    std::set<std::uint64_t>    seen;
    for (std::size_t k = 0; k < demand.size(); ++k)
    {
      auto const epath  = path + ".demand[" + std::to_string(k) + "]";
      auto const expert = as_unsigned(demand[k], epath);
      if (expert >= num_experts)
      {
        throw ParseError(epath + ": patient " + std::to_string(i) + " demands expert " +
                         std::to_string(expert) + " but num_experts is " + std::to_string(num_experts));
      }
      if (!seen.insert(expert).second)
      {
        throw ParseError(epath + ": patient " + std::to_string(i) + " lists expert " +
                         std::to_string(expert) + " twice");
      }
      experts.push_back(static_cast<std::uint32_t>(expert));
    }
    try
    {
      bids.push_back(make_bid(i, std::move(experts), valuation));
    }
    catch (MalformedInput const &e)
    {
      throw ParseError(path + ": " + e.what());
    }
  }
  try
  {
    return Instance(num_experts, std::move(bids));
  }
  catch (MalformedInput const &e)
  {
    throw ParseError(std::string("$: ") + e.what());
  }
}

std::string write_instance(Instance const &instance)
{
  return instance_json(instance).dump(2) + "\n";
}

std::string write_result(MechanismResult const &result)
{
  auto const n = result.sorted_order.size();

  Json root;
  root["version"]      = kResultFormat;
  root["rule"]         = to_string(result.rule);
  root["num_patients"] = n;
  root["winners"]      = index_array(result.allocation.winners);
  root["welfare"]      = format_money(result.welfare);
  root["sorted_order"] = index_array(result.sorted_order);
  root["patients"]     = Json::array();
  for (PatientId id = 0; id < n; ++id)
  {
    Json patient;
    patient["id"]      = id;
    patient["won"]     = result.allocation.is_winner(id);
    patient["charge"]  = format_money(result.payments.charges.at(id));
    patient["granted"] = Json::array();
    if (auto it = result.allocation.granted.find(id); it != result.allocation.granted.end())
    {
      for (auto e : it->second)
      {
        patient["granted"].push_back(index_of(e));
      }
    }
    auto const critical       = result.payments.critical_index.at(id);
    patient["critical_index"] = critical ? Json(*critical) : Json(nullptr);
    root["patients"].push_back(std::move(patient));
  }
  return root.dump(2) + "\n";
}

ResultFile parse_result(std::string_view text)
{
  auto const root = parse_json(text);
  expect_version(root, kResultFormat);

  ResultFile file;
  auto const rule_name = as_string(member(root, "rule", "$"), "$.rule");
  auto const rule      = parse_rule(rule_name);
  if (!rule)
  {
    throw ParseError("$.rule: unknown payment rule '" + rule_name + "'");
  }
  file.rule = *rule;

  auto read_ids = [&](char const *key) {
    std::vector<PatientId> ids;
    auto const             path = std::string("$.") + key;
    auto const            &arr  = as_array(member(root, key, "$"), path);
    for (std::size_t k = 0; k < arr.size(); ++k)
    {
      ids.push_back(as_unsigned(arr[k], path + "[" + std::to_string(k) + "]"));
    }
    return ids;
  };
  file.winners      = read_ids("winners");
  file.sorted_order = read_ids("sorted_order");
  file.welfare = parse_money(as_string(member(root, "welfare", "$"), "$.welfare"), "$.welfare");

  auto const &patients = as_array(member(root, "patients", "$"), "$.patients");
  for (std::size_t i = 0; i < patients.size(); ++i)
  {
    auto const  path = "$.patients[" + std::to_string(i) + "]";
    auto const &p    = patients[i];

    ResultEntry entry;
    entry.id = as_unsigned(member(p, "id", path), path + ".id");
    auto const &won = member(p, "won", path);
    if (!won.is_boolean())
    {
      throw ParseError(path + ".won: expected a boolean");
    }
    entry.won    = won.get<bool>();
    entry.charge = parse_money(as_string(member(p, "charge", path), path + ".charge"), path + ".charge");
    auto const &granted = as_array(member(p, "granted", path), path + ".granted");
    for (std::size_t k = 0; k < granted.size(); ++k)
    {
      entry.granted.push_back(static_cast<std::uint32_t>(
          as_unsigned(granted[k], path + ".granted[" + std::to_string(k) + "]")));
    }
    auto const &critical = member(p, "critical_index", path);
    if (!critical.is_null())
    {
      entry.critical_index = as_unsigned(critical, path + ".critical_index");
    }
    file.patients.push_back(std::move(entry));
  }
  return file;
}

std::vector<std::string> verify_result(Instance const &instance, ResultFile const &file)
{
  constexpr Money kMoneyTolerance = 1e-9;

  std::vector<std::string> problems;
  auto mismatch = [&](std::string const &field, std::string const &expected, std::string const &got) {
    problems.push_back(field + ": expected " + expected + ", got " + got);
  };
  auto ids_text = [](std::span<PatientId const> ids) {
    std::ostringstream out;
    out << "[";
    for (std::size_t k = 0; k < ids.size(); ++k)
    {
      out << (k ? "," : "") << ids[k];
    }
    out << "]";
    return out.str();
  };

  // structural invariants, independent of recomputation
  Money claimed_welfare = 0.0;
  for (auto id : file.winners)
  {
    if (id >= instance.size())
    {
      problems.push_back("winners: unknown patient " + std::to_string(id));
      return problems;
    }
    claimed_welfare += instance.bid(id).valuation;
  }
  if (!verify_conflict_free(instance, file.winners))
  {
    problems.push_back("winners: granted bundles overlap");
  }
  if (std::abs(claimed_welfare - file.welfare) > kMoneyTolerance)
  {
    mismatch("welfare", format_money(claimed_welfare) + " (sum over listed winners)",
             format_money(file.welfare));
  }

  auto const expected = run_mechanism(instance, file.rule);
  if (file.sorted_order != expected.sorted_order)
  {
    mismatch("sorted_order", ids_text(expected.sorted_order), ids_text(file.sorted_order));
  }
  if (file.winners != expected.allocation.winners)
  {
    mismatch("winners", ids_text(expected.allocation.winners), ids_text(file.winners));
  }
  if (std::abs(file.welfare - expected.welfare) > kMoneyTolerance)
  {
    mismatch("welfare", format_money(expected.welfare), format_money(file.welfare));
  }
  if (file.patients.size() != instance.size())
  {
    mismatch("patients", std::to_string(instance.size()) + " entries",
             std::to_string(file.patients.size()));
    return problems;
  }
  for (PatientId id = 0; id < instance.size(); ++id)
  {
    auto const &entry = file.patients[id];
    auto const  path  = "patients[" + std::to_string(id) + "]";
    auto const  won   = expected.allocation.is_winner(id);
    auto const &bid   = instance.bid(id);
    if (entry.id != id)
    {
      mismatch(path + ".id", std::to_string(id), std::to_string(entry.id));
    }
    if (entry.won != won)
    {
      mismatch(path + ".won", won ? "true" : "false", entry.won ? "true" : "false");
    }
    auto const charge = expected.payments.charges[id];
    if (std::abs(entry.charge - charge) > kMoneyTolerance)
    {
      mismatch(path + ".charge", format_money(charge), format_money(entry.charge));
    }
    if (entry.won ? entry.charge > bid.valuation + kMoneyTolerance : entry.charge != 0.0)
    {
      problems.push_back(path + ".charge: violates individual rationality");
    }
    std::vector<std::uint32_t> granted;
    if (won)
    {
      for (auto e : bid.demand)
      {
        granted.push_back(index_of(e));
      }
    }
    if (entry.granted != granted)
    {
      problems.push_back(path + ".granted: does not match the allocation");
    }
    if (entry.critical_index != expected.payments.critical_index[id])
    {
      auto show = [](std::optional<PatientId> v) { return v ? std::to_string(*v) : std::string("null"); };
      mismatch(path + ".critical_index", show(expected.payments.critical_index[id]),
               show(entry.critical_index));
    }
  }
  return problems;
}

std::string write_fuzz_summary(FuzzReport const &report)
{
  Json root;
  root["rule"]          = to_string(report.rule);
  root["instances_run"] = report.instances_run;
  root["properties"]    = Json::object();
  for (std::size_t p = 0; p < kPropertyCount; ++p)
  {
    if (!report.properties.enabled[p])
    {
      continue;
    }
    auto const &stats = report.stats[p];
    Json        entry;
    entry["checked"]    = stats.checked;
    entry["violations"] = stats.violations;
    if (stats.first_witness)
    {
      entry["first_witness"] = {{"seed", stats.first_witness->seed},
                                {"detail", stats.first_witness->detail},
                                {"instance", instance_json(stats.first_witness->instance)}};
    }
    else
    {
      entry["first_witness"] = nullptr;
    }
    root["properties"][to_string(static_cast<Property>(p))] = std::move(entry);
  }
  root["ratio_min"]        = format_money(report.ratio_min);
  root["rule_divergences"] = report.rule_divergences;
  root["total_violations"] = report.total_violations();
  return root.dump() + "\n";
}

std::string write_fuzz_text(FuzzReport const &report)
{
  std::ostringstream out;
  out << "rule: " << to_string(report.rule) << "\n";
  out << "instances: " << report.instances_run << "\n";
  for (std::size_t p = 0; p < kPropertyCount; ++p)
  {
    if (!report.properties.enabled[p])
    {
      continue;
    }
    auto const &stats = report.stats[p];
    out << to_string(static_cast<Property>(p)) << ": " << stats.violations << " violations in "
        << stats.checked << " instances";
    if (stats.first_witness)
    {
      out << " (first: seed " << stats.first_witness->seed << ", " << stats.first_witness->detail << ")";
    }
    out << "\n";
  }
  out << "ratio_min: " << format_money(report.ratio_min) << "\n";
  out << "rule_divergences: " << report.rule_divergences << "\n";
  return out.str();
}

}  // namespace gca
