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
#include "gca/harness.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gca {

inline constexpr std::string_view kInstanceFormat = "gca-1";
inline constexpr std::string_view kResultFormat   = "gca-1-result";

/// Input rejected by one of the file readers. The message names the JSON path
/// of the first violated constraint.
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Shortest fixed-notation decimal that reads back to the same double.
std::string format_valuation(Money value);
/// Fixed notation with 9 fractional digits.
std::string format_money(Money value);
/// Parses an unsigned decimal string such as "12.5".
Money parse_money(std::string_view text, std::string const &path);

Instance    parse_instance(std::string_view text);
std::string write_instance(Instance const &instance);

struct ResultEntry
{
  PatientId                 id     = 0;
  bool                      won    = false;
  Money                     charge = 0.0;
  std::vector<std::uint32_t> granted;
  std::optional<PatientId>  critical_index;

  bool operator==(ResultEntry const &) const = default;
};

struct ResultFile
{
  PaymentRule              rule    = PaymentRule::kPaperLiteral;
  std::vector<PatientId>   winners;
  Money                    welfare = 0.0;
  std::vector<PatientId>   sorted_order;
  std::vector<ResultEntry> patients;

  bool operator==(ResultFile const &) const = default;
};

std::string write_result(MechanismResult const &result);
ResultFile  parse_result(std::string_view text);

/// Recomputes the mechanism for `instance` under the file's rule and checks
/// every field plus the structural invariants. Returns one line per mismatch.
std::vector<std::string> verify_result(Instance const &instance, ResultFile const &file);

std::string write_fuzz_summary(FuzzReport const &report);
std::string write_fuzz_text(FuzzReport const &report);

}  // namespace gca
