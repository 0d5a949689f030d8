#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resample_lab/variance.hpp"

namespace resample_lab {

// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);  // "" when absent

// Comma-separated decimals, e.g. "0.5,0.25,0.25". Throws InvalidConfig.
std::vector<double> parse_number_list(const std::string& text);

// Header "scheme,n,closed_form,exact_enumeration,mc_estimate,mc_stderr,replicates";
// absent values are empty fields.
std::string variance_reports_csv(std::span<const VarianceReport> reports);

// JSON array of objects with the same field names; absent values are null.
std::string variance_reports_json(std::span<const VarianceReport> reports);

}  // namespace resample_lab
