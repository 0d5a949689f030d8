#include "resample_lab/serialization.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "resample_lab/errors.hpp"

namespace resample_lab {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string();
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string token = text.substr(start, end - start);
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t\r");
    if (first == std::string::npos) throw InvalidConfig("empty entry in number list '" + text + "'");
    token = token.substr(first, last - first + 1);
    double value = 0.0;
    const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
    if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
      throw InvalidConfig("not a number: '" + token + "'");
    }
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

std::string variance_reports_csv(std::span<const VarianceReport> reports) {
  std::ostringstream out;
  out << "scheme,n,closed_form,exact_enumeration,mc_estimate,mc_stderr,replicates\n";
  for (const auto& r : reports) {
    out << scheme_name(r.scheme) << ',' << r.n << ',' << format_optional(r.closed_form) << ','
        << format_optional(r.exact_enumeration) << ',' << format_number(r.mc_estimate) << ','
        << format_number(r.mc_stderr) << ',' << r.replicates << '\n';
  }
  return out.str();
}

std::string variance_reports_json(std::span<const VarianceReport> reports) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  auto optional_value = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto& r : reports) {
    nlohmann::ordered_json row;
    row["scheme"] = std::string(scheme_name(r.scheme));
    row["n"] = r.n;
    row["closed_form"] = optional_value(r.closed_form);
    row["exact_enumeration"] = optional_value(r.exact_enumeration);
    row["mc_estimate"] = r.mc_estimate;
    row["mc_stderr"] = r.mc_stderr;
    row["replicates"] = r.replicates;
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

}  // namespace resample_lab
