#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clogit/simulate.hpp"
#include "clogit/stats.hpp"
#include "clogit/types.hpp"

namespace clogit {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buffer[32];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, res.ptr);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline double parse_double_field(const std::string& field, std::size_t line_number) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ParseError("line " + std::to_string(line_number) + ": expected a number, got '" +
                     field + "'");
  return value;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

// Long format: one row per alternative, header
// task_id,alt_id,chosen,<covariate names...>. Rows of one task must be
// contiguous; exactly one row per task has chosen=1, or none when the
// dataset includes an outside option and none was purchased.
inline ChoiceDataset read_choice_csv(std::istream& in, bool includes_outside_option,
                                     bool explicit_intercept = false) {
  ChoiceDataset data;
  data.includes_outside_option = includes_outside_option;
  data.explicit_intercept = explicit_intercept;

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input");
  line = detail::strip_cr(line);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "task_id" || header[1] != "alt_id" ||
      header[2] != "chosen")
    throw ParseError("header must be task_id,alt_id,chosen,<covariate names...>");
  data.covariate_names.assign(header.begin() + 3, header.end());
  const std::size_t k = data.covariate_names.size();

  std::set<std::string> seen_tasks;
  std::string current_id;
  ChoiceTask current;
  int chosen_count = 0;

  const auto flush_task = [&](std::size_t line_number) {
    if (current.alternatives.empty()) return;
    if (chosen_count == 0) {
      if (!includes_outside_option)
        throw ParseError("task '" + current_id +
                         "' has no chosen row and the dataset has no outside option (line " +
                         std::to_string(line_number) + ")");
      current.chosen = std::nullopt;
    }
    data.tasks.push_back(std::move(current));
    current = ChoiceTask{};
    chosen_count = 0;
  };

  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3 + k)
      throw ParseError("line " + std::to_string(line_number) + ": expected " +
                       std::to_string(3 + k) + " fields, got " + std::to_string(fields.size()));
    const std::string& task_id = fields[0];
    if (task_id.empty())
      throw ParseError("line " + std::to_string(line_number) + ": empty task_id");
    if (task_id != current_id) {
      flush_task(line_number);
      if (!seen_tasks.insert(task_id).second)
        throw ParseError("line " + std::to_string(line_number) + ": task '" + task_id +
                         "' is not contiguous");
      current_id = task_id;
    }
    const double chosen_flag = detail::parse_double_field(fields[2], line_number);
    if (chosen_flag != 0.0 && chosen_flag != 1.0)
      throw ParseError("line " + std::to_string(line_number) + ": chosen must be 0 or 1");
    Alternative alt;
    alt.covariates.resize(static_cast<Index>(k));
    for (std::size_t c = 0; c < k; ++c)
      alt.covariates(static_cast<Index>(c)) =
          detail::parse_double_field(fields[3 + c], line_number);
    if (chosen_flag == 1.0) {
      if (++chosen_count > 1)
        throw ParseError("line " + std::to_string(line_number) + ": task '" + task_id +
                         "' has more than one chosen row");
      current.chosen = static_cast<Index>(current.alternatives.size());
    }
    current.alternatives.push_back(std::move(alt));
  }
  flush_task(line_number);
  if (data.tasks.empty()) throw ParseError("no data rows");
  return data;
}

inline void write_choice_csv(std::ostream& out, const ChoiceDataset& data) {
  out << "task_id,alt_id,chosen";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << '\n';
  for (std::size_t t = 0; t < data.tasks.size(); ++t) {
    const auto& task = data.tasks[t];
    for (std::size_t j = 0; j < task.alternatives.size(); ++j) {
      out << 't' << t << ",a" << j << ','
          << (task.chosen && *task.chosen == static_cast<Index>(j) ? '1' : '0');
      const auto& x = task.alternatives[j].covariates;
      for (Index c = 0; c < x.size(); ++c) out << ',' << format_double(x(c));
      out << '\n';
    }
  }
}

inline ChoiceDataset read_choice_csv_file(const std::filesystem::path& path,
                                          bool includes_outside_option,
                                          bool explicit_intercept = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_choice_csv(in, includes_outside_option, explicit_intercept);
}

inline void write_choice_csv_file(const std::filesystem::path& path,
                                  const ChoiceDataset& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_choice_csv(out, data);
}

// ---------------------------------------------------------------------------
// Report writers. All formatting is fixed so identical inputs produce
// byte-identical files.

inline void write_estimates_csv(std::ostream& out, const std::vector<std::string>& names,
                                const VectorXd& normalized, const VectorXd& estimates,
                                const VectorXd& standard_errors) {
  out << "coef,estimate_normalized,estimate,std_err,z\n";
  for (Index i = 0; i < estimates.size(); ++i) {
    const double z = estimates(i) / standard_errors(i);
    out << names[i] << ',' << format_double(normalized(i)) << ','
        << format_double(estimates(i)) << ',' << format_double(standard_errors(i)) << ','
        << format_double(z) << '\n';
  }
}

inline void write_simulation_estimates_csv(std::ostream& out,
                                           const std::vector<std::string>& names,
                                           const MatrixXd& estimates,
                                           const std::vector<std::uint8_t>& converged) {
  out << "sim,coef,estimate,converged\n";
  for (Index s = 0; s < estimates.rows(); ++s)
    for (Index c = 0; c < estimates.cols(); ++c)
      out << s << ',' << names[c] << ',' << format_double(estimates(s, c)) << ','
          << int(converged[s]) << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<CoefficientSummary>& summary,
                              int n_converged, int n_simulations) {
  out << "coef,mean,sd,mc_std_err,n_converged,n_simulations\n";
  for (const auto& s : summary)
    out << s.name << ',' << format_double(s.mean) << ',' << format_double(s.sd) << ','
        << format_double(s.mc_standard_error) << ',' << n_converged << ',' << n_simulations
        << '\n';
}

inline void write_density_csv(std::ostream& out, const DensityCurve& curve) {
  out << "grid,density\n";
  for (Index i = 0; i < curve.grid.size(); ++i)
    out << format_double(curve.grid(i)) << ',' << format_double(curve.density(i)) << '\n';
}

inline void write_ks_csv(std::ostream& out, const std::vector<std::string>& names,
                         const std::vector<KsResult>& results) {
  out << "coef,statistic,p_value\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    out << names[i] << ',' << format_double(results[i].statistic) << ','
        << format_double(results[i].p_value) << '\n';
}

}  // namespace clogit
