#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "astars/bench.hpp"
#include "astars/faastars.hpp"

namespace astars {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Parses the whole field as a double; nullopt on any trailing garbage.
inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  if (s.empty()) {
    return std::nullopt;
  }
  if (s.front() == '+') {
    s.remove_prefix(1);
  }
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr std::string_view kHistoryHeader = "trial,iteration,fevals,fhat,ftrue";
inline constexpr std::string_view kSummaryHeader =
    "evals,q25_fhat,median_fhat,q75_fhat,q25_f,median_f,q75_f";

inline void write_report_comment(std::ostream& os, std::size_t trial, const PhaseReport& r) {
  os << "# trial=" << trial << " sigma2_hat=" << format_double(r.sigma2_hat) << " noise_confidence="
     << (r.noise_confidence == NoiseConfidence::Accepted ? "accepted" : "weak")
     << " l1_hat=" << format_double(r.l1_hat) << " burnin_steps=" << r.burnin_steps
     << " j_tilde=" << r.j_tilde
     << " delta=" << (r.delta ? format_double(*r.delta) : std::string("na"))
     << " surrogate=" << to_string(r.surrogate_used)
     << " fallback=" << (r.surrogate_fallback ? 1 : 0) << " retrains=" << r.retrains
     << " refit_failures=" << r.refit_failures << " provenance=" << to_string(r.provenance) << '\n';
}

/// One row per recorded iterate of every trial, in trial order. FAASTARS
/// phase reports go in a leading comment block.
inline void write_history_csv(std::ostream& os, const std::vector<TrialResult>& trials) {
  for (std::size_t t = 0; t < trials.size(); ++t) {
    if (trials[t].report) {
      write_report_comment(os, t, *trials[t].report);
    }
  }
  os << kHistoryHeader << '\n';
  for (std::size_t t = 0; t < trials.size(); ++t) {
    for (const auto& row : trials[t].run.history.rows()) {
      os << t << ',' << row.iteration << ',' << row.fevals << ',' << format_double(row.fhat) << ','
         << (row.ftrue ? format_double(*row.ftrue) : std::string()) << '\n';
    }
  }
}

struct SummarySeries {
  std::string label;
  std::vector<SummaryRow> rows;
};

/// Each series is a `# series: <label>` line followed by a header and rows.
inline void write_summary_csv(std::ostream& os, const std::vector<TrialSummary>& summaries) {
  for (const auto& s : summaries) {
    os << "# series: " << s.label << '\n';
    os << "# trials=" << s.trials << " completed=" << s.completed << " diverged=" << s.diverged
       << '\n';
    os << kSummaryHeader << '\n';
    for (const auto& r : s.rows) {
      os << r.evals << ',' << format_double(r.q25_fhat) << ',' << format_double(r.median_fhat)
         << ',' << format_double(r.q75_fhat) << ',' << format_double(r.q25_f) << ','
         << format_double(r.median_f) << ',' << format_double(r.q75_f) << '\n';
    }
  }
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) {
      return out;
    }
    start = pos + 1;
  }
}

inline std::vector<SummarySeries> parse_summary_csv(std::istream& is) {
  std::vector<SummarySeries> out;
  std::string line;
  std::size_t lineno = 0;
  bool expect_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view tag = "# series:";
      if (std::string_view(line).substr(0, tag.size()) == tag) {
        std::string label = line.substr(tag.size());
        const auto first = label.find_first_not_of(' ');
        label = first == std::string::npos ? std::string() : label.substr(first);
        out.push_back(SummarySeries{label, {}});
        expect_header = true;
      }
      continue;
    }
    if (line == kSummaryHeader) {
      if (!expect_header) {
        // unlabeled series
        out.push_back(SummarySeries{"series" + std::to_string(out.size() + 1), {}});
      }
      expect_header = false;
      continue;
    }
    if (expect_header || out.empty()) {
      throw CsvError(lineno, "expected header '" + std::string(kSummaryHeader) + "'");
    }
    const auto fields = split_commas(line);
    if (fields.size() != 7) {
      throw CsvError(lineno, "expected 7 fields, found " + std::to_string(fields.size()));
    }
    std::array<double, 7> v{};
    for (std::size_t i = 0; i < 7; ++i) {
      const auto d = parse_double(fields[i]);
      if (!d) {
        throw CsvError(lineno, "field " + std::to_string(i + 1) + " is not a number: '" +
                                   std::string(fields[i]) + "'");
      }
      v[i] = *d;
    }
    if (!(v[0] >= 0.0) || v[0] != std::floor(v[0])) {
      throw CsvError(lineno, "evals must be a nonnegative integer");
    }
    out.back().rows.push_back(
        SummaryRow{static_cast<std::size_t>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6]});
  }
  if (expect_header) {
    throw CsvError(lineno, "series without header");
  }
  return out;
}

struct HistoryCsvRow {
  std::size_t trial = 0;
  HistoryRow row;
};

inline std::vector<HistoryCsvRow> parse_history_csv(std::istream& is) {
  std::vector<HistoryCsvRow> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (!header) {
      if (line != kHistoryHeader) {
        throw CsvError(lineno, "expected header '" + std::string(kHistoryHeader) + "'");
      }
      header = true;
      continue;
    }
    const auto f = split_commas(line);
    if (f.size() != 5) {
      throw CsvError(lineno, "expected 5 fields, found " + std::to_string(f.size()));
    }
    const auto trial = parse_double(f[0]);
    const auto it = parse_double(f[1]);
    const auto ev = parse_double(f[2]);
    const auto fhat = parse_double(f[3]);
    if (!trial || !it || !ev || !fhat) {
      throw CsvError(lineno, "malformed history row");
    }
    std::optional<double> ftrue;
    if (!f[4].empty()) {
      ftrue = parse_double(f[4]);
      if (!ftrue) {
        throw CsvError(lineno, "malformed ftrue field");
      }
    }
    out.push_back(HistoryCsvRow{
        static_cast<std::size_t>(*trial),
        HistoryRow{static_cast<std::size_t>(*it), static_cast<std::size_t>(*ev), *fhat, ftrue}});
  }
  if (!header) {
    throw CsvError(lineno, "missing header");
  }
  return out;
}

}  // namespace astars
