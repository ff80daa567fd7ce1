#pragma once

// Text output shared by the CLI: locale-independent number formatting, flat
// `key = value` reports and the rate-curve CSV.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qss/exp_data.hpp"
#include "qss/finite_key.hpp"
#include "qss/keyrate.hpp"
#include "qss/protocol.hpp"

namespace qss::report {

/// Shortest general-format text with at most 10 significant digits
/// ("0.0001052948540", "787407", "1e+10", "inf", "nan").
std::string format_number(double value);

class KeyValueReport {
 public:
  using Entry = std::pair<std::string, std::string>;

  void add(std::string key, std::string_view value);
  void add(std::string key, const char* value) { add(std::move(key), std::string_view(value)); }
  void add(std::string key, double value);
  void add(std::string key, std::uint64_t value);
  void add(std::string key, std::int64_t value);
  void add(std::string key, int value) { add(std::move(key), static_cast<std::int64_t>(value)); }
  void add(std::string key, bool value);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// Value of the first entry with `key`, or nullptr.
  const std::string* find(std::string_view key) const;

  void write(std::ostream& out) const;

 private:
  std::vector<Entry> entries_;
};

/// Reads `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Throws Error(input) with the line number on lines without '='.
std::vector<KeyValueReport::Entry> parse_key_values(std::istream& in);

void add_budget(KeyValueReport& r, const finite_key::EpsilonBudget& eps);
void add_bound(KeyValueReport& r, std::string_view prefix, const finite_key::PhaseErrorBound& b);
void add_summary(KeyValueReport& r, const exp_data::ExperimentSummary& s);
void add_key_rate(KeyValueReport& r, const exp_data::KeyRateReport& k);
void add_tallies(KeyValueReport& r, const protocol::SiftedTallies& t);

/// L_km,mu,px,rate_per_pulse,ell,Ep_bar,EbX,N
std::string rate_csv_header();
std::string rate_csv_line(const keyrate::RatePoint& p);

}  // namespace qss::report
