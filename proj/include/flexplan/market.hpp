#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexplan {

/// Aligned per-slot price series.  Tertiary prices are absent for slots in
/// which the balancing market saw no activity.
struct PriceSet {
    std::vector<std::string> timestamps;
    std::vector<double> dayahead;                       // EUR/MWh, required
    std::vector<std::optional<double>> tertiary_up;     // pi_s+ per slot
    std::vector<std::optional<double>> tertiary_down;   // pi_s- per slot
    std::optional<std::vector<double>> sell_dayahead;

    int n_slots() const { return static_cast<int>(dayahead.size()); }

    /// Sub-range [begin, begin+count), used for rolling windows.
    PriceSet slice(int begin, int count) const;
};

struct PriceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ColumnMap {
    std::string timestamp = "timestamp";
    std::string dayahead = "dayahead_eur_mwh";
    std::string tertiary_up = "tertiary_up_eur_mwh";
    std::string tertiary_down = "tertiary_down_eur_mwh";
    std::string sell_dayahead = "sell_dayahead_eur_mwh";
};

/// Reads the price CSV.  Empty tertiary cells become absent values; an empty
/// day-ahead cell, a malformed row, or a non-increasing / duplicated
/// timestamp raises PriceError with the offending line number.
PriceSet load_prices(const std::string& path, const ColumnMap& cols = {});

void save_prices(const PriceSet& ps, const std::string& path,
                 const ColumnMap& cols = {});

struct SpreadSeries {
    std::vector<std::optional<double>> up;    // S+ = pi_s+ - pi_b
    std::vector<std::optional<double>> down;  // S- = pi_b - pi_s-
};

SpreadSeries spreads(const PriceSet& ps);

}  // namespace flexplan
