#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "essarb/rng.hpp"

namespace essarb {

// Hourly price record. Timestamps are epoch seconds derived from the ISO-8601
// local market time in the CSV; no timezone handling is applied.
struct PricePoint {
    std::int64_t time;  // epoch seconds
    double price;       // $/MWh
};

struct PriceSeries {
    std::vector<PricePoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    double price(std::size_t i) const { return points[i].price; }
};

// Train strictly before the boundary, test at/after.
struct SplitSpec {
    std::int64_t boundary;  // epoch seconds
};

struct NormStats {
    double price_mean = 0.0;
    double price_std = 1.0;   // population std over the training partition
    double energy_scale = 1.0;  // E_max from the storage configuration
};

// Contiguous slice of a series: warmup_len hours of context followed by the
// episode segment.
struct PriceWindow {
    std::vector<double> prices;  // length warmup_len + episode_len
    std::size_t warmup_len = 0;
    std::int64_t start_time = 0;  // timestamp of prices[0]

    std::size_t episode_len() const { return prices.size() - warmup_len; }
    double episode_price(std::size_t t) const { return prices[warmup_len + t]; }
};

struct SeriesSummary {
    std::size_t count = 0;
    double min = 0.0, max = 0.0, mean = 0.0, std = 0.0;
    // Equal-width histograms; counts sum to `count` for prices and to
    // count - 1 for hourly changes.
    std::vector<double> price_edges;   // bins + 1 edges
    std::vector<std::size_t> price_counts;
    std::vector<double> change_edges;
    std::vector<std::size_t> change_counts;
};

constexpr std::int64_t kHourSeconds = 3600;

// Calendar helpers (proleptic Gregorian, no timezone).
std::int64_t parse_iso_timestamp(const std::string& text);  // throws DataError
std::string format_iso_timestamp(std::int64_t epoch_seconds);

// CSV with header `timestamp,price`. Validates strictly increasing, uniform
// 1-hour spacing and finite prices; errors carry 1-based line numbers.
PriceSeries load_prices(const std::string& path);

// Order-preserving exhaustive partition around spec.boundary; both parts must
// be non-empty.
std::pair<PriceSeries, PriceSeries> split(const PriceSeries& series, SplitSpec spec);

// Uniform start s in [warmup_len, size - episode_len]; the window covers
// [s - warmup_len, s + episode_len).
PriceWindow sample_window(const PriceSeries& train, std::size_t episode_len,
                          std::size_t warmup_len, Rng& rng);

// The window at a fixed start index (same layout as sample_window).
PriceWindow window_at(const PriceSeries& train, std::size_t start,
                      std::size_t episode_len, std::size_t warmup_len);

NormStats norm_stats(const PriceSeries& train, double energy_scale);

SeriesSummary describe(const PriceSeries& series, std::size_t bins = 50);

}  // namespace essarb
