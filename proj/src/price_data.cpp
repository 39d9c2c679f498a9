#include "essarb/price_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "essarb/errors.hpp"

namespace essarb {

namespace {

// Days since 1970-01-01 (Howard Hinnant's civil calendar algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_fixed_int(const std::string& s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

int days_in_month(int y, int m) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
    return days[m - 1];
}

}  // namespace

std::int64_t parse_iso_timestamp(const std::string& text) {
    // YYYY-MM-DD[T ]HH:MM[:SS]
    int y, mo, d, h, mi, se = 0;
    const bool shape_ok =
        parse_fixed_int(text, 0, 4, y) && text.size() > 4 && text[4] == '-' &&
        parse_fixed_int(text, 5, 2, mo) && text.size() > 7 && text[7] == '-' &&
        parse_fixed_int(text, 8, 2, d) && text.size() > 10 &&
        (text[10] == 'T' || text[10] == ' ') && parse_fixed_int(text, 11, 2, h) &&
        text.size() > 13 && text[13] == ':' && parse_fixed_int(text, 14, 2, mi);
    bool tail_ok = false;
    if (shape_ok) {
        if (text.size() == 16) {
            tail_ok = true;
        } else if (text.size() == 19 && text[16] == ':') {
            tail_ok = parse_fixed_int(text, 17, 2, se);
        }
    }
    if (!shape_ok || !tail_ok)
        throw DataError("invalid timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM[:SS])");
    if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h > 23 || mi > 59 || se > 59)
        throw DataError("timestamp '" + text + "' has out-of-range fields");
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_iso_timestamp(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                  static_cast<int>(sod / 3600), static_cast<int>((sod % 3600) / 60),
                  static_cast<int>(sod % 60));
    return buf;
}

PriceSeries load_prices(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open price file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("price file '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,price")
        throw DataError("price file '" + path + "' line 1: expected header 'timestamp,price'");

    PriceSeries series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError("price file '" + path + "' line " + std::to_string(line_no) +
                            ": expected 'timestamp,price'");
        std::int64_t t;
        try {
            t = parse_iso_timestamp(line.substr(0, comma));
        } catch (const DataError& e) {
            throw DataError("price file '" + path + "' line " + std::to_string(line_no) +
                            ": " + e.what());
        }
        const std::string num = line.substr(comma + 1);
        double price = 0.0;
        const char* first = num.data();
        const char* last = num.data() + num.size();
        auto [ptr, ec] = std::from_chars(first, last, price);
        if (ec != std::errc() || ptr != last || !std::isfinite(price))
            throw DataError("price file '" + path + "' line " + std::to_string(line_no) +
                            ": invalid price '" + num + "'");
        if (!series.points.empty()) {
            const std::int64_t prev = series.points.back().time;
            if (t != prev + kHourSeconds)
                throw DataError("price file '" + path + "' line " + std::to_string(line_no) +
                                ": timestamp " + format_iso_timestamp(t) +
                                " breaks uniform hourly spacing after " +
                                format_iso_timestamp(prev));
        }
        series.points.push_back({t, price});
    }
    if (series.points.empty())
        throw DataError("price file '" + path + "' contains no data rows");
    return series;
}

std::pair<PriceSeries, PriceSeries> split(const PriceSeries& series, SplitSpec spec) {
    if (series.empty()) throw DataError("split: empty series");
    PriceSeries train, test;
    for (const auto& p : series.points)
        (p.time < spec.boundary ? train : test).points.push_back(p);
    if (train.empty())
        throw DataError("split: boundary " + format_iso_timestamp(spec.boundary) +
                        " leaves an empty training partition");
    if (test.empty())
        throw DataError("split: boundary " + format_iso_timestamp(spec.boundary) +
                        " leaves an empty test partition");
    return {std::move(train), std::move(test)};
}

PriceWindow window_at(const PriceSeries& series, std::size_t start,
                      std::size_t episode_len, std::size_t warmup_len) {
    if (start < warmup_len || start + episode_len > series.size())
        throw DataError("window out of range");
    PriceWindow w;
    w.warmup_len = warmup_len;
    w.start_time = series.points[start - warmup_len].time;
    w.prices.reserve(warmup_len + episode_len);
    for (std::size_t i = start - warmup_len; i < start + episode_len; ++i)
        w.prices.push_back(series.points[i].price);
    return w;
}

PriceWindow sample_window(const PriceSeries& train, std::size_t episode_len,
                          std::size_t warmup_len, Rng& rng) {
    if (episode_len == 0) throw UsageError("sample_window: episode length must be positive");
    if (train.size() < episode_len + warmup_len)
        throw DataError("sample_window: series of length " + std::to_string(train.size()) +
                        " is shorter than warmup+episode = " +
                        std::to_string(warmup_len + episode_len));
    const std::size_t n_starts = train.size() - episode_len - warmup_len + 1;
    const std::size_t start = warmup_len + rng.uniform_index(n_starts);
    return window_at(train, start, episode_len, warmup_len);
}

NormStats norm_stats(const PriceSeries& train, double energy_scale) {
    if (train.empty()) throw DataError("norm_stats: empty series");
    double mean = 0.0;
    for (const auto& p : train.points) mean += p.price;
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const auto& p : train.points) {
        const double dv = p.price - mean;
        var += dv * dv;
    }
    var /= static_cast<double>(train.size());
    const double sd = std::sqrt(var);
    if (sd <= 0.0)
        throw DataError("norm_stats: constant price series has zero standard deviation");
    return {mean, sd, energy_scale};
}

namespace {

void fill_histogram(const std::vector<double>& values, std::size_t bins,
                    std::vector<double>& edges, std::vector<std::size_t>& counts) {
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    counts.assign(bins, 0);
    for (double v : values) {
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        std::size_t idx = static_cast<std::size_t>(it - edges.begin());
        idx = idx == 0 ? 0 : idx - 1;
        if (idx >= bins) idx = bins - 1;  // max value lands in the last bin
        counts[idx] += 1;
    }
}

}  // namespace

SeriesSummary describe(const PriceSeries& series, std::size_t bins) {
    if (series.size() < 2) throw DataError("describe: need at least 2 points");
    if (bins == 0) throw UsageError("describe: bins must be positive");

    SeriesSummary s;
    s.count = series.size();
    std::vector<double> prices, changes;
    prices.reserve(series.size());
    for (const auto& p : series.points) prices.push_back(p.price);
    changes.reserve(series.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i)
        changes.push_back(prices[i] - prices[i - 1]);

    s.min = *std::min_element(prices.begin(), prices.end());
    s.max = *std::max_element(prices.begin(), prices.end());
    double mean = 0.0;
    for (double v : prices) mean += v;
    mean /= static_cast<double>(prices.size());
    double var = 0.0;
    for (double v : prices) var += (v - mean) * (v - mean);
    var /= static_cast<double>(prices.size());
    s.mean = mean;
    s.std = std::sqrt(var);

    fill_histogram(prices, bins, s.price_edges, s.price_counts);
    fill_histogram(changes, bins, s.change_edges, s.change_counts);
    return s;
}

}  // namespace essarb
