// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Seeded synthetic city: business, residential and park regions on a grid
// exchanging trips on daily schedules.
//
// Trip sources, per interval:
//   background  every region, archetype-shaped daily curve with mean
//               `base_rate`, to itself or a geographic neighbor;
//   commute     residential -> business in the morning, business ->
//               residential in the evening. Each residential region is linked
//               to up to two business regions and picks one of them per day;
//   leisure     residential -> park around midday (mostly weekends), and back
//               in the afternoon;
//   onward      a share of commute/leisure arrivals depart again from their
//               destination in the next interval toward a neighboring cell.
// The daily business choice is visible only in origin-destination flows, not
// in per-region demand totals.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stdgat/data.hpp"
#include "stdgat/errors.hpp"

namespace stdgat {

enum class Archetype : char { kBusiness = 'B', kResidential = 'R', kPark = 'P' };

inline std::vector<Archetype> parse_archetypes(const std::string& letters) {
  std::vector<Archetype> out;
  for (char c : letters) {
    switch (c) {
      case 'B': case 'b': out.push_back(Archetype::kBusiness); break;
      case 'R': case 'r': out.push_back(Archetype::kResidential); break;
      case 'P': case 'p': out.push_back(Archetype::kPark); break;
      case ' ': case ',': case '\n': break;
      default: throw ConfigError(std::string("unknown archetype letter '") + c + "' (use B, R or P)");
    }
  }
  return out;
}

inline std::string archetype_letters(const std::vector<Archetype>& a) {
  std::string s;
  for (auto x : a) s.push_back(static_cast<char>(x));
  return s;
}

// Deterministic mixed layout: roughly 1/5 business, 1/5 park, rest residential.
inline std::vector<Archetype> default_archetypes(std::size_t n_rows, std::size_t n_cols) {
  std::vector<Archetype> out;
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const std::size_t k = (r + 2 * c) % 5;
      out.push_back(k == 0 ? Archetype::kBusiness : k == 4 ? Archetype::kPark : Archetype::kResidential);
    }
  }
  return out;
}

struct SyntheticConfig {
  std::uint64_t seed = 0;
  std::size_t n_rows = 6;
  std::size_t n_cols = 6;
  std::size_t n_days = 90;
  std::size_t intervals_per_day = 24;
  int start_weekday = 0;
  std::vector<Archetype> archetypes;  // empty: default_archetypes

  double base_rate = 2.0;         // background trips per region-interval, daily mean
  double commute_rate = 25.0;     // commuters per residential region at the morning peak
  double leisure_rate = 6.0;      // park visitors per residential region at the midday peak
  double weekend_commute = 0.3;   // commute multiplier on Saturday/Sunday
  double weekday_leisure = 0.3;   // leisure multiplier on Monday..Friday
  double return_share = 0.8;      // share of morning commuters riding home in the evening
  double onward_share = 0.6;      // share of arrivals departing again next interval
  double noise_sigma = 0.2;       // log-normal multiplicative noise
};

struct SyntheticMetadata {
  std::vector<Archetype> archetypes;
  std::vector<std::vector<std::uint32_t>> linked_business;  // per region (residential only)
  std::vector<std::vector<std::uint32_t>> daily_choice;     // [day][region], business picked; self if none
};

struct SyntheticCity {
  GridSpec grid;
  std::vector<TripRecord> trips;
  SyntheticMetadata metadata;
};

namespace detail {

// Hourly shapes indexed by hour of day.
inline constexpr std::array<double, 24> kMorningPeak = {0, 0, 0, 0, 0, 0, 0.15, 0.5, 1.0, 0.6, 0.1, 0,
                                                        0, 0, 0, 0, 0, 0,    0,   0,   0,   0,   0,   0};
inline constexpr std::array<double, 24> kEveningPeak = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                                        0, 0, 0, 0, 0.2, 0.6, 1.0, 0.5, 0.15, 0, 0, 0};
inline constexpr std::array<double, 24> kMiddayPeak = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.4, 1.0,
                                                       1.0, 0.8, 0.3, 0, 0, 0, 0, 0, 0, 0, 0, 0};
inline constexpr std::array<double, 24> kAfternoonPeak = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                                          0, 0, 0, 0.3, 0.8, 1.0, 0.5, 0.2, 0, 0, 0, 0};

// Background curve with unit mean over the day.
inline double background_shape(Archetype a, double hour) {
  constexpr double kPi = 3.14159265358979323846;
  switch (a) {
    case Archetype::kPark:
      return 1.0 + 0.3 * std::cos(2.0 * kPi * (hour - 13.0) / 24.0);
    case Archetype::kBusiness:
      return 1.0 + 0.6 * std::cos(2.0 * kPi * (hour - 14.0) / 24.0);
    case Archetype::kResidential:
      return 1.0 + 0.4 * std::cos(4.0 * kPi * (hour - 8.0) / 24.0);
  }
  return 1.0;
}

inline double lognormal_noise(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0) return 1.0;
  std::normal_distribution<double> z(0.0, 1.0);
  return std::exp(sigma * z(rng) - 0.5 * sigma * sigma);
}

inline std::uint64_t poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0) return 0;
  std::poisson_distribution<std::uint64_t> p(mean);
  return p(rng);
}

}  // namespace detail

inline SyntheticCity generate_synthetic_city(const SyntheticConfig& cfg) {
  if (cfg.n_days == 0) throw ConfigError("synthetic city needs at least one day");
  if (cfg.n_rows == 0 || cfg.n_cols == 0) throw ConfigError("grid needs at least one region");
  if (cfg.intervals_per_day == 0) throw ConfigError("intervals_per_day must be positive");

  SyntheticCity city;
  GridSpec& grid = city.grid;
  grid.n_rows = cfg.n_rows;
  grid.n_cols = cfg.n_cols;
  grid.intervals_per_day = cfg.intervals_per_day;
  grid.n_intervals = cfg.n_days * cfg.intervals_per_day;
  grid.interval_seconds = 86400 / static_cast<std::int64_t>(cfg.intervals_per_day);
  grid.start_weekday = cfg.start_weekday;

  const std::size_t n = grid.n_regions();
  auto arche = cfg.archetypes.empty() ? default_archetypes(cfg.n_rows, cfg.n_cols) : cfg.archetypes;
  if (arche.size() != n) {
    throw ConfigError("archetype map has " + std::to_string(arche.size()) + " entries for " +
                      std::to_string(n) + " regions");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uint32_t> business, parks;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (arche[i] == Archetype::kBusiness) business.push_back(i);
    if (arche[i] == Archetype::kPark) parks.push_back(i);
  }

  SyntheticMetadata& meta = city.metadata;
  meta.archetypes = arche;
  meta.linked_business.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (arche[i] != Archetype::kResidential || business.empty()) continue;
    std::vector<std::uint32_t> pool = business;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min<std::size_t>(2, pool.size()));
    std::sort(pool.begin(), pool.end());
    meta.linked_business[i] = pool;
  }

  const FixedGraph geo = build_fixed_graph(grid);
  auto neighbor_or_self = [&](std::uint32_t i) {
    const auto& nb = geo.neighbors_in[i];
    return nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
  };
  auto neighbor_not_self = [&](std::uint32_t i) {
    const auto& nb = geo.neighbors_in[i];
    if (nb.size() == 1) return i;
    while (true) {
      const auto j = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
      if (j != i) return j;
    }
  };

  const std::size_t ipd = cfg.intervals_per_day;
  auto& trips = city.trips;
  std::vector<std::uint64_t> arrivals(n, 0), next_arrivals(n, 0);
  std::vector<std::uint64_t> morning(n * n, 0);

  for (std::size_t day = 0; day < cfg.n_days; ++day) {
    const int dow = static_cast<int>((static_cast<std::size_t>(cfg.start_weekday) + day) % 7);
    const bool weekend = dow >= 5;
    const double commute_mult = weekend ? cfg.weekend_commute : 1.0;
    const double leisure_mult = weekend ? 1.0 : cfg.weekday_leisure;

    std::vector<std::uint32_t> choice(n), park_choice(n);
    std::vector<double> day_noise(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      choice[i] = i;
      const auto& links = meta.linked_business[i];
      if (!links.empty()) {
        choice[i] = links[std::uniform_int_distribution<std::size_t>(0, links.size() - 1)(rng)];
      }
      park_choice[i] = parks.empty() ? i : parks[std::uniform_int_distribution<std::size_t>(0, parks.size() - 1)(rng)];
      day_noise[i] = detail::lognormal_noise(rng, cfg.noise_sigma);
    }
    meta.daily_choice.push_back(choice);
    std::fill(morning.begin(), morning.end(), 0);
    std::vector<std::uint64_t> park_visits(n * n, 0);

    for (std::size_t slot = 0; slot < ipd; ++slot) {
      const auto t = static_cast<std::uint32_t>(day * ipd + slot);
      const double hour = static_cast<double>(slot) * 24.0 / static_cast<double>(ipd);
      const auto h = std::min<std::size_t>(23, static_cast<std::size_t>(hour));
      // Per-interval rates are specified hourly; rescale for other interval lengths.
      const double per_interval = 24.0 / static_cast<double>(ipd);
      arrivals.swap(next_arrivals);
      std::fill(next_arrivals.begin(), next_arrivals.end(), 0);

      auto emit = [&](std::uint32_t o, std::uint32_t d, std::uint64_t count, bool counts_as_arrival) {
        for (std::uint64_t k = 0; k < count; ++k) trips.push_back({o, d, t});
        if (counts_as_arrival && d != o) next_arrivals[d] += count;
      };

      for (std::uint32_t i = 0; i < n; ++i) {
        // Background.
        const double bg = cfg.base_rate * per_interval * detail::background_shape(arche[i], hour) *
                          detail::lognormal_noise(rng, cfg.noise_sigma);
        const std::uint64_t nbg = detail::poisson(rng, bg);
        for (std::uint64_t k = 0; k < nbg; ++k) trips.push_back({i, neighbor_or_self(i), t});

        // Onward trips from last interval's arrivals.
        if (arrivals[i] > 0) {
          std::binomial_distribution<std::uint64_t> onward(arrivals[i], std::clamp(cfg.onward_share, 0.0, 1.0));
          const std::uint64_t m = onward(rng);
          for (std::uint64_t k = 0; k < m; ++k) trips.push_back({i, neighbor_not_self(i), t});
        }

        if (arche[i] == Archetype::kResidential) {
          const double cell = detail::lognormal_noise(rng, cfg.noise_sigma);
          if (choice[i] != i) {
            const double rate = cfg.commute_rate * per_interval * detail::kMorningPeak[h] * commute_mult * day_noise[i] * cell;
            const std::uint64_t c = detail::poisson(rng, rate);
            morning[i * n + choice[i]] += c;
            emit(i, choice[i], c, true);
          }
          if (park_choice[i] != i) {
            const double rate = cfg.leisure_rate * per_interval * detail::kMiddayPeak[h] * leisure_mult * day_noise[i] * cell;
            const std::uint64_t c = detail::poisson(rng, rate);
            park_visits[i * n + park_choice[i]] += c;
            emit(i, park_choice[i], c, true);
          }
        }
      }

      // Return legs, spread over the evening / afternoon shapes.
      const double evening_total = [] {
        double s = 0;
        for (double v : detail::kEveningPeak) s += v;
        return s;
      }();
      const double afternoon_total = [] {
        double s = 0;
        for (double v : detail::kAfternoonPeak) s += v;
        return s;
      }();
      for (std::uint32_t r = 0; r < n; ++r) {
        for (std::uint32_t b = 0; b < n; ++b) {
          const std::uint64_t m = morning[r * n + b];
          if (m > 0 && detail::kEveningPeak[h] > 0) {
            const double rate = cfg.return_share * static_cast<double>(m) * detail::kEveningPeak[h] * per_interval / evening_total;
            emit(b, r, detail::poisson(rng, rate), true);
          }
          const std::uint64_t pv = park_visits[r * n + b];
          if (pv > 0 && detail::kAfternoonPeak[h] > 0) {
            const double rate = 0.9 * static_cast<double>(pv) * detail::kAfternoonPeak[h] * per_interval / afternoon_total;
            emit(b, r, detail::poisson(rng, rate), true);
          }
        }
      }
    }
  }

  std::stable_sort(trips.begin(), trips.end(), [](const TripRecord& a, const TripRecord& b) {
    if (a.start_interval != b.start_interval) return a.start_interval < b.start_interval;
    if (a.origin_region != b.origin_region) return a.origin_region < b.origin_region;
    return a.dest_region < b.dest_region;
  });
  return city;
}

}  // namespace stdgat
