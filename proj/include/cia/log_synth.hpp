/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_LOG_SYNTH_HPP
#define CIA_LOG_SYNTH_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cia/core_model.hpp"

namespace cia {

/// Beta-shaped per-AD distribution family: each AD's mean is drawn once from
/// [mean_lo, mean_hi]; the concentration is shared. mean_lo == mean_hi pins
/// every AD to the same distribution.
struct BetaShape {
  double mean_lo = 0.05;
  double mean_hi = 0.05;
  double concentration = 30.0;
};

struct MoneyRange {
  Money lo;
  Money hi;
};

struct IntRange {
  int lo = 1;
  int hi = 1;
};

/// Per-auction conversion-intent multiplier applied to every candidate's cvr
/// (clamped to [0,1]). Models the common component of conversion value that
/// bid*ctr ranking cannot see: a transactional query converts better for
/// every AD in it. [1,1] disables it.
struct QualityRange {
  double lo = 1.0;
  double hi = 1.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int num_ads = 10;
  int num_days = 7;
  int auctions_per_day = 1000;
  int slots = 3;
  BetaShape ctr_shape;
  BetaShape cvr_shape{0.02, 0.02, 20.0};
  MoneyRange price_range{Money::from_units(100'000),
                         Money::from_units(2'000'000)};  // 10 .. 200
  MoneyRange bid_level_range{Money::from_units(5'000),
                             Money::from_units(30'000)};  // 0.5 .. 3
  IntRange candidates_per_auction{2, 6};
  QualityRange quality_range;
  Money reserve_price = Money::from_units(100);  // 0.01

  void validate() const;  // throws InvalidConfig naming the violated field

  std::string to_json() const;
  static SynthConfig from_json(const std::string& text);
  static SynthConfig from_file(const std::string& path);
};

/// Generates a reproducible auction log. Pure function of the config: per-AD
/// ctr/cvr are drawn i.i.d. across days from fixed per-AD Beta distributions,
/// keyword bids are a per-AD level times a per-auction noise factor in
/// [0.8, 1.2], and every AD is force-included in at least one auction per day
/// (stationarity by construction).
AuctionLog generate(const SynthConfig& config);

struct AdStationarity {
  std::string ad_id;
  double volume_mean = 0.0;  // per-day auction count
  double volume_std = 0.0;   // population std over days
  double ctr_cdf_gap = 0.0;  // max day-over-day two-sample KS distance
  double cvr_cdf_gap = 0.0;
};

struct StationarityReport {
  std::vector<AdStationarity> ads;
};

/// Per-AD daily-volume and CTR/CVR distribution-drift diagnostics.
/// Throws SingleDayLog when the log has fewer than two days and UnknownAd
/// for ids missing from the log.
StationarityReport stationarity_report(const AuctionLog& log,
                                       std::span<const std::string> ad_ids);

/// Sup-norm distance between the empirical CDFs of two samples.
double ks_distance(std::vector<double> a, std::vector<double> b);

}  // namespace cia

#endif  // CIA_LOG_SYNTH_HPP
