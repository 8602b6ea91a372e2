/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_INFERENCE_HPP
#define CIA_INFERENCE_HPP

#include <optional>
#include <span>
#include <string>

#include "cia/core_model.hpp"
#include "cia/replay.hpp"

namespace cia {

struct AlphaInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_clamped = false;  // inversion hit the alpha search bound
  bool hi_clamped = false;

  bool clamped() const { return lo_clamped || hi_clamped; }
};

/// Per-AD quantities inferred from keyword-level bid settings:
///   R  = sum(ctr*cvr*ip) / sum(ctr*b)   expected ROI (lower bound)
///   tk = 1/R                            take-rate
///   B  = sum(ctr*b)                     virtual daily budget
/// Sums run over every auction the AD entered in the selected days, won or
/// not, so tk does not depend on competitive outcomes.
struct AdProfile {
  std::string ad_id;
  double expected_roi = 0.0;
  double take_rate = 0.0;
  double virtual_budget = 0.0;  // currency units
  std::optional<AlphaInterval> alpha_range;
};

/// Throws DegenerateAd when either accumulated sum is zero (tk cannot be
/// inferred; the caller must exclude the AD) and UnknownAd for missing ids.
AdProfile compute_profile(const AuctionLog& log, const std::string& ad_id,
                          const DayFilter& days = DayFilter::all());

/// First-order take-rate response to keyword bid changes:
///   dtk = sum(ctr_j * db_j) / sum(ctr_j * cvr_j * ip_j).
/// `bid_deltas` aligns with the AD's auctions in filtered log order; since
/// tk is linear in the bids this equals full recomputation exactly.
double propagate_tk_delta(const AuctionLog& log, const std::string& ad_id,
                          std::span<const Money> bid_deltas,
                          const DayFilter& days = DayFilter::all());

/// Uniform-delta convenience overload.
double propagate_tk_delta(const AuctionLog& log, const std::string& ad_id,
                          Money uniform_delta,
                          const DayFilter& days = DayFilter::all());

/// Number of auctions of the AD inside the filter, i.e. the length the
/// per-auction delta span must have.
std::size_t auction_count(const AuctionLog& log, const std::string& ad_id,
                          const DayFilter& days = DayFilter::all());

/// Mean logged keyword bid of the AD inside the filter (lattice-rounded);
/// zero when the AD never appears. Anchors default bid-bound choices.
Money mean_logged_bid(const AuctionLog& log, const std::string& ad_id,
                      const DayFilter& days = DayFilter::all());

/// Maps the advertiser's tolerable bid range [lower, upper] to an alpha
/// range: replays both bounds as uniform keyword-level bids to get the cost
/// range, then inverts each cost back to alpha with binary search over
/// [1e-3, 1e3]. Clamped inversions are flagged on the interval, not errors.
AlphaInterval feasible_alpha_range(const AuctionLog& log,
                                   const std::string& ad_id,
                                   const AdProfile& profile, Money bid_lower,
                                   Money bid_upper,
                                   const DayFilter& days = DayFilter::all());

}  // namespace cia

#endif  // CIA_INFERENCE_HPP
