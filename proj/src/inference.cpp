/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/inference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cia/error.hpp"

namespace cia {

namespace {

struct AdSums {
  double gmv = 0.0;      // sum ctr * cvr * ip
  double bid_cost = 0.0; // sum ctr * b
};

const std::vector<std::uint32_t>& positions_of(const AuctionLog& log,
                                               const std::string& ad_id) {
  auto it = log.ad_index.find(ad_id);
  if (it == log.ad_index.end()) {
    throw UnknownAd("ad '" + ad_id + "' not present in log", "inference");
  }
  return it->second;
}

const AuctionCandidate& candidate_of(const AuctionRecord& record,
                                     const std::string& ad_id) {
  for (const AuctionCandidate& c : record.candidates) {
    if (c.ad_id == ad_id) return c;
  }
  throw UnknownAd("index inconsistency for ad '" + ad_id + "'", "inference");
}

AdSums accumulate_sums(const AuctionLog& log, const std::string& ad_id,
                       const DayFilter& days) {
  AdSums sums;
  for (std::uint32_t pos : positions_of(log, ad_id)) {
    const AuctionRecord& record = log.records[pos];
    if (!days.contains(record.day)) continue;
    const AuctionCandidate& c = candidate_of(record, ad_id);
    sums.gmv += c.expected_gmv();
    sums.bid_cost += c.ctr * c.keyword_bid.to_double();
  }
  return sums;
}

}  // namespace

AdProfile compute_profile(const AuctionLog& log, const std::string& ad_id,
                          const DayFilter& days) {
  const AdSums sums = accumulate_sums(log, ad_id, days);
  if (sums.gmv <= 0.0 || sums.bid_cost <= 0.0) {
    throw DegenerateAd("ad '" + ad_id +
                       "' has zero accumulated GMV or bid cost; take-rate "
                       "cannot be inferred");
  }
  AdProfile profile;
  profile.ad_id = ad_id;
  profile.expected_roi = sums.gmv / sums.bid_cost;
  profile.take_rate = 1.0 / profile.expected_roi;
  profile.virtual_budget = sums.bid_cost;
  return profile;
}

std::size_t auction_count(const AuctionLog& log, const std::string& ad_id,
                          const DayFilter& days) {
  std::size_t n = 0;
  for (std::uint32_t pos : positions_of(log, ad_id)) {
    if (days.contains(log.records[pos].day)) ++n;
  }
  return n;
}

double propagate_tk_delta(const AuctionLog& log, const std::string& ad_id,
                          std::span<const Money> bid_deltas,
                          const DayFilter& days) {
  const AdSums sums = accumulate_sums(log, ad_id, days);
  if (sums.gmv <= 0.0 || sums.bid_cost <= 0.0) {
    throw DegenerateAd("ad '" + ad_id + "' is degenerate; no take-rate to "
                       "propagate deltas onto");
  }

  double delta_cost = 0.0;
  std::size_t j = 0;
  for (std::uint32_t pos : positions_of(log, ad_id)) {
    const AuctionRecord& record = log.records[pos];
    if (!days.contains(record.day)) continue;
    if (j >= bid_deltas.size()) {
      throw InvalidRecord("bid delta span shorter than the AD's auction list",
                          "inference");
    }
    const AuctionCandidate& c = candidate_of(record, ad_id);
    delta_cost += c.ctr * bid_deltas[j].to_double();
    ++j;
  }
  if (j != bid_deltas.size()) {
    throw InvalidRecord("bid delta span longer than the AD's auction list",
                        "inference");
  }
  return delta_cost / sums.gmv;
}

double propagate_tk_delta(const AuctionLog& log, const std::string& ad_id,
                          Money uniform_delta, const DayFilter& days) {
  std::vector<Money> deltas(auction_count(log, ad_id, days), uniform_delta);
  return propagate_tk_delta(log, ad_id, deltas, days);
}

Money mean_logged_bid(const AuctionLog& log, const std::string& ad_id,
                      const DayFilter& days) {
  double sum_units = 0.0;
  std::size_t count = 0;
  for (std::uint32_t pos : positions_of(log, ad_id)) {
    const AuctionRecord& record = log.records[pos];
    if (!days.contains(record.day)) continue;
    sum_units +=
        static_cast<double>(candidate_of(record, ad_id).keyword_bid.units());
    ++count;
  }
  if (count == 0) return Money{};
  return Money::from_units(std::llround(sum_units / static_cast<double>(count)));
}

AlphaInterval feasible_alpha_range(const AuctionLog& log,
                                   const std::string& ad_id,
                                   const AdProfile& profile, Money bid_lower,
                                   Money bid_upper, const DayFilter& days) {
  if (bid_lower.units() <= 0 || bid_lower > bid_upper) {
    throw InvalidRecord("need 0 < bid_lower <= bid_upper for ad '" + ad_id +
                        "'", "inference");
  }

  auto cost_of_uniform_bid = [&](Money bid) {
    BidPolicy policy = BidPolicy::keyword();
    policy.set_override(ad_id, BidRule::fixed(bid));
    return evaluate(log, ad_id, policy, days).cost;
  };

  const double cost_lo = cost_of_uniform_bid(bid_lower);
  const Inversion lo = invert_cost(log, ad_id, profile.take_rate, cost_lo,
                                   kAlphaSearchLo, kAlphaSearchHi, days);
  AlphaInterval interval;
  if (bid_upper == bid_lower) {
    interval.lo = interval.hi = lo.alpha;
    interval.lo_clamped = interval.hi_clamped = lo.clamped;
  } else {
    const double cost_hi = cost_of_uniform_bid(bid_upper);
    const Inversion hi = invert_cost(log, ad_id, profile.take_rate, cost_hi,
                                     kAlphaSearchLo, kAlphaSearchHi, days);
    interval.lo = std::min(lo.alpha, hi.alpha);
    interval.hi = std::max(lo.alpha, hi.alpha);
    interval.lo_clamped = lo.clamped;
    interval.hi_clamped = hi.clamped;
  }
  return interval;
}

}  // namespace cia
