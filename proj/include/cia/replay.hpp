/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_REPLAY_HPP
#define CIA_REPLAY_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cia/core_model.hpp"

namespace cia {

enum class BidKind {
  kKeyword,  // logged keyword bid times an optional scale
  kFixed,    // one uniform bid regardless of the logged one
  kCia,      // alpha * tk * cvr * ip per impression
};

struct BidRule {
  BidKind kind = BidKind::kKeyword;
  double scale = 1.0;      // kKeyword
  Money fixed_bid{};       // kFixed
  double alpha = 1.0;      // kCia, > 0
  double take_rate = 1.0;  // kCia, > 0

  static BidRule keyword(double scale = 1.0) {
    return {BidKind::kKeyword, scale, Money{}, 1.0, 1.0};
  }
  static BidRule fixed(Money bid) {
    return {BidKind::kFixed, 1.0, bid, 1.0, 1.0};
  }
  static BidRule cia(double alpha, double take_rate) {
    return {BidKind::kCia, 1.0, Money{}, alpha, take_rate};
  }
};

/// A default rule for every AD plus per-AD overrides. Bids are resolved as
/// real values; quantizing them would break the ranking-score identity
/// r = alpha * tk * ctr * cvr * ip, which must hold to 1e-9 relative.
class BidPolicy {
 public:
  BidPolicy() = default;
  explicit BidPolicy(BidRule default_rule) : default_rule_(default_rule) {}

  static BidPolicy keyword(double scale = 1.0) {
    return BidPolicy(BidRule::keyword(scale));
  }
  static BidPolicy fixed(Money bid) { return BidPolicy(BidRule::fixed(bid)); }
  static BidPolicy cia(double alpha, double take_rate) {
    return BidPolicy(BidRule::cia(alpha, take_rate));
  }

  BidPolicy& set_override(const std::string& ad_id, BidRule rule);
  const BidRule& rule_for(const std::string& ad_id) const;
  bool has_overrides() const { return !overrides_.empty(); }

  /// Resolved bid in currency units (real-valued, not lattice-quantized).
  double resolve_bid(const AuctionCandidate& candidate) const;

 private:
  BidRule default_rule_ = BidRule::keyword();
  std::unordered_map<std::string, BidRule> overrides_;
};

/// Ranking score: bid * ctr (eCPM up to a constant). Under a CIA rule this
/// equals alpha * tk * ctr * cvr * ip.
inline double score(const AuctionCandidate& candidate, double bid) {
  return bid * candidate.ctr;
}

struct SlotAward {
  std::uint32_t candidate = 0;  // index into record.candidates
  int slot = 0;                 // 0-based position
  Money click_price;            // GSP price, clipped into [reserve, own bid]
};

/// One GSP auction under the policy: qualifies candidates (bid >= reserve,
/// score > 0), ranks by score with ties broken by ascending ad_id, awards the
/// top-N slots, and prices each winner at the minimum it needs to keep its
/// slot: next score / own ctr, clipped into [reserve, own bid]; the last
/// qualified winner pays the reserve.
std::vector<SlotAward> replay_auction(const AuctionRecord& record,
                                      const BidPolicy& policy);

/// Daily performance of one AD under the policy: per-day average of the
/// ctr-weighted cost/GMV accumulation over every slot the AD wins in the
/// selected days. f, g, h are this function with a CIA, CIA, or keyword
/// policy respectively.
ReplaySummary evaluate(const AuctionLog& log, const std::string& ad_id,
                       const BidPolicy& policy,
                       const DayFilter& days = DayFilter::all());

/// One pass over every auction, accumulating all ADs simultaneously.
/// Equals per-AD evaluate calls when overrides touch a single AD; for
/// multi-AD policy changes this is the interacting-competition replay.
std::unordered_map<std::string, ReplaySummary> evaluate_all(
    const AuctionLog& log, const BidPolicy& policy,
    const DayFilter& days = DayFilter::all());

struct AlphaSample {
  double alpha = 0.0;
  ReplaySummary summary;
};

struct AlphaCurve {
  std::string ad_id;
  std::vector<AlphaSample> samples;  // strictly increasing alpha
};

/// Samples the alpha -> performance mapping. Asserts that cost, gmv,
/// impressions and clicks are non-decreasing in alpha, throwing NonMonotone
/// on violation (that would indicate a pricing bug, not an input problem).
AlphaCurve alpha_curve(const AuctionLog& log, const std::string& ad_id,
                       double take_rate, std::span<const double> alphas,
                       const DayFilter& days = DayFilter::all());

struct Inversion {
  double alpha = 0.0;
  double cost = 0.0;  // evaluate(...).cost at alpha
  bool clamped = false;
};

inline constexpr double kAlphaSearchLo = 1e-3;
inline constexpr double kAlphaSearchHi = 1e3;
inline constexpr int kMaxBisectionIters = 64;

/// Binary-searches alpha so the AD's replay cost hits target_cost within
/// max(0.1% of target, one minor money unit). Targets outside the achievable
/// range clamp to the nearest bound with clamped = true.
Inversion invert_cost(const AuctionLog& log, const std::string& ad_id,
                      double take_rate, double target_cost, double alpha_lo,
                      double alpha_hi,
                      const DayFilter& days = DayFilter::all());

/// Tolerance used by invert_cost for a given target.
inline double cost_tolerance(double target_cost) {
  constexpr double kMinorUnit = 1.0 / static_cast<double>(Money::kScale);
  return std::max(0.001 * target_cost, kMinorUnit);
}

}  // namespace cia

#endif  // CIA_REPLAY_HPP
