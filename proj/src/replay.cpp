/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/replay.hpp"

#include <algorithm>
#include <cmath>

#include "cia/error.hpp"

namespace cia {

BidPolicy& BidPolicy::set_override(const std::string& ad_id, BidRule rule) {
  overrides_[ad_id] = rule;
  return *this;
}

const BidRule& BidPolicy::rule_for(const std::string& ad_id) const {
  if (!overrides_.empty()) {
    auto it = overrides_.find(ad_id);
    if (it != overrides_.end()) return it->second;
  }
  return default_rule_;
}

double BidPolicy::resolve_bid(const AuctionCandidate& candidate) const {
  const BidRule& rule = rule_for(candidate.ad_id);
  switch (rule.kind) {
    case BidKind::kKeyword:
      return candidate.keyword_bid.to_double() * rule.scale;
    case BidKind::kFixed:
      return rule.fixed_bid.to_double();
    case BidKind::kCia:
      return rule.alpha * rule.take_rate * candidate.cvr *
             candidate.item_price.to_double();
  }
  return 0.0;
}

namespace {

struct RankedEntry {
  double score;
  double bid;
  std::uint32_t index;
};

/// Quantizes a clipped price onto the money lattice without ever leaving
/// the [reserve, bid] sandwich. The 1e-7 guard absorbs representation noise
/// when the real bid sits exactly on a lattice point.
Money quantize_price(double price, Money reserve, double bid) {
  std::int64_t units =
      std::llround(price * static_cast<double>(Money::kScale));
  const std::int64_t bid_cap = static_cast<std::int64_t>(
      std::floor(bid * static_cast<double>(Money::kScale) + 1e-7));
  units = std::clamp(units, reserve.units(), std::max(reserve.units(), bid_cap));
  return Money::from_units(units);
}

}  // namespace

std::vector<SlotAward> replay_auction(const AuctionRecord& record,
                                      const BidPolicy& policy) {
  const double reserve = record.reserve_price.to_double();

  std::vector<RankedEntry> ranked;
  ranked.reserve(record.candidates.size());
  for (std::uint32_t i = 0; i < record.candidates.size(); ++i) {
    const AuctionCandidate& c = record.candidates[i];
    const double bid = policy.resolve_bid(c);
    if (bid < reserve) continue;
    const double s = score(c, bid);
    if (s <= 0.0) continue;
    ranked.push_back({s, bid, i});
  }
  std::sort(ranked.begin(), ranked.end(),
            [&](const RankedEntry& a, const RankedEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return record.candidates[a.index].ad_id <
                     record.candidates[b.index].ad_id;
            });

  const std::size_t winners =
      std::min<std::size_t>(record.slots, ranked.size());
  std::vector<SlotAward> awards;
  awards.reserve(winners);
  for (std::size_t i = 0; i < winners; ++i) {
    const RankedEntry& entry = ranked[i];
    const double ctr = record.candidates[entry.index].ctr;
    double price = (i + 1 < ranked.size()) ? ranked[i + 1].score / ctr : reserve;
    price = std::min(std::max(price, reserve), entry.bid);
    awards.push_back({entry.index, static_cast<int>(i),
                      quantize_price(price, record.reserve_price, entry.bid)});
  }
  return awards;
}

namespace {

void accumulate(ReplaySummary& summary, const AuctionCandidate& c,
                Money click_price) {
  summary.cost += c.ctr * click_price.to_double();
  summary.gmv += c.expected_gmv();
  summary.impressions += 1.0;
  summary.clicks += c.ctr;
  summary.conversions += c.ctr * c.cvr;
}

}  // namespace

ReplaySummary evaluate(const AuctionLog& log, const std::string& ad_id,
                       const BidPolicy& policy, const DayFilter& days) {
  auto it = log.ad_index.find(ad_id);
  if (it == log.ad_index.end()) {
    throw UnknownAd("ad '" + ad_id + "' not present in log");
  }
  const int day_count = days.count_in(log);
  if (day_count == 0) return {};

  ReplaySummary total;
  for (std::uint32_t pos : it->second) {
    const AuctionRecord& record = log.records[pos];
    if (!days.contains(record.day)) continue;
    for (const SlotAward& award : replay_auction(record, policy)) {
      const AuctionCandidate& c = record.candidates[award.candidate];
      if (c.ad_id == ad_id) {
        accumulate(total, c, award.click_price);
        break;
      }
    }
  }
  return total.scaled(1.0 / static_cast<double>(day_count));
}

std::unordered_map<std::string, ReplaySummary> evaluate_all(
    const AuctionLog& log, const BidPolicy& policy, const DayFilter& days) {
  std::unordered_map<std::string, ReplaySummary> out;
  out.reserve(log.ad_index.size());
  for (const auto& [ad_id, positions] : log.ad_index) out[ad_id] = {};

  const int day_count = days.count_in(log);
  if (day_count == 0) return out;

  for (const AuctionRecord& record : log.records) {
    if (!days.contains(record.day)) continue;
    for (const SlotAward& award : replay_auction(record, policy)) {
      const AuctionCandidate& c = record.candidates[award.candidate];
      accumulate(out[c.ad_id], c, award.click_price);
    }
  }
  const double inv = 1.0 / static_cast<double>(day_count);
  for (auto& [ad_id, summary] : out) summary = summary.scaled(inv);
  return out;
}

AlphaCurve alpha_curve(const AuctionLog& log, const std::string& ad_id,
                       double take_rate, std::span<const double> alphas,
                       const DayFilter& days) {
  if (alphas.empty()) {
    throw InvalidConfig("alpha_curve needs at least one alpha", "replay_engine");
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] <= 0.0 || (i > 0 && alphas[i] <= alphas[i - 1])) {
      throw InvalidConfig("alphas must be strictly increasing and positive",
                          "replay_engine");
    }
  }

  AlphaCurve curve;
  curve.ad_id = ad_id;
  curve.samples.reserve(alphas.size());
  for (double alpha : alphas) {
    BidPolicy policy = BidPolicy::keyword();
    policy.set_override(ad_id, BidRule::cia(alpha, take_rate));
    AlphaSample sample{alpha, evaluate(log, ad_id, policy, days)};
    if (!curve.samples.empty()) {
      const ReplaySummary& prev = curve.samples.back().summary;
      const ReplaySummary& cur = sample.summary;
      if (cur.cost < prev.cost || cur.gmv < prev.gmv ||
          cur.impressions < prev.impressions || cur.clicks < prev.clicks) {
        throw NonMonotone("replay outcome decreased between alpha=" +
                          std::to_string(curve.samples.back().alpha) +
                          " and alpha=" + std::to_string(alpha) + " for ad '" +
                          ad_id + "'");
      }
    }
    curve.samples.push_back(std::move(sample));
  }
  return curve;
}

Inversion invert_cost(const AuctionLog& log, const std::string& ad_id,
                      double take_rate, double target_cost, double alpha_lo,
                      double alpha_hi, const DayFilter& days) {
  auto cost_at = [&](double alpha) {
    BidPolicy policy = BidPolicy::keyword();
    policy.set_override(ad_id, BidRule::cia(alpha, take_rate));
    return evaluate(log, ad_id, policy, days).cost;
  };
  const double tol = cost_tolerance(target_cost);

  double lo = alpha_lo, hi = alpha_hi;
  double cost_lo = cost_at(lo);
  if (std::abs(cost_lo - target_cost) <= tol) return {lo, cost_lo, false};
  if (target_cost < cost_lo) return {lo, cost_lo, true};

  double cost_hi = cost_at(hi);
  if (std::abs(cost_hi - target_cost) <= tol) return {hi, cost_hi, false};
  if (target_cost > cost_hi) return {hi, cost_hi, true};

  for (int iter = 0; iter < kMaxBisectionIters; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double cost_mid = cost_at(mid);
    if (std::abs(cost_mid - target_cost) <= tol) return {mid, cost_mid, false};
    if (cost_mid < target_cost) {
      lo = mid;
      cost_lo = cost_mid;
    } else {
      hi = mid;
      cost_hi = cost_mid;
    }
  }
  // Target sits inside a cost jump; report the nearer plateau edge.
  if (target_cost - cost_lo <= cost_hi - target_cost) {
    return {lo, cost_lo, false};
  }
  return {hi, cost_hi, false};
}

}  // namespace cia
