/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_CORE_MODEL_HPP
#define CIA_CORE_MODEL_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "cia/money.hpp"

namespace cia {

/// One AD competing in one auction: the matched keyword's fixed bid plus the
/// predicted click/conversion probabilities and the commodity price.
struct AuctionCandidate {
  std::string ad_id;
  Money keyword_bid;  // b_j, >= 0
  double ctr = 0.0;   // in [0,1]
  double cvr = 0.0;   // in [0,1]
  Money item_price;   // ip_j, > 0

  /// Expected conversion value of one impression: ctr * cvr * ip.
  double expected_gmv() const {
    return ctr * cvr * item_price.to_double();
  }
};

struct AuctionRecord {
  std::string auction_id;
  int day = 0;
  int slots = 1;  // N, number of ad positions
  Money reserve_price = Money::from_units(100);
  std::vector<AuctionCandidate> candidates;
};

/// Throws InvalidRecord on any field-range or duplicate-ad violation.
void validate_record(const AuctionRecord& record);

/// Immutable once built; shared freely across concurrent readers.
struct AuctionLog {
  std::vector<AuctionRecord> records;
  // Inverted index: ad_id -> ascending positions in `records`.
  std::unordered_map<std::string, std::vector<std::uint32_t>> ad_index;
  std::vector<int> days;  // distinct day ids, ascending

  bool has_ad(const std::string& ad_id) const {
    return ad_index.find(ad_id) != ad_index.end();
  }
};

/// Validates every record and builds the inverted index and day list.
/// Record order is preserved. Throws EmptyLog when `records` is empty.
AuctionLog build_ad_index(std::vector<AuctionRecord> records);

struct Campaign {
  std::string campaign_id;
  std::vector<std::string> ad_ids;  // unique, the n ADs
  std::vector<Money> bid_lower;     // l, per AD
  std::vector<Money> bid_upper;     // u, per AD, 0 <= l_i <= u_i

  void validate() const;  // throws InvalidRecord
};

/// Aggregated replay outcome for one AD. cost and gmv are expected values
/// (ctr-weighted), not sampled realizations; with a multi-day filter all
/// fields are per-day averages.
struct ReplaySummary {
  double cost = 0.0;         // sum ctr * click_price
  double gmv = 0.0;          // sum ctr * cvr * ip over won slots
  double impressions = 0.0;  // number of won slots
  double clicks = 0.0;       // sum ctr over won slots
  double conversions = 0.0;  // sum ctr * cvr over won slots

  ReplaySummary& operator+=(const ReplaySummary& other) {
    cost += other.cost;
    gmv += other.gmv;
    impressions += other.impressions;
    clicks += other.clicks;
    conversions += other.conversions;
    return *this;
  }
  ReplaySummary scaled(double factor) const {
    return {cost * factor, gmv * factor, impressions * factor,
            clicks * factor, conversions * factor};
  }
};

/// Day selection for replay and inference: all days or an inclusive range.
class DayFilter {
 public:
  static DayFilter all() { return DayFilter(); }
  static DayFilter range(int lo, int hi) { return DayFilter(lo, hi); }
  static DayFilter single(int day) { return DayFilter(day, day); }

  bool contains(int day) const { return day >= lo_ && day <= hi_; }
  bool is_all() const {
    return lo_ == std::numeric_limits<int>::min() &&
           hi_ == std::numeric_limits<int>::max();
  }
  int lo() const { return lo_; }
  int hi() const { return hi_; }

  /// Number of the log's days selected by this filter.
  int count_in(const AuctionLog& log) const;

 private:
  DayFilter() = default;
  DayFilter(int lo, int hi) : lo_(lo), hi_(hi) {}
  int lo_ = std::numeric_limits<int>::min();
  int hi_ = std::numeric_limits<int>::max();
};

}  // namespace cia

#endif  // CIA_CORE_MODEL_HPP
