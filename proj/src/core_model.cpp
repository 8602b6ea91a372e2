/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/core_model.hpp"

#include <algorithm>
#include <unordered_set>

#include "cia/error.hpp"

namespace cia {

void validate_record(const AuctionRecord& record) {
  auto fail = [&](const std::string& what) {
    throw InvalidRecord("auction '" + record.auction_id + "': " + what);
  };
  if (record.slots < 1) fail("slots must be >= 1");
  if (record.reserve_price.is_negative()) fail("reserve_price must be >= 0");
  if (record.candidates.empty()) fail("needs at least one candidate");

  std::unordered_set<std::string_view> seen;
  seen.reserve(record.candidates.size());
  for (const AuctionCandidate& c : record.candidates) {
    if (c.ad_id.empty()) fail("candidate with empty ad_id");
    if (!seen.insert(c.ad_id).second) fail("duplicate ad_id '" + c.ad_id + "'");
    if (c.ctr < 0.0 || c.ctr > 1.0) fail("ctr out of [0,1] for '" + c.ad_id + "'");
    if (c.cvr < 0.0 || c.cvr > 1.0) fail("cvr out of [0,1] for '" + c.ad_id + "'");
    if (c.item_price.units() <= 0) fail("item_price must be > 0 for '" + c.ad_id + "'");
    if (c.keyword_bid.is_negative()) fail("keyword_bid must be >= 0 for '" + c.ad_id + "'");
  }
}

AuctionLog build_ad_index(std::vector<AuctionRecord> records) {
  if (records.empty()) throw EmptyLog("auction log has no records");

  AuctionLog log;
  log.records = std::move(records);
  for (std::uint32_t pos = 0; pos < log.records.size(); ++pos) {
    const AuctionRecord& record = log.records[pos];
    validate_record(record);
    for (const AuctionCandidate& c : record.candidates) {
      log.ad_index[c.ad_id].push_back(pos);
    }
    log.days.push_back(record.day);
  }
  std::sort(log.days.begin(), log.days.end());
  log.days.erase(std::unique(log.days.begin(), log.days.end()),
                 log.days.end());
  return log;
}

void Campaign::validate() const {
  auto fail = [&](const std::string& what) {
    throw InvalidRecord("campaign '" + campaign_id + "': " + what);
  };
  if (ad_ids.empty()) fail("needs at least one AD");
  if (bid_lower.size() != ad_ids.size() || bid_upper.size() != ad_ids.size()) {
    fail("bid bound vectors must match ad_ids length");
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < ad_ids.size(); ++i) {
    if (!seen.insert(ad_ids[i]).second) fail("duplicate ad '" + ad_ids[i] + "'");
    if (bid_lower[i].is_negative() || bid_lower[i] > bid_upper[i]) {
      fail("needs 0 <= lower <= upper for ad '" + ad_ids[i] + "'");
    }
  }
}

int DayFilter::count_in(const AuctionLog& log) const {
  int n = 0;
  for (int day : log.days) n += contains(day) ? 1 : 0;
  return n;
}

}  // namespace cia
