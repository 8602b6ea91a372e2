/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/log_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "cia/error.hpp"
#include "cia/rng.hpp"

namespace cia {

namespace {

using ordered_json = nlohmann::ordered_json;

void require(bool ok, const char* field) {
  if (!ok) {
    throw InvalidConfig(std::string("invalid synth config field '") + field +
                        "'");
  }
}

void check_shape(const BetaShape& s, const char* field) {
  require(s.mean_lo > 0.0 && s.mean_lo <= s.mean_hi && s.mean_hi < 1.0, field);
  require(s.concentration > 0.0, field);
}

std::string ad_name(int index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ad%0*d", std::min(width, 9), index);
  return buf;
}

struct AdParams {
  std::string id;
  double ctr_mean;
  double cvr_mean;
  Money item_price;
  Money bid_level;
  double popularity;
};

}  // namespace

void SynthConfig::validate() const {
  require(num_ads >= 1, "num_ads");
  require(num_days >= 1, "num_days");
  require(auctions_per_day >= 1, "auctions_per_day");
  require(auctions_per_day >= num_ads,
          "auctions_per_day (must be >= num_ads so every AD appears daily)");
  require(slots >= 1, "slots");
  check_shape(ctr_shape, "ctr_shape");
  check_shape(cvr_shape, "cvr_shape");
  require(price_range.lo.units() > 0 && price_range.lo <= price_range.hi,
          "price_range");
  require(!bid_level_range.lo.is_negative() &&
              bid_level_range.lo <= bid_level_range.hi,
          "bid_level_range");
  require(candidates_per_auction.lo >= 1 &&
              candidates_per_auction.lo <= candidates_per_auction.hi,
          "candidates_per_auction");
  require(quality_range.lo > 0.0 && quality_range.lo <= quality_range.hi,
          "quality_range");
  require(!reserve_price.is_negative(), "reserve_price");
}

AuctionLog generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);

  const int width = std::max<int>(4, std::to_string(config.num_ads - 1).size());
  std::vector<AdParams> ads;
  ads.reserve(config.num_ads);
  for (int i = 0; i < config.num_ads; ++i) {
    AdParams p;
    p.id = ad_name(i, width);
    p.ctr_mean = rng.uniform(config.ctr_shape.mean_lo, config.ctr_shape.mean_hi);
    p.cvr_mean = rng.uniform(config.cvr_shape.mean_lo, config.cvr_shape.mean_hi);
    p.item_price = Money::from_units(
        rng.uniform_int(config.price_range.lo.units(), config.price_range.hi.units()));
    p.bid_level = Money::from_units(rng.uniform_int(
        config.bid_level_range.lo.units(), config.bid_level_range.hi.units()));
    p.popularity = std::exp(rng.uniform(-1.0, 1.0));
    ads.push_back(std::move(p));
  }

  std::vector<double> cumulative(config.num_ads);
  double total_weight = 0.0;
  for (int i = 0; i < config.num_ads; ++i) {
    total_weight += ads[i].popularity;
    cumulative[i] = total_weight;
  }

  std::vector<AuctionRecord> records;
  records.reserve(static_cast<std::size_t>(config.num_days) *
                  config.auctions_per_day);
  std::vector<char> used(config.num_ads, 0);
  std::vector<int> members;

  for (int day = 0; day < config.num_days; ++day) {
    for (int t = 0; t < config.auctions_per_day; ++t) {
      int m = static_cast<int>(rng.uniform_int(config.candidates_per_auction.lo,
                                               config.candidates_per_auction.hi));
      m = std::min(m, config.num_ads);

      members.clear();
      const int forced = t % config.num_ads;
      members.push_back(forced);
      used[forced] = 1;
      int attempts = 0;
      const int max_attempts = 64 * m + 64;
      while (static_cast<int>(members.size()) < m && attempts < max_attempts) {
        ++attempts;
        const double w = rng.uniform() * total_weight;
        const int idx = static_cast<int>(
            std::upper_bound(cumulative.begin(), cumulative.end(), w) -
            cumulative.begin());
        const int pick = std::min(idx, config.num_ads - 1);
        if (!used[pick]) {
          used[pick] = 1;
          members.push_back(pick);
        }
      }
      for (int i = 0; static_cast<int>(members.size()) < m; ++i) {
        if (!used[i]) {
          used[i] = 1;
          members.push_back(i);
        }
      }

      AuctionRecord record;
      char id_buf[48];
      std::snprintf(id_buf, sizeof id_buf, "d%d-q%d", day, t);
      record.auction_id = id_buf;
      record.day = day;
      record.slots = config.slots;
      record.reserve_price = config.reserve_price;
      record.candidates.reserve(members.size());
      const double intent =
          rng.uniform(config.quality_range.lo, config.quality_range.hi);
      for (int idx : members) {
        const AdParams& p = ads[idx];
        AuctionCandidate c;
        c.ad_id = p.id;
        c.ctr = rng.beta_mean_conc(p.ctr_mean, config.ctr_shape.concentration);
        c.cvr = std::min(
            1.0, intent * rng.beta_mean_conc(p.cvr_mean,
                                             config.cvr_shape.concentration));
        const double noise = rng.uniform(0.8, 1.2);
        c.keyword_bid = Money::from_units(static_cast<std::int64_t>(
            std::llround(static_cast<double>(p.bid_level.units()) * noise)));
        c.item_price = p.item_price;
        record.candidates.push_back(std::move(c));
        used[idx] = 0;
      }
      records.push_back(std::move(record));
    }
  }
  return build_ad_index(std::move(records));
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return 1.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double gap = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    gap = std::max(gap, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
  }
  return gap;
}

StationarityReport stationarity_report(const AuctionLog& log,
                                       std::span<const std::string> ad_ids) {
  if (log.days.size() < 2) {
    throw SingleDayLog("stationarity report needs at least 2 days");
  }
  std::unordered_map<int, std::size_t> day_slot;
  for (std::size_t i = 0; i < log.days.size(); ++i) day_slot[log.days[i]] = i;
  const std::size_t num_days = log.days.size();

  StationarityReport report;
  for (const std::string& ad_id : ad_ids) {
    auto it = log.ad_index.find(ad_id);
    if (it == log.ad_index.end()) {
      throw UnknownAd("ad '" + ad_id + "' not present in log", "log_synth");
    }
    std::vector<double> volume(num_days, 0.0);
    std::vector<std::vector<double>> ctr_by_day(num_days);
    std::vector<std::vector<double>> cvr_by_day(num_days);
    for (std::uint32_t pos : it->second) {
      const AuctionRecord& record = log.records[pos];
      const std::size_t d = day_slot.at(record.day);
      volume[d] += 1.0;
      for (const AuctionCandidate& c : record.candidates) {
        if (c.ad_id == ad_id) {
          ctr_by_day[d].push_back(c.ctr);
          cvr_by_day[d].push_back(c.cvr);
          break;
        }
      }
    }

    AdStationarity row;
    row.ad_id = ad_id;
    double mean = 0.0;
    for (double v : volume) mean += v;
    mean /= static_cast<double>(num_days);
    double var = 0.0;
    for (double v : volume) var += (v - mean) * (v - mean);
    var /= static_cast<double>(num_days);
    row.volume_mean = mean;
    row.volume_std = std::sqrt(var);
    for (std::size_t d = 0; d + 1 < num_days; ++d) {
      row.ctr_cdf_gap = std::max(
          row.ctr_cdf_gap, ks_distance(ctr_by_day[d], ctr_by_day[d + 1]));
      row.cvr_cdf_gap = std::max(
          row.cvr_cdf_gap, ks_distance(cvr_by_day[d], cvr_by_day[d + 1]));
    }
    report.ads.push_back(std::move(row));
  }
  return report;
}

std::string SynthConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["num_ads"] = num_ads;
  j["num_days"] = num_days;
  j["auctions_per_day"] = auctions_per_day;
  j["slots"] = slots;
  auto shape = [](const BetaShape& s) {
    ordered_json sj;
    sj["mean_lo"] = s.mean_lo;
    sj["mean_hi"] = s.mean_hi;
    sj["concentration"] = s.concentration;
    return sj;
  };
  j["ctr_shape"] = shape(ctr_shape);
  j["cvr_shape"] = shape(cvr_shape);
  j["price_range"] = {{"lo", price_range.lo.str()}, {"hi", price_range.hi.str()}};
  j["bid_level_range"] = {{"lo", bid_level_range.lo.str()},
                          {"hi", bid_level_range.hi.str()}};
  j["candidates_per_auction"] = {{"lo", candidates_per_auction.lo},
                                 {"hi", candidates_per_auction.hi}};
  j["quality_range"] = {{"lo", quality_range.lo}, {"hi", quality_range.hi}};
  j["reserve_price"] = reserve_price.str();
  return j.dump(2);
}

SynthConfig SynthConfig::from_json(const std::string& text) {
  SynthConfig config;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("synth config is not valid JSON: ") +
                        e.what());
  }
  try {
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("num_ads")) config.num_ads = j["num_ads"].get<int>();
    if (j.contains("num_days")) config.num_days = j["num_days"].get<int>();
    if (j.contains("auctions_per_day")) {
      config.auctions_per_day = j["auctions_per_day"].get<int>();
    }
    if (j.contains("slots")) config.slots = j["slots"].get<int>();
    auto shape = [](const nlohmann::json& sj, BetaShape& s) {
      if (sj.contains("mean_lo")) s.mean_lo = sj["mean_lo"].get<double>();
      if (sj.contains("mean_hi")) s.mean_hi = sj["mean_hi"].get<double>();
      if (sj.contains("concentration")) {
        s.concentration = sj["concentration"].get<double>();
      }
    };
    if (j.contains("ctr_shape")) shape(j["ctr_shape"], config.ctr_shape);
    if (j.contains("cvr_shape")) shape(j["cvr_shape"], config.cvr_shape);
    auto money_range = [](const nlohmann::json& rj, MoneyRange& r) {
      if (rj.contains("lo")) r.lo = Money::parse(rj["lo"].get<std::string>());
      if (rj.contains("hi")) r.hi = Money::parse(rj["hi"].get<std::string>());
    };
    if (j.contains("price_range")) money_range(j["price_range"], config.price_range);
    if (j.contains("bid_level_range")) {
      money_range(j["bid_level_range"], config.bid_level_range);
    }
    if (j.contains("candidates_per_auction")) {
      const auto& rj = j["candidates_per_auction"];
      if (rj.contains("lo")) config.candidates_per_auction.lo = rj["lo"].get<int>();
      if (rj.contains("hi")) config.candidates_per_auction.hi = rj["hi"].get<int>();
    }
    if (j.contains("quality_range")) {
      const auto& rj = j["quality_range"];
      if (rj.contains("lo")) config.quality_range.lo = rj["lo"].get<double>();
      if (rj.contains("hi")) config.quality_range.hi = rj["hi"].get<double>();
    }
    if (j.contains("reserve_price")) {
      config.reserve_price = Money::parse(j["reserve_price"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("bad synth config field: ") + e.what());
  }
  config.validate();
  return config;
}

SynthConfig SynthConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synth config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace cia
