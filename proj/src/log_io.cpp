/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/log_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cia/error.hpp"

namespace cia {

namespace {

using ordered_json = nlohmann::ordered_json;

Money money_field(const nlohmann::json& value, const char* key) {
  if (value.is_string()) return Money::parse(value.get<std::string>());
  if (value.is_number()) return Money::from_double(value.get<double>());
  throw ParseError(std::string("field '") + key +
                   "' must be a decimal string or number");
}

AuctionRecord record_from_json(const nlohmann::json& j) {
  AuctionRecord record;
  record.auction_id = j.at("auction_id").get<std::string>();
  record.day = j.at("day").get<int>();
  record.slots = j.at("slots").get<int>();
  if (auto it = j.find("reserve_price"); it != j.end()) {
    record.reserve_price = money_field(*it, "reserve_price");
  }
  for (const auto& cj : j.at("candidates")) {
    AuctionCandidate c;
    c.ad_id = cj.at("ad_id").get<std::string>();
    c.keyword_bid = money_field(cj.at("keyword_bid"), "keyword_bid");
    c.ctr = cj.at("ctr").get<double>();
    c.cvr = cj.at("cvr").get<double>();
    c.item_price = money_field(cj.at("item_price"), "item_price");
    record.candidates.push_back(std::move(c));
  }
  return record;
}

}  // namespace

std::string record_to_jsonl(const AuctionRecord& record) {
  ordered_json j;
  j["auction_id"] = record.auction_id;
  j["day"] = record.day;
  j["slots"] = record.slots;
  j["reserve_price"] = record.reserve_price.str();
  ordered_json candidates = ordered_json::array();
  for (const AuctionCandidate& c : record.candidates) {
    ordered_json cj;
    cj["ad_id"] = c.ad_id;
    cj["keyword_bid"] = c.keyword_bid.str();
    cj["ctr"] = c.ctr;
    cj["cvr"] = c.cvr;
    cj["item_price"] = c.item_price.str();
    candidates.push_back(std::move(cj));
  }
  j["candidates"] = std::move(candidates);
  return j.dump();
}

AuctionLog read_log_jsonl(std::istream& in) {
  std::vector<AuctionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      records.push_back(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("log line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return build_ad_index(std::move(records));
}

AuctionLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open log file '" + path + "'");
  return read_log_jsonl(in);
}

void write_log_jsonl(const AuctionLog& log, std::ostream& out) {
  for (const AuctionRecord& record : log.records) {
    out << record_to_jsonl(record) << '\n';
  }
}

void write_log_file(const AuctionLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write log file '" + path + "'");
  write_log_jsonl(log, out);
  out.flush();
  if (!out) throw IoError("failed writing log file '" + path + "'");
}

}  // namespace cia
