/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_LOG_IO_HPP
#define CIA_LOG_IO_HPP

#include <iosfwd>
#include <string>

#include "cia/core_model.hpp"

namespace cia {

// Auction logs travel as JSON Lines, one AuctionRecord per line:
//   {"auction_id":..,"day":..,"slots":..,"reserve_price":"0.01",
//    "candidates":[{"ad_id":..,"keyword_bid":"1.2","ctr":..,"cvr":..,
//                   "item_price":"35"}]}
// Monies are decimal strings with at most 4 fraction digits.

AuctionLog read_log_jsonl(std::istream& in);
AuctionLog read_log_file(const std::string& path);

void write_log_jsonl(const AuctionLog& log, std::ostream& out);
void write_log_file(const AuctionLog& log, const std::string& path);

/// Serializes one record to its canonical JSONL line (no trailing newline).
std::string record_to_jsonl(const AuctionRecord& record);

}  // namespace cia

#endif  // CIA_LOG_IO_HPP
