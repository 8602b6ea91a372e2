/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/money.hpp"

#include <array>
#include <cctype>
#include <cstdio>

#include "cia/error.hpp"

namespace cia {

Money Money::parse(std::string_view text) {
  const std::string_view original = text;
  auto fail = [&]() -> Money {
    throw ParseError("invalid money literal '" + std::string(original) + "'");
  };

  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) return fail();

  std::int64_t whole = 0;
  std::size_t i = 0;
  if (!std::isdigit(static_cast<unsigned char>(text[0])) && text[0] != '.') {
    return fail();
  }
  bool any_digit = false;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]));
       ++i) {
    whole = whole * 10 + (text[i] - '0');
    if (whole > 900'000'000'000'000) return fail();  // overflow guard
    any_digit = true;
  }

  std::int64_t frac_units = 0;
  if (i < text.size()) {
    if (text[i] != '.') return fail();
    ++i;
    std::size_t digits = 0;
    std::int64_t frac = 0;
    for (; i < text.size(); ++i, ++digits) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return fail();
      if (digits >= 4) return fail();  // wire format allows <= 4 digits
      frac = frac * 10 + (text[i] - '0');
    }
    if (digits == 0 && !any_digit) return fail();
    for (std::size_t d = digits; d < 4; ++d) frac *= 10;
    frac_units = frac;
  } else if (!any_digit) {
    return fail();
  }

  std::int64_t units = whole * kScale + frac_units;
  return from_units(negative ? -units : units);
}

std::string Money::str() const {
  std::int64_t u = units_;
  const bool negative = u < 0;
  if (negative) u = -u;
  const std::int64_t whole = u / kScale;
  std::int64_t frac = u % kScale;

  char buf[40];
  if (frac == 0) {
    std::snprintf(buf, sizeof buf, "%s%lld", negative ? "-" : "",
                  static_cast<long long>(whole));
    return buf;
  }
  int digits = 4;
  while (frac % 10 == 0) {
    frac /= 10;
    --digits;
  }
  std::snprintf(buf, sizeof buf, "%s%lld.%0*lld", negative ? "-" : "",
                static_cast<long long>(whole), digits,
                static_cast<long long>(frac));
  return buf;
}

}  // namespace cia
