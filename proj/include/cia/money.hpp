/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_MONEY_HPP
#define CIA_MONEY_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cia {

/// Fixed-point money. One unit is 1e-4 of a currency unit, matching the
/// wire format (decimal strings with at most 4 fraction digits). All stored
/// bids, prices and reserves live on this lattice; expected values derived
/// from them (ctr-weighted sums) stay real-valued.
class Money {
 public:
  static constexpr std::int64_t kScale = 10'000;

  constexpr Money() = default;

  static constexpr Money from_units(std::int64_t units) {
    Money m;
    m.units_ = units;
    return m;
  }

  /// Nearest lattice point to an amount in currency units.
  static Money from_double(double currency) {
    return from_units(std::llround(currency * static_cast<double>(kScale)));
  }

  /// Parses "12", "-0.5", "1.2345". Rejects more than 4 fraction digits,
  /// empty strings and stray characters. Throws ParseError.
  static Money parse(std::string_view text);

  constexpr std::int64_t units() const { return units_; }
  double to_double() const {
    return static_cast<double>(units_) / static_cast<double>(kScale);
  }

  /// Canonical decimal form, trailing fraction zeros trimmed ("2", "0.01").
  std::string str() const;

  constexpr bool is_negative() const { return units_ < 0; }

  friend constexpr Money operator+(Money a, Money b) {
    return from_units(a.units_ + b.units_);
  }
  friend constexpr Money operator-(Money a, Money b) {
    return from_units(a.units_ - b.units_);
  }
  Money& operator+=(Money other) {
    units_ += other.units_;
    return *this;
  }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  std::int64_t units_ = 0;
};

}  // namespace cia

#endif  // CIA_MONEY_HPP
