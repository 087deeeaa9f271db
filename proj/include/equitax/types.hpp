#pragma once

#include "equitax/decimal.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace equitax {

/// Precondition violations on operation inputs (oversell, bad fraction, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A conservation or bookkeeping invariant failed. Signals a bug, not bad input.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using FirmId = std::uint32_t;
using HolderId = std::uint32_t;

/// Tax authority pseudo-holder id used in event records.
inline constexpr HolderId kTaxAuthority = 0;

/// Constant-dollar amount. Exact decimal; display rounding happens in reports only.
struct Money {
    Decimal value;

    Money() = default;
    explicit Money(Decimal v) : value(std::move(v)) {}
    explicit Money(int v) : value(v) {}
    static Money parse(std::string_view s) { return Money(Decimal::parse(s)); }

    Money& operator+=(const Money& o) { value += o.value; return *this; }
    Money& operator-=(const Money& o) { value -= o.value; return *this; }
    friend Money operator+(Money a, const Money& b) { return a += b; }
    friend Money operator-(Money a, const Money& b) { return a -= b; }
    Money operator-() const { return Money(-value); }

    friend bool operator==(const Money&, const Money&) = default;
    friend bool operator<(const Money& a, const Money& b) { return a.value < b.value; }
    friend bool operator<=(const Money& a, const Money& b) { return a.value <= b.value; }
    friend bool operator>(const Money& a, const Money& b) { return a.value > b.value; }
    friend bool operator>=(const Money& a, const Money& b) { return a.value >= b.value; }

    std::string str() const { return value.str(); }
};

/// Dimensionless per-year fraction. Tax rates live in [0,1); interest rates in [0,∞).
struct Rate {
    Decimal value;

    Rate() = default;
    explicit Rate(Decimal v) : value(std::move(v)) {}
    static Rate parse(std::string_view s) { return Rate(Decimal::parse(s)); }

    /// Validated tax rate: 0 <= r < 1.
    static Rate tax(Decimal v) {
        if (v < Decimal(0) || v >= Decimal(1))
            throw DomainError("tax rate must lie in [0,1), got " + v.str());
        return Rate(std::move(v));
    }
    /// Validated interest rate: r >= 0.
    static Rate interest(Decimal v) {
        if (v < Decimal(0)) throw DomainError("interest rate must be non-negative, got " + v.str());
        return Rate(std::move(v));
    }

    Decimal complement() const { return Decimal(1) - value; }

    friend bool operator==(const Rate&, const Rate&) = default;
    friend bool operator<(const Rate& a, const Rate& b) { return a.value < b.value; }

    std::string str() const { return value.str(); }
};

/// Share count. Fractional shares are legal inside the ledger; only reports round.
struct Shares {
    Decimal count;

    Shares() = default;
    explicit Shares(Decimal c) : count(std::move(c)) {}
    explicit Shares(int c) : count(c) {}
    static Shares parse(std::string_view s) { return Shares(Decimal::parse(s)); }

    bool is_zero() const { return count.is_zero(); }

    Shares& operator+=(const Shares& o) { count += o.count; return *this; }
    Shares& operator-=(const Shares& o) { count -= o.count; return *this; }
    friend Shares operator+(Shares a, const Shares& b) { return a += b; }
    friend Shares operator-(Shares a, const Shares& b) { return a -= b; }

    friend bool operator==(const Shares&, const Shares&) = default;
    friend bool operator<(const Shares& a, const Shares& b) { return a.count < b.count; }
    friend bool operator<=(const Shares& a, const Shares& b) { return a.count <= b.count; }
    friend bool operator>(const Shares& a, const Shares& b) { return a.count > b.count; }
    friend bool operator>=(const Shares& a, const Shares& b) { return a.count >= b.count; }

    std::string str() const { return count.str(); }
};

// Dimensioned arithmetic. Anything not listed here is a unit mistake.
inline Money operator*(const Money& m, const Decimal& k) { return Money(m.value * k); }
inline Money operator*(const Decimal& k, const Money& m) { return Money(m.value * k); }
inline Money operator*(const Money& m, const Rate& r) { return Money(m.value * r.value); }
inline Decimal operator/(const Money& a, const Money& b) { return a.value / b.value; }
inline Shares operator*(const Shares& s, const Decimal& k) { return Shares(s.count * k); }
inline Money operator*(const Shares& s, const Money& price_per_share) {
    return Money(s.count * price_per_share.value);
}
inline Shares shares_bought(const Money& dollars, const Money& price_per_share) {
    return Shares(dollars.value / price_per_share.value);
}

} // namespace equitax
