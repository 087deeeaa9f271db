#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace equitax {

using BigInt = boost::multiprecision::cpp_int;

class DecimalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline const BigInt& pow10(int digits) {
    static const auto table = [] {
        std::array<BigInt, 40> t;
        t[0] = 1;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * 10;
        return t;
    }();
    return table.at(static_cast<std::size_t>(digits));
}

// Nearest quotient, ties to even. Denominator must be nonzero.
inline BigInt round_div_half_even(BigInt num, BigInt den) {
    if (den == 0) throw DecimalError("decimal: division by zero");
    bool negative = false;
    if (num < 0) { num = -num; negative = !negative; }
    if (den < 0) { den = -den; negative = !negative; }
    BigInt q, r;
    boost::multiprecision::divide_qr(num, den, q, r);
    const BigInt twice = r * 2;
    if (twice > den || (twice == den && bit_test(q, 0))) ++q;
    return negative ? BigInt(-q) : q;
}

} // namespace detail

/// Exact decimal with a fixed 12-digit fractional scale.
///
/// The mantissa is an arbitrary-precision integer, so sums and differences
/// never overflow or lose digits. Multiplication and division round the
/// result to the 12th fractional digit, ties to even. Everything the ledger
/// stores (dollars, rates, share counts) is one of these; binary floating
/// point only appears at the boundaries (random draws, statistics).
class Decimal {
public:
    static constexpr int kFracDigits = 12;

    Decimal() = default;
    Decimal(int v) : mantissa_(BigInt(v) * unit()) {}
    Decimal(long long v) : mantissa_(BigInt(v) * unit()) {}

    static const BigInt& unit() { return detail::pow10(kFracDigits); }

    static Decimal from_mantissa(BigInt m) {
        Decimal d;
        d.mantissa_ = std::move(m);
        return d;
    }

    /// Parses "[-]digits[.digits]" with at most 12 fractional digits.
    static Decimal parse(std::string_view s) {
        std::size_t pos = 0;
        bool negative = false;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
            negative = s[pos] == '-';
            ++pos;
        }
        const std::size_t int_begin = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == int_begin) throw DecimalError("decimal: bad literal '" + std::string(s) + "'");
        BigInt m(std::string(s.substr(int_begin, pos - int_begin)));
        m *= unit();
        if (pos < s.size()) {
            if (s[pos] != '.') throw DecimalError("decimal: bad literal '" + std::string(s) + "'");
            ++pos;
            const std::size_t frac_begin = pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
            const std::size_t frac_digits = pos - frac_begin;
            if (frac_digits == 0 || frac_digits > kFracDigits || pos != s.size())
                throw DecimalError("decimal: bad literal '" + std::string(s) + "'");
            BigInt frac(std::string(s.substr(frac_begin, frac_digits)));
            m += frac * detail::pow10(kFracDigits - static_cast<int>(frac_digits));
        }
        return from_mantissa(negative ? BigInt(-m) : m);
    }

    /// Nearest 12-digit decimal; boundary use only (configs, RNG draws).
    static Decimal from_double(double v) { return from_long_double(static_cast<long double>(v)); }

    static Decimal from_long_double(long double v) {
        if (!std::isfinite(v)) throw DecimalError("decimal: non-finite value");
        const long double scaled = v * 1e12L;
        if (std::fabs(scaled) < 9.0e18L)
            return from_mantissa(BigInt(llrintl(scaled)));
        // Split off the integer part so the fractional digits stay exact.
        const long double ip = floorl(v);
        if (std::fabs(ip) > 1e36L) throw DecimalError("decimal: from_double out of range");
        char buf[64];
        snprintf(buf, sizeof buf, "%.0Lf", ip);
        BigInt m = BigInt(std::string(buf)) * unit();
        m += BigInt(llrintl((v - ip) * 1e12L));
        return from_mantissa(std::move(m));
    }

    const BigInt& mantissa() const { return mantissa_; }

    bool is_zero() const { return mantissa_ == 0; }
    bool is_negative() const { return mantissa_ < 0; }
    bool is_integer() const { return mantissa_ % unit() == 0; }

    Decimal operator-() const { return from_mantissa(-mantissa_); }
    Decimal& operator+=(const Decimal& o) { mantissa_ += o.mantissa_; return *this; }
    Decimal& operator-=(const Decimal& o) { mantissa_ -= o.mantissa_; return *this; }
    friend Decimal operator+(Decimal a, const Decimal& b) { return a += b; }
    friend Decimal operator-(Decimal a, const Decimal& b) { return a -= b; }

    friend Decimal operator*(const Decimal& a, const Decimal& b) {
        return from_mantissa(detail::round_div_half_even(a.mantissa_ * b.mantissa_, unit()));
    }
    friend Decimal operator/(const Decimal& a, const Decimal& b) {
        return from_mantissa(detail::round_div_half_even(a.mantissa_ * unit(), b.mantissa_));
    }
    Decimal& operator*=(const Decimal& o) { return *this = *this * o; }
    Decimal& operator/=(const Decimal& o) { return *this = *this / o; }

    /// a*b/c rounded once. Use when the rational result is expected to be
    /// exactly representable (pro-rata splits, tax-path equivalences).
    static Decimal mul_div(const Decimal& a, const Decimal& b, const Decimal& c) {
        if (c.mantissa_ == 0) throw DecimalError("decimal: division by zero");
        return from_mantissa(detail::round_div_half_even(a.mantissa_ * b.mantissa_, c.mantissa_));
    }

    /// Integer power, rounding after each multiplication.
    Decimal pow_int(long long n) const {
        if (n < 0) return Decimal(1) / pow_int(-n);
        Decimal result(1);
        Decimal base = *this;
        while (n > 0) {
            if (n & 1) result *= base;
            n >>= 1;
            if (n) base *= base;
        }
        return result;
    }

    /// Real power. Integral exponents stay in decimal arithmetic; fractional
    /// exponents go through long double (~18 significant digits), which is
    /// ample for the 12-digit ledger scale.
    static Decimal pow(const Decimal& base, const Decimal& exponent) {
        if (exponent.is_integer()) {
            const BigInt n = exponent.mantissa_ / unit();
            if (n > 1000000 || n < -1000000) throw DecimalError("decimal: pow exponent out of range");
            return base.pow_int(n.convert_to<long long>());
        }
        if (base.mantissa_ <= 0) throw DecimalError("decimal: pow of non-positive base");
        return from_long_double(powl(base.to_long_double(), exponent.to_long_double()));
    }

    Decimal abs() const { return mantissa_ < 0 ? -*this : *this; }

    double to_double() const { return static_cast<double>(to_long_double()); }
    long double to_long_double() const {
        return mantissa_.convert_to<long double>() / 1e12L;
    }

    /// Canonical form: no exponent, trailing fractional zeros trimmed.
    std::string str() const {
        BigInt m = mantissa_;
        const bool negative = m < 0;
        if (negative) m = -m;
        BigInt ip, fp;
        boost::multiprecision::divide_qr(m, BigInt(unit()), ip, fp);
        std::string out = negative ? "-" : "";
        out += ip.str();
        if (fp != 0) {
            std::string frac = fp.str();
            frac.insert(0, static_cast<std::size_t>(kFracDigits) - frac.size(), '0');
            while (frac.back() == '0') frac.pop_back();
            out += '.';
            out += frac;
        }
        return out;
    }

    friend bool operator==(const Decimal& a, const Decimal& b) { return a.mantissa_ == b.mantissa_; }
    friend bool operator!=(const Decimal& a, const Decimal& b) { return a.mantissa_ != b.mantissa_; }
    friend bool operator<(const Decimal& a, const Decimal& b) { return a.mantissa_ < b.mantissa_; }
    friend bool operator<=(const Decimal& a, const Decimal& b) { return a.mantissa_ <= b.mantissa_; }
    friend bool operator>(const Decimal& a, const Decimal& b) { return a.mantissa_ > b.mantissa_; }
    friend bool operator>=(const Decimal& a, const Decimal& b) { return a.mantissa_ >= b.mantissa_; }

private:
    BigInt mantissa_ = 0;
};

inline Decimal operator""_dec(const char* s) { return Decimal::parse(s); }
inline Decimal operator""_dec(const char* s, std::size_t n) { return Decimal::parse(std::string_view(s, n)); }

} // namespace equitax
