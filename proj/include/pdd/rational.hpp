#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "pdd/errors.hpp"

namespace pdd {

/// Exact rational over int64, always normalized (den > 0, gcd(num,den) == 1).
/// Used for row weights and symmetry operators, where sums must be exact.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }
    explicit Rational(std::int64_t num) : num_(num), den_(1) {}

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator+(const Rational& o) const {
        const std::int64_t g = std::gcd(den_, o.den_);
        return Rational(num_ * (o.den_ / g) + o.num_ * (den_ / g), den_ / g * o.den_);
    }
    Rational operator-(const Rational& o) const { return *this + Rational(-o.num_, o.den_); }
    Rational operator*(const Rational& o) const {
        const std::int64_t g1 = std::gcd(std::abs(num_), o.den_);
        const std::int64_t g2 = std::gcd(std::abs(o.num_), den_);
        return Rational((num_ / g1) * (o.num_ / g2), (den_ / g2) * (o.den_ / g1));
    }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) throw NumericError("rational division by zero");
        return *this * Rational(o.den_, o.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }

    bool operator==(const Rational& o) const noexcept { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const noexcept { return !(*this == o); }
    bool operator<(const Rational& o) const noexcept {
        return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
    }

    /// Wraps into [0,1): subtracts the floor.
    Rational wrapped_unit() const {
        std::int64_t q = num_ / den_;
        std::int64_t r = num_ % den_;
        if (r < 0) { r += den_; --q; }
        (void)q;
        return Rational(r, den_);
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    void normalize() {
        if (den_ == 0) throw NumericError("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        const std::int64_t g = std::gcd(std::abs(num_), den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace pdd
