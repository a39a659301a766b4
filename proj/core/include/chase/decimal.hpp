#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chase {

// Exact base-10 number: value = mantissa * 10^-scale, scale >= 0.
// Kept normalized (no trailing zero digits in the fraction) so that
// "12.50", "12.5" and "12.500" compare equal and render identically.
class Decimal {
public:
    Decimal() = default;
    Decimal(std::int64_t units) : mant_(units), scale_(0) {}

    static std::optional<Decimal> parse(std::string_view text);
    static Decimal from_parts(std::int64_t mantissa, int scale);

    std::string to_string() const;
    double to_double() const;

    std::int64_t mantissa() const { return mant_; }
    int scale() const { return scale_; }
    bool is_integer() const { return scale_ == 0; }

    Decimal operator+(const Decimal& o) const;
    Decimal operator-(const Decimal& o) const;
    Decimal operator*(const Decimal& o) const;
    // Exact division only; throws std::domain_error if the quotient
    // does not terminate within 12 fractional digits.
    Decimal operator/(const Decimal& o) const;

    bool operator==(const Decimal& o) const {
        return mant_ == o.mant_ && scale_ == o.scale_;
    }
    bool operator!=(const Decimal& o) const { return !(*this == o); }

private:
    std::int64_t mant_ = 0;
    int scale_ = 0;

    void normalize();
};

// |pred - gold| <= 1e-6 * max(1, |gold|)
bool numeric_exact_match(const Decimal& pred, const Decimal& gold);

}  // namespace chase
