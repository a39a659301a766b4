#include "chase/decimal.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace chase {

void Decimal::normalize() {
    while (scale_ > 0 && mant_ % 10 == 0) {
        mant_ /= 10;
        --scale_;
    }
    if (mant_ == 0) scale_ = 0;
}

Decimal Decimal::from_parts(std::int64_t mantissa, int scale) {
    Decimal d;
    d.mant_ = mantissa;
    d.scale_ = scale;
    d.normalize();
    return d;
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    std::int64_t mant = 0;
    int scale = 0;
    bool any_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_dot) return std::nullopt;
            seen_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) break;
        if (mant > (INT64_MAX - 9) / 10) return std::nullopt;
        mant = mant * 10 + (c - '0');
        if (seen_dot) ++scale;
        any_digit = true;
    }
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (!any_digit || i != text.size()) return std::nullopt;
    return from_parts(neg ? -mant : mant, scale);
}

std::string Decimal::to_string() const {
    std::int64_t m = mant_;
    bool neg = m < 0;
    std::string digits;
    if (m == 0) digits = "0";
    while (m != 0) {
        digits.push_back(static_cast<char>('0' + std::abs(static_cast<int>(m % 10))));
        m /= 10;
    }
    while (static_cast<int>(digits.size()) <= scale_) digits.push_back('0');
    std::string out;
    if (neg) out.push_back('-');
    for (int pos = static_cast<int>(digits.size()) - 1; pos >= 0; --pos) {
        out.push_back(digits[pos]);
        if (pos == scale_ && scale_ > 0) out.push_back('.');
    }
    return out;
}

double Decimal::to_double() const {
    return static_cast<double>(mant_) * std::pow(10.0, -scale_);
}

namespace {

std::int64_t pow10_i64(int n) {
    std::int64_t r = 1;
    for (int i = 0; i < n; ++i) r *= 10;
    return r;
}

void align(const Decimal& a, const Decimal& b, __int128& ma, __int128& mb, int& scale) {
    scale = std::max(a.scale(), b.scale());
    ma = static_cast<__int128>(a.mantissa()) * pow10_i64(scale - a.scale());
    mb = static_cast<__int128>(b.mantissa()) * pow10_i64(scale - b.scale());
}

Decimal from_wide(__int128 m, int scale) {
    while (scale > 0 && m % 10 == 0) {
        m /= 10;
        --scale;
    }
    if (m > INT64_MAX || m < INT64_MIN)
        throw std::overflow_error("decimal overflow");
    return Decimal::from_parts(static_cast<std::int64_t>(m), scale);
}

}  // namespace

Decimal Decimal::operator+(const Decimal& o) const {
    __int128 ma, mb;
    int scale;
    align(*this, o, ma, mb, scale);
    return from_wide(ma + mb, scale);
}

Decimal Decimal::operator-(const Decimal& o) const {
    __int128 ma, mb;
    int scale;
    align(*this, o, ma, mb, scale);
    return from_wide(ma - mb, scale);
}

Decimal Decimal::operator*(const Decimal& o) const {
    __int128 m = static_cast<__int128>(mant_) * o.mant_;
    return from_wide(m, scale_ + o.scale_);
}

Decimal Decimal::operator/(const Decimal& o) const {
    if (o.mant_ == 0) throw std::domain_error("division by zero");
    // Long-divide with up to 12 extra fractional digits; require exactness.
    __int128 num = mant_;
    int scale = scale_ - o.scale_;
    for (int extra = 0; extra <= 12; ++extra) {
        if (num % o.mant_ == 0) {
            __int128 q = num / o.mant_;
            if (scale < 0) {
                for (int i = scale; i < 0; ++i) q *= 10;
                scale = 0;
            }
            return from_wide(q, scale);
        }
        num *= 10;
        ++scale;
    }
    throw std::domain_error("non-terminating decimal quotient");
}

bool numeric_exact_match(const Decimal& pred, const Decimal& gold) {
    double p = pred.to_double();
    double g = gold.to_double();
    return std::fabs(p - g) <= 1e-6 * std::max(1.0, std::fabs(g));
}

}  // namespace chase
