#pragma once

#include <cstdint>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace perfcon {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Token amounts are exact 128-bit integers in base units.
// 1 coin = 10^18 base units; 1 gigaunit ("gwei") = 10^9 base units.
using int128 = __int128;
using amount = int128;

constexpr amount gigaunit = 1'000'000'000;
constexpr amount coin = gigaunit * gigaunit;

inline std::string amount_to_string(int128 v) {
    if (v == 0)
        return "0";
    bool neg = v < 0;
    // two-step negation avoids UB on INT128_MIN (never reached for money)
    unsigned __int128 u = neg ? ~static_cast<unsigned __int128>(v) + 1 : static_cast<unsigned __int128>(v);
    char buf[48];
    int n = 0;
    while (u > 0) {
        buf[n++] = static_cast<char>('0' + static_cast<int>(u % 10));
        u /= 10;
    }
    std::string out;
    if (neg)
        out.push_back('-');
    while (n > 0)
        out.push_back(buf[--n]);
    return out;
}

inline int128 parse_int128(std::string_view s) {
    if (s.empty())
        throw error("empty integer literal");
    bool neg = false;
    size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size())
        throw error("bare sign is not an integer");
    unsigned __int128 u = 0;
    constexpr unsigned __int128 lim = ~static_cast<unsigned __int128>(0) >> 1;  // int128 max
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c < '0' || c > '9')
            throw error("invalid digit in integer literal: " + std::string(s));
        unsigned d = static_cast<unsigned>(c - '0');
        if (u > (lim - d) / 10)
            throw error("integer literal out of range: " + std::string(s));
        u = u * 10 + d;
    }
    int128 v = static_cast<int128>(u);
    return neg ? -v : v;
}

// Exact decimal with up to 3 fractional digits, stored as integer milli-units.
inline int64_t parse_milli(std::string_view s) {
    if (s.empty())
        throw error("empty decimal literal");
    bool neg = false;
    size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    int64_t whole = 0;
    bool any = false;
    for (; i < s.size() && s[i] != '.'; ++i) {
        if (s[i] < '0' || s[i] > '9')
            throw error("invalid decimal literal: " + std::string(s));
        if (whole > (std::numeric_limits<int64_t>::max() - 9) / 10)
            throw error("decimal literal out of range: " + std::string(s));
        whole = whole * 10 + (s[i] - '0');
        any = true;
    }
    int64_t frac = 0;
    int frac_digits = 0;
    if (i < s.size()) {  // consume '.'
        ++i;
        for (; i < s.size(); ++i, ++frac_digits) {
            if (s[i] < '0' || s[i] > '9')
                throw error("invalid decimal literal: " + std::string(s));
            if (frac_digits >= 3)
                throw error("more than 3 fractional digits: " + std::string(s));
            frac = frac * 10 + (s[i] - '0');
            any = true;
        }
    }
    if (!any)
        throw error("invalid decimal literal: " + std::string(s));
    while (frac_digits < 3) {
        frac *= 10;
        ++frac_digits;
    }
    int64_t v = whole * 1000 + frac;
    return neg ? -v : v;
}

inline std::string format_milli(int64_t milli) {
    int64_t v = milli < 0 ? -milli : milli;
    std::string out = milli < 0 ? "-" : "";
    out += std::to_string(v / 1000);
    int64_t frac = v % 1000;
    if (frac != 0) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), ".%03lld", static_cast<long long>(frac));
        std::string f(buf);
        while (f.back() == '0')
            f.pop_back();
        out += f;
    }
    return out;
}

// Exact fraction used for the reduced-reward ratio and reward fractions.
struct rational {
    int64_t num = 0;
    int64_t den = 1;

    friend bool operator==(const rational&, const rational&) = default;
};

inline bool valid_reduced_fraction(rational r) {
    return r.den > 0 && r.num > 0 && r.num < r.den;
}

inline amount scale_floor(amount a, rational r) {
    return a * r.num / r.den;  // floor for non-negative a
}

// FNV-1a over a canonical byte stream; used for state digests.
struct fnv1a64 {
    uint64_t state = 1469598103934665603ull;

    void bytes(const void* p, size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            state ^= b[i];
            state *= 1099511628211ull;
        }
    }
    void u8(uint8_t v) { bytes(&v, 1); }
    void u64(uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i)
            b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void i128(int128 v) {
        u64(static_cast<uint64_t>(static_cast<unsigned __int128>(v)));
        u64(static_cast<uint64_t>(static_cast<unsigned __int128>(v) >> 64));
    }
    void f64(double v) {
        uint64_t b;
        std::memcpy(&b, &v, 8);
        u64(b);
    }
    void str(std::string_view s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
};

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stable sub-stream derivation: one stream per (seed, salt...) tuple.
inline uint64_t derive_seed(uint64_t seed, uint64_t salt_a, uint64_t salt_b = 0) {
    uint64_t s = seed ^ (0xa0761d6478bd642full + salt_a * 0xe7037ed1a0b428dbull + salt_b * 0x8ebc6af09c88c6e3ull);
    splitmix64(s);
    return splitmix64(s);
}

// mt19937_64 with hand-rolled mappings so draw sequences are algorithmically
// pinned (std distributions are implementation-defined).
class rng {
public:
    explicit rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // unbiased draw in [0, n)
    uint64_t below(uint64_t n) {
        if (n == 0)
            throw error("rng::below(0)");
        uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    // inclusive integer range
    int64_t range(int64_t lo, int64_t hi) {
        if (lo > hi)
            throw error("rng::range: empty range");
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Box-Muller without a cached spare, so the draw count stays predictable
    double normal() {
        double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace perfcon
