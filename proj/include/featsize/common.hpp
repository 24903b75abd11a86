#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace featsize {

using Complex = std::complex<double>;
using ComplexPoint = std::vector<Complex>;
using RealPoint = std::vector<double>;

inline constexpr std::uint64_t kDefaultSeed = 0xFEA75;
inline constexpr const char* kVersion = "0.1.0";

// Deterministic RNG wrapper. std::uniform_real_distribution is not pinned
// across standard library implementations, so the double generation is done
// by hand on top of mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double unit() {  // uniform in [0,1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // standard normal via Box-Muller (explicit, implementation-stable)
    double normal() {
        double u1 = unit(), u2 = unit();
        while (u1 <= 1e-300) u1 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    Complex complex_normal() { return {normal(), normal()}; }

    // uniform on the unit circle, excluding arcs within `gap` radians of +-1
    Complex unit_circle(double gap = 1e-3) {
        for (;;) {
            double a = 6.283185307179586 * unit();
            double da = std::min(a, 6.283185307179586 - a);          // distance to arg 0
            double dpi = std::abs(a - 3.141592653589793);            // distance to arg pi
            if (da > gap && dpi > gap) return {std::cos(a), std::sin(a)};
        }
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

inline double norm2(const ComplexPoint& p) {
    double s = 0;
    for (const auto& c : p) s += std::norm(c);
    return std::sqrt(s);
}

inline double norm_inf(const ComplexPoint& p) {
    double m = 0;
    for (const auto& c : p) m = std::max(m, std::abs(c));
    return m;
}

inline double dist2(const ComplexPoint& a, const ComplexPoint& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

inline double max_imag(const ComplexPoint& p) {
    double m = 0;
    for (const auto& c : p) m = std::max(m, std::abs(c.imag()));
    return m;
}

inline bool finite(const ComplexPoint& p) {
    for (const auto& c : p)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

// shortest round-trip decimal text for a double (used by every serializer so
// outputs are byte-stable)
std::string format_double(double v);

}  // namespace featsize

#include <charconv>

namespace featsize {

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace featsize
