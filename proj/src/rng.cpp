#include "mfgce/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfgce {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = std::uint64_t(a) * b;
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

inline double to_open_unit(std::uint64_t bits) {
    return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

KeyedStream::KeyedStream(std::uint64_t seed, Stream stream, std::uint64_t label) : label_(label) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
    key_ = {std::uint32_t(k), std::uint32_t(k >> 32)};
}

std::array<std::uint32_t, 4> KeyedStream::raw(std::uint64_t counter) const {
    return philox4x32({std::uint32_t(counter), std::uint32_t(counter >> 32), std::uint32_t(label_),
                       std::uint32_t(label_ >> 32)},
                      key_);
}

std::array<double, 2> KeyedStream::uniforms(std::uint64_t counter) const {
    const auto r = raw(counter);
    return {to_open_unit((std::uint64_t(r[0]) << 32) | r[1]),
            to_open_unit((std::uint64_t(r[2]) << 32) | r[3])};
}

std::array<double, 2> KeyedStream::normals(std::uint64_t counter) const {
    const auto u = uniforms(counter);
    const double rad = std::sqrt(-2.0 * std::log(u[0]));
    const double ang = 2.0 * std::numbers::pi * u[1];
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace mfgce
