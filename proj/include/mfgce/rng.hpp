#pragma once

#include <array>
#include <cstdint>

namespace mfgce {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// Stream identifiers; one key per (seed, purpose).
enum class Stream : std::uint64_t {
    initial_state = 1,
    brownian = 2,
    game_initial = 3,
    game_brownian = 4,
    bootstrap = 5,
};

/// Random numbers addressed by (seed, stream, label, counter). Nothing is
/// stateful, so draws never depend on evaluation order or thread layout.
class KeyedStream {
public:
    KeyedStream(std::uint64_t seed, Stream stream, std::uint64_t label);

    std::array<std::uint32_t, 4> raw(std::uint64_t counter) const;
    /// Two uniforms on the open interval (0,1), 53-bit resolution.
    std::array<double, 2> uniforms(std::uint64_t counter) const;
    /// Two independent standard normals (Box-Muller).
    std::array<double, 2> normals(std::uint64_t counter) const;
    double normal(std::uint64_t counter) const { return normals(counter)[0]; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t label_;
};

}  // namespace mfgce
