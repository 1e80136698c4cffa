#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qunravel {

// One Philox4x32-10 block: 128-bit counter and 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Counter-based generator. A stream is identified by (seed, stream id); the
// n-th 64-bit draw of a stream is a pure function of (seed, stream id, n), so
// substreams can be consumed in any order or on any thread.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    // Independent stream derived from this stream's identity and `index`;
    // it does not depend on how many draws this stream has made.
    Rng substream(std::uint64_t index) const;

    // Uniform double in [0, 1) with 53 random bits.
    double uniform();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 2;
};

}  // namespace qunravel
