#pragma once

#include <cstdint>
#include <vector>

// Counter-based pseudorandom streams. A stream is identified by (seed, stream
// index); draws are a pure function of (seed, stream, counter), so replay and
// parallel substreams are bit-exact. The output function is SplitMix64
// evaluated at key + counter * golden ratio.

namespace hfmdp {

class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream), key_(derive_key(seed, stream)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Inverse-CDF draw over the stored order of `probs`. Rounding mass at the
    /// top end falls to the last index.
    int sample_discrete(const std::vector<double>& probs) {
        const double u = next_double();
        double acc = 0;
        for (size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    /// Independent child stream keyed by (this stream, idx).
    RngStream substream(std::uint64_t idx) const {
        return RngStream(seed_, mix64(stream_ * kGolden + 0x94d049bb133111ebULL) ^
                                    mix64(idx + kGolden));
    }

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 33;
        z *= 0xff51afd7ed558ccdULL;
        z ^= z >> 33;
        z *= 0xc4ceb9fe1a85ec53ULL;
        z ^= z >> 33;
        return z;
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
        return mix64(seed + kGolden) ^ mix64(stream * 0xbf58476d1ce4e5b9ULL + kGolden);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace hfmdp
