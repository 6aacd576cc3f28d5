#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace cgmc {

// Philox4x32-10 counter-based generator. A stream is addressed by
// (seed, replica, stream_id); draws within a stream are indexed by a 64-bit
// counter, so replicas and shells can be generated in any order (or on any
// thread) with bit-identical results.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint32_t replica, std::uint32_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          replica_(replica),
          stream_(stream_id) {}

    // uniform on [2^-65, 1) built from 64 random bits; never returns 0
    double uniform01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_u64() {
        auto block = philox(counter_++);
        return (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
    }

  private:
    std::array<std::uint32_t, 4> philox(std::uint64_t ctr) const;

    std::array<std::uint32_t, 2> key_;
    std::uint32_t replica_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cgmc
