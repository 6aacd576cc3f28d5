#include "cgmc/rng.hpp"

#include <cmath>

namespace cgmc {

namespace {
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}
}  // namespace

std::array<std::uint32_t, 4> CounterRng::philox(std::uint64_t ctr) const {
    std::array<std::uint32_t, 4> c = {static_cast<std::uint32_t>(ctr),
                                      static_cast<std::uint32_t>(ctr >> 32), replica_, stream_};
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int r = 0; r < 10; ++r) {
        round_once(c, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return c;
}

}  // namespace cgmc
