#include "fracheat/rng.hpp"

#include <cmath>
#include <numbers>

namespace fracheat {

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

inline std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t(hi) << 21) ^ (lo >> 11);
    return (double(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter c, Key k) {
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

std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index) {
    return splitmix(splitmix(parent) ^ (index * 0xD6E8FEB86659FD93ull + 0x632BE59BD9B4E019ull));
}

std::uint64_t derive_stream(std::initializer_list<std::uint64_t> path) {
    std::uint64_t id = 0x6A09E667F3BCC908ull;
    for (auto i : path) id = derive_stream(id, i);
    return id;
}

void RandomStream::refill() {
    Philox4x32::Counter ctr{std::uint32_t(block_), std::uint32_t(block_ >> 32),
                            std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
    Philox4x32::Key key{std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
    buf_ = Philox4x32::apply(ctr, key);
    ++block_;
    uniform_left_ = 2;
}

double RandomStream::uniform() {
    if (uniform_left_ == 0) refill();
    const int i = 2 - uniform_left_;
    --uniform_left_;
    return to_open_unit(buf_[2 * i], buf_[2 * i + 1]);
}

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return normal_spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    normal_spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
}

}  // namespace fracheat
