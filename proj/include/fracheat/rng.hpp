#pragma once
#include <array>
#include <cstdint>
#include <initializer_list>

namespace fracheat {

// Philox4x32-10 (Salmon et al. 2011), the counter-based generator of Random123.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter apply(Counter ctr, Key key);
};

// Stream identifiers are 64-bit; child streams are derived by hashing the
// parent id with an index, so a replica's draws never depend on scheduling.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index);
std::uint64_t derive_stream(std::initializer_list<std::uint64_t> path);

// Sequential view over one (seed, stream) pair: key = seed, counter =
// (block index, stream id). Each block yields two uniforms or two normals.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    double normal();
    RandomStream child(std::uint64_t index) const {
        return RandomStream(seed_, derive_stream(stream_, index));
    }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int uniform_left_ = 0;
    double normal_spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fracheat
