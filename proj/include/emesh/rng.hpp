#pragma once

#include <cstdint>
#include <initializer_list>

namespace emesh {

// Counter-based generator: output i is a hash of (key, i), so independent
// streams can be derived per sample/layer/epoch and consumed in any order
// without changing each other's values. Bit-exact on every platform, unlike
// the std:: distributions.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Derive a stream key from a seed and a list of tags (subject id, class id,
// layer index, ...). Order-sensitive, collision-resistant enough for this use.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t k = Rng::mix(seed + 0x51afd7ed558ccd6dULL);
    for (std::uint64_t t : tags) {
        k = Rng::mix(k ^ (t + 0x63652362192e9cf1ULL));
    }
    return k;
}

}  // namespace emesh
