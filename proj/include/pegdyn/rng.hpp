#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pegdyn {

// All randomness in the project flows from one root seed. Child seeds are
// derived as hash(root, purpose-tag[, index]) so that adding a consumer never
// shifts the stream of another.
inline uint64_t derive_seed(uint64_t root, std::string_view purpose, uint64_t index = 0) {
    // FNV-1a over the tag, then splitmix64 finalization mixing in root/index.
    uint64_t h = 1469598103934665603ull;
    for (char c : purpose) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    uint64_t z = root + 0x9e3779b97f4a7c15ull * (h ^ (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double gaussian(double mean, double std) {
        return std == 0.0 ? mean : std::normal_distribution<double>(mean, std)(engine_);
    }
    // Uniform integer in [0, n).
    uint64_t index(uint64_t n) {
        return std::uniform_int_distribution<uint64_t>(0, n - 1)(engine_);
    }
    uint64_t raw() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace pegdyn
