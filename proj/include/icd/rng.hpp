#pragma once

#include <cstdint>
#include <random>

namespace icd {

// Seeded generator with an explicit uint64 -> [0,1) mapping so that streams
// are reproducible bit-for-bit independent of the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // [a, b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // {lo, ..., hi} inclusive
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace icd
