// Counter-based generator. Every stream is a (key, counter) pair; the key is
// derived from the master seed and a named sub-stream, so replica i draws the
// same numbers no matter which thread or in which order it runs.
#pragma once

#include <cstdint>
#include <string_view>

namespace cylperc {

std::uint64_t mix64(std::uint64_t z);
std::uint64_t hash_name(std::string_view name);

// seed for sub-stream `name`, index `i` under `master`
std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t i = 0);

class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}
    static Rng stream(std::uint64_t master, std::string_view name, std::uint64_t i = 0) {
        return Rng(derive_seed(master, name, i));
    }

    std::uint64_t next() {
        ++ctr_;
        return mix64(key_ + ctr_ * 0x9e3779b97f4a7c15ULL) ^ mix64(ctr_ ^ key_ >> 1);
    }
    // uniform on [0,1)
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    // uniform on (0,1]
    double uniform_pos() { return ((next() >> 11) + 1) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t below(std::uint64_t n); // uniform on {0,…,n−1}
    double normal();
    std::uint64_t poisson(double lambda);

    std::uint64_t counter() const { return ctr_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace cylperc
