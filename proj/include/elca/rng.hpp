#pragma once

#include <cstdint>

namespace elca {

// Counter-based generator (SplitMix64 output function over an incrementing
// counter). Streams keyed by (seed, replication) are independent of the
// order in which replications execute, so parallel simulation runs emit
// bit-identical results for any worker count.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key), counter_(0) {}

    static CounterRng for_replication(std::uint64_t seed, std::uint64_t replication);

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0,1).
    double uniform();

    /// Standard normal via inverse-CDF transform (platform independent).
    double normal();

    bool bernoulli(double p);

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace elca
