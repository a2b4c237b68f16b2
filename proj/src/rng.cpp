#include "elca/rng.hpp"

#include "elca/dist.hpp"

namespace elca {

namespace {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

CounterRng CounterRng::for_replication(std::uint64_t seed, std::uint64_t replication) {
    return CounterRng(mix64(mix64(seed) ^ (replication + 1)));
}

std::uint64_t CounterRng::next_u64() {
    return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ull);
}

double CounterRng::uniform() {
    // 53 mantissa bits, offset by half an ulp to stay inside the open interval
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    return normal_quantile(uniform());
}

bool CounterRng::bernoulli(double p) {
    return uniform() < p;
}

} // namespace elca
