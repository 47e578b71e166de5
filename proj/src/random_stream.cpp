#include "decoh/random_stream.hpp"

#include <cmath>

namespace decoh {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

RandomStream RandomStream::substream(std::uint64_t key) const {
    return RandomStream(mix64(seed_ ^ mix64(key ^ 0x5bd1e9955bd1e995ULL)));
}

double RandomStream::uniform() {
    // 53 random bits -> [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::exponential(double mean) {
    // 1 - u lies in (0, 1], so the log is finite
    return -mean * std::log(1.0 - uniform());
}

std::uint64_t RandomStream::below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
}

}  // namespace decoh
