#pragma once

#include <cstdint>
#include <random>

//! Seeding helpers shared by constructions, discriminators and the benchmark
//! runner.  Every stochastic routine in the library takes either an explicit
//! `std::mt19937_64` or a 64-bit seed, so runs are reproducible end to end;
//! independent substreams are derived by mixing a root seed with a stream
//! index instead of splitting one engine across consumers.

namespace mcd {

//! SplitMix64 finalizer: one full avalanche round over a 64-bit word.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

//! Derives the seed of substream `stream` from a root seed.  Distinct stream
//! indices give statistically independent engines, so benchmark cells can run
//! in any order (or in parallel) and still reproduce the serial results.
//! @param seed root seed of the run.
//! @param stream substream index (e.g. benchmark cell number).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xd1342543de82ef95ULL + 1));
}

//! Convenience constructor for a seeded engine.
inline std::mt19937_64 make_engine(std::uint64_t seed)
{
    return std::mt19937_64(seed);
}

} // namespace mcd
