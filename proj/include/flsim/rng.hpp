#pragma once

#include <cstdint>
#include <random>

namespace flsim {

// splitmix64 finalizer; used to derive independent replica seeds from a
// master seed.  Replica r uses seed = mix_seed(master_seed, r).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t replica) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = a ^ (replica * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(s);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t replica = 0) {
    return Rng(mix_seed(master, replica));
}

}  // namespace flsim
