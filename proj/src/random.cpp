#include "affem/random.hpp"

#include <numeric>

namespace affem {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t key : keys) h = splitmix64(h ^ splitmix64(key + 0x632be59bd9b4e019ULL));
    return h;
}

std::vector<double> sample_dirichlet(Rng& rng, std::size_t n, double alpha) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> out(n);
    double total = 0.0;
    // a draw of all zeros is possible for tiny alpha; redraw until it is not
    do {
        for (auto& v : out) v = gamma(rng);
        total = std::accumulate(out.begin(), out.end(), 0.0);
    } while (!(total > 0.0));
    for (auto& v : out) v /= total;
    return out;
}

int sample_categorical(Rng& rng, const double* probs, std::size_t n) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    double cumulative = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        cumulative += probs[v];
        if (u < cumulative) return static_cast<int>(v);
    }
    // rounding left the cumulative sum just under 1: take the last value with mass
    for (std::size_t v = n; v > 0; --v)
        if (probs[v - 1] > 0.0) return static_cast<int>(v - 1);
    return static_cast<int>(n - 1);
}

}  // namespace affem
