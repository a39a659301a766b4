#include "chase/rng.hpp"

namespace chase {

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    shuffle(all);
    if (k < n) all.resize(k);
    return all;
}

}  // namespace chase
