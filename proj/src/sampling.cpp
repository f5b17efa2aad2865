#include "symdyn/sampling.hpp"

#include <algorithm>

#include "symdyn/analysis.hpp"
#include "symdyn/errors.hpp"

namespace symdyn {

std::vector<OrbitSample> periodic_library(MapPtr map, int max_period, int branches, int fwd_len) {
    std::vector<OrbitSample> out;
    for (int p = 1; p <= max_period; ++p) {
        for (const auto& word : branch_words(branches, p, true)) {
            OrbitWindow w;
            try {
                w = OrbitWindow::periodic_from_word(map, word, fwd_len);
            } catch (const Error&) {
                continue;
            }
            for (int k = 0; k < p; ++k) out.push_back({w.shift(k), LogReal::zero()});
        }
    }
    return out;
}

int required_depth(const AlphabetOptions& opt) { return opt.hi + opt.cfg.depth + 2; }

std::vector<OrbitSample> certified_samples(MapPtr map, std::size_t count, std::uint64_t seed,
                                           const AlphabetOptions& opt, std::size_t max_tries) {
    if (max_tries == 0) max_tries = 50 * count + 100;
    std::mt19937_64 rng(seed);
    const int min_depth = opt.cfg.depth + 1;
    std::vector<OrbitSample> out;
    for (std::size_t tries = 0; out.size() < count && tries < max_tries; ++tries) {
        const OrbitWindow w = random_window(map, rng, required_depth(opt), opt.cfg.horizon);
        try {
            for (int n = opt.lo; n <= opt.hi; ++n) pesin_params(w.shift(n, min_depth), opt.cfg);
        } catch (const Error&) {
            continue;
        }
        out.push_back({w, LogReal::zero()});
    }
    return out;
}

std::vector<OrbitSample> with_twins(const std::vector<OrbitSample>& samples, const AlphabetOptions& opt) {
    std::vector<OrbitSample> out;
    for (const auto& s : samples) {
        const auto sizes = orbit_sizes(s.w, opt.lo, opt.hi, opt.cfg);
        const GridIndex deepest = *std::max_element(sizes.begin(), sizes.end());
        const double lg = 8.0 * grid_log(deepest, opt.cfg.epsilon) - 40.0;
        out.push_back(s);
        out.push_back({s.w, s.top_offset + LogReal::from_log(lg)});
    }
    return out;
}

void sort_canonical(std::vector<OrbitSample>& samples) {
    std::vector<std::pair<std::string, std::size_t>> keys;
    keys.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        keys.emplace_back(samples[i].w.serialize() + " " + to_string(samples[i].top_offset), i);
    std::sort(keys.begin(), keys.end());
    std::vector<OrbitSample> sorted;
    sorted.reserve(samples.size());
    for (const auto& k : keys) sorted.push_back(samples[k.second]);
    samples = std::move(sorted);
}

}  // namespace symdyn
