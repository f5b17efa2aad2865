#pragma once

#include <cstdint>
#include <vector>

#include "symdyn/coarse_grain.hpp"

namespace symdyn {

// Every shift of every periodic orbit with a Lyndon branch word of length <= max_period over
// the first `branches` branches. Words whose cycle hits the singular set are skipped.
std::vector<OrbitSample> periodic_library(MapPtr map, int max_period, int branches = 2, int fwd_len = 60);

// Random windows whose Pesin parameters exist at every index in [opt.lo, opt.hi].
std::vector<OrbitSample> certified_samples(MapPtr map, std::size_t count, std::uint64_t seed,
                                           const AlphabetOptions& opt, std::size_t max_tries = 0);

// Window depth needed so that every index of [lo, hi] keeps a full series window.
int required_depth(const AlphabetOptions& opt);

// Each sample followed by a copy whose chart centers carry a sub-resolution offset, small
// enough that both copies fall in the same net cell at every index of [opt.lo, opt.hi].
std::vector<OrbitSample> with_twins(const std::vector<OrbitSample>& samples, const AlphabetOptions& opt);

// Sort by serialized window, so that the alphabet does not depend on generation order.
void sort_canonical(std::vector<OrbitSample>& samples);

}  // namespace symdyn
