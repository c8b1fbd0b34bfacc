#pragma once
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "fracheat/manifest.hpp"

namespace fracheat {

struct AcceptanceOptions {
    std::uint64_t seed = 20240611;
    std::set<int> only;  // empty: all 13
};

// Runs the acceptance criteria in order; report is called after each one.
std::vector<Verdict> run_acceptance(const AcceptanceOptions& o = {},
                                    const std::function<void(const Verdict&)>& report = {});

}  // namespace fracheat
