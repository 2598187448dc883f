#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "ssodat/error.hpp"
#include "ssodat/selection.hpp"

namespace ssodat::io {

// Bookkeeping of which pool images are labeled so far, plus the plans that
// got them there.
struct LabelState {
    std::size_t round_index = 0;
    std::size_t initial_labeled = 0;
    std::vector<std::string> labeled;
    std::vector<std::string> unlabeled;
    std::vector<selection::SelectionPlan> history;

    void check_invariants() const {
        std::set<std::string> seen(labeled.begin(), labeled.end());
        if (seen.size() != labeled.size()) {
            throw validation_error("label state: duplicate labeled ids");
        }
        for (const auto& id : unlabeled) {
            if (!seen.insert(id).second) {
                throw validation_error("label state: '" + id +
                                       "' is both labeled and unlabeled");
            }
        }
        std::size_t from_plans = 0;
        for (const auto& plan : history) from_plans += plan.selected.size();
        if (initial_labeled + from_plans != labeled.size()) {
            throw validation_error("label state: history budgets do not account for "
                                   "the labeled set");
        }
    }
};

} // namespace ssodat::io
