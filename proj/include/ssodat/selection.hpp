#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ssodat/error.hpp"

namespace ssodat::selection {

// Raw per-image scores entering a round's ranking.
struct CandidateInput {
    std::string image_id;
    double s_unc = 0.0;
    double s_div = 0.0;
};

// Scores after per-round min-max normalization plus the fused ranking key.
// Raw values ride along so a plan can be re-fused under a different budget.
struct CandidateScore {
    std::string image_id;
    double raw_s_unc = 0.0;
    double raw_s_div = 0.0;
    double s_unc = 0.0;
    double s_div = 0.0;
    double s_sel = 0.0;

    bool operator==(const CandidateScore& other) const {
        return image_id == other.image_id && raw_s_unc == other.raw_s_unc &&
               raw_s_div == other.raw_s_div && s_unc == other.s_unc &&
               s_div == other.s_div && s_sel == other.s_sel;
    }
};

struct SelectionPlan {
    std::size_t round_index = 0;
    std::size_t budget = 0;
    double p = 2.0;
    std::vector<CandidateScore> ranked;  // descending by s_sel
    std::vector<std::string> selected;   // prefix of ranked, min(budget, pool)

    bool operator==(const SelectionPlan& other) const {
        return round_index == other.round_index && budget == other.budget &&
               p == other.p && ranked == other.ranked && selected == other.selected;
    }
};

// L-p fusion of two nonnegative, already-normalized scores:
// (u^p + d^p)^(1/p). Monotone nondecreasing in each argument.
inline double fuse_scores(double s_unc, double s_div, double p) {
    if (!(s_unc >= 0.0) || !(s_div >= 0.0)) {
        throw validation_error("fuse_scores: scores must be >= 0");
    }
    if (!(p >= 1.0)) {
        throw validation_error("fuse_scores: p must be >= 1");
    }
    if (s_unc == 0.0) return s_div;
    if (s_div == 0.0) return s_unc;
    if (p == 1.0) return s_unc + s_div;
    if (p == 2.0) return std::hypot(s_unc, s_div);
    return std::pow(std::pow(s_unc, p) + std::pow(s_div, p), 1.0 / p);
}

// Min-max normalization over the pool; a degenerate pool (all values equal)
// maps to all zeros and the ordering falls to the tie-break chain.
inline std::vector<double> min_max_normalize(const std::vector<double>& values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = (values[i] - lo) / (hi - lo);
    }
    return out;
}

// Normalizes both axes over the candidate pool, fuses with exponent p, sorts
// descending by s_sel (ties: higher raw uncertainty, then lexicographic
// image_id) and takes the first min(budget, pool size) images.
inline SelectionPlan plan_round(const std::vector<CandidateInput>& candidates,
                                std::size_t budget, double p,
                                std::size_t round_index = 0) {
    if (budget < 1) throw validation_error("plan_round: budget must be >= 1");
    if (!(p >= 1.0)) throw validation_error("plan_round: p must be >= 1");

    SelectionPlan plan;
    plan.round_index = round_index;
    plan.budget = budget;
    plan.p = p;
    if (candidates.empty()) return plan;

    std::vector<double> unc(candidates.size()), div(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!(candidates[i].s_unc >= 0.0) || !(candidates[i].s_div >= 0.0)) {
            throw validation_error("plan_round: raw scores must be >= 0 (image '" +
                                   candidates[i].image_id + "')");
        }
        unc[i] = candidates[i].s_unc;
        div[i] = candidates[i].s_div;
    }
    const std::vector<double> unc_n = min_max_normalize(unc);
    const std::vector<double> div_n = min_max_normalize(div);

    plan.ranked.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        CandidateScore score;
        score.image_id = candidates[i].image_id;
        score.raw_s_unc = candidates[i].s_unc;
        score.raw_s_div = candidates[i].s_div;
        score.s_unc = unc_n[i];
        score.s_div = div_n[i];
        score.s_sel = fuse_scores(unc_n[i], div_n[i], p);
        plan.ranked.push_back(std::move(score));
    }
    std::sort(plan.ranked.begin(), plan.ranked.end(),
              [](const CandidateScore& a, const CandidateScore& b) {
                  if (a.s_sel != b.s_sel) return a.s_sel > b.s_sel;
                  if (a.raw_s_unc != b.raw_s_unc) return a.raw_s_unc > b.raw_s_unc;
                  return a.image_id < b.image_id;
              });

    const std::size_t take = std::min<std::size_t>(budget, plan.ranked.size());
    plan.selected.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        plan.selected.push_back(plan.ranked[i].image_id);
    }
    return plan;
}

} // namespace ssodat::selection
