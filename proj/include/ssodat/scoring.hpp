#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ssodat/types.hpp"

namespace ssodat::scoring {

// A teacher RoI paired with the student RoI it matched at IoU >= threshold.
struct MatchedPair {
    RoiPrediction teacher;
    RoiPrediction student;
    double iou = 0.0;
};

enum class KlForm {
    standard,        // p_t * log(p_t / p_s)
    literal_log_ratio // p_t * log(p_t) / log(p_s), kept only for comparison runs
};

// Mean per-pair KL divergence between teacher and student class
// distributions. Probabilities are floored at epsilon before any log so
// one-hot outputs stay finite. The literal_log_ratio form additionally clamps
// the log denominator away from zero; it is not a divergence and exists only
// to compare against the standard form.
inline double kl_divergence(const std::vector<MatchedPair>& pairs, double epsilon,
                            KlForm form = KlForm::standard) {
    if (pairs.empty()) {
        throw no_proposals_error("kl_divergence: no matched proposals");
    }
    if (!(epsilon > 0.0)) {
        throw validation_error("kl_divergence: epsilon must be > 0");
    }
    const std::size_t num_classes = pairs.front().teacher.class_probs.size();
    double total = 0.0;
    for (const auto& pair : pairs) {
        validate_class_distribution(pair.teacher.class_probs, num_classes);
        validate_class_distribution(pair.student.class_probs, num_classes);
        double pair_sum = 0.0;
        for (std::size_t k = 0; k < num_classes; ++k) {
            const double pt = pair.teacher.class_probs[k];
            const double ps = pair.student.class_probs[k];
            const double pt_floor = std::max(pt, epsilon);
            const double ps_floor = std::max(ps, epsilon);
            if (form == KlForm::standard) {
                pair_sum += pt * std::log(pt_floor / ps_floor);
            } else {
                const double denom = std::min(std::log(ps_floor), -epsilon);
                pair_sum += pt * std::log(pt_floor) / denom;
            }
        }
        total += pair_sum;
    }
    return total / static_cast<double>(pairs.size());
}

// exp(-D_kl): 1 at zero divergence, strictly decreasing, always in (0,1].
inline double pseudo_label_weight(double d_kl) {
    if (!(d_kl >= 0.0)) {
        throw validation_error("pseudo_label_weight: d_kl must be >= 0");
    }
    return std::exp(-d_kl);
}

// Entropy of one distribution in nats, with the epsilon floor inside the log.
inline double entropy(const ClassDistribution& probs, double epsilon) {
    double h = 0.0;
    for (double p : probs) {
        h -= p * std::log(std::max(p, epsilon));
    }
    return h;
}

// Mean per-box entropy of the teacher class distributions. Ranges from 0
// (one-hot) to ln(N_c) (uniform).
inline double uncertainty(const std::vector<RoiPrediction>& teacher_rois, double epsilon) {
    if (teacher_rois.empty()) {
        throw no_proposals_error("uncertainty: no proposals");
    }
    if (!(epsilon > 0.0)) {
        throw validation_error("uncertainty: epsilon must be > 0");
    }
    const std::size_t num_classes = teacher_rois.front().class_probs.size();
    double total = 0.0;
    for (const auto& roi : teacher_rois) {
        validate_class_distribution(roi.class_probs, num_classes);
        total += entropy(roi.class_probs, epsilon);
    }
    return total / static_cast<double>(teacher_rois.size());
}

} // namespace ssodat::scoring
