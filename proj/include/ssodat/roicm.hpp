#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ssodat/config.hpp"
#include "ssodat/geometry.hpp"
#include "ssodat/scoring.hpp"
#include "ssodat/types.hpp"

namespace ssodat::roicm {

enum class Verdict { consistent, divergent, unscorable };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::consistent: return "consistent";
        case Verdict::divergent: return "divergent";
        default: return "unscorable";
    }
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "consistent") return Verdict::consistent;
    if (s == "divergent") return Verdict::divergent;
    if (s == "unscorable") return Verdict::unscorable;
    throw validation_error("unknown verdict: " + s);
}

// Teacher box promoted to a training label.
struct PseudoLabel {
    Box box;
    std::size_t class_id = 0;
    double confidence = 0.0;
};

// One image's routing decision: pseudo-label path (consistent), active
// learning path (divergent), or neither (no surviving teacher proposals).
struct PartitionResult {
    std::string image_id;
    Verdict verdict = Verdict::unscorable;
    std::optional<double> d_kl;
    std::optional<double> weight;
    std::optional<double> s_unc;
    std::optional<std::vector<PseudoLabel>> pseudo_labels;

    // Exactly the fields implied by the verdict must be populated.
    void check_invariants() const {
        switch (verdict) {
            case Verdict::consistent:
                if (!d_kl || !weight || !pseudo_labels || s_unc) {
                    throw validation_error(image_id + ": consistent result must carry "
                                           "d_kl, weight and pseudo_labels only");
                }
                break;
            case Verdict::divergent:
                if (!s_unc || d_kl || weight || pseudo_labels) {
                    throw validation_error(image_id + ": divergent result must carry "
                                           "s_unc only");
                }
                break;
            case Verdict::unscorable:
                if (d_kl || weight || s_unc || pseudo_labels) {
                    throw validation_error(image_id + ": unscorable result must carry "
                                           "no scores");
                }
                break;
        }
    }
};

struct MatchResult {
    std::vector<scoring::MatchedPair> pairs;
    std::vector<std::size_t> unmatched_teacher; // indices into teacher.rois
    std::vector<std::size_t> unmatched_student; // indices into student.rois
};

// Greedy one-to-one matching in descending IoU order over candidate pairs
// with IoU >= iou_match. Ties on IoU resolve by (teacher index, student
// index), so the result is deterministic for canonicalized (NMS-ordered)
// inputs.
inline MatchResult match_rois(const ImagePrediction& teacher,
                              const ImagePrediction& student, double iou_match) {
    if (teacher.image_id != student.image_id) {
        throw validation_error("match_rois: image_id mismatch ('" + teacher.image_id +
                               "' vs '" + student.image_id + "')");
    }
    if (!(iou_match > 0.0 && iou_match <= 1.0)) {
        throw validation_error("match_rois: iou_match must be in (0,1]");
    }

    struct Candidate {
        double iou;
        std::size_t t;
        std::size_t s;
    };
    std::vector<Candidate> candidates;
    for (std::size_t t = 0; t < teacher.rois.size(); ++t) {
        for (std::size_t s = 0; s < student.rois.size(); ++s) {
            const double overlap = geometry::iou(teacher.rois[t].box, student.rois[s].box);
            if (overlap >= iou_match) candidates.push_back({overlap, t, s});
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                  if (a.iou != b.iou) return a.iou > b.iou;
                  if (a.t != b.t) return a.t < b.t;
                  return a.s < b.s;
              });

    std::vector<bool> teacher_used(teacher.rois.size(), false);
    std::vector<bool> student_used(student.rois.size(), false);
    MatchResult result;
    for (const auto& c : candidates) {
        if (teacher_used[c.t] || student_used[c.s]) continue;
        teacher_used[c.t] = true;
        student_used[c.s] = true;
        result.pairs.push_back({teacher.rois[c.t], student.rois[c.s], c.iou});
    }
    for (std::size_t t = 0; t < teacher_used.size(); ++t) {
        if (!teacher_used[t]) result.unmatched_teacher.push_back(t);
    }
    for (std::size_t s = 0; s < student_used.size(); ++s) {
        if (!student_used[s]) result.unmatched_student.push_back(s);
    }
    return result;
}

// Image-level comparison rule. The verdict is consistent only when every
// surviving teacher RoI found a student match with the same argmax class;
// a single unmatched or disagreeing teacher RoI makes the image divergent.
// Unmatched student RoIs carry no weight either way. Inputs are expected to
// be canonicalized (confidence filter + NMS) already.
inline PartitionResult partition_image(const ImagePrediction& teacher,
                                       const ImagePrediction& student,
                                       const EngineConfig& cfg) {
    PartitionResult result;
    result.image_id = teacher.image_id;

    if (teacher.rois.empty()) {
        result.verdict = Verdict::unscorable;
        return result;
    }

    const MatchResult match = match_rois(teacher, student, cfg.iou_match);

    bool consistent = match.unmatched_teacher.empty();
    if (consistent) {
        for (const auto& pair : match.pairs) {
            if (argmax_class(pair.teacher.class_probs) !=
                argmax_class(pair.student.class_probs)) {
                consistent = false;
                break;
            }
        }
    }

    if (consistent) {
        result.verdict = Verdict::consistent;
        const scoring::KlForm form =
            cfg.literal_kl ? scoring::KlForm::literal_log_ratio : scoring::KlForm::standard;
        result.d_kl = scoring::kl_divergence(match.pairs, cfg.epsilon, form);
        result.weight = scoring::pseudo_label_weight(*result.d_kl);
        std::vector<PseudoLabel> labels;
        labels.reserve(teacher.rois.size());
        for (const auto& roi : teacher.rois) {
            labels.push_back({roi.box, argmax_class(roi.class_probs), roi.confidence});
        }
        result.pseudo_labels = std::move(labels);
    } else {
        result.verdict = Verdict::divergent;
        result.s_unc = scoring::uncertainty(teacher.rois, cfg.epsilon);
    }
    return result;
}

} // namespace ssodat::roicm
