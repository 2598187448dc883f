#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "ssodat/config.hpp"
#include "ssodat/geometry.hpp"
#include "ssodat/prototypes.hpp"
#include "ssodat/roicm.hpp"
#include "ssodat/selection.hpp"

namespace ssodat::round {

struct RoundStats {
    std::size_t num_images = 0;
    std::size_t num_consistent = 0;
    std::size_t num_divergent = 0;
    std::size_t num_unscorable = 0;
    double mean_weight = 0.0; // over consistent images, 0 when none
    double mean_s_unc = 0.0;  // over divergent images, 0 when none
};

// Everything one scoring pass produces: per-image verdicts (sorted by
// image_id), the divergent candidates with both raw scores, and round
// aggregates. The bank passed in is updated from the divergent set.
struct RoundScoring {
    std::vector<roicm::PartitionResult> partitions;
    std::vector<selection::CandidateInput> candidates;
    RoundStats stats;
};

// One full scoring round: canonicalize both networks' proposals, partition
// every image, fold novel divergent RoIs into the bank (ascending
// uncertainty), then score diversity for the divergent set against the
// updated bank.
inline RoundScoring score_round(const std::map<std::string, PredictionPair>& images,
                                prototypes::PrototypeBank& bank,
                                const EngineConfig& cfg) {
    cfg.validate();
    RoundScoring out;
    out.stats.num_images = images.size();

    std::vector<prototypes::DivergentImage> divergent;
    double weight_sum = 0.0;
    double s_unc_sum = 0.0;

    for (const auto& [image_id, pair] : images) {
        ImagePrediction teacher = pair.teacher;
        ImagePrediction student = pair.student;
        teacher.rois = geometry::nms(teacher.rois, cfg.iou_nms, cfg.conf_thresh);
        student.rois = geometry::nms(student.rois, cfg.iou_nms, cfg.conf_thresh);

        roicm::PartitionResult result = roicm::partition_image(teacher, student, cfg);
        switch (result.verdict) {
            case roicm::Verdict::consistent:
                ++out.stats.num_consistent;
                weight_sum += *result.weight;
                break;
            case roicm::Verdict::divergent:
                ++out.stats.num_divergent;
                s_unc_sum += *result.s_unc;
                divergent.push_back({image_id, *result.s_unc, std::move(teacher)});
                break;
            case roicm::Verdict::unscorable:
                ++out.stats.num_unscorable;
                break;
        }
        out.partitions.push_back(std::move(result));
    }
    if (out.stats.num_consistent > 0) {
        out.stats.mean_weight = weight_sum / static_cast<double>(out.stats.num_consistent);
    }
    if (out.stats.num_divergent > 0) {
        out.stats.mean_s_unc = s_unc_sum / static_cast<double>(out.stats.num_divergent);
    }

    // Smallest-to-largest uncertainty is the normative update order.
    std::sort(divergent.begin(), divergent.end(),
              [](const prototypes::DivergentImage& a, const prototypes::DivergentImage& b) {
                  if (a.s_unc != b.s_unc) return a.s_unc < b.s_unc;
                  return a.image_id < b.image_id;
              });
    prototypes::update_from_divergent(bank, divergent);

    std::sort(divergent.begin(), divergent.end(),
              [](const prototypes::DivergentImage& a, const prototypes::DivergentImage& b) {
                  return a.image_id < b.image_id;
              });
    for (const auto& image : divergent) {
        const auto diversity = prototypes::diversity_score(image.teacher.rois, bank);
        out.candidates.push_back({image.image_id, image.s_unc, diversity.s_div});
    }
    return out;
}

} // namespace ssodat::round
