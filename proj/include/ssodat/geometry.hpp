#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ssodat/types.hpp"

namespace ssodat::geometry {

// Intersection-over-union of two valid boxes. Symmetric, in [0,1].
inline double iou(const Box& a, const Box& b) {
    validate_box(a);
    validate_box(b);
    const double ix1 = std::max(a.x1, b.x1);
    const double iy1 = std::max(a.y1, b.y1);
    const double ix2 = std::min(a.x2, b.x2);
    const double iy2 = std::min(a.y2, b.y2);
    const double iw = std::max(0.0, ix2 - ix1);
    const double ih = std::max(0.0, iy2 - iy1);
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

// Priority order for suppression: higher confidence first, then lower
// lexicographic corners so that equal-confidence runs are deterministic.
inline bool suppression_priority(const RoiPrediction& a, const RoiPrediction& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return lex_less(a.box, b.box);
}

// Confidence filtering followed by greedy class-agnostic NMS. Survivors come
// back in descending-confidence order. Boxes with IoU strictly above
// iou_thresh against an already-kept box are suppressed.
inline std::vector<RoiPrediction> nms(const std::vector<RoiPrediction>& rois,
                                      double iou_thresh, double conf_thresh) {
    if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) {
        throw validation_error("nms: iou_thresh must be in (0,1]");
    }
    if (!(conf_thresh >= 0.0 && conf_thresh < 1.0)) {
        throw validation_error("nms: conf_thresh must be in [0,1)");
    }

    std::vector<RoiPrediction> pool;
    pool.reserve(rois.size());
    for (const auto& roi : rois) {
        validate_box(roi.box);
        if (roi.confidence >= conf_thresh) pool.push_back(roi);
    }
    std::sort(pool.begin(), pool.end(), suppression_priority);

    std::vector<RoiPrediction> kept;
    for (const auto& roi : pool) {
        bool suppressed = false;
        for (const auto& survivor : kept) {
            if (iou(roi.box, survivor.box) > iou_thresh) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(roi);
    }
    return kept;
}

} // namespace ssodat::geometry
