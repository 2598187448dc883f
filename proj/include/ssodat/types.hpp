#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ssodat/error.hpp"

namespace ssodat {

// Axis-aligned box in pixel coordinates, corners ordered (x1 < x2, y1 < y2).
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }

    bool valid() const {
        return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
               std::isfinite(y2) && x2 > x1 && y2 > y1;
    }

    bool operator==(const Box& other) const {
        return x1 == other.x1 && y1 == other.y1 && x2 == other.x2 && y2 == other.y2;
    }
};

inline void validate_box(const Box& b) {
    if (!b.valid()) {
        throw validation_error("degenerate box: corners must be finite with x1<x2, y1<y2");
    }
}

// Lexicographic (x1, y1, x2, y2) order; the deterministic tie-break used by
// NMS and matching.
inline bool lex_less(const Box& a, const Box& b) {
    if (a.x1 != b.x1) return a.x1 < b.x1;
    if (a.y1 != b.y1) return a.y1 < b.y1;
    if (a.x2 != b.x2) return a.x2 < b.x2;
    return a.y2 < b.y2;
}

// Per-class probability vector of length N_c.
using ClassDistribution = std::vector<double>;

inline void validate_class_distribution(const ClassDistribution& probs,
                                        std::size_t num_classes,
                                        double sum_tolerance = 1e-6) {
    if (probs.size() != num_classes) {
        throw validation_error("class distribution has length " +
                               std::to_string(probs.size()) + ", expected " +
                               std::to_string(num_classes));
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw validation_error("class probability out of [0,1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > sum_tolerance) {
        throw validation_error("class probabilities sum to " + std::to_string(sum) +
                               ", expected 1 within tolerance");
    }
}

// Index of the largest probability; ties resolve to the lowest class index.
inline std::size_t argmax_class(const ClassDistribution& probs) {
    if (probs.empty()) throw validation_error("argmax of empty distribution");
    return static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
}

enum class Source { teacher, student };

inline const char* to_string(Source s) {
    return s == Source::teacher ? "teacher" : "student";
}

inline Source source_from_string(const std::string& s) {
    if (s == "teacher") return Source::teacher;
    if (s == "student") return Source::student;
    throw validation_error("unknown source: " + s);
}

// One proposal: box, detector confidence, class distribution, RoI-head
// feature embedding.
struct RoiPrediction {
    Box box;
    double confidence = 0.0;
    ClassDistribution class_probs;
    std::vector<double> feature;

    bool operator==(const RoiPrediction& other) const {
        return box == other.box && confidence == other.confidence &&
               class_probs == other.class_probs && feature == other.feature;
    }
};

inline void validate_roi(const RoiPrediction& roi, std::size_t num_classes,
                         std::size_t feature_dim, double sum_tolerance = 1e-6) {
    validate_box(roi.box);
    if (!std::isfinite(roi.confidence) || roi.confidence < 0.0 || roi.confidence > 1.0) {
        throw validation_error("confidence out of [0,1]");
    }
    validate_class_distribution(roi.class_probs, num_classes, sum_tolerance);
    if (roi.feature.size() != feature_dim) {
        throw validation_error("feature has dimension " + std::to_string(roi.feature.size()) +
                               ", expected " + std::to_string(feature_dim));
    }
    for (double v : roi.feature) {
        if (!std::isfinite(v)) throw validation_error("non-finite feature value");
    }
}

// All RoIs for one image from one network.
struct ImagePrediction {
    std::string image_id;
    Source source = Source::teacher;
    std::vector<RoiPrediction> rois;

    bool operator==(const ImagePrediction& other) const {
        return image_id == other.image_id && source == other.source && rois == other.rois;
    }
};

// Teacher and student predictions for the same image.
struct PredictionPair {
    ImagePrediction teacher;
    ImagePrediction student;
};

} // namespace ssodat
