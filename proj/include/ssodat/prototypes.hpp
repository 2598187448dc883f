#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ssodat/types.hpp"

namespace ssodat::prototypes {

// RoI-head feature of one ground-truth box with its class label.
struct GtRoiFeature {
    std::vector<double> feature;
    std::size_t class_label = 0;
};

inline bool is_zero_vector(const std::vector<double>& v) {
    for (double x : v) {
        if (x != 0.0) return false;
    }
    return true;
}

inline double squared_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// Per-class mean of the features carrying that class; absent classes get the
// zero vector.
inline std::vector<std::vector<double>> local_prototypes(
    const std::vector<GtRoiFeature>& features, std::size_t num_classes,
    std::size_t feature_dim) {
    std::vector<std::vector<double>> sums(num_classes,
                                          std::vector<double>(feature_dim, 0.0));
    std::vector<std::size_t> counts(num_classes, 0);
    for (const auto& item : features) {
        if (item.class_label >= num_classes) {
            throw validation_error("local_prototypes: class label out of range");
        }
        if (item.feature.size() != feature_dim) {
            throw validation_error("local_prototypes: feature dimension mismatch");
        }
        for (std::size_t d = 0; d < feature_dim; ++d) {
            if (!std::isfinite(item.feature[d])) {
                throw validation_error("local_prototypes: non-finite feature value");
            }
            sums[item.class_label][d] += item.feature[d];
        }
        ++counts[item.class_label];
    }
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (counts[k] == 0) continue;
        for (double& v : sums[k]) v /= static_cast<double>(counts[k]);
    }
    return sums;
}

// Cosine of the angle between two nonzero vectors, clamped into [-1,1].
inline double cosine_similarity(const std::vector<double>& f,
                                const std::vector<double>& g) {
    if (f.size() != g.size()) {
        throw validation_error("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0, nf = 0.0, ng = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        dot += f[i] * g[i];
        nf += f[i] * f[i];
        ng += g[i] * g[i];
    }
    if (nf == 0.0 || ng == 0.0) {
        throw validation_error("cosine_similarity: undefined for a zero vector");
    }
    const double sim = dot / (std::sqrt(nf) * std::sqrt(ng));
    return std::min(1.0, std::max(-1.0, sim));
}

// EMA-maintained global class prototypes g_k with presence flags. Absent
// classes hold the exact zero vector; present classes are nonzero.
class PrototypeBank {
public:
    PrototypeBank(std::size_t num_classes, std::size_t feature_dim, double alpha,
                  double sim_threshold)
        : num_classes_(num_classes),
          feature_dim_(feature_dim),
          alpha_(alpha),
          sim_threshold_(sim_threshold),
          prototypes_(num_classes, std::vector<double>(feature_dim, 0.0)),
          present_(num_classes, false) {
        if (num_classes == 0) throw validation_error("bank: num_classes must be >= 1");
        if (feature_dim == 0) throw validation_error("bank: feature_dim must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw validation_error("bank: alpha must be in (0,1)");
        }
        if (!(sim_threshold > -1.0 && sim_threshold <= 1.0)) {
            throw validation_error("bank: sim_threshold must be in (-1,1]");
        }
    }

    std::size_t num_classes() const { return num_classes_; }
    std::size_t feature_dim() const { return feature_dim_; }
    double alpha() const { return alpha_; }
    double sim_threshold() const { return sim_threshold_; }
    std::uint64_t round_index() const { return round_index_; }
    void set_round_index(std::uint64_t r) { round_index_ = r; }

    bool is_present(std::size_t k) const { return present_.at(k); }
    const std::vector<double>& prototype(std::size_t k) const { return prototypes_.at(k); }

    std::size_t present_count() const {
        std::size_t n = 0;
        for (bool p : present_) n += p ? 1 : 0;
        return n;
    }

    // One EMA step from a full set of local prototypes. Zero local vectors
    // mean "class absent this batch" and leave the global prototype alone;
    // a nonzero local for an absent class initializes it.
    void ema_update(const std::vector<std::vector<double>>& locals) {
        if (locals.size() != num_classes_) {
            throw validation_error("ema_update: expected one local prototype per class");
        }
        for (std::size_t k = 0; k < num_classes_; ++k) {
            if (locals[k].size() != feature_dim_) {
                throw validation_error("ema_update: feature dimension mismatch");
            }
            if (is_zero_vector(locals[k])) continue;
            apply_single(k, locals[k]);
        }
    }

    // EMA step for a single class from a single feature.
    void apply_single(std::size_t k, const std::vector<double>& v) {
        if (k >= num_classes_) throw validation_error("bank: class index out of range");
        if (v.size() != feature_dim_) {
            throw validation_error("bank: feature dimension mismatch");
        }
        if (is_zero_vector(v)) return;
        if (present_[k]) {
            for (std::size_t d = 0; d < feature_dim_; ++d) {
                prototypes_[k][d] = alpha_ * prototypes_[k][d] + (1.0 - alpha_) * v[d];
            }
        } else {
            prototypes_[k] = v;
            present_[k] = true;
        }
    }

    void check_invariants() const {
        for (std::size_t k = 0; k < num_classes_; ++k) {
            const bool zero = is_zero_vector(prototypes_[k]);
            if (present_[k] && zero) {
                throw validation_error("bank: present class has zero prototype");
            }
            if (!present_[k] && !zero) {
                throw validation_error("bank: absent class has nonzero prototype");
            }
        }
    }

    bool operator==(const PrototypeBank& other) const {
        return num_classes_ == other.num_classes_ && feature_dim_ == other.feature_dim_ &&
               alpha_ == other.alpha_ && sim_threshold_ == other.sim_threshold_ &&
               round_index_ == other.round_index_ && prototypes_ == other.prototypes_ &&
               present_ == other.present_;
    }

private:
    std::size_t num_classes_;
    std::size_t feature_dim_;
    double alpha_;
    double sim_threshold_;
    std::uint64_t round_index_ = 0;
    std::vector<std::vector<double>> prototypes_;
    std::vector<bool> present_;
};

struct DiversityResult {
    double s_div = 0.0;
    std::vector<bool> novel; // per RoI: best similarity fell below the threshold
};

// Per-image diversity: one minus the mean best-prototype similarity of the
// image's RoI features. RoIs whose best similarity falls below the bank's
// threshold are flagged novel.
inline DiversityResult diversity_score(const std::vector<RoiPrediction>& rois,
                                       const PrototypeBank& bank) {
    if (rois.empty()) {
        throw no_proposals_error("diversity_score: no proposals");
    }
    if (bank.present_count() == 0) {
        throw cold_bank_error("diversity_score: bank holds no class prototypes yet");
    }
    DiversityResult result;
    result.novel.reserve(rois.size());
    double total = 0.0;
    for (const auto& roi : rois) {
        double best = -1.0;
        bool first = true;
        for (std::size_t k = 0; k < bank.num_classes(); ++k) {
            if (!bank.is_present(k)) continue;
            const double sim = cosine_similarity(roi.feature, bank.prototype(k));
            if (first || sim > best) {
                best = sim;
                first = false;
            }
        }
        total += best;
        result.novel.push_back(best < bank.sim_threshold());
    }
    result.s_div = 1.0 - total / static_cast<double>(rois.size());
    return result;
}

// One divergent image queued for the prototype update, with the uncertainty
// that orders the queue.
struct DivergentImage {
    std::string image_id;
    double s_unc = 0.0;
    ImagePrediction teacher;
};

// Walks divergent images in the given order (callers sort ascending by
// uncertainty; that ordering is normative) and folds each novel RoI into the
// bank as a single-feature prototype under its teacher argmax class. Against
// an empty bank every RoI counts as novel, which is how the bank
// bootstraps when no labeled features seeded it. Zero-feature RoIs cannot
// define a direction and are skipped.
inline void update_from_divergent(PrototypeBank& bank,
                                  const std::vector<DivergentImage>& images) {
    for (const auto& image : images) {
        for (const auto& roi : image.teacher.rois) {
            if (is_zero_vector(roi.feature)) continue;
            bool novel = true;
            if (bank.present_count() > 0) {
                double best = -1.0;
                bool first = true;
                for (std::size_t k = 0; k < bank.num_classes(); ++k) {
                    if (!bank.is_present(k)) continue;
                    const double sim = cosine_similarity(roi.feature, bank.prototype(k));
                    if (first || sim > best) {
                        best = sim;
                        first = false;
                    }
                }
                novel = best < bank.sim_threshold();
            }
            if (novel) {
                bank.apply_single(argmax_class(roi.class_probs), roi.feature);
            }
        }
    }
}

} // namespace ssodat::prototypes
