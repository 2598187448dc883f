#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssodat/config.hpp"
#include "ssodat/label_state.hpp"
#include "ssodat/prototypes.hpp"
#include "ssodat/round.hpp"
#include "ssodat/selection.hpp"
#include "ssodat/types.hpp"

namespace ssodat::sim {

// ---------------------------------------------------------------------------
// Deterministic randomness. All draws are derived from raw mt19937_64 output
// so streams replay bit-exactly regardless of standard library internals.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t double_bits(double x) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof(bits));
    return bits;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

    std::uint64_t next() {
        state_ = splitmix64(state_);
        return state_;
    }

    // Strictly inside (0,1).
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; both uniforms are drawn every call.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::size_t uniform_int(std::size_t lo, std::size_t hi) {
        if (hi < lo) throw validation_error("uniform_int: empty range");
        const std::size_t span = hi - lo + 1;
        auto offset = static_cast<std::size_t>(uniform() * static_cast<double>(span));
        if (offset >= span) offset = span - 1;
        return lo + offset;
    }

    std::size_t categorical(const std::vector<double>& freqs) {
        const double u = uniform();
        double cum = 0.0;
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            cum += freqs[k];
            if (u < cum) return k;
        }
        return freqs.size() - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform_int(0, i - 1)]);
        }
    }

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Synthetic pool
// ---------------------------------------------------------------------------

struct SyntheticPoolSpec {
    std::size_t num_images = 0;
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::vector<double> class_frequencies;
    std::size_t min_objects = 1;
    std::size_t max_objects = 1;
    std::uint64_t seed = 0;
    double feature_sigma = 0.05; // spread of features around the class centroid
    double image_size = 1024.0;

    void validate() const {
        if (num_images == 0) throw validation_error("pool spec: num_images must be >= 1");
        if (num_classes == 0) throw validation_error("pool spec: num_classes must be >= 1");
        if (feature_dim < num_classes) {
            throw validation_error("pool spec: feature_dim must be >= num_classes so "
                                   "class centroids can be pairwise separated");
        }
        if (class_frequencies.size() != num_classes) {
            throw validation_error("pool spec: class_frequencies must have one entry "
                                   "per class");
        }
        double sum = 0.0;
        bool any_positive = false;
        for (double f : class_frequencies) {
            if (!(f >= 0.0)) throw validation_error("pool spec: frequencies must be >= 0");
            if (f > 0.0) any_positive = true;
            sum += f;
        }
        if (!any_positive || std::abs(sum - 1.0) > 1e-6) {
            throw validation_error("pool spec: frequencies must sum to 1");
        }
        if (max_objects < min_objects || max_objects == 0) {
            throw validation_error("pool spec: need max_objects >= max(1, min_objects)");
        }
        if (!(feature_sigma >= 0.0)) {
            throw validation_error("pool spec: feature_sigma must be >= 0");
        }
        if (!(image_size > 0.0)) throw validation_error("pool spec: image_size must be > 0");
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"num_images", num_images},
                              {"num_classes", num_classes},
                              {"feature_dim", feature_dim},
                              {"class_frequencies", class_frequencies},
                              {"min_objects", min_objects},
                              {"max_objects", max_objects},
                              {"seed", seed},
                              {"feature_sigma", feature_sigma},
                              {"image_size", image_size}};
    }

    static SyntheticPoolSpec from_json(const nlohmann::json& j) {
        SyntheticPoolSpec spec;
        spec.num_images = j.at("num_images").get<std::size_t>();
        spec.num_classes = j.at("num_classes").get<std::size_t>();
        spec.feature_dim = j.at("feature_dim").get<std::size_t>();
        spec.class_frequencies = j.at("class_frequencies").get<std::vector<double>>();
        spec.min_objects = j.value("min_objects", spec.min_objects);
        spec.max_objects = j.value("max_objects", spec.max_objects);
        spec.seed = j.value("seed", spec.seed);
        spec.feature_sigma = j.value("feature_sigma", spec.feature_sigma);
        spec.image_size = j.value("image_size", spec.image_size);
        spec.validate();
        return spec;
    }
};

inline std::vector<double> zipf_frequencies(std::size_t num_classes, double exponent) {
    std::vector<double> freqs(num_classes);
    double sum = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
        freqs[k] = 1.0 / std::pow(static_cast<double>(k + 1), exponent);
        sum += freqs[k];
    }
    for (double& f : freqs) f /= sum;
    return freqs;
}

// The stock desk-scale benchmark: 500 images, 8 classes with a steep Zipf
// imbalance, seed 42.
inline SyntheticPoolSpec benchmark_spec() {
    SyntheticPoolSpec spec;
    spec.num_images = 500;
    spec.num_classes = 8;
    spec.feature_dim = 16;
    spec.class_frequencies = zipf_frequencies(8, 2.0);
    spec.min_objects = 1;
    spec.max_objects = 4;
    spec.seed = 42;
    return spec;
}

struct GroundTruthObject {
    Box box;
    std::size_t class_id = 0;
    std::vector<double> feature;

    bool operator==(const GroundTruthObject& other) const {
        return box == other.box && class_id == other.class_id && feature == other.feature;
    }
};

struct GroundTruthImage {
    std::string image_id;
    std::vector<GroundTruthObject> objects;
    // Intrinsic recognition hardness in [0.5, 1.5]; scales the oracle's
    // classification noise so per-image uncertainty persists across rounds
    // (hard images stay hard until they are labeled).
    double difficulty = 1.0;

    bool operator==(const GroundTruthImage& other) const {
        return image_id == other.image_id && objects == other.objects &&
               difficulty == other.difficulty;
    }
};

struct SyntheticPool {
    SyntheticPoolSpec spec;
    std::vector<std::vector<double>> centroids; // one unit direction per class
    std::vector<GroundTruthImage> images;
    std::map<std::string, std::size_t> index_by_id;

    const GroundTruthImage& image(const std::string& id) const {
        auto it = index_by_id.find(id);
        if (it == index_by_id.end()) {
            throw validation_error("pool: unknown image id '" + id + "'");
        }
        return images[it->second];
    }

    bool operator==(const SyntheticPool& other) const {
        return centroids == other.centroids && images == other.images;
    }
};

inline std::string format_image_id(std::size_t index, std::size_t total) {
    std::size_t width = 4;
    for (std::size_t n = total; n > 10000; n /= 10) ++width;
    std::string digits = std::to_string(index);
    std::string id = "img_";
    id.append(width > digits.size() ? width - digits.size() : 0, '0');
    id += digits;
    return id;
}

// Builds the ground-truth dataset: boxes at random positions, classes drawn
// from the configured frequencies, features Gaussian around orthogonal unit
// centroids (pairwise cosine 0, so inter-class similarity sits below any
// usable novelty threshold).
inline SyntheticPool generate_pool(const SyntheticPoolSpec& spec) {
    spec.validate();
    SyntheticPool pool;
    pool.spec = spec;

    pool.centroids.assign(spec.num_classes, std::vector<double>(spec.feature_dim, 0.0));
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        pool.centroids[k][k] = 1.0;
    }

    Rng rng(spec.seed);
    const double s = spec.image_size;
    pool.images.reserve(spec.num_images);
    for (std::size_t i = 0; i < spec.num_images; ++i) {
        GroundTruthImage image;
        image.image_id = format_image_id(i, spec.num_images);
        const std::size_t count = rng.uniform_int(spec.min_objects, spec.max_objects);
        image.objects.reserve(count);
        for (std::size_t o = 0; o < count; ++o) {
            GroundTruthObject obj;
            obj.class_id = rng.categorical(spec.class_frequencies);
            const double cx = rng.uniform(0.05, 0.95) * s;
            const double cy = rng.uniform(0.05, 0.95) * s;
            const double w = rng.uniform(0.03, 0.20) * s;
            const double h = rng.uniform(0.03, 0.20) * s;
            obj.box = {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
            obj.feature.resize(spec.feature_dim);
            for (std::size_t d = 0; d < spec.feature_dim; ++d) {
                obj.feature[d] = pool.centroids[obj.class_id][d] +
                                 spec.feature_sigma * rng.normal();
            }
            image.objects.push_back(std::move(obj));
        }
        image.difficulty = rng.uniform(0.5, 1.5);
        pool.index_by_id[image.image_id] = i;
        pool.images.push_back(std::move(image));
    }
    return pool;
}

// ---------------------------------------------------------------------------
// Prediction oracle
// ---------------------------------------------------------------------------

// One noise rate interpolated linearly in the labeled fraction; more labels
// never make the oracle worse.
struct NoiseKnob {
    double at_zero = 0.0;
    double at_full = 0.0;

    double at(double label_fraction) const {
        const double lf = std::min(1.0, std::max(0.0, label_fraction));
        return std::lerp(at_zero, at_full, lf); // exact at both endpoints
    }

    void validate(const char* name) const {
        if (!(at_full >= 0.0 && at_zero <= 1.0 && at_full <= at_zero)) {
            throw validation_error(std::string("oracle: knob '") + name +
                                   "' needs 0 <= at_full <= at_zero <= 1");
        }
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"at_zero", at_zero}, {"at_full", at_full}};
    }

    static NoiseKnob from_json(const nlohmann::json& j) {
        return NoiseKnob{j.at("at_zero").get<double>(), j.at("at_full").get<double>()};
    }
};

struct OracleSkill {
    NoiseKnob flip_rate;      // chance a predicted argmax class is wrong
    NoiseKnob temperature;    // flattens class distributions toward uniform
    NoiseKnob box_jitter;     // coordinate noise relative to box extent
    NoiseKnob feature_noise;  // feature noise in centroid-norm units
    NoiseKnob decorrelation;  // chance the student re-rolls instead of copying

    void validate() const {
        flip_rate.validate("flip_rate");
        temperature.validate("temperature");
        box_jitter.validate("box_jitter");
        feature_noise.validate("feature_noise");
        decorrelation.validate("decorrelation");
    }

    static OracleSkill noiseless() { return OracleSkill{}; }

    static OracleSkill benchmark() {
        OracleSkill skill;
        skill.flip_rate = {0.35, 0.05};
        skill.temperature = {0.5, 0.1};
        skill.box_jitter = {0.3, 0.05};
        skill.feature_noise = {0.4, 0.1};
        skill.decorrelation = {0.7, 0.2};
        return skill;
    }

    nlohmann::json to_json() const {
        return nlohmann::json{{"flip_rate", flip_rate.to_json()},
                              {"temperature", temperature.to_json()},
                              {"box_jitter", box_jitter.to_json()},
                              {"feature_noise", feature_noise.to_json()},
                              {"decorrelation", decorrelation.to_json()}};
    }

    static OracleSkill from_json(const nlohmann::json& j) {
        OracleSkill skill;
        skill.flip_rate = NoiseKnob::from_json(j.at("flip_rate"));
        skill.temperature = NoiseKnob::from_json(j.at("temperature"));
        skill.box_jitter = NoiseKnob::from_json(j.at("box_jitter"));
        skill.feature_noise = NoiseKnob::from_json(j.at("feature_noise"));
        skill.decorrelation = NoiseKnob::from_json(j.at("decorrelation"));
        skill.validate();
        return skill;
    }
};

namespace detail {

inline ClassDistribution blend_distribution(std::size_t predicted, double t,
                                            std::size_t num_classes) {
    ClassDistribution probs(num_classes, t / static_cast<double>(num_classes));
    probs[predicted] += 1.0 - t;
    return probs;
}

inline Box jitter_box(const Box& box, double rate, Rng& rng) {
    const double sx = rate * 0.15 * box.width();
    const double sy = rate * 0.15 * box.height();
    Box out{box.x1 + sx * rng.normal(), box.y1 + sy * rng.normal(),
            box.x2 + sx * rng.normal(), box.y2 + sy * rng.normal()};
    const double min_extent = 1.0;
    if (out.x2 - out.x1 < min_extent) {
        const double mid = (out.x1 + out.x2) / 2.0;
        out.x1 = mid - min_extent / 2.0;
        out.x2 = mid + min_extent / 2.0;
    }
    if (out.y2 - out.y1 < min_extent) {
        const double mid = (out.y1 + out.y2) / 2.0;
        out.y1 = mid - min_extent / 2.0;
        out.y2 = mid + min_extent / 2.0;
    }
    return out;
}

struct Rates {
    double flip, temperature, jitter, feature, decorrelation;
};

inline RoiPrediction draw_roi(const GroundTruthObject& obj, const Rates& rates,
                              std::size_t num_classes, Rng& rng) {
    RoiPrediction roi;
    std::size_t predicted = obj.class_id;
    if (num_classes > 1 && rng.uniform() < rates.flip) {
        std::size_t other = rng.uniform_int(0, num_classes - 2);
        if (other >= obj.class_id) ++other;
        predicted = other;
    }
    const double t = std::min(0.97, std::max(0.0, rates.temperature * rng.uniform(0.6, 1.4)));
    roi.class_probs = blend_distribution(predicted, t, num_classes);
    roi.confidence = std::min(1.0, std::max(0.05, 1.0 - 0.5 * t * rng.uniform()));
    roi.box = jitter_box(obj.box, rates.jitter, rng);
    roi.feature.resize(obj.feature.size());
    for (std::size_t d = 0; d < obj.feature.size(); ++d) {
        roi.feature[d] = obj.feature[d] + rates.feature * rng.normal();
    }
    return roi;
}

} // namespace detail

// Perturbs the ground truth into a (teacher, student) prediction pair. The
// noise schedule is keyed to the labeled fraction, with the classification
// knobs (flip rate, temperature) additionally scaled by the image's
// intrinsic difficulty; the student either copies the teacher's RoI verbatim
// or, with the decorrelation probability, re-rolls its own noise.
// Deterministic in (seed, image_id, label_fraction).
inline PredictionPair predict(const OracleSkill& skill, const GroundTruthImage& image,
                              double label_fraction, std::uint64_t seed,
                              std::size_t num_classes) {
    if (!(label_fraction >= 0.0 && label_fraction <= 1.0)) {
        throw validation_error("predict: label_fraction must be in [0,1]");
    }
    skill.validate();
    Rng rng(mix64(seed, fnv1a(image.image_id), double_bits(label_fraction)));
    const detail::Rates rates{
        std::min(1.0, skill.flip_rate.at(label_fraction) * image.difficulty),
        skill.temperature.at(label_fraction) * image.difficulty,
        skill.box_jitter.at(label_fraction),
        skill.feature_noise.at(label_fraction),
        skill.decorrelation.at(label_fraction)};

    PredictionPair pair;
    pair.teacher.image_id = image.image_id;
    pair.teacher.source = Source::teacher;
    pair.student.image_id = image.image_id;
    pair.student.source = Source::student;
    for (const auto& obj : image.objects) {
        RoiPrediction teacher_roi = detail::draw_roi(obj, rates, num_classes, rng);
        RoiPrediction student_roi =
            (rng.uniform() < rates.decorrelation)
                ? detail::draw_roi(obj, rates, num_classes, rng)
                : teacher_roi;
        pair.teacher.rois.push_back(std::move(teacher_roi));
        pair.student.rois.push_back(std::move(student_roi));
    }
    return pair;
}

// ---------------------------------------------------------------------------
// Multi-round loop
// ---------------------------------------------------------------------------

enum class Strategy { combined, uncertainty_only, diversity_only, random_baseline };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::combined: return "combined";
        case Strategy::uncertainty_only: return "uncertainty";
        case Strategy::diversity_only: return "diversity";
        default: return "random";
    }
}

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "combined") return Strategy::combined;
    if (s == "uncertainty") return Strategy::uncertainty_only;
    if (s == "diversity") return Strategy::diversity_only;
    if (s == "random") return Strategy::random_baseline;
    throw validation_error("unknown strategy: " + s);
}

struct LoopOptions {
    std::size_t rounds = 0;
    std::size_t budget = 1;
    Strategy strategy = Strategy::combined;
    double initial_label_fraction = 0.05;

    nlohmann::json to_json() const {
        return nlohmann::json{{"rounds", rounds},
                              {"budget", budget},
                              {"strategy", std::string(to_string(strategy))},
                              {"initial_label_fraction", initial_label_fraction}};
    }
};

// Oracle quality implied by the labeled fraction reached after a round, plus
// coverage statistics of the labeled set.
struct QualityProxy {
    double flip_rate = 0.0;
    double temperature = 0.0;
    double box_jitter = 0.0;
    double feature_noise = 0.0;
    double decorrelation = 0.0;
    std::size_t labeled_class_coverage = 0;
    std::vector<std::size_t> labeled_class_counts;
};

struct RoundTrace {
    std::size_t round_index = 0;
    double label_fraction = 0.0; // at scoring time, before this round's labels
    round::RoundStats stats;
    std::vector<roicm::PartitionResult> partitions;
    std::vector<selection::CandidateInput> candidates;
    selection::SelectionPlan plan;
    prototypes::PrototypeBank bank;
    std::size_t batch_class_coverage = 0; // distinct true classes in the batch
    QualityProxy quality;
};

struct LoopTrace {
    SyntheticPoolSpec spec;
    OracleSkill skill;
    EngineConfig config;
    LoopOptions options;
    prototypes::PrototypeBank initial_bank;
    io::LabelState initial_state;
    std::vector<RoundTrace> rounds;
    io::LabelState final_state;

    LoopTrace(const prototypes::PrototypeBank& bank) : initial_bank(bank) {}
};

inline std::size_t distinct_true_classes(const SyntheticPool& pool,
                                         const std::vector<std::string>& ids) {
    std::set<std::size_t> classes;
    for (const auto& id : ids) {
        for (const auto& obj : pool.image(id).objects) classes.insert(obj.class_id);
    }
    return classes.size();
}

inline std::vector<std::size_t> class_counts(const SyntheticPool& pool,
                                             const std::vector<std::string>& ids,
                                             std::size_t num_classes) {
    std::vector<std::size_t> counts(num_classes, 0);
    for (const auto& id : ids) {
        for (const auto& obj : pool.image(id).objects) ++counts[obj.class_id];
    }
    return counts;
}

namespace detail {

inline selection::SelectionPlan random_plan(std::vector<selection::CandidateInput> pool,
                                            std::size_t budget, double p,
                                            std::size_t round_index, Rng& rng) {
    selection::SelectionPlan plan;
    plan.round_index = round_index;
    plan.budget = budget;
    plan.p = p;
    rng.shuffle(pool);
    for (const auto& candidate : pool) {
        selection::CandidateScore score;
        score.image_id = candidate.image_id;
        score.raw_s_unc = candidate.s_unc;
        score.raw_s_div = candidate.s_div;
        plan.ranked.push_back(std::move(score));
    }
    const std::size_t take = std::min<std::size_t>(budget, plan.ranked.size());
    for (std::size_t i = 0; i < take; ++i) {
        plan.selected.push_back(plan.ranked[i].image_id);
    }
    return plan;
}

} // namespace detail

// The Fig.-1 loop at desk scale: score the unlabeled pool, update the
// prototype bank from the divergent set, pick a batch, hand it to the
// simulated oracle (ground truth becomes labels), repeat.
inline LoopTrace run_loop(const SyntheticPool& pool, const OracleSkill& skill,
                          const EngineConfig& cfg, const LoopOptions& options) {
    cfg.validate();
    skill.validate();
    if (cfg.num_classes != pool.spec.num_classes || cfg.feature_dim != pool.spec.feature_dim) {
        throw validation_error("run_loop: config dimensions do not match the pool");
    }
    if (!(options.initial_label_fraction >= 0.0 && options.initial_label_fraction <= 1.0)) {
        throw validation_error("run_loop: initial_label_fraction must be in [0,1]");
    }

    const std::size_t total = pool.spec.num_images;
    std::vector<std::string> ids;
    ids.reserve(total);
    for (const auto& image : pool.images) ids.push_back(image.image_id);

    // Seeded initial labeled set.
    std::vector<std::string> shuffled = ids;
    Rng init_rng(mix64(pool.spec.seed, 0x1ab31edULL));
    init_rng.shuffle(shuffled);
    auto initial =
        static_cast<std::size_t>(std::llround(options.initial_label_fraction *
                                              static_cast<double>(total)));
    if (initial > total) initial = total;

    io::LabelState state;
    state.initial_labeled = initial;
    state.labeled.assign(shuffled.begin(), shuffled.begin() + initial);
    state.unlabeled.assign(shuffled.begin() + initial, shuffled.end());
    std::sort(state.labeled.begin(), state.labeled.end());
    std::sort(state.unlabeled.begin(), state.unlabeled.end());

    if (options.rounds > 0 && options.budget < 1) {
        throw validation_error("run_loop: budget must be >= 1");
    }
    if (options.rounds * options.budget > state.unlabeled.size()) {
        throw validation_error("run_loop: budget * rounds exceeds the unlabeled pool");
    }

    // Bank seeded from the initial labeled set's ground-truth features.
    prototypes::PrototypeBank bank(cfg.num_classes, cfg.feature_dim, cfg.alpha,
                                   cfg.sim_threshold);
    std::vector<prototypes::GtRoiFeature> seed_features;
    for (const auto& id : state.labeled) {
        for (const auto& obj : pool.image(id).objects) {
            seed_features.push_back({obj.feature, obj.class_id});
        }
    }
    bank.ema_update(
        prototypes::local_prototypes(seed_features, cfg.num_classes, cfg.feature_dim));

    LoopTrace trace(bank);
    trace.spec = pool.spec;
    trace.skill = skill;
    trace.config = cfg;
    trace.options = options;
    trace.initial_state = state;

    for (std::size_t r = 1; r <= options.rounds; ++r) {
        const double label_fraction =
            static_cast<double>(state.labeled.size()) / static_cast<double>(total);

        std::map<std::string, PredictionPair> predictions;
        for (const auto& id : state.unlabeled) {
            predictions[id] =
                predict(skill, pool.image(id), label_fraction, pool.spec.seed,
                        cfg.num_classes);
        }

        round::RoundScoring scoring = round::score_round(predictions, bank, cfg);
        bank.set_round_index(r);

        selection::SelectionPlan plan;
        switch (options.strategy) {
            case Strategy::combined:
                plan = selection::plan_round(scoring.candidates, options.budget, cfg.p, r);
                break;
            case Strategy::uncertainty_only: {
                auto only = scoring.candidates;
                for (auto& c : only) c.s_div = 0.0;
                plan = selection::plan_round(only, options.budget, cfg.p, r);
                break;
            }
            case Strategy::diversity_only: {
                auto only = scoring.candidates;
                for (auto& c : only) c.s_unc = 0.0;
                plan = selection::plan_round(only, options.budget, cfg.p, r);
                break;
            }
            case Strategy::random_baseline: {
                Rng rng(mix64(pool.spec.seed, 0x7a2d0ULL, r));
                plan = detail::random_plan(scoring.candidates, options.budget, cfg.p, r, rng);
                break;
            }
        }

        // Oracle stage: selected images join the labeled set with their truth.
        std::set<std::string> chosen(plan.selected.begin(), plan.selected.end());
        std::vector<std::string> still_unlabeled;
        still_unlabeled.reserve(state.unlabeled.size());
        for (const auto& id : state.unlabeled) {
            if (chosen.count(id)) {
                state.labeled.push_back(id);
            } else {
                still_unlabeled.push_back(id);
            }
        }
        state.unlabeled = std::move(still_unlabeled);
        std::sort(state.labeled.begin(), state.labeled.end());
        state.round_index = r;
        state.history.push_back(plan);
        state.check_invariants();

        RoundTrace round_trace{r,
                               label_fraction,
                               scoring.stats,
                               std::move(scoring.partitions),
                               std::move(scoring.candidates),
                               plan,
                               bank,
                               distinct_true_classes(pool, plan.selected),
                               QualityProxy{}};
        const double lf_after =
            static_cast<double>(state.labeled.size()) / static_cast<double>(total);
        round_trace.quality.flip_rate = skill.flip_rate.at(lf_after);
        round_trace.quality.temperature = skill.temperature.at(lf_after);
        round_trace.quality.box_jitter = skill.box_jitter.at(lf_after);
        round_trace.quality.feature_noise = skill.feature_noise.at(lf_after);
        round_trace.quality.decorrelation = skill.decorrelation.at(lf_after);
        round_trace.quality.labeled_class_coverage =
            distinct_true_classes(pool, state.labeled);
        round_trace.quality.labeled_class_counts =
            class_counts(pool, state.labeled, cfg.num_classes);
        trace.rounds.push_back(std::move(round_trace));
    }

    trace.final_state = state;
    return trace;
}

} // namespace ssodat::sim
