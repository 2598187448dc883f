#pragma once

#include <cstddef>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ssodat/error.hpp"

namespace ssodat {

// Engine-wide knobs. Everything is explicit; there are no environment
// variables.
struct EngineConfig {
    std::size_t num_classes = 0; // N_c, required
    std::size_t feature_dim = 0; // D, required
    double conf_thresh = 0.7;    // teacher confidence filter before NMS
    double iou_nms = 0.5;        // NMS suppression threshold
    double iou_match = 0.5;      // teacher/student RoI matching threshold
    double epsilon = 1e-8;       // probability floor before any log
    double alpha = 0.99;         // prototype EMA momentum
    double sim_threshold = 0.7;  // novel-class cosine threshold s
    double p = 2.0;              // L-p fusion exponent
    double lambda_u = 1.0;       // unsupervised loss weight, emitted alongside weights
    bool literal_kl = false;     // use the log-ratio form instead of standard KL

    void validate() const {
        if (num_classes == 0) throw validation_error("config: num_classes must be >= 1");
        if (feature_dim == 0) throw validation_error("config: feature_dim must be >= 1");
        if (!(conf_thresh >= 0.0 && conf_thresh < 1.0))
            throw validation_error("config: conf_thresh must be in [0,1)");
        if (!(iou_nms > 0.0 && iou_nms <= 1.0))
            throw validation_error("config: iou_nms must be in (0,1]");
        if (!(iou_match > 0.0 && iou_match <= 1.0))
            throw validation_error("config: iou_match must be in (0,1]");
        if (!(epsilon > 0.0)) throw validation_error("config: epsilon must be > 0");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw validation_error("config: alpha must be in (0,1)");
        if (!(sim_threshold > -1.0 && sim_threshold <= 1.0))
            throw validation_error("config: sim_threshold must be in (-1,1]");
        if (!(p >= 1.0)) throw validation_error("config: p must be >= 1");
        if (!(lambda_u >= 0.0)) throw validation_error("config: lambda_u must be >= 0");
    }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"num_classes", num_classes}, {"feature_dim", feature_dim},
            {"conf_thresh", conf_thresh}, {"iou_nms", iou_nms},
            {"iou_match", iou_match},     {"epsilon", epsilon},
            {"alpha", alpha},             {"sim_threshold", sim_threshold},
            {"p", p},                     {"lambda_u", lambda_u},
            {"literal_kl", literal_kl}};
    }

    static EngineConfig from_json(const nlohmann::json& j) {
        EngineConfig cfg;
        cfg.num_classes = j.at("num_classes").get<std::size_t>();
        cfg.feature_dim = j.at("feature_dim").get<std::size_t>();
        cfg.conf_thresh = j.value("conf_thresh", cfg.conf_thresh);
        cfg.iou_nms = j.value("iou_nms", cfg.iou_nms);
        cfg.iou_match = j.value("iou_match", cfg.iou_match);
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.sim_threshold = j.value("sim_threshold", cfg.sim_threshold);
        cfg.p = j.value("p", cfg.p);
        cfg.lambda_u = j.value("lambda_u", cfg.lambda_u);
        cfg.literal_kl = j.value("literal_kl", cfg.literal_kl);
        cfg.validate();
        return cfg;
    }
};

inline EngineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("config parse error in " + path + ": " + e.what());
    }
    try {
        return EngineConfig::from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw io_error("config field error in " + path + ": " + e.what());
    }
}

inline void save_config(const EngineConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write config file: " + path);
    out << cfg.to_json().dump(2) << "\n";
}

} // namespace ssodat
