#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssodat/config.hpp"
#include "ssodat/error.hpp"
#include "ssodat/label_state.hpp"
#include "ssodat/round.hpp"
#include "ssodat/simulator.hpp"
#include "ssodat/types.hpp"

namespace ssodat::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Basic file and number helpers
// ---------------------------------------------------------------------------

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw io_error("failed to format double");
    return std::string(buf, ptr);
}

inline std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("short write to " + path.string());
}

// Relative paths of all regular files under dir, sorted.
inline std::vector<std::string> list_files_recursive(const fs::path& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files.push_back(fs::relative(entry.path(), dir).generic_string());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline nlohmann::json parse_json(const std::string& text, const std::string& where) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(where + ": " + e.what());
    }
}

inline nlohmann::json read_json_file(const fs::path& path) {
    return parse_json(read_file_bytes(path), path.string());
}

inline void write_json_file(const fs::path& path, const nlohmann::json& j) {
    write_file_bytes(path, j.dump(2) + "\n");
}

inline void expect_format(const nlohmann::json& j, const std::string& format,
                          const std::string& where) {
    try {
        if (j.at("format").get<std::string>() != format) {
            throw io_error(where + ": expected format '" + format + "'");
        }
        if (j.at("version").get<int>() != 1) {
            throw io_error(where + ": unsupported version");
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(where + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Little-endian scalar encoding for the binary bank file
// ---------------------------------------------------------------------------

namespace detail {

inline void append_u8(std::string& out, std::uint8_t v) {
    out.push_back(static_cast<char>(v));
}

inline void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void append_f64(std::string& out, double d) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &d, sizeof(bits));
    append_u64(out, bits);
}

class Reader {
public:
    Reader(const std::string& bytes, std::string where)
        : bytes_(bytes), where_(std::move(where)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++]))
                 << (8 * i);
        }
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++]))
                 << (8 * i);
        }
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double d = 0.0;
        std::memcpy(&d, &bits, sizeof(d));
        return d;
    }

    std::string raw(std::size_t n) {
        need(n);
        std::string out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == bytes_.size(); }

    void expect_done() const {
        if (!done()) throw io_error(where_ + ": trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw io_error(where_ + ": truncated file");
    }

    const std::string& bytes_;
    std::string where_;
    std::size_t pos_ = 0;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Predictions: JSONL, one header line then one record per (image, source)
// ---------------------------------------------------------------------------

struct PredictionSet {
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::map<std::string, PredictionPair> pairs;
    // Image ids that arrived with only one of the two sources; excluded from
    // pairs but reported so callers can surface them.
    std::vector<std::string> incomplete;
};

namespace detail {

inline nlohmann::json box_to_json(const Box& box) {
    return nlohmann::json::array({box.x1, box.y1, box.x2, box.y2});
}

inline Box box_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) throw io_error("box must be [x1,y1,x2,y2]");
    return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
               j[3].get<double>()};
}

inline nlohmann::json roi_to_json(const RoiPrediction& roi) {
    return nlohmann::json{{"box", box_to_json(roi.box)},
                          {"confidence", roi.confidence},
                          {"class_probs", roi.class_probs},
                          {"feature", roi.feature}};
}

inline RoiPrediction roi_from_json(const nlohmann::json& j) {
    RoiPrediction roi;
    roi.box = box_from_json(j.at("box"));
    roi.confidence = j.at("confidence").get<double>();
    roi.class_probs = j.at("class_probs").get<ClassDistribution>();
    roi.feature = j.at("feature").get<std::vector<double>>();
    return roi;
}

} // namespace detail

inline void write_predictions(const fs::path& path, std::size_t num_classes,
                              std::size_t feature_dim,
                              const std::vector<ImagePrediction>& images) {
    std::string out;
    out += nlohmann::json{{"format", "ssodat-preds"},
                          {"version", 1},
                          {"num_classes", num_classes},
                          {"feature_dim", feature_dim}}
               .dump();
    out += '\n';
    for (const auto& image : images) {
        nlohmann::json rois = nlohmann::json::array();
        for (const auto& roi : image.rois) rois.push_back(detail::roi_to_json(roi));
        out += nlohmann::json{{"image_id", image.image_id},
                              {"source", std::string(to_string(image.source))},
                              {"rois", rois}}
                   .dump();
        out += '\n';
    }
    write_file_bytes(path, out);
}

inline void write_predictions(const fs::path& path, std::size_t num_classes,
                              std::size_t feature_dim,
                              const std::map<std::string, PredictionPair>& pairs) {
    std::vector<ImagePrediction> images;
    images.reserve(pairs.size() * 2);
    for (const auto& [id, pair] : pairs) {
        images.push_back(pair.teacher);
        images.push_back(pair.student);
    }
    write_predictions(path, num_classes, feature_dim, images);
}

// Parses and validates a prediction file. Structural problems raise io_error
// with a 1-based line number; content that violates the model contract
// (confidence range, probability sums looser than 1e-4, dimensions) raises
// validation_error, also with the line number.
inline PredictionSet read_predictions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());

    const std::string name = path.filename().string();
    auto where = [&name](std::size_t line) {
        return name + ":" + std::to_string(line);
    };

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw io_error(name + ": empty file, header expected");
    ++line_no;
    const nlohmann::json header = parse_json(line, where(line_no));
    expect_format(header, "ssodat-preds", where(line_no));

    PredictionSet set;
    try {
        set.num_classes = header.at("num_classes").get<std::size_t>();
        set.feature_dim = header.at("feature_dim").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw io_error(where(line_no) + ": " + e.what());
    }
    if (set.num_classes == 0 || set.feature_dim == 0) {
        throw validation_error(where(line_no) + ": num_classes and feature_dim must be >= 1");
    }

    std::map<std::string, ImagePrediction> teachers;
    std::map<std::string, ImagePrediction> students;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const nlohmann::json record = parse_json(line, where(line_no));
        ImagePrediction image;
        try {
            image.image_id = record.at("image_id").get<std::string>();
            image.source = source_from_string(record.at("source").get<std::string>());
            for (const auto& roi_json : record.at("rois")) {
                image.rois.push_back(detail::roi_from_json(roi_json));
            }
        } catch (const nlohmann::json::exception& e) {
            throw io_error(where(line_no) + ": " + e.what());
        }
        if (image.image_id.empty()) {
            throw validation_error(where(line_no) + ": image_id must be non-empty");
        }
        try {
            for (const auto& roi : image.rois) {
                validate_roi(roi, set.num_classes, set.feature_dim, 1e-4);
            }
        } catch (const validation_error& e) {
            throw validation_error(where(line_no) + ": " + e.what());
        }
        auto& slot = image.source == Source::teacher ? teachers : students;
        if (!slot.emplace(image.image_id, std::move(image)).second) {
            throw io_error(where(line_no) + ": duplicate record for image '" +
                           record.at("image_id").get<std::string>() + "'");
        }
    }

    for (auto& [id, teacher] : teachers) {
        auto it = students.find(id);
        if (it == students.end()) {
            set.incomplete.push_back(id);
            continue;
        }
        set.pairs.emplace(id,
                          PredictionPair{std::move(teacher), std::move(it->second)});
        students.erase(it);
    }
    for (auto& [id, student] : students) set.incomplete.push_back(id);
    std::sort(set.incomplete.begin(), set.incomplete.end());
    return set;
}

// ---------------------------------------------------------------------------
// Prototype bank: binary for replay-exact state, JSON for inspection
// ---------------------------------------------------------------------------

inline constexpr char kBankMagic[] = "SSATBANK";

inline void save_bank(const fs::path& path, const prototypes::PrototypeBank& bank) {
    std::string out;
    out.append(kBankMagic, 8);
    detail::append_u32(out, 1); // version
    detail::append_u32(out, static_cast<std::uint32_t>(bank.num_classes()));
    detail::append_u32(out, static_cast<std::uint32_t>(bank.feature_dim()));
    detail::append_f64(out, bank.alpha());
    detail::append_f64(out, bank.sim_threshold());
    detail::append_u64(out, bank.round_index());
    for (std::size_t k = 0; k < bank.num_classes(); ++k) {
        detail::append_u8(out, bank.is_present(k) ? 1 : 0);
        for (double v : bank.prototype(k)) detail::append_f64(out, v);
    }
    write_file_bytes(path, out);
}

inline prototypes::PrototypeBank load_bank(const fs::path& path) {
    const std::string bytes = read_file_bytes(path);
    detail::Reader reader(bytes, path.string());
    if (reader.raw(8) != std::string(kBankMagic, 8)) {
        throw io_error(path.string() + ": not a prototype bank file");
    }
    if (reader.u32() != 1) throw io_error(path.string() + ": unsupported bank version");
    const std::size_t num_classes = reader.u32();
    const std::size_t feature_dim = reader.u32();
    const double alpha = reader.f64();
    const double sim_threshold = reader.f64();
    const std::uint64_t round_index = reader.u64();

    prototypes::PrototypeBank bank(num_classes, feature_dim, alpha, sim_threshold);
    bank.set_round_index(round_index);
    for (std::size_t k = 0; k < num_classes; ++k) {
        const bool present = reader.u8() != 0;
        std::vector<double> vec(feature_dim);
        for (double& v : vec) v = reader.f64();
        if (present) {
            if (prototypes::is_zero_vector(vec)) {
                throw io_error(path.string() + ": present prototype is a zero vector");
            }
            bank.apply_single(k, vec);
        } else if (!prototypes::is_zero_vector(vec)) {
            throw io_error(path.string() + ": absent prototype must be zero");
        }
    }
    reader.expect_done();
    bank.check_invariants();
    return bank;
}

inline void write_bank_json(const fs::path& path, const prototypes::PrototypeBank& bank) {
    nlohmann::json protos = nlohmann::json::array();
    for (std::size_t k = 0; k < bank.num_classes(); ++k) {
        protos.push_back(nlohmann::json{{"class_id", k},
                                        {"present", bank.is_present(k)},
                                        {"vector", bank.prototype(k)}});
    }
    write_json_file(path, nlohmann::json{{"format", "ssodat-bank"},
                                         {"version", 1},
                                         {"num_classes", bank.num_classes()},
                                         {"feature_dim", bank.feature_dim()},
                                         {"alpha", bank.alpha()},
                                         {"sim_threshold", bank.sim_threshold()},
                                         {"round_index", bank.round_index()},
                                         {"prototypes", protos}});
}

inline prototypes::PrototypeBank read_bank_json(const fs::path& path) {
    const nlohmann::json j = read_json_file(path);
    expect_format(j, "ssodat-bank", path.string());
    try {
        prototypes::PrototypeBank bank(j.at("num_classes").get<std::size_t>(),
                                       j.at("feature_dim").get<std::size_t>(),
                                       j.at("alpha").get<double>(),
                                       j.at("sim_threshold").get<double>());
        bank.set_round_index(j.at("round_index").get<std::uint64_t>());
        for (const auto& proto : j.at("prototypes")) {
            if (!proto.at("present").get<bool>()) continue;
            bank.apply_single(proto.at("class_id").get<std::size_t>(),
                              proto.at("vector").get<std::vector<double>>());
        }
        bank.check_invariants();
        return bank;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Round report
// ---------------------------------------------------------------------------

struct ReportData {
    std::size_t round_index = 0;
    std::size_t num_classes = 0;
    round::RoundStats stats;
    std::vector<roicm::PartitionResult> partitions;
    std::vector<selection::CandidateInput> candidates;
};

inline void write_report(const fs::path& path, std::size_t round_index,
                         std::size_t num_classes, const round::RoundScoring& scoring) {
    std::map<std::string, double> s_div_by_id;
    for (const auto& c : scoring.candidates) s_div_by_id[c.image_id] = c.s_div;

    nlohmann::json images = nlohmann::json::array();
    for (const auto& part : scoring.partitions) {
        part.check_invariants();
        nlohmann::json row{{"image_id", part.image_id},
                           {"verdict", std::string(roicm::to_string(part.verdict))}};
        if (part.verdict == roicm::Verdict::consistent) {
            row["d_kl"] = *part.d_kl;
            row["weight"] = *part.weight;
            nlohmann::json labels = nlohmann::json::array();
            for (const auto& label : *part.pseudo_labels) {
                labels.push_back(nlohmann::json{{"box", detail::box_to_json(label.box)},
                                                {"class_id", label.class_id},
                                                {"confidence", label.confidence}});
            }
            row["pseudo_labels"] = labels;
        } else if (part.verdict == roicm::Verdict::divergent) {
            row["s_unc"] = *part.s_unc;
            row["s_div"] = s_div_by_id.at(part.image_id);
        }
        images.push_back(std::move(row));
    }

    write_json_file(
        path, nlohmann::json{{"format", "ssodat-report"},
                             {"version", 1},
                             {"round", round_index},
                             {"num_classes", num_classes},
                             {"aggregates",
                              nlohmann::json{{"num_images", scoring.stats.num_images},
                                             {"num_consistent", scoring.stats.num_consistent},
                                             {"num_divergent", scoring.stats.num_divergent},
                                             {"num_unscorable", scoring.stats.num_unscorable},
                                             {"mean_weight", scoring.stats.mean_weight},
                                             {"mean_s_unc", scoring.stats.mean_s_unc}}},
                             {"images", images}});
}

inline ReportData read_report(const fs::path& path) {
    const nlohmann::json j = read_json_file(path);
    expect_format(j, "ssodat-report", path.string());
    ReportData data;
    try {
        data.round_index = j.at("round").get<std::size_t>();
        data.num_classes = j.at("num_classes").get<std::size_t>();
        const auto& agg = j.at("aggregates");
        data.stats.num_images = agg.at("num_images").get<std::size_t>();
        data.stats.num_consistent = agg.at("num_consistent").get<std::size_t>();
        data.stats.num_divergent = agg.at("num_divergent").get<std::size_t>();
        data.stats.num_unscorable = agg.at("num_unscorable").get<std::size_t>();
        data.stats.mean_weight = agg.at("mean_weight").get<double>();
        data.stats.mean_s_unc = agg.at("mean_s_unc").get<double>();
        for (const auto& row : j.at("images")) {
            roicm::PartitionResult part;
            part.image_id = row.at("image_id").get<std::string>();
            part.verdict = roicm::verdict_from_string(row.at("verdict").get<std::string>());
            if (part.verdict == roicm::Verdict::consistent) {
                part.d_kl = row.at("d_kl").get<double>();
                part.weight = row.at("weight").get<double>();
                std::vector<roicm::PseudoLabel> labels;
                for (const auto& label_json : row.at("pseudo_labels")) {
                    roicm::PseudoLabel label;
                    label.box = detail::box_from_json(label_json.at("box"));
                    label.class_id = label_json.at("class_id").get<std::size_t>();
                    label.confidence = label_json.at("confidence").get<double>();
                    labels.push_back(std::move(label));
                }
                part.pseudo_labels = std::move(labels);
            } else if (part.verdict == roicm::Verdict::divergent) {
                part.s_unc = row.at("s_unc").get<double>();
                data.candidates.push_back({part.image_id, *part.s_unc,
                                           row.at("s_div").get<double>()});
            }
            part.check_invariants();
            data.partitions.push_back(std::move(part));
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
    return data;
}

// ---------------------------------------------------------------------------
// Selection plan
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json candidate_to_json(const selection::CandidateScore& c) {
    return nlohmann::json{{"image_id", c.image_id}, {"raw_s_unc", c.raw_s_unc},
                          {"raw_s_div", c.raw_s_div}, {"s_unc", c.s_unc},
                          {"s_div", c.s_div},         {"s_sel", c.s_sel}};
}

inline selection::CandidateScore candidate_from_json(const nlohmann::json& j) {
    selection::CandidateScore c;
    c.image_id = j.at("image_id").get<std::string>();
    c.raw_s_unc = j.at("raw_s_unc").get<double>();
    c.raw_s_div = j.at("raw_s_div").get<double>();
    c.s_unc = j.at("s_unc").get<double>();
    c.s_div = j.at("s_div").get<double>();
    c.s_sel = j.at("s_sel").get<double>();
    return c;
}

inline nlohmann::json plan_to_json(const selection::SelectionPlan& plan) {
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& c : plan.ranked) ranked.push_back(candidate_to_json(c));
    return nlohmann::json{{"round", plan.round_index}, {"budget", plan.budget},
                          {"p", plan.p},               {"ranked", ranked},
                          {"selected", plan.selected}};
}

inline selection::SelectionPlan plan_from_json(const nlohmann::json& j) {
    selection::SelectionPlan plan;
    plan.round_index = j.at("round").get<std::size_t>();
    plan.budget = j.at("budget").get<std::size_t>();
    plan.p = j.at("p").get<double>();
    for (const auto& c : j.at("ranked")) plan.ranked.push_back(candidate_from_json(c));
    plan.selected = j.at("selected").get<std::vector<std::string>>();
    return plan;
}

} // namespace detail

inline void write_selection_plan(const fs::path& path,
                                 const selection::SelectionPlan& plan) {
    nlohmann::json j = detail::plan_to_json(plan);
    j["format"] = "ssodat-selection";
    j["version"] = 1;
    write_json_file(path, j);
}

inline selection::SelectionPlan read_selection_plan(const fs::path& path) {
    const nlohmann::json j = read_json_file(path);
    expect_format(j, "ssodat-selection", path.string());
    try {
        return detail::plan_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Label state
// ---------------------------------------------------------------------------

inline void write_label_state(const fs::path& path, const LabelState& state) {
    state.check_invariants();
    nlohmann::json history = nlohmann::json::array();
    for (const auto& plan : state.history) history.push_back(detail::plan_to_json(plan));
    write_json_file(path, nlohmann::json{{"format", "ssodat-state"},
                                         {"version", 1},
                                         {"round_index", state.round_index},
                                         {"initial_labeled", state.initial_labeled},
                                         {"labeled", state.labeled},
                                         {"unlabeled", state.unlabeled},
                                         {"history", history}});
}

inline LabelState read_label_state(const fs::path& path) {
    const nlohmann::json j = read_json_file(path);
    expect_format(j, "ssodat-state", path.string());
    LabelState state;
    try {
        state.round_index = j.at("round_index").get<std::size_t>();
        state.initial_labeled = j.at("initial_labeled").get<std::size_t>();
        state.labeled = j.at("labeled").get<std::vector<std::string>>();
        state.unlabeled = j.at("unlabeled").get<std::vector<std::string>>();
        for (const auto& plan_json : j.at("history")) {
            state.history.push_back(detail::plan_from_json(plan_json));
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
    state.check_invariants();
    return state;
}

// ---------------------------------------------------------------------------
// Loop outputs: config echo, per-round artifacts, summary table
// ---------------------------------------------------------------------------

inline std::string round_dir_name(std::size_t round_index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "round_%03zu", round_index);
    return buf;
}

inline std::string summary_csv(const sim::LoopTrace& trace) {
    std::string csv =
        "round,label_fraction,labeled,unlabeled,num_consistent,num_divergent,"
        "num_unscorable,mean_weight,mean_s_unc,batch_class_coverage,"
        "labeled_class_coverage,flip_rate,temperature,box_jitter,feature_noise,"
        "decorrelation\n";
    const std::size_t total = trace.spec.num_images;
    std::size_t labeled = trace.initial_state.labeled.size();
    for (const auto& round : trace.rounds) {
        labeled += round.plan.selected.size();
        csv += std::to_string(round.round_index);
        csv += ',' + format_double(round.label_fraction);
        csv += ',' + std::to_string(labeled);
        csv += ',' + std::to_string(total - labeled);
        csv += ',' + std::to_string(round.stats.num_consistent);
        csv += ',' + std::to_string(round.stats.num_divergent);
        csv += ',' + std::to_string(round.stats.num_unscorable);
        csv += ',' + format_double(round.stats.mean_weight);
        csv += ',' + format_double(round.stats.mean_s_unc);
        csv += ',' + std::to_string(round.batch_class_coverage);
        csv += ',' + std::to_string(round.quality.labeled_class_coverage);
        csv += ',' + format_double(round.quality.flip_rate);
        csv += ',' + format_double(round.quality.temperature);
        csv += ',' + format_double(round.quality.box_jitter);
        csv += ',' + format_double(round.quality.feature_noise);
        csv += ',' + format_double(round.quality.decorrelation);
        csv += '\n';
    }
    return csv;
}

// Materializes a loop run: config.json, per-round report/selection/bank
// artifacts, the final label state and a summary table. Output bytes are a
// pure function of the trace.
inline void write_loop_trace(const fs::path& dir, const sim::LoopTrace& trace) {
    fs::create_directories(dir);
    write_json_file(dir / "config.json",
                    nlohmann::json{{"format", "ssodat-loop-config"},
                                   {"version", 1},
                                   {"engine", trace.config.to_json()},
                                   {"pool", trace.spec.to_json()},
                                   {"oracle", trace.skill.to_json()},
                                   {"options", trace.options.to_json()}});
    write_label_state(dir / "state.json", trace.final_state);
    write_file_bytes(dir / "summary.csv", summary_csv(trace));

    for (const auto& round : trace.rounds) {
        const fs::path round_dir = dir / "rounds" / round_dir_name(round.round_index);
        fs::create_directories(round_dir);
        round::RoundScoring scoring{round.partitions, round.candidates, round.stats};
        write_report(round_dir / "report.json", round.round_index,
                     trace.config.num_classes, scoring);
        write_selection_plan(round_dir / "selection.json", round.plan);
        save_bank(round_dir / "bank.bin", round.bank);
        write_bank_json(round_dir / "bank.json", round.bank);
    }
}

} // namespace ssodat::io
