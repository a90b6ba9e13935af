// config.cpp
#include "cogs/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cogs {

namespace {

nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("config is not valid JSON: ") + e.what());
    }
}

/// Picks the named section, falling back to the whole document when it
/// already carries one of the section's marker keys.
nlohmann::json section_of(const nlohmann::json& doc, const std::string& name,
                          const std::vector<std::string>& markers) {
    if (doc.contains(name)) {
        if (!doc.at(name).is_object()) {
            throw parse_error("config section '" + name + "' must be an object");
        }
        return doc.at(name);
    }
    for (const auto& m : markers) {
        if (doc.contains(m)) return doc;
    }
    return nlohmann::json::object();
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw parse_error(std::string("config field '") + key + "' has the wrong type");
    }
}

}  // namespace

std::string read_config_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_hash_hex(const std::string& json_text) {
    const auto canonical = parse_json(json_text).dump();
    return hex64(fnv1a64(canonical));
}

ModelConfig parse_model_config(const std::string& json_text) {
    const auto doc = parse_json(json_text);
    const auto obj = section_of(doc, "model", {"preset"});
    std::string preset = "toy";
    read_field(obj, "preset", preset);
    ModelConfig cfg;
    if (preset == "toy") {
        cfg = ModelConfig::toy();
    } else if (preset == "full") {
        cfg = ModelConfig::published();
    } else {
        throw value_error("config: unknown model preset '" + preset +
                          "' (expected toy or full)");
    }
    std::int64_t speakers = cfg.speakers;
    read_field(obj, "speakers", speakers);
    cfg.speakers = speakers;
    std::uint64_t vocab_seed = cfg.vocab_seed;
    read_field(obj, "vocab_seed", vocab_seed);
    cfg.vocab_seed = vocab_seed;
    cfg.validate();
    return cfg;
}

SkeletonTopology parse_topology(const std::string& json_text, const ModelConfig& cfg) {
    const auto doc = parse_json(json_text);
    const auto obj = section_of(doc, "model", {"preset"});
    std::string name = cfg.graph.joints == 9 ? "default9" : "chain";
    read_field(obj, "skeleton", name);
    SkeletonTopology topo;
    if (name == "chain") {
        topo = chain_topology(cfg.graph.joints);
    } else if (name == "default9") {
        topo = SkeletonTopology::default9();
    } else if (name == "default42") {
        topo = SkeletonTopology::default42();
    } else {
        throw value_error("config: unknown skeleton '" + name +
                          "' (expected chain, default9, or default42)");
    }
    if (topo.joints() != cfg.graph.joints) {
        throw shape_error("config: skeleton '" + name + "' has " +
                          std::to_string(topo.joints()) + " joints, model expects " +
                          std::to_string(cfg.graph.joints));
    }
    return topo;
}

TrainingConfig parse_training_config(const std::string& json_text) {
    const auto doc = parse_json(json_text);
    const auto obj = section_of(doc, "training", {"epochs", "lr", "batch_size"});
    TrainingConfig cfg;
    if (obj.contains("weights")) {
        const auto& w = obj.at("weights");
        if (!w.is_object()) throw parse_error("config: 'weights' must be an object");
        read_field(w, "huber", cfg.weights.huber);
        read_field(w, "style", cfg.weights.style);
        read_field(w, "kld", cfg.weights.kld);
        read_field(w, "gan", cfg.weights.gan);
    }
    read_field(obj, "lr", cfg.lr);
    read_field(obj, "beta1", cfg.beta1);
    read_field(obj, "beta2", cfg.beta2);
    read_field(obj, "epochs", cfg.epochs);
    read_field(obj, "batch_size", cfg.batch_size);
    read_field(obj, "window", cfg.window);
    read_field(obj, "stride", cfg.stride);
    read_field(obj, "fps", cfg.fps);
    read_field(obj, "seed", cfg.seed);
    read_field(obj, "teacher_forcing", cfg.teacher_forcing);
    read_field(obj, "style_margin", cfg.style_margin);
    read_field(obj, "huber_delta", cfg.huber_delta);
    cfg.validate();
    return cfg;
}

SyntheticCorpusSpec parse_corpus_spec(const std::string& json_text) {
    const auto doc = parse_json(json_text);
    const auto obj = section_of(doc, "corpus", {"clips", "vocab_words", "beat_period"});
    SyntheticCorpusSpec spec;
    read_field(obj, "seed", spec.seed);
    read_field(obj, "clips", spec.clips);
    read_field(obj, "vocab_words", spec.vocab_words);
    read_field(obj, "beat_period", spec.beat_period);
    read_field(obj, "noise_level", spec.noise_level);
    read_field(obj, "speakers", spec.speakers);
    read_field(obj, "frames", spec.frames);
    read_field(obj, "joints", spec.joints);
    read_field(obj, "fps", spec.fps);
    read_field(obj, "sample_rate", spec.sample_rate);
    spec.validate();
    return spec;
}

}  // namespace cogs
