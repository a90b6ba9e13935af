// commands.cpp
#include "commands.hpp"

#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogs/config.hpp"
#include "cogs/metrics.hpp"
#include "cogs/ops.hpp"
#include "cogs/trainer.hpp"

namespace cogs::cli {

namespace {

using nlohmann::json;

json parse_doc(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("config is not valid JSON: ") + e.what());
    }
}

std::string require_string(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_string()) {
        throw value_error(std::string("config missing required string field '") + key + "'");
    }
    return doc.at(key).get<std::string>();
}

std::string optional_string(const json& doc, const char* key, const std::string& fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_string()) {
        throw parse_error(std::string("config field '") + key + "' must be a string");
    }
    return doc.at(key).get<std::string>();
}

template <typename T>
T optional_number(const json& doc, const char* key, T fallback) {
    if (!doc.contains(key)) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw parse_error(std::string("config field '") + key + "' has the wrong type");
    }
}

std::string resolve_out(const Options& opts, const json& doc, const char* key) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    const auto from_config = optional_string(doc, key, "");
    if (!from_config.empty()) return from_config;
    throw value_error(std::string("no output directory: pass --out or set '") + key +
                      "' in the config");
}

void write_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot write " + path);
    out << doc.dump(2) << "\n";
}

std::uint64_t hash_tensor_values(const std::vector<Tensor>& tensors, const char* tag) {
    std::uint64_t h = fnv1a64(tag);
    for (const auto& t : tensors) {
        for (double d : t.values()) {
            const auto u = std::bit_cast<std::uint64_t>(d);
            unsigned char bytes[8];
            for (int i = 0; i < 8; ++i) {
                bytes[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
            }
            h = fnv1a64(bytes, 8, h);
        }
    }
    return h;
}

/// Loads the checkpoint into a freshly built model, refusing checkpoints
/// whose recorded frozen-vocabulary hash disagrees with the config's.
void restore_model(Model& model, const std::string& checkpoint_path) {
    auto ckpt = load_checkpoint(checkpoint_path);
    const auto it = ckpt.meta.find("vocab_hash");
    if (it != ckpt.meta.end() && it->second != hex64(model.vocab_hash())) {
        throw value_error("checkpoint " + checkpoint_path +
                          " was trained with a different frozen vocabulary (vocab_seed)");
    }
    assign_from_checkpoint(ckpt, model.named_params());
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ", ";
        out += id;
    }
    return out;
}

}  // namespace

void run_synth_data(const Options& opts) {
    const auto text = read_config_text(opts.config_path);
    const auto doc = parse_doc(text);
    const auto hash = config_hash_hex(text);
    auto spec = parse_corpus_spec(text);
    if (opts.has_seed) spec.seed = opts.seed;
    const auto out = resolve_out(opts, doc, "out_dir");

    auto corpus = synthesize_corpus(spec);
    std::filesystem::create_directories(out);
    const auto manifest = write_corpus(out, corpus);

    std::cout << "corpus_hash " << hex64(corpus_hash(corpus)) << "\n";
    if (!opts.quiet) {
        std::cout << "config_hash " << hash << "\n"
                  << "manifest " << manifest << "\n"
                  << "clips " << corpus.size() << "\n";
    }
}

void run_train(const Options& opts) {
    const auto text = read_config_text(opts.config_path);
    const auto doc = parse_doc(text);
    const auto hash = config_hash_hex(text);
    auto model_cfg = parse_model_config(text);
    auto topo = parse_topology(text, model_cfg);
    auto train_cfg = parse_training_config(text);
    if (opts.has_seed) train_cfg.seed = opts.seed;
    const auto manifest = require_string(doc, "corpus_manifest");
    const auto resume = optional_string(doc, "resume_from", "");
    const auto out = resolve_out(opts, doc, "checkpoint_dir");

    auto corpus = load_corpus(manifest);
    Model model(model_cfg, topo, train_cfg.seed);
    auto result = train_model(model, train_cfg, corpus, out, resume, {{"config_hash", hash}});

    const auto& last = result.history.back();
    json summary = {{"command", "train"},
                    {"config_hash", hash},
                    {"corpus_hash", hex64(corpus_hash(corpus))},
                    {"vocab_hash", hex64(model.vocab_hash())},
                    {"epochs", train_cfg.epochs},
                    {"steps", last.step},
                    {"final_checkpoint", result.final_checkpoint},
                    {"loss_csv", result.loss_csv},
                    {"final",
                     {{"huber", last.huber},
                      {"style", last.style},
                      {"kld", last.kld},
                      {"gan_g", last.gan_g},
                      {"gan_d", last.gan_d},
                      {"total", last.total}}}};
    const auto summary_path = (std::filesystem::path(out) / "train_summary.json").string();
    write_json_file(summary_path, summary);

    if (!opts.quiet) {
        std::cout << "config_hash " << hash << "\n"
                  << "final_total " << last.total << "\n"
                  << "final_huber " << last.huber << "\n"
                  << "final_checkpoint " << result.final_checkpoint << "\n"
                  << "summary " << summary_path << "\n";
    }
}

void run_generate(const Options& opts) {
    const auto text = read_config_text(opts.config_path);
    const auto doc = parse_doc(text);
    const auto hash = config_hash_hex(text);
    auto model_cfg = parse_model_config(text);
    auto topo = parse_topology(text, model_cfg);
    const auto checkpoint = require_string(doc, "checkpoint");
    const auto manifest = require_string(doc, "corpus_manifest");
    const auto format = optional_string(doc, "format", "json");
    if (format != "json" && format != "csv") {
        throw value_error("config: unknown format '" + format + "' (expected json or csv)");
    }
    auto noise_seed = optional_number<std::uint64_t>(doc, "seed", 0);
    if (opts.has_seed) noise_seed = opts.seed;
    const auto out = resolve_out(opts, doc, "out_dir");

    auto corpus = load_corpus(manifest);
    Model model(model_cfg, topo, 0);
    restore_model(model, checkpoint);
    std::filesystem::create_directories(out);

    Rng rng(noise_seed ^ fnv1a64("generation-stream"));
    json files = json::array();
    for (const auto& clip : corpus) {
        if (clip.transcript.empty() && !opts.quiet) {
            std::cerr << "warning: clip " << clip.id
                      << " has no transcript; generating from audio alone\n";
        }
        auto noise = Tensor::randn({1, model_cfg.style_dim}, rng);
        auto fwd = model.forward(clip, noise, false);
        PoseSequence seq;
        seq.fps = clip.poses.fps;
        seq.joint_names = clip.poses.joint_names;
        seq.frames = fwd.poses.dim(0);
        seq.data = fwd.poses.values();
        const auto name = clip.id + (format == "json" ? ".pose.json" : ".pose.csv");
        const auto path = (std::filesystem::path(out) / name).string();
        if (format == "json") {
            save_pose_json(path, seq);
        } else {
            save_pose_csv(path, seq);
        }
        files.push_back(name);
    }

    json summary = {{"command", "generate"}, {"config_hash", hash},
                    {"checkpoint", checkpoint}, {"corpus_hash", hex64(corpus_hash(corpus))},
                    {"vocab_hash", hex64(model.vocab_hash())}, {"format", format},
                    {"seed", noise_seed}, {"clips", corpus.size()}, {"files", files}};
    const auto summary_path = (std::filesystem::path(out) / "generation_summary.json").string();
    write_json_file(summary_path, summary);
    if (!opts.quiet) {
        std::cout << "config_hash " << hash << "\n"
                  << "clips " << corpus.size() << "\n"
                  << "summary " << summary_path << "\n";
    }
}

void run_evaluate(const Options& opts) {
    const auto text = read_config_text(opts.config_path);
    const auto doc = parse_doc(text);
    const auto hash = config_hash_hex(text);
    const auto real_manifest = require_string(doc, "real_manifest");
    const auto gen_dir = require_string(doc, "generated_dir");
    const auto sigma = optional_number<double>(doc, "sigma", 0.1);
    const auto pairs = optional_number<std::int64_t>(doc, "diversity_pairs", 500);
    std::int64_t latent = 8, epochs = 50;
    std::uint64_t fx_seed = 1;
    double fx_lr = 1e-3;
    if (doc.contains("extractor")) {
        const auto& fx = doc.at("extractor");
        latent = optional_number<std::int64_t>(fx, "latent", latent);
        epochs = optional_number<std::int64_t>(fx, "epochs", epochs);
        fx_seed = optional_number<std::uint64_t>(fx, "seed", fx_seed);
        fx_lr = optional_number<double>(fx, "lr", fx_lr);
    }
    const auto out = resolve_out(opts, doc, "out_dir");

    auto real = load_corpus(real_manifest);
    std::vector<PoseSequence> real_poses, gen_poses;
    std::vector<std::string> missing;
    for (const auto& clip : real) {
        const auto path = (std::filesystem::path(gen_dir) / (clip.id + ".pose.json")).string();
        if (!std::filesystem::exists(path)) {
            missing.push_back(clip.id);
            continue;
        }
        real_poses.push_back(clip.poses);
        gen_poses.push_back(load_pose_json(path));
    }
    if (!missing.empty()) {
        throw value_error("generated poses missing for clips: " + join_ids(missing));
    }

    auto fx = fit_feature_extractor(real_poses, latent, epochs, fx_seed, fx_lr);
    const auto extractor_hash = hex64(hash_tensor_values(fx.params(), "feature-extractor"));
    const double fgd_value = fgd(real_poses, gen_poses, fx);
    double bc_sum = 0.0;
    for (std::size_t i = 0; i < gen_poses.size(); ++i) {
        bc_sum += beat_consistency(real[i].audio, gen_poses[i], sigma);
    }
    const double bc_value = bc_sum / static_cast<double>(gen_poses.size());
    const double div_gen = diversity(gen_poses, pairs, 0);
    const double div_real = diversity(real_poses, pairs, 0);

    std::filesystem::create_directories(out);
    json report = {{"command", "evaluate"},    {"config_hash", hash},
                   {"corpus_hash", hex64(corpus_hash(real))},
                   {"extractor_hash", extractor_hash},
                   {"clips", gen_poses.size()}, {"sigma", sigma},
                   {"fgd", fgd_value},          {"bc", bc_value},
                   {"diversity", div_gen},      {"diversity_real", div_real}};
    const auto report_path = (std::filesystem::path(out) / "report.json").string();
    write_json_file(report_path, report);

    std::cout << "fgd " << fgd_value << "\n"
              << "bc " << bc_value << "\n"
              << "diversity " << div_gen << "\n";
    if (!opts.quiet) {
        std::cout << "config_hash " << hash << "\n"
                  << "report " << report_path << "\n";
    }
}

void run_inspect(const Options& opts) {
    const auto text = read_config_text(opts.config_path);
    const auto doc = parse_doc(text);
    const auto hash = config_hash_hex(text);
    const auto what = require_string(doc, "what");
    if (what != "adjacency" && what != "attention" && what != "alignment") {
        throw value_error("unknown inspect key '" + what +
                          "'; valid keys: adjacency, attention, alignment");
    }
    auto model_cfg = parse_model_config(text);
    auto topo = parse_topology(text, model_cfg);
    const auto checkpoint = optional_string(doc, "checkpoint", "");
    auto model_seed = optional_number<std::uint64_t>(doc, "model_seed", 0);
    if (opts.has_seed) model_seed = opts.seed;

    Model model(model_cfg, topo, model_seed);
    if (!checkpoint.empty()) restore_model(model, checkpoint);

    json dump = {{"command", "inspect"},
                 {"what", what},
                 {"config_hash", hash},
                 {"checkpoint", checkpoint}};
    if (what == "adjacency") {
        auto adj = model.adjacency();
        const auto j = adj.dim(0);
        json rows = json::array();
        for (std::int64_t r = 0; r < j; ++r) {
            json row = json::array();
            for (std::int64_t c = 0; c < j; ++c) row.push_back(adj.values()[r * j + c]);
            rows.push_back(row);
        }
        dump["rows"] = rows;
    } else {
        const auto manifest = require_string(doc, "corpus_manifest");
        auto corpus = load_corpus(manifest);
        if (corpus.empty()) throw value_error("corpus manifest has no clips");
        if (what == "attention") {
            const auto clip_id = optional_string(doc, "clip", corpus.front().id);
            const auto head = optional_number<std::int64_t>(doc, "head", 0);
            const auto it = std::find_if(corpus.begin(), corpus.end(),
                                         [&](const ClipRecord& c) { return c.id == clip_id; });
            if (it == corpus.end()) {
                throw value_error("clip '" + clip_id + "' not found in " + manifest);
            }
            auto att = model.attention(*it, head);
            json rows = json::array();
            const auto cols = att.dim(1);
            for (std::int64_t r = 0; r < att.dim(0); ++r) {
                json row = json::array();
                for (std::int64_t c = 0; c < cols; ++c) row.push_back(att.values()[r * cols + c]);
                rows.push_back(row);
            }
            dump["clip"] = clip_id;
            dump["head"] = head;
            dump["rows"] = rows;
        } else {  // alignment
            json clips = json::array();
            double sum = 0.0;
            for (const auto& clip : corpus) {
                const double a = model.alignment(clip);
                clips.push_back({{"id", clip.id}, {"cosine", a}});
                sum += a;
            }
            dump["clips"] = clips;
            dump["mean_cosine"] = sum / static_cast<double>(corpus.size());
        }
    }

    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        const auto path =
            (std::filesystem::path(opts.out_dir) / ("inspect_" + what + ".json")).string();
        write_json_file(path, dump);
        if (!opts.quiet) std::cout << "dump " << path << "\n";
    } else {
        std::cout << dump.dump(2) << "\n";
    }
}

}  // namespace cogs::cli
