// model.cpp
#include "cogs/model.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "cogs/ops.hpp"

namespace cogs {

void ModelConfig::validate() const {
    if (mel.target_frames < 1) throw value_error("model config: mel target_frames must be set");
    if (mel.n_mels < 1) throw value_error("model config: mel band count must be positive");
    if (vocab_size < 2) throw value_error("model config: vocabulary too small");
    if (proto_count < 1 || proto_count >= vocab_size) {
        throw value_error("model config: prototype count must lie in [1, V)");
    }
    if (attn_width < 1 || attn_width % heads != 0) {
        throw value_error("model config: attention width must divide into heads");
    }
    if (window_len < graph.joints * graph.audio_feat) {
        throw value_error("model config: audio window shorter than per-window node features");
    }
    if (gen.fused_dim != fused_dim) {
        throw shape_error("model config: generator fused_dim disagrees with fusion head");
    }
    if (gen.graph_feat != graph.joints * graph.channels()) {
        throw shape_error("model config: generator graph_feat disagrees with encoder output");
    }
    if (gen.joints != graph.joints || disc.joints != graph.joints) {
        throw shape_error("model config: joint counts disagree across modules");
    }
    if (gen.style_dim != style_dim) {
        throw shape_error("model config: style dims disagree");
    }
    if (speakers < 1) throw value_error("model config: need >= 1 speaker");
    if (gen.seed_frames < 1 || gen.seed_frames > gen.frames) {
        throw value_error("model config: seed frames must lie in [1, frames]");
    }
}

ModelConfig ModelConfig::published() {
    ModelConfig cfg;
    cfg.mel.target_frames = 34;
    cfg.graph = GraphEncoderConfig{};  // J=9, F_a=170, blocks {1,2},{2,2}
    cfg.gen.graph_feat = cfg.graph.joints * cfg.graph.channels();  // 9 * 173
    cfg.validate();
    return cfg;
}

ModelConfig ModelConfig::toy() {
    ModelConfig cfg;
    cfg.mel.n_mels = 4;
    cfg.mel.target_frames = 8;
    cfg.window_len = 1600;
    cfg.window_stride = 990;
    cfg.vocab_size = 50;
    cfg.embed_dim = 6;
    cfg.proto_count = 5;
    cfg.attn_width = 8;
    cfg.heads = 2;
    cfg.fused_dim = 8;
    cfg.graph.joints = 3;
    cfg.graph.audio_feat = 10;
    cfg.graph.node_embed_dim = 4;
    cfg.gen.frames = 8;
    cfg.gen.joints = 3;
    cfg.gen.seed_frames = 2;
    cfg.gen.fused_dim = 8;
    cfg.gen.graph_feat = cfg.graph.joints * cfg.graph.channels();  // 3 * 13
    cfg.gen.style_dim = 4;
    cfg.gen.hidden = 8;
    cfg.gen.layers = 1;
    cfg.disc.joints = 3;
    cfg.disc.hidden = 8;
    cfg.style_dim = 4;
    cfg.validate();
    return cfg;
}

SkeletonTopology chain_topology(std::int64_t joints) {
    if (joints < 1) throw value_error("chain topology: need >= 1 joint");
    SkeletonTopology topo;
    for (std::int64_t j = 0; j < joints; ++j) {
        topo.names.push_back("j" + std::to_string(j));
        topo.parents.push_back(j - 1);
    }
    topo.validate();
    return topo;
}

SyntheticCorpusSpec corpus_spec_for(const ModelConfig& cfg) {
    SyntheticCorpusSpec spec;
    spec.frames = cfg.gen.frames;
    spec.joints = cfg.gen.joints;
    spec.speakers = cfg.speakers;
    spec.sample_rate = cfg.mel.sample_rate;
    spec.beat_period = cfg.gen.frames >= 24 ? 12 : 4;
    return spec;
}

Model::Model(const ModelConfig& cfg, const SkeletonTopology& topo, std::uint64_t seed)
    : cfg_(cfg),
      vocab_(make_hashed_vocab(cfg.vocab_size, cfg.embed_dim, cfg.vocab_seed)),
      proto_([&] {
          cfg_.validate();
          if (topo.joints() != cfg.graph.joints) {
              throw shape_error("model: skeleton has " + std::to_string(topo.joints()) +
                                " joints, config expects " + std::to_string(cfg.graph.joints));
          }
          Rng rng(seed);
          return PrototypeTable::init(cfg.proto_count, cfg.vocab_size, rng);
      }()),
      rep_([&] {
          Rng rng(seed + 1);
          return ReprogramWeights::init(cfg.mel.n_mels, cfg.embed_dim, cfg.attn_width, cfg.heads,
                                        rng);
      }()),
      fuse_([&] {
          Rng rng(seed + 2);
          return FuseWeights::init(cfg.embed_dim, cfg.fused_dim, rng);
      }()),
      graph_([&] {
          Rng rng(seed + 3);
          return GraphEncoder(cfg.graph, topo, rng);
      }()),
      gen_([&] {
          Rng rng(seed + 4);
          return Generator(cfg.gen, rng);
      }()),
      disc_([&] {
          Rng rng(seed + 5);
          return Discriminator(cfg.disc, rng);
      }()),
      style_([&] {
          Rng rng(seed + 6);
          return SpeakerStyleTable::init(cfg.speakers, cfg.style_dim, rng);
      }()) {}

Tensor Model::mel_tensor(const ClipRecord& clip) const {
    auto mf = mel_spectrogram(clip.audio, cfg_.mel);
    return Tensor::from_vector({mf.frames, mf.bands}, mf.values);
}

Tensor Model::audio_nodes(const ClipRecord& clip) const {
    auto aw = window_audio(clip.audio, cfg_.window_len, cfg_.window_stride);
    auto nodes = audio_matrix_converter(aw, cfg_.graph.joints, cfg_.graph.audio_feat);
    return Tensor::from_vector({aw.count, cfg_.graph.joints, cfg_.graph.audio_feat}, nodes);
}

Tensor Model::action_nodes(const ClipRecord& clip, bool teacher_forcing) const {
    const auto j = cfg_.graph.joints;
    const auto t_g = window_audio(clip.audio, cfg_.window_len, cfg_.window_stride).count;
    if (teacher_forcing) {
        auto vals = pose_to_graph(clip.poses.data, clip.poses.frames, j, t_g);
        return Tensor::from_vector({t_g, j, 3}, vals);
    }
    const auto seed_frames = cfg_.gen.seed_frames;
    std::vector<double> head(clip.poses.data.begin(),
                             clip.poses.data.begin() + seed_frames * j * 3);
    auto rows = Tensor::from_vector({seed_frames, j * 3}, head);
    return reshape(linear_resample_rows(rows, t_g), {t_g, j, 3});
}

Tensor Model::seed_tensor(const ClipRecord& clip) const {
    const auto j = cfg_.gen.joints;
    const auto seed_frames = cfg_.gen.seed_frames;
    if (clip.poses.frames < seed_frames) {
        throw value_error("clip " + clip.id + ": fewer frames than the seed window");
    }
    std::vector<double> head(clip.poses.data.begin(),
                             clip.poses.data.begin() + seed_frames * j * 3);
    return Tensor::from_vector({seed_frames, j, 3}, head);
}

Tensor Model::text_rows(const ClipRecord& clip) const {
    if (clip.transcript.empty()) return Tensor();
    return vocab_.lookup(clip.transcript);
}

Model::Forward Model::forward(const ClipRecord& clip, const Tensor& style_noise,
                              bool teacher_forcing) const {
    clip.validate();
    if (clip.poses.joints() != cfg_.gen.joints) {
        throw shape_error("clip " + clip.id + " has " + std::to_string(clip.poses.joints()) +
                          " joints, model expects " + std::to_string(cfg_.gen.joints));
    }
    Forward out;
    out.reprogrammed = reprogram(mel_tensor(clip), proto_.prototypes(vocab_), rep_);
    out.fused = fuse_text_audio(out.reprogrammed, text_rows(clip), fuse_, cfg_.gen.frames);
    out.graph_code = graph_.encode(audio_nodes(clip), action_nodes(clip, teacher_forcing));
    out.style = style_.sample(clip.speaker, style_noise);
    out.poses = gen_.generate(out.fused, out.graph_code, out.style, seed_tensor(clip));
    return out;
}

double Model::alignment(const ClipRecord& clip) const {
    if (clip.transcript.empty()) return 0.0;
    auto rep = reprogram(mel_tensor(clip), proto_.prototypes(vocab_), rep_);
    auto text = text_rows(clip);
    const auto& rv = rep.values();
    const auto& tv = text.values();
    const auto p = rep.dim(0), d = rep.dim(1), n = text.dim(0);
    double total = 0.0;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < p; ++i) {
        double ri = 0.0;
        for (std::int64_t k = 0; k < d; ++k) ri += rv[i * d + k] * rv[i * d + k];
        for (std::int64_t jn = 0; jn < n; ++jn) {
            double tj = 0.0, dot = 0.0;
            for (std::int64_t k = 0; k < d; ++k) {
                tj += tv[jn * d + k] * tv[jn * d + k];
                dot += rv[i * d + k] * tv[jn * d + k];
            }
            const double denom = std::sqrt(ri) * std::sqrt(tj);
            total += denom > 0.0 ? dot / denom : 0.0;
            ++count;
        }
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

Tensor Model::attention(const ClipRecord& clip, std::int64_t head) const {
    return reprogram_attention(mel_tensor(clip), proto_.prototypes(vocab_), rep_, head);
}

std::vector<Tensor> Model::generator_params() {
    std::vector<Tensor> out = {proto_.w_map, rep_.w_q,  rep_.w_k, rep_.w_v,
                               rep_.w_out,   rep_.b_out, fuse_.w,  fuse_.b};
    for (auto& t : graph_.params()) out.push_back(t);
    for (auto& t : gen_.params()) out.push_back(t);
    out.push_back(style_.mu);
    out.push_back(style_.logvar);
    return out;
}

std::vector<Tensor> Model::discriminator_params() { return disc_.params(); }

std::vector<NamedTensor> Model::named_params() {
    std::vector<NamedTensor> out = {{"proto.w_map", proto_.w_map}, {"rep.w_q", rep_.w_q},
                                    {"rep.w_k", rep_.w_k},         {"rep.w_v", rep_.w_v},
                                    {"rep.w_out", rep_.w_out},     {"rep.b_out", rep_.b_out},
                                    {"fuse.w", fuse_.w},           {"fuse.b", fuse_.b}};
    auto graph_params = graph_.params();
    for (std::size_t i = 0; i < graph_params.size(); ++i) {
        out.push_back({"graph.p" + std::to_string(i), graph_params[i]});
    }
    auto gen_params = gen_.params();
    for (std::size_t i = 0; i < gen_params.size(); ++i) {
        out.push_back({"gen.p" + std::to_string(i), gen_params[i]});
    }
    out.push_back({"style.mu", style_.mu});
    out.push_back({"style.logvar", style_.logvar});
    auto disc_params = disc_.params();
    for (std::size_t i = 0; i < disc_params.size(); ++i) {
        out.push_back({"disc.p" + std::to_string(i), disc_params[i]});
    }
    return out;
}

std::uint64_t Model::vocab_hash() const {
    std::uint64_t h = fnv1a64("vocab");
    for (double d : vocab_.table.values()) {
        const auto u = std::bit_cast<std::uint64_t>(d);
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
        h = fnv1a64(bytes, 8, h);
    }
    return h;
}

}  // namespace cogs
