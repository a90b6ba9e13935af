// test_model.cpp - assembled-model tests: golden shapes at publication
// dimensions, reduced-dimension forward behavior, and parameter persistence.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cogs/model.hpp"
#include "cogs/ops.hpp"

using namespace cogs;

namespace {

Tensor find_param(std::vector<NamedTensor>& params, const std::string& name) {
    for (auto& nt : params) {
        if (nt.name == name) return nt.tensor;
    }
    ADD_FAILURE() << "no parameter named " << name;
    return Tensor();
}

ClipRecord toy_clip(std::uint64_t seed = 11, std::int64_t clips = 1) {
    auto spec = corpus_spec_for(ModelConfig::toy());
    spec.seed = seed;
    spec.clips = clips;
    return synthesize_corpus(spec)[0];
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST(ModelConfig, PublishedPresetDimensions) {
    auto cfg = ModelConfig::published();
    EXPECT_EQ(cfg.mel.n_mels, 128);
    EXPECT_EQ(cfg.mel.target_frames, 34);
    EXPECT_EQ(cfg.vocab_size, 30522);
    EXPECT_EQ(cfg.embed_dim, 768);
    EXPECT_EQ(cfg.proto_count, 1500);
    EXPECT_EQ(cfg.attn_width, 1024);
    EXPECT_EQ(cfg.heads, 8);
    EXPECT_EQ(cfg.fused_dim, 256);
    EXPECT_EQ(cfg.graph.joints, 9);
    EXPECT_EQ(cfg.graph.audio_feat, 170);
    EXPECT_EQ(cfg.graph.channels(), 173);
    EXPECT_EQ(cfg.gen.frames, 34);
    EXPECT_EQ(cfg.gen.graph_feat, 9 * 173);
    EXPECT_EQ(cfg.window_len, 3400);
    EXPECT_EQ(cfg.window_stride, 2191);
}

TEST(ModelConfig, ToyPresetDimensions) {
    auto cfg = ModelConfig::toy();
    EXPECT_EQ(cfg.graph.joints, 3);
    EXPECT_EQ(cfg.gen.frames, 8);
    EXPECT_EQ(cfg.mel.n_mels, 4);
    EXPECT_EQ(cfg.embed_dim, 6);
    EXPECT_EQ(cfg.proto_count, 5);
    EXPECT_EQ(cfg.heads, 2);
    EXPECT_EQ(cfg.attn_width % cfg.heads, 0);
    EXPECT_EQ(cfg.gen.graph_feat, 3 * 13);
}

TEST(ModelConfig, ValidateRejectsCrossModuleMismatches) {
    auto bad = ModelConfig::toy();
    bad.heads = 3;  // 8 % 3 != 0
    EXPECT_THROW(bad.validate(), value_error);

    bad = ModelConfig::toy();
    bad.proto_count = bad.vocab_size;
    EXPECT_THROW(bad.validate(), value_error);

    bad = ModelConfig::toy();
    bad.gen.fused_dim = 16;
    EXPECT_THROW(bad.validate(), shape_error);

    bad = ModelConfig::toy();
    bad.gen.graph_feat = 40;
    EXPECT_THROW(bad.validate(), shape_error);

    bad = ModelConfig::toy();
    bad.disc.joints = 5;
    EXPECT_THROW(bad.validate(), shape_error);

    bad = ModelConfig::toy();
    bad.style_dim = 2;
    EXPECT_THROW(bad.validate(), shape_error);

    bad = ModelConfig::toy();
    bad.gen.seed_frames = 0;
    EXPECT_THROW(bad.validate(), value_error);

    bad = ModelConfig::toy();
    bad.gen.seed_frames = bad.gen.frames + 1;
    EXPECT_THROW(bad.validate(), value_error);

    bad = ModelConfig::toy();
    bad.speakers = 0;
    EXPECT_THROW(bad.validate(), value_error);
}

TEST(ModelConfig, CorpusSpecMatchesPresets) {
    auto toy_spec = corpus_spec_for(ModelConfig::toy());
    EXPECT_EQ(toy_spec.frames, 8);
    EXPECT_EQ(toy_spec.joints, 3);
    EXPECT_EQ(toy_spec.beat_period, 4);
    EXPECT_EQ(toy_spec.speakers, 4);
    EXPECT_EQ(toy_spec.sample_rate, 16000);
    toy_spec.validate();

    auto full_spec = corpus_spec_for(ModelConfig::published());
    EXPECT_EQ(full_spec.frames, 34);
    EXPECT_EQ(full_spec.joints, 9);
    EXPECT_EQ(full_spec.beat_period, 12);
    full_spec.validate();
}

TEST(ModelConfig, ChainTopologyIsAPath) {
    auto topo = chain_topology(5);
    EXPECT_EQ(topo.joints(), 5);
    EXPECT_EQ(topo.parents[0], -1);
    for (std::int64_t j = 1; j < 5; ++j) EXPECT_EQ(topo.parents[j], j - 1);
    EXPECT_THROW(chain_topology(0), value_error);
}

// The one heavy test: every published per-sample shape, computed by the real
// operations at full dimensions.
TEST(ModelShapes, PublicationPresetGoldenShapes) {
    auto cfg = ModelConfig::published();
    auto spec = corpus_spec_for(cfg);
    spec.clips = 1;
    spec.seed = 7;
    auto clip = synthesize_corpus(spec)[0];
    ASSERT_EQ(static_cast<std::int64_t>(clip.audio.samples.size()), 36267);
    ASSERT_EQ(clip.poses.frames, 34);
    ASSERT_EQ(clip.poses.joints(), 9);

    Model model(cfg, SkeletonTopology::default9(), 5);
    auto params = model.named_params();

    // Audio frontend: 36267 samples -> mel 34x128 and 16 graph windows.
    auto mf = mel_spectrogram(clip.audio, cfg.mel);
    EXPECT_EQ(mf.frames, 34);
    EXPECT_EQ(mf.bands, 128);
    auto mel = Tensor::from_vector({mf.frames, mf.bands}, mf.values);

    auto aw = window_audio(clip.audio, cfg.window_len, cfg.window_stride);
    EXPECT_EQ(aw.count, 16);
    auto nodes = audio_matrix_converter(aw, 9, 170);
    EXPECT_EQ(nodes.size(), static_cast<std::size_t>(16 * 9 * 170));

    // Action stream: 34 pose frames (27 values each) -> 16 windowed rows.
    auto action_vals = pose_to_graph(clip.poses.data, clip.poses.frames, 9, aw.count);
    EXPECT_EQ(action_vals.size(), static_cast<std::size_t>(16 * 9 * 3));

    // Attention stage with the model's own weights: Q 34x1024,
    // K/V 1500x1024, reprogrammed output 34x768.
    Tensor staged_rep, staged_fused;
    {
        auto w_map = find_param(params, "proto.w_map");
        ASSERT_EQ(w_map.dim(0), 1500);
        ASSERT_EQ(w_map.dim(1), 30522);
        auto protos = matmul(w_map, model.vocab().table);
        ASSERT_EQ(protos.dim(0), 1500);
        ASSERT_EQ(protos.dim(1), 768);

        auto q = matmul(mel, find_param(params, "rep.w_q"));
        EXPECT_EQ(q.dim(0), 34);
        EXPECT_EQ(q.dim(1), 1024);
        auto k = matmul(protos, find_param(params, "rep.w_k"));
        EXPECT_EQ(k.dim(0), 1500);
        EXPECT_EQ(k.dim(1), 1024);
        auto v = matmul(protos, find_param(params, "rep.w_v"));
        EXPECT_EQ(v.dim(0), 1500);
        EXPECT_EQ(v.dim(1), 1024);

        ReprogramWeights rw;
        rw.w_q = find_param(params, "rep.w_q");
        rw.w_k = find_param(params, "rep.w_k");
        rw.w_v = find_param(params, "rep.w_v");
        rw.w_out = find_param(params, "rep.w_out");
        rw.b_out = find_param(params, "rep.b_out");
        rw.heads = cfg.heads;
        staged_rep = reprogram(mel, protos, rw);
        EXPECT_EQ(staged_rep.dim(0), 34);
        EXPECT_EQ(staged_rep.dim(1), 768);

        FuseWeights fw;
        fw.w = find_param(params, "fuse.w");
        fw.b = find_param(params, "fuse.b");
        staged_fused =
            fuse_text_audio(staged_rep, model.vocab().lookup(clip.transcript), fw, 34);
        EXPECT_EQ(staged_fused.dim(0), 34);
        EXPECT_EQ(staged_fused.dim(1), 256);
    }

    // Full pass through the assembled model reproduces the staged stages and
    // yields the encoder/generator shapes.
    Rng rng(3);
    auto noise = Tensor::randn({1, cfg.style_dim}, rng);
    auto fwd = model.forward(clip, noise, true);
    ASSERT_EQ(fwd.reprogrammed.shape(), (Shape{34, 768}));
    ASSERT_EQ(fwd.fused.shape(), (Shape{34, 256}));
    ASSERT_EQ(fwd.graph_code.shape(), (Shape{4, 9, 173}));
    ASSERT_EQ(fwd.style.shape(), (Shape{1, 8}));
    ASSERT_EQ(fwd.poses.shape(), (Shape{34, 9, 3}));

    const auto& a = staged_rep.values();
    const auto& b = fwd.reprogrammed.values();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); i += 997) EXPECT_EQ(a[i], b[i]);
    const auto& fa = staged_fused.values();
    const auto& fb = fwd.fused.values();
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t i = 0; i < fa.size(); i += 97) EXPECT_EQ(fa[i], fb[i]);
}

TEST(ModelForward, ToyShapesAndUnitPoseVectors) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    Model model(cfg, chain_topology(3), 21);
    Rng rng(4);
    auto noise = Tensor::randn({1, cfg.style_dim}, rng);

    auto fwd = model.forward(clip, noise, false);
    ASSERT_EQ(fwd.poses.shape(), (Shape{8, 3, 3}));
    ASSERT_EQ(fwd.fused.shape(), (Shape{8, 8}));
    ASSERT_EQ(fwd.graph_code.shape(), (Shape{2, 3, 13}));
    ASSERT_EQ(fwd.reprogrammed.shape(), (Shape{8, 6}));
    ASSERT_EQ(fwd.style.shape(), (Shape{1, 4}));

    const auto& p = fwd.poses.values();
    for (std::int64_t f = 0; f < 8; ++f) {
        for (std::int64_t j = 0; j < 3; ++j) {
            const double* v = &p[static_cast<std::size_t>((f * 3 + j) * 3)];
            const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            EXPECT_NEAR(norm, 1.0, 1e-9);
        }
    }
}

TEST(ModelForward, DeterministicAcrossIdenticalConstruction) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    Model a(cfg, chain_topology(3), 21);
    Model b(cfg, chain_topology(3), 21);
    Rng ra(4), rb(4);
    auto fa = a.forward(clip, Tensor::randn({1, 4}, ra), true);
    auto fb = b.forward(clip, Tensor::randn({1, 4}, rb), true);
    ASSERT_EQ(fa.poses.numel(), fb.poses.numel());
    for (std::size_t i = 0; i < fa.poses.values().size(); ++i) {
        EXPECT_EQ(fa.poses.values()[i], fb.poses.values()[i]);
    }
}

TEST(ModelForward, SeedChangesWeights) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    Model a(cfg, chain_topology(3), 21);
    Model b(cfg, chain_topology(3), 22);
    Rng ra(4), rb(4);
    auto fa = a.forward(clip, Tensor::randn({1, 4}, ra), true);
    auto fb = b.forward(clip, Tensor::randn({1, 4}, rb), true);
    double diff = 0.0;
    for (std::size_t i = 0; i < fa.poses.values().size(); ++i) {
        diff += std::abs(fa.poses.values()[i] - fb.poses.values()[i]);
    }
    EXPECT_GT(diff, 1e-6);
}

TEST(ModelForward, TeacherForcingChangesActionStream) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    Model model(cfg, chain_topology(3), 21);
    Rng ra(4), rb(4);
    auto teacher = model.forward(clip, Tensor::randn({1, 4}, ra), true);
    auto free_run = model.forward(clip, Tensor::randn({1, 4}, rb), false);
    double diff = 0.0;
    for (std::size_t i = 0; i < teacher.poses.values().size(); ++i) {
        diff += std::abs(teacher.poses.values()[i] - free_run.poses.values()[i]);
    }
    EXPECT_GT(diff, 1e-9);
}

TEST(ModelForward, AudioOnlyFallbackWorks) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    clip.transcript.clear();
    Model model(cfg, chain_topology(3), 21);
    Rng rng(4);
    auto fwd = model.forward(clip, Tensor::randn({1, 4}, rng), false);
    EXPECT_EQ(fwd.fused.shape(), (Shape{8, 8}));
    EXPECT_EQ(fwd.poses.shape(), (Shape{8, 3, 3}));
    EXPECT_EQ(model.alignment(clip), 0.0);
}

TEST(ModelForward, RejectsJointMismatch) {
    auto cfg = ModelConfig::toy();
    auto spec = corpus_spec_for(cfg);
    spec.clips = 1;
    spec.joints = 4;  // model expects 3
    auto clip = synthesize_corpus(spec)[0];
    Model model(cfg, chain_topology(3), 21);
    Rng rng(4);
    auto noise = Tensor::randn({1, 4}, rng);
    EXPECT_THROW(model.forward(clip, noise, false), shape_error);
}

TEST(ModelForward, RejectsUnknownSpeaker) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    clip.speaker = 99;  // style table has 4 rows
    Model model(cfg, chain_topology(3), 21);
    Rng rng(4);
    auto noise = Tensor::randn({1, 4}, rng);
    EXPECT_THROW(model.forward(clip, noise, false), error);
}

TEST(ModelForward, DiscriminatorScoresInOpenUnitInterval) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    Model model(cfg, chain_topology(3), 21);
    Rng rng(4);
    auto fwd = model.forward(clip, Tensor::randn({1, 4}, rng), false);
    const double s = model.discriminate(fwd.poses).values()[0];
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
}

TEST(ModelInspection, AdjacencyRowsSumToOne) {
    Model model(ModelConfig::toy(), chain_topology(3), 21);
    auto adj = model.adjacency();
    ASSERT_EQ(adj.shape(), (Shape{3, 3}));
    for (std::int64_t r = 0; r < 3; ++r) {
        double sum = 0.0;
        for (std::int64_t c = 0; c < 3; ++c) sum += adj.values()[r * 3 + c];
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(ModelInspection, AttentionRowsSumToOne) {
    Model model(ModelConfig::toy(), chain_topology(3), 21);
    auto clip = toy_clip();
    auto att = model.attention(clip, 0);
    ASSERT_EQ(att.shape(), (Shape{8, 5}));
    for (std::int64_t r = 0; r < 8; ++r) {
        double sum = 0.0;
        for (std::int64_t c = 0; c < 5; ++c) sum += att.values()[r * 5 + c];
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    EXPECT_THROW(model.attention(clip, 99), error);
}

TEST(ModelInspection, AlignmentIsAMeanCosine) {
    Model model(ModelConfig::toy(), chain_topology(3), 21);
    auto clip = toy_clip();
    ASSERT_FALSE(clip.transcript.empty());
    const double a = model.alignment(clip);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_GE(a, -1.0 - 1e-12);
    EXPECT_LE(a, 1.0 + 1e-12);
    EXPECT_EQ(a, model.alignment(clip));  // deterministic
}

TEST(ModelParams, NamesAreUniqueAndCoverBothSides) {
    Model model(ModelConfig::toy(), chain_topology(3), 21);
    auto params = model.named_params();
    std::map<std::string, int> seen;
    bool has_gen = false, has_disc = false, has_style = false;
    for (const auto& nt : params) {
        ++seen[nt.name];
        ASSERT_TRUE(nt.tensor.defined());
        if (nt.name.rfind("gen.", 0) == 0) has_gen = true;
        if (nt.name.rfind("disc.", 0) == 0) has_disc = true;
        if (nt.name.rfind("style.", 0) == 0) has_style = true;
    }
    for (const auto& [name, count] : seen) EXPECT_EQ(count, 1) << name;
    EXPECT_TRUE(has_gen);
    EXPECT_TRUE(has_disc);
    EXPECT_TRUE(has_style);
    EXPECT_EQ(seen.count("proto.w_map"), 1u);
    EXPECT_EQ(seen.count("rep.w_q"), 1u);
    EXPECT_EQ(seen.count("fuse.w"), 1u);
    EXPECT_EQ(seen.count("style.mu"), 1u);

    const auto gen_side = model.generator_params();
    const auto disc_side = model.discriminator_params();
    EXPECT_EQ(params.size(), gen_side.size() + disc_side.size());
    for (const auto& g : gen_side) {
        for (const auto& d : disc_side) EXPECT_NE(g.node(), d.node());
    }
}

TEST(ModelParams, CheckpointRoundTripRestoresForward) {
    auto cfg = ModelConfig::toy();
    auto clip = toy_clip();
    Model model(cfg, chain_topology(3), 21);
    Rng rng(4);
    auto noise = Tensor::randn({1, 4}, rng);
    auto before = model.forward(clip, noise, true).poses.values();

    const auto path = temp_path("model_roundtrip_ckpt.json");
    save_checkpoint(path, model.named_params(), {{"kind", "model"}});

    for (auto& nt : model.named_params()) {
        for (auto& v : nt.tensor.values_mut()) v += 0.25;
    }
    auto perturbed = model.forward(clip, noise, true).poses.values();
    double moved = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) moved += std::abs(before[i] - perturbed[i]);
    ASSERT_GT(moved, 1e-9);

    assign_from_checkpoint(load_checkpoint(path), model.named_params());
    auto after = model.forward(clip, noise, true).poses.values();
    ASSERT_EQ(before.size(), after.size());
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i], after[i]);
    std::remove(path.c_str());
    std::remove((path.substr(0, path.size() - 5) + ".bin").c_str());
}

TEST(ModelParams, VocabHashTracksVocabSeed) {
    auto cfg = ModelConfig::toy();
    Model a(cfg, chain_topology(3), 21);
    Model b(cfg, chain_topology(3), 99);  // different weight seed, same vocab
    EXPECT_EQ(a.vocab_hash(), b.vocab_hash());

    auto cfg2 = cfg;
    cfg2.vocab_seed = 123;
    Model c(cfg2, chain_topology(3), 21);
    EXPECT_NE(a.vocab_hash(), c.vocab_hash());
}

TEST(ModelParams, FrozenVocabularyExcludedFromParams) {
    Model model(ModelConfig::toy(), chain_topology(3), 21);
    EXPECT_FALSE(model.vocab().table.node()->requires_grad);
    for (const auto& nt : model.named_params()) {
        EXPECT_NE(nt.tensor.node(), model.vocab().table.node());
        EXPECT_TRUE(nt.tensor.node()->requires_grad) << nt.name;
    }
}
