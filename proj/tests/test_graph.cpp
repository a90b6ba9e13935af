// Skeleton topology, diffusion graph convolution, gated temporal blocks, and
// the full graph encoder.
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cogs/common.hpp"
#include "cogs/graph_encoder.hpp"
#include "cogs/grad_check.hpp"
#include "cogs/ops.hpp"
#include "cogs/rng.hpp"
#include "cogs/skeleton.hpp"

namespace fs = std::filesystem;
using namespace cogs;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "cogs_graph_tests";
    fs::create_directories(dir);
    return dir;
}

// Plain double-loop oracle for the diffusion convolution:
// Z = sum_j Pf^j X Wf_j + Pb^j X Wb_j + Aa^j X Wa_j (+ bias).
std::vector<double> diffusion_oracle(const std::vector<double>& x, std::int64_t J, std::int64_t C,
                                     const std::vector<double>& pf, const std::vector<double>& pb,
                                     const std::vector<double>& pa,
                                     const std::vector<std::vector<double>>& weights,
                                     const std::vector<double>& bias, std::int64_t j_diff) {
    auto matmul_plain = [](const std::vector<double>& a, std::int64_t n, std::int64_t k,
                           const std::vector<double>& b, std::int64_t m) {
        std::vector<double> c(static_cast<std::size_t>(n * m), 0.0);
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t kk = 0; kk < k; ++kk)
                for (std::int64_t j = 0; j < m; ++j)
                    c[static_cast<std::size_t>(i * m + j)] +=
                        a[static_cast<std::size_t>(i * k + kk)] *
                        b[static_cast<std::size_t>(kk * m + j)];
        return c;
    };
    std::vector<double> eye(static_cast<std::size_t>(J * J), 0.0);
    for (std::int64_t i = 0; i < J; ++i) eye[static_cast<std::size_t>(i * J + i)] = 1.0;

    std::vector<double> z(static_cast<std::size_t>(J * C), 0.0);
    std::vector<double> powf = eye, powb = eye, powa = eye;
    for (std::int64_t j = 0; j <= j_diff; ++j) {
        if (j > 0) {
            powf = matmul_plain(powf, J, J, pf, J);
            powb = matmul_plain(powb, J, J, pb, J);
            powa = matmul_plain(powa, J, J, pa, J);
        }
        auto tf = matmul_plain(matmul_plain(powf, J, J, x, C), J, C,
                               weights[static_cast<std::size_t>(3 * j)], C);
        auto tb = matmul_plain(matmul_plain(powb, J, J, x, C), J, C,
                               weights[static_cast<std::size_t>(3 * j + 1)], C);
        auto ta = matmul_plain(matmul_plain(powa, J, J, x, C), J, C,
                               weights[static_cast<std::size_t>(3 * j + 2)], C);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += tf[i] + tb[i] + ta[i];
    }
    if (!bias.empty()) {
        for (std::int64_t r = 0; r < J; ++r)
            for (std::int64_t c = 0; c < C; ++c)
                z[static_cast<std::size_t>(r * C + c)] += bias[static_cast<std::size_t>(c)];
    }
    return z;
}

}  // namespace

TEST(Skeleton, BuiltinNineJointChainIsValid) {
    auto topo = SkeletonTopology::default9();
    EXPECT_EQ(topo.joints(), 9);
    EXPECT_NO_THROW(topo.validate());
    EXPECT_EQ(topo.parents[0], -1);
}

TEST(Skeleton, BuiltinHandsChainHasFortyTwoJoints) {
    auto topo = SkeletonTopology::default42();
    EXPECT_EQ(topo.joints(), 42);
    EXPECT_NO_THROW(topo.validate());
}

TEST(Skeleton, StaticAdjacencyIsSymmetricWithSelfLoops) {
    auto topo = SkeletonTopology::default9();
    auto a = topo.static_adjacency();
    ASSERT_EQ(a.shape(), (std::vector<std::int64_t>{9, 9}));
    for (std::int64_t i = 0; i < 9; ++i) {
        EXPECT_EQ(a.values()[static_cast<std::size_t>(i * 9 + i)], 1.0);
        for (std::int64_t j = 0; j < 9; ++j) {
            EXPECT_EQ(a.values()[static_cast<std::size_t>(i * 9 + j)],
                      a.values()[static_cast<std::size_t>(j * 9 + i)]);
        }
    }
    // Every child-parent pair is an edge.
    for (std::int64_t i = 1; i < 9; ++i) {
        EXPECT_EQ(a.values()[static_cast<std::size_t>(i * 9 + topo.parents[static_cast<std::size_t>(i)])],
                  1.0);
    }
}

TEST(Skeleton, TwoRootsRejected) {
    SkeletonTopology topo;
    topo.names = {"a", "b", "c"};
    topo.parents = {-1, -1, 1};
    EXPECT_THROW(topo.validate(), graph_error);
}

TEST(Skeleton, CycleRejected) {
    SkeletonTopology topo;
    topo.names = {"a", "b", "c"};
    topo.parents = {-1, 2, 1};
    EXPECT_THROW(topo.validate(), graph_error);
}

TEST(Skeleton, JsonRoundTrip) {
    auto topo = SkeletonTopology::default9();
    auto path = (temp_dir() / "skel.json").string();
    save_skeleton(path, topo);
    auto got = load_skeleton(path);
    EXPECT_EQ(got.names, topo.names);
    EXPECT_EQ(got.parents, topo.parents);
}

TEST(Skeleton, MalformedJsonIsParseError) {
    auto path = temp_dir() / "broken.json";
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(load_skeleton(path.string()), parse_error);
    std::ofstream(path) << "{\"bones\": []}";
    EXPECT_THROW(load_skeleton(path.string()), parse_error);
}

TEST(Transitions, LineGraphMatchesHandComputation) {
    // 0-1-2 chain with self-loops.
    auto a = Tensor::from_vector({3, 3}, {1, 1, 0, 1, 1, 1, 0, 1, 1}, false);
    auto tm = transition_matrices(a);
    const std::vector<double> want{0.5, 0.5, 0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0, 0.5, 0.5};
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_NEAR(tm.forward.values()[i], want[i], 1e-12);
        EXPECT_NEAR(tm.backward.values()[i], want[i], 1e-12);  // symmetric adjacency
    }
}

TEST(Transitions, RowsAreStochastic) {
    auto topo = SkeletonTopology::default42();
    auto tm = transition_matrices(topo.static_adjacency());
    for (std::int64_t r = 0; r < 42; ++r) {
        double fsum = 0.0, bsum = 0.0;
        for (std::int64_t c = 0; c < 42; ++c) {
            fsum += tm.forward.values()[static_cast<std::size_t>(r * 42 + c)];
            bsum += tm.backward.values()[static_cast<std::size_t>(r * 42 + c)];
        }
        EXPECT_NEAR(fsum, 1.0, 1e-12);
        EXPECT_NEAR(bsum, 1.0, 1e-12);
    }
}

TEST(Transitions, IsolatedNodeRejected) {
    auto a = Tensor::from_vector({2, 2}, {1, 0, 0, 0}, false);
    EXPECT_THROW(transition_matrices(a), value_error);
}

TEST(PoseToGraph, StrideSamplesFirstFrameOfEachBlock) {
    const std::int64_t T = 34, J = 2, T_g = 16;
    std::vector<double> poses(static_cast<std::size_t>(T * J * 3));
    for (std::size_t i = 0; i < poses.size(); ++i) poses[i] = static_cast<double>(i);
    auto out = pose_to_graph(poses, T, J, T_g);
    ASSERT_EQ(out.size(), static_cast<std::size_t>(T_g * J * 3));
    for (std::int64_t i = 0; i < T_g; ++i) {
        // stride = floor(34/16) = 2, so step i copies frame 2i.
        EXPECT_EQ(out[static_cast<std::size_t>(i * J * 3)],
                  poses[static_cast<std::size_t>(i * 2 * J * 3)]);
    }
}

TEST(PoseToGraph, TooFewFramesRejected) {
    std::vector<double> poses(static_cast<std::size_t>(4 * 2 * 3), 0.0);
    EXPECT_THROW(pose_to_graph(poses, 4, 2, 5), value_error);
    EXPECT_THROW(pose_to_graph(poses, 5, 2, 5), shape_error);  // buffer/shape mismatch
}

TEST(AdaptiveAdjacency, ZeroEmbeddingsGiveUniformRows) {
    auto e1 = Tensor::zeros({4, 3}, false);
    auto e2 = Tensor::zeros({4, 3}, false);
    auto a = adaptive_adjacency(e1, e2);
    for (double v : a.values()) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(AdaptiveAdjacency, HandComputedTwoNodeCase) {
    // E1 E2^T = [[ln 2, 0], [0, 0]] -> rows [2/3, 1/3] and [1/2, 1/2].
    auto e1 = Tensor::from_vector({2, 1}, {std::log(2.0), 0.0}, false);
    auto e2 = Tensor::from_vector({2, 1}, {1.0, 0.0}, false);
    auto a = adaptive_adjacency(e1, e2);
    EXPECT_NEAR(a.values()[0], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(a.values()[1], 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(a.values()[2], 0.5, 1e-12);
    EXPECT_NEAR(a.values()[3], 0.5, 1e-12);
}

TEST(AdaptiveAdjacency, RowsAreStochasticForRandomEmbeddings) {
    Rng rng(40);
    for (int trial = 0; trial < 50; ++trial) {
        auto e1 = Tensor::randn({6, 4}, rng, 1.5, false);
        auto e2 = Tensor::randn({6, 4}, rng, 1.5, false);
        auto a = adaptive_adjacency(e1, e2);
        for (std::int64_t r = 0; r < 6; ++r) {
            double sum = 0.0;
            for (std::int64_t c = 0; c < 6; ++c) {
                const double v = a.values()[static_cast<std::size_t>(r * 6 + c)];
                EXPECT_GE(v, 0.0);
                sum += v;
            }
            EXPECT_NEAR(sum, 1.0, 1e-9);
        }
    }
}

TEST(DiffusionConv, OrderZeroIdentityWeightsTripleTheInput) {
    const std::int64_t J = 3, C = 2;
    auto topo_a = Tensor::from_vector({3, 3}, {1, 1, 0, 1, 1, 1, 0, 1, 1}, false);
    auto tm = transition_matrices(topo_a);
    auto a_adapt = adaptive_adjacency(Tensor::zeros({3, 2}, false), Tensor::zeros({3, 2}, false));
    Rng rng(41);
    auto x = Tensor::randn({J, C}, rng, 1.0, false);
    std::vector<Tensor> weights{Tensor::identity(C), Tensor::identity(C), Tensor::identity(C)};

    auto z = diffusion_graph_conv(x, tm, a_adapt, weights, Tensor{}, 0);
    for (std::size_t i = 0; i < x.values().size(); ++i) {
        EXPECT_NEAR(z.values()[i], 3.0 * x.values()[i], 1e-12);
    }
}

TEST(DiffusionConv, MatchesBruteForceOracle) {
    const std::int64_t J = 4, C = 3, j_diff = 2;
    SkeletonTopology topo;
    topo.names = {"a", "b", "c", "d"};
    topo.parents = {-1, 0, 1, 1};
    auto tm = transition_matrices(topo.static_adjacency());
    Rng rng(42);
    auto e1 = Tensor::randn({J, 2}, rng, 1.0, false);
    auto e2 = Tensor::randn({J, 2}, rng, 1.0, false);
    auto a_adapt = adaptive_adjacency(e1, e2);
    auto x = Tensor::randn({J, C}, rng, 1.0, false);
    std::vector<Tensor> weights;
    std::vector<std::vector<double>> weight_vals;
    for (int i = 0; i < 3 * (j_diff + 1); ++i) {
        auto w = Tensor::randn({C, C}, rng, 0.7, false);
        weights.push_back(w);
        weight_vals.push_back(w.values());
    }
    auto bias = Tensor::randn({C}, rng, 0.5, false);

    auto z = diffusion_graph_conv(x, tm, a_adapt, weights, bias, j_diff);
    auto want = diffusion_oracle(x.values(), J, C, tm.forward.values(), tm.backward.values(),
                                 a_adapt.values(), weight_vals, bias.values(), j_diff);
    ASSERT_EQ(z.values().size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_NEAR(z.values()[i], want[i], 1e-9) << "entry " << i;
    }
}

TEST(DiffusionConv, LinearInTheInput) {
    const std::int64_t J = 3, C = 2;
    auto tm = transition_matrices(Tensor::from_vector({3, 3}, {1, 1, 0, 1, 1, 1, 0, 1, 1}, false));
    Rng rng(43);
    auto a_adapt = adaptive_adjacency(Tensor::randn({3, 2}, rng, 1.0, false),
                                      Tensor::randn({3, 2}, rng, 1.0, false));
    std::vector<Tensor> weights;
    for (int i = 0; i < 3; ++i) weights.push_back(Tensor::randn({C, C}, rng, 1.0, false));
    auto x = Tensor::randn({J, C}, rng, 1.0, false);
    auto y = Tensor::randn({J, C}, rng, 1.0, false);

    auto zx = diffusion_graph_conv(x, tm, a_adapt, weights, Tensor{}, 0);
    auto zy = diffusion_graph_conv(y, tm, a_adapt, weights, Tensor{}, 0);
    auto zsum = diffusion_graph_conv(add(x, y), tm, a_adapt, weights, Tensor{}, 0);
    for (std::size_t i = 0; i < zsum.values().size(); ++i) {
        EXPECT_NEAR(zsum.values()[i], zx.values()[i] + zy.values()[i], 1e-9);
    }
}

TEST(DiffusionConv, WrongWeightCountRejected) {
    auto tm = transition_matrices(Tensor::from_vector({2, 2}, {1, 1, 1, 1}, false));
    auto a_adapt = adaptive_adjacency(Tensor::zeros({2, 1}, false), Tensor::zeros({2, 1}, false));
    auto x = Tensor::zeros({2, 2}, false);
    std::vector<Tensor> weights{Tensor::identity(2), Tensor::identity(2)};
    EXPECT_THROW(diffusion_graph_conv(x, tm, a_adapt, weights, Tensor{}, 0), shape_error);
}

TEST(TcnBlock, KernelOneMatchesPointwiseGatedProduct) {
    const std::int64_t T = 4, J = 2, C = 2;
    Rng rng(44);
    auto x = Tensor::randn({T, J, C}, rng, 1.0, false);
    TcnWeights w;
    w.w_filter = Tensor::randn({1, C, C}, rng, 1.0, false);
    w.b_filter = Tensor::randn({C}, rng, 1.0, false);
    w.w_gate = Tensor::randn({1, C, C}, rng, 1.0, false);
    w.b_gate = Tensor::randn({C}, rng, 1.0, false);

    auto out = tcn_block(x, w, 1);
    ASSERT_EQ(out.shape(), (std::vector<std::int64_t>{T, J, C}));
    for (std::int64_t t = 0; t < T; ++t) {
        for (std::int64_t j = 0; j < J; ++j) {
            for (std::int64_t c = 0; c < C; ++c) {
                double f = w.b_filter.values()[static_cast<std::size_t>(c)];
                double g = w.b_gate.values()[static_cast<std::size_t>(c)];
                for (std::int64_t k = 0; k < C; ++k) {
                    const double xv = x.values()[static_cast<std::size_t>((t * J + j) * C + k)];
                    f += xv * w.w_filter.values()[static_cast<std::size_t>(k * C + c)];
                    g += xv * w.w_gate.values()[static_cast<std::size_t>(k * C + c)];
                }
                const double want = std::tanh(f) * (1.0 / (1.0 + std::exp(-g)));
                EXPECT_NEAR(out.values()[static_cast<std::size_t>((t * J + j) * C + c)], want,
                            1e-12);
            }
        }
    }
}

TEST(TcnBlock, CausalAndSharedAcrossJoints) {
    const std::int64_t T = 8, J = 3, C = 2;
    Rng rng(45);
    TcnWeights w;
    w.w_filter = Tensor::randn({2, C, C}, rng, 1.0, false);
    w.b_filter = Tensor::zeros({C}, false);
    w.w_gate = Tensor::randn({2, C, C}, rng, 1.0, false);
    w.b_gate = Tensor::zeros({C}, false);

    // Same signal fed to every joint must give identical per-joint outputs.
    auto xj = Tensor::randn({T, 1, C}, rng, 1.0, false);
    std::vector<double> tiled(static_cast<std::size_t>(T * J * C));
    for (std::int64_t t = 0; t < T; ++t)
        for (std::int64_t j = 0; j < J; ++j)
            for (std::int64_t c = 0; c < C; ++c)
                tiled[static_cast<std::size_t>((t * J + j) * C + c)] =
                    xj.values()[static_cast<std::size_t>(t * C + c)];
    auto out = tcn_block(Tensor::from_vector({T, J, C}, tiled, false), w, 2);
    for (std::int64_t t = 0; t < T; ++t) {
        for (std::int64_t j = 1; j < J; ++j) {
            for (std::int64_t c = 0; c < C; ++c) {
                EXPECT_DOUBLE_EQ(out.values()[static_cast<std::size_t>((t * J + j) * C + c)],
                                 out.values()[static_cast<std::size_t>(t * J * C + c)]);
            }
        }
    }

    // Perturbing the last frame leaves all earlier frames unchanged.
    auto bumped = tiled;
    bumped[static_cast<std::size_t>((T - 1) * J * C)] += 5.0;
    auto out2 = tcn_block(Tensor::from_vector({T, J, C}, bumped, false), w, 2);
    for (std::int64_t t = 0; t + 1 < T; ++t) {
        for (std::int64_t i = 0; i < J * C; ++i) {
            EXPECT_EQ(out2.values()[static_cast<std::size_t>(t * J * C + i)],
                      out.values()[static_cast<std::size_t>(t * J * C + i)]);
        }
    }
}

TEST(SubsampleTime, KeepsBlockEndRows) {
    auto x = Tensor::from_vector({4, 1, 2}, {0, 1, 10, 11, 20, 21, 30, 31}, false);
    auto out = subsample_time(x, 2);
    ASSERT_EQ(out.shape(), (std::vector<std::int64_t>{2, 1, 2}));
    EXPECT_EQ(out.values(), (std::vector<double>{10, 11, 30, 31}));
    EXPECT_EQ(subsample_time(x, 1).values(), x.values());
}

TEST(GraphEncoder, PresetCompressesSixteenStepsToFour) {
    GraphEncoderConfig cfg;  // joints 9, F_a 170, blocks stride 2,2
    auto topo = SkeletonTopology::default9();
    Rng rng(46);
    GraphEncoder enc(cfg, topo, rng);

    auto audio = Tensor::randn({16, 9, 170}, rng, 0.3, false);
    auto action = Tensor::randn({16, 9, 3}, rng, 0.3, false);
    auto z = enc.encode(audio, action);
    EXPECT_EQ(z.shape(), (std::vector<std::int64_t>{4, 9, 173}));
    for (double v : z.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(GraphEncoder, ZeroInputGivesZeroCode) {
    GraphEncoderConfig cfg;
    cfg.joints = 4;
    cfg.audio_feat = 5;
    cfg.node_embed_dim = 3;
    SkeletonTopology topo;
    topo.names = {"a", "b", "c", "d"};
    topo.parents = {-1, 0, 1, 1};
    Rng rng(47);
    GraphEncoder enc(cfg, topo, rng);
    auto z = enc.encode(Tensor::zeros({8, 4, 5}, false), Tensor::zeros({8, 4, 3}, false));
    ASSERT_EQ(z.shape(), (std::vector<std::int64_t>{2, 4, 8}));
    for (double v : z.values()) EXPECT_EQ(v, 0.0);  // tanh(0)*sigmoid(0) = 0, biases start at 0
}

TEST(GraphEncoder, AdjacencyIsRowStochastic) {
    GraphEncoderConfig cfg;
    cfg.joints = 9;
    cfg.audio_feat = 6;
    auto topo = SkeletonTopology::default9();
    Rng rng(48);
    GraphEncoder enc(cfg, topo, rng);
    auto a = enc.adjacency();
    ASSERT_EQ(a.shape(), (std::vector<std::int64_t>{9, 9}));
    for (std::int64_t r = 0; r < 9; ++r) {
        double sum = 0.0;
        for (std::int64_t c = 0; c < 9; ++c) sum += a.values()[static_cast<std::size_t>(r * 9 + c)];
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(GraphEncoder, GradientsReachEveryParameter) {
    GraphEncoderConfig cfg;
    cfg.joints = 3;
    cfg.audio_feat = 2;
    cfg.node_embed_dim = 2;
    cfg.diffusion_order = 1;
    SkeletonTopology topo;
    topo.names = {"a", "b", "c"};
    topo.parents = {-1, 0, 1};
    Rng rng(49);
    GraphEncoder enc(cfg, topo, rng);

    auto audio = Tensor::randn({4, 3, 2}, rng, 1.0, false);
    auto action = Tensor::randn({4, 3, 3}, rng, 1.0, false);
    auto loss = sum_all(mul(enc.encode(audio, action), enc.encode(audio, action)));
    loss.backward();
    for (auto& p : enc.params()) {
        double norm = 0.0;
        for (double g : p.grad()) norm += std::abs(g);
        EXPECT_GT(norm, 0.0);
    }
}

TEST(GraphEncoder, EncodeMatchesParameterGradCheck) {
    GraphEncoderConfig cfg;
    cfg.joints = 3;
    cfg.audio_feat = 2;
    cfg.node_embed_dim = 2;
    cfg.diffusion_order = 1;
    cfg.blocks = {{1, 2}};
    SkeletonTopology topo;
    topo.names = {"a", "b", "c"};
    topo.parents = {-1, 0, 1};
    Rng rng(50);
    GraphEncoder enc(cfg, topo, rng);
    auto audio = Tensor::randn({4, 3, 2}, rng, 1.0, false);
    auto action = Tensor::randn({4, 3, 3}, rng, 1.0, false);

    auto params = enc.params();
    auto loss_fn = [&]() { return sum_all(mul(enc.encode(audio, action), enc.encode(audio, action))); };
    auto reports = grad_check_params(loss_fn, params, 1e-5);
    ASSERT_EQ(reports.size(), params.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        EXPECT_LT(reports[i].max_rel_error, 1e-4) << "param " << i;
    }
}

TEST(GraphEncoder, MismatchedTopologyRejected) {
    GraphEncoderConfig cfg;
    cfg.joints = 9;
    Rng rng(51);
    EXPECT_THROW(GraphEncoder(cfg, SkeletonTopology::default42(), rng), shape_error);
}
