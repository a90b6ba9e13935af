// metrics.cpp
#include "cogs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>

#include "cogs/adam.hpp"
#include "cogs/checkpoint.hpp"
#include "cogs/ops.hpp"

namespace cogs {

// ------------------------------------------------------------ linear algebra

std::vector<double> matrix_sqrt_psd(const std::vector<double>& s, std::int64_t n) {
    if (n <= 0) throw value_error("matrix sqrt: dimension must be positive");
    if (s.size() != static_cast<std::size_t>(n * n)) {
        throw shape_error("matrix sqrt: buffer holds " + std::to_string(s.size()) +
                          " values, expected " + std::to_string(n * n));
    }
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = i + 1; j < n; ++j) {
            if (std::abs(s[i * n + j] - s[j * n + i]) > 1e-6) {
                throw value_error("matrix sqrt: input asymmetric at (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")");
            }
        }
    }
    Eigen::MatrixXd m(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            m(i, j) = 0.5 * (s[i * n + j] + s[j * n + i]);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd r = eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
    std::vector<double> out(static_cast<std::size_t>(n * n));
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = 0; j < n; ++j) out[i * n + j] = r(i, j);
    }
    return out;
}

GaussianSummary fit_gaussian(const std::vector<std::vector<double>>& samples) {
    if (samples.size() < 2) throw value_error("gaussian fit: need at least two samples");
    const auto n = static_cast<std::int64_t>(samples.size());
    const auto f = static_cast<std::int64_t>(samples[0].size());
    if (f < 1) throw value_error("gaussian fit: empty samples");
    for (const auto& s : samples) {
        if (static_cast<std::int64_t>(s.size()) != f) {
            throw shape_error("gaussian fit: samples disagree on dimension");
        }
    }
    GaussianSummary g;
    g.dim = f;
    g.mean.assign(static_cast<std::size_t>(f), 0.0);
    for (const auto& s : samples) {
        for (std::int64_t i = 0; i < f; ++i) g.mean[i] += s[i];
    }
    for (auto& v : g.mean) v /= static_cast<double>(n);
    g.cov.assign(static_cast<std::size_t>(f * f), 0.0);
    for (const auto& s : samples) {
        for (std::int64_t i = 0; i < f; ++i) {
            for (std::int64_t j = 0; j < f; ++j) {
                g.cov[i * f + j] += (s[i] - g.mean[i]) * (s[j] - g.mean[j]);
            }
        }
    }
    for (auto& v : g.cov) v /= static_cast<double>(n - 1);
    for (std::int64_t i = 0; i < f; ++i) g.cov[i * f + i] += 1e-6;
    return g;
}

double frechet_distance_sq(const GaussianSummary& a, const GaussianSummary& b) {
    if (a.dim != b.dim) throw shape_error("frechet distance: dimension mismatch");
    const auto f = a.dim;
    double d2 = 0.0;
    for (std::int64_t i = 0; i < f; ++i) {
        const double d = a.mean[i] - b.mean[i];
        d2 += d * d;
    }
    // Symmetrized covariance product: (S1 S2 + (S1 S2)^T) / 2.
    std::vector<double> prod(static_cast<std::size_t>(f * f), 0.0);
    for (std::int64_t i = 0; i < f; ++i) {
        for (std::int64_t k = 0; k < f; ++k) {
            const double aik = a.cov[i * f + k];
            for (std::int64_t j = 0; j < f; ++j) prod[i * f + j] += aik * b.cov[k * f + j];
        }
    }
    std::vector<double> sym(static_cast<std::size_t>(f * f));
    for (std::int64_t i = 0; i < f; ++i) {
        for (std::int64_t j = 0; j < f; ++j) {
            sym[i * f + j] = 0.5 * (prod[i * f + j] + prod[j * f + i]);
        }
    }
    const auto root = matrix_sqrt_psd(sym, f);
    double trace = 0.0;
    for (std::int64_t i = 0; i < f; ++i) {
        trace += a.cov[i * f + i] + b.cov[i * f + i] - 2.0 * root[i * f + i];
    }
    // Rounding guard: the exact quantity is non-negative.
    return std::max(0.0, d2 + trace);
}

// ---------------------------------------------------------- feature extractor

namespace {

Tensor sequence_matrix(const PoseSequence& seq) {
    return Tensor::from_vector({seq.frames, seq.joints() * 3},
                               std::vector<double>(seq.data.begin(), seq.data.end()));
}

}  // namespace

FeatureExtractor::FeatureExtractor(FeatureExtractorConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg_.latent < 2) throw value_error("feature extractor: latent dim must be >= 2");
    if (cfg_.input_dim < 1 || cfg_.frames < 2 || cfg_.hidden < 1) {
        throw value_error("feature extractor: degenerate configuration");
    }
    Rng rng(seed);
    enc_ = GruLayerWeights::init(cfg_.input_dim, cfg_.hidden, rng);
    w_lat_ = Tensor::randn({cfg_.hidden, cfg_.latent}, rng,
                           1.0 / std::sqrt(static_cast<double>(cfg_.hidden)), true);
    b_lat_ = Tensor::zeros({cfg_.latent}, true);
    dec_ = GruLayerWeights::init(cfg_.latent, cfg_.hidden, rng);
    w_out_ = Tensor::randn({cfg_.hidden, cfg_.input_dim}, rng,
                           1.0 / std::sqrt(static_cast<double>(cfg_.hidden)), true);
    b_out_ = Tensor::zeros({cfg_.input_dim}, true);
}

Tensor FeatureExtractor::encode_tensor(const Tensor& frames) const {
    auto x = linear_resample_rows(frames, cfg_.frames);
    auto states = gru_layer(x, enc_, false);
    auto last = slice(states, 0, cfg_.frames - 1, 1);  // [1, H]
    return add_rowvec(matmul(last, w_lat_), b_lat_);
}

Tensor FeatureExtractor::reconstruct(const Tensor& frames) const {
    auto latent = encode_tensor(frames);  // [1, F]
    auto repeated = matmul(Tensor::full({cfg_.frames, 1}, 1.0), latent);
    auto states = gru_layer(repeated, dec_, false);
    return add_rowvec(matmul(states, w_out_), b_out_);
}

std::vector<double> FeatureExtractor::encode(const PoseSequence& seq) const {
    seq.validate();
    if (seq.joints() * 3 != cfg_.input_dim) {
        throw shape_error("feature extractor expects " + std::to_string(cfg_.input_dim) +
                          " values per frame, sequence has " + std::to_string(seq.joints() * 3));
    }
    if (seq.frames < 1) throw value_error("feature extractor: empty sequence");
    return encode_tensor(sequence_matrix(seq)).values();
}

std::vector<Tensor> FeatureExtractor::params() {
    return {enc_.w_ih, enc_.w_hh, enc_.b_ih, enc_.b_hh, w_lat_, b_lat_,
            dec_.w_ih, dec_.w_hh, dec_.b_ih, dec_.b_hh, w_out_, b_out_};
}

std::vector<double> FeatureExtractor::fit(const std::vector<PoseSequence>& corpus,
                                          std::int64_t epochs, double lr) {
    if (corpus.size() < 2) throw value_error("feature extractor: corpus needs >= 2 clips");
    if (epochs < 1) throw value_error("feature extractor: epochs must be positive");
    std::vector<Tensor> inputs;
    inputs.reserve(corpus.size());
    for (const auto& seq : corpus) {
        seq.validate();
        if (seq.joints() * 3 != cfg_.input_dim) {
            throw shape_error("feature extractor corpus clip has " +
                              std::to_string(seq.joints() * 3) + " values per frame, expected " +
                              std::to_string(cfg_.input_dim));
        }
        inputs.push_back(sequence_matrix(seq));
    }
    AdamConfig acfg;
    acfg.lr = lr;
    Adam opt(params(), acfg);
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(epochs));
    for (std::int64_t epoch = 0; epoch < epochs; ++epoch) {
        Tensor total;
        for (const auto& x : inputs) {
            auto diff = sub(reconstruct(x), x);
            auto mse = mean_all(mul(diff, diff));
            total = total.defined() ? add(total, mse) : mse;
        }
        auto loss = scale(total, 1.0 / static_cast<double>(inputs.size()));
        losses.push_back(loss.values()[0]);
        loss.backward();
        opt.step();
    }
    return losses;
}

void FeatureExtractor::save(const std::string& path) const {
    auto self = const_cast<FeatureExtractor*>(this);
    const char* names[] = {"enc.w_ih", "enc.w_hh", "enc.b_ih", "enc.b_hh", "lat.w", "lat.b",
                           "dec.w_ih", "dec.w_hh", "dec.b_ih", "dec.b_hh", "out.w", "out.b"};
    std::vector<NamedTensor> tensors;
    auto ps = self->params();
    for (std::size_t i = 0; i < ps.size(); ++i) tensors.push_back({names[i], ps[i]});
    save_checkpoint(path, tensors,
                    {{"kind", "feature-extractor"},
                     {"input_dim", std::to_string(cfg_.input_dim)},
                     {"frames", std::to_string(cfg_.frames)},
                     {"hidden", std::to_string(cfg_.hidden)},
                     {"latent", std::to_string(cfg_.latent)}});
}

FeatureExtractor FeatureExtractor::load(const std::string& path) {
    auto ckpt = load_checkpoint(path);
    if (ckpt.meta_at("kind") != "feature-extractor") {
        throw parse_error("checkpoint is not a feature extractor: " + path);
    }
    FeatureExtractorConfig cfg;
    cfg.input_dim = std::stoll(ckpt.meta_at("input_dim"));
    cfg.frames = std::stoll(ckpt.meta_at("frames"));
    cfg.hidden = std::stoll(ckpt.meta_at("hidden"));
    cfg.latent = std::stoll(ckpt.meta_at("latent"));
    FeatureExtractor fx(cfg, 0);
    const char* names[] = {"enc.w_ih", "enc.w_hh", "enc.b_ih", "enc.b_hh", "lat.w", "lat.b",
                           "dec.w_ih", "dec.w_hh", "dec.b_ih", "dec.b_hh", "out.w", "out.b"};
    std::vector<NamedTensor> targets;
    auto ps = fx.params();
    for (std::size_t i = 0; i < ps.size(); ++i) targets.push_back({names[i], ps[i]});
    assign_from_checkpoint(ckpt, targets);
    return fx;
}

FeatureExtractor fit_feature_extractor(const std::vector<PoseSequence>& corpus,
                                       std::int64_t latent_dim, std::int64_t epochs,
                                       std::uint64_t seed, double lr) {
    if (corpus.size() < 2) throw value_error("feature extractor: corpus needs >= 2 clips");
    FeatureExtractorConfig cfg;
    cfg.input_dim = corpus[0].joints() * 3;
    cfg.frames = corpus[0].frames;
    cfg.latent = latent_dim;
    FeatureExtractor fx(cfg, seed);
    fx.fit(corpus, epochs, lr);
    return fx;
}

double fgd(const std::vector<PoseSequence>& real, const std::vector<PoseSequence>& gen,
           const FeatureExtractor& fx) {
    if (real.size() < 2 || gen.size() < 2) {
        throw value_error("fgd: both sets need at least two sequences");
    }
    std::vector<std::vector<double>> lr, lg;
    lr.reserve(real.size());
    lg.reserve(gen.size());
    for (const auto& s : real) lr.push_back(fx.encode(s));
    for (const auto& s : gen) lg.push_back(fx.encode(s));
    return frechet_distance_sq(fit_gaussian(lr), fit_gaussian(lg));
}

// ------------------------------------------------------------------ beats

std::vector<double> kinematic_beats(const PoseSequence& poses) {
    poses.validate();
    const auto t_count = poses.frames;
    const auto joints = poses.joints();
    if (t_count < 2 || joints < 1) return {};
    // Mean joint angular speed between consecutive frames, rad/s.
    std::vector<double> speed(static_cast<std::size_t>(t_count - 1), 0.0);
    for (std::int64_t k = 0; k + 1 < t_count; ++k) {
        double sum = 0.0;
        for (std::int64_t j = 0; j < joints; ++j) {
            const double ax = poses.at(k, j, 0), ay = poses.at(k, j, 1), az = poses.at(k, j, 2);
            const double bx = poses.at(k + 1, j, 0), by = poses.at(k + 1, j, 1),
                         bz = poses.at(k + 1, j, 2);
            const double cx = ay * bz - az * by;
            const double cy = az * bx - ax * bz;
            const double cz = ax * by - ay * bx;
            const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
            const double dot = ax * bx + ay * by + az * bz;
            sum += std::atan2(cross, dot);
        }
        speed[static_cast<std::size_t>(k)] = sum / static_cast<double>(joints) * poses.fps;
    }
    std::vector<double> beats;
    double running_sum = speed[0];
    for (std::size_t k = 1; k + 1 < speed.size(); ++k) {
        running_sum += speed[k];
        const double running_mean = running_sum / static_cast<double>(k + 1);
        if (speed[k] < speed[k - 1] && speed[k] < speed[k + 1] && speed[k] < running_mean) {
            beats.push_back((static_cast<double>(k) + 0.5) / poses.fps);
        }
    }
    return beats;
}

double bc_from_beats(const std::vector<double>& kinematic, const std::vector<double>& audio,
                     double sigma) {
    if (sigma <= 0.0) throw value_error("beat consistency: sigma must be positive");
    if (kinematic.empty() || audio.empty()) return 0.0;
    double total = 0.0;
    for (double tb : kinematic) {
        double best = std::numeric_limits<double>::infinity();
        for (double ta : audio) best = std::min(best, (tb - ta) * (tb - ta));
        total += std::exp(-best / (2.0 * sigma * sigma));
    }
    return total / static_cast<double>(kinematic.size());
}

double beat_consistency(const Waveform& audio, const PoseSequence& poses, double sigma,
                        const OnsetConfig& onset) {
    poses.validate();
    if (audio.samples.empty() || audio.sample_rate <= 0 || poses.frames == 0) {
        throw value_error("beat consistency: audio and poses must overlap in time");
    }
    return bc_from_beats(kinematic_beats(poses), audio_beats(audio, onset), sigma);
}

// -------------------------------------------------------------- diversity

double diversity(const std::vector<PoseSequence>& gens, std::int64_t pairs, std::uint64_t seed) {
    if (gens.size() < 2) throw value_error("diversity: need at least two sequences");
    if (pairs < 1) throw value_error("diversity: pair count must be positive");
    const auto n = static_cast<std::int64_t>(gens.size());
    const auto width = gens[0].data.size();
    for (const auto& g : gens) {
        if (g.data.size() != width) {
            throw shape_error("diversity: sequences disagree on flattened size");
        }
    }
    Rng rng(seed);
    double total = 0.0;
    for (std::int64_t p = 0; p < pairs; ++p) {
        const auto i = rng.uniform_int(n);
        auto j = rng.uniform_int(n - 1);
        if (j >= i) ++j;  // skip the self pair
        double l1 = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
            l1 += std::abs(gens[static_cast<std::size_t>(i)].data[k] -
                           gens[static_cast<std::size_t>(j)].data[k]);
        }
        total += l1;
    }
    return total / static_cast<double>(pairs);
}

}  // namespace cogs
