// metrics.hpp - evaluation metrics: Fréchet gesture distance over a learned
// feature space, audio/kinematic beat consistency, and pairwise L1 diversity.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogs/audio.hpp"
#include "cogs/gru.hpp"
#include "cogs/pose_io.hpp"
#include "cogs/tensor.hpp"

namespace cogs {

/// Square root of a symmetric PSD matrix (row-major n x n) via symmetric
/// eigendecomposition; negative eigenvalues are clipped to zero. Rejects
/// matrices whose asymmetry exceeds 1e-6.
std::vector<double> matrix_sqrt_psd(const std::vector<double>& s, std::int64_t n);

/// Sample mean and unbiased (n-1) covariance with 1e-6 diagonal jitter.
struct GaussianSummary {
    std::vector<double> mean;  // F
    std::vector<double> cov;   // F*F row-major, symmetric PSD after jitter
    std::int64_t dim = 0;
};

/// Requires at least two samples of equal dimension.
GaussianSummary fit_gaussian(const std::vector<std::vector<double>>& samples);

/// Squared Fréchet distance between two Gaussians:
///   d^2 = |mu1 - mu2|^2 + Tr(S1 + S2 - 2 sqrt_psd((S1 S2 + S2 S1) / 2)).
/// Tiny negative values from rounding are clamped to zero.
double frechet_distance_sq(const GaussianSummary& a, const GaussianSummary& b);

/// GRU autoencoder whose frozen encoder maps a pose sequence to a latent
/// feature vector. Sequences are linearly resampled to a fixed frame count
/// before encoding, so clips of any length share one feature space.
struct FeatureExtractorConfig {
    std::int64_t input_dim = 27;  // joints * 3
    std::int64_t frames = 34;
    std::int64_t hidden = 16;
    std::int64_t latent = 8;  // F >= 2
};

class FeatureExtractor {
public:
    FeatureExtractor(FeatureExtractorConfig cfg, std::uint64_t seed);

    const FeatureExtractorConfig& config() const { return cfg_; }

    /// Deterministic encoding of one sequence to an F-dim latent.
    std::vector<double> encode(const PoseSequence& seq) const;

    /// One full-batch optimizer step per epoch over the corpus; returns the
    /// per-epoch mean reconstruction loss (mean squared error).
    std::vector<double> fit(const std::vector<PoseSequence>& corpus, std::int64_t epochs,
                            double lr = 1e-3);

    void save(const std::string& path) const;
    static FeatureExtractor load(const std::string& path);

    std::vector<Tensor> params();

private:
    Tensor encode_tensor(const Tensor& frames) const;  // [T, D] -> [1, F]
    Tensor reconstruct(const Tensor& frames) const;    // [T, D] -> [T, D]

    FeatureExtractorConfig cfg_;
    GruLayerWeights enc_;
    Tensor w_lat_, b_lat_;  // [H, F], [F]
    GruLayerWeights dec_;   // input F
    Tensor w_out_, b_out_;  // [H, D], [D]
};

/// Trains an extractor on the corpus (>= 2 clips); frame count and input
/// width are taken from the first clip. Losses from fit() are discarded --
/// call fit() yourself to inspect them.
FeatureExtractor fit_feature_extractor(const std::vector<PoseSequence>& corpus,
                                       std::int64_t latent_dim, std::int64_t epochs,
                                       std::uint64_t seed = 1, double lr = 1e-3);

/// Squared Fréchet distance between real and generated sets (>= 2 clips
/// each) in the extractor's feature space.
double fgd(const std::vector<PoseSequence>& real, const std::vector<PoseSequence>& gen,
           const FeatureExtractor& fx);

/// Kinematic beat times (seconds): strict local minima of the mean joint
/// angular speed that fall below its running mean. The speed between frames
/// k and k+1 is stamped at (k + 0.5) / fps.
std::vector<double> kinematic_beats(const PoseSequence& poses);

/// Gaussian-kernel beat match: mean over kinematic beats of
/// exp(-min_a (t_b - t_a)^2 / (2 sigma^2)); empty beat lists score 0.
double bc_from_beats(const std::vector<double>& kinematic, const std::vector<double>& audio,
                     double sigma);

/// Beat consistency between a waveform and a pose sequence; audio beats come
/// from the mel spectral-flux onset envelope. Result lies in [0, 1].
double beat_consistency(const Waveform& audio, const PoseSequence& poses, double sigma = 0.1,
                        const OnsetConfig& onset = OnsetConfig{});

/// Mean L1 distance between flattened sequences over `pairs` seeded random
/// non-self index pairs.
double diversity(const std::vector<PoseSequence>& gens, std::int64_t pairs = 500,
                 std::uint64_t seed = 0);

}  // namespace cogs
