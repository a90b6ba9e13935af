// audio.hpp - waveform I/O, log-mel spectrograms, and the sliding-window
// converter that turns raw audio into per-joint graph node features.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogs/common.hpp"

namespace cogs {

struct Waveform {
    std::vector<double> samples;  // mono, amplitudes in [-1, 1]
    int sample_rate = 0;
};

/// Reads a RIFF/PCM WAV file (16-bit, mono or stereo; stereo is averaged).
/// Missing file, unsupported encoding, and zero-length audio raise distinct
/// errors (io_error / parse_error / value_error).
Waveform load_waveform(const std::string& path);

/// Writes mono PCM16; samples are clipped to [-1, 1].
void save_waveform(const std::string& path, const Waveform& w);

/// Linear-interpolation resampling to a new rate (no-op if rates match).
Waveform resample(const Waveform& w, int new_rate);

struct MelConfig {
    int sample_rate = 16000;
    int n_fft = 512;        // power of two; also the analysis window length
    int n_mels = 128;
    int hop = 256;          // ignored when target_frames > 0
    int target_frames = 0;  // > 0: derive hop so the clip yields exactly this many frames
    double fmin = 0.0;
    double fmax = 0.0;      // 0 -> sample_rate / 2
    double log_floor = 1e-10;
};

struct MelFrames {
    std::vector<double> values;  // frames x n_mels, row-major
    std::int64_t frames = 0;
    std::int64_t bands = 0;
    int hop = 0;
    int window = 0;
};

/// Hann-windowed power spectrogram through an HTK-mel triangular filterbank,
/// log-compressed with a floor. With target_frames set, the hop is derived
/// from the clip length and extra trailing frames are cropped so the frame
/// count is exact.
MelFrames mel_spectrogram(const Waveform& w, const MelConfig& cfg);

/// Center frequencies (Hz) of the filterbank defined by cfg.
std::vector<double> mel_band_centers(const MelConfig& cfg);

struct AudioWindows {
    std::vector<double> values;  // count x window_len, row-major
    std::int64_t count = 0;
    std::int64_t window_len = 0;
    std::int64_t stride = 0;
};

/// Sliding windows at offsets 0, stride, 2*stride, ...; the trailing
/// remainder is dropped: count = floor((N - window_len) / stride) + 1.
AudioWindows window_audio(const Waveform& w, std::int64_t window_len, std::int64_t stride);

/// Each window is linearly resampled to J*F_a values and reshaped to J x F_a,
/// giving every joint node an identical-length audio feature slice.
/// Output is row-major [count, J, F_a].
std::vector<double> audio_matrix_converter(const AudioWindows& aw, std::int64_t joints,
                                           std::int64_t feat);

struct OnsetConfig {
    int window = 256;
    int hop = 160;
    int bands = 40;
};

/// Audio beat times (seconds): strict local maxima of the mel spectral-flux
/// envelope that exceed its mean. Each onset is stamped at the end of the
/// first analysis window containing the energy rise.
std::vector<double> audio_beats(const Waveform& w, const OnsetConfig& cfg);

/// In-place iterative radix-2 FFT over interleaved complex (re, im) pairs;
/// n must be a power of two. Exposed for testability.
void fft_radix2(std::vector<double>& re, std::vector<double>& im);

}  // namespace cogs
