// audio.cpp - WAV parsing, FFT, mel filterbank, windowing, onset envelope
#include "cogs/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace cogs {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Power-spectrum mel energies, frames x bands, no log compression.
std::vector<double> power_mel_frames(const std::vector<double>& samples, int sr, int window,
                                     int hop, int bands, double fmin, double fmax,
                                     std::int64_t* out_frames) {
    const auto n = static_cast<std::int64_t>(samples.size());
    if (window <= 0 || (window & (window - 1)) != 0) {
        throw value_error("mel: analysis window must be a positive power of two");
    }
    if (n < window) throw value_error("mel: clip shorter than one analysis window");
    if (hop <= 0) throw value_error("mel: hop must be positive");
    if (bands < 1) throw value_error("mel: need at least one band");
    if (fmax <= 0.0) fmax = sr / 2.0;

    const std::int64_t frames = 1 + (n - window) / hop;
    const int nbins = window / 2 + 1;

    // Triangular filters between n_mels+2 equally spaced mel points.
    std::vector<double> points(static_cast<std::size_t>(bands) + 2);
    const double mlo = hz_to_mel(fmin), mhi = hz_to_mel(fmax);
    for (std::size_t i = 0; i < points.size(); ++i)
        points[i] = mel_to_hz(mlo + (mhi - mlo) * static_cast<double>(i) /
                                        static_cast<double>(bands + 1));
    std::vector<double> filters(static_cast<std::size_t>(bands * nbins), 0.0);
    for (int b = 0; b < bands; ++b) {
        const double lo = points[static_cast<std::size_t>(b)];
        const double mid = points[static_cast<std::size_t>(b) + 1];
        const double hi = points[static_cast<std::size_t>(b) + 2];
        for (int k = 0; k < nbins; ++k) {
            const double f = static_cast<double>(k) * sr / window;
            double wgt = 0.0;
            if (f > lo && f < hi) {
                wgt = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            }
            filters[static_cast<std::size_t>(b * nbins + k)] = wgt;
        }
    }

    std::vector<double> hann(static_cast<std::size_t>(window));
    for (int i = 0; i < window; ++i)
        hann[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / window);

    std::vector<double> out(static_cast<std::size_t>(frames * bands), 0.0);
    std::vector<double> re(static_cast<std::size_t>(window)), im(static_cast<std::size_t>(window));
    for (std::int64_t f = 0; f < frames; ++f) {
        for (int i = 0; i < window; ++i) {
            re[static_cast<std::size_t>(i)] =
                samples[static_cast<std::size_t>(f * hop + i)] * hann[static_cast<std::size_t>(i)];
            im[static_cast<std::size_t>(i)] = 0.0;
        }
        fft_radix2(re, im);
        for (int b = 0; b < bands; ++b) {
            double e = 0.0;
            const double* filt = &filters[static_cast<std::size_t>(b * nbins)];
            for (int k = 0; k < nbins; ++k) {
                const double p = re[static_cast<std::size_t>(k)] * re[static_cast<std::size_t>(k)] +
                                 im[static_cast<std::size_t>(k)] * im[static_cast<std::size_t>(k)];
                e += filt[k] * p;
            }
            out[static_cast<std::size_t>(f * bands + b)] = e;
        }
    }
    *out_frames = frames;
    return out;
}

}  // namespace

void fft_radix2(std::vector<double>& re, std::vector<double>& im) {
    const auto n = re.size();
    if (n != im.size() || n == 0 || (n & (n - 1)) != 0) {
        throw value_error("fft: size must be a power of two");
    }
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const double wr = std::cos(ang), wi = std::sin(ang);
        for (std::size_t i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::size_t a = i + k, b = i + k + len / 2;
                const double tr = re[b] * cr - im[b] * ci;
                const double ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                const double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

Waveform load_waveform(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open wav file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw parse_error("not a RIFF/WAVE file: " + path);
    }
    int channels = 0, bits = 0, sr = 0;
    std::size_t data_off = 0, data_len = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t sz = read_u32(bytes.data() + pos + 4);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (pos + 8 + 16 > bytes.size()) throw parse_error("truncated fmt chunk: " + path);
            const auto fmt = read_u16(bytes.data() + pos + 8);
            if (fmt != 1) throw parse_error("unsupported wav encoding (want PCM): " + path);
            channels = read_u16(bytes.data() + pos + 10);
            sr = static_cast<int>(read_u32(bytes.data() + pos + 12));
            bits = read_u16(bytes.data() + pos + 22);
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data_off = pos + 8;
            data_len = sz;
        }
        pos += 8 + sz + (sz & 1);  // chunks are word-aligned
    }
    if (channels == 0) throw parse_error("wav file missing fmt chunk: " + path);
    if (bits != 16) throw parse_error("unsupported wav bit depth (want 16): " + path);
    if (channels < 1 || channels > 2) throw parse_error("unsupported channel count: " + path);
    if (data_off == 0 || data_len == 0) throw value_error("zero-length audio: " + path);
    if (data_off + data_len > bytes.size()) throw parse_error("truncated data chunk: " + path);

    const std::size_t nframes = data_len / (2 * static_cast<std::size_t>(channels));
    if (nframes == 0) throw value_error("zero-length audio: " + path);
    Waveform w;
    w.sample_rate = sr;
    w.samples.resize(nframes);
    for (std::size_t i = 0; i < nframes; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const unsigned char* p = bytes.data() + data_off + 2 * (i * channels + c);
            const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            acc += static_cast<double>(v) / 32768.0;
        }
        w.samples[i] = acc / channels;
    }
    return w;
}

void save_waveform(const std::string& path, const Waveform& w) {
    if (w.samples.empty()) throw value_error("refusing to write zero-length audio");
    if (w.sample_rate <= 0) throw value_error("invalid sample rate");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write wav file: " + path);
    const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * 2);
    auto u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto u16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        out.write(reinterpret_cast<char*>(b), 2);
    };
    out.write("RIFF", 4);
    u32(36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(1);  // PCM
    u16(1);  // mono
    u32(static_cast<std::uint32_t>(w.sample_rate));
    u32(static_cast<std::uint32_t>(w.sample_rate) * 2);
    u16(2);
    u16(16);
    out.write("data", 4);
    u32(data_len);
    for (double s : w.samples) {
        // Symmetric with the 1/32768 loader scale so a round trip stays
        // within half a quantization step (full scale clips to 32767).
        const auto q = std::lrint(std::clamp(s, -1.0, 1.0) * 32768.0);
        const auto v = static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
        u16(static_cast<std::uint16_t>(v));
    }
    if (!out) throw io_error("short write to wav file: " + path);
}

Waveform resample(const Waveform& w, int new_rate) {
    if (new_rate <= 0) throw value_error("resample: rate must be positive");
    if (w.sample_rate == new_rate) return w;
    const auto n = static_cast<std::int64_t>(w.samples.size());
    const auto m = static_cast<std::int64_t>(
        static_cast<double>(n) * new_rate / static_cast<double>(w.sample_rate));
    Waveform out;
    out.sample_rate = new_rate;
    out.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(m, 1)));
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(out.samples.size()); ++i) {
        const double pos = static_cast<double>(i) * w.sample_rate / new_rate;
        auto lo = static_cast<std::int64_t>(pos);
        if (lo >= n - 1) lo = n - 1;
        const auto hi = std::min<std::int64_t>(lo + 1, n - 1);
        const double frac = pos - static_cast<double>(lo);
        out.samples[static_cast<std::size_t>(i)] =
            (1.0 - frac) * w.samples[static_cast<std::size_t>(lo)] +
            frac * w.samples[static_cast<std::size_t>(hi)];
    }
    return out;
}

MelFrames mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
    const auto n = static_cast<std::int64_t>(w.samples.size());
    int hop = cfg.hop;
    if (cfg.target_frames > 0) {
        // Derive the hop so this clip yields at least target_frames frames,
        // then crop the surplus; the frame count becomes exact.
        if (cfg.target_frames == 1) {
            hop = static_cast<int>(std::max<std::int64_t>(n, 1));
        } else {
            hop = static_cast<int>(
                std::max<std::int64_t>(1, (n - cfg.n_fft) / (cfg.target_frames - 1)));
        }
    }
    std::int64_t frames = 0;
    auto power = power_mel_frames(w.samples, cfg.sample_rate, cfg.n_fft, hop, cfg.n_mels, cfg.fmin,
                                  cfg.fmax, &frames);
    if (cfg.target_frames > 0) {
        if (frames < cfg.target_frames) {
            throw value_error("mel: clip too short for " + std::to_string(cfg.target_frames) +
                              " frames");
        }
        frames = cfg.target_frames;
        power.resize(static_cast<std::size_t>(frames * cfg.n_mels));
    }
    MelFrames mf;
    mf.frames = frames;
    mf.bands = cfg.n_mels;
    mf.hop = hop;
    mf.window = cfg.n_fft;
    mf.values.resize(power.size());
    for (std::size_t i = 0; i < power.size(); ++i)
        mf.values[i] = std::log(std::max(power[i], cfg.log_floor));
    return mf;
}

std::vector<double> mel_band_centers(const MelConfig& cfg) {
    const double fmax = cfg.fmax > 0.0 ? cfg.fmax : cfg.sample_rate / 2.0;
    const double mlo = hz_to_mel(cfg.fmin), mhi = hz_to_mel(fmax);
    std::vector<double> centers(static_cast<std::size_t>(cfg.n_mels));
    for (int b = 0; b < cfg.n_mels; ++b)
        centers[static_cast<std::size_t>(b)] =
            mel_to_hz(mlo + (mhi - mlo) * (b + 1) / static_cast<double>(cfg.n_mels + 1));
    return centers;
}

AudioWindows window_audio(const Waveform& w, std::int64_t window_len, std::int64_t stride) {
    const auto n = static_cast<std::int64_t>(w.samples.size());
    if (window_len <= 0 || stride <= 0) throw value_error("window_audio: window and stride must be positive");
    if (window_len > n) {
        throw value_error("window_audio: window " + std::to_string(window_len) +
                          " exceeds sample count " + std::to_string(n));
    }
    AudioWindows aw;
    aw.window_len = window_len;
    aw.stride = stride;
    aw.count = (n - window_len) / stride + 1;
    aw.values.resize(static_cast<std::size_t>(aw.count * window_len));
    for (std::int64_t i = 0; i < aw.count; ++i)
        std::copy_n(w.samples.begin() + i * stride, window_len,
                    aw.values.begin() + i * window_len);
    return aw;
}

std::vector<double> audio_matrix_converter(const AudioWindows& aw, std::int64_t joints,
                                           std::int64_t feat) {
    const auto target = joints * feat;
    if (target <= 0) throw value_error("audio_matrix_converter: joints*feat must be positive");
    if (target > aw.window_len) {
        throw value_error("audio_matrix_converter: joints*feat " + std::to_string(target) +
                          " exceeds window length " + std::to_string(aw.window_len));
    }
    std::vector<double> out(static_cast<std::size_t>(aw.count * target));
    for (std::int64_t i = 0; i < aw.count; ++i) {
        const double* src = &aw.values[static_cast<std::size_t>(i * aw.window_len)];
        double* dst = &out[static_cast<std::size_t>(i * target)];
        for (std::int64_t t = 0; t < target; ++t) {
            // endpoint-aligned linear interpolation over the window
            const double pos = target > 1 ? static_cast<double>(t) *
                                                static_cast<double>(aw.window_len - 1) /
                                                static_cast<double>(target - 1)
                                          : 0.0;
            auto lo = static_cast<std::int64_t>(pos);
            if (lo >= aw.window_len - 1) lo = aw.window_len - 1;
            const auto hi = std::min(lo + 1, aw.window_len - 1);
            const double frac = pos - static_cast<double>(lo);
            dst[t] = (1.0 - frac) * src[lo] + frac * src[hi];
        }
    }
    return out;
}

std::vector<double> audio_beats(const Waveform& w, const OnsetConfig& cfg) {
    if (static_cast<int>(w.samples.size()) < cfg.window) return {};
    std::int64_t frames = 0;
    auto mel = power_mel_frames(w.samples, w.sample_rate, cfg.window, cfg.hop, cfg.bands, 0.0, 0.0,
                                &frames);
    if (frames < 3) return {};
    // half-wave-rectified spectral flux between consecutive frames
    std::vector<double> flux(static_cast<std::size_t>(frames - 1), 0.0);
    for (std::int64_t f = 1; f < frames; ++f) {
        double acc = 0.0;
        for (int b = 0; b < cfg.bands; ++b) {
            const double d = mel[static_cast<std::size_t>(f * cfg.bands + b)] -
                             mel[static_cast<std::size_t>((f - 1) * cfg.bands + b)];
            if (d > 0.0) acc += d;
        }
        flux[static_cast<std::size_t>(f - 1)] = acc;
    }
    double mean = 0.0;
    for (double v : flux) mean += v;
    mean /= static_cast<double>(flux.size());

    std::vector<double> beats;
    for (std::size_t i = 1; i + 1 < flux.size(); ++i) {
        if (flux[i] > flux[i - 1] && flux[i] > flux[i + 1] && flux[i] > mean) {
            // flux index i compares frames (i+1) and i; stamp the onset at the
            // end of frame i+1, the first window containing the energy rise.
            const auto frame = static_cast<std::int64_t>(i) + 1;
            beats.push_back(static_cast<double>(frame * cfg.hop + cfg.window) / w.sample_rate);
        }
    }
    return beats;
}

}  // namespace cogs
