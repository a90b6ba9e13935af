// corpus.cpp
#include "cogs/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cogs/embeddings.hpp"
#include "cogs/rng.hpp"

namespace cogs {

namespace {

constexpr std::int64_t kHopSamples = 160;  // alignment tolerance, 10 ms at 16 kHz

std::uint64_t mix_seed(std::uint64_t seed, std::int64_t index) {
    return seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(index + 1));
}

std::uint64_t hash_i64(std::int64_t v, std::uint64_t h) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    return fnv1a64(bytes, 8, h);
}

std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t h) {
    for (double d : v) {
        const auto u = std::bit_cast<std::uint64_t>(d);
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
        h = fnv1a64(bytes, 8, h);
    }
    return h;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

void add_tone(std::vector<double>& samples, int sr, double at, double freq, double amp,
              double dur) {
    const auto start = static_cast<std::int64_t>(std::llround(at * sr));
    const auto len = static_cast<std::int64_t>(std::llround(dur * sr));
    for (std::int64_t i = 0; i < len; ++i) {
        const auto idx = start + i;
        if (idx < 0 || idx >= static_cast<std::int64_t>(samples.size())) continue;
        samples[static_cast<std::size_t>(idx)] +=
            amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sr);
    }
}

}  // namespace

void ClipRecord::validate() const {
    poses.validate();
    if (audio.sample_rate <= 0) throw value_error("clip " + id + ": missing sample rate");
    const double expected =
        static_cast<double>(poses.frames) / poses.fps * audio.sample_rate;
    const auto gap = std::llabs(static_cast<std::int64_t>(audio.samples.size()) -
                                static_cast<std::int64_t>(std::llround(expected)));
    if (gap > kHopSamples) {
        throw value_error("clip " + id + ": audio span disagrees with pose span by " +
                          std::to_string(gap) + " samples");
    }
}

void SyntheticCorpusSpec::validate() const {
    if (clips < 1) throw value_error("corpus spec: clip count must be >= 1");
    if (vocab_words < 1) throw value_error("corpus spec: vocabulary must be >= 1 word");
    if (beat_period < 4 || beat_period % 2 != 0) {
        throw value_error("corpus spec: beat period must be even and >= 4 frames");
    }
    if (noise_level < 0.0) throw value_error("corpus spec: negative noise level");
    if (speakers < 1) throw value_error("corpus spec: need >= 1 speaker");
    if (frames < 4) throw value_error("corpus spec: need >= 4 frames");
    if (joints < 1) throw value_error("corpus spec: need >= 1 joint");
    if (fps <= 0.0) throw value_error("corpus spec: fps must be positive");
    if (sample_rate <= 0) throw value_error("corpus spec: sample rate must be positive");
}

std::vector<ClipRecord> synthesize_corpus(const SyntheticCorpusSpec& spec) {
    spec.validate();
    // Per-word gesture template: a signed swing amplitude for every joint.
    Rng word_rng(spec.seed);
    std::vector<std::vector<double>> templates(static_cast<std::size_t>(spec.vocab_words));
    for (auto& t : templates) {
        t.resize(static_cast<std::size_t>(spec.joints));
        for (auto& a : t) {
            const double sign = word_rng.uniform() < 0.5 ? -1.0 : 1.0;
            a = sign * word_rng.uniform(0.3, 0.9);
        }
    }

    const auto duration = static_cast<double>(spec.frames) / spec.fps;
    const auto sample_count = static_cast<std::size_t>(std::llround(duration * spec.sample_rate));
    std::vector<ClipRecord> corpus;
    corpus.reserve(static_cast<std::size_t>(spec.clips));

    for (std::int64_t c = 0; c < spec.clips; ++c) {
        Rng rng(mix_seed(spec.seed, c));
        ClipRecord rec;
        {
            std::ostringstream id;
            id << "clip_" << std::setw(4) << std::setfill('0') << c;
            rec.id = id.str();
        }
        rec.speaker = c % spec.speakers;

        const auto n_words = 2 + rng.uniform_int(4);
        std::vector<std::int64_t> words;
        for (std::int64_t w = 0; w < n_words; ++w) {
            words.push_back(rng.uniform_int(spec.vocab_words));
            rec.transcript.push_back("word" + std::to_string(words.back()));
        }

        // Bag-of-words swing amplitude per joint, kept away from zero so the
        // clip always moves; louder speakers swing wider.
        const double speaker_scale = 0.8 + 0.15 * static_cast<double>(rec.speaker % 3);
        std::vector<double> amp(static_cast<std::size_t>(spec.joints));
        std::vector<double> base(static_cast<std::size_t>(spec.joints));
        for (std::int64_t j = 0; j < spec.joints; ++j) {
            double s = 0.0;
            for (auto w : words) s += templates[static_cast<std::size_t>(w)][static_cast<std::size_t>(j)];
            s /= static_cast<double>(n_words);
            const double mag = std::max(0.1, std::abs(s));
            amp[static_cast<std::size_t>(j)] = std::copysign(mag, s == 0.0 ? 1.0 : s) * speaker_scale;
            base[static_cast<std::size_t>(j)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }

        // Planar joint rotations theta_j(f) = base_j + amp_j cos(2 pi (f - 1/2) / p):
        // the inter-frame rotation angle is |amp_j| 2 sin(pi/p) |sin(2 pi k / p)|,
        // exactly zero at k = m p / 2, so those frames are the kinematic beats.
        rec.poses.fps = spec.fps;
        rec.poses.frames = spec.frames;
        for (std::int64_t j = 0; j < spec.joints; ++j) {
            rec.poses.joint_names.push_back("j" + std::to_string(j));
        }
        for (std::int64_t f = 0; f < spec.frames; ++f) {
            const double phi = std::cos(2.0 * std::numbers::pi * (static_cast<double>(f) - 0.5) /
                                        static_cast<double>(spec.beat_period));
            for (std::int64_t j = 0; j < spec.joints; ++j) {
                const double th = base[static_cast<std::size_t>(j)] +
                                  amp[static_cast<std::size_t>(j)] * phi;
                const double u = std::cos(th), v = std::sin(th);
                switch (j % 3) {
                    case 0: rec.poses.data.insert(rec.poses.data.end(), {u, v, 0.0}); break;
                    case 1: rec.poses.data.insert(rec.poses.data.end(), {0.0, u, v}); break;
                    default: rec.poses.data.insert(rec.poses.data.end(), {v, 0.0, u}); break;
                }
            }
        }

        rec.audio.sample_rate = spec.sample_rate;
        rec.audio.samples.assign(sample_count, 0.0);
        if (spec.noise_level > 0.0) {
            for (auto& s : rec.audio.samples) s = 0.05 * spec.noise_level * rng.uniform(-1.0, 1.0);
        }
        // Clicks exactly at the zero-speed frames.
        for (std::int64_t k = spec.beat_period / 2; k <= spec.frames - 3;
             k += spec.beat_period / 2) {
            add_tone(rec.audio.samples, spec.sample_rate,
                     (static_cast<double>(k) + 0.5) / spec.fps, 3000.0, 0.8, 0.002);
        }
        // One softer tone per word, pitched by the word identity.
        for (std::int64_t w = 0; w < n_words; ++w) {
            const double at = (static_cast<double>(w) + 0.5) / static_cast<double>(n_words) *
                              duration;
            add_tone(rec.audio.samples, spec.sample_rate, at,
                     300.0 + 37.0 * static_cast<double>(words[static_cast<std::size_t>(w)]), 0.12,
                     0.03);
        }
        // Snap to the 16-bit grid the WAV files use, so the in-memory corpus
        // is bit-identical to a written-then-reloaded one (one hash
        // everywhere).
        for (auto& s : rec.audio.samples) {
            const auto q = std::clamp<std::int64_t>(std::llround(s * 32768.0), -32768, 32767);
            s = static_cast<double>(q) / 32768.0;
        }
        rec.validate();
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

std::uint64_t corpus_hash(const std::vector<ClipRecord>& corpus) {
    std::uint64_t h = fnv1a64("gesture-corpus");
    for (const auto& rec : corpus) {
        h = fnv1a64(rec.id, h);
        h = hash_i64(rec.speaker, h);
        h = fnv1a64(join_tokens(rec.transcript), h);
        h = hash_i64(rec.audio.sample_rate, h);
        h = hash_doubles(rec.audio.samples, h);
        h = hash_doubles(rec.poses.data, h);
        h = hash_i64(rec.poses.frames, h);
    }
    return h;
}

std::string write_corpus(const std::string& dir, const std::vector<ClipRecord>& corpus) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format"] = "gesture-corpus-v1";
    manifest["corpus_hash"] = hex64(corpus_hash(corpus));
    auto clips = nlohmann::json::array();
    for (const auto& rec : corpus) {
        rec.validate();
        const auto wav_name = rec.id + ".wav";
        const auto pose_name = rec.id + ".pose.json";
        save_waveform((std::filesystem::path(dir) / wav_name).string(), rec.audio);
        save_pose_json((std::filesystem::path(dir) / pose_name).string(), rec.poses);
        clips.push_back({{"id", rec.id},
                         {"speaker", rec.speaker},
                         {"wav_path", wav_name},
                         {"transcript", join_tokens(rec.transcript)},
                         {"pose_path", pose_name}});
    }
    manifest["clips"] = std::move(clips);
    const auto manifest_path = (std::filesystem::path(dir) / "manifest.json").string();
    std::ofstream out(manifest_path);
    if (!out) throw io_error("cannot write corpus manifest: " + manifest_path);
    out << manifest.dump(2);
    if (!out) throw io_error("short write to corpus manifest: " + manifest_path);
    return manifest_path;
}

std::vector<ClipRecord> load_corpus(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw io_error("cannot open corpus manifest: " + manifest_path);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("corpus manifest is not valid JSON: " + manifest_path + ": " + e.what());
    }
    if (!manifest.contains("clips") || !manifest.at("clips").is_array()) {
        throw parse_error("corpus manifest has no clip list: " + manifest_path);
    }
    const auto dir = std::filesystem::path(manifest_path).parent_path();
    std::vector<ClipRecord> corpus;
    for (const auto& c : manifest.at("clips")) {
        ClipRecord rec;
        std::string wav_path, pose_path;
        try {
            rec.id = c.at("id").get<std::string>();
            rec.speaker = c.at("speaker").get<std::int64_t>();
            rec.transcript = tokenize(c.at("transcript").get<std::string>());
            wav_path = c.at("wav_path").get<std::string>();
            pose_path = c.at("pose_path").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("corpus manifest record is malformed: " + manifest_path + ": " +
                              e.what());
        }
        try {
            rec.audio = load_waveform((dir / wav_path).string());
            rec.poses = load_pose_json((dir / pose_path).string());
        } catch (const io_error& e) {
            throw io_error("clip " + rec.id + ": " + e.what());
        }
        rec.validate();
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

std::vector<ClipRecord> window_records(const Waveform& audio, const PoseSequence& poses,
                                       const std::vector<std::string>& transcript,
                                       std::int64_t speaker, std::int64_t frames,
                                       std::int64_t stride, const std::string& id_prefix) {
    poses.validate();
    if (frames < 1 || stride < 1) throw value_error("windowing: frames and stride must be >= 1");
    if (poses.frames < frames) {
        throw value_error("windowing: recording has " + std::to_string(poses.frames) +
                          " frames, window needs " + std::to_string(frames));
    }
    if (audio.sample_rate <= 0) throw value_error("windowing: missing sample rate");
    const auto per_frame = static_cast<double>(audio.sample_rate) / poses.fps;
    const auto count = (poses.frames - frames) / stride + 1;
    std::vector<ClipRecord> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t w = 0; w < count; ++w) {
        const auto start = w * stride;
        ClipRecord rec;
        rec.id = id_prefix + "_" + std::to_string(w);
        rec.speaker = speaker;
        rec.transcript = transcript;
        rec.poses.fps = poses.fps;
        rec.poses.joint_names = poses.joint_names;
        rec.poses.frames = frames;
        const auto row = poses.joints() * 3;
        rec.poses.data.assign(poses.data.begin() + start * row,
                              poses.data.begin() + (start + frames) * row);
        const auto s0 = static_cast<std::int64_t>(std::llround(static_cast<double>(start) * per_frame));
        const auto s1 = static_cast<std::int64_t>(
            std::llround(static_cast<double>(start + frames) * per_frame));
        if (s1 > static_cast<std::int64_t>(audio.samples.size())) {
            throw value_error("windowing: audio ends before pose window " + std::to_string(w));
        }
        rec.audio.sample_rate = audio.sample_rate;
        rec.audio.samples.assign(audio.samples.begin() + s0, audio.samples.begin() + s1);
        rec.validate();
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace cogs
