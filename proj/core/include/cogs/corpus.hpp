// corpus.hpp - clip records, the deterministic synthetic corpus generator,
// manifest serialization, and fixed-window ingest of longer recordings.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogs/audio.hpp"
#include "cogs/pose_io.hpp"

namespace cogs {

/// One training example: a pose window with its aligned audio and transcript.
struct ClipRecord {
    std::string id;
    std::int64_t speaker = 0;
    std::vector<std::string> transcript;  // lowercase tokens
    Waveform audio;
    PoseSequence poses;

    /// Checks the pose buffer and that the audio span matches the pose span
    /// to within one analysis hop (160 samples at 16 kHz).
    void validate() const;
};

/// Recipe for a deterministic synthetic corpus: sentences drawn from a small
/// gesture vocabulary, arm-swing pose curves whose speed dips to zero every
/// beat_period/2 frames, and a click track striking exactly at those dips.
struct SyntheticCorpusSpec {
    std::uint64_t seed = 7;
    std::int64_t clips = 64;
    std::int64_t vocab_words = 6;   // distinct gesture words
    std::int64_t beat_period = 12;  // frames per full swing cycle; must be even
    double noise_level = 0.0;       // audio white-noise amplitude, 0.05 * level
    std::int64_t speakers = 4;
    std::int64_t frames = 34;
    std::int64_t joints = 9;
    double fps = 15.0;
    int sample_rate = 16000;

    void validate() const;
};

/// Same spec twice -> byte-identical records (and equal corpus_hash).
std::vector<ClipRecord> synthesize_corpus(const SyntheticCorpusSpec& spec);

/// Content hash over ids, speakers, transcripts, samples, and pose buffers.
std::uint64_t corpus_hash(const std::vector<ClipRecord>& corpus);

/// Writes <dir>/clip_NNN.wav, <dir>/clip_NNN.pose.json, and a manifest.json
/// whose records carry {id, speaker, wav_path, transcript, pose_path} plus
/// the corpus hash. Returns the manifest path.
std::string write_corpus(const std::string& dir, const std::vector<ClipRecord>& corpus);

/// Reads a manifest (as written above, or hand-built for real datasets in
/// the same shape) and loads every referenced wav / pose file. Relative
/// paths resolve against the manifest's directory.
std::vector<ClipRecord> load_corpus(const std::string& manifest_path);

/// Slices a long recording into fixed-length pose windows with the given
/// stride, cutting the aligned audio span for each window.
std::vector<ClipRecord> window_records(const Waveform& audio, const PoseSequence& poses,
                                       const std::vector<std::string>& transcript,
                                       std::int64_t speaker, std::int64_t frames = 34,
                                       std::int64_t stride = 10,
                                       const std::string& id_prefix = "win");

}  // namespace cogs
