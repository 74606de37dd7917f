#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crackle/audio.hpp"
#include "crackle/classifiers.hpp"
#include "crackle/features.hpp"

namespace crackle {

struct Annotation {
    std::string source_id;
    double start_time = 0.0;  // seconds
    double end_time = 0.0;    // seconds, > start_time
    Label label = Label::crackle;
};

inline constexpr const char* kAnnotationCsvHeader = "source_id,start_time,end_time,label";

// Parses the annotation CSV (header line exactly kAnnotationCsvHeader, then
// `source_id,start_time,end_time,label` records). Throws ParseError /
// ValidationError carrying the offending line number.
std::vector<Annotation> parse_annotations(std::istream& in);
std::vector<Annotation> parse_annotations_text(const std::string& text);
std::vector<Annotation> parse_annotations_file(const std::string& path);

std::string annotations_to_csv(std::span<const Annotation> annotations);

// The window_len-sample window centered on the annotation's time midpoint,
// clamped to the recording bounds. The annotation must be labeled crackle.
Window extract_crackle_window(const AudioRecording& recording,
                              const Annotation& annotation,
                              std::size_t window_len = 4096);

// `count` windows at seeded-uniform random offsets, none overlapping any
// crackle annotation interval padded by half a window per side, offsets
// mutually distinct. Throws CapacityError when the crackle-free extent
// cannot host `count` windows.
std::vector<Window> sample_normal_windows(const AudioRecording& recording,
                                          std::span<const Annotation> crackle_annotations,
                                          std::size_t count, std::uint64_t seed,
                                          std::size_t window_len = 4096);

struct SampleProvenance {
    std::string source_id;
    std::size_t start_sample = 0;
};

struct Corpus {
    std::vector<LabeledSample> samples;  // unscaled features
    std::vector<SampleProvenance> provenance;
    std::size_t crackle_count = 0;
    std::size_t normal_count = 0;
};

// One crackle window per crackle annotation, one centered window per normal
// annotation, plus `normals_per_file` randomly sampled normal windows per
// recording. Features extracted, scaling deferred to the training split.
// Sample order is (source_id, start_sample), independent of input order.
Corpus build_corpus(std::span<const AudioRecording> recordings,
                    std::span<const Annotation> annotations,
                    std::size_t normals_per_file, std::uint64_t seed,
                    const WindowParams& window_params = {},
                    const FeatureParams& feature_params = {},
                    Exec exec = Exec::parallel);

// Audit export: source_id,start_sample,label plus the five raw feature values.
std::string corpus_to_csv(const Corpus& corpus);

// --- synthetic corpus ------------------------------------------------------

// Band-limited noise recordings (breathing surrogate) with seeded damped-
// oscillation transients standing in for crackles. Per-recording gain and a
// slow amplitude modulation vary the noise floor so no single feature
// separates the classes cleanly.
struct SynthSpec {
    std::size_t num_recordings = 7;
    std::size_t total_crackles = 175;
    std::size_t total_normals = 208;  // emitted as normal annotations
    double duration_seconds = 15.0;
    std::uint32_t sample_rate = 44100;
    double noise_level = 0.05;        // noise RMS before gain, in (0, 1]
    double crackle_amplitude = 0.15;  // transient peak amplitude, in (0, 1]
    double gain_low = 0.6;
    double gain_high = 1.4;
    double breath_depth = 0.5;   // amplitude modulation depth, [0, 1)
    double breath_rate_hz = 0.25;
    double crackle_freq_low_hz = 600.0;
    double crackle_freq_high_hz = 1200.0;
    double crackle_duration_low = 0.005;   // seconds
    double crackle_duration_high = 0.040;  // seconds
    std::uint64_t seed = 42;
};

struct SyntheticCorpus {
    std::vector<AudioRecording> recordings;
    std::vector<Annotation> annotations;
};

SyntheticCorpus generate_synthetic_corpus(const SynthSpec& spec);

// Low-level pieces, also used directly by tests.
AudioRecording synth_noise_recording(std::string source_id, double seconds,
                                     std::uint32_t sample_rate, double noise_rms,
                                     double gain, double breath_depth,
                                     double breath_rate_hz, double breath_phase,
                                     std::uint64_t seed);

// Adds an exponentially damped sinusoid starting at t_seconds.
void inject_crackle(AudioRecording& recording, double t_seconds,
                    double duration_seconds, double amplitude, double freq_hz);

}  // namespace crackle
