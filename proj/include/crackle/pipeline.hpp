#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crackle/audio.hpp"
#include "crackle/dataset.hpp"
#include "crackle/evaluation.hpp"
#include "crackle/model_io.hpp"

namespace crackle {

// One classified window of one recording.
struct ClassificationResult {
    std::string source_id;
    double start_time = 0.0;
    double end_time = 0.0;  // start_time + window_len / sample_rate
    Label label = Label::normal;
    double confidence = 0.0;
};

// Segment -> extract features -> apply the model's scaler -> predict, one
// result per window in time order. Windowing comes from the model metadata.
std::vector<ClassificationResult> classify_recording(const TrainedModel& model,
                                                     const AudioRecording& recording,
                                                     Exec exec = Exec::parallel);

// Effective run configuration; echoed into every output artifact.
struct RunConfig {
    WindowParams window;
    FeatureParams feature_params;
    std::string classifier = "svm-rbf";
    std::vector<std::string> classifiers;  // evaluate: defaults to all five
    std::size_t cycles = 100;
    double train_fraction = 0.7;
    std::size_t grid_folds = 3;
    std::uint64_t seed = 1;
    std::size_t normals_per_file = 0;
    bool no_grid_search = false;  // train with explicit hyperparameters instead
    HyperParams hyperparams;
    bool serial = false;

    // synth
    SynthSpec synth;

    // io
    std::string annotations_path;
    std::vector<std::string> audio_paths;  // files or directories
    std::string model_path;
    std::string output_path;
    std::string html_path;
    std::string out_prefix = "report";
    std::string out_dir = ".";
    std::string corpus_csv_path;  // optional raw-feature audit export

    Exec exec() const { return serial ? Exec::serial : Exec::parallel; }
    std::string echo() const;  // deterministic key=value line
};

// CLI verb bodies. They throw crackle::Error on failure; cli_run maps the
// error family to the process exit code.
void cli_train(const RunConfig& config);
void cli_evaluate(const RunConfig& config);
int cli_classify(const RunConfig& config);  // nonzero when some inputs failed
void cli_synth(const RunConfig& config);
void cli_serve(const RunConfig& config, const std::string& addr);

// Argument parsing + dispatch; returns the process exit code.
int cli_run(int argc, const char* const* argv);

// --- report emitters --------------------------------------------------------

std::string results_to_csv(std::span<const ClassificationResult> results,
                           const std::string& config_echo);

using NamedReport = std::pair<std::string, EvalReport>;

std::string eval_reports_to_csv(std::span<const NamedReport> reports,
                                const std::string& config_echo);
std::string eval_reports_to_json(std::span<const NamedReport> reports,
                                 const std::string& config_echo);
// Printable table: classifier, precision +- std, recall +- std, F1 +- std.
std::string eval_summary_table(std::span<const NamedReport> reports);

struct RecordingResults {
    const AudioRecording* recording = nullptr;
    std::span<const ClassificationResult> results;
};

// Self-contained HTML page plotting each waveform (downsampled to at most
// 4000 points) with crackle windows highlighted.
std::string html_report(std::span<const RecordingResults> recordings);

void write_text_file_atomic(const std::string& path, const std::string& content);

// Expands files/directories into a sorted list of .wav paths.
std::vector<std::string> collect_wav_paths(std::span<const std::string> inputs);

}  // namespace crackle
