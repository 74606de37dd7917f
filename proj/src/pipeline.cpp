#include "crackle/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>

#include "crackle/errors.hpp"
#include "crackle/rng.hpp"

namespace crackle {

std::vector<ClassificationResult> classify_recording(const TrainedModel& model,
                                                     const AudioRecording& recording,
                                                     Exec exec) {
    const auto windows = segment_windows(recording, model.meta.window);
    std::vector<FeatureVector> features;
    try {
        features = extract_features_batch(windows, model.meta.feature_params, exec);
    } catch (const Error& e) {
        throw Error(e.family(), "classifying '" + recording.source_id + "': " + e.what());
    }

    const double window_seconds =
        static_cast<double>(model.meta.window.window_len) / recording.sample_rate;

    std::vector<ClassificationResult> results(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto scaled = apply_scaler(model.scaler, features[i]);
        const Prediction p = predict(model.variant, scaled, i);
        results[i] = {recording.source_id, windows[i].start_time,
                      windows[i].start_time + window_seconds, p.label, p.confidence};
    }
    return results;
}

std::string RunConfig::echo() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "window_len=%zu overlap=%.6g sma_len=%zu sma_stride=%zu "
                  "classifier=%s cycles=%zu train_fraction=%.6g folds=%zu seed=%llu "
                  "normals_per_file=%zu",
                  window.window_len, window.overlap_fraction,
                  feature_params.sma_subwindow_len, feature_params.sma_subwindow_stride,
                  classifier.c_str(), cycles, train_fraction, grid_folds,
                  static_cast<unsigned long long>(seed), normals_per_file);
    return buf;
}

std::vector<std::string> collect_wav_paths(std::span<const std::string> inputs) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    for (const auto& input : inputs) {
        if (fs::is_directory(input)) {
            std::vector<std::string> dir_paths;
            for (const auto& entry : fs::directory_iterator(input)) {
                if (entry.is_regular_file() && entry.path().extension() == ".wav") {
                    dir_paths.push_back(entry.path().string());
                }
            }
            std::sort(dir_paths.begin(), dir_paths.end());
            paths.insert(paths.end(), dir_paths.begin(), dir_paths.end());
        } else if (fs::exists(input)) {
            paths.push_back(input);
        } else {
            throw IoError("input path does not exist: " + input);
        }
    }
    return paths;
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const std::string tmp = path + ".tmp";
    {
        std::FILE* f = std::fopen(tmp.c_str(), "wb");
        if (f == nullptr) {
            throw IoError("cannot write file: " + tmp);
        }
        const std::size_t written = std::fwrite(content.data(), 1, content.size(), f);
        std::fclose(f);
        if (written != content.size()) {
            throw IoError("short write: " + tmp);
        }
    }
    fs::rename(tmp, path);
}

namespace {

void warn_unusual_rate(const AudioRecording& rec) {
    if (rec.sample_rate != 44100) {
        std::fprintf(stderr,
                     "warning: '%s' is %u Hz; windowing is in samples and feature "
                     "scales were characterized at 44100 Hz\n",
                     rec.source_id.c_str(), rec.sample_rate);
    }
}

std::vector<AudioRecording> load_recordings(const RunConfig& config) {
    const auto paths = collect_wav_paths(config.audio_paths);
    std::vector<AudioRecording> recordings;
    recordings.reserve(paths.size());
    for (const auto& p : paths) {
        recordings.push_back(decode_wav_file(p));
        warn_unusual_rate(recordings.back());
    }
    return recordings;
}

Corpus load_corpus(const RunConfig& config) {
    const auto annotations = parse_annotations_file(config.annotations_path);
    const auto recordings = load_recordings(config);
    return build_corpus(recordings, annotations, config.normals_per_file, config.seed,
                        config.window, config.feature_params, config.exec());
}

std::vector<HyperParams> grid_for(const RunConfig& config, ClassifierKind kind) {
    if (config.no_grid_search) {
        return {config.hyperparams};
    }
    return default_grid(kind);
}

}  // namespace

void cli_train(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();

    const Corpus corpus = load_corpus(config);
    if (!config.corpus_csv_path.empty()) {
        write_text_file_atomic(config.corpus_csv_path, corpus_to_csv(corpus));
    }
    const ClassifierKind kind = classifier_from_name(config.classifier);

    std::vector<FeatureVector> raw;
    raw.reserve(corpus.samples.size());
    for (const auto& s : corpus.samples) raw.push_back(s.features);
    const ScalerStats scaler = fit_scaler(raw);

    std::vector<LabeledSample> scaled;
    scaled.reserve(corpus.samples.size());
    for (const auto& s : corpus.samples) {
        scaled.push_back({apply_scaler(scaler, s.features), s.label});
    }

    const auto grid = grid_for(config, kind);
    const auto search =
        grid_search(scaled, kind, grid, config.grid_folds, derive_seed(config.seed, 1));
    const auto variant =
        train_classifier(kind, scaled, search.best, derive_seed(config.seed, 2));

    TrainedModel model;
    model.variant = variant;
    model.scaler = scaler;
    model.meta.kind = kind;
    model.meta.hyperparams = search.best;
    model.meta.window = config.window;
    model.meta.feature_params = config.feature_params;
    save_model_file(model, config.model_path);

    const auto t1 = std::chrono::steady_clock::now();
    const double wall =
        std::chrono::duration_cast<std::chrono::duration<double>>(t1 - t0).count();

    std::printf("trained %s on %zu samples (%zu crackle / %zu normal)\n",
                classifier_name(kind), corpus.samples.size(), corpus.crackle_count,
                corpus.normal_count);
    std::printf("grid search: %zu fits, best %s (mean F1 %.3f)\n", search.total_fits,
                search.best.describe(kind).c_str(), search.best_mean_f1);
    std::printf("model written to %s (%.2f s wall time)\n", config.model_path.c_str(),
                wall);
    std::printf("config: %s\n", config.echo().c_str());
}

void cli_evaluate(const RunConfig& config) {
    const Corpus corpus = load_corpus(config);

    std::vector<std::string> names = config.classifiers;
    if (names.empty()) {
        names = {"svm-rbf", "knn", "adaboost", "svm-linear", "dummy"};
    }

    std::vector<NamedReport> reports;
    for (const auto& name : names) {
        ProtocolConfig pc;
        pc.kind = classifier_from_name(name);
        pc.grid = grid_for(config, pc.kind);
        pc.cycles = config.cycles;
        pc.train_fraction = config.train_fraction;
        pc.grid_folds = config.grid_folds;
        pc.seed = config.seed;
        pc.exec = config.exec();
        reports.emplace_back(name, run_protocol(corpus, pc));
    }

    const std::string echo = config.echo();
    write_text_file_atomic(config.out_prefix + ".csv", eval_reports_to_csv(reports, echo));
    write_text_file_atomic(config.out_prefix + ".json",
                           eval_reports_to_json(reports, echo));
    std::printf("%s", eval_summary_table(reports).c_str());
    std::printf("reports written to %s.csv and %s.json\n", config.out_prefix.c_str(),
                config.out_prefix.c_str());
}

int cli_classify(const RunConfig& config) {
    const TrainedModel model = load_model_file(config.model_path);
    const auto paths = collect_wav_paths(config.audio_paths);

    std::vector<AudioRecording> recordings;
    std::vector<std::vector<ClassificationResult>> per_recording;
    std::vector<ClassificationResult> all;
    int failures = 0;

    for (const auto& path : paths) {
        try {
            AudioRecording rec = decode_wav_file(path);
            warn_unusual_rate(rec);
            auto results = classify_recording(model, rec, config.exec());
            all.insert(all.end(), results.begin(), results.end());
            recordings.push_back(std::move(rec));
            per_recording.push_back(std::move(results));
        } catch (const Error& e) {
            std::fprintf(stderr, "error: %s: %s\n", path.c_str(), e.what());
            ++failures;
        }
    }

    write_text_file_atomic(config.output_path, results_to_csv(all, config.echo()));
    if (!config.html_path.empty()) {
        std::vector<RecordingResults> rr;
        rr.reserve(recordings.size());
        for (std::size_t i = 0; i < recordings.size(); ++i) {
            rr.push_back({&recordings[i], per_recording[i]});
        }
        write_text_file_atomic(config.html_path, html_report(rr));
    }

    std::size_t crackles = 0;
    for (const auto& r : all) {
        if (r.label == Label::crackle) ++crackles;
    }
    std::printf("classified %zu windows across %zu recordings (%zu crackle)\n",
                all.size(), per_recording.size(), crackles);
    std::printf("results written to %s\n", config.output_path.c_str());
    return failures == 0 ? 0 : static_cast<int>(ErrorFamily::data);
}

void cli_synth(const RunConfig& config) {
    namespace fs = std::filesystem;
    const auto corpus = generate_synthetic_corpus(config.synth);
    fs::create_directories(config.out_dir);
    for (const auto& rec : corpus.recordings) {
        write_wav_file(rec, (fs::path(config.out_dir) / (rec.source_id + ".wav")).string(),
                       WavSampleFormat::float32);
    }
    write_text_file_atomic((fs::path(config.out_dir) / "annotations.csv").string(),
                           annotations_to_csv(corpus.annotations));

    // The annotation CSV has a fixed header, so the config echo gets its own
    // manifest file.
    char manifest[512];
    std::snprintf(manifest, sizeof manifest,
                  "recordings=%zu crackles=%zu normals=%zu duration=%.6g "
                  "sample_rate=%u noise_level=%.6g crackle_amplitude=%.6g seed=%llu\n",
                  config.synth.num_recordings, config.synth.total_crackles,
                  config.synth.total_normals, config.synth.duration_seconds,
                  config.synth.sample_rate, config.synth.noise_level,
                  config.synth.crackle_amplitude,
                  static_cast<unsigned long long>(config.synth.seed));
    write_text_file_atomic((fs::path(config.out_dir) / "manifest.txt").string(),
                           manifest);

    std::size_t crackles = 0;
    for (const auto& a : corpus.annotations) {
        if (a.label == Label::crackle) ++crackles;
    }
    std::printf("wrote %zu recordings and %zu annotations (%zu crackle) to %s\n",
                corpus.recordings.size(), corpus.annotations.size(), crackles,
                config.out_dir.c_str());
}

}  // namespace crackle
