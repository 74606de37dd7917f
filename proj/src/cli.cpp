#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crackle/errors.hpp"
#include "crackle/pipeline.hpp"
#include "crackle/service.hpp"

namespace crackle {

namespace {

// Expands `--config FILE` (key=value lines) into ordinary long options.
// Only keys absent from the explicit arguments are added, so flags always
// override the file.
std::vector<std::string> expand_config_args(int argc, const char* const* argv) {
    std::vector<std::string> args;
    std::string config_path;
    for (int i = 0; i < argc; ++i) {
        const std::string token = argv[i];
        if (token == "--config") {
            if (i + 1 >= argc) {
                throw ConfigError("--config needs a file path");
            }
            config_path = argv[++i];
        } else if (token.rfind("--config=", 0) == 0) {
            config_path = token.substr(9);
        } else {
            args.push_back(token);
        }
    }
    if (config_path.empty()) {
        return args;
    }

    std::ifstream in(config_path);
    if (!in) {
        throw IoError("cannot open config file: " + config_path);
    }
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=', first);
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not key=value: '" + line + "'");
        }
        std::string key = line.substr(first, eq - first);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string value = line.substr(eq + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        value.erase(value.find_last_not_of(" \t") + 1);
        if (key.rfind("--", 0) != 0) key = "--" + key;

        bool overridden = false;
        for (const auto& existing : args) {
            if (existing == key || existing.rfind(key + "=", 0) == 0) {
                overridden = true;
                break;
            }
        }
        if (!overridden) {
            args.push_back(key + "=" + value);
        }
    }
    return args;
}

void add_window_flags(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--window-len", config.window.window_len,
                    "analysis window length in samples")
        ->capture_default_str();
    cmd->add_option("--overlap", config.window.overlap_fraction,
                    "window overlap fraction in [0,1)")
        ->capture_default_str();
    cmd->add_option("--sma-len", config.feature_params.sma_subwindow_len,
                    "sma_fine sub-window length")
        ->capture_default_str();
    cmd->add_option("--sma-stride", config.feature_params.sma_subwindow_stride,
                    "sma_fine sub-window stride")
        ->capture_default_str();
}

void add_training_flags(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--folds", config.grid_folds, "grid-search cross-validation folds")
        ->capture_default_str();
    cmd->add_option("--seed", config.seed, "master random seed")->capture_default_str();
    cmd->add_option("--normals-per-file", config.normals_per_file,
                    "random normal windows sampled per recording")
        ->capture_default_str();
    cmd->add_flag("--no-grid-search", config.no_grid_search,
                  "train with the explicit hyperparameters instead of searching");
    cmd->add_option("--svm-c", config.hyperparams.svm_c, "SVM cost (with --no-grid-search)")
        ->capture_default_str();
    cmd->add_option("--svm-gamma", config.hyperparams.svm_gamma,
                    "RBF gamma (with --no-grid-search)")
        ->capture_default_str();
    cmd->add_option("--knn-k", config.hyperparams.knn_k, "KNN neighbor count")
        ->capture_default_str();
    cmd->add_option("--ada-rounds", config.hyperparams.ada_rounds, "AdaBoost rounds")
        ->capture_default_str();
    cmd->add_flag("--serial", config.serial, "disable OpenMP parallel kernels");
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        throw ConfigError("address must be host:port, got '" + addr + "'");
    }
    try {
        return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError("cannot parse port in '" + addr + "'");
    }
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
    CLI::App app{"crackle - lung sound crackle detection toolkit"};
    app.require_subcommand(1);

    RunConfig config;
    std::string serve_addr = "127.0.0.1:8080";
    std::string config_note;  // stripped before parsing, listed for --help

    auto with_config_file = [&config_note](CLI::App* cmd) {
        cmd->add_option("--config", config_note,
                        "key=value config file; flags override it");
        return cmd;
    };

    auto* train = with_config_file(
        app.add_subcommand("train", "build a corpus and train a classifier"));
    train->add_option("--annotations", config.annotations_path, "annotation CSV")
        ->required();
    train->add_option("--audio", config.audio_paths, "WAV files or directories")
        ->required();
    train->add_option("--out", config.model_path, "output model file (.cklm)")
        ->required();
    train->add_option("--classifier", config.classifier,
                      "svm-rbf | svm-linear | knn | adaboost | dummy")
        ->capture_default_str();
    train->add_option("--corpus-csv", config.corpus_csv_path,
                      "also export the raw feature corpus for audit");
    add_window_flags(train, config);
    add_training_flags(train, config);

    auto* evaluate = with_config_file(
        app.add_subcommand("evaluate", "run the shuffled train-validate protocol"));
    evaluate->add_option("--annotations", config.annotations_path, "annotation CSV")
        ->required();
    evaluate->add_option("--audio", config.audio_paths, "WAV files or directories")
        ->required();
    evaluate->add_option("--classifiers", config.classifiers,
                         "classifiers to evaluate (default: all five)");
    evaluate->add_option("--cycles", config.cycles, "train-validate cycles")
        ->capture_default_str();
    evaluate->add_option("--train-fraction", config.train_fraction,
                         "training share per cycle")
        ->capture_default_str();
    evaluate->add_option("--out-prefix", config.out_prefix,
                         "prefix for the CSV/JSON reports")
        ->capture_default_str();
    add_window_flags(evaluate, config);
    add_training_flags(evaluate, config);

    auto* classify = with_config_file(
        app.add_subcommand("classify", "classify recordings into crackle events"));
    classify->add_option("--model", config.model_path, "trained model file")->required();
    classify->add_option("--out", config.output_path, "output CSV path")->required();
    classify->add_option("--html", config.html_path, "optional self-contained HTML report");
    classify->add_option("inputs", config.audio_paths, "WAV files or directories");
    classify->add_flag("--serial", config.serial, "disable OpenMP parallel kernels");

    auto* synth = with_config_file(
        app.add_subcommand("synth", "generate a synthetic labeled corpus"));
    synth->add_option("--out-dir", config.out_dir, "output directory")
        ->capture_default_str();
    synth->add_option("--recordings", config.synth.num_recordings, "recording count")
        ->capture_default_str();
    synth->add_option("--crackles", config.synth.total_crackles,
                      "total crackle annotations")
        ->capture_default_str();
    synth->add_option("--normals", config.synth.total_normals,
                      "total normal annotations")
        ->capture_default_str();
    synth->add_option("--duration", config.synth.duration_seconds,
                      "seconds per recording")
        ->capture_default_str();
    synth->add_option("--noise-level", config.synth.noise_level, "noise RMS in (0,1]")
        ->capture_default_str();
    synth->add_option("--crackle-amplitude", config.synth.crackle_amplitude,
                      "transient peak amplitude in (0,1]")
        ->capture_default_str();
    synth->add_option("--synth-seed", config.synth.seed, "synthesis seed")
        ->capture_default_str();

    auto* serve = with_config_file(
        app.add_subcommand("serve", "HTTP upload-and-classify endpoint"));
    serve->add_option("--model", config.model_path, "trained model file")
        ->envname("CRACKLE_MODEL");
    serve->add_option("--addr", serve_addr, "bind address host:port")
        ->envname("CRACKLE_ADDR")
        ->capture_default_str();

    std::vector<std::string> expanded;
    try {
        expanded = expand_config_args(argc, argv);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    }
    std::vector<const char*> expanded_argv;
    expanded_argv.reserve(expanded.size());
    for (const auto& arg : expanded) expanded_argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(expanded_argv.size()), expanded_argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : static_cast<int>(ErrorFamily::config);
    }

    try {
        if (train->parsed()) {
            cli_train(config);
            return 0;
        }
        if (evaluate->parsed()) {
            cli_evaluate(config);
            return 0;
        }
        if (classify->parsed()) {
            return cli_classify(config);
        }
        if (synth->parsed()) {
            cli_synth(config);
            return 0;
        }
        if (serve->parsed()) {
            cli_serve(config, serve_addr);
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return static_cast<int>(ErrorFamily::internal);
    }
    return 0;
}

void cli_serve(const RunConfig& config, const std::string& addr) {
    ServiceConfig sc;
    const auto [host, port] = parse_addr(addr);
    sc.host = host;
    sc.port = port;
    sc.model_path = config.model_path;
    run_service(sc);
}

}  // namespace crackle
