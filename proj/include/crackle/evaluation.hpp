#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "crackle/classifiers.hpp"
#include "crackle/dataset.hpp"

namespace crackle {

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    // Set when a zero denominator forced a rate to 0.
    bool degenerate = false;
};

// Confusion counts and derived rates for the positive label.
Metrics compute_metrics(std::span<const Label> truth, std::span<const Label> predicted,
                        Label positive = Label::crackle);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// Per-class proportional split at seeded random; the train share per class is
// within one sample of train_fraction. Throws ParameterError for fractions
// outside (0, 1) and SplitError when a class has fewer than 2 samples.
SplitIndices stratified_split(std::span<const LabeledSample> samples,
                              double train_fraction, std::uint64_t seed);

struct AggregateStat {
    double mean = 0.0;
    double std = 0.0;  // population std across cycles
};

struct ProtocolConfig {
    ClassifierKind kind = ClassifierKind::svm_rbf;
    std::vector<HyperParams> grid;  // empty -> default_grid(kind)
    std::size_t cycles = 100;
    double train_fraction = 0.7;
    std::size_t grid_folds = 3;
    std::uint64_t seed = 1;
    Exec exec = Exec::parallel;
};

struct EvalReport {
    std::vector<Metrics> per_cycle;
    AggregateStat precision;
    AggregateStat recall;
    AggregateStat f1;
    ProtocolConfig config;
};

// The shuffled train-validate protocol: per cycle a fresh stratified split,
// scaler fitted on the training rows only, grid search within the training
// rows, a final fit with the winning parameters, metrics on the held-out
// rows. Cycles run independently off derived seeds; the report is assembled
// in cycle order, so results do not depend on the schedule.
EvalReport run_protocol(const Corpus& corpus, const ProtocolConfig& config);

// Runs the full protocol once per feature dimension with the other four
// dimensions zeroed out, quantifying how well each feature separates the
// classes on its own.
std::array<EvalReport, kFeatureCount> univariate_feature_scores(
    const Corpus& corpus, const ProtocolConfig& config);

}  // namespace crackle
