#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crackle/features.hpp"

namespace crackle {

enum class Label : std::uint8_t {
    normal = 0,   // negative class
    crackle = 1,  // positive class
};

inline const char* label_name(Label l) {
    return l == Label::crackle ? "crackle" : "normal";
}

inline int label_sign(Label l) { return l == Label::crackle ? +1 : -1; }

struct LabeledSample {
    FeatureVector features;
    Label label = Label::normal;
};

// --- SVM -------------------------------------------------------------------

enum class Kernel : std::uint8_t {
    rbf = 0,
    linear = 1,
};

double kernel_value(Kernel kernel, double gamma, const FeatureVector& u,
                    const FeatureVector& v);

struct SvmModel {
    Kernel kernel = Kernel::rbf;
    double gamma = 0.2;  // rbf only
    double c = 1000.0;
    std::vector<FeatureVector> support_vectors;
    std::vector<double> dual_coefficients;  // alpha_i * y_i per support vector
    double bias = 0.0;
};

struct SmoConfig {
    double tolerance = 1e-3;  // KKT violation threshold
    // Large enough for the big-C corner of the default grid on heavily
    // overlapping data; genuine pathologies still error out.
    std::size_t max_pair_updates = 20'000'000;
};

// Solves the soft-margin dual with sequential minimal optimization; the
// working pair is the maximal KKT violator. Throws TrainingError for
// single-class input and ConvergenceError when the update cap is hit.
SvmModel train_svm(std::span<const LabeledSample> samples, double c, Kernel kernel,
                   double gamma, const SmoConfig& config = {});

// sum_i dual_i * K(sv_i, x) + bias; the sign gives the class.
double svm_decision(const SvmModel& model, const FeatureVector& x);

// --- KNN -------------------------------------------------------------------

struct KnnModel {
    std::size_t k = 3;
    std::vector<LabeledSample> training_points;
};

KnnModel train_knn(std::span<const LabeledSample> samples, std::size_t k);

// --- AdaBoost ----------------------------------------------------------------

struct DecisionStump {
    std::size_t dimension = 0;
    double threshold = 0.0;
    int polarity = +1;  // predicted sign for values above the threshold

    int predict_sign(const FeatureVector& x) const {
        return x.values()[dimension] > threshold ? polarity : -polarity;
    }
};

struct AdaBoostModel {
    std::vector<DecisionStump> stumps;
    std::vector<double> stage_weights;
    // Weighted error of each stump at the round it was fit (kept so the
    // training-error bound can be audited).
    std::vector<double> round_errors;
};

AdaBoostModel train_adaboost(std::span<const LabeledSample> samples,
                             std::size_t rounds = 50);

// --- stratified dummy --------------------------------------------------------

struct DummyModel {
    double prior_normal = 0.5;
    double prior_crackle = 0.5;
    std::uint64_t rng_seed = 0;
};

DummyModel train_dummy(std::span<const LabeledSample> samples, std::uint64_t seed);

// Label drawn from the class priors; deterministic given (model, draw_index).
Label dummy_predict(const DummyModel& model, std::uint64_t draw_index);

// --- unified prediction ------------------------------------------------------

struct Prediction {
    Label label = Label::normal;
    double confidence = 0.0;  // confidence in the predicted label, [0, 1]
};

Prediction svm_predict(const SvmModel& model, const FeatureVector& x);
Prediction knn_predict(const KnnModel& model, const FeatureVector& x);
Prediction adaboost_predict(const AdaBoostModel& model, const FeatureVector& x);

using ModelVariant = std::variant<SvmModel, KnnModel, AdaBoostModel, DummyModel>;

enum class ClassifierKind : std::uint8_t {
    svm_rbf = 0,
    svm_linear = 1,
    knn = 2,
    adaboost = 3,
    dummy = 4,
};

const char* classifier_name(ClassifierKind kind);
ClassifierKind classifier_from_name(const std::string& name);

struct HyperParams {
    double svm_c = 1000.0;
    double svm_gamma = 0.2;  // 1 / feature count by default
    std::size_t knn_k = 3;
    std::size_t ada_rounds = 50;

    std::string describe(ClassifierKind kind) const;
};

ModelVariant train_classifier(ClassifierKind kind, std::span<const LabeledSample> samples,
                              const HyperParams& params, std::uint64_t seed);

// draw_index only matters for the dummy variant.
Prediction predict(const ModelVariant& model, const FeatureVector& x,
                   std::uint64_t draw_index = 0);

// --- grid search ---------------------------------------------------------------

struct GridSearchResult {
    HyperParams best;
    double best_mean_f1 = 0.0;
    std::size_t total_fits = 0;
};

// Stratified k-fold cross-validation over the grid, scored by crackle-class
// F1; ties keep the earlier grid point. total_fits == grid size * folds.
GridSearchResult grid_search(std::span<const LabeledSample> samples,
                             ClassifierKind kind, std::span<const HyperParams> grid,
                             std::size_t folds, std::uint64_t seed);

// Default grid per classifier: 8 C values log-spaced in [2^5, 2^15] crossed
// with 8 gamma values log-spaced in [2^-7, 2^0] for the SVMs (64 points),
// k in {2, 3, 4} for KNN, a single point otherwise.
std::vector<HyperParams> default_grid(ClassifierKind kind);

}  // namespace crackle
