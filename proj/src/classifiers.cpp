#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <vector>

#include "crackle/classifiers.hpp"
#include "crackle/errors.hpp"
#include "crackle/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crackle {

// --- KNN ---------------------------------------------------------------

KnnModel train_knn(std::span<const LabeledSample> samples, std::size_t k) {
    if (k == 0) {
        throw ParameterError("KNN k must be positive");
    }
    if (k > samples.size()) {
        throw ParameterError("KNN k = " + std::to_string(k) + " exceeds sample count " +
                             std::to_string(samples.size()));
    }
    KnnModel model;
    model.k = k;
    model.training_points.assign(samples.begin(), samples.end());
    return model;
}

Prediction knn_predict(const KnnModel& model, const FeatureVector& x) {
    const auto xv = x.values();
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(model.training_points.size());
    for (std::size_t i = 0; i < model.training_points.size(); ++i) {
        const auto tv = model.training_points[i].features.values();
        double d2 = 0.0;
        for (std::size_t d = 0; d < kFeatureCount; ++d) {
            const double diff = xv[d] - tv[d];
            d2 += diff * diff;
        }
        dist.emplace_back(d2, i);
    }
    // Distance ties break toward the lower training-point index.
    std::sort(dist.begin(), dist.end());

    std::size_t crackle_votes = 0;
    for (std::size_t r = 0; r < model.k; ++r) {
        if (model.training_points[dist[r].second].label == Label::crackle) {
            ++crackle_votes;
        }
    }
    const std::size_t normal_votes = model.k - crackle_votes;

    Prediction p;
    // Vote ties go to the negative (normal) class.
    p.label = crackle_votes > normal_votes ? Label::crackle : Label::normal;
    p.confidence = static_cast<double>(std::max(crackle_votes, normal_votes)) /
                   static_cast<double>(model.k);
    return p;
}

// --- AdaBoost ------------------------------------------------------------

namespace {

struct StumpFit {
    DecisionStump stump;
    double error = std::numeric_limits<double>::infinity();
};

// Minimizes the weighted error over every midpoint threshold of every
// dimension, for both polarities. Weights must sum to 1.
StumpFit fit_stump(std::span<const LabeledSample> samples,
                   const std::vector<double>& weights) {
    const std::size_t n = samples.size();
    StumpFit best;

    double total_pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (samples[i].label == Label::crackle) total_pos += weights[i];
    }
    const double total_neg = 1.0 - total_pos;

    std::vector<std::size_t> order(n);
    for (std::size_t dim = 0; dim < kFeatureCount; ++dim) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return samples[a].features.values()[dim] < samples[b].features.values()[dim];
        });

        double left_pos = 0.0;
        double left_neg = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            const std::size_t idx = order[p];
            if (samples[idx].label == Label::crackle) {
                left_pos += weights[idx];
            } else {
                left_neg += weights[idx];
            }
            const double lo = samples[idx].features.values()[dim];
            const double hi = samples[order[p + 1]].features.values()[dim];
            if (!(lo < hi)) {
                continue;  // no midpoint between equal values
            }
            // polarity +1 predicts crackle above the threshold
            const double err_pos = left_pos + (total_neg - left_neg);
            const double err_neg = 1.0 - err_pos;
            const double err = std::min(err_pos, err_neg);
            if (err < best.error) {
                best.error = err;
                best.stump.dimension = dim;
                best.stump.threshold = 0.5 * (lo + hi);
                best.stump.polarity = err_pos <= err_neg ? +1 : -1;
            }
        }
    }
    return best;
}

}  // namespace

AdaBoostModel train_adaboost(std::span<const LabeledSample> samples,
                             std::size_t rounds) {
    const std::size_t n = samples.size();
    if (rounds == 0) {
        throw ParameterError("AdaBoost rounds must be positive");
    }
    bool has_pos = false, has_neg = false;
    for (const auto& s : samples) {
        (s.label == Label::crackle ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw TrainingError("AdaBoost training requires both classes present");
    }

    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    AdaBoostModel model;
    double alpha_sum = 0.0;

    for (std::size_t round = 0; round < rounds; ++round) {
        const StumpFit fit = fit_stump(samples, weights);
        if (!std::isfinite(fit.error)) {
            break;  // no usable split (all dimensions constant)
        }
        if (fit.error >= 0.5) {
            break;  // no stump better than chance under the current weights
        }
        if (fit.error <= 1e-12) {
            // Perfect stump: cap its weight so it dominates every earlier
            // stage, then stop.
            const double capped = std::max(1.0, alpha_sum + 1.0);
            model.stumps.push_back(fit.stump);
            model.stage_weights.push_back(capped);
            model.round_errors.push_back(0.0);
            break;
        }

        const double alpha = 0.5 * std::log((1.0 - fit.error) / fit.error);
        model.stumps.push_back(fit.stump);
        model.stage_weights.push_back(alpha);
        model.round_errors.push_back(fit.error);
        alpha_sum += alpha;

        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int yi = label_sign(samples[i].label);
            const int hi = fit.stump.predict_sign(samples[i].features);
            weights[i] *= std::exp(-alpha * yi * hi);
            wsum += weights[i];
        }
        for (double& w : weights) w /= wsum;
    }

    if (model.stumps.empty()) {
        throw TrainingError("AdaBoost found no stump better than chance");
    }
    return model;
}

Prediction adaboost_predict(const AdaBoostModel& model, const FeatureVector& x) {
    double sum = 0.0;
    double alpha_total = 0.0;
    for (std::size_t t = 0; t < model.stumps.size(); ++t) {
        sum += model.stage_weights[t] * model.stumps[t].predict_sign(x);
        alpha_total += model.stage_weights[t];
    }
    Prediction p;
    // A weighted sum of exactly zero goes to the negative (normal) class.
    p.label = sum > 0.0 ? Label::crackle : Label::normal;
    p.confidence = alpha_total > 0.0 ? std::abs(sum) / alpha_total : 0.0;
    return p;
}

// --- stratified dummy -------------------------------------------------------

DummyModel train_dummy(std::span<const LabeledSample> samples, std::uint64_t seed) {
    if (samples.empty()) {
        throw TrainingError("dummy classifier needs at least 1 sample");
    }
    std::size_t crackles = 0;
    for (const auto& s : samples) {
        if (s.label == Label::crackle) ++crackles;
    }
    DummyModel model;
    model.prior_crackle = static_cast<double>(crackles) / static_cast<double>(samples.size());
    model.prior_normal = 1.0 - model.prior_crackle;
    model.rng_seed = seed;
    return model;
}

Label dummy_predict(const DummyModel& model, std::uint64_t draw_index) {
    Rng rng(derive_seed(model.rng_seed, draw_index));
    return rng.next_double() < model.prior_crackle ? Label::crackle : Label::normal;
}

// --- unified interface --------------------------------------------------------

const char* classifier_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::svm_rbf: return "svm-rbf";
        case ClassifierKind::svm_linear: return "svm-linear";
        case ClassifierKind::knn: return "knn";
        case ClassifierKind::adaboost: return "adaboost";
        case ClassifierKind::dummy: return "dummy";
    }
    return "unknown";
}

ClassifierKind classifier_from_name(const std::string& name) {
    if (name == "svm-rbf") return ClassifierKind::svm_rbf;
    if (name == "svm-linear") return ClassifierKind::svm_linear;
    if (name == "knn") return ClassifierKind::knn;
    if (name == "adaboost") return ClassifierKind::adaboost;
    if (name == "dummy") return ClassifierKind::dummy;
    throw ConfigError("unknown classifier '" + name +
                      "' (expected svm-rbf, svm-linear, knn, adaboost or dummy)");
}

std::string HyperParams::describe(ClassifierKind kind) const {
    char buf[128];
    switch (kind) {
        case ClassifierKind::svm_rbf:
            std::snprintf(buf, sizeof buf, "C=%.6g gamma=%.6g", svm_c, svm_gamma);
            break;
        case ClassifierKind::svm_linear:
            std::snprintf(buf, sizeof buf, "C=%.6g", svm_c);
            break;
        case ClassifierKind::knn:
            std::snprintf(buf, sizeof buf, "k=%zu", knn_k);
            break;
        case ClassifierKind::adaboost:
            std::snprintf(buf, sizeof buf, "rounds=%zu", ada_rounds);
            break;
        case ClassifierKind::dummy:
            std::snprintf(buf, sizeof buf, "stratified");
            break;
    }
    return buf;
}

ModelVariant train_classifier(ClassifierKind kind, std::span<const LabeledSample> samples,
                              const HyperParams& params, std::uint64_t seed) {
    switch (kind) {
        case ClassifierKind::svm_rbf:
            return train_svm(samples, params.svm_c, Kernel::rbf, params.svm_gamma);
        case ClassifierKind::svm_linear:
            return train_svm(samples, params.svm_c, Kernel::linear, params.svm_gamma);
        case ClassifierKind::knn:
            return train_knn(samples, params.knn_k);
        case ClassifierKind::adaboost:
            return train_adaboost(samples, params.ada_rounds);
        case ClassifierKind::dummy:
            return train_dummy(samples, seed);
    }
    throw InternalError("unhandled classifier kind");
}

Prediction predict(const ModelVariant& model, const FeatureVector& x,
                   std::uint64_t draw_index) {
    return std::visit(
        [&](const auto& m) -> Prediction {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, SvmModel>) {
                return svm_predict(m, x);
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                return knn_predict(m, x);
            } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
                return adaboost_predict(m, x);
            } else {
                Prediction p;
                p.label = dummy_predict(m, draw_index);
                p.confidence = p.label == Label::crackle ? m.prior_crackle : m.prior_normal;
                return p;
            }
        },
        model);
}

// --- grid search -----------------------------------------------------------------

namespace {

double crackle_f1(std::span<const Label> truth, std::span<const Label> predicted) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == Label::crackle;
        const bool p = predicted[i] == Label::crackle;
        if (t && p) ++tp;
        if (!t && p) ++fp;
        if (t && !p) ++fn;
    }
    if (tp + fp == 0 || tp + fn == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

GridSearchResult grid_search(std::span<const LabeledSample> samples,
                             ClassifierKind kind, std::span<const HyperParams> grid,
                             std::size_t folds, std::uint64_t seed) {
    if (grid.empty()) {
        throw ParameterError("grid search needs a nonempty grid");
    }
    if (folds < 2) {
        throw ParameterError("grid search needs at least 2 folds");
    }

    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (samples[i].label == Label::crackle ? pos_idx : neg_idx).push_back(i);
    }
    if (pos_idx.size() < folds || neg_idx.size() < folds) {
        throw FoldingError("a fold would contain a single class (" +
                           std::to_string(pos_idx.size()) + " crackle / " +
                           std::to_string(neg_idx.size()) +
                           " normal samples); use fewer folds");
    }

    Rng shuffle_rng(derive_seed(seed, 0));
    shuffle_rng.shuffle(pos_idx);
    shuffle_rng.shuffle(neg_idx);

    // Round-robin stratified folds.
    std::vector<std::vector<std::size_t>> fold_members(folds);
    for (std::size_t p = 0; p < pos_idx.size(); ++p) {
        fold_members[p % folds].push_back(pos_idx[p]);
    }
    for (std::size_t p = 0; p < neg_idx.size(); ++p) {
        fold_members[p % folds].push_back(neg_idx[p]);
    }

    struct FoldData {
        std::vector<LabeledSample> train;
        std::vector<LabeledSample> test;
        std::vector<Label> truth;
    };
    std::vector<FoldData> fold_data(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<bool> held(samples.size(), false);
        for (std::size_t i : fold_members[f]) held[i] = true;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (held[i]) {
                fold_data[f].test.push_back(samples[i]);
                fold_data[f].truth.push_back(samples[i].label);
            } else {
                fold_data[f].train.push_back(samples[i]);
            }
        }
    }

    std::vector<double> mean_f1(grid.size(), 0.0);
    std::exception_ptr error;
    std::size_t error_pt = grid.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t pt = 0; pt < static_cast<std::ptrdiff_t>(grid.size()); ++pt) {
        try {
            double acc = 0.0;
            for (std::size_t f = 0; f < folds; ++f) {
                const auto model = train_classifier(
                    kind, fold_data[f].train, grid[static_cast<std::size_t>(pt)],
                    derive_seed(seed, 1 + static_cast<std::uint64_t>(pt) * folds + f));
                std::vector<Label> pred;
                pred.reserve(fold_data[f].test.size());
                for (std::size_t q = 0; q < fold_data[f].test.size(); ++q) {
                    pred.push_back(predict(model, fold_data[f].test[q].features, q).label);
                }
                acc += crackle_f1(fold_data[f].truth, pred);
            }
            mean_f1[static_cast<std::size_t>(pt)] = acc / static_cast<double>(folds);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(crackle_grid_error)
#endif
            {
                if (static_cast<std::size_t>(pt) < error_pt) {
                    error_pt = static_cast<std::size_t>(pt);
                    error = std::current_exception();
                }
            }
        }
    }
    if (error) std::rethrow_exception(error);

    GridSearchResult result;
    result.total_fits = grid.size() * folds;
    result.best = grid[0];
    result.best_mean_f1 = mean_f1[0];
    for (std::size_t pt = 1; pt < grid.size(); ++pt) {
        if (mean_f1[pt] > result.best_mean_f1) {  // ties keep the earlier point
            result.best_mean_f1 = mean_f1[pt];
            result.best = grid[pt];
        }
    }
    return result;
}

std::vector<HyperParams> default_grid(ClassifierKind kind) {
    std::vector<HyperParams> grid;
    switch (kind) {
        case ClassifierKind::svm_rbf:
            for (int ci = 0; ci < 8; ++ci) {
                for (int gi = 0; gi < 8; ++gi) {
                    HyperParams p;
                    p.svm_c = std::exp2(5.0 + 10.0 * ci / 7.0);
                    p.svm_gamma = std::exp2(-7.0 + gi);
                    grid.push_back(p);
                }
            }
            break;
        case ClassifierKind::svm_linear:
            for (int ci = 0; ci < 8; ++ci) {
                HyperParams p;
                p.svm_c = std::exp2(5.0 + 10.0 * ci / 7.0);
                grid.push_back(p);
            }
            break;
        case ClassifierKind::knn:
            for (std::size_t k = 2; k <= 4; ++k) {
                HyperParams p;
                p.knn_k = k;
                grid.push_back(p);
            }
            break;
        case ClassifierKind::adaboost:
        case ClassifierKind::dummy:
            grid.push_back(HyperParams{});
            break;
    }
    return grid;
}

}  // namespace crackle
