#include "crackle/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "crackle/errors.hpp"
#include "crackle/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crackle {

Metrics compute_metrics(std::span<const Label> truth, std::span<const Label> predicted,
                        Label positive) {
    if (truth.size() != predicted.size()) {
        throw ValidationError("metrics need equal-length label sequences (" +
                              std::to_string(truth.size()) + " vs " +
                              std::to_string(predicted.size()) + ")");
    }
    if (truth.empty()) {
        throw ValidationError("metrics need at least one prediction");
    }

    Metrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == positive;
        const bool p = predicted[i] == positive;
        if (t && p) ++m.tp;
        else if (!t && p) ++m.fp;
        else if (t && !p) ++m.fn;
        else ++m.tn;
    }
    if (m.tp + m.fp > 0) {
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    } else {
        m.degenerate = true;
    }
    if (m.tp + m.fn > 0) {
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    } else {
        m.degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.degenerate = true;
    }
    return m;
}

SplitIndices stratified_split(std::span<const LabeledSample> samples,
                              double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw ParameterError("train_fraction must lie strictly inside (0, 1)");
    }
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (samples[i].label == Label::crackle ? pos_idx : neg_idx).push_back(i);
    }
    if (pos_idx.size() < 2 || neg_idx.size() < 2) {
        throw SplitError("both classes need at least 2 samples to split (" +
                         std::to_string(pos_idx.size()) + " crackle / " +
                         std::to_string(neg_idx.size()) + " normal)");
    }

    SplitIndices split;
    std::uint64_t class_tag = 0;
    for (auto* idx : {&pos_idx, &neg_idx}) {
        Rng rng(derive_seed(seed, class_tag++));
        rng.shuffle(*idx);
        const auto n = static_cast<double>(idx->size());
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
        n_train = std::clamp<std::size_t>(n_train, 1, idx->size() - 1);
        split.train.insert(split.train.end(), idx->begin(),
                           idx->begin() + static_cast<std::ptrdiff_t>(n_train));
        split.validation.insert(split.validation.end(),
                                idx->begin() + static_cast<std::ptrdiff_t>(n_train),
                                idx->end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

namespace {

AggregateStat aggregate(const std::vector<Metrics>& per_cycle,
                        double Metrics::* field) {
    AggregateStat stat;
    const double n = static_cast<double>(per_cycle.size());
    for (const auto& m : per_cycle) stat.mean += m.*field;
    stat.mean /= n;
    for (const auto& m : per_cycle) {
        const double d = m.*field - stat.mean;
        stat.std += d * d;
    }
    stat.std = std::sqrt(stat.std / n);
    return stat;
}

Metrics run_one_cycle(const Corpus& corpus, const ProtocolConfig& config,
                      const std::vector<HyperParams>& grid, std::uint64_t cycle_seed) {
    const auto split =
        stratified_split(corpus.samples, config.train_fraction, derive_seed(cycle_seed, 0));

    std::vector<FeatureVector> train_features;
    train_features.reserve(split.train.size());
    for (std::size_t i : split.train) {
        train_features.push_back(corpus.samples[i].features);
    }
    const ScalerStats scaler = fit_scaler(train_features);

    std::vector<LabeledSample> train_scaled;
    train_scaled.reserve(split.train.size());
    for (std::size_t i : split.train) {
        train_scaled.push_back(
            {apply_scaler(scaler, corpus.samples[i].features), corpus.samples[i].label});
    }

    const auto search = grid_search(train_scaled, config.kind, grid, config.grid_folds,
                                    derive_seed(cycle_seed, 1));
    const auto model = train_classifier(config.kind, train_scaled, search.best,
                                        derive_seed(cycle_seed, 2));

    std::vector<Label> truth, predicted;
    truth.reserve(split.validation.size());
    predicted.reserve(split.validation.size());
    for (std::size_t q = 0; q < split.validation.size(); ++q) {
        const auto& sample = corpus.samples[split.validation[q]];
        truth.push_back(sample.label);
        predicted.push_back(
            predict(model, apply_scaler(scaler, sample.features), q).label);
    }
    return compute_metrics(truth, predicted);
}

}  // namespace

EvalReport run_protocol(const Corpus& corpus, const ProtocolConfig& config) {
    if (config.cycles == 0) {
        throw ParameterError("protocol needs at least one cycle");
    }
    const std::vector<HyperParams> grid =
        config.grid.empty() ? default_grid(config.kind) : config.grid;

    EvalReport report;
    report.config = config;
    report.config.grid = grid;
    report.per_cycle.resize(config.cycles);

    std::exception_ptr error;
    std::size_t error_cycle = config.cycles;

    const bool parallel = config.exec == Exec::parallel;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(config.cycles); ++c) {
        try {
            report.per_cycle[static_cast<std::size_t>(c)] = run_one_cycle(
                corpus, config, grid,
                derive_seed(config.seed, static_cast<std::uint64_t>(c)));
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(crackle_protocol_error)
#endif
            {
                if (static_cast<std::size_t>(c) < error_cycle) {
                    error_cycle = static_cast<std::size_t>(c);
                    error = std::current_exception();
                }
            }
        }
    }
    (void)parallel;
    if (error) {
        try {
            std::rethrow_exception(error);
        } catch (const Error& e) {
            throw Error(e.family(),
                        "cycle " + std::to_string(error_cycle) + ": " + e.what());
        } catch (const std::exception& e) {
            throw InternalError("cycle " + std::to_string(error_cycle) + ": " + e.what());
        }
    }

    report.precision = aggregate(report.per_cycle, &Metrics::precision);
    report.recall = aggregate(report.per_cycle, &Metrics::recall);
    report.f1 = aggregate(report.per_cycle, &Metrics::f1);
    return report;
}

std::array<EvalReport, kFeatureCount> univariate_feature_scores(
    const Corpus& corpus, const ProtocolConfig& config) {
    std::array<EvalReport, kFeatureCount> reports;
    for (std::size_t dim = 0; dim < kFeatureCount; ++dim) {
        Corpus masked = corpus;
        for (auto& sample : masked.samples) {
            auto v = sample.features.values();
            for (std::size_t d = 0; d < kFeatureCount; ++d) {
                if (d != dim) v[d] = 0.0;
            }
            sample.features = FeatureVector::from_values(v, sample.features.scaled);
        }
        reports[dim] = run_protocol(masked, config);
    }
    return reports;
}

}  // namespace crackle
