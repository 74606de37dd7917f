#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "crackle/classifiers.hpp"
#include "crackle/errors.hpp"

namespace crackle {

namespace {

// Dual coefficients below this are treated as zero when collecting
// support vectors.
constexpr double kSvThreshold = 1e-12;

double squared_distance(const FeatureVector& u, const FeatureVector& v) {
    const auto a = u.values();
    const auto b = v.values();
    double acc = 0.0;
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return acc;
}

double dot(const FeatureVector& u, const FeatureVector& v) {
    const auto a = u.values();
    const auto b = v.values();
    double acc = 0.0;
    for (std::size_t d = 0; d < kFeatureCount; ++d) acc += a[d] * b[d];
    return acc;
}

}  // namespace

double kernel_value(Kernel kernel, double gamma, const FeatureVector& u,
                    const FeatureVector& v) {
    if (kernel == Kernel::linear) {
        return dot(u, v);
    }
    return std::exp(-gamma * squared_distance(u, v));
}

SvmModel train_svm(std::span<const LabeledSample> samples, double c, Kernel kernel,
                   double gamma, const SmoConfig& config) {
    const std::size_t n = samples.size();
    if (n < 2) {
        throw TrainingError("SVM needs at least 2 samples, got " + std::to_string(n));
    }
    if (c <= 0.0) {
        throw ParameterError("SVM cost C must be positive");
    }
    if (kernel == Kernel::rbf && gamma <= 0.0) {
        throw ParameterError("RBF gamma must be positive");
    }

    std::vector<int> y(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!samples[i].features.scaled) {
            throw TrainingError("SVM training requires scaled features");
        }
        y[i] = label_sign(samples[i].label);
        (y[i] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw TrainingError("SVM training requires both classes present");
    }

    // Full kernel matrix; training sets here are a few hundred points.
    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double kij =
                kernel_value(kernel, gamma, samples[i].features, samples[j].features);
            kmat[i * n + j] = kij;
            kmat[j * n + i] = kij;
        }
    }

    std::vector<double> diag(n);
    for (std::size_t t = 0; t < n; ++t) diag[t] = kmat[t * n + t];

    std::vector<double> alpha(n, 0.0);
    // Gradient of the (minimization-form) dual: G_i = sum_j y_i y_j K_ij a_j - 1.
    std::vector<double> grad(n, -1.0);

    auto in_up = [&](std::size_t t) {
        return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
    };
    auto in_low = [&](std::size_t t) {
        return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
    };

    auto reconstruct_gradient = [&]() {
        for (std::size_t t = 0; t < n; ++t) grad[t] = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (alpha[j] == 0.0) continue;
            const double w = alpha[j] * y[j];
            const double* krow = &kmat[j * n];
            for (std::size_t t = 0; t < n; ++t) {
                grad[t] += y[t] * w * krow[t];
            }
        }
    };

    // Active-set bookkeeping: variables stuck at a bound and far from
    // violating get shrunk out of the selection and update loops. Gradients
    // of shrunk variables go stale, so termination always re-checks the
    // full problem on a reconstructed gradient.
    std::vector<std::size_t> active(n);
    for (std::size_t t = 0; t < n; ++t) active[t] = t;
    const std::size_t shrink_interval = std::min<std::size_t>(n, 1000);
    std::size_t since_shrink_check = 0;

    // Working pair: i is the maximal KKT violator over I_up; j is chosen
    // among the violated I_low side for maximal objective decrease
    // (second-order rule). Plain max-violating-pair zigzags badly at the
    // large-C end of the grid.
    std::size_t updates = 0;
    double residual = 0.0;
    while (true) {
        double m = -std::numeric_limits<double>::infinity();
        double big_m = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t : active) {
            const double score = -y[t] * grad[t];
            if (in_up(t) && score > m) {
                m = score;
                i = t;
            }
            if (in_low(t) && score < big_m) {
                big_m = score;
            }
        }
        residual = m - big_m;
        if (!(residual > config.tolerance)) {
            if (active.size() == n) {
                break;  // full KKT satisfied within tolerance
            }
            // The shrunk problem converged; verify against the whole set.
            reconstruct_gradient();
            active.resize(n);
            for (std::size_t t = 0; t < n; ++t) active[t] = t;
            since_shrink_check = 0;
            continue;
        }
        if (updates >= config.max_pair_updates) {
            throw ConvergenceError("SMO did not converge", updates, residual);
        }
        ++updates;

        if (++since_shrink_check >= shrink_interval && active.size() > 2) {
            since_shrink_check = 0;
            std::size_t kept = 0;
            for (std::size_t t : active) {
                const double score = -y[t] * grad[t];
                const bool bounded = alpha[t] == 0.0 || alpha[t] == c;
                const bool up_quiet = !in_up(t) || score < big_m - config.tolerance;
                const bool low_quiet = !in_low(t) || score > m + config.tolerance;
                if (!(bounded && up_quiet && low_quiet)) {
                    active[kept++] = t;
                }
            }
            if (kept >= 2) active.resize(kept);
            continue;  // reselect within the reduced set
        }

        const double* krow_i = &kmat[i * n];
        std::size_t j = n;
        double best_gain = -1.0;
        double quad_j = 1.0;
        for (std::size_t t : active) {
            if (!in_low(t)) continue;
            const double b = m - (-y[t] * grad[t]);
            if (b <= 0.0) continue;
            double quad = krow_i[i] + diag[t] - 2.0 * krow_i[t];
            if (quad <= 0.0) quad = 1e-12;
            const double gain = b * b / quad;
            if (gain > best_gain) {
                best_gain = gain;
                j = t;
                quad_j = quad;
            }
        }
        if (j == n) {
            if (active.size() == n) {
                break;  // no admissible partner left
            }
            reconstruct_gradient();
            active.resize(n);
            for (std::size_t t = 0; t < n; ++t) active[t] = t;
            since_shrink_check = 0;
            continue;
        }

        // Two-variable subproblem along the equality constraint:
        // da_i = y_i * t, da_j = -y_j * t with t > 0.
        double t_step = (m - (-y[j] * grad[j])) / quad_j;
        double t_max = (y[i] > 0) ? (c - alpha[i]) : alpha[i];
        t_max = std::min(t_max, (y[j] > 0) ? alpha[j] : (c - alpha[j]));
        t_step = std::min(t_step, t_max);
        if (t_step <= 0.0) {
            if (active.size() == n) {
                // Numerically stuck at a box corner; the remaining violation
                // is below anything a feasible step can fix.
                break;
            }
            reconstruct_gradient();
            active.resize(n);
            for (std::size_t t = 0; t < n; ++t) active[t] = t;
            since_shrink_check = 0;
            continue;
        }

        // Snap onto the box exactly; an alpha one ulp shy of its bound keeps
        // looking like a violator and stalls the solver.
        const double snap = 1e-12 * c;
        auto boxed = [c, snap](double a) {
            if (a >= c - snap) return c;
            if (a <= snap) return 0.0;
            return a;
        };
        alpha[i] = boxed(alpha[i] + y[i] * t_step);
        alpha[j] = boxed(alpha[j] - y[j] * t_step);

        const double* krow_j = &kmat[j * n];
        for (std::size_t ki : active) {
            grad[ki] += y[ki] * t_step * (krow_i[ki] - krow_j[ki]);
        }
    }

    // Bias from free support vectors; midpoint of the KKT bounds otherwise.
    const double bound_eps = 1e-9 * c;
    double bias_acc = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > bound_eps && alpha[t] < c - bound_eps) {
            bias_acc += -y[t] * grad[t];
            ++free_count;
        }
    }
    double bias;
    if (free_count > 0) {
        bias = bias_acc / static_cast<double>(free_count);
    } else {
        double m = -std::numeric_limits<double>::infinity();
        double big_m = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double score = -y[t] * grad[t];
            if (in_up(t)) m = std::max(m, score);
            if (in_low(t)) big_m = std::min(big_m, score);
        }
        bias = -(m + big_m) / 2.0;
    }

    SvmModel model;
    model.kernel = kernel;
    model.gamma = gamma;
    model.c = c;
    model.bias = bias;
    double coef_sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > kSvThreshold) {
            model.support_vectors.push_back(samples[t].features);
            model.dual_coefficients.push_back(alpha[t] * y[t]);
        }
        coef_sum += alpha[t] * y[t];
        if (alpha[t] < 0.0 || alpha[t] > c) {
            throw InternalError("SMO produced alpha outside [0, C]");
        }
    }
    if (std::abs(coef_sum) > 1e-6) {
        throw InternalError("SMO violated the equality constraint: sum a_i y_i = " +
                            std::to_string(coef_sum));
    }
    return model;
}

double svm_decision(const SvmModel& model, const FeatureVector& x) {
    double acc = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        acc += model.dual_coefficients[i] *
               kernel_value(model.kernel, model.gamma, model.support_vectors[i], x);
    }
    return acc;
}

Prediction svm_predict(const SvmModel& model, const FeatureVector& x) {
    const double d = svm_decision(model, x);
    Prediction p;
    p.label = d > 0.0 ? Label::crackle : Label::normal;
    // Logistic squash of the decision value, reported for the winning side.
    p.confidence = 1.0 / (1.0 + std::exp(-std::abs(d)));
    return p;
}

}  // namespace crackle
