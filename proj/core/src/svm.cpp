#include "umrahguard/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "umrahguard/errors.hpp"
#include "umrahguard/rng.hpp"

namespace umrahguard {

std::string_view kernel_name(KernelKind k) noexcept {
    switch (k) {
        case KernelKind::Linear: return "linear";
        case KernelKind::Rbf: return "rbf";
        case KernelKind::Poly: return "poly";
    }
    return "unknown";
}

KernelKind parse_kernel(std::string_view name) {
    if (name == "linear") return KernelKind::Linear;
    if (name == "rbf") return KernelKind::Rbf;
    if (name == "poly") return KernelKind::Poly;
    throw ValidationError("unknown kernel '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
    if (kind != KernelKind::Linear && !(gamma > 0.0)) throw ValidationError("kernel: gamma must be positive");
    if (kind == KernelKind::Poly && degree < 2) throw ValidationError("kernel: poly degree must be at least 2");
}

namespace {

double apply_kernel(const KernelSpec& spec, double dot, double sq_a, double sq_b) {
    switch (spec.kind) {
        case KernelKind::Linear: return dot;
        case KernelKind::Rbf: return std::exp(-spec.gamma * std::max(0.0, sq_a + sq_b - 2.0 * dot));
        case KernelKind::Poly: return std::pow(spec.gamma * dot + spec.coef0, spec.degree);
    }
    return 0.0;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("kernel_eval: dimension mismatch");
    if (spec.kind == KernelKind::Rbf) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
        return std::exp(-spec.gamma * d2);
    }
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    return apply_kernel(spec, dot, 0.0, 0.0);
}

double kernel_eval(const KernelSpec& spec, const SparseVector& a, const SparseVector& b) {
    if (a.dim != b.dim) throw ValidationError("kernel_eval: dimension mismatch");
    return apply_kernel(spec, a.dot(b), a.squared_norm(), b.squared_norm());
}

double gamma_auto(std::span<const SparseVector> X) {
    if (X.empty() || X.front().dim == 0) throw ValidationError("gamma: empty training matrix");
    return 1.0 / static_cast<double>(X.front().dim);
}

double gamma_scale(std::span<const SparseVector> X) {
    if (X.empty() || X.front().dim == 0) throw ValidationError("gamma: empty training matrix");
    const double cells = static_cast<double>(X.size()) * static_cast<double>(X.front().dim);
    double sum = 0.0, sq = 0.0;
    for (const auto& row : X) {
        for (const auto& e : row.entries) {
            sum += e.value;
            sq += e.value * e.value;
        }
    }
    const double mean = sum / cells;
    const double var = sq / cells - mean * mean;
    return var > 0.0 ? 1.0 / (static_cast<double>(X.front().dim) * var) : 1.0;
}

double SVMModel::decision(const SparseVector& x) const {
    if (x.dim != dim) throw ValidationError("svm: feature dimension mismatch");
    const double sq_x = x.squared_norm();
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) {
        const auto& sv = support_vectors[i];
        f += dual_coefs[i] * apply_kernel(kernel, sv.dot(x), sv.squared_norm(), sq_x);
    }
    return f;
}

SVMModel train_svm_smo(std::span<const SparseVector> X, std::span<const Label> labels, double C,
                       const KernelSpec& kernel, const SmoOptions& options, SmoReport* report) {
    kernel.validate();
    if (!(C > 0.0)) throw ValidationError("svm: C must be positive");
    if (!(options.tol > 0.0)) throw ValidationError("svm: tol must be positive");
    if (X.size() != labels.size() || X.empty()) throw ValidationError("svm: X and y must be non-empty and equal length");
    const std::size_t n = X.size();
    const std::size_t dim = X.front().dim;

    std::vector<int> y(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (X[i].dim != dim) throw ValidationError("svm: inconsistent feature dimension");
        y[i] = labels[i] == Label::Unofficial ? 1 : -1;
        (y[i] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw ValidationError("svm: both classes are required");

    // Full kernel matrix; training sets here are a few hundred rows.
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = X[i].squared_norm();
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            K[i * n + j] = K[j * n + i] = apply_kernel(kernel, X[i].dot(X[j]), sq[i], sq[j]);
        }
    }
    auto Q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * K[i * n + j]; };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a

    std::vector<std::size_t> scan(n);
    std::iota(scan.begin(), scan.end(), std::size_t{0});
    Rng rng(options.seed);
    rng.shuffle(scan);

    auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0.0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0.0) || (y[t] < 0 && alpha[t] < C); };

    const std::size_t cap = options.max_passes * std::max<std::size_t>(n * n, 10000);
    constexpr double kTau = 1e-12;
    std::size_t iter = 0;
    double gap = 0.0;
    for (;;) {
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (auto t : scan) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up(t) && v > up_max) {
                up_max = v;
                i = t;
            }
            if (in_low(t) && v < low_min) {
                low_min = v;
                j = t;
            }
        }
        gap = up_max - low_min;
        if (i == n || j == n || gap <= options.tol) break;
        if (iter >= cap) {
            throw ConvergenceError("svm: SMO did not converge within " + std::to_string(cap) +
                                       " iterations (KKT gap " + std::to_string(gap) + ")",
                                   gap);
        }
        ++iter;

        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = K[i * n + i] + K[j * n + j] + 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = K[i * n + i] + K[j * n + j] - 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
    }

    // Bias: average over free support vectors, else the midpoint of the
    // feasible interval.
    double b_sum = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < C) {
            b_sum += -static_cast<double>(y[t]) * grad[t];
            ++n_free;
        }
    }
    double bias = 0.0;
    if (n_free > 0) {
        bias = b_sum / static_cast<double>(n_free);
    } else {
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up(t)) up_max = std::max(up_max, v);
            if (in_low(t)) low_min = std::min(low_min, v);
        }
        bias = 0.5 * (up_max + low_min);
    }

    SVMModel model;
    model.kernel = kernel;
    model.C = C;
    model.dim = dim;
    model.bias = bias;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support_vectors.push_back(X[t]);
            model.dual_coefs.push_back(alpha[t] * y[t]);
        }
    }

    if (report != nullptr) {
        report->alpha = alpha;
        report->y = y;
        report->bias = bias;
        report->iterations = iter;
        report->decision.assign(n, 0.0);
        report->alpha_y_sum = 0.0;
        report->max_kkt_violation = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double f = bias;
            for (std::size_t s = 0; s < n; ++s) f += alpha[s] * y[s] * K[s * n + t];
            report->decision[t] = f;
            report->alpha_y_sum += alpha[t] * y[t];
            const double yf = y[t] * f;
            double violation = 0.0;
            if (alpha[t] <= 0.0) {
                violation = std::max(0.0, 1.0 - yf);
            } else if (alpha[t] >= C) {
                violation = std::max(0.0, yf - 1.0);
            } else {
                violation = std::abs(yf - 1.0);
            }
            report->max_kkt_violation = std::max(report->max_kkt_violation, violation);
        }
    }
    return model;
}

SVMPrediction predict_svm(const SVMModel& model, const SparseVector& x) {
    SVMPrediction p;
    p.margin = model.decision(x);
    p.label = p.margin > 0.0 ? Label::Unofficial : Label::Official;
    p.confidence = 1.0 / (1.0 + std::exp(-std::abs(p.margin)));
    return p;
}

}  // namespace umrahguard
