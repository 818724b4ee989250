#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "umrahguard/corpus.hpp"
#include "umrahguard/sparse.hpp"

namespace umrahguard {

enum class KernelKind { Linear, Rbf, Poly };

std::string_view kernel_name(KernelKind k) noexcept;
KernelKind parse_kernel(std::string_view name);  // "linear" | "rbf" | "poly"

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 0.1;  // rbf, poly
    int degree = 3;      // poly
    double coef0 = 1.0;  // poly

    static KernelSpec linear() { return {KernelKind::Linear, 0.0, 0, 0.0}; }
    static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma, 0, 0.0}; }
    static KernelSpec poly(double gamma, int degree = 3, double coef0 = 1.0) {
        return {KernelKind::Poly, gamma, degree, coef0};
    }

    void validate() const;
};

/// Dense evaluation; throws ValidationError on a dimension mismatch.
double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);
double kernel_eval(const KernelSpec& spec, const SparseVector& a, const SparseVector& b);

/// "scale" = 1 / (d * Var(X)) over every matrix entry, "auto" = 1 / d.
double gamma_scale(std::span<const SparseVector> X);
double gamma_auto(std::span<const SparseVector> X);

struct SmoOptions {
    double tol = 1e-3;
    /// Iteration cap is max_passes * max(n^2, 10000) pair updates.
    std::size_t max_passes = 10;
    /// Fixes the scan order used to break ties in working-set selection.
    std::uint64_t seed = 0;
};

/// Exit diagnostics of the SMO solver, over every training point.
struct SmoReport {
    std::vector<double> alpha;
    std::vector<int> y;  // -1 Official, +1 Unofficial
    std::vector<double> decision;  // f(x_i) with the final bias
    double bias = 0.0;
    std::size_t iterations = 0;
    double max_kkt_violation = 0.0;
    double alpha_y_sum = 0.0;
};

struct SVMModel {
    std::vector<SparseVector> support_vectors;
    std::vector<double> dual_coefs;  // alpha_i * y_i
    double bias = 0.0;
    KernelSpec kernel;
    double C = 1.0;
    std::size_t dim = 0;

    /// sum_i dual_coefs[i] K(sv_i, x) + bias
    double decision(const SparseVector& x) const;
};

struct SVMPrediction {
    Label label = Label::Official;
    double margin = 0.0;
    double confidence = 0.5;  // 1 / (1 + exp(-|margin|))
};

/// Dual SMO with labels mapped to -1 (Official) / +1 (Unofficial). Each step
/// optimizes the maximal KKT-violating pair; the solver stops once the
/// violation gap is within tol, so the returned state satisfies the KKT
/// conditions to tol. Throws ConvergenceError at the iteration cap.
SVMModel train_svm_smo(std::span<const SparseVector> X, std::span<const Label> y, double C, const KernelSpec& kernel,
                       const SmoOptions& options = {}, SmoReport* report = nullptr);

/// Unofficial iff margin > 0.
SVMPrediction predict_svm(const SVMModel& model, const SparseVector& x);

}  // namespace umrahguard
