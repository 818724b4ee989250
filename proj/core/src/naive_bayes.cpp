#include "umrahguard/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "umrahguard/errors.hpp"

namespace umrahguard {

NBModel train_nb(std::span<const SparseVector> X, std::span<const Label> y, double alpha) {
    if (!(alpha > 0.0)) throw ValidationError("train_nb: alpha must be positive");
    if (X.size() != y.size() || X.empty()) throw ValidationError("train_nb: X and y must be non-empty and equal length");
    const std::size_t dim = X.front().dim;

    std::array<std::size_t, 2> class_count{};
    std::array<std::vector<double>, 2> mass{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].dim != dim) throw ValidationError("train_nb: inconsistent feature dimension");
        const int c = label_index(y[i]);
        ++class_count[c];
        for (const auto& e : X[i].entries) {
            if (e.value < 0.0) throw ValidationError("train_nb: negative feature value");
            mass[c][e.index] += e.value;
        }
    }
    if (class_count[0] == 0 || class_count[1] == 0) throw ValidationError("train_nb: both classes are required");

    NBModel m;
    m.alpha = alpha;
    const auto n = static_cast<double>(X.size());
    for (int c = 0; c < 2; ++c) {
        m.log_prior[c] = std::log(static_cast<double>(class_count[c]) / n);
        double total = 0.0;
        for (double v : mass[c]) total += v;
        const double denom = std::log(total + alpha * static_cast<double>(dim));
        m.log_likelihood[c].resize(dim);
        for (std::size_t j = 0; j < dim; ++j) m.log_likelihood[c][j] = std::log(mass[c][j] + alpha) - denom;
    }
    return m;
}

NBPrediction predict_nb(const NBModel& model, const SparseVector& x) {
    if (x.dim != model.dim()) throw ValidationError("predict_nb: feature dimension mismatch");
    std::array<double, 2> joint = model.log_prior;
    for (int c = 0; c < 2; ++c) {
        for (const auto& e : x.entries) joint[c] += e.value * model.log_likelihood[c][e.index];
    }
    const double top = std::max(joint[0], joint[1]);
    const double z0 = std::exp(joint[0] - top);
    const double z1 = std::exp(joint[1] - top);
    NBPrediction p;
    p.posterior = {z0 / (z0 + z1), z1 / (z0 + z1)};
    p.label = joint[1] > joint[0] ? Label::Unofficial : Label::Official;
    return p;
}

}  // namespace umrahguard
