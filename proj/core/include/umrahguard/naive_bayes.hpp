#pragma once

#include <array>
#include <span>
#include <vector>

#include "umrahguard/corpus.hpp"
#include "umrahguard/sparse.hpp"

namespace umrahguard {

/// Multinomial Naive Bayes over non-negative real feature mass.
struct NBModel {
    double alpha = 1.0;
    std::array<double, 2> log_prior{};
    /// Per class, ln P(feature | class); each row exponentiates to sum 1.
    std::array<std::vector<double>, 2> log_likelihood;

    std::size_t dim() const noexcept { return log_likelihood[0].size(); }
};

struct NBPrediction {
    Label label = Label::Official;
    std::array<double, 2> posterior{};  // indexed by label_index
};

/// Throws ValidationError if alpha <= 0, a class is missing or a feature
/// value is negative.
NBModel train_nb(std::span<const SparseVector> X, std::span<const Label> y, double alpha);

/// Ties go to Official.
NBPrediction predict_nb(const NBModel& model, const SparseVector& x);

}  // namespace umrahguard
