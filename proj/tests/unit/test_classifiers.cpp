#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support/fixtures.hpp"
#include "umrahguard/errors.hpp"
#include "umrahguard/model.hpp"
#include "umrahguard/naive_bayes.hpp"
#include "umrahguard/random_forest.hpp"
#include "umrahguard/svm.hpp"

using namespace umrahguard;

namespace {

constexpr Label O = Label::Official;
constexpr Label U = Label::Unofficial;

std::vector<SparseVector> rows(std::initializer_list<std::vector<double>> dense) {
    std::vector<SparseVector> out;
    for (const auto& d : dense) out.push_back(SparseVector::from_dense(d));
    return out;
}

struct Xor {
    std::vector<SparseVector> X = rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    std::vector<Label> y{O, O, U, U};
};

double train_accuracy(const SVMModel& m, const std::vector<SparseVector>& X, const std::vector<Label>& y) {
    double ok = 0;
    for (std::size_t i = 0; i < X.size(); ++i) ok += predict_svm(m, X[i]).label == y[i];
    return ok / static_cast<double>(X.size());
}

// KKT conditions recomputed from the model, independent of the solver's report.
void check_kkt(const SVMModel& m, const SmoReport& rep, const std::vector<SparseVector>& X, double C, double tol) {
    double sum = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double a = rep.alpha[i];
        CHECK(a >= 0.0);
        CHECK(a <= C);
        sum += a * rep.y[i];
        const double yf = rep.y[i] * m.decision(X[i]);
        const double eps = 1e-9 * C;
        if (a <= eps) CHECK(yf >= 1.0 - tol);
        else if (a >= C - eps) CHECK(yf <= 1.0 + tol);
        else CHECK(std::abs(yf - 1.0) <= tol);
    }
    CHECK(std::abs(sum) <= 1e-6);
    CHECK(std::abs(rep.alpha_y_sum) <= 1e-6);
    CHECK(rep.max_kkt_violation <= tol);
}

std::vector<SparseVector> reference_matrix(std::vector<Label>* y) {
    const auto& c = umrahguard::testing::reference_corpus();
    const auto p = FeaturePipeline::fit(c.records, c.tokens, c.watchlist, FeatureConfig::hybrid());
    std::vector<SparseVector> X;
    for (std::size_t i = 0; i < c.records.size(); ++i) {
        X.push_back(assemble_features(c.records[i], c.tokens[i], p).flatten());
        y->push_back(*c.records[i].label);
    }
    return X;
}

}  // namespace

// --- naive bayes -----------------------------------------------------------

TEST_CASE("nb rejects a single class and negative mass") {
    const auto X = rows({{1, 0}, {0, 1}});
    CHECK_THROWS_AS(train_nb(X, std::vector<Label>{O, O}, 1.0), ValidationError);
    CHECK_THROWS_AS(train_nb(rows({{-1, 0}, {0, 1}}), std::vector<Label>{O, U}, 1.0), ValidationError);
    CHECK_THROWS_AS(train_nb(X, std::vector<Label>{O, U}, 0.0), ValidationError);
    CHECK_NOTHROW(train_nb(X, std::vector<Label>{O, U}, 0.5));
}

TEST_CASE("nb hand-computed likelihoods") {
    // class O mass (3, 1), class U mass (0, 2), alpha 1
    const auto X = rows({{2, 1}, {1, 0}, {0, 2}});
    const auto m = train_nb(X, std::vector<Label>{O, O, U}, 1.0);
    CHECK(m.log_prior[0] == doctest::Approx(std::log(2.0 / 3.0)));
    CHECK(m.log_likelihood[0][0] == doctest::Approx(std::log(4.0 / 6.0)));
    CHECK(m.log_likelihood[1][1] == doctest::Approx(std::log(3.0 / 4.0)));
    for (int c = 0; c < 2; ++c) {
        double s = 0;
        for (double v : m.log_likelihood[c]) s += std::exp(v);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("nb posteriors") {
    const auto X = rows({{2, 1}, {1, 0}, {0, 2}});
    const auto m = train_nb(X, std::vector<Label>{O, O, U}, 1.0);
    for (const auto& x : rows({{1, 0}, {0, 5}, {3, 3}, {0.2, 0.1}})) {
        const auto p = predict_nb(m, x);
        CHECK(p.posterior[0] + p.posterior[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto zero = predict_nb(m, SparseVector{2, {}});
    CHECK(zero.posterior[0] == doctest::Approx(2.0 / 3.0));

    const auto sym = train_nb(rows({{1, 0}, {0, 1}}), std::vector<Label>{O, U}, 1.0);
    CHECK(sym.log_prior[0] == sym.log_prior[1]);
    const auto tie = predict_nb(sym, SparseVector::from_dense(std::vector<double>{1, 1}));
    CHECK(tie.posterior[0] == doctest::Approx(0.5));
    CHECK(tie.label == O);
}

TEST_CASE("nb argmax is unchanged by a common likelihood shift") {
    auto m = train_nb(rows({{2, 1}, {1, 0}, {0, 2}}), std::vector<Label>{O, O, U}, 1.0);
    const auto x = SparseVector::from_dense(std::vector<double>{0.4, 1.0});
    const auto before = predict_nb(m, x).label;
    for (auto& row : m.log_likelihood)
        for (auto& v : row) v += std::log(3.0);
    CHECK(predict_nb(m, x).label == before);
}

// --- random forest ---------------------------------------------------------

TEST_CASE("impurity") {
    CHECK(impurity(std::vector<double>{10, 0}, Criterion::Gini) == 0.0);
    CHECK(impurity(std::vector<double>{5, 5}, Criterion::Gini) == doctest::Approx(0.5));
    CHECK(impurity(std::vector<double>{5, 5}, Criterion::Entropy) == doctest::Approx(1.0));
    CHECK(impurity(std::vector<double>{10, 0}, Criterion::Entropy) == 0.0);
    CHECK(impurity(std::vector<double>{1, 3}, Criterion::Entropy) ==
          doctest::Approx(-(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75))));
    CHECK_THROWS_AS(impurity(std::vector<double>{0, 0}, Criterion::Gini), ValidationError);
}

TEST_CASE("rf on a single separating feature") {
    // Feature 1 separates; features 0 and 2 are constant.
    std::vector<SparseVector> X;
    std::vector<Label> y;
    for (int i = 0; i < 40; ++i) {
        const bool u = i % 2 == 1;
        X.push_back(SparseVector::from_dense(std::vector<double>{1.0, u ? 0.9 : 0.1 + 0.001 * i, 3.0}));
        y.push_back(u ? U : O);
    }
    RFParams params;
    params.n_estimators = 15;
    params.seed = 3;
    const auto m = train_rf(X, y, params);
    for (const auto& t : m.trees) CHECK(t.nodes[0].feature == 1);
    for (std::size_t i = 0; i < X.size(); ++i) CHECK(predict_rf(m, X[i]).label == y[i]);

    const auto imp = rf_feature_importance(m);
    CHECK(imp[1] == doctest::Approx(1.0));
    CHECK(imp[0] == 0.0);
    CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rf single tree on a one-class bootstrap is a leaf") {
    // Two distinct points; a bootstrap of size 2 repeats one of them about half the time.
    const auto X = rows({{0.0, 1.0}, {1.0, 0.0}});
    const std::vector<Label> y{O, U};
    std::size_t leaves = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RFParams params;
        params.n_estimators = 1;
        params.seed = seed;
        const auto m = train_rf(X, y, params);
        REQUIRE(m.trees.size() == 1);
        if (m.trees[0].nodes.size() != 1) continue;
        ++leaves;
        CHECK(m.trees[0].nodes[0].is_leaf());
        // A leaf predicts the same class everywhere, with every vote.
        const auto a = predict_rf(m, X[0]);
        const auto b = predict_rf(m, X[1]);
        CHECK(a.label == b.label);
        CHECK(a.vote_fraction == 1.0);
    }
    CHECK(leaves > 0);
    CHECK_THROWS_AS(train_rf(rows({{0.3, 0.7}}), std::vector<Label>{U}, RFParams{}), ValidationError);
}

TEST_CASE("rf votes, ties and depth limits") {
    std::vector<Label> y;
    const auto X = reference_matrix(&y);
    RFParams params;
    params.n_estimators = 20;
    params.max_depth = 3;
    params.criterion = Criterion::Entropy;
    params.seed = 9;
    const auto m = train_rf(X, y, params);
    for (const auto& t : m.trees) CHECK(t.depth() <= 3);
    for (const auto& x : X) {
        const auto p = predict_rf(m, x);
        CHECK(p.vote_fraction >= 0.5);
        CHECK(p.vote_fraction <= 1.0);
    }

    // Evaluation order of trees does not matter.
    auto reversed = m;
    std::reverse(reversed.trees.begin(), reversed.trees.end());
    for (const auto& x : X) CHECK(predict_rf(reversed, x).label == predict_rf(m, x).label);

    // Forge an even split: half the trees are pure-U leaves, half pure-O leaves.
    RFModel tie = m;
    tie.trees.resize(4);
    for (std::size_t t = 0; t < 4; ++t) {
        TreeNode leaf;
        leaf.counts = t % 2 ? std::array<double, 2>{0, 1} : std::array<double, 2>{1, 0};
        tie.trees[t].nodes = {leaf};
    }
    const auto p = predict_rf(tie, X[0]);
    CHECK(p.label == O);
    CHECK(p.vote_fraction == 0.5);
}

TEST_CASE("rf is deterministic per seed") {
    std::vector<Label> y;
    const auto X = reference_matrix(&y);
    RFParams params;
    params.n_estimators = 10;
    params.seed = 5;
    const auto a = train_rf(X, y, params);
    const auto b = train_rf(X, y, params);
    CHECK(rf_feature_importance(a) == rf_feature_importance(b));
    params.seed = 6;
    CHECK(rf_feature_importance(train_rf(X, y, params)) != rf_feature_importance(a));
}

TEST_CASE("rf parameter validation") {
    RFParams p;
    p.n_estimators = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = RFParams{};
    p.max_depth = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

// --- kernels and SMO -------------------------------------------------------

TEST_CASE("kernel values") {
    const std::vector<double> a{1, 2}, b{3, 4};
    CHECK(kernel_eval(KernelSpec::linear(), a, b) == 11.0);
    CHECK(kernel_eval(KernelSpec::rbf(0.5), a, a) == 1.0);
    CHECK(kernel_eval(KernelSpec::rbf(0.1), std::vector<double>{0, 0}, std::vector<double>{1, 0}) ==
          doctest::Approx(0.904837418035960));
    CHECK(kernel_eval(KernelSpec::poly(0.5, 2, 1.0), a, b) == doctest::Approx(std::pow(0.5 * 11 + 1, 2)));
    CHECK_THROWS_AS(kernel_eval(KernelSpec::linear(), a, std::vector<double>{1}), ValidationError);

    // Sparse and dense paths agree.
    const auto sa = SparseVector::from_dense(a), sb = SparseVector::from_dense(b);
    for (const auto& k : {KernelSpec::linear(), KernelSpec::rbf(0.3), KernelSpec::poly(0.2, 3, 1.0)}) {
        CHECK(kernel_eval(k, sa, sb) == doctest::Approx(kernel_eval(k, a, b)).epsilon(1e-12));
    }
}

TEST_CASE("kernel matrix symmetry and gram equivalence") {
    std::vector<Label> y;
    auto X = reference_matrix(&y);
    X.resize(25);
    for (std::size_t i = 0; i < X.size(); ++i) {
        CHECK(kernel_eval(KernelSpec::rbf(0.7), X[i], X[i]) == doctest::Approx(1.0));
        const auto di = X[i].to_dense();
        for (std::size_t j = 0; j < X.size(); ++j) {
            CHECK(kernel_eval(KernelSpec::rbf(0.7), X[i], X[j]) == kernel_eval(KernelSpec::rbf(0.7), X[j], X[i]));
            const auto dj = X[j].to_dense();
            double dot = 0;
            for (std::size_t k = 0; k < di.size(); ++k) dot += di[k] * dj[k];
            CHECK(kernel_eval(KernelSpec::linear(), X[i], X[j]) == doctest::Approx(dot).epsilon(1e-12));
        }
    }
}

TEST_CASE("gamma heuristics") {
    const auto X = rows({{0, 2}, {2, 0}});
    // entries 0,2,2,0: mean 1, population variance 1
    CHECK(gamma_scale(X) == doctest::Approx(0.5));
    CHECK(gamma_auto(X) == doctest::Approx(0.5));
}

TEST_CASE("smo on the separable 1-D pair recovers sign(x)") {
    const auto X = rows({{-1}, {1}});
    const std::vector<Label> y{O, U};
    SmoReport rep;
    const auto m = train_svm_smo(X, y, 100.0, KernelSpec::linear(), {}, &rep);
    CHECK(std::abs(m.bias) <= 1e-2);
    for (double x : {-3.0, -0.5, -0.01, 0.01, 0.5, 3.0}) {
        const auto p = predict_svm(m, SparseVector::from_dense(std::vector<double>{x}));
        CHECK(p.label == (x > 0 ? U : O));
        CHECK(p.margin == doctest::Approx(x).epsilon(1e-2));
    }
    check_kkt(m, rep, X, 100.0, 1e-3);
}

TEST_CASE("smo separates xor with rbf while no linear model can") {
    const Xor d;
    SmoReport rep;
    const auto m = train_svm_smo(d.X, d.y, 10.0, KernelSpec::rbf(1.0), {}, &rep);
    CHECK(train_accuracy(m, d.X, d.y) == 1.0);
    check_kkt(m, rep, d.X, 10.0, 1e-3);

    for (double C : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
        SmoReport lin;
        const auto lm = train_svm_smo(d.X, d.y, C, KernelSpec::linear(), {}, &lin);
        CHECK(train_accuracy(lm, d.X, d.y) <= 0.75);
        check_kkt(lm, lin, d.X, C, 1e-3);
    }

    // Exhaustive oracle: no hyperplane on a fine grid gets all four points.
    int best = 0;
    for (int a = -20; a <= 20; ++a)
        for (int b = -20; b <= 20; ++b)
            for (int c = -40; c <= 40; ++c) {
                const double w1 = a / 10.0, w2 = b / 10.0, b0 = c / 20.0;
                int ok = 0;
                for (std::size_t i = 0; i < 4; ++i) {
                    const auto p = d.X[i].to_dense();
                    ok += ((w1 * p[0] + w2 * p[1] + b0 > 0) == (d.y[i] == U));
                }
                best = std::max(best, ok);
            }
    CHECK(best == 3);
}

TEST_CASE("smo satisfies kkt on the reference features") {
    std::vector<Label> y;
    const auto X = reference_matrix(&y);
    for (const auto& k : {KernelSpec::rbf(0.1), KernelSpec::linear(), KernelSpec::poly(0.1, 3, 1.0)}) {
        for (double C : {0.1, 10.0}) {
            SmoReport rep;
            const auto m = train_svm_smo(X, y, C, k, {}, &rep);
            check_kkt(m, rep, X, C, 1e-3);
        }
    }
}

TEST_CASE("smo reports non-convergence with the violation") {
    const Xor d;
    SmoOptions opt;
    opt.max_passes = 0;
    try {
        train_svm_smo(d.X, d.y, 10.0, KernelSpec::rbf(1.0), opt);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.violation() > opt.tol);
    }
}

TEST_CASE("svm prediction rules") {
    SVMModel m;
    m.support_vectors = rows({{1, 0}});
    m.dual_coefs = {1.0};
    m.kernel = KernelSpec::linear();
    m.dim = 2;
    m.bias = 0.0;
    const auto zero = predict_svm(m, SparseVector::from_dense(std::vector<double>{0, 1}));
    CHECK(zero.margin == 0.0);
    CHECK(zero.label == O);
    CHECK(zero.confidence == 0.5);

    const auto x = SparseVector::from_dense(std::vector<double>{2, 0});
    const auto pos = predict_svm(m, x);
    CHECK(pos.label == U);
    CHECK(pos.confidence == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));

    auto neg = m;
    neg.dual_coefs[0] = -1.0;
    neg.bias = -0.0;
    CHECK(predict_svm(neg, x).label == O);
}

TEST_CASE("margin support vectors sit on the margin") {
    std::vector<Label> y;
    const auto X = reference_matrix(&y);
    SmoReport rep;
    const double C = 10.0;
    const auto m = train_svm_smo(X, y, C, KernelSpec::rbf(0.1), {}, &rep);
    std::size_t free_svs = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (rep.alpha[i] > 1e-8 && rep.alpha[i] < C - 1e-8) {
            ++free_svs;
            CHECK(std::abs(std::abs(m.decision(X[i])) - 1.0) <= 1e-3);
        }
    }
    CHECK(free_svs > 0);
}

TEST_CASE("svm training is deterministic") {
    std::vector<Label> y;
    const auto X = reference_matrix(&y);
    const auto a = train_svm_smo(X, y, 10.0, KernelSpec::rbf(0.1));
    const auto b = train_svm_smo(X, y, 10.0, KernelSpec::rbf(0.1));
    CHECK(a.dual_coefs == b.dual_coefs);
    CHECK(a.bias == b.bias);
}

// --- unified spec layer ----------------------------------------------------

TEST_CASE("reference specs carry the published optimum") {
    const auto svm = ModelSpec::reference(ModelType::Svm);
    CHECK(svm.params["kernel"] == "rbf");
    CHECK(svm.params["C"] == 10.0);
    CHECK(svm.params["gamma"] == 0.1);
    const auto rf = ModelSpec::reference(ModelType::RandomForest);
    CHECK(rf.params["n_estimators"] == 100);
    CHECK(rf.params["max_depth"] == 20);
    CHECK(rf.params["criterion"] == "entropy");
    CHECK(ModelSpec::reference(ModelType::NaiveBayes).params["alpha"] == 0.5);
    for (auto t : {ModelType::Svm, ModelType::RandomForest, ModelType::NaiveBayes}) {
        CHECK_NOTHROW(ModelSpec::reference(t).validate());
    }
}

TEST_CASE("spec validation catches bad parameters") {
    auto s = ModelSpec::reference(ModelType::Svm);
    CHECK_THROWS_AS(s.with_params({{"C", -1}}).validate(), ValidationError);
    CHECK_THROWS_AS(s.with_params({{"gamma", "sometimes"}}).validate(), ValidationError);
    CHECK_THROWS_AS(s.with_params({{"kernel", "sigmoid"}}).validate(), ValidationError);
    CHECK_THROWS_AS(s.with_params({{"alpha", 1}}).validate(), ValidationError);
    CHECK_NOTHROW(s.with_params({{"gamma", "scale"}}).validate());
    CHECK_NOTHROW(s.with_params({{"gamma", "auto"}, {"kernel", "poly"}}).validate());
    auto rf = ModelSpec::reference(ModelType::RandomForest);
    CHECK_NOTHROW(rf.with_params({{"max_depth", nullptr}}).validate());
    CHECK_THROWS_AS(rf.with_params({{"criterion", "mse"}}).validate(), ValidationError);
    CHECK_THROWS_AS(parse_model_type("knn"), ValidationError);
}

TEST_CASE("gamma keywords resolve against the training matrix") {
    std::vector<Label> y;
    const auto X = reference_matrix(&y);
    auto spec = ModelSpec::reference(ModelType::Svm).with_params({{"gamma", "scale"}});
    const auto m = std::get<SVMModel>(train_classifier(spec, X, y));
    CHECK(m.kernel.gamma == doctest::Approx(gamma_scale(X)));
    spec = spec.with_params({{"gamma", "auto"}});
    CHECK(std::get<SVMModel>(train_classifier(spec, X, y)).kernel.gamma == doctest::Approx(1.0 / X[0].dim));
}
