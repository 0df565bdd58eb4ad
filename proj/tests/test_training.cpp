#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "wavefis/rng.hpp"
#include "wavefis/training.hpp"

using namespace wavefis;

namespace {

// Small model of the shape used for gradient checks: T=8, d=1, k=1, R=2,
// d_k = d_v = 2.
ModelState make_small_model(uint64_t seed, Task task) {
    Rng rng(seed);
    ModelState model;
    model.config.task = task;
    model.config.window = 8;
    model.config.horizon = 1;
    model.config.depth = 1;
    model.config.basis = "haar";
    model.config.key_dim = 2;
    model.config.value_dim = 2;
    model.config.rule_count = 2;
    model.config.target_channel = "x";
    model.config.channel_names = {"x"};
    model.attention = init_attention(2, 2, 2, rng);
    model.rules = FuzzyRuleBase{Matrix(2, 2), Matrix(2, 2), Matrix(2, 2),
                                std::vector<double>(2)};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            model.rules.centers(i, j) = rng.uniform(-0.5, 0.5);
            model.rules.spreads(i, j) = rng.uniform(0.4, 1.2);
            model.rules.coeffs(i, j) = rng.uniform(-0.8, 0.8);
        }
        model.rules.biases[i] = rng.uniform(-0.5, 0.5);
    }
    return model;
}

std::vector<SupervisedWindow> make_random_windows(int count, uint64_t seed, Task task) {
    Rng rng(seed);
    std::vector<SupervisedWindow> out;
    for (int n = 0; n < count; ++n) {
        Matrix vals(8, 1);
        for (int r = 0; r < 8; ++r) vals(r, 0) = rng.normal();
        double target = task == Task::regression ? rng.normal()
                                                 : static_cast<double>(rng.index(2));
        out.push_back(SupervisedWindow{EconomicSeries{vals, {"x"}, 0, "1d"}, target});
    }
    return out;
}

std::vector<const SupervisedWindow*> as_batch(const std::vector<SupervisedWindow>& windows) {
    std::vector<const SupervisedWindow*> batch;
    for (const auto& w : windows) batch.push_back(&w);
    return batch;
}

double batch_loss(const ModelState& model, const std::vector<SupervisedWindow>& windows) {
    std::vector<double> preds, targets;
    for (const auto& w : windows) {
        preds.push_back(forward(w, model).prediction);
        targets.push_back(w.target);
    }
    return loss(preds, targets, model.config.task);
}

struct ParamView {
    std::vector<double>* values;
    const std::vector<double>* grads;
    const char* name;
};

std::vector<ParamView> param_views(ModelState& model, const Gradients& grads) {
    return {
        {&model.attention.wq.data(), &grads.wq.data(), "wq"},
        {&model.attention.wk.data(), &grads.wk.data(), "wk"},
        {&model.attention.wv.data(), &grads.wv.data(), "wv"},
        {&model.rules.centers.data(), &grads.centers.data(), "centers"},
        {&model.rules.spreads.data(), &grads.spreads.data(), "spreads"},
        {&model.rules.coeffs.data(), &grads.coeffs.data(), "coeffs"},
        {&model.rules.biases, &grads.biases, "biases"},
    };
}

/// Central-difference comparison over every trainable coordinate.
double max_gradient_error(ModelState model, const std::vector<SupervisedWindow>& windows) {
    const Gradients grads = grad_premise_attention(as_batch(windows), model);
    const double eps = 1e-5;
    double worst = 0.0;
    for (ParamView view : param_views(model, grads)) {
        for (size_t i = 0; i < view.values->size(); ++i) {
            const double saved = (*view.values)[i];
            (*view.values)[i] = saved + eps;
            const double up = batch_loss(model, windows);
            (*view.values)[i] = saved - eps;
            const double down = batch_loss(model, windows);
            (*view.values)[i] = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double analytic = (*view.grads)[i];
            const double rel = std::abs(analytic - fd) /
                               std::max({1.0, std::abs(analytic), std::abs(fd)});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

/// Windows whose rows are constant, so the target is exactly linear in the
/// pooled representation. Target = 0.8 * level + 0.3.
WindowDataset constant_row_dataset(int count, uint64_t seed) {
    Rng rng(seed);
    WindowDataset ds;
    ds.channel_names = {"x"};
    ds.window = 8;
    ds.horizon = 1;
    ds.target_channel = "x";
    ds.task = Task::regression;
    for (int n = 0; n < count; ++n) {
        const double level = rng.normal();
        Matrix vals(8, 1, level);
        ds.windows.push_back(
            SupervisedWindow{EconomicSeries{vals, {"x"}, 0, "1d"}, 0.8 * level + 0.3});
        ds.meta.push_back(WindowMeta{"h0", n});
    }
    return ds;
}

}  // namespace

TEST_CASE("loss evaluates the stated closed forms", "[training]") {
    CHECK(loss({1.0, 2.0}, {1.0, 2.0}, Task::regression) == 0.0);
    CHECK(loss({0.0}, {2.0}, Task::regression) == Approx(4.0));
    CHECK(loss({0.5}, {1.0}, Task::classification) == Approx(std::log(2.0)).margin(1e-12));
    CHECK(loss({0.5}, {0.0}, Task::classification) == Approx(0.693147).margin(1e-6));
    CHECK_THROWS_MATCHES(loss({}, {}, Task::regression), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::empty_batch; }));
}

TEST_CASE("forward composes the trivial cases", "[training]") {
    SECTION("zero attention values and bias-only rules predict the bias") {
        ModelState model = make_small_model(51, Task::regression);
        model.attention.wv = Matrix(2, 2, 0.0);  // pooled vector is exactly zero
        model.rules.coeffs = Matrix(2, 2, 0.0);
        model.rules.biases = {2.75, 2.75};
        Matrix vals(8, 1, 1.3);
        const ForwardTrace trace = forward(vals, model);
        CHECK(trace.prediction == Approx(2.75).margin(1e-12));
    }
    SECTION("classification link maps a zero output to one half") {
        ModelState model = make_small_model(52, Task::classification);
        model.rules.coeffs = Matrix(2, 2, 0.0);
        model.rules.biases = {0.0, 0.0};
        const auto windows = make_random_windows(1, 53, Task::classification);
        CHECK(forward(windows[0], model).prediction == Approx(0.5).margin(1e-15));
    }
    SECTION("predictions stay finite on random windows") {
        ModelState model = make_small_model(54, Task::regression);
        for (const auto& w : make_random_windows(20, 55, Task::regression))
            CHECK(std::isfinite(forward(w, model).prediction));
    }
    SECTION("wrong window length is rejected") {
        ModelState model = make_small_model(56, Task::regression);
        CHECK_THROWS_MATCHES(forward(Matrix(6, 1, 0.0), model), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::shape_mismatch;
                             }));
    }
}

TEST_CASE("single-rule consequent solve reduces to ridge regression", "[training]") {
    ModelState model = make_small_model(57, Task::regression);
    // collapse to one rule: normalized firing is identically 1
    model.config.rule_count = 1;
    model.rules = FuzzyRuleBase{Matrix(1, 2, 0.0), Matrix(1, 2, 1.0), Matrix(1, 2, 0.0), {0.0}};
    auto windows = make_random_windows(30, 58, Task::regression);
    const double lambda = 0.37;
    auto [coeffs, biases] = solve_consequents(as_batch(windows), model, lambda);

    // independent normal-equations ridge on the pooled features
    Matrix phi(30, 3);
    std::vector<double> y(30);
    for (int i = 0; i < 30; ++i) {
        const ForwardTrace trace = forward(windows[i], model);
        phi(i, 0) = trace.attended.h_pooled[0];
        phi(i, 1) = trace.attended.h_pooled[1];
        phi(i, 2) = 1.0;
        y[i] = windows[i].target;
    }
    double gram[3][3] = {}, rhs[3] = {};
    for (int i = 0; i < 30; ++i)
        for (int a = 0; a < 3; ++a) {
            rhs[a] += phi(i, a) * y[i];
            for (int b = 0; b < 3; ++b) gram[a][b] += phi(i, a) * phi(i, b);
        }
    for (int a = 0; a < 3; ++a) gram[a][a] += lambda;
    // 3x3 Gaussian elimination
    double aug[3][4];
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) aug[a][b] = gram[a][b];
        aug[a][3] = rhs[a];
    }
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        for (int c = 0; c < 4; ++c) std::swap(aug[col][c], aug[pivot][c]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int c = 0; c < 4; ++c) aug[r][c] -= f * aug[col][c];
        }
    }
    const double expect[3] = {aug[0][3] / aug[0][0], aug[1][3] / aug[1][1],
                              aug[2][3] / aug[2][2]};
    CHECK(coeffs(0, 0) == Approx(expect[0]).margin(1e-9));
    CHECK(coeffs(0, 1) == Approx(expect[1]).margin(1e-9));
    CHECK(biases[0] == Approx(expect[2]).margin(1e-9));
}

TEST_CASE("consequent solve recovers planted parameters exactly", "[training]") {
    ModelState model = make_small_model(59, Task::regression);
    // tighter spreads so the normalized firings vary across samples
    for (double& s : model.rules.spreads.data()) s = 0.35;
    auto windows = make_random_windows(48, 60, Task::regression);
    const Matrix planted_coeffs = Matrix::from_rows({{0.7, -1.2}, {0.15, 0.4}});
    const std::vector<double> planted_biases{-0.6, 1.1};
    model.rules.coeffs = planted_coeffs;
    model.rules.biases = planted_biases;
    for (auto& w : windows) w.target = forward(w, model).raw_output;

    auto [coeffs, biases] = solve_consequents(as_batch(windows), model, 0.0);
    for (int i = 0; i < 2; ++i) {
        CHECK(biases[i] == Approx(planted_biases[i]).margin(1e-8));
        for (int j = 0; j < 2; ++j)
            CHECK(coeffs(i, j) == Approx(planted_coeffs(i, j)).margin(1e-8));
    }
}

TEST_CASE("heavy ridge shrinks the consequents toward zero", "[training]") {
    ModelState model = make_small_model(61, Task::regression);
    auto windows = make_random_windows(40, 62, Task::regression);
    auto norm = [](const Matrix& m, const std::vector<double>& b) {
        double s = 0.0;
        for (double v : m.data()) s += v * v;
        for (double v : b) s += v * v;
        return std::sqrt(s);
    };
    auto [c0, b0] = solve_consequents(as_batch(windows), model, 1e-8);
    auto [c1, b1] = solve_consequents(as_batch(windows), model, 1e6);
    CHECK(norm(c1, b1) < 1e-3 * norm(c0, b0));
    CHECK(norm(c1, b1) < 1e-2);
}

TEST_CASE("rank-deficient consequent systems are reported", "[training]") {
    ModelState model = make_small_model(63, Task::regression);
    auto windows = make_random_windows(1, 64, Task::regression);
    // twenty copies of one window: design rank collapses to 1
    std::vector<SupervisedWindow> dup(20, windows[0]);
    CHECK_THROWS_MATCHES(solve_consequents(as_batch(dup), model, 0.0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::singular_system;
                         }));
    // classification has no closed-form solve
    ModelState cls = make_small_model(63, Task::classification);
    CHECK_THROWS_MATCHES(solve_consequents(as_batch(windows), cls, 0.0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::invalid_config;
                         }));
}

TEST_CASE("consequent gradients vanish at the least-squares optimum", "[training]") {
    ModelState model = make_small_model(65, Task::regression);
    for (double& s : model.rules.spreads.data()) s = 0.5;
    auto windows = make_random_windows(48, 66, Task::regression);
    auto [coeffs, biases] = solve_consequents(as_batch(windows), model, 0.0);
    model.rules.coeffs = coeffs;
    model.rules.biases = biases;
    const Gradients g = grad_premise_attention(as_batch(windows), model);
    double norm = 0.0;
    for (double v : g.coeffs.data()) norm += v * v;
    for (double v : g.biases) norm += v * v;
    CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("analytic gradients match central finite differences", "[training]") {
    // five seeded small models across both tasks
    const uint64_t seeds[] = {71, 72, 73, 74, 75};
    int which = 0;
    for (uint64_t seed : seeds) {
        const Task task = (which++ % 2 == 0) ? Task::regression : Task::classification;
        ModelState model = make_small_model(seed, task);
        const auto windows = make_random_windows(3, seed + 100, task);
        const double worst = max_gradient_error(model, windows);
        INFO("seed " << seed << " task " << task_name(task));
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("duplicating a sample leaves the mean gradient unchanged", "[training]") {
    ModelState model = make_small_model(76, Task::regression);
    auto windows = make_random_windows(1, 77, Task::regression);
    std::vector<SupervisedWindow> doubled{windows[0], windows[0]};
    const Gradients single = grad_premise_attention(as_batch(windows), model);
    const Gradients twice = grad_premise_attention(as_batch(doubled), model);
    CHECK(single.wq == twice.wq);
    CHECK(single.wk == twice.wk);
    CHECK(single.wv == twice.wv);
    CHECK(single.centers == twice.centers);
    CHECK(single.spreads == twice.spreads);
    CHECK(single.coeffs == twice.coeffs);
    CHECK(single.biases == twice.biases);
}

TEST_CASE("non-finite parameters surface as gradient errors", "[training]") {
    ModelState model = make_small_model(78, Task::regression);
    model.attention.wq(0, 0) = std::numeric_limits<double>::quiet_NaN();
    auto windows = make_random_windows(2, 79, Task::regression);
    CHECK_THROWS_MATCHES(grad_premise_attention(as_batch(windows), model), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::non_finite_gradient;
                         }));
}

TEST_CASE("train fits linearly generated targets", "[training]") {
    WindowDataset ds = constant_row_dataset(300, 81);
    TrainConfig tc;
    tc.task = Task::regression;
    tc.epochs = 50;
    tc.learning_rate = 1e-3;
    tc.batch_size = 64;
    tc.ridge_lambda = 1e-8;
    tc.seed = 7;
    tc.basis_candidates = {"haar"};
    ArchConfig arch{1, 2, 2, 4};
    auto [model, report] = train(ds, arch, tc);
    CHECK(report.chosen_basis == "haar");

    // validation RMSE against the target spread
    double mean = 0.0;
    for (const auto& w : ds.windows) mean += w.target;
    mean /= static_cast<double>(ds.windows.size());
    double var = 0.0, se = 0.0;
    for (const auto& w : ds.windows) {
        var += (w.target - mean) * (w.target - mean);
        const double err = forward(w, model).prediction - w.target;
        se += err * err;
    }
    const double target_sd = std::sqrt(var / ds.windows.size());
    const double fit_rmse = std::sqrt(se / ds.windows.size());
    CHECK(fit_rmse < 0.2 * target_sd);
}

TEST_CASE("train is deterministic for a fixed seed", "[training]") {
    WindowDataset ds = constant_row_dataset(120, 82);
    TrainConfig tc;
    tc.task = Task::regression;
    tc.epochs = 6;
    tc.batch_size = 32;
    tc.seed = 11;
    tc.basis_candidates = {"haar", "db2"};
    ArchConfig arch{1, 2, 2, 3};
    auto [model1, report1] = train(ds, arch, tc);
    auto [model2, report2] = train(ds, arch, tc);
    CHECK(model1.attention.wq == model2.attention.wq);
    CHECK(model1.attention.wk == model2.attention.wk);
    CHECK(model1.attention.wv == model2.attention.wv);
    CHECK(model1.rules.centers == model2.rules.centers);
    CHECK(model1.rules.spreads == model2.rules.spreads);
    CHECK(model1.rules.coeffs == model2.rules.coeffs);
    CHECK(model1.rules.biases == model2.rules.biases);
    CHECK(report1.train_loss == report2.train_loss);
    CHECK(report1.val_loss == report2.val_loss);
    CHECK(report1.chosen_basis == report2.chosen_basis);
}

TEST_CASE("training loss does not increase over the first epochs", "[training]") {
    // same seed means identical trajectory prefixes, so training k epochs and
    // evaluating on the full fixed set traces the loss after each epoch
    WindowDataset ds = constant_row_dataset(128, 83);
    std::vector<double> losses;
    for (int epochs = 1; epochs <= 5; ++epochs) {
        TrainConfig tc;
        tc.task = Task::regression;
        tc.epochs = epochs;
        tc.learning_rate = 1e-3;
        tc.batch_size = 128;
        tc.seed = 3;
        tc.basis_candidates = {"haar"};
        ArchConfig arch{1, 2, 2, 3};
        auto [model, report] = train(ds, arch, tc);
        double se = 0.0;
        for (const auto& w : ds.windows) {
            const double err = forward(w, model).prediction - w.target;
            se += err * err;
        }
        losses.push_back(se / ds.windows.size());
    }
    for (size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1] + 1e-12);
}

TEST_CASE("train rejects empty datasets", "[training]") {
    WindowDataset ds;
    ds.task = Task::regression;
    TrainConfig tc;
    tc.task = Task::regression;
    CHECK_THROWS_MATCHES(train(ds, ArchConfig{}, tc), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::no_valid_windows;
                         }));
}

TEST_CASE("singleton basis sweep picks that basis", "[training]") {
    WindowDataset ds = constant_row_dataset(80, 84);
    TrainConfig tc;
    tc.task = Task::regression;
    tc.epochs = 2;
    tc.batch_size = 40;
    tc.seed = 5;
    tc.basis_candidates = {"db2"};
    ArchConfig arch{1, 2, 2, 3};
    auto [model, report] = train(ds, arch, tc);
    CHECK(report.chosen_basis == "db2");
    CHECK(model.config.basis == "db2");
}
