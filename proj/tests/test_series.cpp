#include <catch2/catch.hpp>

#include <cmath>

#include "wavefis/rng.hpp"
#include "wavefis/series.hpp"

using namespace wavefis;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double lo = -5.0, double hi = 5.0) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("validate_series accepts well-formed input", "[series]") {
    Matrix raw = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}, {7.0, 8.0}});
    EconomicSeries s = validate_series(raw, {"a", "b"});
    CHECK(s.length() == 4);
    CHECK(s.channels() == 2);
    CHECK(s.channel_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("validate_series rejects bad input", "[series]") {
    SECTION("NaN entry reports position") {
        Matrix raw = Matrix::from_rows({{1.0, 2.0}, {3.0, std::nan("")}});
        try {
            validate_series(raw, {"a", "b"});
            FAIL("expected NonFinite");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::non_finite);
            CHECK(std::string(e.what()).find("row 1") != std::string::npos);
            CHECK(std::string(e.what()).find("col 1") != std::string::npos);
        }
    }
    SECTION("too short") {
        Matrix raw(1, 3, 0.0);
        CHECK_THROWS_MATCHES(validate_series(raw, {"a", "b", "c"}), Error,
                             Catch::Matchers::Predicate<Error>(
                                 [](const Error& e) { return e.code() == Errc::too_short; }));
    }
    SECTION("name count mismatch") {
        Matrix raw(3, 2, 1.0);
        CHECK_THROWS_MATCHES(validate_series(raw, {"a"}), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::dimension_mismatch;
                             }));
    }
    SECTION("duplicate names") {
        Matrix raw(3, 2, 1.0);
        CHECK_THROWS_MATCHES(validate_series(raw, {"a", "a"}), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::dimension_mismatch;
                             }));
    }
}

TEST_CASE("standardize centers and scales with the sample deviation", "[series]") {
    Matrix raw = Matrix::from_rows({{2.0}, {4.0}, {6.0}});
    EconomicSeries s = validate_series(raw, {"x"});
    auto [z, record] = standardize(s);
    // sd of {2,4,6} with T-1 denominator is exactly 2
    CHECK(record[0].mean == Approx(4.0));
    CHECK(record[0].scale == Approx(2.0));
    CHECK(z.values(0, 0) == Approx(-1.0));
    CHECK(z.values(1, 0) == Approx(0.0));
    CHECK(z.values(2, 0) == Approx(1.0));
}

TEST_CASE("standardize maps constant channels to zeros with scale 1", "[series]") {
    Matrix raw = Matrix::from_rows({{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}});
    auto [z, record] = standardize(validate_series(raw, {"flat", "x"}));
    CHECK(record[0].constant);
    CHECK(record[0].scale == 1.0);
    for (int r = 0; r < 3; ++r) CHECK(z.values(r, 0) == 0.0);
    CHECK_FALSE(record[1].constant);
}

TEST_CASE("standardize round-trips through invert", "[series]") {
    Rng rng(11);
    Matrix raw = random_matrix(17, 3, rng);
    for (int r = 0; r < 17; ++r) raw(r, 1) = 3.25;  // one constant channel
    EconomicSeries s = validate_series(raw, {"a", "b", "c"});
    auto [z, record] = standardize(s);
    EconomicSeries back = invert_standardize(z, record);
    for (int r = 0; r < 17; ++r)
        for (int c = 0; c < 3; ++c) CHECK(back.values(r, c) == Approx(s.values(r, c)).margin(1e-12));
}

TEST_CASE("standardize is idempotent on non-constant channels", "[series]") {
    Rng rng(12);
    Matrix raw = random_matrix(25, 2, rng);
    auto first = standardize(validate_series(raw, {"a", "b"}));
    auto second = standardize(first.series);
    for (int r = 0; r < 25; ++r)
        for (int c = 0; c < 2; ++c)
            CHECK(second.series.values(r, c) ==
                  Approx(first.series.values(r, c)).margin(1e-12));
}

TEST_CASE("make_windows emits the sliding-window count", "[series]") {
    Rng rng(13);
    Matrix raw = random_matrix(10, 1, rng);
    EconomicSeries s = validate_series(raw, {"x"});
    auto windows = make_windows(s, 8, 1, "x", Task::regression, 0);
    REQUIRE(windows.size() == 2);  // T - window - horizon + 1
    CHECK(windows[0].input.length() == 8);
    CHECK(windows[0].target == raw(8, 0));
    CHECK(windows[1].target == raw(9, 0));
    CHECK(windows[1].input.start_index == 1);
}

TEST_CASE("make_windows rejects impossible shapes", "[series]") {
    Rng rng(14);
    Matrix raw = random_matrix(8, 1, rng);
    EconomicSeries s = validate_series(raw, {"x"});
    SECTION("window too long") {
        CHECK_THROWS_MATCHES(make_windows(s, 8, 1, "x", Task::regression, 0), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::window_too_long;
                             }));
    }
    SECTION("window not dyadic") {
        CHECK_THROWS_MATCHES(make_windows(s, 6, 1, "x", Task::regression, 2), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::window_not_dyadic;
                             }));
    }
}

TEST_CASE("make_windows classification targets take the horizon max", "[series]") {
    Matrix raw = Matrix::from_rows({{0.0}, {0.0}, {0.0}, {0.0}, {1.0}, {0.0}});
    EconomicSeries s = validate_series(raw, {"label"});
    auto windows = make_windows(s, 2, 2, "label", Task::classification, 1);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].target == 0.0);  // horizon rows 2,3
    CHECK(windows[1].target == 1.0);  // horizon rows 3,4
    CHECK(windows[2].target == 1.0);  // horizon rows 4,5
}

TEST_CASE("make_windows rejects non-binary classification labels", "[series]") {
    Matrix raw = Matrix::from_rows({{0.0}, {0.0}, {0.5}, {0.0}});
    EconomicSeries s = validate_series(raw, {"label"});
    CHECK_THROWS_MATCHES(make_windows(s, 2, 1, "label", Task::classification, 0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::invalid_config;
                         }));
}

TEST_CASE("window count and length hold for random valid shapes", "[series]") {
    Rng rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        const int t_len = 6 + static_cast<int>(rng.index(40));
        const int window = 2 + 2 * static_cast<int>(rng.index(3));  // even, dyadic depth 1
        const int horizon = 1 + static_cast<int>(rng.index(3));
        if (window + horizon > t_len) continue;
        Matrix raw = random_matrix(t_len, 2, rng);
        EconomicSeries s = validate_series(raw, {"x", "y"});
        auto windows = make_windows(s, window, horizon, "y", Task::regression, 1);
        CHECK(static_cast<int>(windows.size()) == t_len - window - horizon + 1);
        for (const auto& w : windows) CHECK(w.input.length() == window);
    }
}
