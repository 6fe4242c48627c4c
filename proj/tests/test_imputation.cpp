#include "prescale/imputation.hpp"
#include "support.hpp"

#include <doctest.h>

#include <optional>
#include <vector>

using namespace prescale;

namespace {

// The three-instance table: C up to t6, A up to t4, B up to t2.
std::vector<TickSnapshot> worked_table() {
    const std::vector<std::optional<double>> a{0.3, 0.4, 0.5, 0.6, std::nullopt, std::nullopt};
    const std::vector<std::optional<double>> b{0.2, 0.3, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    const std::vector<double> c{0.4, 0.5, 0.6, 0.7, 0.6, 0.5};
    std::vector<TickSnapshot> out;
    for (std::size_t i = 0; i < 6; ++i) {
        TickSnapshot s;
        s.tick = static_cast<TimeMs>(1000 * (i + 1));
        s.active = {"A", "B", "C"};
        if (a[i]) s.known_values["A"] = *a[i];
        if (b[i]) s.known_values["B"] = *b[i];
        s.known_values["C"] = c[i];
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST_CASE("worked imputation table") {
    const auto out = impute_pass(worked_table());
    const std::vector<double> known{0.9, 1.2, 1.1, 1.3, 0.6, 0.5};
    const std::vector<double> unknown{0, 0, 0.3, 0.3, 0.9, 0.9};
    const std::vector<double> total{0.9, 1.2, 1.4, 1.6, 1.5, 1.4};
    REQUIRE(out.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(out[i].known_sum == doctest::Approx(known[i]).epsilon(1e-12));
        CHECK(out[i].unknown_sum == doctest::Approx(unknown[i]).epsilon(1e-12));
        CHECK(out[i].total == doctest::Approx(total[i]).epsilon(1e-12));
    }
    CHECK(out[2].imputed_values.at("B") == doctest::Approx(0.30));
    CHECK(out[4].imputed_values.at("A") == doctest::Approx(0.45));
    CHECK(out[5].imputed_values.at("B") == doctest::Approx(0.45));
    CHECK(out[4].unknown_count == 2);
}

TEST_CASE("late batch restores the exact sums") {
    auto table = worked_table();
    const std::vector<double> a{0.3, 0.4, 0.5, 0.6, 0.55, 0.5};
    const std::vector<double> b{0.2, 0.3, 0.35, 0.4, 0.45, 0.5};
    for (std::size_t i = 0; i < 6; ++i) {
        table[i].known_values["A"] = a[i];
        table[i].known_values["B"] = b[i];
    }
    const auto out = impute_pass(table);
    for (std::size_t i = 0; i < 6; ++i) {
        const double exact = a[i] + b[i] + table[i].known_values.at("C");
        CHECK(out[i].total == doctest::Approx(exact).epsilon(1e-12));
        CHECK(out[i].unknown_sum == 0.0);
    }
}

TEST_CASE("complete data passes through") {
    std::vector<TickSnapshot> w;
    for (int i = 1; i <= 4; ++i) {
        w.push_back({1000 * i, {{"x", 0.1 * i}, {"y", 0.2}}, {"x", "y"}});
    }
    for (const auto& t : impute_pass(w)) {
        CHECK(t.unknown_sum == 0.0);
        CHECK(t.total == doctest::Approx(t.known_sum));
    }
}

TEST_CASE("cold start assigns zero to unknown instances") {
    std::vector<TickSnapshot> w{{1000, {{"A", 0.4}}, {"A", "B"}}};
    const auto out = impute_pass(w);
    CHECK(out[0].imputed_values.at("A") == 0.4);
    CHECK(out[0].imputed_values.at("B") == 0.0);
    CHECK(out[0].total == doctest::Approx(0.4));
}

TEST_CASE("seed tick continues a previous pass") {
    const auto full = impute_pass(worked_table());
    auto tail = worked_table();
    tail.erase(tail.begin(), tail.begin() + 3);
    const auto resumed = impute_pass(tail, &full[2]);
    REQUIRE(resumed.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(resumed[i] == full[i + 3]);
    }
}

TEST_CASE("instance starting mid-window contributes nothing before it appears") {
    std::vector<TickSnapshot> w{{1000, {{"A", 0.5}}, {"A"}}, {2000, {{"A", 0.5}, {"N", 0.2}}, {"A", "N"}}};
    const auto out = impute_pass(w);
    CHECK(out[1].total == doctest::Approx(0.7));
}

TEST_CASE("terminated instance leaves the total") {
    std::vector<TickSnapshot> w{{1000, {{"A", 0.5}, {"B", 0.4}}, {"A", "B"}}, {2000, {{"A", 0.5}}, {"A"}}};
    const auto out = impute_pass(w);
    CHECK(out[1].total == doctest::Approx(0.5));
    CHECK(out[1].unknown_count == 0);
}

TEST_CASE("negative unknown share is clamped") {
    // A's own rise exceeds the previous total's unexplained part.
    std::vector<TickSnapshot> w{{1000, {{"A", 0.1}}, {"A", "B"}}, {2000, {{"A", 0.9}}, {"A", "B"}}};
    const auto out = impute_pass(w);
    CHECK(out[1].unknown_sum == 0.0);
    CHECK(out[1].imputed_values.at("B") == 0.0);
}

TEST_CASE("malformed windows") {
    std::vector<TickSnapshot> w{{1000, {}, {"A"}}, {3000, {}, {"A"}}, {4000, {}, {"A"}}};
    CHECK_THROWS_AS(impute_pass(w), InvalidWindow);
    std::vector<TickSnapshot> back{{2000, {}, {"A"}}, {1000, {}, {"A"}}};
    CHECK_THROWS_AS(impute_pass(back), InvalidWindow);
    CHECK(impute_pass({}).empty());
}

TEST_CASE("oracle agrees with the table") {
    std::vector<testkit::Column> cols;
    for (const auto& s : worked_table()) {
        testkit::Column c;
        for (const auto& id : s.active) {
            auto it = s.known_values.find(id);
            c[id] = it == s.known_values.end() ? std::nullopt : std::optional<double>(it->second);
        }
        cols.push_back(c);
    }
    const auto oracle = testkit::impute_oracle(cols);
    const auto out = impute_pass(worked_table());
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].total == doctest::Approx(oracle[i].total).epsilon(1e-12));
    }
}
