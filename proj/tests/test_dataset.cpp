#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "creditrisk/dataset.hpp"
#include "creditrisk/rng.hpp"
#include "test_helpers.hpp"

using namespace creditrisk;
using test_helpers::make_column_dataset;
using test_helpers::make_dataset;

TEST_CASE("class_counts basic counting") {
    const auto data = make_dataset({{0}, {0}, {0}, {0}, {0}}, {1, 1, 1, 1, 0});
    const auto counts = class_counts(data);
    CHECK(counts.n_majority == 4);
    CHECK(counts.n_minority == 1);
    CHECK(counts.imbalance_ratio == 4.0);
    CHECK(counts.majority_label == ClassLabel::kFullyPaid);
}

TEST_CASE("class_counts at an 81.7/18.3 class mix") {
    // 81.7% fully paid / 18.3% default -> imbalance ratio 4.46 (+- rounding)
    std::vector<int> labels(1000, 1);
    std::fill_n(labels.begin(), 183, 0);
    std::vector<std::vector<double>> rows(1000, {0.0});
    const auto counts = class_counts(make_dataset(rows, labels));
    CHECK(counts.imbalance_ratio == Catch::Approx(4.46).margin(0.01));
}

TEST_CASE("class_counts balanced tie") {
    const auto counts = class_counts(make_dataset({{0}, {0}}, {1, 0}));
    CHECK(counts.imbalance_ratio == 1.0);
    CHECK(counts.majority_label == ClassLabel::kFullyPaid);
}

TEST_CASE("class_counts rejects single-class data") {
    CHECK_THROWS_AS(class_counts(make_dataset({{0}, {0}}, {1, 1})), EmptyClass);
}

TEST_CASE("class_counts partitions the rows") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(60);
        const auto data = test_helpers::random_dataset(rng, n, 2);
        const auto counts = class_counts(data);
        CHECK(counts.n_majority + counts.n_minority == data.n_rows());
        CHECK(counts.imbalance_ratio >= 1.0);
    }
}

TEST_CASE("column_stats uses linear quartile interpolation") {
    const auto stats = column_stats(make_column_dataset({1, 2, 3, 4, 5}), "x");
    CHECK(stats.q1 == 2.0);
    CHECK(stats.q3 == 4.0);
    CHECK(stats.min == 1.0);
    CHECK(stats.max == 5.0);
    CHECK(stats.mean == 3.0);
}

TEST_CASE("column_stats on a constant column") {
    const auto stats = column_stats(make_column_dataset({7, 7, 7}), "x");
    CHECK(stats.q1 == 7.0);
    CHECK(stats.q3 == 7.0);
    CHECK(stats.min == 7.0);
    CHECK(stats.max == 7.0);
}

TEST_CASE("column_stats two-point column") {
    const auto stats = column_stats(make_column_dataset({0, 10}), "x");
    CHECK(stats.min == 0.0);
    CHECK(stats.max == 10.0);
    CHECK(stats.mean == 5.0);
}

TEST_CASE("column_stats unknown column") {
    CHECK_THROWS_AS(column_stats(make_column_dataset({1, 2}), "nope"), UnknownColumn);
}

TEST_CASE("column_stats is order independent") {
    Rng rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(40);
        std::vector<double> values(n);
        for (auto& v : values) v = rng.next_normal() * 10.0;
        const auto base = compute_stats(values);
        std::vector<double> shuffled(values);
        rng.shuffle(shuffled);
        const auto again = compute_stats(shuffled);
        CHECK(base.q1 == again.q1);
        CHECK(base.q3 == again.q3);
        CHECK(base.min == again.min);
        CHECK(base.max == again.max);
        CHECK(base.mean == again.mean);
    }
}

TEST_CASE("select_rows identity, duplication, empty") {
    const auto data = make_dataset({{1, 2}, {3, 4}, {5, 6}}, {1, 0, 1});

    std::vector<std::size_t> identity{0, 1, 2};
    const auto same = select_rows(data, identity);
    CHECK(same.values() == data.values());
    CHECK(same.labels() == data.labels());

    std::vector<std::size_t> twice{2, 2};
    const auto dupes = select_rows(data, twice);
    REQUIRE(dupes.n_rows() == 2);
    CHECK(dupes.value(0, 0) == 5.0);
    CHECK(dupes.value(1, 0) == 5.0);
    CHECK(dupes.labels()[0] == ClassLabel::kFullyPaid);

    const auto empty = select_rows(data, std::vector<std::size_t>{});
    CHECK(empty.n_rows() == 0);
    CHECK(empty.n_features() == 2);
}

TEST_CASE("select_rows rejects bad indices") {
    const auto data = make_dataset({{1}}, {1});
    CHECK_THROWS_AS(select_rows(data, std::vector<std::size_t>{1}), IndexOutOfRange);
}

TEST_CASE("select_rows composes") {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(30);
        const auto data = test_helpers::random_dataset(rng, n, 3);
        std::vector<std::size_t> a(1 + rng.uniform_index(40));
        for (auto& v : a) v = rng.uniform_index(n);
        std::vector<std::size_t> b(1 + rng.uniform_index(40));
        for (auto& v : b) v = rng.uniform_index(a.size());

        const auto two_step = select_rows(select_rows(data, a), b);
        std::vector<std::size_t> composed(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) composed[i] = a[b[i]];
        const auto one_step = select_rows(data, composed);
        CHECK(two_step.values() == one_step.values());
        CHECK(two_step.labels() == one_step.labels());
    }
}

TEST_CASE("dataset rejects non-finite values and mismatched labels") {
    std::vector<ColumnInfo> columns{{"x", ColumnKind::kNumeric}};
    CHECK_THROWS_AS(Dataset(FeatureSchema(columns, "label"),
                            {std::numeric_limits<double>::quiet_NaN()},
                            {ClassLabel::kFullyPaid}),
                    ParseError);
    CHECK_THROWS_AS(Dataset(FeatureSchema(columns, "label"), {1.0, 2.0},
                            {ClassLabel::kFullyPaid}),
                    LengthMismatch);
}

TEST_CASE("schema rejects duplicate column names") {
    std::vector<ColumnInfo> columns{{"x", ColumnKind::kNumeric}, {"x", ColumnKind::kNumeric}};
    CHECK_THROWS_AS(FeatureSchema(columns, "label"), ParseError);
}
