#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "creditrisk/pipeline.hpp"
#include "creditrisk/prepare.hpp"
#include "creditrisk/rng.hpp"
#include "test_helpers.hpp"

using namespace creditrisk;
using test_helpers::make_column_dataset;
using test_helpers::make_dataset;

namespace {

RawTable table_from_csv(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

} // namespace

TEST_CASE("filter_and_label maps terminal statuses") {
    const auto raw = table_from_csv(
        "loan_status,x\nFully Paid,1\nCurrent,2\nCharged Off,3\n");
    const auto result = filter_and_label(raw, PipelineConfig{});
    REQUIRE(result.table.n_rows() == 2);
    REQUIRE(result.labels.size() == 2);
    CHECK(result.labels[0] == ClassLabel::kFullyPaid);
    CHECK(result.labels[1] == ClassLabel::kDefault);
    CHECK(result.n_removed_in_progress == 1);
    CHECK_FALSE(result.table.column_index("loan_status").has_value());
}

TEST_CASE("filter_and_label with nothing terminal") {
    const auto raw = table_from_csv("loan_status,x\nCurrent,1\nCurrent,2\n");
    CHECK_THROWS_AS(filter_and_label(raw, PipelineConfig{}), NoTerminalLoans);
}

TEST_CASE("filter_and_label counts unrecognized statuses") {
    const auto raw = table_from_csv(
        "loan_status,x\nFully Paid,1\nTotally Made Up,2\nDefault,3\n");
    const auto result = filter_and_label(raw, PipelineConfig{});
    CHECK(result.table.n_rows() == 2);
    CHECK(result.n_removed_unrecognized == 1);
}

TEST_CASE("drop_leakage removes the leak list") {
    const auto raw = table_from_csv("int_rate,keep,grade\n1,2,A\n3,4,B\n");
    std::vector<std::string> log;
    const auto out = drop_leakage(raw, LeakageList::lending_club_defaults(), &log);
    CHECK(out.columns == std::vector<std::string>{"keep"});
    CHECK(out.rows[0] == std::vector<std::string>{"2"});
    // names absent from the table are warned about, not errors
    CHECK(log.size() == LeakageList::lending_club_defaults().columns.size() - 2);
}

TEST_CASE("drop_leakage without leak columns is identity") {
    const auto raw = table_from_csv("a,b\n1,2\n");
    const auto out = drop_leakage(raw, LeakageList::lending_club_defaults());
    CHECK(out.columns == raw.columns);
    CHECK(out.rows == raw.rows);
}

TEST_CASE("drop_missing drops sparse columns before rows") {
    // column b is 95% missing: dropped, its rows kept
    RawTable raw;
    raw.columns = {"a", "b"};
    for (int i = 0; i < 20; ++i) {
        raw.rows.push_back({std::to_string(i), i == 0 ? "1" : "NA"});
    }
    const auto result = drop_missing(raw, 0.30);
    CHECK(result.dropped_columns == std::vector<std::string>{"b"});
    CHECK(result.table.n_rows() == 20);
    CHECK(result.table.n_columns() == 1);
}

TEST_CASE("drop_missing removes incomplete rows in dense columns") {
    const auto raw = table_from_csv("a,b\n1,2\n3,NA\n5,6\n");
    const auto result = drop_missing(raw, 0.50);
    CHECK(result.table.n_rows() == 2);
    CHECK(result.kept_rows == std::vector<std::size_t>{0, 2});
}

TEST_CASE("drop_missing on dense table is identity") {
    const auto raw = table_from_csv("a,b\n1,2\n3,4\n");
    const auto result = drop_missing(raw, 0.30);
    CHECK(result.table.rows == raw.rows);
    CHECK(result.dropped_columns.empty());
}

TEST_CASE("drop_missing empty result") {
    const auto raw = table_from_csv("a,b\n1,NA\nNA,4\n");
    CHECK_THROWS_AS(drop_missing(raw, 0.99), EmptyResult);
}

TEST_CASE("iqr_bounds direct substitution") {
    ColumnStats stats;
    stats.q1 = 2.0;
    stats.q3 = 6.0;
    auto [lower, upper] = iqr_bounds(stats);
    CHECK(lower == -4.0);
    CHECK(upper == 12.0);

    stats.q1 = stats.q3 = 5.0;
    std::tie(lower, upper) = iqr_bounds(stats);
    CHECK(lower == 5.0);
    CHECK(upper == 5.0);

    stats.q1 = 0.0;
    stats.q3 = 1.0;
    std::tie(lower, upper) = iqr_bounds(stats);
    CHECK(lower == -1.5);
    CHECK(upper == 2.5);
}

TEST_CASE("remove_outliers drops rows outside the acceptance range") {
    // [1,2,3,4,100]: Q1=2, Q3=4, upper bound 7 -> the 100 goes
    const auto data = make_column_dataset({1, 2, 3, 4, 100});
    const auto cleaned = remove_outliers(data, {"x"});
    REQUIRE(cleaned.n_rows() == 4);
    for (std::size_t r = 0; r < cleaned.n_rows(); ++r) CHECK(cleaned.value(r, 0) <= 7.0);
}

TEST_CASE("remove_outliers keeps boundary values (closed interval)") {
    // Q1=2, Q3=4 over [1..5,7]: upper bound exactly 7
    const auto data = make_column_dataset({2, 3, 4, 7});
    // stats: q1=2.75, q3=4.75, upper=7.75 -> all inside; craft exact boundary:
    ColumnStats stats = compute_stats(std::vector<double>{2, 3, 4, 7});
    auto [lower, upper] = iqr_bounds(stats);
    CHECK(7.0 <= upper);
    const auto cleaned = remove_outliers(data, {"x"});
    CHECK(cleaned.n_rows() == 4);
}

TEST_CASE("remove_outliers identity when everything is inside") {
    const auto data = make_column_dataset({1, 2, 3, 4, 5});
    const auto cleaned = remove_outliers(data, {"x"});
    CHECK(cleaned.values() == data.values());
}

TEST_CASE("minmax maps training values into [0,1]") {
    MinMaxParams params;
    const auto out = minmax_fit_transform(std::vector<double>{0, 5, 10}, &params);
    CHECK(out == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(params.x_min == 0.0);
    CHECK(params.x_max == 10.0);
}

TEST_CASE("minmax does not clip test-time values") {
    CHECK(minmax_apply({0.0, 10.0}, 15.0) == 1.5);
    CHECK(minmax_apply({0.0, 10.0}, -5.0) == -0.5);
}

TEST_CASE("minmax rejects constant columns") {
    CHECK_THROWS_AS(minmax_fit(std::vector<double>{7, 7}), ConstantColumn);
}

TEST_CASE("log_transform natural log identities") {
    const double e = std::exp(1.0);
    const auto data = make_column_dataset({1.0, e, e * e});
    const auto result = log_transform(data, {"x"});
    CHECK(result.n_rows_dropped == 0);
    CHECK(result.dataset.value(0, 0) == Catch::Approx(0.0).margin(1e-14));
    CHECK(result.dataset.value(1, 0) == Catch::Approx(1.0));
    CHECK(result.dataset.value(2, 0) == Catch::Approx(2.0));
}

TEST_CASE("log_transform drops non-positive rows") {
    const auto data = make_column_dataset({1.0, 0.0, 10.0});
    const auto result = log_transform(data, {"x"});
    CHECK(result.n_rows_dropped == 1);
    CHECK(result.dataset.n_rows() == 2);
}

TEST_CASE("log_transform evens out decades") {
    const auto data = make_column_dataset({1e3, 1e4, 1e5});
    const auto result = log_transform(data, {"x"});
    const double step1 = result.dataset.value(1, 0) - result.dataset.value(0, 0);
    const double step2 = result.dataset.value(2, 0) - result.dataset.value(1, 0);
    CHECK(step1 == Catch::Approx(step2));
    CHECK(step1 == Catch::Approx(std::log(10.0)));
}

TEST_CASE("one_hot category handling") {
    const std::vector<std::string> term_cells{"36 months", "60 months", "36 months"};
    const auto term = one_hot_fit(term_cells, "term");
    CHECK(term.categories.size() == 2);
    CHECK(term.indicator_name(0) == "term_36 months");
    CHECK(term.category_index("60 months") == 1);
    CHECK_FALSE(term.category_index("48 months").has_value()); // unseen -> all zeros

    std::vector<std::string> purposes;
    for (int i = 0; i < 12; ++i) purposes.push_back("p" + std::to_string(i));
    CHECK(one_hot_fit(purposes, "purpose").categories.size() == 12);

    const std::vector<std::string> single{"OWN", "OWN"};
    CHECK(one_hot_fit(single, "home").categories.size() == 1);
}

TEST_CASE("derive_ratios direct substitution") {
    DerivedFeatureInputs inputs;
    inputs.annual_income = 60000.0;
    inputs.installment = 500.0;
    inputs.dti = 20.0; // percent
    inputs.revolving_balance = 0.0;
    const auto ratios = derive_ratios(inputs, /*dti_is_percent=*/true);
    CHECK(ratios.income_to_payment == 10.0);      // (60000/12)/500
    CHECK(ratios.new_dti == Catch::Approx(0.3));  // (0.2*5000+500)/5000
    CHECK(ratios.revolving_to_income == 0.0);

    inputs.dti = 0.2;
    CHECK(derive_ratios(inputs, /*dti_is_percent=*/false).new_dti == Catch::Approx(0.3));
}

TEST_CASE("derive_ratios rejects non-positive inputs") {
    DerivedFeatureInputs inputs;
    inputs.annual_income = 0.0;
    inputs.installment = 500.0;
    CHECK_THROWS_AS(derive_ratios(inputs), NonPositiveIncome);
    inputs.annual_income = 1000.0;
    inputs.installment = 0.0;
    CHECK_THROWS_AS(derive_ratios(inputs), NonPositiveInstallment);
}

TEST_CASE("correlation_with_target known values") {
    const auto perfect = make_dataset({{0}, {0}, {1}, {1}}, {0, 0, 1, 1});
    CHECK(correlation_with_target(perfect)[0].correlation == Catch::Approx(1.0));

    const auto inverse = make_dataset({{1}, {1}, {0}, {0}}, {0, 0, 1, 1});
    CHECK(correlation_with_target(inverse)[0].correlation == Catch::Approx(-1.0));

    const auto graded = make_dataset({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
    CHECK(correlation_with_target(graded)[0].correlation == Catch::Approx(0.8944).margin(5e-5));

    const auto constant = make_dataset({{3}, {3}, {3}, {3}}, {0, 0, 1, 1});
    CHECK(correlation_with_target(constant)[0].correlation == 0.0);
}

TEST_CASE("correlation is affine invariant") {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const auto data = test_helpers::random_dataset(rng, 5 + rng.uniform_index(40), 1);
        const double a = (rng.next_double() - 0.5) * 8.0;
        const double b = rng.next_normal() * 3.0;
        if (a == 0.0) continue;
        std::vector<std::vector<double>> scaled_rows;
        std::vector<int> labels;
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
            scaled_rows.push_back({a * data.value(i, 0) + b});
            labels.push_back(to_int(data.labels()[i]));
        }
        const double base = correlation_with_target(data)[0].correlation;
        const double scaled =
            correlation_with_target(make_dataset(scaled_rows, labels))[0].correlation;
        const double expected = a > 0 ? base : -base;
        CHECK(scaled == Catch::Approx(expected).margin(1e-9));
    }
}

TEST_CASE("stratified split arithmetic") {
    std::vector<int> labels(100, 1);
    std::fill_n(labels.begin(), 20, 0);
    std::vector<std::vector<double>> rows(100, {0.0});
    const auto data = make_dataset(rows, labels);
    const auto split = stratified_split_indices(data.labels(), 0.7, 5);
    CHECK(split.train.size() == 70);
    CHECK(split.test.size() == 30);
    std::size_t train_minority = 0;
    for (std::size_t i : split.train) {
        if (data.labels()[i] == ClassLabel::kDefault) ++train_minority;
    }
    CHECK(train_minority == 14);
}

TEST_CASE("stratified split is deterministic and disjoint") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 8 + rng.uniform_index(80);
        const auto data = test_helpers::random_dataset(rng, n, 1);
        std::size_t n_minority = 0;
        for (auto label : data.labels()) {
            if (label == ClassLabel::kDefault) ++n_minority;
        }
        n_minority = std::min(n_minority, data.n_rows() - n_minority);
        if (n_minority < 2) continue;
        const std::uint64_t seed = rng.next_u64();
        const auto once = stratified_split_indices(data.labels(), 0.7, seed);
        const auto twice = stratified_split_indices(data.labels(), 0.7, seed);
        CHECK(once.train == twice.train);
        CHECK(once.test == twice.test);

        std::set<std::size_t> all(once.train.begin(), once.train.end());
        for (std::size_t i : once.test) CHECK(all.insert(i).second);
        CHECK(all.size() == data.n_rows());

        // class proportion preserved within 1/n_minority
        auto minority_fraction = [&data](const std::vector<std::size_t>& idx) {
            std::size_t m = 0;
            for (std::size_t i : idx) {
                if (data.labels()[i] == ClassLabel::kDefault) ++m;
            }
            return static_cast<double>(m) / static_cast<double>(idx.size());
        };
        std::size_t full_minority = 0;
        for (auto label : data.labels()) {
            if (label == ClassLabel::kDefault) ++full_minority;
        }
        const double full_fraction =
            static_cast<double>(full_minority) / static_cast<double>(data.n_rows());
        CHECK(std::abs(minority_fraction(once.train) - full_fraction) <=
              1.0 / static_cast<double>(n_minority) + 1e-12);
    }
}

TEST_CASE("split of 4 balanced rows at one half") {
    const auto data = make_dataset({{0}, {1}, {2}, {3}}, {0, 1, 0, 1});
    const auto split = stratified_split_indices(data.labels(), 0.5, 3);
    REQUIRE(split.train.size() == 2);
    REQUIRE(split.test.size() == 2);
    for (const auto& part : {split.train, split.test}) {
        int sum = 0;
        for (std::size_t i : part) sum += to_int(data.labels()[i]);
        CHECK(sum == 1); // one of each class per side
    }
}

TEST_CASE("split rejects tiny classes") {
    const auto data = make_dataset({{0}, {1}, {2}}, {0, 1, 1});
    CHECK_THROWS_AS(stratified_split_indices(data.labels(), 0.7, 1), TooFewSamples);
}

namespace {

// A miniature Lending-Club-like CSV exercising every pipeline stage.
std::string synthetic_loan_csv(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::ostringstream out;
    out << "loan_status,annual_inc,dti,installment,revol_bal,term,home_ownership,"
           "emp_title,int_rate,grade,sparse\n";
    const char* terms[] = {"36 months", "60 months"};
    const char* homes[] = {"RENT", "OWN", "MORTGAGE"};
    for (std::size_t i = 0; i < n; ++i) {
        const bool bad = rng.next_double() < 0.25;
        const char* status = bad ? "Charged Off" : "Fully Paid";
        if (rng.next_double() < 0.1) status = "Current";
        const double income = 20000.0 + rng.next_double() * 90000.0;
        const double dti = 5.0 + rng.next_double() * 25.0;
        const double installment = 100.0 + rng.next_double() * 700.0;
        const double revol = rng.next_double() * 30000.0;
        out << status << ',' << income << ',' << dti << ',' << installment << ',' << revol
            << ',' << terms[rng.uniform_index(2)] << ',' << homes[rng.uniform_index(3)]
            << ",job" << i << ',' << 5.0 + rng.next_double() * 20.0 << ",A,"
            << (rng.next_double() < 0.9 ? "NA" : "1") << '\n';
    }
    return out.str();
}

} // namespace

TEST_CASE("run_prepare end to end") {
    const auto raw = table_from_csv(synthetic_loan_csv(400, 99));
    PipelineConfig config;
    const auto result = run_prepare(raw, config);

    // no leakage column survives
    for (const auto& leak : config.leakage.columns) {
        CHECK_FALSE(result.dataset.schema().find(leak).has_value());
    }
    // non-numeric free text is gone, categoricals are expanded
    CHECK_FALSE(result.dataset.schema().find("emp_title").has_value());
    CHECK(result.dataset.schema().find("term_36 months").has_value());
    // derived ratios present
    CHECK(result.dataset.schema().find(kIncomeToPaymentColumn).has_value());
    CHECK(result.dataset.schema().find(kNewDtiColumn).has_value());
    // everything finite; training rows of every column inside [0,1]
    const auto split = stratified_split_indices(result.dataset.labels(),
                                                config.train_fraction, config.split_seed);
    for (std::size_t r : split.train) {
        for (std::size_t c = 0; c < result.dataset.n_features(); ++c) {
            const double v = result.dataset.value(r, c);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(result.summary.rows_final == result.dataset.n_rows());
    CHECK(result.summary.imbalance_ratio > 1.0);
    CHECK_FALSE(result.correlations.empty());
    // ranked by |correlation| descending
    for (std::size_t i = 1; i < result.correlations.size(); ++i) {
        CHECK(std::abs(result.correlations[i - 1].correlation) >=
              std::abs(result.correlations[i].correlation));
    }
}

TEST_CASE("prepared csv round trip") {
    const auto raw = table_from_csv(synthetic_loan_csv(120, 3));
    const auto result = run_prepare(raw, PipelineConfig{});
    const auto table = dataset_to_table(result.dataset);
    const auto reloaded = dataset_from_table(table);
    CHECK(reloaded.n_rows() == result.dataset.n_rows());
    CHECK(reloaded.n_features() == result.dataset.n_features());
    CHECK(reloaded.values() == result.dataset.values());
    CHECK(reloaded.labels() == result.dataset.labels());
}

TEST_CASE("pipeline config json round trip and unknown keys") {
    const PipelineConfig config;
    const auto j = pipeline_config_to_json(config);
    const PipelineConfig back = pipeline_config_from_json(j);
    CHECK(back.status_column == config.status_column);
    CHECK(back.leakage.columns == config.leakage.columns);
    CHECK(back.train_fraction == config.train_fraction);

    nlohmann::json bad = {{"not_a_key", 1}};
    CHECK_THROWS_AS(pipeline_config_from_json(bad), ConfigError);
}
