#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "creditrisk/neighbors.hpp"
#include "creditrisk/resampling.hpp"
#include "creditrisk/rng.hpp"
#include "creditrisk/synthetic.hpp"
#include "test_helpers.hpp"

using namespace creditrisk;
using test_helpers::make_dataset;

namespace {

// Imbalanced two-blob data: majority label 1 around +sep, minority label 0
// around -sep.
Dataset imbalanced_blobs(std::size_t n_majority, std::size_t n_minority, double sep,
                         std::uint64_t seed, std::size_t d = 2) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n_majority; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = rng.next_normal();
        row[0] += sep;
        rows.push_back(row);
        labels.push_back(1);
    }
    for (std::size_t i = 0; i < n_minority; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = rng.next_normal();
        row[0] -= sep;
        rows.push_back(row);
        labels.push_back(0);
    }
    return make_dataset(rows, labels);
}

std::multiset<std::vector<double>> row_multiset(const Dataset& data, ClassLabel which) {
    std::multiset<std::vector<double>> rows;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        if (data.labels()[i] == which) {
            const auto row = data.row(i);
            rows.insert(std::vector<double>(row.begin(), row.end()));
        }
    }
    return rows;
}

double point_segment_distance(std::span<const double> p, std::span<const double> a,
                              std::span<const double> b) {
    double ab_dot = 0.0, ap_dot = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        ab_dot += (b[j] - a[j]) * (b[j] - a[j]);
        ap_dot += (p[j] - a[j]) * (b[j] - a[j]);
    }
    const double t = ab_dot == 0.0 ? 0.0 : std::clamp(ap_dot / ab_dot, 0.0, 1.0);
    double dist2 = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double closest = a[j] + t * (b[j] - a[j]);
        dist2 += (p[j] - closest) * (p[j] - closest);
    }
    return std::sqrt(dist2);
}

// Verifies every synthetic row (rows beyond the original input) sits on a
// segment between some minority point and one of its k nearest minority
// neighbors, recomputed from scratch.
void check_smote_geometry(const Dataset& original, const Dataset& resampled, std::size_t k,
                          double tol = 1e-9) {
    std::vector<std::vector<double>> minority;
    for (std::size_t i = 0; i < original.n_rows(); ++i) {
        if (original.labels()[i] == ClassLabel::kDefault) {
            const auto row = original.row(i);
            minority.emplace_back(row.begin(), row.end());
        }
    }
    std::vector<double> flat;
    for (const auto& m : minority) flat.insert(flat.end(), m.begin(), m.end());
    const NeighborIndex index(std::move(flat), original.n_features());

    std::vector<std::vector<std::size_t>> neighbor_lists(minority.size());
    for (std::size_t m = 0; m < minority.size(); ++m) {
        for (const auto& hit : index.query(minority[m], k, m)) {
            neighbor_lists[m].push_back(hit.index);
        }
    }
    for (std::size_t i = original.n_rows(); i < resampled.n_rows(); ++i) {
        const auto synth = resampled.row(i);
        double best = 1e300;
        for (std::size_t m = 0; m < minority.size() && best > tol; ++m) {
            for (std::size_t nb : neighbor_lists[m]) {
                best = std::min(best,
                                point_segment_distance(synth, minority[m], minority[nb]));
                if (best <= tol) break;
            }
        }
        REQUIRE(best <= tol);
    }
}

} // namespace

TEST_CASE("rus downsamples the majority exactly") {
    const auto data = imbalanced_blobs(400, 100, 1.0, 1);
    const auto result = rus(data, 42);
    const auto counts = class_counts(result.data);
    CHECK(counts.n_majority == 100);
    CHECK(counts.n_minority == 100);
    CHECK(result.report.n_removed == 300);
    CHECK(result.report.n_synthetic == 0);
    // retained rows are a subset of the input rows
    const auto input_rows = row_multiset(data, ClassLabel::kFullyPaid);
    for (const auto& row : row_multiset(result.data, ClassLabel::kFullyPaid)) {
        CHECK(input_rows.count(row) > 0);
    }
    // minority untouched
    CHECK(row_multiset(result.data, ClassLabel::kDefault) ==
          row_multiset(data, ClassLabel::kDefault));
}

TEST_CASE("rus on balanced input is identity up to order") {
    const auto data = imbalanced_blobs(50, 50, 1.0, 2);
    const auto result = rus(data, 3);
    CHECK(result.data.n_rows() == 100);
    CHECK(row_multiset(result.data, ClassLabel::kFullyPaid) ==
          row_multiset(data, ClassLabel::kFullyPaid));
    CHECK(row_multiset(result.data, ClassLabel::kDefault) ==
          row_multiset(data, ClassLabel::kDefault));
}

TEST_CASE("rus is deterministic per seed") {
    const auto data = imbalanced_blobs(60, 20, 1.0, 4);
    const auto a = rus(data, 9);
    const auto b = rus(data, 9);
    CHECK(a.data.values() == b.data.values());
    CHECK(a.data.labels() == b.data.labels());
}

TEST_CASE("ros duplicates minority rows to balance") {
    const auto data = imbalanced_blobs(400, 100, 1.0, 5);
    const auto result = ros(data, 7);
    const auto counts = class_counts(result.data);
    CHECK(counts.n_majority == 400);
    CHECK(counts.n_minority == 400);
    CHECK(result.report.n_synthetic == 300);
    CHECK(result.report.n_removed == 0);
    // every minority row in the output is an exact copy of an input row
    const auto originals = row_multiset(data, ClassLabel::kDefault);
    std::set<std::vector<double>> distinct_originals(originals.begin(), originals.end());
    for (const auto& row : row_multiset(result.data, ClassLabel::kDefault)) {
        CHECK(distinct_originals.count(row) == 1);
    }
    // majority untouched
    CHECK(row_multiset(result.data, ClassLabel::kFullyPaid) ==
          row_multiset(data, ClassLabel::kFullyPaid));
}

TEST_CASE("ros on balanced input is identity") {
    const auto data = imbalanced_blobs(30, 30, 1.0, 6);
    const auto result = ros(data, 1);
    CHECK(result.data.values() == data.values());
}

TEST_CASE("smote interpolates along the segment of two points") {
    const auto data = make_dataset({{0, 0}, {1, 0}, {5, 5}, {6, 6}, {7, 7}},
                                   {0, 0, 1, 1, 1});
    const auto result = smote(data, 1, 11);
    const auto counts = class_counts(result.data);
    CHECK(counts.n_majority == 3);
    CHECK(counts.n_minority == 3);
    CHECK(result.report.n_synthetic == 1);
    const auto synth = result.data.row(5);
    CHECK(synth[1] == 0.0);
    CHECK(synth[0] >= 0.0);
    CHECK(synth[0] <= 1.0);
    CHECK(result.data.labels()[5] == ClassLabel::kDefault);
}

TEST_CASE("smote balances 400/100 with 300 synthetics on segments") {
    const auto data = imbalanced_blobs(400, 100, 1.0, 13);
    const auto result = smote(data, 5, 17);
    const auto counts = class_counts(result.data);
    CHECK(counts.n_majority == 400);
    CHECK(counts.n_minority == 400);
    CHECK(result.report.n_synthetic == 300);
    check_smote_geometry(data, result.data, 5);
    // majority untouched
    CHECK(row_multiset(result.data, ClassLabel::kFullyPaid) ==
          row_multiset(data, ClassLabel::kFullyPaid));
}

TEST_CASE("smote falls back to ros when the minority is tiny") {
    const auto data = imbalanced_blobs(20, 3, 1.0, 19);
    const auto result = smote(data, 5, 23);
    CHECK(result.report.method == "smote");
    REQUIRE_FALSE(result.report.warnings.empty());
    CHECK(class_counts(result.data).n_minority == 20);
    // fallback duplicates rather than interpolates
    const auto originals = row_multiset(data, ClassLabel::kDefault);
    std::set<std::vector<double>> distinct(originals.begin(), originals.end());
    for (const auto& row : row_multiset(result.data, ClassLabel::kDefault)) {
        CHECK(distinct.count(row) == 1);
    }
}

TEST_CASE("adasyn density rule") {
    // minority cluster far away: pure neighborhoods -> smote fallback
    const auto pure = imbalanced_blobs(60, 20, 50.0, 29);
    const auto fallback = adasyn(pure, 5, 1.0, false, 31);
    CHECK(fallback.report.method == "adasyn");
    CHECK_FALSE(fallback.report.warnings.empty());
    CHECK(class_counts(fallback.data).n_minority == 60);

    // overlapping blobs: budget close to the gap (per-point round-half-up
    // may overshoot, so compare by label, not by majority role)
    const auto mixed = imbalanced_blobs(400, 100, 0.5, 37);
    const auto result = adasyn(mixed, 5, 1.0, false, 41);
    CHECK(result.report.warnings.empty());
    CHECK(result.report.after_majority == 400);
    const double gap =
        std::abs(static_cast<double>(result.report.after_minority) - 400.0);
    CHECK(gap <= 100.0); // within |minority| of 1:1 by per-point rounding
    check_smote_geometry(mixed, result.data, 5);
}

TEST_CASE("adasyn strict mode hits the budget exactly") {
    const auto mixed = imbalanced_blobs(300, 80, 0.5, 43);
    const auto result = adasyn(mixed, 5, 1.0, true, 47);
    CHECK(result.report.n_synthetic == 220);
    CHECK(class_counts(result.data).n_minority == 300);
}

TEST_CASE("adasyn rejects a tiny minority") {
    const auto data = imbalanced_blobs(20, 3, 1.0, 53);
    CHECK_THROWS_AS(adasyn(data, 5, 1.0, false, 1), MinorityTooSmall);
}

TEST_CASE("adasyn generates nothing for interior minority points") {
    // one minority point buried in its own cluster, far from the majority
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 7; ++i) {
        rows.push_back({static_cast<double>(i % 3) * 0.1, static_cast<double>(i / 3) * 0.1});
        labels.push_back(0);
    }
    for (int i = 0; i < 9; ++i) {
        rows.push_back({100.0 + i, 100.0}); // far majority
        labels.push_back(1);
    }
    // one boundary minority point next to the majority
    rows.push_back({99.0, 100.0});
    labels.push_back(0);
    const auto data = make_dataset(rows, labels);
    const auto result = adasyn(data, 5, 1.0, false, 3);
    // all synthetics interpolate from the boundary point toward minority
    // neighbors; interior points contribute r_i = 0
    CHECK(result.report.n_synthetic > 0);
    check_smote_geometry(data, result.data, 5);
}

TEST_CASE("iht keeps the easiest majority rows") {
    const auto data = imbalanced_blobs(400, 100, 1.0, 59);
    ResamplePlan plan;
    plan.method = ResampleMethod::kIht;
    plan.seed = 61;
    const auto result = iht(data, plan);
    const auto counts = class_counts(result.data);
    CHECK(counts.n_majority == 100);
    CHECK(counts.n_minority == 100);
    CHECK(result.report.n_removed == 300);
    // minority untouched
    CHECK(row_multiset(result.data, ClassLabel::kDefault) ==
          row_multiset(data, ClassLabel::kDefault));
}

TEST_CASE("iht removes a majority point planted inside the minority cluster") {
    Rng rng(67);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        rows.push_back({8.0 + rng.next_normal() * 0.3, rng.next_normal() * 0.3});
        labels.push_back(1);
    }
    // hard majority instance: deep inside the minority blob
    rows.push_back({-8.0, 0.0});
    labels.push_back(1);
    for (int i = 0; i < 30; ++i) {
        rows.push_back({-8.0 + rng.next_normal() * 0.3, rng.next_normal() * 0.3});
        labels.push_back(0);
    }
    const auto data = make_dataset(rows, labels);
    ResamplePlan plan;
    plan.method = ResampleMethod::kIht;
    plan.seed = 71;
    const auto result = iht(data, plan);
    // the planted point (unique value -8, 0 with label 1) must be gone
    for (std::size_t i = 0; i < result.data.n_rows(); ++i) {
        const bool is_planted = result.data.value(i, 0) == -8.0 &&
                                result.data.value(i, 1) == 0.0 &&
                                result.data.labels()[i] == ClassLabel::kFullyPaid;
        CHECK_FALSE(is_planted);
    }
}

TEST_CASE("iht with the logistic estimator") {
    const auto data = imbalanced_blobs(120, 40, 1.0, 73);
    ResamplePlan plan;
    plan.method = ResampleMethod::kIht;
    plan.iht_estimator = IhtEstimator::kLogistic;
    plan.seed = 79;
    const auto result = iht(data, plan);
    CHECK(class_counts(result.data).imbalance_ratio == 1.0);
}

TEST_CASE("tomek links mutual nearest opposite pairs") {
    const auto data = make_dataset({{0, 0}, {0.1, 0}, {10, 10}, {20, 20}}, {0, 1, 1, 1});
    const auto links = tomek_links(data);
    REQUIRE(links.size() == 1);
    CHECK(links[0] == std::make_pair<std::size_t, std::size_t>(0, 1));
}

TEST_CASE("tomek links empty for one class") {
    const auto data = make_dataset({{0}, {1}, {2}}, {1, 1, 1});
    CHECK(tomek_links(data).empty());
}

TEST_CASE("tomek mutuality fails along a chain") {
    // b's nearest is a, but a's nearest is c: (a, b) is not a link
    const auto data = make_dataset({{0.0}, {-0.5}, {0.3}}, {0, 1, 0});
    const auto links = tomek_links(data);
    CHECK(links.empty());
}

TEST_CASE("smote_tomek removes both members of every link") {
    // no overlap: identical to smote
    const auto clean = imbalanced_blobs(60, 20, 50.0, 83);
    ResamplePlan plan;
    plan.seed = 89;
    const auto no_links = smote_tomek(clean, plan);
    CHECK(no_links.report.n_removed == 0);
    CHECK(class_counts(no_links.data).imbalance_ratio == 1.0);

    // engineered single overlapping pair, everything else far away; the far
    // minority rows come first so the round-robin SMOTE base stays far too
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 7; ++i) {
        rows.push_back({-30.0 - i * 3.0, -40.0});
        labels.push_back(0);
    }
    rows.push_back({0, 0});
    labels.push_back(0);
    rows.push_back({0.05, 0});
    labels.push_back(1);
    for (int i = 0; i < 8; ++i) {
        rows.push_back({30.0 + i * 3.0, 40.0});
        labels.push_back(1);
    }
    const auto data = make_dataset(rows, labels);
    ResamplePlan tight;
    tight.k_smote = 3;
    tight.seed = 97;
    const auto result = smote_tomek(data, tight);
    // the overlapping pair formed a link and both members are gone
    const auto original_links = tomek_links(smote(data, 3, 97).data);
    REQUIRE_FALSE(original_links.empty());
    for (std::size_t i = 0; i < result.data.n_rows(); ++i) {
        const bool near_origin = std::abs(result.data.value(i, 0)) < 0.2 &&
                                 std::abs(result.data.value(i, 1)) < 0.2;
        CHECK_FALSE(near_origin);
    }
}

TEST_CASE("smote_enn edits disagreeing samples") {
    // pure, far-apart clusters: nothing removed
    const auto clean = imbalanced_blobs(40, 15, 50.0, 101);
    ResamplePlan plan;
    plan.seed = 103;
    const auto untouched = smote_enn(clean, plan);
    CHECK(untouched.report.n_removed == 0);

    // a lone majority point inside the minority cluster is edited out
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 25; ++i) {
        rows.push_back({50.0 + 0.05 * i, 0.0});
        labels.push_back(1);
    }
    rows.push_back({0.33, 0.0}); // lone label-1 point inside label-0 cluster
    labels.push_back(1);
    for (int i = 0; i < 20; ++i) {
        rows.push_back({0.05 * i, 0.0});
        labels.push_back(0);
    }
    const auto data = make_dataset(rows, labels);
    ResamplePlan enn_plan;
    enn_plan.k_smote = 5;
    enn_plan.k_enn = 3;
    enn_plan.seed = 107;
    const auto result = smote_enn(data, enn_plan);
    for (std::size_t i = 0; i < result.data.n_rows(); ++i) {
        const bool lone_survivor = result.data.value(i, 0) == 0.33 &&
                                   result.data.labels()[i] == ClassLabel::kFullyPaid;
        CHECK_FALSE(lone_survivor);
    }
    CHECK(result.report.n_removed > 0);
}

TEST_CASE("every method is deterministic and balances per its contract") {
    const auto data = imbalanced_blobs(150, 40, 1.0, 109);
    for (auto method : {ResampleMethod::kRus, ResampleMethod::kRos, ResampleMethod::kSmote,
                        ResampleMethod::kAdasyn, ResampleMethod::kIht,
                        ResampleMethod::kSmoteTomek, ResampleMethod::kSmoteEnn,
                        ResampleMethod::kNone}) {
        ResamplePlan plan;
        plan.method = method;
        plan.seed = 113;
        const auto a = resample(data, plan);
        const auto b = resample(data, plan);
        INFO(to_string(method));
        CHECK(a.data.values() == b.data.values());
        CHECK(a.data.labels() == b.data.labels());

        if (method == ResampleMethod::kRus || method == ResampleMethod::kRos ||
            method == ResampleMethod::kSmote || method == ResampleMethod::kIht) {
            CHECK(class_counts(a.data).imbalance_ratio == 1.0);
        }
        if (method == ResampleMethod::kAdasyn) {
            const auto counts = class_counts(a.data);
            CHECK(std::abs(static_cast<double>(counts.n_majority) -
                           static_cast<double>(counts.n_minority)) <= 40.0);
        }
        if (method == ResampleMethod::kNone) {
            CHECK(a.data.values() == data.values());
        }
        // report consistency with the returned dataset
        std::size_t majority_now = 0;
        for (auto label : a.data.labels()) {
            if (label == a.report.before.majority_label) ++majority_now;
        }
        CHECK(a.report.after_majority == majority_now);
        CHECK(a.report.after_minority == a.data.n_rows() - majority_now);
    }
}

TEST_CASE("resample report serializes to json") {
    const auto data = imbalanced_blobs(40, 10, 1.0, 127);
    const auto result = rus(data, 131);
    const auto j = result.report.to_json();
    CHECK(j.at("method") == "rus");
    CHECK(j.at("before").at("majority") == 40);
    CHECK(j.at("after").at("majority") == 10);
    CHECK(j.at("n_removed") == 30);
}
