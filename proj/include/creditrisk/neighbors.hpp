#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "creditrisk/errors.hpp"

namespace creditrisk {

// Exact Euclidean k-NN over a fixed point set. Brute force: resampling runs
// on training splits of desk scale, where O(n^2) at k <= 5 is cheap and the
// deterministic tie-break (ascending distance, then ascending point index)
// is trivial to guarantee.
class NeighborIndex {
public:
    struct Hit {
        std::size_t index = 0;
        double distance = 0.0;
    };

    NeighborIndex(std::vector<double> points, std::size_t n_features)
        : points_(std::move(points)), d_(n_features) {
        if (d_ == 0) throw EmptyPointSet("points must have at least one dimension");
        if (points_.empty() || points_.size() % d_ != 0) {
            throw EmptyPointSet("point buffer size must be a non-zero multiple of the dimension");
        }
        n_ = points_.size() / d_;
        for (double v : points_) {
            if (!std::isfinite(v)) throw ParseError("non-finite coordinate in point set");
        }
    }

    static NeighborIndex from_rows(std::span<const double> rows, std::size_t n_features) {
        return NeighborIndex(std::vector<double>(rows.begin(), rows.end()), n_features);
    }

    std::size_t size() const { return n_; }
    std::size_t dimension() const { return d_; }

    std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * d_, d_};
    }

    std::vector<Hit> query(std::span<const double> query_point, std::size_t k,
                           std::optional<std::size_t> exclude = std::nullopt) const {
        if (query_point.size() != d_) {
            throw DimensionMismatch("query point has dimension " +
                                    std::to_string(query_point.size()) + ", index has " +
                                    std::to_string(d_));
        }
        const std::size_t available = n_ - (exclude && *exclude < n_ ? 1 : 0);
        if (k == 0 || k > available) {
            throw KTooLarge("k=" + std::to_string(k) + " with " +
                            std::to_string(available) + " available points");
        }

        std::vector<std::pair<double, std::size_t>> candidates;
        candidates.reserve(available);
        for (std::size_t i = 0; i < n_; ++i) {
            if (exclude && i == *exclude) continue;
            candidates.emplace_back(squared_distance(i, query_point), i);
        }
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                          candidates.end());
        std::vector<Hit> hits(k);
        for (std::size_t j = 0; j < k; ++j) {
            hits[j] = {candidates[j].second, std::sqrt(candidates[j].first)};
        }
        return hits;
    }

    // 1-NN of every stored point, self excluded. Used by Tomek-link and ENN
    // style edits, which query all points anyway.
    std::vector<std::size_t> all_nearest() const {
        if (n_ < 2) throw KTooLarge("all_nearest requires at least two points");
        std::vector<std::size_t> nearest(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            nearest[i] = query(point(i), 1, i)[0].index;
        }
        return nearest;
    }

private:
    double squared_distance(std::size_t i, std::span<const double> q) const {
        const double* p = points_.data() + i * d_;
        double sum = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
            const double diff = p[j] - q[j];
            sum += diff * diff;
        }
        return sum;
    }

    std::vector<double> points_;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
};

} // namespace creditrisk
