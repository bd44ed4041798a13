#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "logogan/core/rng.hpp"

namespace logogan {

struct EmbeddingPoint {
    std::string id;
    std::vector<double> vector;
};

struct ClusterAssignment {
    std::vector<std::vector<double>> centroids; // K x D
    std::map<std::string, int> labels;          // id -> cluster
    double inertia = 0.0;
    int k = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline int nearest_centroid(const std::vector<double>& p,
                            const std::vector<std::vector<double>>& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t k = 0; k < centroids.size(); ++k) {
        const double d = sq_dist(p, centroids[k]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

// k-means++ seeding
inline std::vector<std::vector<double>> kmeanspp_init(
    const std::vector<EmbeddingPoint>& points, int k, Rng& rng) {
    std::vector<std::vector<double>> centroids;
    centroids.push_back(points[rng.below(points.size())].vector);
    std::vector<double> d2(points.size());
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centroids) best = std::min(best, sq_dist(points[i].vector, c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            for (; pick + 1 < points.size(); ++pick) {
                r -= d2[pick];
                if (r <= 0.0) break;
            }
        } else {
            pick = rng.below(points.size());
        }
        centroids.push_back(points[pick].vector);
    }
    return centroids;
}

} // namespace detail

// Lloyd iterations from seeded k-means++ init. Converges when the maximum
// centroid shift drops below tol. Empty clusters are reseeded from the point
// farthest from its assigned centroid.
namespace detail {
inline ClusterAssignment kmeans_single(const std::vector<EmbeddingPoint>& points, int k,
                                       std::uint64_t seed, int max_iter, double tol) {
    if (k < 1) throw std::invalid_argument("K must be >= 1");
    if (static_cast<int>(points.size()) < k)
        throw std::invalid_argument("fewer points than K");
    if (max_iter < 1 || tol < 0) throw std::invalid_argument("bad max_iter/tol");
    const std::size_t dim = points.front().vector.size();
    for (const auto& p : points) {
        if (p.vector.size() != dim) throw std::invalid_argument("inconsistent dimensions");
        for (double v : p.vector)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite component in " + p.id);
    }
    {
        std::set<std::vector<double>> distinct;
        for (const auto& p : points) {
            distinct.insert(p.vector);
            if (static_cast<int>(distinct.size()) >= k) break;
        }
        if (static_cast<int>(distinct.size()) < k)
            throw std::invalid_argument(
                "fewer than K distinct points; choose a smaller K");
    }

    Rng rng(mix_seed(seed, 0x6B6D6561ull));
    auto centroids = detail::kmeanspp_init(points, k, rng);
    std::vector<int> assign(points.size(), -1);

    double prev_inertia = std::numeric_limits<double>::max();
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step
        double inertia = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            assign[i] = detail::nearest_centroid(points[i].vector, centroids);
            inertia += detail::sq_dist(points[i].vector, centroids[assign[i]]);
        }
        if (inertia > prev_inertia + 1e-9)
            throw std::logic_error("k-means inertia increased");
        prev_inertia = inertia;

        // update step: sum then divide, order-independent
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<int> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i].vector[d];
        }
        // repair empty clusters from the farthest point
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (counts[assign[i]] <= 1) continue;
                const double d = detail::sq_dist(points[i].vector, centroids[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[assign[far]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[far]][d] -= points[far].vector[d];
            assign[far] = c;
            counts[c] = 1;
            sums[c] = points[far].vector;
        }
        double max_shift = 0.0;
        for (int c = 0; c < k; ++c) {
            std::vector<double> nc(dim);
            for (std::size_t d = 0; d < dim; ++d) nc[d] = sums[c][d] / counts[c];
            max_shift = std::max(max_shift, std::sqrt(detail::sq_dist(nc, centroids[c])));
            centroids[c] = std::move(nc);
        }
        if (max_shift < tol) break;
    }

    ClusterAssignment out;
    out.centroids = centroids;
    out.k = k;
    out.seed = seed;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int c = detail::nearest_centroid(points[i].vector, centroids);
        out.labels[points[i].id] = c;
        out.inertia += detail::sq_dist(points[i].vector, centroids[c]);
    }
    return out;
}
} // namespace detail

// Seeded Lloyd's with k-means++ restarts; the lowest-inertia run wins, which
// makes small fixtures land on the true optimum instead of a local one.
inline ClusterAssignment kmeans_cluster(const std::vector<EmbeddingPoint>& points, int k,
                                        std::uint64_t seed, int max_iter = 100,
                                        double tol = 1e-8, int n_init = 8) {
    if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
    ClusterAssignment best;
    for (int attempt = 0; attempt < n_init; ++attempt) {
        ClusterAssignment got = detail::kmeans_single(
            points, k, mix_seed(seed, 0x726573ull, static_cast<std::uint64_t>(attempt)),
            max_iter, tol);
        if (attempt == 0 || got.inertia < best.inertia) best = std::move(got);
    }
    best.seed = seed;
    return best;
}

struct ClusterReport {
    std::vector<int> sizes;
    std::vector<double> inertia_share;
    // distance to own centroid vs distance to the nearest other centroid
    double mean_margin = 0.0;
    double min_margin = 0.0;
};

inline ClusterReport cluster_report(const std::vector<EmbeddingPoint>& points,
                                    const ClusterAssignment& a) {
    ClusterReport rep;
    rep.sizes.assign(a.k, 0);
    std::vector<double> inertia(a.k, 0.0);
    double total = 0.0, margin_sum = 0.0;
    double margin_min = std::numeric_limits<double>::max();
    for (const auto& p : points) {
        auto it = a.labels.find(p.id);
        if (it == a.labels.end()) throw std::invalid_argument("point not in assignment: " + p.id);
        const int c = it->second;
        ++rep.sizes[c];
        const double own = detail::sq_dist(p.vector, a.centroids[c]);
        inertia[c] += own;
        total += own;
        double other = std::numeric_limits<double>::max();
        for (int j = 0; j < a.k; ++j)
            if (j != c) other = std::min(other, detail::sq_dist(p.vector, a.centroids[j]));
        const double margin = a.k == 1 ? 0.0 : std::sqrt(other) - std::sqrt(own);
        margin_sum += margin;
        margin_min = std::min(margin_min, margin);
    }
    rep.inertia_share.assign(a.k, 0.0);
    for (int c = 0; c < a.k; ++c)
        rep.inertia_share[c] = total > 0.0 ? inertia[c] / total : (c == 0 ? 1.0 : 0.0);
    if (a.k == 1) rep.inertia_share[0] = 1.0;
    rep.mean_margin = points.empty() ? 0.0 : margin_sum / static_cast<double>(points.size());
    rep.min_margin = points.empty() ? 0.0 : margin_min;
    return rep;
}

inline nlohmann::ordered_json cluster_report_json(const ClusterReport& rep) {
    nlohmann::ordered_json j;
    j["sizes"] = rep.sizes;
    j["inertia_share"] = rep.inertia_share;
    j["mean_margin"] = rep.mean_margin;
    j["min_margin"] = rep.min_margin;
    return j;
}

} // namespace logogan
