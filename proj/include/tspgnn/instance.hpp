// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/rng.hpp"
#include "tspgnn/tensor.hpp"

namespace tspgnn {

/// A complete undirected TSP instance: symmetric weight matrix in [0,1] with
/// a zero diagonal. Coordinates are kept when the instance is geometric.
struct TspInstance {
    std::size_t n = 0;
    Tensor weights;                               // n x n
    std::vector<std::array<double, 2>> coords;    // empty when non-geometric
    std::optional<double> optimal_cost;

    double weight(std::size_t i, std::size_t j) const { return weights(i, j); }

    void validate() const {
        if (n < 3) throw DataError("TspInstance: need at least 3 cities, got " +
                                   std::to_string(n));
        if (weights.rows() != n || weights.cols() != n)
            throw ShapeError("TspInstance: weight matrix shape " + weights.shape_str());
        for (std::size_t i = 0; i < n; ++i) {
            if (weights(i, i) != 0.0) throw DataError("TspInstance: nonzero diagonal");
            for (std::size_t j = 0; j < n; ++j) {
                const double w = weights(i, j);
                if (!(w >= 0.0 && w <= 1.0))
                    throw DataError("TspInstance: weight out of [0,1] at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
                if (w != weights(j, i)) throw DataError("TspInstance: asymmetric weights");
            }
        }
        if (!coords.empty() && coords.size() != n)
            throw DataError("TspInstance: coordinate count mismatch");
    }
};

inline double euclidean(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

inline TspInstance instance_from_coords(std::vector<std::array<double, 2>> coords) {
    TspInstance inst;
    inst.n = coords.size();
    inst.weights = Tensor::matrix(inst.n, inst.n);
    for (std::size_t i = 0; i < inst.n; ++i)
        for (std::size_t j = i + 1; j < inst.n; ++j) {
            const double d = euclidean(coords[i], coords[j]);
            inst.weights(i, j) = d;
            inst.weights(j, i) = d;
        }
    inst.coords = std::move(coords);
    return inst;
}

/// Side length sqrt(2)/2 makes the square's diagonal exactly 1, so all
/// pairwise distances land in [0,1] without rescaling.
inline constexpr double kSquareSide = 0.7071067811865476;

/// n uniform points on the sqrt(2)/2 square; weights are their pairwise
/// euclidean distances.
inline TspInstance gen_euclidean(std::size_t n, Rng& rng) {
    std::vector<std::array<double, 2>> coords(n);
    for (auto& p : coords) {
        p[0] = rng.uniform(0.0, kSquareSide);
        p[1] = rng.uniform(0.0, kSquareSide);
    }
    return instance_from_coords(std::move(coords));
}

/// Replaces every weight by the all-pairs shortest-path distance. Cubic
/// Floyd-Warshall; instance sizes make anything cleverer pointless.
inline void metric_closure(Tensor& w) {
    const std::size_t n = w.rows();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            const double wik = w(i, k);
            for (std::size_t j = 0; j < n; ++j) {
                const double via = wik + w(k, j);
                if (via < w(i, j)) w(i, j) = via;
            }
        }
}

inline TspInstance gen_random_weights(std::size_t n, Rng& rng) {
    TspInstance inst;
    inst.n = n;
    inst.weights = Tensor::matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = 1.0 - rng.uniform();  // uniform in (0,1]
            inst.weights(i, j) = w;
            inst.weights(j, i) = w;
        }
    return inst;
}

/// Uniform weights in (0,1] with no structure; most instances violate the
/// triangle inequality.
inline TspInstance gen_random(std::size_t n, Rng& rng) { return gen_random_weights(n, rng); }

/// Uniform weights pushed through the shortest-path closure, which enforces
/// the triangle inequality while keeping weights in (0,1].
inline TspInstance gen_random_metric(std::size_t n, Rng& rng) {
    TspInstance inst = gen_random_weights(n, rng);
    metric_closure(inst.weights);
    return inst;
}

enum class GeneratorTag { kEuclidean, kRandomMetric, kRandom };

inline const char* to_string(GeneratorTag tag) {
    switch (tag) {
        case GeneratorTag::kEuclidean: return "euclidean";
        case GeneratorTag::kRandomMetric: return "random_metric";
        case GeneratorTag::kRandom: return "random";
    }
    throw InternalError("unknown generator tag");
}

inline GeneratorTag generator_tag_from(const std::string& s) {
    if (s == "euclidean") return GeneratorTag::kEuclidean;
    if (s == "random_metric") return GeneratorTag::kRandomMetric;
    if (s == "random") return GeneratorTag::kRandom;
    throw ParseError("unknown generator tag: " + s);
}

/// Generation is a pure function of (tag, n, seed).
inline TspInstance generate_instance(GeneratorTag tag, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    switch (tag) {
        case GeneratorTag::kEuclidean: return gen_euclidean(n, rng);
        case GeneratorTag::kRandomMetric: return gen_random_metric(n, rng);
        case GeneratorTag::kRandom: return gen_random(n, rng);
    }
    throw InternalError("unknown generator tag");
}

/// One yes/no question about a graph: does a tour cheaper than target_cost
/// exist? The model consumes the target normalized by the city count.
struct DecisionInstance {
    TspInstance graph;
    double target_cost = 0.0;
    double normalized_target = 0.0;  // target_cost / n
    std::optional<bool> label;

    static DecisionInstance make(TspInstance graph, double target_cost,
                                 std::optional<bool> label = std::nullopt) {
        DecisionInstance d;
        d.target_cost = target_cost;
        d.normalized_target = target_cost / static_cast<double>(graph.n);
        d.graph = std::move(graph);
        d.label = label;
        return d;
    }
};

}  // namespace tspgnn
