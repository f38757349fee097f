// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/instance.hpp"
#include "tspgnn/rng.hpp"

namespace tspgnn {

struct Tour {
    std::vector<std::size_t> order;  // permutation of 0..n-1
    double cost = 0.0;
};

/// Cyclic tour cost, including the closing edge back to the first city.
inline double tour_cost(const TspInstance& inst, const std::vector<std::size_t>& order) {
    const std::size_t n = inst.n;
    if (order.size() != n) throw DataError("tour_cost: order length != n");
    std::vector<bool> seen(n, false);
    for (std::size_t city : order) {
        if (city >= n || seen[city]) throw DataError("tour_cost: order is not a permutation");
        seen[city] = true;
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += inst.weight(order[i], order[(i + 1) % n]);
    return cost;
}

/// Exhaustive minimum over all (n-1)!/2 distinct cyclic tours. Test oracle;
/// capped at n <= 10.
inline Tour brute_force_optimal(const TspInstance& inst) {
    const std::size_t n = inst.n;
    if (n < 3 || n > 10)
        throw DataError("brute_force_optimal: n must be in [3,10], got " + std::to_string(n));
    std::vector<std::size_t> rest(n - 1);
    std::iota(rest.begin(), rest.end(), 1);
    Tour best;
    best.cost = std::numeric_limits<double>::infinity();
    do {
        // Fixing city 0 first kills rotations; requiring the neighbor order
        // rest.front() < rest.back() kills reflections.
        if (rest.front() > rest.back()) continue;
        double cost = inst.weight(0, rest.front());
        for (std::size_t i = 0; i + 1 < rest.size(); ++i)
            cost += inst.weight(rest[i], rest[i + 1]);
        cost += inst.weight(rest.back(), 0);
        if (cost < best.cost) {
            best.cost = cost;
            best.order.assign(1, 0);
            best.order.insert(best.order.end(), rest.begin(), rest.end());
        }
    } while (std::next_permutation(rest.begin(), rest.end()));
    best.cost = tour_cost(inst, best.order);
    return best;
}

inline constexpr std::size_t kHeldKarpMaxCities = 20;

/// Exact optimum by subset dynamic programming, O(2^n n^2) time and
/// O(2^n n) memory. The tour is rebuilt from parent pointers.
inline Tour held_karp(const TspInstance& inst) {
    const std::size_t n = inst.n;
    if (n < 3) throw DataError("held_karp: n must be >= 3");
    if (n > kHeldKarpMaxCities)
        throw DataError("held_karp: n=" + std::to_string(n) + " exceeds capacity " +
                        std::to_string(kHeldKarpMaxCities));
    const std::size_t m = n - 1;  // cities 1..n-1; city 0 is the anchor
    const std::size_t full = std::size_t{1} << m;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(full * m, inf);
    std::vector<std::int8_t> parent(full * m, -1);

    for (std::size_t j = 0; j < m; ++j)
        dp[(std::size_t{1} << j) * m + j] = inst.weight(0, j + 1);

    for (std::size_t mask = 1; mask < full; ++mask) {
        if ((mask & (mask - 1)) == 0) continue;  // singletons are seeded above
        for (std::size_t j = 0; j < m; ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            const std::size_t prev_mask = mask ^ (std::size_t{1} << j);
            double best = inf;
            std::int8_t best_k = -1;
            for (std::size_t k = 0; k < m; ++k) {
                if (!(prev_mask & (std::size_t{1} << k))) continue;
                const double cand = dp[prev_mask * m + k] + inst.weight(k + 1, j + 1);
                if (cand < best) {
                    best = cand;
                    best_k = static_cast<std::int8_t>(k);
                }
            }
            dp[mask * m + j] = best;
            parent[mask * m + j] = best_k;
        }
    }

    double best = inf;
    std::size_t best_end = 0;
    for (std::size_t j = 0; j < m; ++j) {
        const double cand = dp[(full - 1) * m + j] + inst.weight(j + 1, 0);
        if (cand < best) {
            best = cand;
            best_end = j;
        }
    }

    Tour tour;
    tour.order.resize(n);
    std::size_t mask = full - 1;
    std::size_t j = best_end;
    for (std::size_t pos = n; pos-- > 1;) {
        tour.order[pos] = j + 1;
        const std::int8_t k = parent[mask * m + j];
        mask ^= (std::size_t{1} << j);
        if (k < 0) break;
        j = static_cast<std::size_t>(k);
    }
    tour.order[0] = 0;
    tour.cost = tour_cost(inst, tour.order);
    return tour;
}

/// Greedy closest-unvisited-city construction; distance ties go to the
/// lowest city index so the result is reproducible.
inline Tour nearest_neighbor(const TspInstance& inst, std::size_t start) {
    const std::size_t n = inst.n;
    if (start >= n) throw DataError("nearest_neighbor: start city out of range");
    std::vector<bool> visited(n, false);
    Tour tour;
    tour.order.reserve(n);
    std::size_t current = start;
    tour.order.push_back(current);
    visited[current] = true;
    for (std::size_t step = 1; step < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t next = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (visited[c]) continue;
            const double w = inst.weight(current, c);
            if (w < best) {
                best = w;
                next = c;
            }
        }
        visited[next] = true;
        tour.order.push_back(next);
        current = next;
    }
    tour.cost = tour_cost(inst, tour.order);
    return tour;
}

struct SaParams {
    double t0 = 1.0;
    double alpha = 0.95;
    double t_min = 1e-4;
    std::size_t moves_per_temperature = 0;  // 0 = auto (100 * n)
    std::uint64_t seed = 0;

    void validate() const {
        if (!(t0 > 0.0)) throw ConfigError("SaParams: t0 must be positive");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("SaParams: alpha must be in (0,1)");
        if (!(t_min > 0.0 && t_min < t0)) throw ConfigError("SaParams: need 0 < t_min < t0");
    }
};

/// 2-opt simulated annealing seeded from the nearest-neighbor tour. Worse
/// moves are accepted with probability exp(-delta/T) under geometric cooling;
/// the best tour seen is returned, so the result never loses to the
/// initialization.
inline Tour simulated_annealing(const TspInstance& inst, const SaParams& params) {
    params.validate();
    const std::size_t n = inst.n;
    const std::size_t moves =
        params.moves_per_temperature ? params.moves_per_temperature : 100 * n;
    Rng rng(params.seed);

    Tour current = nearest_neighbor(inst, 0);
    std::vector<std::size_t>& order = current.order;
    double cost = current.cost;
    std::vector<std::size_t> best_order = order;
    double best_cost = cost;

    for (double temp = params.t0; temp >= params.t_min; temp *= params.alpha) {
        for (std::size_t move = 0; move < moves; ++move) {
            // Reverse order[p..q]; endpoints p-1 and q+1 stay put.
            const std::size_t p = 1 + rng.index(n - 2);
            const std::size_t q = p + 1 + rng.index(n - 1 - p);
            const std::size_t a = order[p - 1], b = order[p];
            const std::size_t c = order[q], d = order[(q + 1) % n];
            const double delta =
                inst.weight(a, c) + inst.weight(b, d) - inst.weight(a, b) - inst.weight(c, d);
            if (delta < 0.0 || rng.uniform() < std::exp(-delta / temp)) {
                std::reverse(order.begin() + static_cast<std::ptrdiff_t>(p),
                             order.begin() + static_cast<std::ptrdiff_t>(q + 1));
                cost += delta;
                if (cost < best_cost) {
                    best_cost = cost;
                    best_order = order;
                }
            }
        }
    }
    Tour best;
    best.order = std::move(best_order);
    best.cost = tour_cost(inst, best.order);  // drop incremental rounding drift
    return best;
}

/// Best of several independently seeded annealing runs; the approximate
/// stand-in for exact optima beyond the dynamic program's reach.
inline Tour sa_with_restarts(const TspInstance& inst, std::size_t restarts, std::uint64_t seed,
                             const SaParams& base = SaParams{}) {
    Tour best;
    best.cost = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        SaParams params = base;
        params.seed = derive_seed(seed, r);
        Tour tour = simulated_annealing(inst, params);
        if (tour.cost < best.cost) best = std::move(tour);
    }
    return best;
}

/// Seeded random search over (t0, alpha, t_min). The incumbent defaults are
/// evaluated first, so the result never regresses against them; every trial
/// is scored by mean relative excess over the known optima.
inline SaParams calibrate_sa(const std::vector<TspInstance>& instances, std::size_t budget,
                             std::uint64_t seed = 0) {
    if (instances.empty()) throw DataError("calibrate_sa: empty calibration set");
    for (const TspInstance& inst : instances)
        if (!inst.optimal_cost)
            throw DataError("calibrate_sa: calibration instances need optimal costs");

    Rng rng(seed);
    auto mean_excess = [&](const SaParams& params) {
        double total = 0.0;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            SaParams run = params;
            run.seed = derive_seed(seed, 0x5a5a0000ULL + i);
            const Tour tour = simulated_annealing(instances[i], run);
            const double opt = *instances[i].optimal_cost;
            total += (tour.cost - opt) / opt;
        }
        return total / static_cast<double>(instances.size());
    };

    SaParams best{};
    double best_score = mean_excess(best);
    for (std::size_t trial = 0; trial < budget; ++trial) {
        SaParams cand;
        cand.t0 = std::exp(rng.uniform(std::log(1e-2), std::log(10.0)));
        cand.alpha = rng.uniform(0.8, 0.999);
        cand.t_min = std::exp(rng.uniform(std::log(1e-6), std::log(1e-2)));
        if (cand.t_min >= cand.t0) cand.t_min = cand.t0 * 1e-3;
        const double score = mean_excess(cand);
        if (score < best_score) {
            best_score = score;
            best = cand;
        }
    }
    return best;
}

}  // namespace tspgnn
