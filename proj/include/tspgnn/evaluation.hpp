// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tspgnn/dataset.hpp"
#include "tspgnn/model.hpp"
#include "tspgnn/oracles.hpp"
#include "tspgnn/parallel.hpp"

namespace tspgnn {

/// Yes-probability of a decision question (graph, raw target cost).
using Predictor = std::function<double(const TspInstance&, double)>;

inline Predictor model_predictor(const ModelParams* params) {
    return [params](const TspInstance& inst, double target) {
        return forward(inst, target, *params);
    };
}

namespace detail {
inline std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Accuracy at a fixed deviation
// ---------------------------------------------------------------------------

/// Fraction of dual-instance predictions on the correct side of 0.5: each
/// graph is asked at (1+x)C* (YES) and (1-x)C* (NO).
inline double eval_accuracy(const ModelParams& params, const std::vector<DatasetRecord>& records,
                            double deviation, std::size_t threads = 1) {
    std::vector<std::uint8_t> correct(2 * records.size(), 0);
    parallel_for(records.size(), threads, [&](std::size_t i) {
        const DatasetRecord& rec = records[i];
        const double opt = rec.optimal();
        correct[2 * i] = forward(rec.instance, (1.0 + deviation) * opt, params) > 0.5;
        correct[2 * i + 1] = forward(rec.instance, (1.0 - deviation) * opt, params) < 0.5;
    });
    std::size_t total = 0;
    for (std::uint8_t c : correct) total += c;
    return static_cast<double>(total) / static_cast<double>(correct.size());
}

// ---------------------------------------------------------------------------
// Acceptance curves
// ---------------------------------------------------------------------------

struct AcceptanceCurve {
    std::vector<double> deviations;       // strictly increasing
    std::vector<double> mean_prediction;  // one entry per deviation
    std::vector<double> derivative;       // forward differences, size-1 entries
    std::size_t samples = 0;
    std::string size_class;

    void write_tsv(std::ostream& out) const {
        out << "deviation\tmean_prediction\tderivative\tsamples\n";
        for (std::size_t i = 0; i < deviations.size(); ++i) {
            out << detail::fmt_real(deviations[i]) << '\t'
                << detail::fmt_real(mean_prediction[i]) << '\t'
                << (i ? detail::fmt_real(derivative[i - 1]) : std::string("na")) << '\t'
                << samples << '\n';
        }
    }
};

/// Mean prediction per deviation over a set of solved graphs, asked at
/// target (1 + dev) * C*. The discrete derivative locates the transition.
inline AcceptanceCurve acceptance_curve(const Predictor& predict,
                                        const std::vector<DatasetRecord>& records,
                                        const std::vector<double>& grid,
                                        std::size_t threads = 1) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("acceptance_curve: deviations must be strictly increasing");
    AcceptanceCurve curve;
    curve.deviations = grid;
    curve.samples = records.size();
    curve.mean_prediction.assign(grid.size(), 0.0);

    std::vector<double> sums(grid.size() * records.size(), 0.0);
    parallel_for(records.size(), threads, [&](std::size_t r) {
        const DatasetRecord& rec = records[r];
        const double opt = rec.optimal();
        for (std::size_t g = 0; g < grid.size(); ++g)
            sums[g * records.size() + r] = predict(rec.instance, (1.0 + grid[g]) * opt);
    });
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double total = 0.0;
        for (std::size_t r = 0; r < records.size(); ++r) total += sums[g * records.size() + r];
        curve.mean_prediction[g] = total / static_cast<double>(records.size());
    }
    for (std::size_t g = 1; g < grid.size(); ++g)
        curve.derivative.push_back((curve.mean_prediction[g] - curve.mean_prediction[g - 1]) /
                                   (grid[g] - grid[g - 1]));
    return curve;
}

// ---------------------------------------------------------------------------
// Accuracy sweeps over sizes and deviations
// ---------------------------------------------------------------------------

struct SweepResult {
    struct Row {
        double axis = 0.0;       // size or primary deviation value
        double deviation = 0.0;  //
        double accuracy = 0.0;
        std::size_t samples = 0;
        bool approx_truth = false;
    };
    std::vector<Row> rows;

    void write_tsv(std::ostream& out) const {
        out << "axis\tdeviation\taccuracy\tsamples\ttruth\n";
        for (const Row& r : rows)
            out << detail::fmt_real(r.axis) << '\t' << detail::fmt_real(r.deviation) << '\t'
                << detail::fmt_real(r.accuracy) << '\t' << r.samples << '\t'
                << (r.approx_truth ? "approx" : "exact") << '\n';
    }
};

/// Accuracy per (size, deviation) cell over fresh euclidean samples. Sizes
/// beyond the exact oracle fall back to annealing-with-restarts ground
/// truth, flagged approximate in the output.
inline SweepResult size_sweep(const ModelParams& params, const std::vector<std::size_t>& sizes,
                              const std::vector<double>& deviations, std::size_t samples,
                              std::uint64_t seed, std::size_t threads = 1) {
    SweepResult result;
    for (std::size_t n : sizes) {
        const bool approx = n > kHeldKarpMaxCities;
        std::vector<DatasetRecord> records =
            make_records(GeneratorTag::kEuclidean, samples, n, n, derive_seed(seed, n),
                         approx ? OraclePolicy::kAllowApproximate : OraclePolicy::kExactOnly,
                         threads);
        for (double dev : deviations) {
            SweepResult::Row row;
            row.axis = static_cast<double>(n);
            row.deviation = dev;
            row.accuracy = eval_accuracy(params, records, dev, threads);
            row.samples = 2 * samples;
            row.approx_truth = approx;
            result.rows.push_back(row);
        }
    }
    return result;
}

/// Accuracy per (distribution, deviation) cell on fresh samples of each tag.
inline SweepResult distribution_eval(const ModelParams& params,
                                     const std::vector<GeneratorTag>& tags,
                                     const std::vector<double>& deviations, std::size_t samples,
                                     std::size_t n_min, std::size_t n_max, std::uint64_t seed,
                                     std::size_t threads = 1) {
    SweepResult result;
    for (std::size_t t = 0; t < tags.size(); ++t) {
        std::vector<DatasetRecord> records = make_records(
            tags[t], samples, n_min, n_max, derive_seed(seed, 0xd15712 + t), OraclePolicy::kExactOnly,
            threads);
        for (double dev : deviations) {
            SweepResult::Row row;
            row.axis = static_cast<double>(t);
            row.deviation = dev;
            row.accuracy = eval_accuracy(params, records, dev, threads);
            row.samples = 2 * samples;
            result.rows.push_back(row);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Baseline comparison (true positive rates)
// ---------------------------------------------------------------------------

struct TprTable {
    std::vector<double> deviations;
    std::vector<double> model_tpr;
    std::vector<double> nn_rate;
    std::vector<double> sa_rate;
    std::size_t samples = 0;

    void write_tsv(std::ostream& out) const {
        out << "deviation\tmodel_tpr\tnn_rate\tsa_rate\tsamples\n";
        for (std::size_t i = 0; i < deviations.size(); ++i)
            out << detail::fmt_real(deviations[i]) << '\t' << detail::fmt_real(model_tpr[i])
                << '\t' << detail::fmt_real(nn_rate[i]) << '\t' << detail::fmt_real(sa_rate[i])
                << '\t' << samples << '\n';
    }
};

/// Model TPR on YES instances versus the frequency with which each heuristic
/// constructively proves a tour within (1 + dev) * C*.
inline TprTable baseline_tpr(const ModelParams& params,
                             const std::vector<DatasetRecord>& records,
                             const std::vector<double>& deviations, const SaParams& sa_params,
                             std::size_t threads = 1) {
    TprTable table;
    table.deviations = deviations;
    table.samples = records.size();

    std::vector<double> model_yes(records.size() * deviations.size(), 0.0);
    std::vector<double> nn_cost(records.size(), 0.0);
    std::vector<double> sa_cost(records.size(), 0.0);
    parallel_for(records.size(), threads, [&](std::size_t r) {
        const DatasetRecord& rec = records[r];
        const double opt = rec.optimal();
        nn_cost[r] = nearest_neighbor(rec.instance, 0).cost;
        SaParams run = sa_params;
        run.seed = derive_seed(sa_params.seed, 0xba5e0000ULL + r);
        sa_cost[r] = simulated_annealing(rec.instance, run).cost;
        for (std::size_t d = 0; d < deviations.size(); ++d)
            model_yes[d * records.size() + r] =
                forward(rec.instance, (1.0 + deviations[d]) * opt, params) > 0.5 ? 1.0 : 0.0;
    });

    for (std::size_t d = 0; d < deviations.size(); ++d) {
        double tpr = 0.0, nn = 0.0, sa = 0.0;
        for (std::size_t r = 0; r < records.size(); ++r) {
            const double bound = (1.0 + deviations[d]) * records[r].optimal();
            tpr += model_yes[d * records.size() + r];
            nn += nn_cost[r] <= bound ? 1.0 : 0.0;
            sa += sa_cost[r] <= bound ? 1.0 : 0.0;
        }
        const double denom = static_cast<double>(records.size());
        table.model_tpr.push_back(tpr / denom);
        table.nn_rate.push_back(nn / denom);
        table.sa_rate.push_back(sa / denom);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Binary search for the optimal cost
// ---------------------------------------------------------------------------

struct BinarySearchResult {
    double cost = 0.0;
    std::size_t iterations = 0;
    bool capped = false;
    struct Step {
        double c_min, c, c_max;
    };
    std::vector<Step> trace;
};

inline constexpr std::size_t kBinarySearchCap = 64;

/// Bisects the deviation axis of the acceptance curve. The bracket starts at
/// the sums of the n cheapest / n most expensive edges (any tour uses
/// exactly n edges, so the optimum is inside); the first probe is uniform in
/// the bracket when an rng is given, its midpoint otherwise. Stops once the
/// bracket sits within the +-delta band of the last evaluated cost, with a
/// hard cap against non-termination.
inline BinarySearchResult binary_search_cost(const Predictor& predict, const TspInstance& inst,
                                             double p, double delta, Rng* rng,
                                             std::size_t cap = kBinarySearchCap) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("binary_search_cost: p must be in (0,1)");
    if (!(delta > 0.0)) throw ConfigError("binary_search_cost: delta must be positive");

    std::vector<double> all;
    all.reserve(inst.n * (inst.n - 1) / 2);
    for (std::size_t i = 0; i < inst.n; ++i)
        for (std::size_t j = i + 1; j < inst.n; ++j) all.push_back(inst.weight(i, j));
    std::sort(all.begin(), all.end());
    double c_min = 0.0, c_max = 0.0;
    for (std::size_t k = 0; k < inst.n; ++k) {
        c_min += all[k];
        c_max += all[all.size() - 1 - k];
    }

    BinarySearchResult result;
    double c = rng ? rng->uniform(c_min, c_max) : 0.5 * (c_min + c_max);
    for (;;) {
        if (result.iterations >= cap) {
            result.capped = true;
            break;
        }
        result.trace.push_back({c_min, c, c_max});
        const double prediction = predict(inst, c);
        if (prediction < p)
            c_min = c;
        else
            c_max = c;
        ++result.iterations;
        if (c_min >= c * (1.0 - delta) && c_max <= c * (1.0 + delta)) break;
        c = 0.5 * (c_min + c_max);
    }
    result.cost = c;
    return result;
}

}  // namespace tspgnn
