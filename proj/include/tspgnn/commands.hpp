// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tspgnn/config.hpp"
#include "tspgnn/evaluation.hpp"
#include "tspgnn/trainer.hpp"
#include "tspgnn/tsplib.hpp"

namespace tspgnn {

namespace detail {

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg, const std::string& command) {
    const std::filesystem::path dir = cfg.str("out_dir");
    std::filesystem::create_directories(dir);
    std::ofstream resolved(dir / "resolved_config.txt");
    if (!resolved) throw DataError("cannot write resolved config under " + dir.string());
    cfg.write_resolved(resolved, command);
    return dir;
}

inline ModelConfig model_config(const RunConfig& cfg) {
    ModelConfig model = ModelConfig::sized(cfg.u64("model.d"), cfg.u64("model.t_max"));
    if (model.d == 64) model.init_hidden = {8, 16, 32};
    model.validate();
    return model;
}

inline TrainConfig train_config(const RunConfig& cfg) {
    TrainConfig train;
    train.epochs = cfg.u64("train.epochs");
    train.batches_per_epoch = cfg.u64("train.batches_per_epoch");
    train.pairs_per_batch = cfg.u64("train.pairs_per_batch");
    train.deviation = cfg.real("train.deviation");
    train.learning_rate = cfg.real("train.lr");
    train.checkpoint_every = cfg.u64("train.checkpoint_every");
    train.seed = cfg.u64("seed");
    train.threads = cfg.u64("threads");
    train.model = model_config(cfg);
    train.validate();
    return train;
}

inline ModelParams load_params(const RunConfig& cfg) {
    const std::string path = cfg.str("checkpoint");
    if (path.empty()) throw ConfigError("this command needs a checkpoint= path");
    Checkpoint ckpt = load_checkpoint(path, model_config(cfg));
    return std::move(ckpt.params);
}

inline std::vector<DatasetRecord> load_records(const RunConfig& cfg) {
    const std::string path = cfg.str("dataset");
    if (path.empty()) throw ConfigError("this command needs a dataset= path");
    return load_dataset(path);
}

inline std::string seed_suffix(const RunConfig& cfg) { return "_seed" + cfg.str("seed"); }

template <typename Table>
void write_table(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    table.write_tsv(out);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate: produce and persist a solved dataset
// ---------------------------------------------------------------------------

inline void cmd_generate(const RunConfig& cfg) {
    const auto dir = detail::prepare_out_dir(cfg, "generate");
    const GeneratorTag tag = generator_tag_from(cfg.str("gen.tag"));
    const OraclePolicy policy = cfg.flag("gen.allow_approx") ? OraclePolicy::kAllowApproximate
                                                             : OraclePolicy::kExactOnly;
    std::vector<DatasetRecord> records =
        make_records(tag, cfg.u64("gen.count"), cfg.u64("gen.n_min"), cfg.u64("gen.n_max"),
                     cfg.u64("seed"), policy, cfg.u64("threads"));
    save_dataset(records, (dir / "dataset.txt").string());
    std::cout << "generate: wrote " << records.size() << " records to "
              << (dir / "dataset.txt").string() << '\n';
}

// ---------------------------------------------------------------------------
// train: supervised loop; writes metrics log + checkpoints
// ---------------------------------------------------------------------------

inline void cmd_train(const RunConfig& cfg) {
    const auto dir = detail::prepare_out_dir(cfg, "train");
    TrainConfig train_cfg = detail::train_config(cfg);
    std::vector<DatasetRecord> records = detail::load_records(cfg);

    std::optional<Checkpoint> resume;
    const std::string ckpt_path = (dir / "checkpoint.txt").string();
    if (cfg.flag("train.resume")) {
        const std::string from =
            cfg.str("checkpoint").empty() ? ckpt_path : cfg.str("checkpoint");
        resume = load_checkpoint(from, train_cfg.model);
    }

    TrainResult result =
        train(train_cfg, records, (dir / "metrics.tsv").string(), ckpt_path, resume);

    if (cfg.flag("train.fine_tune")) {
        fine_tune_large_deviations(result.params, records, train_cfg,
                                   default_fine_tune_deviations(),
                                   cfg.real("train.fine_tune_lr_scale"));
        CheckpointMeta meta;
        meta.epoch = result.log.empty() ? 0 : result.log.back().epoch;
        meta.loss = result.log.empty() ? 0.0 : result.log.back().loss;
        meta.accuracy = result.log.empty() ? 0.0 : result.log.back().accuracy;
        meta.seed = train_cfg.seed;
        save_checkpoint(result.params, meta, (dir / "checkpoint_finetuned.txt").string());
    }
    std::cout << "train: " << result.log.size() << " epochs, checkpoint at " << ckpt_path
              << '\n';
}

// ---------------------------------------------------------------------------
// eval: accuracy sweeps (deviation / size / distribution)
// ---------------------------------------------------------------------------

inline void cmd_eval(const RunConfig& cfg) {
    const auto dir = detail::prepare_out_dir(cfg, "eval");
    ModelParams params = detail::load_params(cfg);
    const std::size_t threads = cfg.u64("threads");
    const std::size_t samples = cfg.u64("eval.samples");

    // Accuracy by deviation on fresh euclidean instances.
    {
        std::vector<DatasetRecord> records =
            make_records(GeneratorTag::kEuclidean, samples, cfg.u64("eval.n_min"),
                         cfg.u64("eval.n_max"), derive_seed(cfg.u64("seed"), 0xea1),
                         OraclePolicy::kExactOnly, threads);
        SweepResult sweep;
        for (double dev : cfg.reals("eval.deviations")) {
            SweepResult::Row row;
            row.axis = dev;
            row.deviation = dev;
            row.accuracy = eval_accuracy(params, records, dev, threads);
            row.samples = 2 * records.size();
            sweep.rows.push_back(row);
        }
        detail::write_table(sweep, dir / ("accuracy_by_deviation" + detail::seed_suffix(cfg) + ".tsv"));
    }

    if (!cfg.str("eval.sizes").empty()) {
        SweepResult sweep = size_sweep(params, cfg.sizes("eval.sizes"),
                                       cfg.reals("eval.deviations"), samples,
                                       derive_seed(cfg.u64("seed"), 0x512e), threads);
        detail::write_table(sweep, dir / ("accuracy_by_size" + detail::seed_suffix(cfg) + ".tsv"));
    }

    if (!cfg.str("eval.distributions").empty()) {
        std::vector<GeneratorTag> tags;
        for (const std::string& name : cfg.strings("eval.distributions"))
            tags.push_back(generator_tag_from(name));
        SweepResult sweep =
            distribution_eval(params, tags, cfg.reals("eval.deviations"), samples,
                              cfg.u64("eval.n_min"), cfg.u64("eval.n_max"),
                              derive_seed(cfg.u64("seed"), 0xd157), threads);
        detail::write_table(sweep, dir / ("accuracy_by_distribution" + detail::seed_suffix(cfg) + ".tsv"));
    }
    std::cout << "eval: tables written to " << dir.string() << '\n';
}

// ---------------------------------------------------------------------------
// curve: acceptance curves per size class
// ---------------------------------------------------------------------------

inline void cmd_curve(const RunConfig& cfg) {
    const auto dir = detail::prepare_out_dir(cfg, "curve");
    const std::size_t threads = cfg.u64("threads");
    const std::vector<double> grid = cfg.grid("curve.grid");
    const bool oracle_mode = cfg.flag("curve.oracle");

    std::optional<ModelParams> params;
    if (!oracle_mode) params = detail::load_params(cfg);

    for (std::size_t n : cfg.sizes("curve.sizes")) {
        std::vector<DatasetRecord> records = make_records(
            GeneratorTag::kEuclidean, cfg.u64("curve.samples"), n, n,
            derive_seed(cfg.u64("seed"), 0xc02e + n), OraclePolicy::kExactOnly, threads);
        Predictor predict;
        if (oracle_mode) {
            predict = [&records](const TspInstance& inst, double target) {
                for (const DatasetRecord& rec : records)
                    if (rec.instance.weights == inst.weights)
                        return target > rec.optimal() ? 1.0 : 0.0;
                throw InternalError("curve oracle: unknown instance");
            };
        } else {
            predict = model_predictor(&*params);
        }
        AcceptanceCurve curve = acceptance_curve(predict, records, grid, threads);
        curve.size_class = "n=" + std::to_string(n);
        detail::write_table(curve, dir / ("curve_n" + std::to_string(n) + detail::seed_suffix(cfg) + ".tsv"));
    }
    std::cout << "curve: tables written to " << dir.string() << '\n';
}

// ---------------------------------------------------------------------------
// cost: binary-search cost extraction, dataset or TSPLIB mode
// ---------------------------------------------------------------------------

struct CostReport {
    struct Row {
        std::string name;
        std::size_t n = 0;
        double estimated = 0.0;
        std::optional<double> optimum;
        std::optional<double> gnn_rel_dev;  // percent
        double sa_cost = 0.0;
        std::optional<double> sa_rel_dev;  // percent
        std::size_t iterations = 0;
    };
    std::vector<Row> rows;

    void write_tsv(std::ostream& out) const {
        out << "instance\tn\tgnn_cost\toptimum\tgnn_rel_dev_pct\tsa_cost\tsa_rel_dev_pct\t"
               "iterations\n";
        for (const Row& r : rows) {
            out << r.name << '\t' << r.n << '\t' << detail::fmt_real(r.estimated) << '\t'
                << (r.optimum ? detail::fmt_real(*r.optimum) : std::string("na")) << '\t'
                << (r.gnn_rel_dev ? detail::fmt_real(*r.gnn_rel_dev) : std::string("na")) << '\t'
                << detail::fmt_real(r.sa_cost) << '\t'
                << (r.sa_rel_dev ? detail::fmt_real(*r.sa_rel_dev) : std::string("na")) << '\t'
                << r.iterations << '\n';
        }
    }
};

inline void cmd_cost(const RunConfig& cfg) {
    const auto dir = detail::prepare_out_dir(cfg, "cost");
    ModelParams params = detail::load_params(cfg);
    const double delta = cfg.real("cost.delta");
    const double p = cfg.real("cost.p");
    const bool midpoint = cfg.flag("cost.midpoint");
    const std::uint64_t seed = cfg.u64("seed");
    CostReport report;

    Predictor predict = model_predictor(&params);
    const std::vector<std::string> tsplib_paths = cfg.strings("cost.tsplib");

    if (!tsplib_paths.empty()) {
        for (std::size_t i = 0; i < tsplib_paths.size(); ++i) {
            const std::string& path = tsplib_paths[i];
            TsplibInstance inst = tsplib_parse(path);
            Rng rng(derive_seed(seed, i));
            BinarySearchResult res = binary_search_cost(predict, inst.normalized, p, delta,
                                                        midpoint ? nullptr : &rng);
            CostReport::Row row;
            row.name = inst.name.empty() ? path : inst.name;
            row.n = inst.n;
            row.estimated = inst.denormalize(res.cost);
            row.iterations = res.iterations;

            // A sibling .opt.tour provides the reference optimum when present.
            std::filesystem::path tour_path(path);
            tour_path.replace_extension(".opt.tour");
            if (std::filesystem::exists(tour_path)) {
                const auto tour = tsplib_parse_tour(tour_path.string());
                row.optimum = tsplib_tour_cost(inst, tour);
            }

            SaParams sa;
            sa.seed = derive_seed(seed, 0x5a0000 + i);
            Tour sa_tour = simulated_annealing(inst.normalized, sa);
            row.sa_cost = inst.denormalize(sa_tour.cost);
            if (row.optimum) {
                row.gnn_rel_dev = 100.0 * (row.estimated - *row.optimum) / *row.optimum;
                row.sa_rel_dev = 100.0 * (row.sa_cost - *row.optimum) / *row.optimum;
            }
            report.rows.push_back(row);
        }
    } else {
        std::vector<DatasetRecord> records = make_records(
            GeneratorTag::kEuclidean, cfg.u64("cost.count"), cfg.u64("cost.n_min"),
            cfg.u64("cost.n_max"), derive_seed(seed, 0xc057), OraclePolicy::kExactOnly,
            cfg.u64("threads"));
        for (std::size_t i = 0; i < records.size(); ++i) {
            const DatasetRecord& rec = records[i];
            Rng rng(derive_seed(seed, i));
            BinarySearchResult res = binary_search_cost(predict, rec.instance, p, delta,
                                                        midpoint ? nullptr : &rng);
            CostReport::Row row;
            row.name = "gen" + std::to_string(i);
            row.n = rec.instance.n;
            row.estimated = res.cost;
            row.optimum = rec.optimal();
            row.gnn_rel_dev = 100.0 * (res.cost - rec.optimal()) / rec.optimal();
            row.iterations = res.iterations;
            SaParams sa;
            sa.seed = derive_seed(seed, 0x5a0000 + i);
            Tour sa_tour = simulated_annealing(rec.instance, sa);
            row.sa_cost = sa_tour.cost;
            row.sa_rel_dev = 100.0 * (sa_tour.cost - rec.optimal()) / rec.optimal();
            report.rows.push_back(row);
        }
    }
    const auto report_path = dir / ("cost_report" + detail::seed_suffix(cfg) + ".tsv");
    detail::write_table(report, report_path);
    std::cout << "cost: report written to " << report_path.string() << '\n';
}

// ---------------------------------------------------------------------------
// baseline: NN/SA statistics, calibration, TPR comparison
// ---------------------------------------------------------------------------

inline void cmd_baseline(const RunConfig& cfg) {
    const auto dir = detail::prepare_out_dir(cfg, "baseline");
    ModelParams params = detail::load_params(cfg);
    const std::size_t threads = cfg.u64("threads");
    const std::uint64_t seed = cfg.u64("seed");

    std::vector<DatasetRecord> calib = make_records(
        GeneratorTag::kEuclidean, cfg.u64("baseline.calib_count"), cfg.u64("baseline.n_min"),
        cfg.u64("baseline.n_max"), derive_seed(seed, 0xca11b), OraclePolicy::kExactOnly, threads);
    std::vector<TspInstance> calib_instances;
    for (const DatasetRecord& rec : calib) calib_instances.push_back(rec.instance);
    SaParams calibrated = calibrate_sa(calib_instances, cfg.u64("baseline.budget"), seed);

    std::vector<DatasetRecord> records = make_records(
        GeneratorTag::kEuclidean, cfg.u64("baseline.count"), cfg.u64("baseline.n_min"),
        cfg.u64("baseline.n_max"), derive_seed(seed, 0xba5e), OraclePolicy::kExactOnly, threads);

    double nn_excess = 0.0, sa_excess = 0.0;
    std::size_t sa_not_worse = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const DatasetRecord& rec = records[i];
        const double opt = rec.optimal();
        const Tour nn = nearest_neighbor(rec.instance, 0);
        SaParams run = calibrated;
        run.seed = derive_seed(seed, 0x5abe + i);
        const Tour sa = simulated_annealing(rec.instance, run);
        nn_excess += (nn.cost - opt) / opt;
        sa_excess += (sa.cost - opt) / opt;
        if (sa.cost <= nn.cost + 1e-12) ++sa_not_worse;
    }
    nn_excess /= static_cast<double>(records.size());
    sa_excess /= static_cast<double>(records.size());

    TprTable table =
        baseline_tpr(params, records, cfg.reals("baseline.deviations"), calibrated, threads);
    detail::write_table(table, dir / ("baseline_tpr" + detail::seed_suffix(cfg) + ".tsv"));

    std::ofstream stats(dir / ("baseline_stats" + detail::seed_suffix(cfg) + ".txt"));
    stats << "nn_mean_excess_pct\t" << detail::fmt_real(100.0 * nn_excess) << '\n'
          << "sa_mean_excess_pct\t" << detail::fmt_real(100.0 * sa_excess) << '\n'
          << "sa_not_worse_than_nn\t" << sa_not_worse << '/' << records.size() << '\n'
          << "sa_t0\t" << detail::fmt_real(calibrated.t0) << '\n'
          << "sa_alpha\t" << detail::fmt_real(calibrated.alpha) << '\n'
          << "sa_t_min\t" << detail::fmt_real(calibrated.t_min) << '\n';
    std::cout << "baseline: NN excess " << 100.0 * nn_excess << "%, SA excess "
              << 100.0 * sa_excess << "%\n";
}

}  // namespace tspgnn
