// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "tspgnn/checkpoint.hpp"
#include "tspgnn/dataset.hpp"
#include "tspgnn/model.hpp"
#include "tspgnn/parallel.hpp"
#include "tspgnn/params.hpp"

namespace tspgnn {

struct TrainConfig {
    std::uint64_t epochs = 50;
    std::size_t batches_per_epoch = 128;
    std::size_t pairs_per_batch = 16;
    double deviation = 0.02;
    double learning_rate = 2e-5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    std::size_t threads = 1;            // per-batch instance parallelism
    std::uint64_t checkpoint_every = 10;
    ModelConfig model;

    void validate() const {
        if (batches_per_epoch == 0 || pairs_per_batch == 0)
            throw ConfigError("TrainConfig: batch counts must be positive");
        if (!(deviation > 0.0 && deviation < 1.0))
            throw ConfigError("TrainConfig: deviation must be in (0,1)");
        if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning rate");
        model.validate();
    }
};

struct EpochMetrics {
    std::uint64_t epoch = 0;
    double loss = 0.0;      // mean BCE over the epoch's batches
    double accuracy = 0.0;  // fraction of predictions on the correct side of 0.5
    double seconds = 0.0;
};

namespace detail {

/// One gradient step over a list of labeled decision instances. Instances
/// are processed on separate tapes (their graphs are disjoint, so gradients
/// add exactly as one disjoint-union pass would) and gradient buffers are
/// reduced in instance order, which keeps results independent of the thread
/// count. Returns (mean BCE, number of correct predictions).
inline std::pair<double, std::size_t> sgd_step(ModelParams& params, AdamState& adam,
                                               const std::vector<DecisionInstance>& instances,
                                               std::size_t threads) {
    const std::size_t count = instances.size();
    const double weight = 1.0 / static_cast<double>(count);
    std::vector<ParamStore> grads(count);
    std::vector<double> losses(count, 0.0);
    std::vector<std::uint8_t> correct(count, 0);

    parallel_for(count, threads, [&](std::size_t i) {
        const DecisionInstance& di = instances[i];
        std::vector<DecisionInstance> one(1, di);
        GnnBatch batch = make_batch(one);
        Tensor label({1, 1}, {di.label.value() ? 1.0 : 0.0});

        Tape tape;
        TapedParams taped(tape, params.store);
        TapedBatchLoss run = taped_batch_loss(tape, taped, batch, label, params.config);
        losses[i] = tape.value(run.loss)[0];
        const double p = run.probabilities[0];
        correct[i] = di.label.value() ? (p > 0.5) : (p < 0.5);
        tape.backward(tape.scale(run.loss, weight));

        for (const auto& [name, slot] : params.store) grads[i].add(name, Tensor(slot.value.shape()));
        taped.accumulate_grads(grads[i]);
    });

    params.store.zero_grads();
    for (std::size_t i = 0; i < count; ++i)
        for (auto& [name, slot] : grads[i]) {
            Tensor& g = params.store.grad(name);
            for (std::size_t k = 0; k < g.numel(); ++k) g[k] += slot.grad[k];
        }
    adam.step(params.store);

    double mean_loss = 0.0;
    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < count; ++i) {
        mean_loss += losses[i] * weight;
        n_correct += correct[i];
    }
    return {mean_loss, n_correct};
}

}  // namespace detail

/// One epoch of the supervised loop: batches_per_epoch batches, each built
/// from pairs_per_batch graphs sampled with replacement; every graph
/// contributes its YES and NO instance to the same batch, so labels stay
/// balanced by construction. One Adam step per batch on the mean BCE.
inline EpochMetrics train_epoch(ModelParams& params, AdamState& adam,
                                const std::vector<DatasetRecord>& dataset,
                                const TrainConfig& config, Rng& rng,
                                std::uint64_t epoch_index = 0) {
    config.validate();
    if (dataset.size() < config.pairs_per_batch)
        throw DataError("train_epoch: dataset smaller than one batch (" +
                        std::to_string(dataset.size()) + " < " +
                        std::to_string(config.pairs_per_batch) + " graphs)");

    const auto start = std::chrono::steady_clock::now();
    double loss_total = 0.0;
    std::size_t correct = 0, predictions = 0;

    for (std::size_t b = 0; b < config.batches_per_epoch; ++b) {
        std::vector<DecisionInstance> instances;
        instances.reserve(2 * config.pairs_per_batch);
        for (std::size_t p = 0; p < config.pairs_per_batch; ++p) {
            const DatasetRecord& rec = dataset[rng.index(dataset.size())];
            DualPair pair = make_dual_pair(rec, config.deviation);
            instances.push_back(std::move(pair.positive));
            instances.push_back(std::move(pair.negative));
        }
        auto [batch_loss, batch_correct] =
            detail::sgd_step(params, adam, instances, config.threads);
        loss_total += batch_loss;
        correct += batch_correct;
        predictions += instances.size();
    }

    EpochMetrics metrics;
    metrics.epoch = epoch_index;
    metrics.loss = loss_total / static_cast<double>(config.batches_per_epoch);
    metrics.accuracy = static_cast<double>(correct) / static_cast<double>(predictions);
    metrics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return metrics;
}

struct TrainResult {
    ModelParams params;
    AdamState adam;
    std::vector<EpochMetrics> log;
};

inline void append_metrics_line(std::ofstream& log, const EpochMetrics& m) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%llu\t%.17g\t%.17g\t%.3f\n",
                  static_cast<unsigned long long>(m.epoch), m.loss, m.accuracy, m.seconds);
    log << buf;
}

/// Full training run: sequential epochs, a metrics log line per epoch
/// (epoch, loss, accuracy, seconds; tab-separated), checkpoints every
/// checkpoint_every epochs and at the end. `on_epoch` can stop the run early
/// by returning false (the desk-scale gates use it to stop at their target
/// accuracy).
inline TrainResult train(
    const TrainConfig& config, const std::vector<DatasetRecord>& dataset,
    const std::string& log_path, const std::string& checkpoint_path,
    const std::optional<Checkpoint>& resume = std::nullopt,
    const std::function<bool(const ModelParams&, const EpochMetrics&)>& on_epoch = nullptr) {
    config.validate();

    TrainResult result;
    std::uint64_t first_epoch = 0;
    if (resume) {
        if (!(resume->params.config == config.model))
            throw ConfigError("train: resume checkpoint does not match the model config");
        result.params.config = resume->params.config;
        for (const auto& [name, slot] : resume->params.store)
            result.params.store.add(name, slot.value);
        if (resume->adam) result.adam = *resume->adam;
        first_epoch = resume->meta.epoch;
    } else {
        result.params = init_model_params(config.model, config.seed);
    }
    result.adam.lr = config.learning_rate;
    result.adam.beta1 = config.adam_beta1;
    result.adam.beta2 = config.adam_beta2;
    result.adam.eps = config.adam_eps;

    std::ofstream log(log_path, resume ? std::ios::app : std::ios::out);
    if (!log) throw DataError("train: cannot open metrics log " + log_path);

    Rng rng(derive_seed(config.seed, 0xe90c4));
    CheckpointMeta meta;
    meta.seed = config.seed;
    meta.epoch = first_epoch;

    for (std::uint64_t e = 0; e < config.epochs; ++e) {
        const std::uint64_t epoch = first_epoch + e + 1;
        EpochMetrics metrics = train_epoch(result.params, result.adam, dataset, config, rng, epoch);
        result.log.push_back(metrics);
        append_metrics_line(log, metrics);
        log.flush();

        meta.epoch = epoch;
        meta.loss = metrics.loss;
        meta.accuracy = metrics.accuracy;
        if (config.checkpoint_every && epoch % config.checkpoint_every == 0)
            save_checkpoint(result.params, meta, checkpoint_path, &result.adam);
        if (on_epoch && !on_epoch(result.params, metrics)) break;
    }
    save_checkpoint(result.params, meta, checkpoint_path, &result.adam);
    return result;
}

inline const std::vector<double>& default_fine_tune_deviations() {
    static const std::vector<double> devs = {-0.02, 0.02, 1.0, 2.0, 10.0};
    return devs;
}

/// One extra epoch over decision instances at the listed deviations (labels
/// by sign), teaching the model that very large targets are YES instances
/// without disturbing the near-threshold behavior. Runs on a fresh Adam
/// state at a reduced rate.
inline EpochMetrics fine_tune_large_deviations(
    ModelParams& params, const std::vector<DatasetRecord>& dataset, const TrainConfig& config,
    const std::vector<double>& deviations = default_fine_tune_deviations(),
    double lr_scale = 0.1) {
    config.validate();
    if (deviations.empty()) throw ConfigError("fine_tune: empty deviation list");
    for (double dev : deviations)
        if (dev == 0.0 || dev <= -1.0)
            throw ConfigError("fine_tune: deviations must be nonzero and > -1");
    if (dataset.size() < config.pairs_per_batch)
        throw DataError("fine_tune: dataset smaller than one batch");

    AdamState adam;
    adam.lr = config.learning_rate * lr_scale;
    adam.beta1 = config.adam_beta1;
    adam.beta2 = config.adam_beta2;
    adam.eps = config.adam_eps;
    Rng rng(derive_seed(config.seed, 0xf17e));

    const auto start = std::chrono::steady_clock::now();
    double loss_total = 0.0;
    std::size_t correct = 0, predictions = 0;
    for (std::size_t b = 0; b < config.batches_per_epoch; ++b) {
        std::vector<DecisionInstance> instances;
        instances.reserve(config.pairs_per_batch * deviations.size());
        for (std::size_t p = 0; p < config.pairs_per_batch; ++p) {
            const DatasetRecord& rec = dataset[rng.index(dataset.size())];
            for (double dev : deviations) {
                instances.push_back(DecisionInstance::make(
                    rec.instance, (1.0 + dev) * rec.optimal(), dev > 0.0));
            }
        }
        auto [batch_loss, batch_correct] =
            detail::sgd_step(params, adam, instances, config.threads);
        loss_total += batch_loss;
        correct += batch_correct;
        predictions += instances.size();
    }

    EpochMetrics metrics;
    metrics.loss = loss_total / static_cast<double>(config.batches_per_epoch);
    metrics.accuracy = static_cast<double>(correct) / static_cast<double>(predictions);
    metrics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return metrics;
}

}  // namespace tspgnn
