// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tspgnn/instance.hpp"
#include "tspgnn/nn.hpp"
#include "tspgnn/params.hpp"
#include "tspgnn/tape.hpp"
#include "tspgnn/tensor.hpp"

namespace tspgnn {

// ---------------------------------------------------------------------------
// Configuration and parameters
// ---------------------------------------------------------------------------

struct ModelConfig {
    std::size_t d = 64;       // embedding width
    std::size_t t_max = 32;   // message-passing iterations
    std::vector<std::size_t> msg_layers = {64, 64, 64};  // must end at d
    std::vector<std::size_t> init_hidden = {8, 16, 32};  // linear layer to d appended
    std::vector<std::size_t> vote_hidden = {64, 64};     // linear scalar output appended
    double ln_eps = 1e-5;

    /// Proportional defaults for a reduced width (used by small-scale tests).
    static ModelConfig sized(std::size_t d, std::size_t t_max) {
        ModelConfig cfg;
        cfg.d = d;
        cfg.t_max = t_max;
        cfg.msg_layers = {d, d, d};
        cfg.vote_hidden = {d, d};
        return cfg;
    }

    void validate() const {
        if (d == 0 || t_max == 0) throw ConfigError("ModelConfig: d and t_max must be positive");
        if (msg_layers.empty() || msg_layers.back() != d)
            throw ConfigError("ModelConfig: message MLP must end at width d");
        for (std::size_t s : msg_layers)
            if (s == 0) throw ConfigError("ModelConfig: zero layer size");
        for (std::size_t s : init_hidden)
            if (s == 0) throw ConfigError("ModelConfig: zero layer size");
        for (std::size_t s : vote_hidden)
            if (s == 0) throw ConfigError("ModelConfig: zero layer size");
    }

    // Edge features are (weight, normalized target cost).
    MlpSpec e_init_spec() const {
        MlpSpec spec;
        spec.input = 2;
        spec.layers = init_hidden;
        spec.layers.push_back(d);
        return spec;
    }
    MlpSpec msg_spec() const { return MlpSpec{d, msg_layers}; }
    MlpSpec vote_spec() const {
        MlpSpec spec;
        spec.input = d;
        spec.layers = vote_hidden;
        spec.layers.push_back(1);
        return spec;
    }
    LstmSpec update_spec() const { return LstmSpec{d, d, ln_eps}; }

    bool operator==(const ModelConfig&) const = default;
};

/// The seven learned components: a broadcast vertex-init vector, the edge
/// init / message / vote MLPs and the two layer-norm LSTM updates.
struct ModelParams {
    ModelConfig config;
    ParamStore store;
};

inline ModelParams init_model_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ModelParams params;
    params.config = config;
    Rng rng(seed);
    params.store.add("vertex_init", glorot_init(1, config.d, rng));
    init_mlp_params(params.store, "e_init", config.e_init_spec(), rng);
    init_mlp_params(params.store, "v_msg", config.msg_spec(), rng);
    init_mlp_params(params.store, "e_msg", config.msg_spec(), rng);
    init_mlp_params(params.store, "e_vote", config.vote_spec(), rng);
    init_lstm_params(params.store, "v_u", config.update_spec(), rng);
    init_lstm_params(params.store, "e_u", config.update_spec(), rng);
    return params;
}

/// All-zero variant (including the forget-gate bias): used by tests that
/// pin the exactly-0.5 output.
inline ModelParams zero_model_params(const ModelConfig& config) {
    ModelParams params = init_model_params(config, 0);
    for (auto& [name, slot] : params.store) slot.value.fill(0.0);
    return params;
}

// ---------------------------------------------------------------------------
// Incidence structure
// ---------------------------------------------------------------------------

/// Edge-to-vertex incidence of a complete graph (or a disjoint union of
/// them). Edges are the unordered pairs (i, j), i < j, ordered
/// lexicographically; S marks the lower endpoint, T the higher, EV = S + T.
struct Incidence {
    std::size_t n_vertices = 0;
    EdgePairs edges;
    std::vector<double> edge_weights;

    std::size_t n_edges() const { return edges.size(); }

    Tensor source_matrix() const { return endpoint_matrix(0); }
    Tensor target_matrix() const { return endpoint_matrix(1); }

    Tensor ev_matrix() const {
        Tensor ev = Tensor::matrix(edges.size(), n_vertices);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            ev(e, edges[e].first) += 1.0;
            ev(e, edges[e].second) += 1.0;
        }
        return ev;
    }

private:
    Tensor endpoint_matrix(int which) const {
        Tensor m = Tensor::matrix(edges.size(), n_vertices);
        for (std::size_t e = 0; e < edges.size(); ++e)
            m(e, which == 0 ? edges[e].first : edges[e].second) = 1.0;
        return m;
    }
};

/// Incidence of a complete graph on n vertices; n >= 2 so unit tests can
/// exercise the single-edge case even though instances require n >= 3.
inline Incidence complete_incidence(std::size_t n) {
    if (n < 2) throw DataError("complete_incidence: need at least 2 vertices");
    Incidence inc;
    inc.n_vertices = n;
    inc.edges.reserve(n * (n - 1) / 2);
    for (std::uint32_t i = 0; i + 1 < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) inc.edges.emplace_back(i, j);
    return inc;
}

inline Incidence build_incidence(const TspInstance& inst) {
    inst.validate();
    Incidence inc = complete_incidence(inst.n);
    inc.edge_weights.reserve(inc.edges.size());
    for (const auto& [i, j] : inc.edges) inc.edge_weights.push_back(inst.weight(i, j));
    return inc;
}

/// Disjoint union of decision instances: one block-diagonal incidence with
/// per-instance edge segments and normalized targets. Messages cannot cross
/// blocks because no edge spans two blocks.
struct GnnBatch {
    Incidence incidence;
    RowSegments edge_segments;     // rows of each instance's edges
    RowSegments vertex_segments;
    std::vector<double> normalized_targets;

    Tensor init_features() const {
        Tensor f = Tensor::matrix(incidence.n_edges(), 2);
        for (std::size_t s = 0; s < edge_segments.size(); ++s) {
            for (std::size_t e = edge_segments[s].first; e < edge_segments[s].second; ++e) {
                f(e, 0) = incidence.edge_weights[e];
                f(e, 1) = normalized_targets[s];
            }
        }
        return f;
    }
};

inline GnnBatch make_batch(const std::vector<DecisionInstance>& instances) {
    if (instances.empty()) throw DataError("make_batch: empty batch");
    GnnBatch batch;
    std::size_t vertex_base = 0;
    for (const DecisionInstance& di : instances) {
        const Incidence inc = build_incidence(di.graph);
        const std::size_t e0 = batch.incidence.edges.size();
        for (const auto& [i, j] : inc.edges)
            batch.incidence.edges.emplace_back(static_cast<std::uint32_t>(i + vertex_base),
                                               static_cast<std::uint32_t>(j + vertex_base));
        batch.incidence.edge_weights.insert(batch.incidence.edge_weights.end(),
                                            inc.edge_weights.begin(), inc.edge_weights.end());
        batch.edge_segments.emplace_back(e0, batch.incidence.edges.size());
        batch.vertex_segments.emplace_back(vertex_base, vertex_base + di.graph.n);
        batch.normalized_targets.push_back(di.normalized_target);
        vertex_base += di.graph.n;
    }
    batch.incidence.n_vertices = vertex_base;
    return batch;
}

// ---------------------------------------------------------------------------
// Forward pass, written once over the engine abstraction
// ---------------------------------------------------------------------------

template <typename Engine>
struct GnnState {
    typename Engine::Value vertices;      // |V| x d embeddings
    typename Engine::Value vertex_cells;  // recurrent cell states
    typename Engine::Value edges;         // |E| x d embeddings
    typename Engine::Value edge_cells;
    std::size_t t = 0;
};

/// Initial embeddings: every edge gets E_init(weight, C/n); every vertex the
/// shared trainable init vector; both cell states start at zero.
template <typename Engine>
GnnState<Engine> gnn_init(const Engine& eng, const GnnBatch& batch, const ModelConfig& cfg) {
    const std::size_t n = batch.incidence.n_vertices;
    const std::size_t m = batch.incidence.n_edges();
    GnnState<Engine> state;
    state.edges = mlp_forward(eng, eng.constant(batch.init_features()), cfg.e_init_spec(),
                              "e_init");
    state.vertices =
        eng.matmul(eng.constant(Tensor::full(n, 1, 1.0)), eng.param("vertex_init"));
    state.vertex_cells = eng.constant(Tensor::matrix(n, cfg.d));
    state.edge_cells = eng.constant(Tensor::matrix(m, cfg.d));
    state.t = 0;
    return state;
}

/// One message-passing iteration: vertices are refined first from the
/// aggregated edge messages, then edges from the aggregated messages of the
/// just-updated vertices.
template <typename Engine>
GnnState<Engine> gnn_step(const Engine& eng, GnnState<Engine> state, const GnnBatch& batch,
                          const ModelConfig& cfg) {
    const auto& edges = batch.incidence.edges;
    const std::size_t n = batch.incidence.n_vertices;
    const LstmSpec update = cfg.update_spec();

    auto vertex_messages =
        eng.edge_to_vertex(mlp_forward(eng, state.edges, cfg.msg_spec(), "e_msg"), edges, n);
    LstmState<Engine> vs = lstm_cell(eng, std::move(vertex_messages),
                                     {state.vertices, state.vertex_cells}, update, "v_u");
    state.vertices = std::move(vs.h);
    state.vertex_cells = std::move(vs.c);

    auto edge_messages =
        eng.vertex_to_edge(mlp_forward(eng, state.vertices, cfg.msg_spec(), "v_msg"), edges);
    LstmState<Engine> es = lstm_cell(eng, std::move(edge_messages),
                                     {state.edges, state.edge_cells}, update, "e_u");
    state.edges = std::move(es.h);
    state.edge_cells = std::move(es.c);

    state.t += 1;
    return state;
}

template <typename Engine>
struct GnnVote {
    typename Engine::Value edge_logits;  // |E| x 1
    typename Engine::Value logit_means;  // one mean logit per instance
};

template <typename Engine>
GnnVote<Engine> gnn_vote(const Engine& eng, const GnnState<Engine>& state, const GnnBatch& batch,
                         const ModelConfig& cfg) {
    GnnVote<Engine> vote;
    vote.edge_logits = mlp_forward(eng, state.edges, cfg.vote_spec(), "e_vote");
    vote.logit_means = eng.segment_mean(vote.edge_logits, batch.edge_segments);
    return vote;
}

template <typename Engine>
GnnVote<Engine> gnn_forward(const Engine& eng, const GnnBatch& batch, const ModelConfig& cfg) {
    GnnState<Engine> state = gnn_init(eng, batch, cfg);
    for (std::size_t t = 0; t < cfg.t_max; ++t) state = gnn_step(eng, std::move(state), batch, cfg);
    return gnn_vote(eng, state, batch, cfg);
}

// ---------------------------------------------------------------------------
// Concrete inference API
// ---------------------------------------------------------------------------

/// Per-vertex and per-edge embeddings plus recurrent cell states mid-pass.
struct EmbeddingState {
    Tensor vertices;
    Tensor vertex_cells;
    Tensor edges;
    Tensor edge_cells;
    std::size_t t = 0;
};

namespace detail {
inline GnnBatch single_instance_batch(const TspInstance& inst, double normalized_target) {
    GnnBatch batch;
    batch.incidence = build_incidence(inst);
    batch.edge_segments = {{0, batch.incidence.n_edges()}};
    batch.vertex_segments = {{0, inst.n}};
    batch.normalized_targets = {normalized_target};
    return batch;
}

inline EmbeddingState to_embedding_state(GnnState<EvalEngine> s) {
    return EmbeddingState{std::move(s.vertices), std::move(s.vertex_cells), std::move(s.edges),
                          std::move(s.edge_cells), s.t};
}

inline GnnState<EvalEngine> from_embedding_state(EmbeddingState s) {
    return GnnState<EvalEngine>{std::move(s.vertices), std::move(s.vertex_cells),
                                std::move(s.edges), std::move(s.edge_cells), s.t};
}
}  // namespace detail

inline EmbeddingState init_embeddings(const TspInstance& inst, double normalized_target,
                                      const ModelParams& params) {
    const EvalEngine eng{&params.store};
    return detail::to_embedding_state(
        gnn_init(eng, detail::single_instance_batch(inst, normalized_target), params.config));
}

inline EmbeddingState mp_iteration(EmbeddingState state, const Incidence& inc,
                                   const ModelParams& params) {
    if (state.t >= params.config.t_max)
        throw InternalError("mp_iteration: t_max already reached");
    const EvalEngine eng{&params.store};
    GnnBatch batch;
    batch.incidence = inc;
    batch.edge_segments = {{0, inc.n_edges()}};
    batch.vertex_segments = {{0, inc.n_vertices}};
    batch.normalized_targets = {0.0};  // unused by the step
    return detail::to_embedding_state(
        gnn_step(eng, detail::from_embedding_state(std::move(state)), batch, params.config));
}

struct VoteResult {
    double probability = 0.0;
    Tensor edge_logits;
};

inline VoteResult vote(const EmbeddingState& state, const ModelParams& params) {
    const EvalEngine eng{&params.store};
    VoteResult result;
    result.edge_logits = mlp_forward(eng, state.edges, params.config.vote_spec(), "e_vote");
    result.probability = sigmoid(mean_all(result.edge_logits));
    return result;
}

struct BatchForwardResult {
    std::vector<double> probabilities;
    Tensor logit_means;   // one row per instance
    Tensor edge_logits;   // all edges, instance blocks in order
    EmbeddingState state;
};

inline BatchForwardResult run_batch(const std::vector<DecisionInstance>& instances,
                                    const ModelParams& params) {
    const GnnBatch batch = make_batch(instances);
    const EvalEngine eng{&params.store};
    GnnState<EvalEngine> state = gnn_init(eng, batch, params.config);
    for (std::size_t t = 0; t < params.config.t_max; ++t)
        state = gnn_step(eng, std::move(state), batch, params.config);
    GnnVote<EvalEngine> v = gnn_vote(eng, state, batch, params.config);

    BatchForwardResult result;
    if (!v.logit_means.all_finite())
        throw InternalError("forward pass produced non-finite logits");
    result.probabilities.reserve(instances.size());
    for (std::size_t i = 0; i < v.logit_means.rows(); ++i)
        result.probabilities.push_back(sigmoid(v.logit_means[i]));
    result.logit_means = std::move(v.logit_means);
    result.edge_logits = std::move(v.edge_logits);
    result.state = detail::to_embedding_state(std::move(state));
    return result;
}

/// Probability that a tour cheaper than target_cost exists.
inline double forward(const TspInstance& inst, double target_cost, const ModelParams& params) {
    if (!(target_cost > 0.0)) throw DataError("forward: target cost must be positive");
    std::vector<DecisionInstance> one;
    one.push_back(DecisionInstance::make(inst, target_cost));
    return run_batch(one, params).probabilities[0];
}

inline std::vector<double> forward_batch(const std::vector<DecisionInstance>& instances,
                                         const ModelParams& params) {
    return run_batch(instances, params).probabilities;
}

// ---------------------------------------------------------------------------
// Taped training path
// ---------------------------------------------------------------------------

struct TapedBatchLoss {
    Var loss;
    Var logit_means;
    std::vector<double> probabilities;
};

/// Records the batch forward plus the mean BCE between per-instance
/// predictions and labels on the given tape.
inline TapedBatchLoss taped_batch_loss(Tape& tape, const TapedParams& taped,
                                       const GnnBatch& batch, const Tensor& labels,
                                       const ModelConfig& cfg) {
    const TapeEngine eng{&tape, &taped};
    GnnVote<TapeEngine> v = gnn_forward(eng, batch, cfg);
    TapedBatchLoss out;
    out.logit_means = v.logit_means;
    out.loss = tape.bce_with_logits(v.logit_means, labels);
    if (!std::isfinite(tape.value(out.loss)[0]))
        throw InternalError("training loss diverged (non-finite)");
    const Tensor& means = tape.value(v.logit_means);
    out.probabilities.reserve(means.numel());
    for (std::size_t i = 0; i < means.numel(); ++i)
        out.probabilities.push_back(sigmoid(means[i]));
    return out;
}

}  // namespace tspgnn
