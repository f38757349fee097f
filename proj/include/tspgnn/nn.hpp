// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tspgnn/params.hpp"
#include "tspgnn/tape.hpp"
#include "tspgnn/tensor.hpp"

namespace tspgnn {

// The network math is written once against an engine: TapeEngine records the
// computation for reverse mode, EvalEngine runs the same kernels without a
// tape. Both produce bitwise-identical values because they share the forward
// kernels in tensor.hpp.

struct TapeEngine {
    Tape* tape;
    const TapedParams* params;
    using Value = Var;

    Var constant(Tensor t) const { return tape->constant(std::move(t)); }
    Var param(const std::string& name) const { return (*params)[name]; }
    Var matmul(Var a, Var b) const { return tape->matmul(a, b); }
    Var add(Var a, Var b) const { return tape->add(a, b); }
    Var add_row_broadcast(Var a, Var bias) const { return tape->add_row_broadcast(a, bias); }
    Var mul(Var a, Var b) const { return tape->mul(a, b); }
    Var relu(Var a) const { return tape->relu(a); }
    Var sigmoid(Var a) const { return tape->sigmoid(a); }
    Var layer_norm(Var x, Var gain, Var bias, double eps) const {
        return tape->layer_norm(x, gain, bias, eps);
    }
    Var mean_all(Var a) const { return tape->mean_all(a); }
    Var segment_mean(Var a, const RowSegments& segments) const {
        return tape->segment_mean(a, segments);
    }
    Var edge_to_vertex(Var e, const EdgePairs& edges, std::size_t n) const {
        return tape->edge_to_vertex(e, edges, n);
    }
    Var vertex_to_edge(Var v, const EdgePairs& edges) const {
        return tape->vertex_to_edge(v, edges);
    }
    const Tensor& tensor_of(Var v) const { return tape->value(v); }
};

struct EvalEngine {
    const ParamStore* store;
    using Value = Tensor;

    Tensor constant(Tensor t) const { return t; }
    const Tensor& param(const std::string& name) const { return store->value(name); }
    Tensor matmul(const Tensor& a, const Tensor& b) const { return tspgnn::matmul(a, b); }
    Tensor add(const Tensor& a, const Tensor& b) const { return tspgnn::add(a, b); }
    Tensor add_row_broadcast(const Tensor& a, const Tensor& bias) const {
        return tspgnn::add_row_broadcast(a, bias);
    }
    Tensor mul(const Tensor& a, const Tensor& b) const { return tspgnn::mul(a, b); }
    Tensor relu(const Tensor& a) const { return tspgnn::relu(a); }
    Tensor sigmoid(const Tensor& a) const { return tspgnn::sigmoid(a); }
    Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) const {
        return layer_norm_rows(x, gain, bias, eps);
    }
    Tensor mean_all(const Tensor& a) const { return Tensor::scalar(tspgnn::mean_all(a)); }
    Tensor segment_mean(const Tensor& a, const RowSegments& segments) const {
        return segment_mean_rows(a, segments);
    }
    Tensor edge_to_vertex(const Tensor& e, const EdgePairs& edges, std::size_t n) const {
        return aggregate_edges_to_vertices(e, edges, n);
    }
    Tensor vertex_to_edge(const Tensor& v, const EdgePairs& edges) const {
        return aggregate_vertices_to_edges(v, edges);
    }
    const Tensor& tensor_of(const Tensor& t) const { return t; }
};

// ---------------------------------------------------------------------------
// MLP: affine chain, rectifier on every layer except the final linear one.
// ---------------------------------------------------------------------------

struct MlpSpec {
    std::size_t input = 0;
    std::vector<std::size_t> layers;  // output width per layer

    std::size_t output() const { return layers.back(); }
};

inline std::string layer_name(const std::string& prefix, std::size_t k, const char* what) {
    return prefix + ".l" + std::to_string(k) + "." + what;
}

inline void init_mlp_params(ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                            Rng& rng) {
    std::size_t in = spec.input;
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const std::size_t out = spec.layers[k];
        store.add(layer_name(prefix, k, "w"), glorot_init(in, out, rng));
        store.add(layer_name(prefix, k, "b"), Tensor::matrix(1, out));
        in = out;
    }
}

template <typename Engine>
typename Engine::Value mlp_forward(const Engine& eng, typename Engine::Value x,
                                   const MlpSpec& spec, const std::string& prefix) {
    if (eng.tensor_of(x).cols() != spec.input)
        throw ShapeError("mlp_forward: input width " +
                         std::to_string(eng.tensor_of(x).cols()) + " does not match spec " +
                         std::to_string(spec.input));
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        auto w = eng.param(layer_name(prefix, k, "w"));
        auto b = eng.param(layer_name(prefix, k, "b"));
        x = eng.add_row_broadcast(eng.matmul(x, w), b);
        if (k + 1 < spec.layers.size()) x = eng.relu(x);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Layer-norm LSTM cell. Gate pre-activations are normalized per row; the
// gate bias is applied after normalization (the norm is shift-invariant, so
// a pre-norm bias would be dead weight). Gates i/f/o use the logistic
// function; the candidate and the cell output use the rectifier. The forget
// gate bias starts at +1, everything else at zero/Glorot.
// ---------------------------------------------------------------------------

struct LstmSpec {
    std::size_t input = 0;
    std::size_t width = 0;
    double ln_eps = 1e-5;

    static constexpr const char* kGates[4] = {"i", "f", "g", "o"};
};

inline std::string gate_name(const std::string& prefix, const char* gate, const char* what) {
    return prefix + "." + gate + "." + what;
}

inline void init_lstm_params(ParamStore& store, const std::string& prefix, const LstmSpec& spec,
                             Rng& rng) {
    for (const char* gate : LstmSpec::kGates) {
        store.add(gate_name(prefix, gate, "w"), glorot_init(spec.input, spec.width, rng));
        store.add(gate_name(prefix, gate, "u"), glorot_init(spec.width, spec.width, rng));
        Tensor b = Tensor::matrix(1, spec.width);
        if (gate[0] == 'f') b.fill(1.0);
        store.add(gate_name(prefix, gate, "b"), std::move(b));
        store.add(gate_name(prefix, gate, "ln_g"), Tensor::full(1, spec.width, 1.0));
        store.add(gate_name(prefix, gate, "ln_b"), Tensor::matrix(1, spec.width));
    }
}

template <typename Engine>
struct LstmState {
    typename Engine::Value h;  // hidden output, doubles as the embedding
    typename Engine::Value c;  // cell state
};

template <typename Engine>
LstmState<Engine> lstm_cell(const Engine& eng, typename Engine::Value input,
                            LstmState<Engine> state, const LstmSpec& spec,
                            const std::string& prefix) {
    using V = typename Engine::Value;
    if (eng.tensor_of(input).cols() != spec.input) throw ShapeError("lstm_cell: input width");
    if (eng.tensor_of(state.h).cols() != spec.width) throw ShapeError("lstm_cell: state width");

    auto gate_pre = [&](const char* gate) -> V {
        auto w = eng.param(gate_name(prefix, gate, "w"));
        auto u = eng.param(gate_name(prefix, gate, "u"));
        auto pre = eng.add(eng.matmul(input, w), eng.matmul(state.h, u));
        auto normed = eng.layer_norm(pre, eng.param(gate_name(prefix, gate, "ln_g")),
                                     eng.param(gate_name(prefix, gate, "ln_b")), spec.ln_eps);
        return eng.add_row_broadcast(normed, eng.param(gate_name(prefix, gate, "b")));
    };

    V gate_in = eng.sigmoid(gate_pre("i"));
    V gate_forget = eng.sigmoid(gate_pre("f"));
    V candidate = eng.relu(gate_pre("g"));
    V gate_out = eng.sigmoid(gate_pre("o"));

    V c_next = eng.add(eng.mul(gate_forget, state.c), eng.mul(gate_in, candidate));
    V h_next = eng.mul(gate_out, eng.relu(c_next));
    return {std::move(h_next), std::move(c_next)};
}

}  // namespace tspgnn
