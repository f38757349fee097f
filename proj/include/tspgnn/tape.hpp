// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/tensor.hpp"

namespace tspgnn {

/// Handle to a node on a Tape.
struct Var {
    std::size_t idx = static_cast<std::size_t>(-1);
    bool valid() const { return idx != static_cast<std::size_t>(-1); }
};

/// Reverse-mode tape over a fixed primitive set: matmul, adds (plain and
/// row-broadcast), elementwise relu/sigmoid/mul, column concat, layer norm,
/// mean reduction, incidence aggregation and a fused stable BCE. Values are
/// computed by the shared kernels in tensor.hpp; each op records a closure
/// that scatters the output gradient back to its inputs.
///
/// A tape owns one forward/backward cycle. The reverse sweep visits each
/// recorded op exactly once, in reverse execution order, and releases
/// intermediate buffers as it passes them; leaf gradients survive for
/// harvesting. Running backward() twice without a fresh forward is an error.
class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = true) {
        return push(std::move(value), requires_grad, nullptr);
    }

    Var constant(Tensor value) { return push(std::move(value), false, nullptr); }

    const Tensor& value(Var v) const { return nodes_[v.idx].value; }

    /// Gradient of a leaf after backward(); zero tensor if the loss never
    /// reached it.
    Tensor grad_of(Var v) const {
        const Node& n = nodes_[v.idx];
        if (n.grad.empty()) return Tensor(n.value.shape());
        return n.grad;
    }

    bool requires_grad(Var v) const { return nodes_[v.idx].requires_grad; }

    std::size_t size() const { return nodes_.size(); }

    void clear() {
        nodes_.clear();
        backward_ran_ = false;
    }

    // -- primitives ---------------------------------------------------------

    Var matmul(Var a, Var b) {
        Tensor out = tspgnn::matmul(value(a), value(b));
        return push(std::move(out), requires_grad(a) || requires_grad(b),
                    [a, b](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        if (t.requires_grad(a)) matmul_bt_accum(g, t.value(b), t.grad_accum(a));
                        if (t.requires_grad(b)) matmul_at_accum(t.value(a), g, t.grad_accum(b));
                    });
    }

    Var add(Var a, Var b) {
        Tensor out = tspgnn::add(value(a), value(b));
        return push(std::move(out), requires_grad(a) || requires_grad(b),
                    [a, b](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        for (Var v : {a, b}) {
                            if (!t.requires_grad(v)) continue;
                            Tensor& gv = t.grad_accum(v);
                            for (std::size_t i = 0; i < g.numel(); ++i) gv[i] += g[i];
                        }
                    });
    }

    Var add_row_broadcast(Var a, Var bias) {
        Tensor out = tspgnn::add_row_broadcast(value(a), value(bias));
        return push(std::move(out), requires_grad(a) || requires_grad(bias),
                    [a, bias](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        if (t.requires_grad(a)) {
                            Tensor& ga = t.grad_accum(a);
                            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
                        }
                        if (t.requires_grad(bias)) {
                            Tensor& gb = t.grad_accum(bias);
                            for (std::size_t i = 0; i < g.rows(); ++i) {
                                const double* grow = g.row_ptr(i);
                                for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += grow[j];
                            }
                        }
                    });
    }

    Var mul(Var a, Var b) {
        Tensor out = tspgnn::mul(value(a), value(b));
        return push(std::move(out), requires_grad(a) || requires_grad(b),
                    [a, b](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        if (t.requires_grad(a)) {
                            Tensor& ga = t.grad_accum(a);
                            const Tensor& bv = t.value(b);
                            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * bv[i];
                        }
                        if (t.requires_grad(b)) {
                            Tensor& gb = t.grad_accum(b);
                            const Tensor& av = t.value(a);
                            for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * av[i];
                        }
                    });
    }

    Var relu(Var a) {
        Tensor out = tspgnn::relu(value(a));
        return push(std::move(out), requires_grad(a), [a](Tape& t, std::size_t self) {
            if (!t.requires_grad(a)) return;
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& x = t.value(a);
            Tensor& ga = t.grad_accum(a);
            for (std::size_t i = 0; i < g.numel(); ++i) {
                if (x[i] > 0.0) ga[i] += g[i];
            }
        });
    }

    Var sigmoid(Var a) {
        Tensor out = tspgnn::sigmoid(value(a));
        return push(std::move(out), requires_grad(a), [a](Tape& t, std::size_t self) {
            if (!t.requires_grad(a)) return;
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            Tensor& ga = t.grad_accum(a);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        });
    }

    Var concat_cols(Var a, Var b) {
        Tensor out = tspgnn::concat_cols(value(a), value(b));
        const std::size_t ac = value(a).cols();
        return push(std::move(out), requires_grad(a) || requires_grad(b),
                    [a, b, ac](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        if (t.requires_grad(a)) {
                            Tensor& ga = t.grad_accum(a);
                            for (std::size_t i = 0; i < ga.rows(); ++i)
                                for (std::size_t j = 0; j < ac; ++j) ga(i, j) += g(i, j);
                        }
                        if (t.requires_grad(b)) {
                            Tensor& gb = t.grad_accum(b);
                            for (std::size_t i = 0; i < gb.rows(); ++i)
                                for (std::size_t j = 0; j < gb.cols(); ++j)
                                    gb(i, j) += g(i, j + ac);
                        }
                    });
    }

    Var layer_norm(Var x, Var gain, Var bias, double eps) {
        Tensor out = layer_norm_rows(value(x), value(gain), value(bias), eps);
        return push(std::move(out), requires_grad(x) || requires_grad(gain) || requires_grad(bias),
                    [x, gain, bias, eps](Tape& t, std::size_t self) {
                        const Tensor& g = t.nodes_[self].grad;
                        const Tensor& xv = t.value(x);
                        const Tensor& gv = t.value(gain);
                        const std::size_t d = xv.cols();
                        const double dd = static_cast<double>(d);
                        for (std::size_t i = 0; i < xv.rows(); ++i) {
                            const double* xr = xv.row_ptr(i);
                            const double* gr = g.row_ptr(i);
                            double mean = 0.0;
                            for (std::size_t j = 0; j < d; ++j) mean += xr[j];
                            mean /= dd;
                            double var = 0.0;
                            for (std::size_t j = 0; j < d; ++j) {
                                const double c = xr[j] - mean;
                                var += c * c;
                            }
                            var /= dd;
                            const double inv_std = 1.0 / std::sqrt(var + eps);
                            // dL/dxhat = g * gain; reduce its mean and its
                            // projection on xhat, then rescale.
                            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                            for (std::size_t j = 0; j < d; ++j) {
                                const double xhat = (xr[j] - mean) * inv_std;
                                const double dxhat = gr[j] * gv[j];
                                sum_dxhat += dxhat;
                                sum_dxhat_xhat += dxhat * xhat;
                            }
                            if (t.requires_grad(x)) {
                                Tensor& gx = t.grad_accum(x);
                                double* gxr = gx.row_ptr(i);
                                for (std::size_t j = 0; j < d; ++j) {
                                    const double xhat = (xr[j] - mean) * inv_std;
                                    const double dxhat = gr[j] * gv[j];
                                    gxr[j] += inv_std *
                                              (dxhat - sum_dxhat / dd - xhat * sum_dxhat_xhat / dd);
                                }
                            }
                            if (t.requires_grad(gain)) {
                                Tensor& gg = t.grad_accum(gain);
                                for (std::size_t j = 0; j < d; ++j)
                                    gg[j] += gr[j] * (xr[j] - mean) * inv_std;
                            }
                            if (t.requires_grad(bias)) {
                                Tensor& gb = t.grad_accum(bias);
                                for (std::size_t j = 0; j < d; ++j) gb[j] += gr[j];
                            }
                        }
                    });
    }

    Var segment_mean(Var a, RowSegments segments) {
        Tensor out = segment_mean_rows(value(a), segments);
        return push(std::move(out), requires_grad(a),
                    [a, segments = std::move(segments)](Tape& t, std::size_t self) {
                        if (!t.requires_grad(a)) return;
                        const Tensor& g = t.nodes_[self].grad;
                        Tensor& ga = t.grad_accum(a);
                        for (std::size_t s = 0; s < segments.size(); ++s) {
                            const auto [begin, end] = segments[s];
                            const double gs = g[s] / static_cast<double>(end - begin);
                            for (std::size_t i = begin; i < end; ++i) ga[i] += gs;
                        }
                    });
    }

    Var mean_all(Var a) {
        Tensor out = Tensor::scalar(tspgnn::mean_all(value(a)));
        const double inv_n = 1.0 / static_cast<double>(value(a).numel());
        return push(std::move(out), requires_grad(a), [a, inv_n](Tape& t, std::size_t self) {
            if (!t.requires_grad(a)) return;
            const double g = t.nodes_[self].grad[0] * inv_n;
            Tensor& ga = t.grad_accum(a);
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
        });
    }

    Var scale(Var a, double s) {
        Tensor out = tspgnn::scale(value(a), s);
        return push(std::move(out), requires_grad(a), [a, s](Tape& t, std::size_t self) {
            if (!t.requires_grad(a)) return;
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.grad_accum(a);
            for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * s;
        });
    }

    /// Mean over elements of the numerically stable binary cross entropy
    /// between logits and {0,1} labels. Gradient w.r.t. each logit is
    /// (sigmoid(x) - y) / k.
    Var bce_with_logits(Var logits, Tensor labels) {
        const std::size_t k = value(logits).numel();
        const double loss = bce_with_logits_value(value(logits), labels);
        return push(Tensor::scalar(loss), requires_grad(logits),
                    [logits, labels = std::move(labels), k](Tape& t, std::size_t self) {
                        if (!t.requires_grad(logits)) return;
                        const double g = t.nodes_[self].grad[0] / static_cast<double>(k);
                        const Tensor& x = t.value(logits);
                        Tensor& gx = t.grad_accum(logits);
                        for (std::size_t i = 0; i < k; ++i)
                            gx[i] += g * (tspgnn::sigmoid(x[i]) - labels[i]);
                    });
    }

    /// EV^T x E: vertex row v receives the sum of the rows of all edges
    /// incident to v.
    Var edge_to_vertex(Var edge_feats, const EdgePairs& edges, std::size_t n_vertices) {
        Tensor out = aggregate_edges_to_vertices(value(edge_feats), edges, n_vertices);
        return push(std::move(out), requires_grad(edge_feats),
                    [edge_feats, edges](Tape& t, std::size_t self) {
                        if (!t.requires_grad(edge_feats)) return;
                        const Tensor& g = t.nodes_[self].grad;
                        Tensor& ge = t.grad_accum(edge_feats);
                        const std::size_t d = ge.cols();
                        for (std::size_t idx = 0; idx < edges.size(); ++idx) {
                            const double* gs = g.row_ptr(edges[idx].first);
                            const double* gt = g.row_ptr(edges[idx].second);
                            double* gr = ge.row_ptr(idx);
                            for (std::size_t j = 0; j < d; ++j) gr[j] += gs[j] + gt[j];
                        }
                    });
    }

    /// EV x V: edge row e receives the sum of its two endpoint rows.
    Var vertex_to_edge(Var vertex_feats, const EdgePairs& edges) {
        Tensor out = aggregate_vertices_to_edges(value(vertex_feats), edges);
        return push(std::move(out), requires_grad(vertex_feats),
                    [vertex_feats, edges](Tape& t, std::size_t self) {
                        if (!t.requires_grad(vertex_feats)) return;
                        const Tensor& g = t.nodes_[self].grad;
                        Tensor& gv = t.grad_accum(vertex_feats);
                        const std::size_t d = gv.cols();
                        for (std::size_t idx = 0; idx < edges.size(); ++idx) {
                            const double* gr = g.row_ptr(idx);
                            double* gs = gv.row_ptr(edges[idx].first);
                            double* gt = gv.row_ptr(edges[idx].second);
                            for (std::size_t j = 0; j < d; ++j) {
                                gs[j] += gr[j];
                                gt[j] += gr[j];
                            }
                        }
                    });
    }

    // -- reverse sweep ------------------------------------------------------

    void backward(Var loss) {
        if (backward_ran_)
            throw InternalError("Tape::backward called twice without a new forward pass");
        if (value(loss).numel() != 1) throw ShapeError("Tape::backward: loss must be scalar");
        backward_ran_ = true;
        grad_accum(loss)[0] = 1.0;
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            Node& node = nodes_[i];
            if (node.backward && !node.grad.empty()) node.backward(*this, i);
            // Intermediate buffers are dead once their closure has fired;
            // leaves keep gradients for harvesting.
            if (node.backward) {
                node.value = Tensor();
                node.grad = Tensor();
            } else if (!node.requires_grad) {
                node.value = Tensor();
            }
        }
    }

    bool backward_ran() const { return backward_ran_; }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // allocated on first gradient touch
        bool requires_grad = false;
        std::function<void(Tape&, std::size_t)> backward;
    };

    Tensor& grad_accum(Var v) {
        Node& n = nodes_[v.idx];
        if (n.grad.empty()) n.grad = Tensor(n.value.shape());
        return n.grad;
    }

    Var push(Tensor value, bool requires_grad,
             std::function<void(Tape&, std::size_t)> backward) {
        nodes_.push_back(Node{std::move(value), Tensor(), requires_grad, std::move(backward)});
        return Var{nodes_.size() - 1};
    }

    std::vector<Node> nodes_;
    bool backward_ran_ = false;
};

}  // namespace tspgnn
