#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "unitrack/tensor.hpp"

namespace unitrack {

/// Reverse-mode tape over Tensor2D values. Every operation computes its
/// result eagerly and records a hand-written adjoint; backward() replays the
/// adjoints from the loss node down and leaves d(loss)/d(node) in each node.
///
/// One tape records one forward pass. backward() may run once per tape;
/// calling it again (or on an empty tape) is a StateError. Gradients reach
/// Parameter accumulators only through accumulate_parameter_gradients(),
/// which flushes leaves in creation order so batched accumulation is
/// deterministic.
class Tape {
public:
    using Ref = int32_t;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // -- leaves ------------------------------------------------------------
    Ref constant(Tensor2D v);
    Ref zeros(int rows, int cols) { return constant(Tensor2D::zeros(rows, cols)); }
    Ref parameter(Parameter& p);

    const Tensor2D& value(Ref r) const { return node(r).value; }
    const Tensor2D& gradient(Ref r) const;

    // -- elementwise and linear algebra -------------------------------------
    Ref add(Ref a, Ref b);
    Ref sub(Ref a, Ref b);
    Ref mul(Ref a, Ref b);
    Ref scale(Ref a, double s);
    Ref add_scalar(Ref a, double s);
    Ref add_const(Ref a, Tensor2D c);
    Ref mul_const(Ref a, Tensor2D c);
    Ref add_row_broadcast(Ref a, Ref row);  // [m,n] + [1,n]
    Ref matmul(Ref a, Ref b);               // [m,k]*[k,n]
    Ref matmul_nt(Ref a, Ref b);            // [m,k]*[n,k]^T
    Ref maximum(Ref a, Ref b);              // ties resolve to a
    Ref gelu(Ref a);
    Ref sigmoid(Ref a);
    Ref sum_all(Ref a);  // -> [1,1]

    // -- structure ----------------------------------------------------------
    Ref slice_rows(Ref a, int begin, int count);
    Ref concat_rows(const std::vector<Ref>& parts);
    Ref concat_cols(Ref a, Ref b);
    Ref lookup_rows(Ref table, std::vector<int> ids);

    // -- normalization, attention, convolution ------------------------------
    Ref layer_norm(Ref x, Ref scale, Ref shift, double eps);
    Ref masked_softmax(Ref logits, AdditiveMask mask);
    Ref multihead_attention(Ref q, Ref k, Ref v, AdditiveMask mask, int heads);
    Ref conv3x3(Ref x, int grid_h, int grid_w, Ref weight, Ref bias);
    Ref cosine_similarity(Ref rows, Ref probe);  // [n,C],[1,C] -> [n,1]

    // -- fused losses --------------------------------------------------------
    /// -log(exp(s_pos) / (exp(s_pos) + sum_k exp(s_neg_k))), log-sum-exp
    /// stabilized. scores is [n,1]; indices address its rows.
    Ref contrastive_logit_loss(Ref scores, int positive, std::vector<int> negatives);
    /// Mean binary cross-entropy; predictions must lie strictly in (0,1).
    Ref bce_mean(Ref probs, Tensor2D labels);
    /// Penalty-reduced focal loss against a soft label map with exactly the
    /// cells at 1.0 acting as positives; normalized by the positive count.
    Ref focal_center_loss(Ref probs, Tensor2D labels, double alpha, double beta);
    /// Mean absolute difference against a constant target of the same shape.
    Ref l1_loss(Ref pred, Tensor2D target);
    /// 1 - GIoU between a predicted (cx, cy, w, h) row and a constant box.
    Ref giou_loss(Ref pred_box, std::array<double, 4> gt_box);

    // -- reverse pass --------------------------------------------------------
    void backward(Ref loss);
    void accumulate_parameter_gradients();
    bool backward_done() const { return backward_done_; }
    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor2D value;
        Tensor2D grad;
        std::function<void(Tape&)> backprop;  // may be empty for leaves
        Parameter* param = nullptr;
    };

    Node& node(Ref r);
    const Node& node(Ref r) const;
    Ref push(Tensor2D value, std::function<void(Tape&)> backprop = {}, Parameter* p = nullptr);
    Tensor2D& grad(Ref r) { return node(r).grad; }

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

/// Central finite differences of a scalar function of a parameter set:
/// (f(th + eps e_i) - f(th - eps e_i)) / (2 eps) per coordinate. The
/// verification oracle for every analytic adjoint; eps must lie in
/// [1e-6, 1e-3] for double precision.
std::vector<Tensor2D> finite_diff_gradient(const std::function<double()>& f,
                                           const std::vector<Parameter*>& params, double eps);

/// Relative error between analytic and finite-difference gradients:
/// |a - b| / max(|a|, |b|, floor).
double gradient_rel_error(double analytic, double fd, double floor = 1e-3);

}  // namespace unitrack
