#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace agelab::nn {

using Matrix = Eigen::MatrixXd;

/// Trainable tensor. Lives outside the tape; gradients accumulate across the
/// backward sweep of the step that used it.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;

    Parameter() = default;
    Parameter(std::string n, Matrix v)
        : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

    void zero_grad() { grad.setZero(); }
};

class Tape;

/// Lightweight handle to a tape node.
class Var {
  public:
    Var() = default;

    const Matrix &value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    double scalar() const { return value()(0, 0); }
    Tape *tape() const { return tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

  private:
    friend class Tape;
    Var(Tape *tape, int id) : tape_(tape), id_(id) {}

    Tape *tape_ = nullptr;
    int id_ = -1;
};

/// Define-by-run reverse-mode autodiff over dense matrices. Values are
/// computed eagerly as the graph is built; backward() runs one reverse sweep
/// accumulating into Parameter::grad.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape &) = delete;
    Tape &operator=(const Tape &) = delete;

    Var constant(Matrix v);
    Var scalar_constant(double v);
    /// Leaf bound to a parameter; gradient flows into p.grad.
    Var leaf(Parameter &p);

    /// Reverse sweep from a 1x1 loss node.
    void backward(Var loss);

    void clear();
    std::size_t node_count() const { return nodes_.size(); }

    // --- node internals used by the op implementations ---
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        Parameter *param = nullptr;
        std::function<void(Tape &)> backward;
    };

    const Matrix &value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    /// Gradient accumulator, lazily allocated to zeros.
    Matrix &grad(int id);
    bool has_grad(int id) const;
    bool requires_grad(int id) const {
        return nodes_[static_cast<std::size_t>(id)].requires_grad;
    }
    Var make_node(Matrix value, bool requires_grad, std::function<void(Tape &)> backward);
    void set_backward(int id, std::function<void(Tape &)> fn);

  private:
    std::vector<Node> nodes_;
};

// --- elementwise and structural ops ---
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var cmul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var matmul(Var a, Var b);
Var transpose(Var a);
/// Broadcast-add a 1 x C row vector to every row of a.
Var add_rowvec(Var a, Var row);
/// Multiply / divide every entry by a 1x1 tape scalar.
Var mul_scalar(Var a, Var s);
Var div_scalar(Var a, Var s);
/// Subtract a 1x1 tape scalar from every entry.
Var sub_bcast(Var a, Var s);

Var relu(Var a);
Var gelu(Var a);
Var exp_v(Var a);
Var log_v(Var a);
Var sqrt_v(Var a);
Var square(Var a);

Var sum(Var a);
Var mean(Var a);

/// out.row(i) = a.row(idx[i]); backward scatter-adds.
Var gather_rows(Var a, std::vector<int> idx);

/// Row-wise layer normalization with learned gain/bias (1 x C each).
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

/// Scaled dot-product self-attention applied independently to consecutive
/// blocks of `tokens` rows, split into `heads` column groups.
Var block_self_attention(Var q, Var k, Var v, int tokens, int heads);

/// Unbiased Gaussian-kernel MMD^2 between the entries of x (any shape) and a
/// fixed reference sample. The bandwidth is treated as a constant.
Var gaussian_mmd2(Var x, const Eigen::VectorXd &reference, double bandwidth_sq);

/// Median-heuristic squared bandwidth over the pooled sample (subsampled for
/// large inputs; deterministic).
double median_bandwidth_sq(const Eigen::VectorXd &x, const Eigen::VectorXd &y);

/// Pearson correlation between a tape vector and a constant vector, as a 1x1
/// node. Throws for constant inputs.
Var pearson_against(Var x, const Eigen::VectorXd &y);

} // namespace agelab::nn
