#pragma once

#include "agelab/common/rng.hpp"
#include "agelab/nn/tape.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace agelab::nn {

/// Owns every trainable parameter of a network, keyed by a stable name.
/// Iteration order is name order, so snapshots and checkpoints are canonical.
class ParameterStore {
  public:
    Parameter &create(const std::string &name, Eigen::Index rows, Eigen::Index cols);
    Parameter &at(const std::string &name);
    const std::map<std::string, Parameter> &all() const { return params_; }
    std::map<std::string, Parameter> &all() { return params_; }

    void zero_grad();
    std::size_t parameter_count() const;

    /// Deep copy of all values (best-validation snapshots).
    std::map<std::string, Matrix> snapshot() const;
    void restore(const std::map<std::string, Matrix> &snap);

  private:
    std::map<std::string, Parameter> params_;
};

void init_xavier(Parameter &p, util::Rng &rng);
void init_normal(Parameter &p, util::Rng &rng, double sd);
void init_zeros(Parameter &p);
void init_ones(Parameter &p);

/// y = x W + b with W: in x out, b: 1 x out.
class Linear {
  public:
    Linear() = default;
    Linear(ParameterStore &store, const std::string &prefix, Eigen::Index in, Eigen::Index out,
           util::Rng &rng);
    Var operator()(Tape &tape, Var x) const;
    Parameter &weight() { return *w_; }
    Parameter &bias() { return *b_; }

  private:
    Parameter *w_ = nullptr;
    Parameter *b_ = nullptr;
};

class LayerNormModule {
  public:
    LayerNormModule() = default;
    LayerNormModule(ParameterStore &store, const std::string &prefix, Eigen::Index width);
    Var operator()(Tape &tape, Var x) const;

  private:
    Parameter *gamma_ = nullptr;
    Parameter *beta_ = nullptr;
};

/// Multi-head softmax self-attention over fixed-length token blocks.
class SelfAttention {
  public:
    SelfAttention() = default;
    SelfAttention(ParameterStore &store, const std::string &prefix, Eigen::Index width, int heads,
                  util::Rng &rng);
    Var operator()(Tape &tape, Var x, int tokens) const;

  private:
    Linear q_, k_, v_, o_;
    int heads_ = 1;
};

/// Pre-norm transformer block: x + attn(ln(x)), then h + ff(ln(h)).
class TransformerBlock {
  public:
    TransformerBlock() = default;
    TransformerBlock(ParameterStore &store, const std::string &prefix, Eigen::Index width,
                     int heads, Eigen::Index ff_width, util::Rng &rng);
    Var operator()(Tape &tape, Var x, int tokens) const;

  private:
    LayerNormModule ln1_, ln2_;
    SelfAttention attn_;
    Linear ff1_, ff2_;
};

class TransformerStack {
  public:
    TransformerStack() = default;
    TransformerStack(ParameterStore &store, const std::string &prefix, int depth,
                     Eigen::Index width, int heads, Eigen::Index ff_width, util::Rng &rng);
    Var operator()(Tape &tape, Var x, int tokens) const;

  private:
    std::vector<TransformerBlock> blocks_;
};

/// Adam with bias correction.
class Adam {
  public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ParameterStore &store);
    void reset();
    double learning_rate() const { return lr_; }

  private:
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::map<std::string, std::pair<Matrix, Matrix>> state_;
};

} // namespace agelab::nn
