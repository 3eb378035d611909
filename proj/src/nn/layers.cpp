#include "agelab/nn/layers.hpp"

#include "agelab/common/error.hpp"

#include <cmath>

namespace agelab::nn {

Parameter &ParameterStore::create(const std::string &name, Eigen::Index rows, Eigen::Index cols) {
    auto [it, inserted] = params_.try_emplace(name, name, Matrix::Zero(rows, cols));
    if (!inserted) {
        throw AgelabError("duplicate parameter name: " + name);
    }
    return it->second;
}

Parameter &ParameterStore::at(const std::string &name) {
    auto it = params_.find(name);
    if (it == params_.end()) {
        throw AgelabError("unknown parameter: " + name);
    }
    return it->second;
}

void ParameterStore::zero_grad() {
    for (auto &[name, p] : params_) {
        p.zero_grad();
    }
}

std::size_t ParameterStore::parameter_count() const {
    std::size_t n = 0;
    for (const auto &[name, p] : params_) {
        n += static_cast<std::size_t>(p.value.size());
    }
    return n;
}

std::map<std::string, Matrix> ParameterStore::snapshot() const {
    std::map<std::string, Matrix> snap;
    for (const auto &[name, p] : params_) {
        snap[name] = p.value;
    }
    return snap;
}

void ParameterStore::restore(const std::map<std::string, Matrix> &snap) {
    for (auto &[name, p] : params_) {
        auto it = snap.find(name);
        if (it == snap.end()) {
            throw AgelabError("snapshot missing parameter: " + name);
        }
        p.value = it->second;
    }
}

void init_xavier(Parameter &p, util::Rng &rng) {
    const double sd = std::sqrt(2.0 / static_cast<double>(p.value.rows() + p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
            p.value(i, j) = rng.normal(0.0, sd);
        }
    }
}

void init_normal(Parameter &p, util::Rng &rng, double sd) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
            p.value(i, j) = rng.normal(0.0, sd);
        }
    }
}

void init_zeros(Parameter &p) { p.value.setZero(); }
void init_ones(Parameter &p) { p.value.setOnes(); }

Linear::Linear(ParameterStore &store, const std::string &prefix, Eigen::Index in,
               Eigen::Index out, util::Rng &rng)
    : w_(&store.create(prefix + ".W", in, out)), b_(&store.create(prefix + ".b", 1, out)) {
    init_xavier(*w_, rng);
    init_zeros(*b_);
}

Var Linear::operator()(Tape &tape, Var x) const {
    return add_rowvec(matmul(x, tape.leaf(*w_)), tape.leaf(*b_));
}

LayerNormModule::LayerNormModule(ParameterStore &store, const std::string &prefix,
                                 Eigen::Index width)
    : gamma_(&store.create(prefix + ".gamma", 1, width)),
      beta_(&store.create(prefix + ".beta", 1, width)) {
    init_ones(*gamma_);
    init_zeros(*beta_);
}

Var LayerNormModule::operator()(Tape &tape, Var x) const {
    return layer_norm(x, tape.leaf(*gamma_), tape.leaf(*beta_));
}

SelfAttention::SelfAttention(ParameterStore &store, const std::string &prefix, Eigen::Index width,
                             int heads, util::Rng &rng)
    : q_(store, prefix + ".q", width, width, rng), k_(store, prefix + ".k", width, width, rng),
      v_(store, prefix + ".v", width, width, rng), o_(store, prefix + ".o", width, width, rng),
      heads_(heads) {}

Var SelfAttention::operator()(Tape &tape, Var x, int tokens) const {
    Var attended = block_self_attention(q_(tape, x), k_(tape, x), v_(tape, x), tokens, heads_);
    return o_(tape, attended);
}

TransformerBlock::TransformerBlock(ParameterStore &store, const std::string &prefix,
                                   Eigen::Index width, int heads, Eigen::Index ff_width,
                                   util::Rng &rng)
    : ln1_(store, prefix + ".ln1", width), ln2_(store, prefix + ".ln2", width),
      attn_(store, prefix + ".attn", width, heads, rng),
      ff1_(store, prefix + ".ff1", width, ff_width, rng),
      ff2_(store, prefix + ".ff2", ff_width, width, rng) {}

Var TransformerBlock::operator()(Tape &tape, Var x, int tokens) const {
    Var h = add(x, attn_(tape, ln1_(tape, x), tokens));
    return add(h, ff2_(tape, gelu(ff1_(tape, ln2_(tape, h)))));
}

TransformerStack::TransformerStack(ParameterStore &store, const std::string &prefix, int depth,
                                   Eigen::Index width, int heads, Eigen::Index ff_width,
                                   util::Rng &rng) {
    for (int i = 0; i < depth; ++i) {
        blocks_.emplace_back(store, prefix + "." + std::to_string(i), width, heads, ff_width, rng);
    }
}

Var TransformerStack::operator()(Tape &tape, Var x, int tokens) const {
    Var h = x;
    for (const auto &block : blocks_) {
        h = block(tape, h, tokens);
    }
    return h;
}

void Adam::step(ParameterStore &store) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (auto &[name, p] : store.all()) {
        auto [it, inserted] = state_.try_emplace(
            name, std::make_pair(Matrix::Zero(p.value.rows(), p.value.cols()),
                                 Matrix::Zero(p.value.rows(), p.value.cols())));
        Matrix &m = it->second.first;
        Matrix &v = it->second.second;
        m = beta1_ * m + (1.0 - beta1_) * p.grad;
        v = beta2_ * v + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
        const Matrix mhat = m / bc1;
        const Matrix vhat = v / bc2;
        p.value.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
    }
}

void Adam::reset() {
    t_ = 0;
    state_.clear();
}

} // namespace agelab::nn
