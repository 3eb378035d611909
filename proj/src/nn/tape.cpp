#include "agelab/nn/tape.hpp"

#include "agelab/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace agelab::nn {

const Matrix &Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix v) { return make_node(std::move(v), false, nullptr); }

Var Tape::scalar_constant(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
}

Var Tape::leaf(Parameter &p) {
    Node node;
    node.value = p.value;
    node.requires_grad = true;
    node.param = &p;
    nodes_.push_back(std::move(node));
    const int id = static_cast<int>(nodes_.size()) - 1;
    nodes_.back().backward = [id](Tape &t) {
        Node &n = t.nodes_[static_cast<std::size_t>(id)];
        n.param->grad += n.grad;
    };
    return Var(this, id);
}

Matrix &Tape::grad(int id) {
    Node &n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) {
        n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    }
    return n.grad;
}

bool Tape::has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() > 0; }

void Tape::set_backward(int id, std::function<void(Tape &)> fn) {
    nodes_[static_cast<std::size_t>(id)].backward = std::move(fn);
}

Var Tape::make_node(Matrix value, bool requires_grad, std::function<void(Tape &)> backward) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var loss) {
    if (loss.value().size() != 1) {
        throw AgelabError("Tape::backward: loss must be a 1x1 node");
    }
    grad(loss.id())(0, 0) = 1.0;
    for (int id = loss.id(); id >= 0; --id) {
        Node &n = nodes_[static_cast<std::size_t>(id)];
        if (n.backward && n.grad.size() > 0) {
            n.backward(*this);
        }
    }
}

void Tape::clear() { nodes_.clear(); }

namespace {

Tape &tape_of(Var a) { return *a.tape(); }

bool needs(Var a) { return tape_of(a).requires_grad(a.id()); }

void accumulate(Tape &t, int target, const Matrix &g) {
    if (t.requires_grad(target)) {
        t.grad(target) += g;
    }
}

/// Node whose backward receives (tape, upstream gradient).
template <typename Fn>
Var node_bw(Tape &t, Matrix value, bool req, Fn fn) {
    Var out = t.make_node(std::move(value), req, nullptr);
    if (req) {
        const int oid = out.id();
        t.set_backward(oid, [oid, fn = std::move(fn)](Tape &tt) { fn(tt, tt.grad(oid)); });
    }
    return out;
}

void check_same_shape(Var a, Var b, const char *op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw AgelabError(std::string(op) + ": shape mismatch");
    }
}

} // namespace

Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    Tape &t = tape_of(a);
    const int ia = a.id(), ib = b.id();
    return node_bw(t, a.value() + b.value(), needs(a) || needs(b),
                   [ia, ib](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, g);
                       accumulate(tt, ib, g);
                   });
}

Var sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    Tape &t = tape_of(a);
    const int ia = a.id(), ib = b.id();
    return node_bw(t, a.value() - b.value(), needs(a) || needs(b),
                   [ia, ib](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, g);
                       accumulate(tt, ib, Matrix(-g));
                   });
}

Var cmul(Var a, Var b) {
    check_same_shape(a, b, "cmul");
    Tape &t = tape_of(a);
    const int ia = a.id(), ib = b.id();
    return node_bw(t, a.value().cwiseProduct(b.value()), needs(a) || needs(b),
                   [ia, ib](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, g.cwiseProduct(tt.value(ib)));
                       accumulate(tt, ib, g.cwiseProduct(tt.value(ia)));
                   });
}

Var scale(Var a, double s) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    return node_bw(t, Matrix(a.value() * s), needs(a),
                   [ia, s](Tape &tt, const Matrix &g) { accumulate(tt, ia, Matrix(g * s)); });
}

Var add_scalar(Var a, double s) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    return node_bw(t, Matrix(a.value().array() + s), needs(a),
                   [ia](Tape &tt, const Matrix &g) { accumulate(tt, ia, g); });
}

Var matmul(Var a, Var b) {
    if (a.cols() != b.rows()) {
        throw AgelabError("matmul: inner dimension mismatch");
    }
    Tape &t = tape_of(a);
    const int ia = a.id(), ib = b.id();
    return node_bw(t, Matrix(a.value() * b.value()), needs(a) || needs(b),
                   [ia, ib](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, Matrix(g * tt.value(ib).transpose()));
                       accumulate(tt, ib, Matrix(tt.value(ia).transpose() * g));
                   });
}

Var transpose(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    return node_bw(t, Matrix(a.value().transpose()), needs(a),
                   [ia](Tape &tt, const Matrix &g) { accumulate(tt, ia, Matrix(g.transpose())); });
}

Var add_rowvec(Var a, Var row) {
    if (row.rows() != 1 || row.cols() != a.cols()) {
        throw AgelabError("add_rowvec: row must be 1 x cols(a)");
    }
    Tape &t = tape_of(a);
    const int ia = a.id(), ir = row.id();
    Matrix out = a.value();
    out.rowwise() += row.value().row(0);
    return node_bw(t, std::move(out), needs(a) || needs(row),
                   [ia, ir](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, g);
                       accumulate(tt, ir, Matrix(g.colwise().sum()));
                   });
}

Var mul_scalar(Var a, Var s) {
    if (s.value().size() != 1) {
        throw AgelabError("mul_scalar: s must be 1x1");
    }
    Tape &t = tape_of(a);
    const int ia = a.id(), is = s.id();
    return node_bw(t, Matrix(a.value() * s.scalar()), needs(a) || needs(s),
                   [ia, is](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, Matrix(g * tt.value(is)(0, 0)));
                       if (tt.requires_grad(is)) {
                           Matrix gs(1, 1);
                           gs(0, 0) = g.cwiseProduct(tt.value(ia)).sum();
                           tt.grad(is) += gs;
                       }
                   });
}

Var div_scalar(Var a, Var s) {
    if (s.value().size() != 1) {
        throw AgelabError("div_scalar: s must be 1x1");
    }
    Tape &t = tape_of(a);
    const int ia = a.id(), is = s.id();
    return node_bw(t, Matrix(a.value() / s.scalar()), needs(a) || needs(s),
                   [ia, is](Tape &tt, const Matrix &g) {
                       const double sv = tt.value(is)(0, 0);
                       accumulate(tt, ia, Matrix(g / sv));
                       if (tt.requires_grad(is)) {
                           Matrix gs(1, 1);
                           gs(0, 0) = -g.cwiseProduct(tt.value(ia)).sum() / (sv * sv);
                           tt.grad(is) += gs;
                       }
                   });
}

Var sub_bcast(Var a, Var s) {
    if (s.value().size() != 1) {
        throw AgelabError("sub_bcast: s must be 1x1");
    }
    Tape &t = tape_of(a);
    const int ia = a.id(), is = s.id();
    return node_bw(t, Matrix(a.value().array() - s.scalar()), needs(a) || needs(s),
                   [ia, is](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, g);
                       if (tt.requires_grad(is)) {
                           Matrix gs(1, 1);
                           gs(0, 0) = -g.sum();
                           tt.grad(is) += gs;
                       }
                   });
}

Var relu(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    return node_bw(t, Matrix(a.value().cwiseMax(0.0)), needs(a),
                   [ia](Tape &tt, const Matrix &g) {
                       const Matrix &x = tt.value(ia);
                       accumulate(tt, ia,
                                  Matrix(g.cwiseProduct(
                                      (x.array() > 0.0).cast<double>().matrix())));
                   });
}

namespace {
constexpr double kGeluC = 0.7978845608028654; // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
} // namespace

Var gelu(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    const auto &x = a.value().array();
    Matrix out = (0.5 * x * (1.0 + (kGeluC * (x + kGeluA * x.cube())).tanh())).matrix();
    return node_bw(t, std::move(out), needs(a), [ia](Tape &tt, const Matrix &g) {
        const auto &x = tt.value(ia).array();
        const auto u = kGeluC * (x + kGeluA * x.cube());
        const auto th = u.tanh();
        const auto dudx = kGeluC * (1.0 + 3.0 * kGeluA * x.square());
        const auto dy = 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th.square()) * dudx;
        accumulate(tt, ia, Matrix(g.array() * dy));
    });
}

Var exp_v(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    Var out = node_bw(t, Matrix(a.value().array().exp()), needs(a), [](Tape &, const Matrix &) {});
    if (needs(a)) {
        const int oid = out.id();
        t.set_backward(oid, [oid, ia](Tape &tt) {
            accumulate(tt, ia, Matrix(tt.grad(oid).cwiseProduct(tt.value(oid))));
        });
    }
    return out;
}

Var log_v(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    return node_bw(t, Matrix(a.value().array().log()), needs(a),
                   [ia](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, Matrix((g.array() / tt.value(ia).array()).matrix()));
                   });
}

Var sqrt_v(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    Var out = node_bw(t, Matrix(a.value().array().sqrt()), needs(a), [](Tape &, const Matrix &) {});
    if (needs(a)) {
        const int oid = out.id();
        t.set_backward(oid, [oid, ia](Tape &tt) {
            accumulate(tt, ia,
                       Matrix((tt.grad(oid).array() * 0.5 / tt.value(oid).array()).matrix()));
        });
    }
    return out;
}

Var square(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    return node_bw(t, Matrix(a.value().array().square()), needs(a),
                   [ia](Tape &tt, const Matrix &g) {
                       accumulate(tt, ia, Matrix(2.0 * g.cwiseProduct(tt.value(ia))));
                   });
}

Var sum(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return node_bw(t, std::move(out), needs(a), [ia](Tape &tt, const Matrix &g) {
        const Matrix &x = tt.value(ia);
        accumulate(tt, ia, Matrix(Matrix::Constant(x.rows(), x.cols(), g(0, 0))));
    });
}

Var mean(Var a) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    Matrix out(1, 1);
    out(0, 0) = a.value().mean();
    return node_bw(t, std::move(out), needs(a), [ia](Tape &tt, const Matrix &g) {
        const Matrix &x = tt.value(ia);
        accumulate(tt, ia,
                   Matrix(Matrix::Constant(x.rows(), x.cols(),
                                           g(0, 0) / static_cast<double>(x.size()))));
    });
}

Var gather_rows(Var a, std::vector<int> idx) {
    Tape &t = tape_of(a);
    const int ia = a.id();
    Matrix out(static_cast<Eigen::Index>(idx.size()), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = a.value().row(idx[i]);
    }
    return node_bw(t, std::move(out), needs(a),
                   [ia, idx = std::move(idx)](Tape &tt, const Matrix &g) {
                       if (!tt.requires_grad(ia)) {
                           return;
                       }
                       Matrix &ga = tt.grad(ia);
                       for (std::size_t i = 0; i < idx.size(); ++i) {
                           ga.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
                       }
                   });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    if (gamma.rows() != 1 || gamma.cols() != x.cols() || beta.rows() != 1 ||
        beta.cols() != x.cols()) {
        throw AgelabError("layer_norm: gamma/beta must be 1 x cols(x)");
    }
    Tape &t = tape_of(x);
    const int ix = x.id(), ig = gamma.id(), ib = beta.id();
    const Eigen::Index rows = x.rows(), cols = x.cols();

    Matrix xhat(rows, cols);
    Eigen::VectorXd inv_sigma(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double mu = x.value().row(r).mean();
        const double var = (x.value().row(r).array() - mu).square().mean();
        const double is = 1.0 / std::sqrt(var + eps);
        inv_sigma(r) = is;
        xhat.row(r) = ((x.value().row(r).array() - mu) * is).matrix();
    }
    Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
    out.rowwise() += beta.value().row(0);

    const bool req = needs(x) || needs(gamma) || needs(beta);
    return node_bw(t, std::move(out), req,
                   [ix, ig, ib, xhat = std::move(xhat), inv_sigma = std::move(inv_sigma),
                    cols](Tape &tt, const Matrix &g) {
                       if (tt.requires_grad(ig)) {
                           tt.grad(ig) += g.cwiseProduct(xhat).colwise().sum();
                       }
                       if (tt.requires_grad(ib)) {
                           tt.grad(ib) += g.colwise().sum();
                       }
                       if (!tt.requires_grad(ix)) {
                           return;
                       }
                       const auto gamma_row = tt.value(ig).row(0);
                       Matrix gx(g.rows(), g.cols());
                       (void)cols;
                       for (Eigen::Index r = 0; r < g.rows(); ++r) {
                           Eigen::RowVectorXd dxhat = g.row(r).cwiseProduct(gamma_row);
                           const double m1 = dxhat.mean();
                           const double m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
                           gx.row(r) = ((dxhat.array() - m1 - xhat.row(r).array() * m2) *
                                        inv_sigma(r))
                                           .matrix();
                       }
                       tt.grad(ix) += gx;
                   });
}

Var block_self_attention(Var q, Var k, Var v, int tokens, int heads) {
    check_same_shape(q, k, "block_self_attention");
    check_same_shape(q, v, "block_self_attention");
    const Eigen::Index total_rows = q.rows();
    const Eigen::Index width = q.cols();
    if (tokens <= 0 || total_rows % tokens != 0) {
        throw AgelabError("block_self_attention: rows not divisible by tokens");
    }
    if (heads <= 0 || width % heads != 0) {
        throw AgelabError("block_self_attention: width not divisible by heads");
    }
    Tape &t = tape_of(q);
    const int iq = q.id(), ik = k.id(), iv = v.id();
    const Eigen::Index blocks = total_rows / tokens;
    const Eigen::Index dh = width / heads;
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    // Attention weights cached per (block, head) for the backward pass.
    auto attn = std::make_shared<std::vector<Matrix>>();
    attn->reserve(static_cast<std::size_t>(blocks * heads));

    Matrix out(total_rows, width);
    for (Eigen::Index b = 0; b < blocks; ++b) {
        for (Eigen::Index h = 0; h < heads; ++h) {
            const auto qb = q.value().block(b * tokens, h * dh, tokens, dh);
            const auto kb = k.value().block(b * tokens, h * dh, tokens, dh);
            const auto vb = v.value().block(b * tokens, h * dh, tokens, dh);
            Matrix scores = qb * kb.transpose() * inv_scale;
            for (Eigen::Index r = 0; r < tokens; ++r) {
                const double mx = scores.row(r).maxCoeff();
                scores.row(r) = (scores.row(r).array() - mx).exp();
                scores.row(r) /= scores.row(r).sum();
            }
            out.block(b * tokens, h * dh, tokens, dh) = scores * vb;
            attn->push_back(std::move(scores));
        }
    }

    const bool req = needs(q) || needs(k) || needs(v);
    return node_bw(t, std::move(out), req,
                   [iq, ik, iv, attn, blocks, heads, tokens, dh,
                    inv_scale](Tape &tt, const Matrix &g) {
                       Matrix gq = Matrix::Zero(tt.value(iq).rows(), tt.value(iq).cols());
                       Matrix gk = gq, gv = gq;
                       for (Eigen::Index b = 0; b < blocks; ++b) {
                           for (Eigen::Index h = 0; h < heads; ++h) {
                               const Matrix &a = (*attn)[static_cast<std::size_t>(b * heads + h)];
                               const auto qb = tt.value(iq).block(b * tokens, h * dh, tokens, dh);
                               const auto kb = tt.value(ik).block(b * tokens, h * dh, tokens, dh);
                               const auto vb = tt.value(iv).block(b * tokens, h * dh, tokens, dh);
                               const auto go = g.block(b * tokens, h * dh, tokens, dh);
                               gv.block(b * tokens, h * dh, tokens, dh) += a.transpose() * go;
                               Matrix da = go * vb.transpose();
                               Matrix ds(tokens, tokens);
                               for (Eigen::Index r = 0; r < tokens; ++r) {
                                   const double dot = da.row(r).cwiseProduct(a.row(r)).sum();
                                   ds.row(r) =
                                       (a.row(r).array() * (da.row(r).array() - dot)).matrix();
                               }
                               gq.block(b * tokens, h * dh, tokens, dh) +=
                                   ds * kb * inv_scale;
                               gk.block(b * tokens, h * dh, tokens, dh) +=
                                   ds.transpose() * qb * inv_scale;
                           }
                       }
                       accumulate(tt, iq, gq);
                       accumulate(tt, ik, gk);
                       accumulate(tt, iv, gv);
                   });
}

double median_bandwidth_sq(const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
    // Median of pairwise squared distances over a deterministic subsample of
    // the pooled values.
    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(x.size() + y.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        pooled.push_back(x(i));
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        pooled.push_back(y(i));
    }
    const std::size_t cap = 256;
    std::vector<double> sample;
    if (pooled.size() > cap) {
        const double stride = static_cast<double>(pooled.size()) / cap;
        for (std::size_t i = 0; i < cap; ++i) {
            sample.push_back(pooled[static_cast<std::size_t>(i * stride)]);
        }
    } else {
        sample = pooled;
    }
    std::vector<double> d2;
    d2.reserve(sample.size() * (sample.size() - 1) / 2);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        for (std::size_t j = i + 1; j < sample.size(); ++j) {
            const double d = sample[i] - sample[j];
            d2.push_back(d * d);
        }
    }
    if (d2.empty()) {
        return 1.0;
    }
    auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
    std::nth_element(d2.begin(), mid, d2.end());
    const double med = *mid;
    return med > 0.0 ? med : 1.0;
}

Var gaussian_mmd2(Var x, const Eigen::VectorXd &reference, double bandwidth_sq) {
    Tape &t = tape_of(x);
    const int ix = x.id();
    const Eigen::Index m = x.value().size();
    const Eigen::Index n = reference.size();
    if (m < 2 || n < 2) {
        throw AgelabError("gaussian_mmd2: need at least 2 samples on each side");
    }
    Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.value().data(), m);
    const double gamma = 1.0 / (2.0 * bandwidth_sq);

    Matrix kxx = (-gamma * (xv.replicate(1, m).rowwise() - xv.transpose())
                               .array()
                               .square())
                     .exp()
                     .matrix();
    Matrix kxy = (-gamma * (xv.replicate(1, n).rowwise() - reference.transpose())
                               .array()
                               .square())
                     .exp()
                     .matrix();
    Matrix kyy = (-gamma * (reference.replicate(1, n).rowwise() - reference.transpose())
                               .array()
                               .square())
                     .exp()
                     .matrix();

    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    const double sxx = kxx.sum() - md;       // exclude the diagonal (k=1)
    const double syy = kyy.sum() - nd;
    const double sxy = kxy.sum();
    Matrix out(1, 1);
    out(0, 0) = sxx / (md * (md - 1.0)) + syy / (nd * (nd - 1.0)) - 2.0 * sxy / (md * nd);

    auto kxx_p = std::make_shared<Matrix>(std::move(kxx));
    auto kxy_p = std::make_shared<Matrix>(std::move(kxy));
    auto ref_p = std::make_shared<Eigen::VectorXd>(reference);
    return node_bw(
        t, std::move(out), needs(x),
        [ix, kxx_p, kxy_p, ref_p, gamma, m, n](Tape &tt, const Matrix &g) {
            const double gs = g(0, 0);
            Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(tt.value(ix).data(), m);
            const double md = static_cast<double>(m);
            const double nd = static_cast<double>(n);
            // acc_i = sum_j kxx(i,j) * (x_i - x_j); diagonal contributes zero.
            Eigen::VectorXd acc_xx =
                kxx_p->rowwise().sum().cwiseProduct(xv) - (*kxx_p) * xv;
            Eigen::VectorXd acc_xy =
                kxy_p->rowwise().sum().cwiseProduct(xv) - (*kxy_p) * (*ref_p);
            Eigen::VectorXd gx = gs * (-4.0 * gamma / (md * (md - 1.0))) * acc_xx +
                                 gs * (4.0 * gamma / (md * nd)) * acc_xy;
            Matrix gm = Eigen::Map<Matrix>(gx.data(), tt.value(ix).rows(), tt.value(ix).cols());
            accumulate(tt, ix, gm);
        });
}

Var pearson_against(Var x, const Eigen::VectorXd &y) {
    Tape &t = tape_of(x);
    if (x.value().size() != y.size()) {
        throw AgelabError("pearson_against: length mismatch");
    }
    const Eigen::Index n = y.size();
    if (n < 2) {
        throw UndefinedStatisticError("pearson_against: need at least 2 samples");
    }
    const double ym = y.mean();
    Eigen::VectorXd yc = y.array() - ym;
    const double syy = yc.squaredNorm();
    if (syy == 0.0) {
        throw UndefinedStatisticError("pearson_against: constant reference");
    }
    Var xm = mean(x);
    Var xc = sub_bcast(x, xm);
    Matrix ycm = Eigen::Map<Matrix>(yc.data(), x.rows(), x.cols());
    Var ycv = t.constant(ycm);
    Var sxy = sum(cmul(xc, ycv));
    Var sxx = sum(square(xc));
    Var denom = sqrt_v(scale(sxx, syy));
    return div_scalar(sxy, denom);
}

} // namespace agelab::nn
