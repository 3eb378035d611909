#include "agelab/common/rng.hpp"
#include "agelab/nn/layers.hpp"
#include "agelab/nn/tape.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace agelab;
using namespace agelab::nn;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, util::Rng &rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = scale * rng.normal();
        }
    }
    return m;
}

/// Max relative error between analytic and central finite-difference
/// gradients of a scalar-valued graph over the given parameters.
double fd_max_rel_error(const std::function<Var(Tape &)> &build,
                        std::vector<Parameter *> params, double h = 1e-5) {
    // analytic
    for (auto *p : params) {
        p->zero_grad();
    }
    {
        Tape tape;
        Var loss = build(tape);
        tape.backward(loss);
    }
    double worst = 0.0;
    for (auto *p : params) {
        for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
            for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
                const double saved = p->value(i, j);
                p->value(i, j) = saved + h;
                double f_plus;
                {
                    Tape tape;
                    f_plus = build(tape).scalar();
                }
                p->value(i, j) = saved - h;
                double f_minus;
                {
                    Tape tape;
                    f_minus = build(tape).scalar();
                }
                p->value(i, j) = saved;
                const double fd = (f_plus - f_minus) / (2.0 * h);
                const double an = p->grad(i, j);
                const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
                worst = std::max(worst, std::abs(fd - an) / denom);
            }
        }
    }
    return worst;
}

} // namespace

TEST_CASE("elementwise and structural ops pass finite-difference checks") {
    util::Rng rng(1);
    Parameter a("a", random_matrix(3, 4, rng));
    Parameter b("b", random_matrix(3, 4, rng));
    Parameter w("w", random_matrix(4, 2, rng));
    Parameter row("row", random_matrix(1, 4, rng));
    Parameter s("s", random_matrix(1, 1, rng, 0.3));
    s.value(0, 0) += 2.0; // keep the scalar away from zero for division

    auto check = [&](const std::function<Var(Tape &)> &build, std::vector<Parameter *> params) {
        CHECK(fd_max_rel_error(build, std::move(params)) < 1e-6);
    };

    check([&](Tape &t) { return sum(cmul(add(t.leaf(a), t.leaf(b)), t.leaf(b))); }, {&a, &b});
    check([&](Tape &t) { return sum(square(sub(t.leaf(a), t.leaf(b)))); }, {&a, &b});
    check([&](Tape &t) { return mean(matmul(t.leaf(a), t.leaf(w))); }, {&a, &w});
    check([&](Tape &t) { return sum(add_rowvec(t.leaf(a), t.leaf(row))); }, {&a, &row});
    check([&](Tape &t) { return sum(square(transpose(t.leaf(a)))); }, {&a});
    check([&](Tape &t) { return sum(mul_scalar(t.leaf(a), t.leaf(s))); }, {&a, &s});
    check([&](Tape &t) { return sum(div_scalar(t.leaf(a), t.leaf(s))); }, {&a, &s});
    check([&](Tape &t) { return sum(square(sub_bcast(t.leaf(a), t.leaf(s)))); }, {&a, &s});
    check([&](Tape &t) { return sum(gelu(t.leaf(a))); }, {&a});
    check([&](Tape &t) { return sum(exp_v(scale(t.leaf(a), 0.3))); }, {&a});
    check([&](Tape &t) { return sum(square(t.leaf(a))); }, {&a});
    check([&](Tape &t) { return sum(log_v(add_scalar(square(t.leaf(a)), 1.0))); }, {&a});
    check([&](Tape &t) { return sum(sqrt_v(add_scalar(square(t.leaf(a)), 1.0))); }, {&a});
    check([&](Tape &t) { return mean(relu(t.leaf(a))); }, {&a});
    check([&](Tape &t) { return sum(gather_rows(t.leaf(a), {2, 0, 0, 1})); }, {&a});
}

TEST_CASE("layer norm forward matches a direct computation and its gradient checks") {
    util::Rng rng(2);
    Parameter x("x", random_matrix(5, 6, rng, 2.0));
    Parameter gamma("gamma", random_matrix(1, 6, rng));
    Parameter beta("beta", random_matrix(1, 6, rng));

    {
        Tape tape;
        Var out = layer_norm(tape.leaf(x), tape.leaf(gamma), tape.leaf(beta));
        for (Eigen::Index r = 0; r < 5; ++r) {
            const double mu = x.value.row(r).mean();
            const double var = (x.value.row(r).array() - mu).square().mean();
            for (Eigen::Index c = 0; c < 6; ++c) {
                const double xhat = (x.value(r, c) - mu) / std::sqrt(var + 1e-5);
                const double expected = xhat * gamma.value(0, c) + beta.value(0, c);
                CHECK(out.value()(r, c) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
    CHECK(fd_max_rel_error(
              [&](Tape &t) {
                  return sum(square(layer_norm(t.leaf(x), t.leaf(gamma), t.leaf(beta))));
              },
              {&x, &gamma, &beta}) < 1e-5);
}

TEST_CASE("block attention forward matches a naive per-block computation") {
    util::Rng rng(3);
    const int tokens = 4, heads = 2;
    const Eigen::Index width = 6, blocks = 3;
    Parameter q("q", random_matrix(blocks * tokens, width, rng));
    Parameter k("k", random_matrix(blocks * tokens, width, rng));
    Parameter v("v", random_matrix(blocks * tokens, width, rng));

    Tape tape;
    Var out = block_self_attention(tape.leaf(q), tape.leaf(k), tape.leaf(v), tokens, heads);

    const Eigen::Index dh = width / heads;
    for (Eigen::Index b = 0; b < blocks; ++b) {
        for (int h = 0; h < heads; ++h) {
            Matrix qb = q.value.block(b * tokens, h * dh, tokens, dh);
            Matrix kb = k.value.block(b * tokens, h * dh, tokens, dh);
            Matrix vb = v.value.block(b * tokens, h * dh, tokens, dh);
            Matrix scores = qb * kb.transpose() / std::sqrt(static_cast<double>(dh));
            for (Eigen::Index r = 0; r < tokens; ++r) {
                Eigen::RowVectorXd e = scores.row(r).array().exp();
                e /= e.sum();
                Eigen::RowVectorXd expected = e * vb;
                for (Eigen::Index c = 0; c < dh; ++c) {
                    CHECK(out.value()(b * tokens + r, h * dh + c) ==
                          doctest::Approx(expected(c)).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("block attention gradients pass finite differences") {
    util::Rng rng(4);
    const int tokens = 3, heads = 2;
    Parameter q("q", random_matrix(6, 4, rng));
    Parameter k("k", random_matrix(6, 4, rng));
    Parameter v("v", random_matrix(6, 4, rng));
    CHECK(fd_max_rel_error(
              [&](Tape &t) {
                  return sum(square(block_self_attention(t.leaf(q), t.leaf(k), t.leaf(v),
                                                         tokens, heads)));
              },
              {&q, &k, &v}) < 1e-5);
}

TEST_CASE("unbiased mmd matches a naive double loop and its gradient checks") {
    util::Rng rng(5);
    const Eigen::Index m = 12, n = 10;
    Parameter x("x", random_matrix(m, 1, rng));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = rng.normal() + 0.5;
    }
    const double h2 = median_bandwidth_sq(x.value.col(0), y);
    REQUIRE(h2 > 0.0);

    // naive double-loop oracle
    auto kexp = [h2](double a, double b) { return std::exp(-(a - b) * (a - b) / (2.0 * h2)); };
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i != j) {
                sxx += kexp(x.value(i, 0), x.value(j, 0));
            }
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) {
                syy += kexp(y(i), y(j));
            }
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            sxy += kexp(x.value(i, 0), y(j));
        }
    }
    const double expected = sxx / (m * (m - 1.0)) + syy / (n * (n - 1.0)) - 2.0 * sxy / (m * n);

    {
        Tape tape;
        Var mmd = gaussian_mmd2(tape.leaf(x), y, h2);
        CHECK(mmd.scalar() == doctest::Approx(expected).epsilon(1e-10));
    }
    CHECK(fd_max_rel_error(
              [&](Tape &t) { return gaussian_mmd2(t.leaf(x), y, h2); }, {&x}) < 1e-5);
}

TEST_CASE("pearson on tape matches sample statistics and its gradient checks") {
    util::Rng rng(6);
    Parameter x("x", random_matrix(20, 1, rng));
    Eigen::VectorXd y(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
        y(i) = rng.normal() + 0.2 * x.value(i, 0);
    }

    {
        Tape tape;
        Var r = pearson_against(tape.leaf(x), y);
        const double xm = x.value.col(0).mean();
        const double ym = y.mean();
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (Eigen::Index i = 0; i < 20; ++i) {
            sxy += (x.value(i, 0) - xm) * (y(i) - ym);
            sxx += (x.value(i, 0) - xm) * (x.value(i, 0) - xm);
            syy += (y(i) - ym) * (y(i) - ym);
        }
        CHECK(r.scalar() == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-12));
    }
    CHECK(fd_max_rel_error([&](Tape &t) { return pearson_against(t.leaf(x), y); }, {&x}) <
          1e-5);
}

TEST_CASE("transformer block gradient flows through every parameter") {
    util::Rng rng(7);
    ParameterStore store;
    TransformerBlock block(store, "blk", 8, 2, 16, rng);
    Matrix input = random_matrix(6, 8, rng); // 2 blocks of 3 tokens

    std::vector<Parameter *> params;
    for (auto &[name, p] : store.all()) {
        params.push_back(&p);
    }
    const double err = fd_max_rel_error(
        [&](Tape &t) { return sum(square(block(t, t.constant(input), 3))); }, params, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("evaluation forward is deterministic") {
    util::Rng rng(8);
    ParameterStore store;
    TransformerStack stack(store, "enc", 2, 8, 2, 16, rng);
    Matrix input = random_matrix(10, 8, rng);
    Tape t1, t2;
    Var a = stack(t1, t1.constant(input), 5);
    Var b = stack(t2, t2.constant(input), 5);
    CHECK((a.value() - b.value()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam minimizes a quadratic") {
    ParameterStore store;
    Parameter &p = store.create("p", 4, 1);
    p.value << 5.0, -3.0, 2.0, 8.0;
    Matrix target(4, 1);
    target << 1.0, 2.0, 3.0, 4.0;
    Adam adam(0.05);
    for (int step = 0; step < 500; ++step) {
        Tape tape;
        Var loss = sum(square(sub(tape.leaf(p), tape.constant(target))));
        store.zero_grad();
        tape.backward(loss);
        adam.step(store);
    }
    CHECK((p.value - target).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("snapshot and restore round-trip") {
    util::Rng rng(9);
    ParameterStore store;
    Parameter &p = store.create("p", 3, 3);
    init_xavier(p, rng);
    auto snap = store.snapshot();
    const Matrix before = p.value;
    p.value.setZero();
    store.restore(snap);
    CHECK((p.value - before).cwiseAbs().maxCoeff() == 0.0);
}
