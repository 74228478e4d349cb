// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode tape over dense matrices, just enough for a small transformer.
// Values are row-major in meaning: a sequence of tokens is an (n x d) matrix.
//
#pragma once

#include "core.hpp"

#include <functional>

namespace bodysplat::ag {

struct Var {
    int id = -1;
};

class Tape {
  public:
    Var
    leaf(MatX value) {
        return push(std::move(value), {});
    }

    const MatX &value(Var v) const { return nodes_.at(v.id).value; }
    std::size_t size() const { return nodes_.size(); }

    /// Gradient accumulated so far (empty matrix when nothing reached the node).
    const MatX &grad(Var v) const { return nodes_.at(v.id).grad; }

    /// Adds an upstream gradient before backward().
    void
    seed(Var v, const MatX &g) {
        require(g.rows() == value(v).rows() && g.cols() == value(v).cols(), "tape: seed shape mismatch");
        accumulate(v.id, g);
    }

    void
    backward() {
        for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
            if (nodes_[i].grad.size() != 0 && nodes_[i].back) {
                nodes_[i].back(*this, i);
            }
        }
    }

    // -- ops ---------------------------------------------------------------------------------

    Var
    matmul(Var a, Var b) {
        require(value(a).cols() == value(b).rows(), "tape: matmul shape mismatch");
        return push(value(a) * value(b), [a, b](Tape &t, int self) {
            const MatX &g = t.nodes_[self].grad;
            t.accumulate(a.id, g * t.value(b).transpose());
            t.accumulate(b.id, t.value(a).transpose() * g);
        });
    }

    Var
    add(Var a, Var b) {
        require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(),
                "tape: add shape mismatch");
        return push(value(a) + value(b), [a, b](Tape &t, int self) {
            const MatX g = t.nodes_[self].grad;
            t.accumulate(a.id, g);
            t.accumulate(b.id, g);
        });
    }

    /// a (n x m) + row (1 x m) broadcast over rows.
    Var
    add_row(Var a, Var row) {
        require(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "tape: add_row shape mismatch");
        MatX out = value(a);
        out.rowwise() += value(row).row(0);
        return push(std::move(out), [a, row](Tape &t, int self) {
            const MatX g = t.nodes_[self].grad;
            t.accumulate(a.id, g);
            t.accumulate(row.id, g.colwise().sum());
        });
    }

    Var
    scale(Var a, double s) {
        return push(value(a) * s, [a, s](Tape &t, int self) { t.accumulate(a.id, t.nodes_[self].grad * s); });
    }

    Var
    transpose(Var a) {
        return push(value(a).transpose(), [a](Tape &t, int self) {
            t.accumulate(a.id, t.nodes_[self].grad.transpose());
        });
    }

    /// tanh-approximated GELU.
    Var
    gelu(Var a) {
        const MatX &x = value(a);
        MatX y(x.rows(), x.cols());
        const double k = std::sqrt(2.0 / std::numbers::pi);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double v = x.data()[i];
            y.data()[i]    = 0.5 * v * (1.0 + std::tanh(k * (v + 0.044715 * v * v * v)));
        }
        return push(std::move(y), [a, k](Tape &t, int self) {
            const MatX &x = t.value(a);
            const MatX &g = t.nodes_[self].grad;
            MatX d(x.rows(), x.cols());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double v  = x.data()[i];
                const double u  = k * (v + 0.044715 * v * v * v);
                const double th = std::tanh(u);
                const double du = k * (1.0 + 3.0 * 0.044715 * v * v);
                d.data()[i]     = g.data()[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * du);
            }
            t.accumulate(a.id, d);
        });
    }

    Var
    tanh(Var a) {
        MatX y = value(a).array().tanh().matrix();
        return push(y, [a](Tape &t, int self) {
            const MatX &y = t.nodes_[self].value;
            t.accumulate(a.id, (t.nodes_[self].grad.array() * (1.0 - y.array().square())).matrix());
        });
    }

    /// Row-wise softmax.
    Var
    softmax_rows(Var a) {
        const MatX &x = value(a);
        MatX y(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const double m = x.row(r).maxCoeff();
            y.row(r)       = (x.row(r).array() - m).exp().matrix();
            y.row(r)      /= y.row(r).sum();
        }
        return push(std::move(y), [a](Tape &t, int self) {
            const MatX &y = t.nodes_[self].value;
            const MatX &g = t.nodes_[self].grad;
            MatX d(y.rows(), y.cols());
            for (Eigen::Index r = 0; r < y.rows(); ++r) {
                const double dot = g.row(r).dot(y.row(r));
                d.row(r)         = (y.row(r).array() * (g.row(r).array() - dot)).matrix();
            }
            t.accumulate(a.id, d);
        });
    }

    /// Row-wise layer norm with learned (1 x m) gain and bias.
    Var
    layer_norm(Var a, Var gain, Var bias, double eps = 1e-5) {
        const MatX &x = value(a);
        const Eigen::Index m = x.cols();
        require(value(gain).cols() == m && value(bias).cols() == m, "tape: layer_norm shape mismatch");
        MatX xhat(x.rows(), m);
        VecX inv_std(x.rows());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const double mean = x.row(r).mean();
            const double var  = (x.row(r).array() - mean).square().mean();
            inv_std[r]        = 1.0 / std::sqrt(var + eps);
            xhat.row(r)       = (x.row(r).array() - mean) * inv_std[r];
        }
        MatX y = (xhat.array().rowwise() * value(gain).row(0).array()).matrix();
        y.rowwise() += value(bias).row(0);
        return push(std::move(y), [a, gain, bias, xhat, inv_std](Tape &t, int self) {
            const MatX &g = t.nodes_[self].grad;
            const Eigen::Index m = g.cols();
            t.accumulate(gain.id, (g.array() * xhat.array()).colwise().sum().matrix());
            t.accumulate(bias.id, g.colwise().sum());
            const MatX gx = (g.array().rowwise() * t.value(gain).row(0).array()).matrix();
            MatX d(g.rows(), m);
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
                const double mean_g  = gx.row(r).mean();
                const double mean_gx = gx.row(r).dot(xhat.row(r)) / static_cast<double>(m);
                d.row(r) = inv_std[r] * (gx.row(r).array() - mean_g - xhat.row(r).array() * mean_gx).matrix();
            }
            t.accumulate(a.id, d);
        });
    }

    Var
    slice_rows(Var a, Eigen::Index r0, Eigen::Index n) {
        require(r0 >= 0 && n >= 0 && r0 + n <= value(a).rows(), "tape: slice_rows out of range");
        return push(value(a).middleRows(r0, n), [a, r0, n](Tape &t, int self) {
            MatX d = MatX::Zero(t.value(a).rows(), t.value(a).cols());
            d.middleRows(r0, n) = t.nodes_[self].grad;
            t.accumulate(a.id, d);
        });
    }

    Var
    slice_cols(Var a, Eigen::Index c0, Eigen::Index n) {
        require(c0 >= 0 && n >= 0 && c0 + n <= value(a).cols(), "tape: slice_cols out of range");
        return push(value(a).middleCols(c0, n), [a, c0, n](Tape &t, int self) {
            MatX d = MatX::Zero(t.value(a).rows(), t.value(a).cols());
            d.middleCols(c0, n) = t.nodes_[self].grad;
            t.accumulate(a.id, d);
        });
    }

    Var
    concat_rows(const std::vector<Var> &parts) {
        require(!parts.empty(), "tape: concat_rows of nothing");
        Eigen::Index rows = 0;
        const Eigen::Index cols = value(parts[0]).cols();
        for (auto p : parts) {
            require(value(p).cols() == cols, "tape: concat_rows column mismatch");
            rows += value(p).rows();
        }
        MatX out(rows, cols);
        Eigen::Index r = 0;
        for (auto p : parts) {
            out.middleRows(r, value(p).rows()) = value(p);
            r += value(p).rows();
        }
        return push(std::move(out), [parts](Tape &t, int self) {
            Eigen::Index r = 0;
            for (auto p : parts) {
                const Eigen::Index n = t.value(p).rows();
                t.accumulate(p.id, t.nodes_[self].grad.middleRows(r, n));
                r += n;
            }
        });
    }

    Var
    concat_cols(const std::vector<Var> &parts) {
        require(!parts.empty(), "tape: concat_cols of nothing");
        Eigen::Index cols = 0;
        const Eigen::Index rows = value(parts[0]).rows();
        for (auto p : parts) {
            require(value(p).rows() == rows, "tape: concat_cols row mismatch");
            cols += value(p).cols();
        }
        MatX out(rows, cols);
        Eigen::Index c = 0;
        for (auto p : parts) {
            out.middleCols(c, value(p).cols()) = value(p);
            c += value(p).cols();
        }
        return push(std::move(out), [parts](Tape &t, int self) {
            Eigen::Index c = 0;
            for (auto p : parts) {
                const Eigen::Index n = t.value(p).cols();
                t.accumulate(p.id, t.nodes_[self].grad.middleCols(c, n));
                c += n;
            }
        });
    }

    /// Scaled dot-product attention with `heads` heads; q (n x d), k and v (m x d).
    Var
    attention(Var q, Var k, Var v, int heads) {
        const Eigen::Index d = value(q).cols();
        require(d % heads == 0 && value(k).cols() == d && value(v).cols() == d,
                "tape: attention dimension mismatch");
        const Eigen::Index dh = d / heads;
        std::vector<Var> outs;
        for (int h = 0; h < heads; ++h) {
            const Var qh = slice_cols(q, h * dh, dh);
            const Var kh = slice_cols(k, h * dh, dh);
            const Var vh = slice_cols(v, h * dh, dh);
            const Var s  = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
            outs.push_back(matmul(softmax_rows(s), vh));
        }
        return heads == 1 ? outs[0] : concat_cols(outs);
    }

  private:
    using Backward = std::function<void(Tape &, int)>;

    struct Node {
        MatX value;
        MatX grad;
        Backward back;
    };

    Var
    push(MatX value, Backward back) {
        nodes_.push_back(Node{std::move(value), MatX(), std::move(back)});
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    void
    accumulate(int id, const MatX &g) {
        auto &dst = nodes_[id].grad;
        if (dst.size() == 0) {
            dst = g;
        } else {
            dst += g;
        }
    }

    std::vector<Node> nodes_;
};

} // namespace bodysplat::ag
