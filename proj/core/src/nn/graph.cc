// core/src/nn/graph.cc
#include "revoice/nn/graph.h"

#include <cmath>

#include "revoice/base/error.h"

namespace revoice::nn {

const Mat& Tensor::value() const { return graph->value_of(idx); }

Tensor Graph::make(Mat value, bool needs_grad, std::function<void(Graph&, Node&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Tensor{this, static_cast<int32_t>(nodes_.size() - 1)};
}

void Graph::accumulate(int32_t idx, const Mat& g) {
  Node& n = node(idx);
  if (!n.needs_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Graph::clear() { nodes_.clear(); }

Tensor Graph::constant(Mat v) { return make(std::move(v), false, nullptr); }

Tensor Graph::param(Param& p) {
  Param* pp = &p;
  return make(p.value, p.trainable,
              [pp](Graph&, Node& n) { pp->grad += n.grad; });
}

Tensor Graph::add(Tensor a, Tensor b) {
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols()) {
    throw ModelError("graph add: shape mismatch");
  }
  const int32_t ia = a.idx, ib = b.idx;
  return make(a.value() + b.value(), node(ia).needs_grad || node(ib).needs_grad,
              [ia, ib](Graph& g, Node& n) {
                g.accumulate(ia, n.grad);
                g.accumulate(ib, n.grad);
              });
}

Tensor Graph::sub(Tensor a, Tensor b) { return add_scaled(a, 1.0, b, -1.0); }

Tensor Graph::add_scaled(Tensor a, double ca, Tensor b, double cb) {
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols()) {
    throw ModelError("graph add_scaled: shape mismatch");
  }
  const int32_t ia = a.idx, ib = b.idx;
  return make(ca * a.value() + cb * b.value(), node(ia).needs_grad || node(ib).needs_grad,
              [ia, ib, ca, cb](Graph& g, Node& n) {
                g.accumulate(ia, ca * n.grad);
                g.accumulate(ib, cb * n.grad);
              });
}

Tensor Graph::mul(Tensor a, Tensor b) {
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols()) {
    throw ModelError("graph mul: shape mismatch");
  }
  const int32_t ia = a.idx, ib = b.idx;
  return make(a.value().cwiseProduct(b.value()), node(ia).needs_grad || node(ib).needs_grad,
              [ia, ib](Graph& g, Node& n) {
                g.accumulate(ia, n.grad.cwiseProduct(g.value_of(ib)));
                g.accumulate(ib, n.grad.cwiseProduct(g.value_of(ia)));
              });
}

Tensor Graph::scale(Tensor a, double c) {
  const int32_t ia = a.idx;
  return make(c * a.value(), node(ia).needs_grad,
              [ia, c](Graph& g, Node& n) { g.accumulate(ia, c * n.grad); });
}

Tensor Graph::add_rowvec(Tensor a, Tensor row) {
  if (row.value().rows() != 1 || row.value().cols() != a.value().cols()) {
    throw ModelError("graph add_rowvec: row must be [1 x C]");
  }
  const int32_t ia = a.idx, ir = row.idx;
  Mat y = a.value();
  y.rowwise() += row.value().row(0);
  return make(std::move(y), node(ia).needs_grad || node(ir).needs_grad,
              [ia, ir](Graph& g, Node& n) {
                g.accumulate(ia, n.grad);
                g.accumulate(ir, n.grad.colwise().sum());
              });
}

Tensor Graph::matmul(Tensor a, Tensor b) {
  if (a.value().cols() != b.value().rows()) throw ModelError("graph matmul: inner dim mismatch");
  const int32_t ia = a.idx, ib = b.idx;
  return make(a.value() * b.value(), node(ia).needs_grad || node(ib).needs_grad,
              [ia, ib](Graph& g, Node& n) {
                g.accumulate(ia, n.grad * g.value_of(ib).transpose());
                g.accumulate(ib, g.value_of(ia).transpose() * n.grad);
              });
}

Tensor Graph::matmul_nt(Tensor a, Tensor b) {
  if (a.value().cols() != b.value().cols()) throw ModelError("graph matmul_nt: inner dim mismatch");
  const int32_t ia = a.idx, ib = b.idx;
  return make(a.value() * b.value().transpose(), node(ia).needs_grad || node(ib).needs_grad,
              [ia, ib](Graph& g, Node& n) {
                g.accumulate(ia, n.grad * g.value_of(ib));
                g.accumulate(ib, n.grad.transpose() * g.value_of(ia));
              });
}

Tensor Graph::concat_cols(Tensor a, Tensor b) {
  if (a.value().rows() != b.value().rows()) throw ModelError("graph concat_cols: row mismatch");
  const int32_t ia = a.idx, ib = b.idx;
  const int64_t ca = a.value().cols();
  Mat y(a.value().rows(), ca + b.value().cols());
  y << a.value(), b.value();
  return make(std::move(y), node(ia).needs_grad || node(ib).needs_grad,
              [ia, ib, ca](Graph& g, Node& n) {
                g.accumulate(ia, n.grad.leftCols(ca));
                g.accumulate(ib, n.grad.rightCols(n.grad.cols() - ca));
              });
}

Tensor Graph::slice_cols(Tensor a, int64_t begin, int64_t len) {
  if (begin < 0 || begin + len > a.value().cols()) throw ModelError("graph slice_cols: out of range");
  const int32_t ia = a.idx;
  return make(a.value().middleCols(begin, len), node(ia).needs_grad,
              [ia, begin, len](Graph& g, Node& n) {
                Mat full = Mat::Zero(g.value_of(ia).rows(), g.value_of(ia).cols());
                full.middleCols(begin, len) = n.grad;
                g.accumulate(ia, full);
              });
}

Tensor Graph::mean_rows(Tensor a) {
  const int32_t ia = a.idx;
  const int64_t t = a.value().rows();
  Mat y = a.value().colwise().mean();
  return make(std::move(y), node(ia).needs_grad,
              [ia, t](Graph& g, Node& n) {
                Mat d = (n.grad / static_cast<double>(t)).replicate(t, 1);
                g.accumulate(ia, d);
              });
}

Tensor Graph::broadcast_rows(Tensor row, int64_t t) {
  if (row.value().rows() != 1) throw ModelError("graph broadcast_rows: input must be [1 x C]");
  const int32_t ir = row.idx;
  return make(row.value().replicate(t, 1), node(ir).needs_grad,
              [ir](Graph& g, Node& n) { g.accumulate(ir, n.grad.colwise().sum()); });
}

Tensor Graph::conv1d(Tensor x, Tensor weight, Tensor bias, int kernel) {
  const int64_t t = x.value().rows();
  const int64_t cin = x.value().cols();
  if (kernel < 1 || kernel % 2 == 0) throw ModelError("graph conv1d: kernel must be odd");
  if (weight.value().rows() != kernel * cin) {
    throw ModelError("graph conv1d: weight rows must equal kernel * Cin");
  }
  const int64_t cout = weight.value().cols();
  if (bias.value().rows() != 1 || bias.value().cols() != cout) {
    throw ModelError("graph conv1d: bias must be [1 x Cout]");
  }

  // im2col with zero padding
  Mat patches = Mat::Zero(t, kernel * cin);
  const int half = kernel / 2;
  for (int j = 0; j < kernel; ++j) {
    const int64_t shift = j - half;
    const int64_t lo = std::max<int64_t>(0, -shift);
    const int64_t hi = std::min<int64_t>(t, t - shift);
    if (hi > lo) {
      patches.block(lo, static_cast<int64_t>(j) * cin, hi - lo, cin) =
          x.value().block(lo + shift, 0, hi - lo, cin);
    }
  }

  Mat y = patches * weight.value();
  y.rowwise() += bias.value().row(0);

  const int32_t ix = x.idx, iw = weight.idx, ib = bias.idx;
  auto patches_copy = std::make_shared<Mat>(std::move(patches));
  return make(std::move(y),
              node(ix).needs_grad || node(iw).needs_grad || node(ib).needs_grad,
              [ix, iw, ib, kernel, cin, half, patches_copy](Graph& g, Node& n) {
                const int64_t t = n.grad.rows();
                g.accumulate(ib, n.grad.colwise().sum());
                g.accumulate(iw, patches_copy->transpose() * n.grad);
                if (g.node(ix).needs_grad) {
                  const Mat dpatches = n.grad * g.value_of(iw).transpose();
                  Mat dx = Mat::Zero(t, cin);
                  for (int j = 0; j < kernel; ++j) {
                    const int64_t shift = j - half;
                    const int64_t lo = std::max<int64_t>(0, -shift);
                    const int64_t hi = std::min<int64_t>(t, t - shift);
                    if (hi > lo) {
                      dx.block(lo + shift, 0, hi - lo, cin) +=
                          dpatches.block(lo, static_cast<int64_t>(j) * cin, hi - lo, cin);
                    }
                  }
                  g.accumulate(ix, dx);
                }
              });
}

Tensor Graph::avg_pool_rows2(Tensor x) {
  const int64_t t = x.value().rows();
  const int64_t to = (t + 1) / 2;
  Mat y(to, x.value().cols());
  for (int64_t i = 0; i < to; ++i) {
    if (2 * i + 1 < t) {
      y.row(i) = 0.5 * (x.value().row(2 * i) + x.value().row(2 * i + 1));
    } else {
      y.row(i) = x.value().row(2 * i);
    }
  }
  const int32_t ix = x.idx;
  return make(std::move(y), node(ix).needs_grad,
              [ix, t](Graph& g, Node& n) {
                Mat dx = Mat::Zero(t, n.grad.cols());
                for (int64_t i = 0; i < n.grad.rows(); ++i) {
                  if (2 * i + 1 < t) {
                    dx.row(2 * i) = 0.5 * n.grad.row(i);
                    dx.row(2 * i + 1) = 0.5 * n.grad.row(i);
                  } else {
                    dx.row(2 * i) = n.grad.row(i);
                  }
                }
                g.accumulate(ix, dx);
              });
}

Tensor Graph::upsample_rows2(Tensor x, int64_t target) {
  if (x.value().rows() != (target + 1) / 2) {
    throw ModelError("graph upsample_rows2: input rows must be ceil(target/2)");
  }
  Mat y(target, x.value().cols());
  for (int64_t i = 0; i < target; ++i) y.row(i) = x.value().row(i / 2);
  const int32_t ix = x.idx;
  return make(std::move(y), node(ix).needs_grad,
              [ix](Graph& g, Node& n) {
                Mat dx = Mat::Zero(g.value_of(ix).rows(), n.grad.cols());
                for (int64_t i = 0; i < n.grad.rows(); ++i) dx.row(i / 2) += n.grad.row(i);
                g.accumulate(ix, dx);
              });
}

Tensor Graph::embed_rows(Tensor table, std::vector<int> ids) {
  const int64_t k = table.value().rows();
  Mat y(static_cast<int64_t>(ids.size()), table.value().cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= k) throw ModelError("graph embed_rows: id out of range");
    y.row(static_cast<int64_t>(i)) = table.value().row(ids[i]);
  }
  const int32_t it = table.idx;
  auto ids_copy = std::make_shared<std::vector<int>>(std::move(ids));
  return make(std::move(y), node(it).needs_grad,
              [it, ids_copy](Graph& g, Node& n) {
                Mat dt = Mat::Zero(g.value_of(it).rows(), g.value_of(it).cols());
                for (size_t i = 0; i < ids_copy->size(); ++i) {
                  dt.row((*ids_copy)[i]) += n.grad.row(static_cast<int64_t>(i));
                }
                g.accumulate(it, dt);
              });
}

Tensor Graph::gelu(Tensor a) {
  const int32_t ia = a.idx;
  const Mat& x = a.value();
  Mat y(x.rows(), x.cols());
  for (int64_t j = 0; j < x.cols(); ++j) {
    for (int64_t i = 0; i < x.rows(); ++i) {
      y(i, j) = 0.5 * x(i, j) * (1.0 + std::erf(x(i, j) * M_SQRT1_2));
    }
  }
  return make(std::move(y), node(ia).needs_grad,
              [ia](Graph& g, Node& n) {
                const Mat& x = g.value_of(ia);
                Mat d(x.rows(), x.cols());
                constexpr double kInvSqrt2Pi = 0.3989422804014327;
                for (int64_t j = 0; j < x.cols(); ++j) {
                  for (int64_t i = 0; i < x.rows(); ++i) {
                    const double cdf = 0.5 * (1.0 + std::erf(x(i, j) * M_SQRT1_2));
                    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x(i, j) * x(i, j));
                    d(i, j) = cdf + x(i, j) * pdf;
                  }
                }
                g.accumulate(ia, n.grad.cwiseProduct(d));
              });
}

Tensor Graph::tanh_op(Tensor a) {
  const int32_t ia = a.idx;
  Mat y = a.value().array().tanh();
  const int32_t self = static_cast<int32_t>(nodes_.size());
  return make(std::move(y), node(ia).needs_grad,
              [ia, self](Graph& g, Node& n) {
                const Mat& y = g.value_of(self);
                g.accumulate(ia, n.grad.cwiseProduct((1.0 - y.array().square()).matrix()));
              });
}

Tensor Graph::softmax_rows(Tensor a) {
  const int32_t ia = a.idx;
  Mat y = a.value();
  for (int64_t i = 0; i < y.rows(); ++i) {
    const double mx = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - mx).exp();
    y.row(i) /= y.row(i).sum();
  }
  const int32_t self = static_cast<int32_t>(nodes_.size());
  return make(std::move(y), node(ia).needs_grad,
              [ia, self](Graph& g, Node& n) {
                const Mat& y = g.value_of(self);
                Mat dx(y.rows(), y.cols());
                for (int64_t i = 0; i < y.rows(); ++i) {
                  const double dot = n.grad.row(i).dot(y.row(i));
                  dx.row(i) = y.row(i).array() * (n.grad.row(i).array() - dot);
                }
                g.accumulate(ia, dx);
              });
}

Tensor Graph::layer_norm(Tensor x, Tensor gain, Tensor bias) {
  constexpr double kEps = 1e-5;
  const Mat& v = x.value();
  const int64_t c = v.cols();
  if (gain.value().cols() != c || bias.value().cols() != c) {
    throw ModelError("graph layer_norm: gain/bias must be [1 x C]");
  }
  Mat xhat(v.rows(), c);
  Eigen::VectorXd inv_std(v.rows());
  for (int64_t i = 0; i < v.rows(); ++i) {
    const double mu = v.row(i).mean();
    const double var = (v.row(i).array() - mu).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + kEps);
    xhat.row(i) = (v.row(i).array() - mu) * inv_std(i);
  }
  Mat y = xhat;
  y.array().rowwise() *= gain.value().row(0).array();
  y.rowwise() += bias.value().row(0);

  const int32_t ix = x.idx, ig = gain.idx, ib = bias.idx;
  auto xhat_copy = std::make_shared<Mat>(std::move(xhat));
  auto inv_std_copy = std::make_shared<Eigen::VectorXd>(std::move(inv_std));
  return make(std::move(y),
              node(ix).needs_grad || node(ig).needs_grad || node(ib).needs_grad,
              [ix, ig, ib, xhat_copy, inv_std_copy](Graph& g, Node& n) {
                const Mat& xh = *xhat_copy;
                g.accumulate(ib, n.grad.colwise().sum());
                g.accumulate(ig, n.grad.cwiseProduct(xh).colwise().sum());
                if (g.node(ix).needs_grad) {
                  const int64_t c = xh.cols();
                  Mat dx(xh.rows(), c);
                  for (int64_t i = 0; i < xh.rows(); ++i) {
                    Eigen::RowVectorXd dxhat =
                        n.grad.row(i).cwiseProduct(g.value_of(ig).row(0));
                    const double m1 = dxhat.mean();
                    const double m2 = dxhat.cwiseProduct(xh.row(i)).mean();
                    dx.row(i) =
                        ((dxhat.array() - m1) - xh.row(i).array() * m2) * (*inv_std_copy)(i);
                  }
                  g.accumulate(ix, dx);
                }
              });
}

Tensor Graph::l2_normalize_row(Tensor row) {
  if (row.value().rows() != 1) throw ModelError("graph l2_normalize_row: input must be [1 x C]");
  constexpr double kEps = 1e-12;
  const double norm = std::sqrt(row.value().squaredNorm() + kEps);
  Mat y = row.value() / norm;
  const int32_t ir = row.idx;
  const int32_t self = static_cast<int32_t>(nodes_.size());
  return make(std::move(y), node(ir).needs_grad,
              [ir, self, norm](Graph& g, Node& n) {
                const Mat& y = g.value_of(self);
                const double dot = n.grad.cwiseProduct(y).sum();
                g.accumulate(ir, (n.grad - dot * y) / norm);
              });
}

Tensor Graph::sum(Tensor a) {
  const int32_t ia = a.idx;
  Mat y(1, 1);
  y(0, 0) = a.value().sum();
  return make(std::move(y), node(ia).needs_grad,
              [ia](Graph& g, Node& n) {
                g.accumulate(ia, Mat::Constant(g.value_of(ia).rows(), g.value_of(ia).cols(),
                                               n.grad(0, 0)));
              });
}

Tensor Graph::sum_sq(Tensor a) {
  const int32_t ia = a.idx;
  Mat y(1, 1);
  y(0, 0) = a.value().squaredNorm();
  return make(std::move(y), node(ia).needs_grad,
              [ia](Graph& g, Node& n) {
                g.accumulate(ia, 2.0 * n.grad(0, 0) * g.value_of(ia));
              });
}

Tensor Graph::mean_abs(Tensor a) {
  const int32_t ia = a.idx;
  const double numel = static_cast<double>(a.value().size());
  Mat y(1, 1);
  y(0, 0) = a.value().cwiseAbs().sum() / numel;
  return make(std::move(y), node(ia).needs_grad,
              [ia, numel](Graph& g, Node& n) {
                const Mat sign = g.value_of(ia).array().sign();
                g.accumulate(ia, (n.grad(0, 0) / numel) * sign);
              });
}

Tensor Graph::add_scalars(Tensor a, double ca, Tensor b, double cb) {
  if (a.value().size() != 1 || b.value().size() != 1) {
    throw ModelError("graph add_scalars: inputs must be [1 x 1]");
  }
  return add_scaled(a, ca, b, cb);
}

Tensor Graph::cross_entropy_logits(Tensor logits_row, int label) {
  const Mat& l = logits_row.value();
  if (l.rows() != 1) throw ModelError("graph cross_entropy_logits: logits must be [1 x S]");
  if (label < 0 || label >= l.cols()) throw ModelError("graph cross_entropy_logits: bad label");
  const double mx = l.row(0).maxCoeff();
  const double lse = mx + std::log((l.row(0).array() - mx).exp().sum());
  Mat y(1, 1);
  y(0, 0) = lse - l(0, label);
  const int32_t ia = logits_row.idx;
  return make(std::move(y), node(ia).needs_grad,
              [ia, label, lse](Graph& g, Node& n) {
                Mat p = (g.value_of(ia).row(0).array() - lse).exp();
                p(0, label) -= 1.0;
                g.accumulate(ia, n.grad(0, 0) * p);
              });
}

void Graph::backward(Tensor loss, double seed) {
  if (!loss.valid() || loss.graph != this) throw ModelError("graph backward: invalid loss tensor");
  Node& ln = node(loss.idx);
  if (ln.value.size() != 1) throw ModelError("graph backward: loss must be [1 x 1]");
  if (!ln.needs_grad) return;
  ln.grad = Mat::Constant(1, 1, seed);
  ln.has_grad = true;
  for (int32_t i = loss.idx; i >= 0; --i) {
    Node& n = node(i);
    if (!n.has_grad || !n.needs_grad || !n.back) continue;
    n.back(*this, n);
  }
}

}  // namespace revoice::nn
