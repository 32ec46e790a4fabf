// core/include/revoice/nn/graph.h
//
// Minimal reverse-mode autodiff on Eigen matrices. A Graph is a tape of
// nodes built by one forward pass; backward() sweeps it in reverse. Values
// are dense [rows x cols] matrices; for sequence models rows are time frames
// and columns are channels. Batching is a loop over items with gradient
// accumulation, which is plenty at the scales this project trains.
#ifndef REVOICE_NN_GRAPH_H_
#define REVOICE_NN_GRAPH_H_

#include <functional>
#include <vector>

#include "revoice/nn/param.h"

namespace revoice::nn {

class Graph;

// Lightweight handle into the tape.
struct Tensor {
  Graph* graph = nullptr;
  int32_t idx = -1;

  const Mat& value() const;
  int64_t rows() const { return value().rows(); }
  int64_t cols() const { return value().cols(); }
  bool valid() const { return graph != nullptr && idx >= 0; }
};

class Graph {
 public:
  Graph() { nodes_.reserve(1024); }

  // Leaves.
  Tensor constant(Mat v);
  Tensor param(Param& p);

  // Elementwise / broadcast arithmetic.
  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor scale(Tensor a, double c);
  Tensor add_scaled(Tensor a, double ca, Tensor b, double cb);  // ca*a + cb*b
  Tensor add_rowvec(Tensor a, Tensor row);  // [T x C] + [1 x C]

  // Linear algebra.
  Tensor matmul(Tensor a, Tensor b);     // A * B
  Tensor matmul_nt(Tensor a, Tensor b);  // A * B^T

  // Shape plumbing.
  Tensor concat_cols(Tensor a, Tensor b);
  Tensor slice_cols(Tensor a, int64_t begin, int64_t n);
  Tensor mean_rows(Tensor a);                    // [1 x C]
  Tensor broadcast_rows(Tensor row, int64_t t);  // tile [1 x C] to [T x C]

  // Sequence ops (rows = time).
  // Same-padded stride-1 convolution; weight is [k*Cin x Cout], bias [1 x Cout].
  // Patch layout: tap-major, i.e. column j*Cin + c holds x(t + j - k/2, c).
  Tensor conv1d(Tensor x, Tensor weight, Tensor bias, int kernel);
  Tensor avg_pool_rows2(Tensor x);                    // ceil(T/2) rows
  Tensor upsample_rows2(Tensor x, int64_t target);    // y[t] = x[t/2]
  Tensor embed_rows(Tensor table, std::vector<int> ids);

  // Nonlinearities and normalization.
  Tensor gelu(Tensor a);
  Tensor tanh_op(Tensor a);
  Tensor softmax_rows(Tensor a);
  Tensor layer_norm(Tensor x, Tensor gain, Tensor bias);  // per row
  Tensor l2_normalize_row(Tensor row);                    // [1 x C]

  // Scalar reductions ([1 x 1] results).
  Tensor sum(Tensor a);
  Tensor sum_sq(Tensor a);
  Tensor mean_abs(Tensor a);
  Tensor add_scalars(Tensor a, double ca, Tensor b, double cb);
  Tensor cross_entropy_logits(Tensor logits_row, int label);

  // Seeds d(loss)/d(loss) = seed and sweeps the tape in reverse, accumulating
  // into Param::grad at the leaves. loss must be [1 x 1].
  void backward(Tensor loss, double seed = 1.0);

  // Drop all nodes; parameters are untouched.
  void clear();
  size_t size() const { return nodes_.size(); }

  const Mat& value_of(int32_t idx) const { return nodes_[static_cast<size_t>(idx)].value; }

 private:
  friend struct Tensor;

  struct Node {
    Mat value;
    Mat grad;
    bool has_grad = false;
    bool needs_grad = false;
    std::function<void(Graph&, Node&)> back;
  };

  Tensor make(Mat value, bool needs_grad, std::function<void(Graph&, Node&)> back);
  Node& node(int32_t idx) { return nodes_[static_cast<size_t>(idx)]; }
  void accumulate(int32_t idx, const Mat& g);

  std::vector<Node> nodes_;
};

}  // namespace revoice::nn

#endif  // REVOICE_NN_GRAPH_H_
