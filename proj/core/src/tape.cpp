#include "intele/tape.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace intele {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.shape_str() << " vs " << b.shape_str();
    throw std::invalid_argument(os.str());
  }
}

Tape& same_tape(Var a, Var b, const char* op) {
  if (a.tape != b.tape || a.tape == nullptr) {
    throw std::logic_error(std::string(op) + ": operands on different tapes");
  }
  return *a.tape;
}

}  // namespace

double sigmoid_value(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    double e = std::exp(x);
    s = e / (1.0 + e);
  }
  // Keep the output strictly inside (0,1); exp underflow would otherwise
  // round to exactly 0 or 1 for |x| > ~37.
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;  // nextafter(1,0)
  const double lo = std::numeric_limits<double>::denorm_min();
  if (s >= 1.0) s = hi;
  if (s <= 0.0) s = lo;
  return s;
}

double bce_with_logits_value(double logit, double target) {
  // -[t*log(sigma(l)) + (1-t)*log(1-sigma(l))] in log-sum-exp form.
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

Var Tape::leaf(Tensor value) {
  return Var{this, add_node(std::move(value), BackFn{}, "leaf")};
}

int Tape::add_node(Tensor value, BackFn back, const char* op) {
  Node n;
  n.grad = Tensor::zeros_like(value);
  n.value = std::move(value);
  n.back = std::move(back);
  n.op = op;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::logic_error("backward: loss lives on another tape");
  if (consumed_) throw std::logic_error("backward: tape already consumed; build a fresh tape");
  if (nodes_[loss.node].value.numel() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                nodes_[loss.node].value.shape_str());
  }
  consumed_ = true;
  nodes_[loss.node].grad[0] = 1.0;
  for (int i = loss.node; i >= 0; --i) {
    if (nodes_[i].back) nodes_[i].back(*this, nodes_[i].grad);
  }
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.shape().size() != 2 || B.shape().size() != 2 || A.cols() != B.rows()) {
    std::ostringstream os;
    os << "matmul: inner dimensions disagree, " << A.shape_str() << " x " << B.shape_str();
    throw std::invalid_argument(os.str());
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) C[i * n + j] += aip * B[p * n + j];
    }
  }
  const int ia = a.node, ib = b.node;
  int out = t.add_node(std::move(C), [ia, ib, m, k, n](Tape& tp, const Tensor& G) {
    // dA = dC * B^T, dB = A^T * dC
    const Tensor& A2 = tp.node_value(ia);
    const Tensor& B2 = tp.node_value(ib);
    Tensor& dA = tp.grad_mut(ia);
    Tensor& dB = tp.grad_mut(ib);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double gij = G[i * n + j];
        for (std::size_t p = 0; p < k; ++p) {
          dA[i * k + p] += gij * B2[p * n + j];
          dB[p * n + j] += A2[i * k + p] * gij;
        }
      }
    }
  }, "matmul");
  return Var{&t, out};
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  require_same_shape(A, B, "add");
  Tensor C = A;
  for (std::size_t i = 0; i < C.numel(); ++i) C[i] += B[i];
  const int ia = a.node, ib = b.node;
  int out = t.add_node(std::move(C), [ia, ib](Tape& tp, const Tensor& G) {
    Tensor& dA = tp.grad_mut(ia);
    Tensor& dB = tp.grad_mut(ib);
    for (std::size_t i = 0; i < G.numel(); ++i) {
      dA[i] += G[i];
      dB[i] += G[i];
    }
  }, "add");
  return Var{&t, out};
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b, "sub");
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  require_same_shape(A, B, "sub");
  Tensor C = A;
  for (std::size_t i = 0; i < C.numel(); ++i) C[i] -= B[i];
  const int ia = a.node, ib = b.node;
  int out = t.add_node(std::move(C), [ia, ib](Tape& tp, const Tensor& G) {
    Tensor& dA = tp.grad_mut(ia);
    Tensor& dB = tp.grad_mut(ib);
    for (std::size_t i = 0; i < G.numel(); ++i) {
      dA[i] += G[i];
      dB[i] -= G[i];
    }
  }, "sub");
  return Var{&t, out};
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  require_same_shape(A, B, "mul");
  Tensor C = A;
  for (std::size_t i = 0; i < C.numel(); ++i) C[i] *= B[i];
  const int ia = a.node, ib = b.node;
  int out = t.add_node(std::move(C), [ia, ib](Tape& tp, const Tensor& G) {
    const Tensor& A2 = tp.node_value(ia);
    const Tensor& B2 = tp.node_value(ib);
    Tensor& dA = tp.grad_mut(ia);
    Tensor& dB = tp.grad_mut(ib);
    for (std::size_t i = 0; i < G.numel(); ++i) {
      dA[i] += G[i] * B2[i];
      dB[i] += G[i] * A2[i];
    }
  }, "mul");
  return Var{&t, out};
}

Var scale(Var a, double c) {
  Tape& t = *a.tape;
  Tensor C = t.value(a);
  for (std::size_t i = 0; i < C.numel(); ++i) C[i] *= c;
  const int ia = a.node;
  int out = t.add_node(std::move(C), [ia, c](Tape& tp, const Tensor& G) {
    Tensor& dA = tp.grad_mut(ia);
    for (std::size_t i = 0; i < G.numel(); ++i) dA[i] += c * G[i];
  }, "scale");
  return Var{&t, out};
}

Var add_rowvec(Var a, Var b) {
  Tape& t = same_tape(a, b, "add_rowvec");
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  if (A.shape().size() != 2 || B.shape().size() != 2 || B.rows() != 1 || B.cols() != A.cols()) {
    std::ostringstream os;
    os << "add_rowvec: expected [m x n] + [1 x n], got " << A.shape_str() << " + " << B.shape_str();
    throw std::invalid_argument(os.str());
  }
  const std::size_t m = A.rows(), n = A.cols();
  Tensor C = A;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) C[i * n + j] += B[j];
  }
  const int ia = a.node, ib = b.node;
  int out = t.add_node(std::move(C), [ia, ib, m, n](Tape& tp, const Tensor& G) {
    Tensor& dA = tp.grad_mut(ia);
    Tensor& dB = tp.grad_mut(ib);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        dA[i * n + j] += G[i * n + j];
        dB[j] += G[i * n + j];
      }
    }
  }, "add_rowvec");
  return Var{&t, out};
}

Var scale_rows(Var a, const std::vector<double>& w) {
  Tape& t = *a.tape;
  const Tensor& A = t.value(a);
  if (A.shape().size() != 2 || A.rows() != w.size()) {
    throw std::invalid_argument("scale_rows: weight count " + std::to_string(w.size()) +
                                " does not match " + A.shape_str());
  }
  const std::size_t m = A.rows(), n = A.cols();
  Tensor C = A;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) C[i * n + j] *= w[i];
  }
  const int ia = a.node;
  int out = t.add_node(std::move(C), [ia, w, m, n](Tape& tp, const Tensor& G) {
    Tensor& dA = tp.grad_mut(ia);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) dA[i * n + j] += w[i] * G[i * n + j];
    }
  }, "scale_rows");
  return Var{&t, out};
}

Var sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& A = t.value(a);
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) s += A[i];
  const int ia = a.node;
  int out = t.add_node(Tensor::scalar(s), [ia](Tape& tp, const Tensor& G) {
    Tensor& dA = tp.grad_mut(ia);
    const double g = G[0];
    for (std::size_t i = 0; i < dA.numel(); ++i) dA[i] += g;
  }, "sum");
  return Var{&t, out};
}

Var leaky_relu(Var x, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw std::invalid_argument("leaky_relu: slope must lie in (0,1)");
  }
  Tape& t = *x.tape;
  Tensor C = t.value(x);
  for (std::size_t i = 0; i < C.numel(); ++i) {
    if (C[i] < 0.0) C[i] *= slope;
  }
  const int ix = x.node;
  int out = t.add_node(std::move(C), [ix, slope](Tape& tp, const Tensor& G) {
    const Tensor& X = tp.node_value(ix);
    Tensor& dX = tp.grad_mut(ix);
    for (std::size_t i = 0; i < G.numel(); ++i) {
      dX[i] += G[i] * (X[i] >= 0.0 ? 1.0 : slope);
    }
  }, "leaky_relu");
  return Var{&t, out};
}

Var sigmoid(Var x) {
  Tape& t = *x.tape;
  Tensor C = t.value(x);
  for (std::size_t i = 0; i < C.numel(); ++i) C[i] = sigmoid_value(C[i]);
  const int ix = x.node;
  int out = t.add_node(std::move(C), [ix](Tape& tp, const Tensor& G) {
    Tensor& dX = tp.grad_mut(ix);
    const Tensor& X = tp.node_value(ix);
    for (std::size_t i = 0; i < G.numel(); ++i) {
      const double s = sigmoid_value(X[i]);
      dX[i] += G[i] * s * (1.0 - s);
    }
  }, "sigmoid");
  return Var{&t, out};
}

Var tanh(Var x) {
  Tape& t = *x.tape;
  Tensor C = t.value(x);
  for (std::size_t i = 0; i < C.numel(); ++i) C[i] = std::tanh(C[i]);
  const int ix = x.node;
  int out = t.add_node(std::move(C), [ix](Tape& tp, const Tensor& G) {
    Tensor& dX = tp.grad_mut(ix);
    const Tensor& X = tp.node_value(ix);
    for (std::size_t i = 0; i < G.numel(); ++i) {
      const double th = std::tanh(X[i]);
      dX[i] += G[i] * (1.0 - th * th);
    }
  }, "tanh");
  return Var{&t, out};
}

Var sq_error(Var x, Var x_hat) {
  Tape& t = same_tape(x, x_hat, "sq_error");
  const Tensor& A = t.value(x);
  const Tensor& B = t.value(x_hat);
  require_same_shape(A, B, "sq_error");
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) {
    const double d = A[i] - B[i];
    s += d * d;
  }
  const int ia = x.node, ib = x_hat.node;
  int out = t.add_node(Tensor::scalar(s), [ia, ib](Tape& tp, const Tensor& G) {
    const Tensor& A2 = tp.node_value(ia);
    const Tensor& B2 = tp.node_value(ib);
    Tensor& dA = tp.grad_mut(ia);
    Tensor& dB = tp.grad_mut(ib);
    const double g = G[0];
    for (std::size_t i = 0; i < A2.numel(); ++i) {
      const double d = 2.0 * (A2[i] - B2[i]) * g;
      dA[i] += d;
      dB[i] -= d;
    }
  }, "sq_error");
  return Var{&t, out};
}

Var bce_with_logits(Var logits, const Tensor& targets) {
  Tape& t = *logits.tape;
  const Tensor& L = t.value(logits);
  require_same_shape(L, targets, "bce_with_logits");
  for (std::size_t i = 0; i < targets.numel(); ++i) {
    if (targets[i] != 0.0 && targets[i] != 1.0) {
      throw std::invalid_argument("bce_with_logits: targets must be 0 or 1");
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < L.numel(); ++i) s += bce_with_logits_value(L[i], targets[i]);
  const int il = logits.node;
  int out = t.add_node(Tensor::scalar(s), [il, targets](Tape& tp, const Tensor& G) {
    const Tensor& L2 = tp.node_value(il);
    Tensor& dL = tp.grad_mut(il);
    const double g = G[0];
    for (std::size_t i = 0; i < L2.numel(); ++i) {
      dL[i] += g * (sigmoid_value(L2[i]) - targets[i]);
    }
  }, "bce_with_logits");
  return Var{&t, out};
}

}  // namespace intele
