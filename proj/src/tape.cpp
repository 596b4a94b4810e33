#include "polywsd/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "polywsd/errors.hpp"

namespace polywsd {

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.shape().rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got shape " + t.shape().str());
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

// c[i,j] = sum_p a[i,p] * b[p,j], accumulated in increasing p from 0.0.
void gemm(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
          std::size_t k, std::size_t n) {
  std::fill(c.begin(), c.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;

}  // namespace

Var Tape::leaf(const Tensor& param) {
  if (auto it = referenced_.find(&param); it != referenced_.end()) return Var{it->second};
  Node n;
  n.ref = &param;
  n.param = &param;
  n.needs_grad = param.requires_grad();
  nodes_.push_back(std::move(n));
  referenced_.emplace(&param, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

Var Tape::input(const Tensor& value) {
  if (auto it = referenced_.find(&value); it != referenced_.end()) return Var{it->second};
  Node n;
  n.ref = &value;
  nodes_.push_back(std::move(n));
  referenced_.emplace(&value, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  n.needs_grad = std::any_of(inputs.begin(), inputs.end(), [this](Var v) { return node(v).needs_grad; });
  n.inputs = std::move(inputs);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) {
    throw ContractError("Var " + std::to_string(v.id) + " does not belong to this tape");
  }
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.ref ? *n.ref : n.owned;
}

std::span<const double> Tape::grad(Var v) const { return node(v).grad; }

std::span<double> Tape::grad_slot(Var v) {
  node(v);
  return nodes_[v.id].grad;
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + value(loss).shape().str());
  }
  for (Node& n : nodes_) {
    n.grad.assign(n.needs_grad ? (n.ref ? n.ref->size() : n.owned.size()) : 0, 0.0);
  }
  if (!nodes_[loss.id].needs_grad) return;
  nodes_[loss.id].grad[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    if (n.backward) {
      n.backward(*this, Var{i});
    } else if (n.param != nullptr) {
      auto sink = n.param->mutable_grad();
      for (std::size_t j = 0; j < sink.size(); ++j) sink[j] += n.grad[j];
    }
  }
}

// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + a.shape().str() + " x " + b.shape().str());
  }
  Tensor c(Shape{a.rows(), b.cols()});
  gemm(a.data(), b.data(), c.mutable_data(), a.rows(), a.cols(), b.cols());
  return c;
}

Var matmul(Tape& tape, Var a, Var b) {
  Tensor out = matmul(tape.value(a), tape.value(b));
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, Var self) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    auto g = t.out_grad(self);
    if (t.needs_grad(a)) {
      auto ga = t.grad_slot(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double gij = g[i * n + j];
          for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += gij * bv[p * n + j];
        }
    }
    if (t.needs_grad(b)) {
      auto gb = t.grad_slot(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
        }
    }
  });
}

Var transpose(Tape& tape, Var a) {
  const Tensor& av = tape.value(a);
  require_matrix(av, "transpose");
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(Shape{c, r});
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) o[j * r + i] = av[i * c + j];
  return tape.record(std::move(out), {a}, [a, r, c](Tape& t, Var self) {
    auto g = t.out_grad(self);
    auto ga = t.grad_slot(a);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_shape(av, bv, "add");
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return tape.record(Tensor(av.shape(), std::move(out)), {a, b}, [a, b](Tape& t, Var self) {
    auto g = t.out_grad(self);
    for (Var in : {a, b}) {
      if (!t.needs_grad(in)) continue;
      auto gi = t.grad_slot(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var mul(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_shape(av, bv, "mul");
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return tape.record(Tensor(av.shape(), std::move(out)), {a, b}, [a, b](Tape& t, Var self) {
    auto g = t.out_grad(self);
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (t.needs_grad(a)) {
      auto ga = t.grad_slot(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.needs_grad(b)) {
      auto gb = t.grad_slot(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Tape& tape, Var a, double factor) {
  const Tensor& av = tape.value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  return tape.record(Tensor(av.shape(), std::move(out)), {a}, [a, factor](Tape& t, Var self) {
    auto g = t.out_grad(self);
    auto ga = t.grad_slot(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
  });
}

Var add_row(Tape& tape, Var m, Var v) {
  const Tensor& mv = tape.value(m);
  const Tensor& vv = tape.value(v);
  require_matrix(mv, "add_row");
  if (vv.shape().rank() != 1 || vv.size() != mv.cols()) {
    throw DimensionError("add_row: cannot broadcast " + vv.shape().str() + " over " + mv.shape().str());
  }
  const std::size_t r = mv.rows(), c = mv.cols();
  std::vector<double> out(mv.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = mv[i * c + j] + vv[j];
  return tape.record(Tensor(mv.shape(), std::move(out)), {m, v}, [m, v, r, c](Tape& t, Var self) {
    auto g = t.out_grad(self);
    if (t.needs_grad(m)) {
      auto gm = t.grad_slot(m);
      for (std::size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
    }
    if (t.needs_grad(v)) {
      auto gv = t.grad_slot(v);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gv[j] += g[i * c + j];
    }
  });
}

Tensor softmax_rows(const Tensor& m, const std::vector<bool>& excluded) {
  require_matrix(m, "row_softmax");
  const std::size_t r = m.rows(), c = m.cols();
  if (!excluded.empty() && excluded.size() != r * c) {
    throw DimensionError("row_softmax: mask length " + std::to_string(excluded.size()) +
                         " does not match " + m.shape().str());
  }
  auto skip = [&](std::size_t i, std::size_t j) { return !excluded.empty() && excluded[i * c + j]; };
  Tensor out(m.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    std::size_t live = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (skip(i, j)) continue;
      ++live;
      mx = std::isnan(m[i * c + j]) ? m[i * c + j] : std::max(mx, m[i * c + j]);
      if (std::isnan(mx)) break;
    }
    if (live == 0) throw ContractError("row_softmax: row " + std::to_string(i) + " is fully masked");
    if (!std::isfinite(mx)) {
      // Non-finite input propagates as NaN so callers can detect it.
      for (std::size_t j = 0; j < c; ++j) o[i * c + j] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      o[i * c + j] = skip(i, j) ? 0.0 : std::exp(m[i * c + j] - mx);
      z += o[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) o[i * c + j] /= z;
  }
  return out;
}

Var row_softmax(Tape& tape, Var m) {
  Tensor out = softmax_rows(tape.value(m));
  const std::size_t r = out.rows(), c = out.cols();
  return tape.record(std::move(out), {m}, [m, r, c](Tape& t, Var self) {
    const Tensor& p = t.value(self);
    auto g = t.out_grad(self);
    auto gm = t.grad_slot(m);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * p[i * c + j];
      for (std::size_t j = 0; j < c; ++j) gm[i * c + j] += p[i * c + j] * (g[i * c + j] - dot);
    }
  });
}

Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps) {
  const Tensor& xv = tape.value(x);
  const Tensor& gv = tape.value(gain);
  const Tensor& bv = tape.value(bias);
  require_matrix(xv, "layer_norm");
  const std::size_t r = xv.rows(), c = xv.cols();
  if (gv.size() != c || bv.size() != c) {
    throw DimensionError("layer_norm: gain/bias " + gv.shape().str() + "/" + bv.shape().str() +
                         " do not match " + xv.shape().str());
  }
  std::vector<double> xhat(xv.size()), rstd(r), out(xv.size());
  for (std::size_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += xv[i * c + j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = xv[i * c + j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(c);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (xv[i * c + j] - mu) * rstd[i];
      out[i * c + j] = gv[j] * xhat[i * c + j] + bv[j];
    }
  }
  return tape.record(
      Tensor(xv.shape(), std::move(out)), {x, gain, bias},
      [x, gain, bias, r, c, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t, Var self) {
        auto g = t.out_grad(self);
        const Tensor& gv = t.value(gain);
        if (t.needs_grad(gain)) {
          auto gg = t.grad_slot(gain);
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) gg[j] += g[i * c + j] * xhat[i * c + j];
        }
        if (t.needs_grad(bias)) {
          auto gb = t.grad_slot(bias);
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
        }
        if (t.needs_grad(x)) {
          auto gx = t.grad_slot(x);
          const double n = static_cast<double>(c);
          for (std::size_t i = 0; i < r; ++i) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
              const double dxh = g[i * c + j] * gv[j];
              s1 += dxh;
              s2 += dxh * xhat[i * c + j];
            }
            for (std::size_t j = 0; j < c; ++j) {
              const double dxh = g[i * c + j] * gv[j];
              gx[i * c + j] += rstd[i] / n * (n * dxh - s1 - xhat[i * c + j] * s2);
            }
          }
        }
      });
}

Var gelu(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = xv[i];
    out[i] = 0.5 * v * (1.0 + std::tanh(kGeluScale * (v + kGeluCubic * v * v * v)));
  }
  return tape.record(Tensor(xv.shape(), std::move(out)), {x}, [x](Tape& t, Var self) {
    const Tensor& xv = t.value(x);
    auto g = t.out_grad(self);
    auto gx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double th = std::tanh(kGeluScale * (v + kGeluCubic * v * v * v));
      const double dinner = kGeluScale * (1.0 + 3.0 * kGeluCubic * v * v);
      gx[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dinner);
    }
  });
}

Var gather_rows(Tape& tape, Var table, std::span<const std::size_t> ids) {
  const Tensor& tv = tape.value(table);
  require_matrix(tv, "gather_rows");
  const std::size_t c = tv.cols();
  std::vector<std::size_t> idx(ids.begin(), ids.end());
  if (idx.empty()) throw DimensionError("gather_rows: empty id list");
  std::vector<double> out(idx.size() * c);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= tv.rows()) {
      throw IndexError("gather_rows: id " + std::to_string(idx[i]) + " >= table rows " +
                       std::to_string(tv.rows()));
    }
    std::copy_n(tv.data().begin() + static_cast<std::ptrdiff_t>(idx[i] * c), c, out.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  const std::size_t n = idx.size();
  return tape.record(Tensor(Shape{n, c}, std::move(out)), {table},
                     [table, c, idx = std::move(idx)](Tape& t, Var self) {
                       auto g = t.out_grad(self);
                       auto gt = t.grad_slot(table);
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t j = 0; j < c; ++j) gt[idx[i] * c + j] += g[i * c + j];
                     });
}

Var slice_rows(Tape& tape, Var m, std::size_t start, std::size_t count) {
  const Tensor& mv = tape.value(m);
  require_matrix(mv, "slice_rows");
  if (count == 0 || start + count > mv.rows()) {
    throw IndexError("slice_rows: rows [" + std::to_string(start) + "," + std::to_string(start + count) +
                     ") outside " + mv.shape().str());
  }
  const std::size_t c = mv.cols();
  auto first = mv.data().begin() + static_cast<std::ptrdiff_t>(start * c);
  std::vector<double> out(first, first + static_cast<std::ptrdiff_t>(count * c));
  return tape.record(Tensor(Shape{count, c}, std::move(out)), {m}, [m, start, c](Tape& t, Var self) {
    auto g = t.out_grad(self);
    auto gm = t.grad_slot(m);
    for (std::size_t i = 0; i < g.size(); ++i) gm[start * c + i] += g[i];
  });
}

Var row(Tape& tape, Var m, std::size_t i) {
  const Tensor& mv = tape.value(m);
  require_matrix(mv, "row");
  if (i >= mv.rows()) {
    throw IndexError("row: index " + std::to_string(i) + " outside " + mv.shape().str());
  }
  const std::size_t c = mv.cols();
  auto first = mv.data().begin() + static_cast<std::ptrdiff_t>(i * c);
  std::vector<double> out(first, first + static_cast<std::ptrdiff_t>(c));
  return tape.record(Tensor(Shape{c}, std::move(out)), {m}, [m, i, c](Tape& t, Var self) {
    auto g = t.out_grad(self);
    auto gm = t.grad_slot(m);
    for (std::size_t j = 0; j < c; ++j) gm[i * c + j] += g[j];
  });
}

Var replicate_rows(Tape& tape, Var v, std::size_t n) {
  const Tensor& vv = tape.value(v);
  if (vv.shape().rank() != 1) throw DimensionError("replicate_rows: expected a vector, got " + vv.shape().str());
  if (n == 0) throw DimensionError("replicate_rows: zero copies");
  const std::size_t c = vv.size();
  std::vector<double> out;
  out.reserve(n * c);
  for (std::size_t i = 0; i < n; ++i) out.insert(out.end(), vv.data().begin(), vv.data().end());
  return tape.record(Tensor(Shape{n, c}, std::move(out)), {v}, [v, n, c](Tape& t, Var self) {
    auto g = t.out_grad(self);
    auto gv = t.grad_slot(v);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) gv[j] += g[i * c + j];
  });
}

Var concat_cols(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t r = tape.value(parts[0]).rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    const Tensor& pv = tape.value(p);
    require_matrix(pv, "concat_cols");
    if (pv.rows() != r) {
      throw DimensionError("concat_cols: row mismatch " + tape.value(parts[0]).shape().str() + " vs " +
                           pv.shape().str());
    }
    widths.push_back(pv.cols());
    total += pv.cols();
  }
  std::vector<double> out(r * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = tape.value(parts[k]);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) out[i * total + offset + j] = pv[i * widths[k] + j];
    offset += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.record(Tensor(Shape{r, total}, std::move(out)), inputs,
                     [inputs, widths = std::move(widths), r, total](Tape& t, Var self) {
                       auto g = t.out_grad(self);
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < inputs.size(); ++k) {
                         if (t.needs_grad(inputs[k])) {
                           auto gp = t.grad_slot(inputs[k]);
                           for (std::size_t i = 0; i < r; ++i)
                             for (std::size_t j = 0; j < widths[k]; ++j)
                               gp[i * widths[k] + j] += g[i * total + offset + j];
                         }
                         offset += widths[k];
                       }
                     });
}

Var concat_rows(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t c = tape.value(parts[0]).cols();
  std::vector<double> out;
  std::size_t rows = 0;
  for (Var p : parts) {
    const Tensor& pv = tape.value(p);
    require_matrix(pv, "concat_rows");
    if (pv.cols() != c) {
      throw DimensionError("concat_rows: column mismatch " + tape.value(parts[0]).shape().str() + " vs " +
                           pv.shape().str());
    }
    out.insert(out.end(), pv.data().begin(), pv.data().end());
    rows += pv.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.record(Tensor(Shape{rows, c}, std::move(out)), inputs, [inputs](Tape& t, Var self) {
    auto g = t.out_grad(self);
    std::size_t offset = 0;
    for (Var in : inputs) {
      const std::size_t n = t.value(in).size();
      if (t.needs_grad(in)) {
        auto gi = t.grad_slot(in);
        for (std::size_t i = 0; i < n; ++i) gi[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

Var reshape(Tape& tape, Var a, Shape shape) {
  const Tensor& av = tape.value(a);
  if (shape.numel() != av.size()) {
    throw DimensionError("reshape: cannot view " + av.shape().str() + " as " + shape.str());
  }
  std::vector<double> out(av.data().begin(), av.data().end());
  return tape.record(Tensor(std::move(shape), std::move(out)), {a}, [a](Tape& t, Var self) {
    auto g = t.out_grad(self);
    auto ga = t.grad_slot(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var sum(Tape& tape, Var a) {
  const Tensor& av = tape.value(a);
  double s = 0.0;
  for (double v : av.data()) s += v;
  return tape.record(Tensor::scalar(s), {a}, [a](Tape& t, Var self) {
    const double g = t.out_grad(self)[0];
    auto ga = t.grad_slot(a);
    for (double& v : ga) v += g;
  });
}

Var mean(Tape& tape, Var a) {
  const double n = static_cast<double>(tape.value(a).size());
  return scale(tape, sum(tape, a), 1.0 / n);
}

Var cross_entropy_rows(Tape& tape, Var logits, std::span<const std::size_t> targets,
                       const std::vector<bool>& excluded) {
  const Tensor& lv = tape.value(logits);
  require_matrix(lv, "cross_entropy_rows");
  const std::size_t r = lv.rows(), c = lv.cols();
  if (targets.size() != r) {
    throw DimensionError("cross_entropy_rows: " + std::to_string(targets.size()) + " targets for " +
                         lv.shape().str());
  }
  if (!excluded.empty() && excluded.size() != r * c) {
    throw DimensionError("cross_entropy_rows: mask length " + std::to_string(excluded.size()) +
                         " does not match " + lv.shape().str());
  }
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  for (std::size_t i = 0; i < r; ++i) {
    if (tgt[i] >= c) throw IndexError("cross_entropy_rows: target " + std::to_string(tgt[i]) + " out of range");
    if (!excluded.empty() && excluded[i * c + tgt[i]]) {
      throw ContractError("cross_entropy_rows: target entry of row " + std::to_string(i) + " is masked");
    }
  }
  // softmax_rows does max-subtraction; log-probabilities come from the
  // shifted logits directly so no log(0) appears.
  Tensor probs = softmax_rows(lv, excluded);
  std::vector<double> out(r);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j)
      if (excluded.empty() || !excluded[i * c + j]) mx = std::max(mx, lv[i * c + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j)
      if (excluded.empty() || !excluded[i * c + j]) z += std::exp(lv[i * c + j] - mx);
    out[i] = std::log(z) - (lv[i * c + tgt[i]] - mx);
  }
  return tape.record(Tensor(Shape{r}, std::move(out)), {logits},
                     [logits, r, c, tgt = std::move(tgt), probs = std::move(probs)](Tape& t, Var self) {
                       auto g = t.out_grad(self);
                       auto gl = t.grad_slot(logits);
                       for (std::size_t i = 0; i < r; ++i)
                         for (std::size_t j = 0; j < c; ++j) {
                           const double onehot = (j == tgt[i]) ? 1.0 : 0.0;
                           gl[i * c + j] += g[i] * (probs[i * c + j] - onehot);
                         }
                     });
}

}  // namespace polywsd
