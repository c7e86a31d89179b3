#include "fvl/diff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fvl/common/error.hpp"

namespace fvl::diff {

namespace {

Tape& tape_of(const DiffArray& a) {
  if (!a.valid()) throw ContractError("operation on an unbound array");
  return *a.tape();
}

Tape& common_tape(const DiffArray& a, const DiffArray& b) {
  Tape& tape = tape_of(a);
  tape.check_owner(b);
  return tape;
}

std::string shape_pair(const char* op, Shape a, Shape b) {
  return std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b);
}

// Result shape of a binary op under exact or scalar broadcasting.
Shape broadcast_shape(const char* op, Shape a, Shape b) {
  if (a == b) return a;
  if (a.is_scalar()) return b;
  if (b.is_scalar()) return a;
  throw DimensionError(shape_pair(op, a, b));
}

// Adds `grad` into the adjoint of `target`, summing when target was broadcast.
void accumulate(Tape& tape, std::size_t target, std::span<const double> grad) {
  auto adj = tape.adjoints(target);
  if (adj.size() == grad.size()) {
    for (std::size_t i = 0; i < grad.size(); ++i) adj[i] += grad[i];
  } else {
    adj[0] += std::accumulate(grad.begin(), grad.end(), 0.0);
  }
}

template <typename Fn>
std::vector<double> zip(std::span<const double> a, std::span<const double> b, std::size_t n, Fn fn) {
  std::vector<double> out(n);
  const bool sa = a.size() == 1 && n != 1;
  const bool sb = b.size() == 1 && n != 1;
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(sa ? a[0] : a[i], sb ? b[0] : b[i]);
  return out;
}

}  // namespace

DiffArray matmul(DiffArray a, DiffArray b) {
  Tape& tape = common_tape(a, b);
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  if (sa.cols != sb.rows) throw DimensionError(shape_pair("matmul", sa, sb));
  const std::size_t m = sa.rows, k = sa.cols, n = sb.cols;
  std::vector<double> out(m * n, 0.0);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record({m, n}, std::move(out), {a, b}, [ia, ib, m, k, n](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    const auto av = t.values(ia);
    const auto bv = t.values(ib);
    if (t.requires_grad(ia)) {
      auto ga = t.adjoints(ia);
      // ga += g . b^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (t.requires_grad(ib)) {
      auto gb = t.adjoints(ib);
      // gb += a^T . g
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
        }
    }
  });
}

DiffArray linear(DiffArray x, DiffArray weight, DiffArray bias) {
  Tape& tape = common_tape(x, weight);
  tape.check_owner(bias);
  const Shape sx = x.shape();
  const Shape sw = weight.shape();
  const Shape sbias = bias.shape();
  if (sx.cols != sw.cols) throw DimensionError(shape_pair("linear", sx, sw));
  if (sbias.rows != 1 || sbias.cols != sw.rows) throw DimensionError(shape_pair("linear bias", sw, sbias));
  const std::size_t batch = sx.rows, in = sx.cols, out_dim = sw.rows;
  std::vector<double> out(batch * out_dim);
  const auto xv = x.values();
  const auto wv = weight.values();
  const auto bv = bias.values();
  // Accumulating along a transposed copy keeps the inner loop contiguous in
  // the output index, so it vectorizes without reordering any sum.
  std::vector<double> wt(in * out_dim);
  for (std::size_t o = 0; o < out_dim; ++o)
    for (std::size_t i = 0; i < in; ++i) wt[i * out_dim + o] = wv[o * in + i];
  for (std::size_t r = 0; r < batch; ++r) {
    const double* xr = xv.data() + r * in;
    double* yr = out.data() + r * out_dim;
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      const double* wi = wt.data() + i * out_dim;
      for (std::size_t o = 0; o < out_dim; ++o) yr[o] += xi * wi[o];
    }
    for (std::size_t o = 0; o < out_dim; ++o) yr[o] += bv[o];
  }
  const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
  return tape.record({batch, out_dim}, std::move(out), {x, weight, bias},
                     [ix, iw, ib, batch, in, out_dim](Tape& t, std::size_t self) {
                       const auto g = t.adjoints(self);
                       const auto xv = t.values(ix);
                       const auto wv = t.values(iw);
                       const bool gx_on = t.requires_grad(ix);
                       const bool gw_on = t.requires_grad(iw);
                       auto gx = t.adjoints(ix);
                       auto gw = t.adjoints(iw);
                       for (std::size_t r = 0; r < batch; ++r) {
                         const double* xr = xv.data() + r * in;
                         double* gxr = gx.data() + r * in;
                         for (std::size_t o = 0; o < out_dim; ++o) {
                           const double go = g[r * out_dim + o];
                           if (go == 0.0) continue;
                           if (gx_on) {
                             const double* wo = wv.data() + o * in;
                             for (std::size_t i = 0; i < in; ++i) gxr[i] += go * wo[i];
                           }
                           if (gw_on) {
                             double* gwo = gw.data() + o * in;
                             for (std::size_t i = 0; i < in; ++i) gwo[i] += go * xr[i];
                           }
                         }
                       }
                       if (t.requires_grad(ib)) {
                         auto gb = t.adjoints(ib);
                         for (std::size_t r = 0; r < batch; ++r)
                           for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[r * out_dim + o];
                       }
                     });
}

DiffArray add(DiffArray a, DiffArray b) {
  Tape& tape = common_tape(a, b);
  const Shape s = broadcast_shape("add", a.shape(), b.shape());
  auto out = zip(a.values(), b.values(), s.size(), [](double x, double y) { return x + y; });
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(s, std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    if (t.requires_grad(ia)) accumulate(t, ia, g);
    if (t.requires_grad(ib)) accumulate(t, ib, g);
  });
}

DiffArray sub(DiffArray a, DiffArray b) {
  Tape& tape = common_tape(a, b);
  const Shape s = broadcast_shape("sub", a.shape(), b.shape());
  auto out = zip(a.values(), b.values(), s.size(), [](double x, double y) { return x - y; });
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(s, std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    if (t.requires_grad(ia)) accumulate(t, ia, g);
    if (t.requires_grad(ib)) {
      std::vector<double> neg(g.begin(), g.end());
      for (double& v : neg) v = -v;
      accumulate(t, ib, neg);
    }
  });
}

DiffArray mul(DiffArray a, DiffArray b) {
  Tape& tape = common_tape(a, b);
  const Shape s = broadcast_shape("mul", a.shape(), b.shape());
  auto out = zip(a.values(), b.values(), s.size(), [](double x, double y) { return x * y; });
  const std::size_t ia = a.id(), ib = b.id();
  const std::size_t n = s.size();
  return tape.record(s, std::move(out), {a, b}, [ia, ib, n](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    const auto av = t.values(ia);
    const auto bv = t.values(ib);
    if (t.requires_grad(ia)) {
      accumulate(t, ia, zip(g, bv, n, [](double gi, double y) { return gi * y; }));
    }
    if (t.requires_grad(ib)) {
      accumulate(t, ib, zip(g, av, n, [](double gi, double x) { return gi * x; }));
    }
  });
}

DiffArray scale(DiffArray a, double factor) {
  Tape& tape = tape_of(a);
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= factor;
  const std::size_t ia = a.id();
  return tape.record(a.shape(), std::move(out), {a}, [ia, factor](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    auto ga = t.adjoints(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

DiffArray average(DiffArray a, DiffArray b) { return scale(add(a, b), 0.5); }

DiffArray sigmoid(DiffArray a) {
  Tape& tape = tape_of(a);
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  const std::size_t ia = a.id();
  return tape.record(a.shape(), std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    const auto s = t.values(self);
    auto ga = t.adjoints(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s[i] * (1.0 - s[i]);
  });
}

DiffArray tanh(DiffArray a) {
  Tape& tape = tape_of(a);
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::tanh(av[i]);
  const std::size_t ia = a.id();
  return tape.record(a.shape(), std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    const auto y = t.values(self);
    auto ga = t.adjoints(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

DiffArray relu(DiffArray a) {
  Tape& tape = tape_of(a);
  const auto av = a.values();
  tape.record_kinks(av);
  std::vector<double> out(av.size());
  // NaN passes through so a non-finite input still reaches the loss.
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] > 0.0 || std::isnan(av[i]) ? av[i] : 0.0;
  const std::size_t ia = a.id();
  return tape.record(a.shape(), std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    const auto x = t.values(ia);
    auto ga = t.adjoints(ia);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] > 0.0) ga[i] += g[i];
  });
}

DiffArray concat_cols(DiffArray a, DiffArray b) {
  Tape& tape = common_tape(a, b);
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  if (sa.rows != sb.rows) throw DimensionError(shape_pair("concat_cols", sa, sb));
  const std::size_t rows = sa.rows, p = sa.cols, q = sb.cols, w = p + q;
  std::vector<double> out(rows * w);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data() + r * p, p, out.data() + r * w);
    std::copy_n(bv.data() + r * q, q, out.data() + r * w + p);
  }
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record({rows, w}, std::move(out), {a, b}, [ia, ib, rows, p, q, w](Tape& t, std::size_t self) {
    const auto g = t.adjoints(self);
    if (t.requires_grad(ia)) {
      auto ga = t.adjoints(ia);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < p; ++c) ga[r * p + c] += g[r * w + c];
    }
    if (t.requires_grad(ib)) {
      auto gb = t.adjoints(ib);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < q; ++c) gb[r * q + c] += g[r * w + p + c];
    }
  });
}

DiffArray sum(DiffArray a) {
  Tape& tape = tape_of(a);
  const auto av = a.values();
  std::vector<double> out{std::accumulate(av.begin(), av.end(), 0.0)};
  const std::size_t ia = a.id();
  return tape.record({1, 1}, std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const double g = t.adjoints(self)[0];
    for (double& v : t.adjoints(ia)) v += g;
  });
}

DiffArray mean(DiffArray a) {
  const std::size_t n = a.shape().size();
  if (n == 0) throw DimensionError("mean of an empty array");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

DiffArray sum_squared_error(DiffArray pred, const Matrix& target) {
  Tape& tape = tape_of(pred);
  if (pred.shape() != target.shape) {
    throw DimensionError(shape_pair("sum_squared_error", pred.shape(), target.shape));
  }
  const auto pv = pred.values();
  double total = 0.0;
  std::vector<double> diff(pv.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    diff[i] = pv[i] - target.data[i];
    total += diff[i] * diff[i];
  }
  const std::size_t ip = pred.id();
  return tape.record({1, 1}, {total}, {pred}, [ip, diff = std::move(diff)](Tape& t, std::size_t self) {
    const double g = t.adjoints(self)[0];
    auto gp = t.adjoints(ip);
    for (std::size_t i = 0; i < diff.size(); ++i) gp[i] += 2.0 * g * diff[i];
  });
}

DiffArray elementwise(Elementwise op, std::span<const DiffArray> args) {
  const bool binary = op == Elementwise::add || op == Elementwise::mul;
  const std::size_t want = binary ? 2 : 1;
  if (args.size() != want) {
    throw ContractError("elementwise op expects " + std::to_string(want) + " arguments, got " +
                        std::to_string(args.size()));
  }
  switch (op) {
    case Elementwise::add: return add(args[0], args[1]);
    case Elementwise::mul: return mul(args[0], args[1]);
    case Elementwise::sigmoid: return sigmoid(args[0]);
    case Elementwise::tanh: return tanh(args[0]);
    case Elementwise::relu: return relu(args[0]);
  }
  throw ContractError("unknown elementwise op");
}

}  // namespace fvl::diff
