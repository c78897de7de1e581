#pragma once

// LSTM layer over flat parameter storage. Gate blocks are stacked in the order
// forget, input, candidate, output; each block has `hidden` rows.
//
//   f, i, o = sigmoid(Wx x + Wh h_prev + b)   g = tanh(...)
//   c = f * c_prev + i * g                    h = o * tanh(c)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sentinel/error.hpp"
#include "sentinel/linalg.hpp"

namespace sentinel {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmShape {
  std::size_t input = 0;
  std::size_t hidden = 0;

  std::size_t gate_rows() const { return 4 * hidden; }
  std::size_t wx_size() const { return gate_rows() * input; }
  std::size_t wh_size() const { return gate_rows() * hidden; }
  std::size_t parameter_count() const { return wx_size() + wh_size() + gate_rows(); }

  friend bool operator==(const LstmShape&, const LstmShape&) = default;
};

// Location of one layer's tensors inside a flat parameter vector.
struct LstmLayerParams {
  LstmShape shape;
  std::size_t offset = 0;

  std::size_t wx_offset() const { return offset; }
  std::size_t wh_offset() const { return offset + shape.wx_size(); }
  std::size_t bias_offset() const { return offset + shape.wx_size() + shape.wh_size(); }
  std::size_t end() const { return offset + shape.parameter_count(); }

  friend bool operator==(const LstmLayerParams&, const LstmLayerParams&) = default;
};

template <typename T>
struct LstmTensors {
  std::span<T> wx;
  std::span<T> wh;
  std::span<T> bias;
};

template <typename T>
LstmTensors<T> lstm_tensors(const LstmLayerParams& layer, std::span<T> flat) {
  return {flat.subspan(layer.wx_offset(), layer.shape.wx_size()), flat.subspan(layer.wh_offset(), layer.shape.wh_size()),
          flat.subspan(layer.bias_offset(), layer.shape.gate_rows())};
}

struct CellState {
  std::vector<double> h;
  std::vector<double> c;
};

namespace detail {

// Writes activated gates [f | i | g | o] for one step.
inline void lstm_gates(const LstmShape& shape, const LstmTensors<const double>& w, std::span<const double> x,
                       std::span<const double> h_prev, std::span<double> gates) {
  const std::size_t hidden = shape.hidden;
  for (std::size_t r = 0; r < shape.gate_rows(); ++r) gates[r] = w.bias[r];
  gemv_acc(w.wx, shape.gate_rows(), shape.input, x, gates);
  gemv_acc(w.wh, shape.gate_rows(), hidden, h_prev, gates);
  for (std::size_t k = 0; k < hidden; ++k) {
    gates[k] = sigmoid(gates[k]);
    gates[hidden + k] = sigmoid(gates[hidden + k]);
    gates[2 * hidden + k] = std::tanh(gates[2 * hidden + k]);
    gates[3 * hidden + k] = sigmoid(gates[3 * hidden + k]);
  }
}

}  // namespace detail

/// One LSTM step. Throws DimensionMismatch when vector sizes disagree with the layer.
inline CellState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                                   std::span<const double> c_prev, const LstmLayerParams& layer,
                                   std::span<const double> flat) {
  const auto& shape = layer.shape;
  require(x.size() == shape.input && h_prev.size() == shape.hidden && c_prev.size() == shape.hidden,
          ErrorKind::DimensionMismatch, "lstm_cell_forward: input/state sizes do not match layer shape");
  require(flat.size() >= layer.end(), ErrorKind::DimensionMismatch, "lstm_cell_forward: parameter buffer too small");
  const auto w = lstm_tensors(layer, flat);
  std::vector<double> gates(shape.gate_rows());
  detail::lstm_gates(shape, w, x, h_prev, gates);
  CellState out{std::vector<double>(shape.hidden), std::vector<double>(shape.hidden)};
  const std::size_t hidden = shape.hidden;
  for (std::size_t k = 0; k < hidden; ++k) {
    out.c[k] = gates[k] * c_prev[k] + gates[hidden + k] * gates[2 * hidden + k];
    out.h[k] = gates[3 * hidden + k] * std::tanh(out.c[k]);
  }
  return out;
}

// Per-sequence activations kept for backpropagation through time. Time-major:
// row t of `inputs` is x_t, row t of `hidden` is h_t.
struct LstmSequenceCache {
  std::size_t steps = 0;
  Matrix inputs;
  Matrix gates;
  Matrix cell;
  Matrix cell_tanh;
  Matrix hidden;

  void resize(std::size_t t, const LstmShape& shape) {
    if (steps == t && inputs.cols() == shape.input && hidden.cols() == shape.hidden) return;
    steps = t;
    inputs = Matrix(t, shape.input);
    gates = Matrix(t, shape.gate_rows());
    cell = Matrix(t, shape.hidden);
    cell_tanh = Matrix(t, shape.hidden);
    hidden = Matrix(t, shape.hidden);
  }
};

// Runs the layer from zero state over `cache.inputs`, filling the remaining cache rows.
inline void lstm_sequence_forward(const LstmLayerParams& layer, std::span<const double> flat, LstmSequenceCache& cache) {
  const auto& shape = layer.shape;
  const auto w = lstm_tensors(layer, flat);
  const std::size_t hidden = shape.hidden;
  std::vector<double> zeros(hidden, 0.0);
  for (std::size_t t = 0; t < cache.steps; ++t) {
    std::span<const double> h_prev = t == 0 ? std::span<const double>(zeros) : cache.hidden.row(t - 1);
    std::span<const double> c_prev = t == 0 ? std::span<const double>(zeros) : cache.cell.row(t - 1);
    auto gates = cache.gates.row(t);
    detail::lstm_gates(shape, w, cache.inputs.row(t), h_prev, gates);
    auto c = cache.cell.row(t);
    auto tc = cache.cell_tanh.row(t);
    auto h = cache.hidden.row(t);
    for (std::size_t k = 0; k < hidden; ++k) {
      c[k] = gates[k] * c_prev[k] + gates[hidden + k] * gates[2 * hidden + k];
      tc[k] = std::tanh(c[k]);
      h[k] = gates[3 * hidden + k] * tc[k];
    }
  }
}

// Backpropagation through time. `d_hidden` holds dL/dh_t from layers above
// (rows = steps). Parameter gradients are accumulated into `grad` (same layout
// as the flat parameters); dL/dx_t is written to `d_inputs`.
inline void lstm_sequence_backward(const LstmLayerParams& layer, std::span<const double> flat,
                                   const LstmSequenceCache& cache, const Matrix& d_hidden, std::span<double> grad,
                                   Matrix& d_inputs) {
  const auto& shape = layer.shape;
  const std::size_t hidden = shape.hidden;
  const auto w = lstm_tensors(layer, flat);
  auto g = lstm_tensors(layer, grad);
  if (d_inputs.rows() != cache.steps || d_inputs.cols() != shape.input) {
    d_inputs = Matrix(cache.steps, shape.input);
  } else {
    std::fill(d_inputs.data().begin(), d_inputs.data().end(), 0.0);
  }

  std::vector<double> dh_next(hidden, 0.0);
  std::vector<double> dc_next(hidden, 0.0);
  std::vector<double> d_pre(shape.gate_rows());
  std::vector<double> zeros(hidden, 0.0);
  for (std::size_t t = cache.steps; t-- > 0;) {
    const auto gates = cache.gates.row(t);
    const auto tc = cache.cell_tanh.row(t);
    std::span<const double> c_prev = t == 0 ? std::span<const double>(zeros) : cache.cell.row(t - 1);
    std::span<const double> h_prev = t == 0 ? std::span<const double>(zeros) : cache.hidden.row(t - 1);
    const auto dh_above = d_hidden.row(t);
    for (std::size_t k = 0; k < hidden; ++k) {
      const double f = gates[k];
      const double i = gates[hidden + k];
      const double cand = gates[2 * hidden + k];
      const double o = gates[3 * hidden + k];
      const double dh = dh_above[k] + dh_next[k];
      const double dc = dh * o * (1.0 - tc[k] * tc[k]) + dc_next[k];
      d_pre[k] = dc * c_prev[k] * f * (1.0 - f);
      d_pre[hidden + k] = dc * cand * i * (1.0 - i);
      d_pre[2 * hidden + k] = dc * i * (1.0 - cand * cand);
      d_pre[3 * hidden + k] = dh * tc[k] * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    outer_acc(g.wx, shape.gate_rows(), shape.input, d_pre, cache.inputs.row(t));
    if (t > 0) outer_acc(g.wh, shape.gate_rows(), hidden, d_pre, h_prev);
    for (std::size_t r = 0; r < shape.gate_rows(); ++r) g.bias[r] += d_pre[r];
    gemv_t_acc(w.wx, shape.gate_rows(), shape.input, d_pre, d_inputs.row(t));
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    gemv_t_acc(w.wh, shape.gate_rows(), hidden, d_pre, dh_next);
  }
}

}  // namespace sentinel
