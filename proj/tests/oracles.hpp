#pragma once

// Reference implementations used as test oracles. They share nothing with the
// library except the documented parameter layout: per layer a row-major
// (4H x in) input matrix, a row-major (4H x H) recurrent matrix and a 4H bias,
// gate blocks ordered forget, input, candidate, output; then a row-major
// (scored x H) projection followed by its bias.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Cell {
  std::vector<double> h, c;
};

// One LSTM step, written out scalar by scalar.
inline Cell lstm_step(const std::vector<double>& p, std::size_t offset, std::size_t in, std::size_t hid,
                      const std::vector<double>& x, const std::vector<double>& h_prev,
                      const std::vector<double>& c_prev) {
  const std::size_t wx = offset;
  const std::size_t wh = offset + 4 * hid * in;
  const std::size_t b = wh + 4 * hid * hid;
  auto pre = [&](std::size_t gate, std::size_t k) {
    const std::size_t row = gate * hid + k;
    double z = p[b + row];
    for (std::size_t j = 0; j < in; ++j) z += p[wx + row * in + j] * x[j];
    for (std::size_t j = 0; j < hid; ++j) z += p[wh + row * hid + j] * h_prev[j];
    return z;
  };
  Cell out{std::vector<double>(hid), std::vector<double>(hid)};
  for (std::size_t k = 0; k < hid; ++k) {
    const double f = logistic(pre(0, k));
    const double i = logistic(pre(1, k));
    const double g = std::tanh(pre(2, k));
    const double o = logistic(pre(3, k));
    out.c[k] = f * c_prev[k] + i * g;
    out.h[k] = o * std::tanh(out.c[k]);
  }
  return out;
}

inline std::size_t layer_size(std::size_t in, std::size_t hid) { return 4 * hid * in + 4 * hid * hid + 4 * hid; }

// seq[t] is the input vector at step t; returns the hidden state at each step.
inline std::vector<std::vector<double>> run_layer(const std::vector<double>& p, std::size_t offset, std::size_t in,
                                                  std::size_t hid, const std::vector<std::vector<double>>& seq) {
  std::vector<double> h(hid, 0.0), c(hid, 0.0);
  std::vector<std::vector<double>> out;
  for (const auto& x : seq) {
    Cell next = lstm_step(p, offset, in, hid, x, h, c);
    h = next.h;
    c = next.c;
    out.push_back(h);
  }
  return out;
}

struct Architecture {
  std::size_t channels = 0;
  std::size_t scored = 0;
  std::size_t steps = 0;
  std::vector<std::size_t> encoder;  // decoder mirrors it
};

// window[ch][t] in, recon[ch][t] out (scored channels only).
inline std::vector<std::vector<double>> reconstruct(const std::vector<double>& p, const Architecture& a,
                                                    const std::vector<std::vector<double>>& window) {
  std::vector<std::vector<double>> seq(a.steps, std::vector<double>(a.channels));
  for (std::size_t t = 0; t < a.steps; ++t) {
    for (std::size_t ch = 0; ch < a.channels; ++ch) seq[t][ch] = window[ch][t];
  }
  std::size_t offset = 0;
  std::size_t in = a.channels;
  for (std::size_t hid : a.encoder) {
    seq = run_layer(p, offset, in, hid, seq);
    offset += layer_size(in, hid);
    in = hid;
  }
  const std::vector<double> latent = seq.back();
  seq.assign(a.steps, latent);
  for (auto it = a.encoder.rbegin(); it != a.encoder.rend(); ++it) {
    seq = run_layer(p, offset, in, *it, seq);
    offset += layer_size(in, *it);
    in = *it;
  }
  std::vector<std::vector<double>> recon(a.scored, std::vector<double>(a.steps));
  const std::size_t bias = offset + a.scored * in;
  for (std::size_t ch = 0; ch < a.scored; ++ch) {
    for (std::size_t t = 0; t < a.steps; ++t) {
      double y = p[bias + ch];
      for (std::size_t j = 0; j < in; ++j) y += p[offset + ch * in + j] * seq[t][j];
      recon[ch][t] = y;
    }
  }
  return recon;
}

inline double mse(const std::vector<std::vector<double>>& window, const std::vector<std::vector<double>>& recon) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t ch = 0; ch < recon.size(); ++ch) {
    for (std::size_t t = 0; t < recon[ch].size(); ++t) {
      sum += (window[ch][t] - recon[ch][t]) * (window[ch][t] - recon[ch][t]);
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

inline double loss(const std::vector<double>& p, const Architecture& a, const std::vector<std::vector<double>>& window) {
  return mse(window, reconstruct(p, a, window));
}

// Central differences of the oracle loss with step h.
inline std::vector<double> numeric_gradient(std::vector<double> p, const Architecture& a,
                                            const std::vector<std::vector<double>>& window, double h) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = loss(p, a, window);
    p[i] = keep - h;
    const double down = loss(p, a, window);
    p[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::fmax(std::fmax(std::fabs(analytic), std::fabs(numeric)), floor);
  return std::fabs(analytic - numeric) / scale;
}

// Textbook Adam on f(theta) = theta^2, returning the iterate after each step.
inline std::vector<double> adam_on_square(double theta, double lr, std::size_t steps, double b1 = 0.9,
                                          double b2 = 0.999, double eps = 1e-8) {
  double m = 0.0, v = 0.0;
  std::vector<double> path;
  for (std::size_t t = 1; t <= steps; ++t) {
    const double g = 2.0 * theta;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
    const double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
    theta -= lr * mh / (std::sqrt(vh) + eps);
    path.push_back(theta);
  }
  return path;
}

// Ordinary least squares y ~ a + b x.
inline std::pair<double, double> simple_ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - b * sx) / n, b};
}

}  // namespace oracle
