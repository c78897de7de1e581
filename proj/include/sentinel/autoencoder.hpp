#pragma once

// Stacked LSTM autoencoder. The encoder compresses a (channels x timesteps)
// window into the final hidden state of its last layer; the decoder receives
// that latent vector repeated at every timestep, runs the mirrored stack, and a
// per-timestep linear projection maps its hidden state to the scored channels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentinel/error.hpp"
#include "sentinel/linalg.hpp"
#include "sentinel/lstm.hpp"
#include "sentinel/rng.hpp"

namespace sentinel {

struct AutoencoderDims {
  std::size_t input_channels = 24;
  std::size_t scored_channels = 21;
  std::size_t window = 10;
  std::vector<std::size_t> encoder_hidden{16, 8, 4};

  std::size_t latent() const { return encoder_hidden.back(); }

  std::vector<std::size_t> decoder_hidden() const { return {encoder_hidden.rbegin(), encoder_hidden.rend()}; }

  friend bool operator==(const AutoencoderDims&, const AutoencoderDims&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::size_t stopped_epoch = 0;
  double best_validation_loss = 0.0;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  std::string stop_reason;
};

class AutoencoderModel {
 public:
  AutoencoderModel() : AutoencoderModel(AutoencoderDims{}) {}

  explicit AutoencoderModel(AutoencoderDims dims) : dims_(std::move(dims)) {
    require(!dims_.encoder_hidden.empty(), ErrorKind::InvalidArgument, "autoencoder needs at least one layer");
    require(dims_.scored_channels >= 1 && dims_.scored_channels <= dims_.input_channels, ErrorKind::InvalidArgument,
            "scored channels must be between 1 and the input channel count");
    require(dims_.window >= 1, ErrorKind::InvalidArgument, "window length must be positive");
    std::size_t offset = 0;
    std::size_t input = dims_.input_channels;
    for (std::size_t hidden : dims_.encoder_hidden) {
      encoder_.push_back({{input, hidden}, offset});
      offset = encoder_.back().end();
      input = hidden;
    }
    for (std::size_t hidden : dims_.decoder_hidden()) {
      decoder_.push_back({{input, hidden}, offset});
      offset = decoder_.back().end();
      input = hidden;
    }
    projection_offset_ = offset;
    offset += dims_.scored_channels * input + dims_.scored_channels;
    params_.assign(offset, 0.0);
  }

  const AutoencoderDims& dims() const { return dims_; }
  const std::vector<LstmLayerParams>& encoder() const { return encoder_; }
  const std::vector<LstmLayerParams>& decoder() const { return decoder_; }

  std::size_t projection_inputs() const { return decoder_.back().shape.hidden; }
  std::size_t projection_weight_offset() const { return projection_offset_; }
  std::size_t projection_bias_offset() const {
    return projection_offset_ + dims_.scored_channels * projection_inputs();
  }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::uint64_t seed = 0;
  TrainingHistory history;

  // Uniform(+-1/sqrt(fan_in)) weights per matrix, forget-gate bias 1, other biases 0.
  void initialize(std::uint64_t rng_seed) {
    seed = rng_seed;
    Rng rng(rng_seed);
    std::fill(params_.begin(), params_.end(), 0.0);
    auto fill_uniform = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < count; ++i) params_[offset + i] = rng.uniform(-bound, bound);
    };
    auto init_layer = [&](const LstmLayerParams& layer) {
      fill_uniform(layer.wx_offset(), layer.shape.wx_size(), layer.shape.input);
      fill_uniform(layer.wh_offset(), layer.shape.wh_size(), layer.shape.hidden);
      for (std::size_t k = 0; k < layer.shape.hidden; ++k) params_[layer.bias_offset() + k] = 1.0;
    };
    for (const auto& layer : encoder_) init_layer(layer);
    for (const auto& layer : decoder_) init_layer(layer);
    fill_uniform(projection_offset_, dims_.scored_channels * projection_inputs(), projection_inputs());
  }

  friend bool operator==(const AutoencoderModel& a, const AutoencoderModel& b) {
    return a.dims_ == b.dims_ && a.params_ == b.params_ && a.seed == b.seed;
  }

 private:
  AutoencoderDims dims_;
  std::vector<LstmLayerParams> encoder_;
  std::vector<LstmLayerParams> decoder_;
  std::size_t projection_offset_ = 0;
  std::vector<double> params_;
};

// Activations of one forward pass, reusable across windows of the same shape.
struct AutoencoderWorkspace {
  std::vector<LstmSequenceCache> encoder;
  std::vector<LstmSequenceCache> decoder;
  Matrix reconstruction;  // scored_channels x window
  Matrix d_hidden;
  Matrix d_inputs;
  Matrix d_output;  // window x scored_channels

  void prepare(const AutoencoderModel& model) {
    const auto& dims = model.dims();
    encoder.resize(model.encoder().size());
    decoder.resize(model.decoder().size());
    for (std::size_t l = 0; l < encoder.size(); ++l) encoder[l].resize(dims.window, model.encoder()[l].shape);
    for (std::size_t l = 0; l < decoder.size(); ++l) decoder[l].resize(dims.window, model.decoder()[l].shape);
    if (reconstruction.rows() != dims.scored_channels || reconstruction.cols() != dims.window) {
      reconstruction = Matrix(dims.scored_channels, dims.window);
    }
  }
};

namespace detail {

inline void check_window(const Matrix& window, const AutoencoderDims& dims) {
  require(window.rows() == dims.input_channels && window.cols() == dims.window, ErrorKind::DimensionMismatch,
          "window shape " + std::to_string(window.rows()) + "x" + std::to_string(window.cols()) + " does not match model " +
              std::to_string(dims.input_channels) + "x" + std::to_string(dims.window));
}

inline void run_encoder(const Matrix& window, const AutoencoderModel& model, AutoencoderWorkspace& ws) {
  const auto& dims = model.dims();
  auto& first = ws.encoder.front();
  for (std::size_t t = 0; t < dims.window; ++t) {
    for (std::size_t ch = 0; ch < dims.input_channels; ++ch) first.inputs(t, ch) = window(ch, t);
  }
  for (std::size_t l = 0; l < ws.encoder.size(); ++l) {
    if (l > 0) ws.encoder[l].inputs = ws.encoder[l - 1].hidden;
    lstm_sequence_forward(model.encoder()[l], model.params(), ws.encoder[l]);
  }
}

inline void run_decoder(std::span<const double> latent, const AutoencoderModel& model, AutoencoderWorkspace& ws) {
  const auto& dims = model.dims();
  auto& first = ws.decoder.front();
  for (std::size_t t = 0; t < dims.window; ++t) std::copy(latent.begin(), latent.end(), first.inputs.row(t).begin());
  for (std::size_t l = 0; l < ws.decoder.size(); ++l) {
    if (l > 0) ws.decoder[l].inputs = ws.decoder[l - 1].hidden;
    lstm_sequence_forward(model.decoder()[l], model.params(), ws.decoder[l]);
  }
  const std::span<const double> flat = model.params();
  const std::size_t in = model.projection_inputs();
  const auto weights = flat.subspan(model.projection_weight_offset(), dims.scored_channels * in);
  const auto bias = flat.subspan(model.projection_bias_offset(), dims.scored_channels);
  const auto& top = ws.decoder.back().hidden;
  for (std::size_t t = 0; t < dims.window; ++t) {
    const auto h = top.row(t);
    for (std::size_t ch = 0; ch < dims.scored_channels; ++ch) {
      ws.reconstruction(ch, t) = bias[ch] + dot(weights.subspan(ch * in, in), h);
    }
  }
}

}  // namespace detail

/// Latent code of a window: the final hidden state of the last encoder layer.
inline std::vector<double> encode(const Matrix& window, const AutoencoderModel& model) {
  detail::check_window(window, model.dims());
  AutoencoderWorkspace ws;
  ws.prepare(model);
  detail::run_encoder(window, model, ws);
  const auto last = ws.encoder.back().hidden.row(model.dims().window - 1);
  return {last.begin(), last.end()};
}

/// Reconstruction (scored_channels x window) from a latent vector.
inline Matrix decode(std::span<const double> latent, const AutoencoderModel& model) {
  require(latent.size() == model.dims().latent(), ErrorKind::DimensionMismatch,
          "latent length " + std::to_string(latent.size()) + " does not match model bottleneck " +
              std::to_string(model.dims().latent()));
  AutoencoderWorkspace ws;
  ws.prepare(model);
  detail::run_decoder(latent, model, ws);
  return ws.reconstruction;
}

/// Window-level mean squared error over the scored channels (the first
/// reconstruction.rows() rows of the window).
inline double reconstruction_loss(const Matrix& window, const Matrix& reconstruction) {
  require(reconstruction.rows() <= window.rows() && reconstruction.cols() == window.cols(), ErrorKind::DimensionMismatch,
          "reconstruction shape does not match window");
  require(reconstruction.rows() > 0 && reconstruction.cols() > 0, ErrorKind::DimensionMismatch, "empty reconstruction");
  double sum = 0.0;
  for (std::size_t ch = 0; ch < reconstruction.rows(); ++ch) {
    for (std::size_t t = 0; t < reconstruction.cols(); ++t) {
      const double diff = window(ch, t) - reconstruction(ch, t);
      sum += diff * diff;
    }
  }
  return sum / static_cast<double>(reconstruction.rows() * reconstruction.cols());
}

// Full forward pass into a caller-owned workspace; returns the window loss.
inline double forward(const Matrix& window, const AutoencoderModel& model, AutoencoderWorkspace& ws) {
  detail::check_window(window, model.dims());
  ws.prepare(model);
  detail::run_encoder(window, model, ws);
  const auto latent = ws.encoder.back().hidden.row(model.dims().window - 1);
  detail::run_decoder(latent, model, ws);
  return reconstruction_loss(window, ws.reconstruction);
}

inline Matrix reconstruct(const Matrix& window, const AutoencoderModel& model) {
  AutoencoderWorkspace ws;
  forward(window, model, ws);
  return ws.reconstruction;
}

/// Forward plus reverse-mode pass. Adds dLoss/dParams into `grad` and returns the loss.
inline double accumulate_gradient(const Matrix& window, const AutoencoderModel& model, AutoencoderWorkspace& ws,
                                  std::span<double> grad) {
  require(grad.size() == model.parameter_count(), ErrorKind::DimensionMismatch, "gradient buffer size mismatch");
  const double loss = forward(window, model, ws);
  const auto& dims = model.dims();
  const std::size_t steps = dims.window;
  const std::size_t scored = dims.scored_channels;
  const std::span<const double> flat = model.params();
  const double scale = 2.0 / static_cast<double>(scored * steps);

  // Projection layer.
  const std::size_t in = model.projection_inputs();
  const auto weights = flat.subspan(model.projection_weight_offset(), scored * in);
  auto g_weights = grad.subspan(model.projection_weight_offset(), scored * in);
  auto g_bias = grad.subspan(model.projection_bias_offset(), scored);
  const auto& top = ws.decoder.back().hidden;
  ws.d_hidden = Matrix(steps, in);
  std::vector<double> d_out(scored);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t ch = 0; ch < scored; ++ch) d_out[ch] = scale * (ws.reconstruction(ch, t) - window(ch, t));
    outer_acc(g_weights, scored, in, d_out, top.row(t));
    for (std::size_t ch = 0; ch < scored; ++ch) g_bias[ch] += d_out[ch];
    gemv_t_acc(weights, scored, in, d_out, ws.d_hidden.row(t));
  }

  for (std::size_t l = ws.decoder.size(); l-- > 0;) {
    lstm_sequence_backward(model.decoder()[l], flat, ws.decoder[l], ws.d_hidden, grad, ws.d_inputs);
    ws.d_hidden = ws.d_inputs;
  }

  // The latent feeds every decoder step, so its gradient is the sum over time;
  // it enters the encoder only at the final timestep of the last layer.
  const std::size_t latent = dims.latent();
  Matrix d_top(steps, latent);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < latent; ++k) d_top(steps - 1, k) += ws.d_hidden(t, k);
  }
  ws.d_hidden = std::move(d_top);
  for (std::size_t l = ws.encoder.size(); l-- > 0;) {
    lstm_sequence_backward(model.encoder()[l], flat, ws.encoder[l], ws.d_hidden, grad, ws.d_inputs);
    ws.d_hidden = ws.d_inputs;
  }
  return loss;
}

/// Gradient of the window's reconstruction loss with respect to every parameter.
inline std::vector<double> backward(const Matrix& window, const AutoencoderModel& model) {
  std::vector<double> grad(model.parameter_count(), 0.0);
  AutoencoderWorkspace ws;
  accumulate_gradient(window, model, ws, grad);
  return grad;
}

}  // namespace sentinel
