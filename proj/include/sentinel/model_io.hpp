#pragma once

// JSON persistence for trained autoencoders. Weight tensors are nested arrays
// in row-major order; doubles round-trip exactly.

#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/autoencoder.hpp"
#include "sentinel/error.hpp"
#include "sentinel/training.hpp"
#include "sentinel/version.hpp"

namespace sentinel {

namespace detail {

inline nlohmann::json matrix_json(std::span<const double> flat, std::size_t offset, std::size_t rows, std::size_t cols) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto* begin = flat.data() + offset + r * cols;
    out.push_back(std::vector<double>(begin, begin + cols));
  }
  return out;
}

inline void read_matrix(const nlohmann::json& j, std::vector<double>& flat, std::size_t offset, std::size_t rows,
                        std::size_t cols, const std::string& what) {
  require(j.is_array() && j.size() == rows, ErrorKind::DimensionMismatch, what + ": expected " + std::to_string(rows) + " rows");
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = j[r].get<std::vector<double>>();
    require(row.size() == cols, ErrorKind::DimensionMismatch, what + ": expected " + std::to_string(cols) + " columns");
    std::copy(row.begin(), row.end(), flat.begin() + static_cast<std::ptrdiff_t>(offset + r * cols));
  }
}

inline void read_vector(const nlohmann::json& j, std::vector<double>& flat, std::size_t offset, std::size_t size,
                        const std::string& what) {
  const auto values = j.get<std::vector<double>>();
  require(values.size() == size, ErrorKind::DimensionMismatch, what + ": expected " + std::to_string(size) + " values");
  std::copy(values.begin(), values.end(), flat.begin() + static_cast<std::ptrdiff_t>(offset));
}

inline nlohmann::json layer_json(const LstmLayerParams& layer, std::span<const double> flat) {
  const auto& s = layer.shape;
  return nlohmann::json{{"input", s.input},
                        {"hidden", s.hidden},
                        {"wx", matrix_json(flat, layer.wx_offset(), s.gate_rows(), s.input)},
                        {"wh", matrix_json(flat, layer.wh_offset(), s.gate_rows(), s.hidden)},
                        {"bias", std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(layer.bias_offset()),
                                                     flat.begin() + static_cast<std::ptrdiff_t>(layer.end()))}};
}

inline void read_layer(const nlohmann::json& j, const LstmLayerParams& layer, std::vector<double>& flat,
                       const std::string& what) {
  const auto& s = layer.shape;
  require(j.at("input").get<std::size_t>() == s.input && j.at("hidden").get<std::size_t>() == s.hidden,
          ErrorKind::DimensionMismatch, what + ": layer shape mismatch");
  read_matrix(j.at("wx"), flat, layer.wx_offset(), s.gate_rows(), s.input, what + ".wx");
  read_matrix(j.at("wh"), flat, layer.wh_offset(), s.gate_rows(), s.hidden, what + ".wh");
  read_vector(j.at("bias"), flat, layer.bias_offset(), s.gate_rows(), what + ".bias");
}

}  // namespace detail

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return nlohmann::json{{"learning_rate", c.learning_rate}, {"beta1", c.beta1},
                        {"beta2", c.beta2},                 {"epsilon", c.epsilon},
                        {"max_epochs", c.max_epochs},       {"patience", c.patience},
                        {"batch_size", c.batch_size},       {"validation_frac", c.validation_frac},
                        {"rng_seed", c.rng_seed},           {"min_improvement", c.min_improvement},
                        {"clip_norm", c.clip_norm}};
}

// Keys absent from `j` keep the values already in `c`.
inline void train_config_from_json(const nlohmann::json& j, TrainConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.validation_frac = j.value("validation_frac", c.validation_frac);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.min_improvement = j.value("min_improvement", c.min_improvement);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
}

inline nlohmann::json history_to_json(const TrainingHistory& h) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"validation_loss", e.validation_loss}});
  }
  return nlohmann::json{{"epochs", epochs},
                        {"best_epoch", h.best_epoch},
                        {"stopped_epoch", h.stopped_epoch},
                        {"best_validation_loss", h.best_validation_loss},
                        {"train_count", h.train_count},
                        {"validation_count", h.validation_count},
                        {"stop_reason", h.stop_reason}};
}

inline TrainingHistory history_from_json(const nlohmann::json& j) {
  TrainingHistory h;
  for (const auto& e : j.at("epochs")) {
    h.epochs.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                        e.at("validation_loss").get<double>()});
  }
  h.best_epoch = j.at("best_epoch").get<std::size_t>();
  h.stopped_epoch = j.at("stopped_epoch").get<std::size_t>();
  h.best_validation_loss = j.at("best_validation_loss").get<double>();
  h.train_count = j.at("train_count").get<std::size_t>();
  h.validation_count = j.at("validation_count").get<std::size_t>();
  h.stop_reason = j.at("stop_reason").get<std::string>();
  return h;
}

inline nlohmann::json model_to_json(const AutoencoderModel& model, const TrainConfig& config) {
  const auto& dims = model.dims();
  const std::span<const double> flat = model.params();
  nlohmann::json encoder = nlohmann::json::array();
  for (const auto& layer : model.encoder()) encoder.push_back(detail::layer_json(layer, flat));
  nlohmann::json decoder = nlohmann::json::array();
  for (const auto& layer : model.decoder()) decoder.push_back(detail::layer_json(layer, flat));
  const std::size_t in = model.projection_inputs();
  nlohmann::json projection{
      {"weights", detail::matrix_json(flat, model.projection_weight_offset(), dims.scored_channels, in)},
      {"bias", std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(model.projection_bias_offset()),
                                   flat.begin() + static_cast<std::ptrdiff_t>(model.projection_bias_offset() +
                                                                              dims.scored_channels))}};
  return nlohmann::json{{"kind", "autoencoder"},
                        {"architecture",
                         {{"input_channels", dims.input_channels},
                          {"scored_channels", dims.scored_channels},
                          {"window", dims.window},
                          {"encoder_hidden", dims.encoder_hidden},
                          {"decoder_hidden", dims.decoder_hidden()},
                          {"latent", dims.latent()}}},
                        {"encoder", encoder},
                        {"decoder", decoder},
                        {"projection", projection},
                        {"seed", model.seed},
                        {"config", train_config_to_json(config)},
                        {"history", history_to_json(model.history)},
                        {"toolkit_version", kToolkitVersion}};
}

inline AutoencoderModel model_from_json(const nlohmann::json& j) {
  const auto& arch = j.at("architecture");
  AutoencoderDims dims;
  dims.input_channels = arch.at("input_channels").get<std::size_t>();
  dims.scored_channels = arch.at("scored_channels").get<std::size_t>();
  dims.window = arch.at("window").get<std::size_t>();
  dims.encoder_hidden = arch.at("encoder_hidden").get<std::vector<std::size_t>>();
  AutoencoderModel model(dims);
  auto& flat = model.params();
  const auto& encoder = j.at("encoder");
  const auto& decoder = j.at("decoder");
  require(encoder.size() == model.encoder().size() && decoder.size() == model.decoder().size(),
          ErrorKind::DimensionMismatch, "model layer count mismatch");
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    detail::read_layer(encoder[l], model.encoder()[l], flat, "encoder[" + std::to_string(l) + "]");
  }
  for (std::size_t l = 0; l < decoder.size(); ++l) {
    detail::read_layer(decoder[l], model.decoder()[l], flat, "decoder[" + std::to_string(l) + "]");
  }
  const auto& projection = j.at("projection");
  detail::read_matrix(projection.at("weights"), flat, model.projection_weight_offset(), dims.scored_channels,
                      model.projection_inputs(), "projection.weights");
  detail::read_vector(projection.at("bias"), flat, model.projection_bias_offset(), dims.scored_channels,
                      "projection.bias");
  model.seed = j.at("seed").get<std::uint64_t>();
  model.history = history_from_json(j.at("history"));
  return model;
}

}  // namespace sentinel
