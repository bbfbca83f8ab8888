#include "diffatd/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "diffatd/errors.hpp"
#include "diffatd/rng.hpp"

namespace diffatd {

using nlohmann::json;

namespace {

double sigmoid(double z) {
  const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_label(double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw InvalidRange("labels must lie in [0, 1]");
}

}  // namespace

RewardNetConfig RewardNetConfig::deep_preset(std::size_t input) {
  RewardNetConfig cfg;
  cfg.input = input;
  cfg.hidden = {4, 32, 16, 8};
  return cfg;
}

RewardNet::RewardNet(RewardNetConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) {
  if (cfg_.input == 0) throw InvalidArgument("reward net input size must be positive");
  for (std::size_t w : cfg_.hidden) {
    if (w == 0) throw InvalidArgument("reward net hidden widths must be positive");
  }
  RandomStream rng(seed);
  std::size_t in = cfg_.input;
  auto widths = cfg_.hidden;
  widths.push_back(1);
  for (std::size_t out : widths) {
    DenseLayer layer{in, out, std::vector<double>(in * out), std::vector<double>(out)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : layer.weights) w = (2.0 * rng.uniform() - 1.0) * bound;
    for (double& b : layer.bias) b = (2.0 * rng.uniform() - 1.0) * bound;
    layers_.push_back(std::move(layer));
    in = out;
  }
}

std::size_t RewardNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> RewardNet::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void RewardNet::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw DimensionMismatch("reward net parameters", parameter_count(), flat.size());
  }
  std::size_t pos = 0;
  for (auto& l : layers_) {
    for (double& w : l.weights) w = flat[pos++];
    for (double& b : l.bias) b = flat[pos++];
  }
}

double RewardNet::logit(std::span<const double> patch) const {
  if (patch.size() != cfg_.input) throw DimensionMismatch("reward net input", cfg_.input, patch.size());
  std::vector<double> act(patch.begin(), patch.end());
  std::vector<double> next;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    next.assign(l.out, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      double z = l.bias[o];
      for (std::size_t i = 0; i < l.in; ++i) z += l.weights[o * l.in + i] * act[i];
      if (li + 1 < layers_.size() && z < 0.0) z *= cfg_.slope;
      next[o] = z;
    }
    act.swap(next);
  }
  return act[0];
}

double RewardNet::predict(std::span<const double> patch) const { return sigmoid(logit(patch)); }

double RewardNet::loss_and_gradient(std::span<const LabeledPatch> data,
                                    std::vector<double>& grad) const {
  if (data.empty()) throw EmptyDataset();
  grad.assign(parameter_count(), 0.0);
  // Offsets of each layer's weight block inside the flat parameter vector.
  std::vector<std::size_t> offset(layers_.size());
  std::size_t pos = 0;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    offset[li] = pos;
    pos += layers_[li].weights.size() + layers_[li].bias.size();
  }

  double loss = 0.0;
  std::vector<std::vector<double>> acts(layers_.size() + 1);
  std::vector<std::vector<double>> pre(layers_.size());
  for (const auto& sample : data) {
    check_label(sample.label);
    if (sample.patch.size() != cfg_.input) {
      throw DimensionMismatch("reward net input", cfg_.input, sample.patch.size());
    }
    acts[0] = sample.patch;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const auto& l = layers_[li];
      pre[li].assign(l.out, 0.0);
      acts[li + 1].assign(l.out, 0.0);
      for (std::size_t o = 0; o < l.out; ++o) {
        double z = l.bias[o];
        for (std::size_t i = 0; i < l.in; ++i) z += l.weights[o * l.in + i] * acts[li][i];
        pre[li][o] = z;
        acts[li + 1][o] = (li + 1 < layers_.size() && z < 0.0) ? cfg_.slope * z : z;
      }
    }
    const double z = acts.back()[0];
    loss += softplus(z) - sample.label * z;

    std::vector<double> delta{sigmoid(z) - sample.label};
    for (std::size_t li = layers_.size(); li-- > 0;) {
      const auto& l = layers_[li];
      const std::size_t w0 = offset[li];
      const std::size_t b0 = w0 + l.weights.size();
      std::vector<double> back(l.in, 0.0);
      for (std::size_t o = 0; o < l.out; ++o) {
        grad[b0 + o] += delta[o];
        for (std::size_t i = 0; i < l.in; ++i) {
          grad[w0 + o * l.in + i] += delta[o] * acts[li][i];
          back[i] += l.weights[o * l.in + i] * delta[o];
        }
      }
      if (li > 0) {
        for (std::size_t i = 0; i < l.in; ++i) {
          if (pre[li - 1][i] < 0.0) back[i] *= cfg_.slope;
        }
      }
      delta.swap(back);
    }
  }
  return loss;
}

std::string RewardNet::to_json() const {
  json doc;
  doc["config"] = {{"input", cfg_.input}, {"hidden", cfg_.hidden}, {"slope", cfg_.slope}};
  doc["seed"] = seed_;
  json layers = json::array();
  for (const auto& l : layers_) {
    json w = json::array();
    for (std::size_t o = 0; o < l.out; ++o) {
      w.push_back(std::vector<double>(l.weights.begin() + static_cast<std::ptrdiff_t>(o * l.in),
                                      l.weights.begin() + static_cast<std::ptrdiff_t>((o + 1) * l.in)));
    }
    layers.push_back({{"w", std::move(w)}, {"b", l.bias}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2);
}

RewardNet RewardNet::from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    RewardNetConfig cfg;
    cfg.input = doc.at("config").at("input").get<std::size_t>();
    cfg.hidden = doc.at("config").at("hidden").get<std::vector<std::size_t>>();
    cfg.slope = doc.at("config").value("slope", 0.01);
    RewardNet net(cfg, doc.at("seed").get<std::uint64_t>());
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layers_.size()) {
      throw DimensionMismatch("checkpoint layer count", net.layers_.size(), layers.size());
    }
    for (std::size_t li = 0; li < layers.size(); ++li) {
      auto& l = net.layers_[li];
      const auto rows = layers[li].at("w").get<std::vector<std::vector<double>>>();
      const auto bias = layers[li].at("b").get<std::vector<double>>();
      if (rows.size() != l.out || bias.size() != l.out) {
        throw DimensionMismatch("checkpoint layer width", l.out, rows.size());
      }
      for (std::size_t o = 0; o < l.out; ++o) {
        if (rows[o].size() != l.in) throw DimensionMismatch("checkpoint layer input", l.in, rows[o].size());
        std::copy(rows[o].begin(), rows[o].end(), l.weights.begin() + static_cast<std::ptrdiff_t>(o * l.in));
      }
      l.bias = bias;
    }
    return net;
  } catch (const json::exception& e) {
    throw ParseError(std::string("reward checkpoint: ") + e.what());
  }
}

void RewardNet::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << to_json() << '\n';
}

RewardNet RewardNet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

double bce(double prediction, double label) {
  check_label(label);
  double loss = 0.0;
  if (label > 0.0) loss -= label * std::log(prediction);
  if (label < 1.0) loss -= (1.0 - label) * std::log1p(-prediction);
  return loss;
}

double bce_loss(const RewardNet& net, std::span<const LabeledPatch> data) {
  if (data.empty()) throw EmptyDataset();
  double loss = 0.0;
  for (const auto& s : data) {
    check_label(s.label);
    const double z = net.logit(s.patch);
    loss += softplus(z) - s.label * z;
  }
  return loss;
}

void train(RewardNet& net, std::span<const LabeledPatch> data, int epochs, double lr) {
  if (data.empty()) throw EmptyDataset();
  std::vector<double> grad;
  for (int e = 0; e < epochs; ++e) {
    net.loss_and_gradient(data, grad);
    auto params = net.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
    net.set_parameters(params);
  }
}

double grad_check(const RewardNet& net, std::span<const LabeledPatch> data, double h) {
  std::vector<double> analytic;
  net.loss_and_gradient(data, analytic);
  RewardNet probe = net;
  auto params = net.parameters();
  double largest = 0.0;
  for (double g : analytic) largest = std::max(largest, std::abs(g));
  // Central differences resolve about eps * loss / h; components far below
  // the largest gradient are compared against that scale instead.
  const double floor = std::max(1e-4 * largest, 1e-12);
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + h;
    probe.set_parameters(params);
    const double up = bce_loss(probe, data);
    params[k] = saved - h;
    probe.set_parameters(params);
    const double down = bce_loss(probe, data);
    params[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(analytic[k]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / scale);
  }
  return worst;
}

}  // namespace diffatd
