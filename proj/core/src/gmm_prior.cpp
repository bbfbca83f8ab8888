#include "diffatd/gmm_prior.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "diffatd/errors.hpp"

namespace diffatd {

using nlohmann::json;

GaussianMixturePrior::GaussianMixturePrior(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("mixture prior needs at least one component");
  dimension_ = components_.front().mean.size();
  if (dimension_ == 0) throw InvalidArgument("mixture prior dimension must be positive");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dimension_) {
      throw DimensionMismatch("mixture component mean", dimension_, c.mean.size());
    }
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw InvalidRange("mixture weights must be positive and finite");
    }
    if (!(c.variance >= 0.0) || !std::isfinite(c.variance)) {
      throw InvalidRange("mixture variances must be non-negative and finite");
    }
    for (double m : c.mean) {
      if (!std::isfinite(m)) throw InvalidRange("mixture means must be finite");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidRange("mixture weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

GaussianMixturePrior GaussianMixturePrior::empirical(
    const std::vector<std::vector<double>>& examples, double variance) {
  if (examples.empty()) throw InvalidArgument("empirical prior needs at least one example");
  std::vector<GaussianComponent> comps;
  comps.reserve(examples.size());
  const double w = 1.0 / static_cast<double>(examples.size());
  for (const auto& e : examples) comps.push_back({w, e, variance});
  // Renormalize the accumulated rounding of 1/n so the weights pass validation.
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return GaussianMixturePrior(std::move(comps));
}

GaussianMixturePrior GaussianMixturePrior::affine(double scale, double shift) const {
  std::vector<GaussianComponent> comps = components_;
  for (auto& c : comps) {
    for (double& m : c.mean) m = scale * m + shift;
    c.variance *= scale * scale;
  }
  return GaussianMixturePrior(std::move(comps));
}

std::string GaussianMixturePrior::to_json() const {
  json doc;
  doc["dimension"] = dimension_;
  json comps = json::array();
  for (const auto& c : components_) {
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
  }
  doc["components"] = std::move(comps);
  return doc.dump(2);
}

GaussianMixturePrior GaussianMixturePrior::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("prior JSON: ") + e.what());
  }
  try {
    std::vector<GaussianComponent> comps;
    for (const auto& c : doc.at("components")) {
      comps.push_back({c.at("weight").get<double>(), c.at("mean").get<std::vector<double>>(),
                       c.at("variance").get<double>()});
    }
    GaussianMixturePrior prior(std::move(comps));
    if (doc.contains("dimension") && doc["dimension"].get<std::size_t>() != prior.dimension()) {
      throw DimensionMismatch("prior JSON 'dimension'", doc["dimension"].get<std::size_t>(),
                              prior.dimension());
    }
    return prior;
  } catch (const json::exception& e) {
    throw ParseError(std::string("prior JSON: ") + e.what());
  }
}

void GaussianMixturePrior::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << to_json() << '\n';
}

GaussianMixturePrior GaussianMixturePrior::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open prior file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace diffatd
