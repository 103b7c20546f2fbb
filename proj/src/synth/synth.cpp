#include "gnnfuse/synth.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/io.hpp"
#include "gnnfuse/random.hpp"

namespace gnnfuse {

namespace {

constexpr double kMinEigenvalue = 1e-6;

enum Stream : std::uint64_t { kLabels = 1, kModels = 2, kNoise = 3 };

void validate(const SynthConfig& c) {
  if (c.classes < 2) throw ValidationError("synth: need at least 2 classes");
  if (c.samples == 0) throw ValidationError("synth: samples must be positive");
  if (c.models == 0) throw ValidationError("synth: models must be positive");
  if (c.weak_models > c.models) throw ValidationError("synth: weak_models exceeds models");
  if (!(c.noise >= 0.0)) throw ValidationError("synth: noise must be >= 0");
  if (!(c.bias_spread >= 0.0)) throw ValidationError("synth: bias_spread must be >= 0");
  if (!(c.alpha_min <= c.alpha_max)) throw ValidationError("synth: alpha_min > alpha_max");
  if (c.prevalence.size() != 1 && c.prevalence.size() != c.classes) {
    throw ValidationError("synth: prevalence needs 1 or C values");
  }
  for (double p : c.prevalence)
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("synth: prevalence must lie in (0, 1)");
  if (!c.bias.empty() && c.bias.size() != c.models) {
    throw ValidationError("synth: bias needs one offset per model");
  }
  if (!c.class_names.empty() && c.class_names.size() != c.classes) {
    throw ValidationError("synth: class_names needs C entries");
  }
  for (const LatentPair& p : c.latent) {
    if (p.first >= c.classes || p.second >= c.classes || p.first == p.second) {
      throw ValidationError("synth: latent pair indices must be distinct classes");
    }
    if (!(p.strength >= -1.0 && p.strength <= 1.0)) {
      throw ValidationError("synth: latent strength outside [-1, 1]");
    }
  }
}

std::vector<std::string> class_names(const SynthConfig& c) {
  if (!c.class_names.empty()) return c.class_names;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < c.classes; ++i) names.push_back("class_" + std::to_string(i + 1));
  return names;
}

std::string padded(const char* prefix, std::size_t value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

SynthConfig benchmark_config() {
  SynthConfig c;
  c.latent = {{0, 1, 0.8}, {2, 3, 0.8}, {4, 5, 0.8}, {6, 7, -0.7}};
  return c;
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  try {
    static const std::set<std::string> allowed{
        "classes", "samples",   "test_samples", "models",        "weak_models", "seed",
        "latent",  "prevalence", "noise",       "alpha_min",     "alpha_max",   "weak_alpha_max",
        "bias",    "bias_spread", "class_names"};
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) throw ValidationError("synth config: unknown key '" + it.key() + "'");
    SynthConfig c;
    c.classes = j.value("classes", c.classes);
    c.samples = j.value("samples", c.samples);
    c.test_samples = j.value("test_samples", c.test_samples);
    c.models = j.value("models", c.models);
    c.weak_models = j.value("weak_models", c.weak_models);
    c.seed = j.value("seed", c.seed);
    if (j.contains("prevalence")) {
      const auto& p = j.at("prevalence");
      c.prevalence = p.is_array() ? p.get<std::vector<double>>() : std::vector<double>{p.get<double>()};
    }
    c.noise = j.value("noise", c.noise);
    c.alpha_min = j.value("alpha_min", c.alpha_min);
    c.alpha_max = j.value("alpha_max", c.alpha_max);
    c.weak_alpha_max = j.value("weak_alpha_max", c.weak_alpha_max);
    c.bias = j.value("bias", c.bias);
    c.bias_spread = j.value("bias_spread", c.bias_spread);
    c.class_names = j.value("class_names", c.class_names);
    if (j.contains("latent")) {
      for (const auto& e : j.at("latent")) {
        if (!e.is_array() || e.size() != 3) {
          throw ValidationError("synth config: latent entries are [i, j, strength]");
        }
        c.latent.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
      }
    }
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
}

nlohmann::json synth_config_to_json(const SynthConfig& c) {
  nlohmann::json latent = nlohmann::json::array();
  for (const LatentPair& p : c.latent) latent.push_back({p.first, p.second, p.strength});
  return {{"classes", c.classes},         {"samples", c.samples},
          {"test_samples", c.test_samples}, {"models", c.models},
          {"weak_models", c.weak_models}, {"seed", c.seed},
          {"latent", std::move(latent)},  {"prevalence", c.prevalence},
          {"noise", c.noise},             {"alpha_min", c.alpha_min},
          {"alpha_max", c.alpha_max},     {"weak_alpha_max", c.weak_alpha_max},
          {"bias", c.bias},               {"bias_spread", c.bias_spread},
          {"class_names", class_names(c)}};
}

LatentCorrelation latent_correlation(const SynthConfig& config) {
  validate(config);
  const std::size_t c = config.classes;
  LatentCorrelation out;
  out.requested = Matrix::identity(c);
  for (const LatentPair& p : config.latent) {
    out.requested(p.first, p.second) = p.strength;
    out.requested(p.second, p.first) = p.strength;
  }

  Eigen::MatrixXd r(c, c);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) r(i, j) = out.requested(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  Eigen::VectorXd lambda = eig.eigenvalues();
  out.adjusted = lambda.minCoeff() < kMinEigenvalue;
  out.used = out.requested;
  if (out.adjusted) {
    lambda = lambda.cwiseMax(kMinEigenvalue);
    Eigen::MatrixXd fixed = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::VectorXd d = fixed.diagonal().cwiseSqrt().cwiseInverse();
    fixed = d.asDiagonal() * fixed * d.asDiagonal();
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) out.used(i, j) = i == j ? 1.0 : fixed(i, j);
  }
  return out;
}

LabelMatrix generate_labels(const SynthConfig& config, std::vector<std::string>* warnings) {
  const LatentCorrelation corr = latent_correlation(config);
  const std::size_t c = config.classes;
  if (corr.adjusted && warnings != nullptr) {
    std::ostringstream msg;
    msg << "requested latent correlation is not positive definite; using the nearest valid matrix:";
    for (std::size_t i = 0; i < c; ++i) {
      msg << "\n ";
      for (std::size_t j = 0; j < c; ++j) msg << ' ' << io::format_double(corr.used(i, j));
    }
    warnings->push_back(msg.str());
  }

  Eigen::MatrixXd r(c, c);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) r(i, j) = corr.used(i, j);
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) throw NumericalError("synth: correlation factorisation failed");
  const Eigen::MatrixXd chol = llt.matrixL();

  const boost::math::normal standard;
  std::vector<double> cut(c);
  for (std::size_t i = 0; i < c; ++i) {
    const double p = config.prevalence.size() == 1 ? config.prevalence[0] : config.prevalence[i];
    cut[i] = boost::math::quantile(standard, 1.0 - p);
  }

  const std::size_t rows = config.samples + config.test_samples;
  Rng rng(config.seed, kLabels);
  std::vector<std::string> ids;
  std::vector<std::uint8_t> values;
  ids.reserve(rows);
  values.reserve(rows * c);
  Eigen::VectorXd g(c);
  for (std::size_t s = 0; s < rows; ++s) {
    for (std::size_t i = 0; i < c; ++i) g(i) = rng.normal();
    const Eigen::VectorXd z = chol * g;
    for (std::size_t i = 0; i < c; ++i) values.push_back(z(i) > cut[i] ? 1 : 0);
    ids.push_back(padded("s", s + 1, 6));
  }
  return LabelMatrix(class_names(config), std::move(ids), std::move(values));
}

PredictionTensor simulate_predictions(const LabelMatrix& labels, const SynthConfig& config) {
  validate(config);
  if (labels.classes() != config.classes) {
    throw ValidationError("synth: label matrix has " + std::to_string(labels.classes()) +
                          " classes, config has " + std::to_string(config.classes));
  }
  const std::size_t n = config.models, c = config.classes;
  Rng model_rng(config.seed, kModels);
  std::vector<double> alpha(n);
  std::vector<double> offset(n * c);
  for (std::size_t m = 0; m < n; ++m) {
    const bool weak = m >= n - config.weak_models;
    alpha[m] = weak ? model_rng.uniform(0.0, config.weak_alpha_max)
                    : model_rng.uniform(config.alpha_min, config.alpha_max);
    const double base = config.bias.empty() ? 0.0 : config.bias[m];
    for (std::size_t i = 0; i < c; ++i)
      offset[m * c + i] = base + config.bias_spread * model_rng.normal();
  }

  std::vector<std::string> model_ids;
  for (std::size_t m = 0; m < n; ++m) model_ids.push_back(padded("m", m + 1, 2));

  Rng noise_rng(config.seed, kNoise);
  std::vector<double> scores;
  scores.reserve(labels.samples() * n * c);
  for (std::size_t s = 0; s < labels.samples(); ++s) {
    for (std::size_t m = 0; m < n; ++m) {
      for (std::size_t i = 0; i < c; ++i) {
        const double sign = labels.at(s, i) ? 1.0 : -1.0;
        const double logit = alpha[m] * sign + offset[m * c + i] + config.noise * noise_rng.normal();
        // Keep scores strictly inside (0, 1) even when the logistic saturates.
        scores.push_back(std::clamp(sigmoid(logit), 1e-12, 1.0 - 1e-12));
      }
    }
  }
  return PredictionTensor(labels.class_names(), labels.sample_ids(), std::move(model_ids),
                          std::move(scores));
}

SynthDataset generate_dataset(const SynthConfig& config) {
  std::vector<std::string> warnings;
  const LabelMatrix all = generate_labels(config, &warnings);
  const PredictionTensor preds = simulate_predictions(all, config);
  const std::size_t total = all.samples();
  if (config.test_samples == 0) throw ValidationError("synth: test_samples must be positive");
  return {all.slice(0, config.samples), all.slice(config.samples, total),
          preds.slice(0, config.samples), preds.slice(config.samples, total), std::move(warnings)};
}

}  // namespace gnnfuse
