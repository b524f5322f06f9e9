/*
 * Copyright 2026 The imbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Generative over-samplers: a conditional VAE fit on minority rows and a
// compact conditional GAN fit on the whole training fold. Both work in
// z-scored feature space and hand back a SyntheticGenerator that emits rows
// in original feature units.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "imb/common.hpp"
#include "imb/dataset.hpp"
#include "imb/mlp.hpp"

namespace imb {

struct CvaeSpec {
  std::size_t latent_dim = 4;
  std::size_t hidden = 32;
  std::size_t epochs = 200;
  std::size_t batch = 32;
  double learning_rate = 1e-3;
  double kl_weight = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (latent_dim == 0 || hidden == 0 || epochs == 0 || batch == 0 || !(learning_rate > 0) || !(kl_weight > 0))
      throw ConfigError("cvae: all hyperparameters must be positive");
  }
};

struct CganSpec {
  std::size_t latent_dim = 8;
  std::size_t hidden = 32;
  std::size_t epochs = 100;
  std::size_t batch = 32;
  double lr_generator = 1e-2;
  double lr_discriminator = 1e-2;
  std::uint64_t seed = 0;

  void validate() const {
    if (latent_dim == 0 || hidden == 0 || epochs == 0 || batch == 0 || !(lr_generator > 0) || !(lr_discriminator > 0))
      throw ConfigError("cgan: all hyperparameters must be positive");
  }
};

// Encoder [x, c] -> [mu, log sigma^2]; decoder [z, c] -> x.
struct Cvae {
  Mlp encoder;
  Mlp decoder;
  std::size_t latent_dim = 0;

  Cvae() = default;
  Cvae(std::size_t features, std::size_t latent, std::size_t hidden, Rng& rng)
      : encoder({features + 1, hidden, 2 * latent}, {Activation::kTanh, Activation::kLinear}, rng),
        decoder({latent + 1, hidden, features}, {Activation::kTanh, Activation::kLinear}, rng),
        latent_dim(latent) {}

  Cvae zeros_like() const {
    Cvae g;
    g.encoder = encoder.zeros_like();
    g.decoder = decoder.zeros_like();
    g.latent_dim = latent_dim;
    return g;
  }
};

struct CvaeLoss {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
};

// KL(N(mu, diag(exp(logvar))) || N(0, I)).
inline double gaussian_kl(std::span<const double> mu, std::span<const double> logvar) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += 1.0 + logvar[i] - mu[i] * mu[i] - std::exp(logvar[i]);
  return -0.5 * s;
}

// Batch-mean of  sum_j (xhat_j - x_j)^2 + beta * KL  with z = mu + sigma * eps.
// Row i of `eps` is the noise for row i of `x`. When `grad` is given the
// parameter gradients are accumulated into it.
inline CvaeLoss cvae_loss(const Cvae& net, const Matrix& x, double condition, const Matrix& eps, double beta,
                          Cvae* grad = nullptr) {
  const std::size_t n = x.rows(), d = x.cols(), latent = net.latent_dim;
  CvaeLoss loss;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> enc_in(d + 1), dec_in(latent + 1), z(latent);
  Mlp::Cache enc_cache, dec_cache;
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(x.row(r).begin(), d, enc_in.begin());
    enc_in[d] = condition;
    const auto stats = net.encoder.forward(enc_in, enc_cache);
    const std::span<const double> mu(stats.data(), latent), logvar(stats.data() + latent, latent);
    for (std::size_t k = 0; k < latent; ++k) {
      z[k] = mu[k] + std::exp(0.5 * logvar[k]) * eps(r, k);
      dec_in[k] = z[k];
    }
    dec_in[latent] = condition;
    const auto xhat = net.decoder.forward(dec_in, dec_cache);
    double rec = 0.0;
    std::vector<double> grad_xhat(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = xhat[j] - x(r, j);
      rec += diff * diff;
      grad_xhat[j] = 2.0 * diff * inv_n;
    }
    const double kl = gaussian_kl(mu, logvar);
    loss.reconstruction += rec * inv_n;
    loss.kl += kl * inv_n;
    if (!grad) continue;
    const auto grad_dec_in = net.decoder.backward(dec_cache, grad_xhat, grad->decoder);
    std::vector<double> grad_stats(2 * latent);
    for (std::size_t k = 0; k < latent; ++k) {
      const double sigma = std::exp(0.5 * logvar[k]);
      const double dz = grad_dec_in[k];
      grad_stats[k] = dz + beta * mu[k] * inv_n;
      grad_stats[latent + k] = dz * eps(r, k) * 0.5 * sigma + beta * 0.5 * (std::exp(logvar[k]) - 1.0) * inv_n;
    }
    net.encoder.backward(enc_cache, grad_stats, grad->encoder);
  }
  loss.total = loss.reconstruction + beta * loss.kl;
  return loss;
}

// Non-saturating conditional GAN. Generator [z, c] -> x; discriminator
// [x, c] -> logit(real).
struct Cgan {
  Mlp generator;
  Mlp discriminator;
  std::size_t latent_dim = 0;

  Cgan() = default;
  Cgan(std::size_t features, std::size_t latent, std::size_t hidden, Rng& rng)
      : generator({latent + 1, hidden, features}, {Activation::kTanh, Activation::kLinear}, rng),
        discriminator({features + 1, hidden, 1}, {Activation::kTanh, Activation::kLinear}, rng),
        latent_dim(latent) {}
};

namespace detail {

inline double softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

inline double logistic(double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); }

inline std::vector<double> concat(std::span<const double> a, double c) {
  std::vector<double> out(a.begin(), a.end());
  out.push_back(c);
  return out;
}

}  // namespace detail

struct DiscriminatorStats {
  double loss = 0.0;
  double accuracy = 0.0;  // real scored > 0 and fake scored < 0
};

// mean softplus(-D(real)) + mean softplus(D(G(z))). Gradients go to the
// discriminator only.
inline DiscriminatorStats cgan_discriminator_loss(const Cgan& net, const Matrix& real, const Labels& real_c,
                                                  const Matrix& z, const Labels& fake_c, Mlp* grad = nullptr) {
  DiscriminatorStats st;
  Mlp::Cache cache;
  std::size_t correct = 0;
  const double inv_real = 1.0 / static_cast<double>(real.rows());
  const double inv_fake = 1.0 / static_cast<double>(z.rows());
  for (std::size_t r = 0; r < real.rows(); ++r) {
    const double logit = net.discriminator.forward(detail::concat(real.row(r), real_c[r]), cache)[0];
    st.loss += detail::softplus(-logit) * inv_real;
    correct += logit > 0;
    if (grad) {
      const double g = -detail::logistic(-logit) * inv_real;
      net.discriminator.backward(cache, std::span<const double>(&g, 1), *grad);
    }
  }
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto fake = net.generator.forward(detail::concat(z.row(r), fake_c[r]));
    const double logit = net.discriminator.forward(detail::concat(fake, fake_c[r]), cache)[0];
    st.loss += detail::softplus(logit) * inv_fake;
    correct += logit < 0;
    if (grad) {
      const double g = detail::logistic(logit) * inv_fake;
      net.discriminator.backward(cache, std::span<const double>(&g, 1), *grad);
    }
  }
  st.accuracy = static_cast<double>(correct) / static_cast<double>(real.rows() + z.rows());
  return st;
}

// mean softplus(-D(G(z))). Gradients go to the generator only.
inline double cgan_generator_loss(const Cgan& net, const Matrix& z, const Labels& fake_c, Mlp* grad = nullptr) {
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(z.rows());
  Mlp::Cache gen_cache, disc_cache;
  Mlp disc_scratch = grad ? net.discriminator.zeros_like() : Mlp{};
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto fake = net.generator.forward(detail::concat(z.row(r), fake_c[r]), gen_cache);
    const double logit = net.discriminator.forward(detail::concat(fake, fake_c[r]), disc_cache)[0];
    loss += detail::softplus(-logit) * inv;
    if (!grad) continue;
    const double g = -detail::logistic(-logit) * inv;
    auto grad_in = net.discriminator.backward(disc_cache, std::span<const double>(&g, 1), disc_scratch);
    grad_in.pop_back();  // condition input
    net.generator.backward(gen_cache, grad_in, *grad);
  }
  return loss;
}

// Draws synthetic minority rows in feature units.
class SyntheticGenerator {
 public:
  enum class Kind { kDecoder, kJitter };

  static SyntheticGenerator from_decoder(Mlp decoder, std::size_t latent_dim, Scaler scaler) {
    SyntheticGenerator g;
    g.kind_ = Kind::kDecoder;
    g.net_ = std::move(decoder);
    g.latent_dim_ = latent_dim;
    g.scaler_ = std::move(scaler);
    return g;
  }

  // Resamples stored rows with Gaussian jitter (std = scale * per-feature sd).
  static SyntheticGenerator jitter(Matrix rows, double scale) {
    SyntheticGenerator g;
    g.kind_ = Kind::kJitter;
    g.sd_.assign(rows.cols(), 0.0);
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      std::vector<double> col(rows.rows());
      for (std::size_t i = 0; i < rows.rows(); ++i) col[i] = rows(i, j);
      g.sd_[j] = scale * std::sqrt(sample_variance(col));
    }
    g.rows_ = std::move(rows);
    return g;
  }

  Kind kind() const { return kind_; }

  Matrix sample(std::size_t count, std::uint64_t seed) const {
    Rng rng(seed);
    const std::size_t d = kind_ == Kind::kDecoder ? net_.output_width() : rows_.cols();
    Matrix out(count, d);
    std::vector<double> input(latent_dim_ + 1, 1.0);
    for (std::size_t r = 0; r < count; ++r) {
      if (kind_ == Kind::kDecoder) {
        for (std::size_t k = 0; k < latent_dim_; ++k) input[k] = standard_normal(rng);
        input[latent_dim_] = 1.0;
        const auto z = net_.forward(input);
        scaler_.inverse_row(z, out.row(r));
      } else {
        const auto parent = rows_.row(uniform_index(rng, rows_.rows()));
        for (std::size_t j = 0; j < d; ++j) out(r, j) = parent[j] + sd_[j] * standard_normal(rng);
      }
    }
    return out;
  }

 private:
  Kind kind_ = Kind::kJitter;
  Mlp net_;
  std::size_t latent_dim_ = 0;
  Scaler scaler_;
  Matrix rows_;
  std::vector<double> sd_;
};

// Exactly `count` rows from the generator for the given seed.
inline Matrix sample_synthetic(const SyntheticGenerator& gen, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("sample_synthetic: count must be >= 1");
  return gen.sample(count, seed);
}

struct CvaeFit {
  SyntheticGenerator generator;
  std::optional<Cvae> model;  // empty when the jitter fallback was used
  std::vector<double> epoch_loss;
};

// Trains on `minority` rows z-scored with `scaler` (fit on the training fold).
inline CvaeFit cvae_fit(const Matrix& minority, const Scaler& scaler, const CvaeSpec& spec) {
  spec.validate();
  if (minority.rows() < 2) throw DataError("cvae: need at least 2 minority rows");
  bool identical = true;
  for (std::size_t r = 1; r < minority.rows() && identical; ++r)
    identical = std::equal(minority.row(r).begin(), minority.row(r).end(), minority.row(0).begin());
  if (identical) {
    warn("cvae: all minority rows identical; falling back to jittered resampling");
    return {SyntheticGenerator::jitter(minority, 0.1), std::nullopt, {}};
  }

  const Matrix z = scaler.transform(minority);
  Rng rng(spec.seed);
  Cvae net(z.cols(), spec.latent_dim, spec.hidden, rng);
  std::vector<std::size_t> order(z.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  CvaeFit result;
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += spec.batch) {
      const std::size_t stop = std::min(order.size(), start + spec.batch);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Matrix batch = z.select_rows(idx);
      Matrix eps(batch.rows(), spec.latent_dim);
      for (std::size_t r = 0; r < eps.rows(); ++r)
        for (std::size_t k = 0; k < spec.latent_dim; ++k) eps(r, k) = standard_normal(rng);
      Cvae grad = net.zeros_like();
      const auto loss = cvae_loss(net, batch, 1.0, eps, spec.kl_weight, &grad);
      if (!std::isfinite(loss.total)) throw TrainingError("cvae: non-finite loss at epoch " + std::to_string(epoch));
      Mlp* nets[] = {&net.encoder, &net.decoder};
      Mlp* grads[] = {&grad.encoder, &grad.decoder};
      sgd_step(nets, grads, spec.learning_rate);
      if (!net.encoder.all_finite() || !net.decoder.all_finite())
        throw TrainingError("cvae: non-finite parameters at epoch " + std::to_string(epoch));
      epoch_loss += loss.total;
      ++batches;
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
  }
  result.generator = SyntheticGenerator::from_decoder(net.decoder, net.latent_dim, scaler);
  result.model = std::move(net);
  return result;
}

inline CvaeFit cvae_fit(const Dataset& train, const CvaeSpec& spec) {
  return cvae_fit(train.x.select_rows(train.indices_of(1)), Scaler::fit(train.x), spec);
}

struct CganFit {
  SyntheticGenerator generator;
  Cgan model;
  std::vector<double> discriminator_accuracy;  // per epoch
};

// Alternating discriminator / generator SGD steps on class-balanced batches
// (half minority, half majority rows drawn with replacement); an epoch is
// ceil(2 * minority / batch) steps.
inline CganFit cgan_fit(const Dataset& train, const CganSpec& spec) {
  spec.validate();
  const auto minority = train.indices_of(1);
  const auto majority = train.indices_of(0);
  if (minority.empty() || majority.empty()) throw DataError("cgan: both classes must be present");
  const Scaler scaler = Scaler::fit(train.x);
  const Matrix z = scaler.transform(train.x);
  Rng rng(spec.seed);
  Cgan net(z.cols(), spec.latent_dim, spec.hidden, rng);
  const std::size_t half = std::max<std::size_t>(1, spec.batch / 2);
  const std::size_t steps = (2 * minority.size() + spec.batch - 1) / spec.batch;

  CganFit result;
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    double acc = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      std::vector<std::size_t> idx;
      Labels cond;
      for (std::size_t i = 0; i < half; ++i) {
        idx.push_back(minority[uniform_index(rng, minority.size())]);
        cond.push_back(1);
        idx.push_back(majority[uniform_index(rng, majority.size())]);
        cond.push_back(0);
      }
      const Matrix real = z.select_rows(idx);
      Matrix noise(idx.size(), spec.latent_dim);
      for (std::size_t r = 0; r < noise.rows(); ++r)
        for (std::size_t k = 0; k < spec.latent_dim; ++k) noise(r, k) = standard_normal(rng);

      Mlp grad_d = net.discriminator.zeros_like();
      const auto stats = cgan_discriminator_loss(net, real, cond, noise, cond, &grad_d);
      if (!std::isfinite(stats.loss)) throw TrainingError("cgan: non-finite discriminator loss at epoch " + std::to_string(epoch));
      {
        Mlp* nets[] = {&net.discriminator};
        Mlp* grads[] = {&grad_d};
        sgd_step(nets, grads, spec.lr_discriminator);
      }
      Mlp grad_g = net.generator.zeros_like();
      const double g_loss = cgan_generator_loss(net, noise, cond, &grad_g);
      if (!std::isfinite(g_loss)) throw TrainingError("cgan: non-finite generator loss at epoch " + std::to_string(epoch));
      {
        Mlp* nets[] = {&net.generator};
        Mlp* grads[] = {&grad_g};
        sgd_step(nets, grads, spec.lr_generator);
      }
      if (!net.generator.all_finite() || !net.discriminator.all_finite())
        throw TrainingError("cgan: non-finite parameters at epoch " + std::to_string(epoch));
      acc += stats.accuracy;
    }
    result.discriminator_accuracy.push_back(acc / static_cast<double>(steps));
  }
  result.generator = SyntheticGenerator::from_decoder(net.generator, net.latent_dim, scaler);
  result.model = std::move(net);
  return result;
}

}  // namespace imb
