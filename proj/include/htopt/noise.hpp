#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "htopt/core.hpp"
#include "htopt/rng.hpp"

namespace htopt {

enum class NoiseKind { zero, discrete3, pareto_sym };

inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::zero: return "zero";
    case NoiseKind::discrete3: return "discrete3";
    case NoiseKind::pareto_sym: return "pareto_sym";
  }
  return "?";
}

// Zero-mean per-coordinate noise oracle with a certified p-th moment:
// E|xi_i|^p == sigma_i^p holds with equality by construction for the two
// non-degenerate kinds, so downstream certificates are exercised at the
// worst admissible noise level.  Models are immutable; sampling is a pure
// function of the supplied stream.
struct NoiseModel {
  int dim = 0;
  double p = 2.0;  // tail index in (1, 2]
  Vec sigma;
  NoiseKind kind = NoiseKind::zero;

  // discrete3: outcomes {-a_i, 0, +a_i}, P(+-a_i) = rho_i / 2
  double scale_a = 0.0;
  Vec a;
  Vec rho;

  // pareto_sym: xi_i = sign * sigma_tilde_i * U^(-1/alpha), U ~ (0,1]
  double alpha = 0.0;
  Vec sigma_tilde;

  bool infinite_variance = false;

  double certified_moment_p(int i) const { return std::pow(sigma[i], p); }

  std::string describe() const {
    std::string s = to_string(kind);
    s += "(p=" + std::to_string(p);
    if (kind == NoiseKind::discrete3) s += ",scale_a=" + std::to_string(scale_a);
    if (kind == NoiseKind::pareto_sym) s += ",alpha=" + std::to_string(alpha);
    s += ")";
    return s;
  }

  // One draw keyed by the given per-step stream.  Counters 2i and 2i+1 are
  // reserved for coordinate i so kinds never alias each other's bits.
  void sample_into(const RngStream& step, Vec& out) const {
    out.resize(static_cast<std::size_t>(dim));
    switch (kind) {
      case NoiseKind::zero:
        for (int i = 0; i < dim; ++i) out[i] = 0.0;
        break;
      case NoiseKind::discrete3:
        for (int i = 0; i < dim; ++i) {
          if (sigma[i] == 0.0) {
            out[i] = 0.0;
            continue;
          }
          const double u = step.uniform01(2 * static_cast<std::uint64_t>(i));
          out[i] = (u < 0.5 * rho[i]) ? -a[i] : (u < rho[i] ? a[i] : 0.0);
        }
        break;
      case NoiseKind::pareto_sym:
        for (int i = 0; i < dim; ++i) {
          if (sigma[i] == 0.0) {
            out[i] = 0.0;
            continue;
          }
          const std::uint64_t c = 2 * static_cast<std::uint64_t>(i);
          const double sign = (step.bits(c) & 1u) ? 1.0 : -1.0;
          const double u = step.uniform_pos(c + 1);
          out[i] = sign * sigma_tilde[i] * std::pow(u, -1.0 / alpha);
        }
        break;
    }
  }

  Vec sample(const RngStream& step) const {
    Vec out;
    sample_into(step, out);
    return out;
  }
};

inline void validate_tail_index(double p) {
  if (!(p > 1.0) || !(p <= 2.0))
    throw std::invalid_argument("tail index p must lie in (1, 2]");
}

inline NoiseModel make_zero(int dim, double p = 2.0) {
  validate_tail_index(p);
  if (dim < 1) throw std::invalid_argument("make_zero: dim must be positive");
  NoiseModel nm;
  nm.dim = dim;
  nm.p = p;
  nm.sigma = zeros(static_cast<std::size_t>(dim));
  nm.kind = NoiseKind::zero;
  return nm;
}

// Finite-support oracle: per coordinate the outcomes are {-a_i, 0, +a_i}
// with a_i = scale_a * sigma_i and P(+-a_i) = rho_i/2, rho_i = (sigma_i/a_i)^p.
// Then E|xi_i|^p = rho_i a_i^p = sigma_i^p exactly, and scale_a >= 1 keeps
// rho_i a probability.
inline NoiseModel make_discrete3(double p, const Vec& sigma, double scale_a) {
  validate_tail_index(p);
  if (sigma.empty()) throw std::invalid_argument("make_discrete3: sigma must be non-empty");
  for (double s : sigma)
    if (s < 0.0) throw std::invalid_argument("make_discrete3: sigma must be non-negative");
  if (!(scale_a >= 1.0))
    throw std::invalid_argument("make_discrete3: scale_a < 1 makes the outcome probability exceed 1");
  NoiseModel nm;
  nm.dim = static_cast<int>(sigma.size());
  nm.p = p;
  nm.sigma = sigma;
  nm.kind = NoiseKind::discrete3;
  nm.scale_a = scale_a;
  nm.a.resize(sigma.size());
  nm.rho.resize(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    nm.a[i] = scale_a * sigma[i];
    nm.rho[i] = (sigma[i] == 0.0) ? 0.0 : std::pow(sigma[i] / nm.a[i], p);
  }
  return nm;
}

// Genuinely heavy-tailed oracle: symmetric Pareto magnitudes with shape
// alpha > p and scale sigma_tilde_i = sigma_i (1 - p/alpha)^(1/p), so that
// E|xi_i|^p = sigma_tilde_i^p * alpha/(alpha-p) = sigma_i^p exactly.
// The variance is infinite precisely when alpha <= 2.
inline NoiseModel make_pareto_sym(double p, const Vec& sigma, double alpha) {
  validate_tail_index(p);
  if (sigma.empty()) throw std::invalid_argument("make_pareto_sym: sigma must be non-empty");
  for (double s : sigma)
    if (s < 0.0) throw std::invalid_argument("make_pareto_sym: sigma must be non-negative");
  if (!(alpha > p))
    throw std::invalid_argument("make_pareto_sym: alpha <= p makes the certified moment diverge");
  NoiseModel nm;
  nm.dim = static_cast<int>(sigma.size());
  nm.p = p;
  nm.sigma = sigma;
  nm.kind = NoiseKind::pareto_sym;
  nm.alpha = alpha;
  nm.sigma_tilde.resize(sigma.size());
  bool any_noise = false;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    nm.sigma_tilde[i] = sigma[i] * std::pow(1.0 - p / alpha, 1.0 / p);
    any_noise = any_noise || sigma[i] > 0.0;
  }
  nm.infinite_variance = any_noise && alpha <= 2.0;
  return nm;
}

inline bool has_finite_support(const NoiseModel& nm) {
  return nm.kind == NoiseKind::zero || nm.kind == NoiseKind::discrete3;
}

struct SupportAtom {
  Vec outcome;
  double prob = 0.0;
};

// Exhaustive product-measure support for finite kinds.  Coordinates with
// sigma_i = 0 contribute the single outcome 0; live discrete3 coordinates
// contribute three, so a fully noisy model has 3^d atoms.  Capped at d <= 8.
inline std::vector<SupportAtom> enumerate_support(const NoiseModel& nm) {
  if (!has_finite_support(nm))
    throw std::invalid_argument("enumerate_support: continuous noise kinds are unsupported");
  if (nm.dim > 8) throw std::invalid_argument("enumerate_support: dim > 8 support would be too large");
  std::vector<SupportAtom> atoms;
  atoms.push_back(SupportAtom{zeros(static_cast<std::size_t>(nm.dim)), 1.0});
  if (nm.kind == NoiseKind::zero) return atoms;
  for (int i = 0; i < nm.dim; ++i) {
    if (nm.sigma[i] == 0.0) continue;
    std::vector<SupportAtom> next;
    next.reserve(atoms.size() * 3);
    const double half = 0.5 * nm.rho[i];
    for (const auto& atom : atoms) {
      SupportAtom minus = atom, plus = atom, keep = atom;
      minus.outcome[i] = -nm.a[i];
      minus.prob *= half;
      plus.outcome[i] = nm.a[i];
      plus.prob *= half;
      keep.prob *= 1.0 - nm.rho[i];
      next.push_back(std::move(minus));
      next.push_back(std::move(keep));
      next.push_back(std::move(plus));
    }
    atoms = std::move(next);
  }
  return atoms;
}

}  // namespace htopt
