#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "drs/errors.hpp"

namespace drs {

namespace detail {
// splitmix64; used only to mix seeds, never as the draw engine.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}
}  // namespace detail

// Deterministic random stream. All samplers are implemented here rather than
// taken from <random> distributions so that draw sequences are stable across
// standard library versions. Substreams derived via child() depend only on
// the seed lineage, not on how much of the parent stream was consumed; that
// property is what makes per-origin and per-agent streams reproducible under
// reordering and parallel execution.
class Rng {
public:
  explicit Rng(std::uint64_t seed)
      : engine_(detail::mix64(seed, 0x5851f42d4c957f2dULL)),
        lineage_(detail::mix64(seed)) {}

  // Independent substream identified by (lineage, stream id).
  Rng child(std::uint64_t stream) const {
    return Rng(detail::mix64(lineage_, stream));
  }

  std::uint64_t raw() { return engine_(); }

  // Uniform on (0,1); never returns an exact endpoint.
  double uniform() {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Gamma(shape, rate) via Marsaglia-Tsang, with the shape<1 power boost.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
      throw InvalidArgumentError("gamma draw requires shape > 0 and rate > 0");
    }
    double boost = 1.0;
    if (shape < 1.0) {
      boost = std::pow(uniform(), 1.0 / shape);
      shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2 ||
          std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
        return boost * d * v / rate;
      }
    }
  }

  // Beta(a, b), allowing the degenerate one-sided limits used by discount
  // factors at their boundary values.
  double beta(double a, double b) {
    if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0)) {
      throw InvalidArgumentError("beta draw requires a, b >= 0, not both 0");
    }
    if (a == 0.0) return 0.0;
    if (b == 0.0) return 1.0;
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  // Standard Student-t with dof degrees of freedom.
  double student_t(double dof) {
    if (!(dof > 0.0)) {
      throw InvalidArgumentError("student_t draw requires dof > 0");
    }
    const double z = normal();
    const double w = gamma(0.5 * dof, 0.5);  // chi-squared(dof)
    return z / std::sqrt(w / dof);
  }

private:
  std::mt19937_64 engine_;
  std::uint64_t lineage_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace drs
