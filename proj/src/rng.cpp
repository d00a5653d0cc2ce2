#include "qrisk/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "qrisk/normal.hpp"

namespace qrisk {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

// splitmix64 finalizer
std::uint64_t RngStream::mix(std::uint64_t v) {
  v += kGolden;
  v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ULL;
  v = (v ^ (v >> 27)) * 0x94D049BB133111EBULL;
  return v ^ (v >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix(mix(seed) ^ mix(stream_id * kGolden + 1))) {}

RngStream RngStream::substream(std::uint64_t tag) const {
  return RngStream(mix(key_ ^ mix(tag * kGolden + 0x5851F42D4C957F2DULL)));
}

std::uint64_t RngStream::next_u64() { return mix(key_ + (++counter_) * kGolden); }

double RngStream::uniform() {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are never returned
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_inv_cdf(uniform()); }

// Marsaglia-Tsang; exact, rejection probability is tiny for shape >= 1.
double RngStream::gamma_draw(double shape) {
  if (shape < 1.0) {
    const double u = uniform();
    return gamma_draw(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    const double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::chi_square(double df) {
  if (!(df > 0.0)) throw std::domain_error("chi_square: df must be positive");
  return 2.0 * gamma_draw(0.5 * df);
}

double RngStream::student_t(double df) {
  if (!(df > 0.0)) throw std::domain_error("student_t: df must be positive");
  const double z = normal();
  const double w = chi_square(df);
  return z / std::sqrt(w / df);
}

}  // namespace qrisk
