#pragma once

#include <cstdint>

namespace qrisk {

// Counter-based splittable random stream. A stream is identified by a
// (seed, stream_id) pair; the i-th output is a hash of (key, i), so the
// sequence is identical on every host and independent of interleaving with
// other streams. substream() derives a statistically independent child
// stream without consuming state from the parent.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  RngStream substream(std::uint64_t tag) const;

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1).
  double uniform();

  // Standard normal via inverse-CDF transform of one uniform.
  double normal();

  double chi_square(double df);

  // Student-t with df > 0 degrees of freedom: N(0,1) / sqrt(chisq(df)/df).
  double student_t(double df);

  std::uint64_t key() const { return key_; }

  static std::uint64_t mix(std::uint64_t v);

 private:
  explicit RngStream(std::uint64_t key) : key_(key) {}
  double gamma_draw(double shape);

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace qrisk
