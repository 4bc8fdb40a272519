#pragma once

#include <complex>
#include <cstdint>

namespace ded2d {

/// Deterministic, platform-independent random stream (splitmix64 core).
///
/// Streams are derived by key rather than by draw order: `fork(tag)` yields an
/// independent child stream that does not depend on how much the parent has
/// been consumed. Channel generation keys one stream per link so that changing
/// one dimension (say the number of IRS elements) leaves unrelated links
/// bit-identical for the same seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    Rng fork(std::uint64_t tag) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal (Box-Muller).
    double normal();

    /// Circularly symmetric complex normal with unit variance.
    std::complex<double> cnormal();

  private:
    std::uint64_t base_;
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

} // namespace ded2d
