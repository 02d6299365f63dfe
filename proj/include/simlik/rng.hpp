#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simlik {

/// Identifier for a deterministic random substream.
///
/// A stream is addressed by a master seed plus a path of (label, index)
/// split steps, e.g. master -> ("rep", 17) -> ("obs", 3). The same spec
/// always yields the same sample sequence; distinct paths yield streams
/// that are independent by construction of the hash-based splitting.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::vector<std::pair<std::string, std::int64_t>> stream_path;

    /// 64-bit key derived by folding the path into the master seed.
    std::uint64_t key() const;

    bool operator==(const SeedSpec&) const = default;
};

SeedSpec split(const SeedSpec& parent, std::string_view label, std::int64_t index);

/// Uniform variates in the open interval (0,1).
std::vector<double> sample_uniform(const SeedSpec& stream, std::size_t count);

/// Standard normal variates (Box-Muller, no rejection).
std::vector<double> sample_standard_normal(const SeedSpec& stream, std::size_t count);

/// Gumbel variates via the inverse CDF z = -log(-log(U)).
/// Density q(z) = exp(-z) * exp(-exp(-z)), mean = Euler's gamma.
std::vector<double> sample_gumbel(const SeedSpec& stream, std::size_t count);

/// Sequential generator over a stream's sample sequence. Pure function of
/// the spec: two Substream objects built from equal specs emit identical
/// sequences regardless of thread schedule.
class Substream {
  public:
    explicit Substream(const SeedSpec& spec) : state_(spec.key()) {}

    std::uint64_t next_u64();
    double next_uniform();       // (0,1)
    double next_normal();        // N(0,1)
    double next_gumbel();        // -log(-log(U))

  private:
    std::uint64_t state_;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

namespace detail {
std::uint64_t mix64(std::uint64_t x);            // splitmix64 finalizer
std::uint64_t fnv1a(std::string_view s);
}  // namespace detail

}  // namespace simlik
