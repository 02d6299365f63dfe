#include "simlik/rng.hpp"

#include <cmath>
#include <numbers>

namespace simlik {

namespace detail {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

std::uint64_t SeedSpec::key() const {
    std::uint64_t k = detail::mix64(master_seed);
    for (const auto& [label, index] : stream_path) {
        k = detail::mix64(k ^ detail::fnv1a(label));
        k = detail::mix64(k ^ static_cast<std::uint64_t>(index));
    }
    return k;
}

SeedSpec split(const SeedSpec& parent, std::string_view label, std::int64_t index) {
    SeedSpec child = parent;
    child.stream_path.emplace_back(std::string(label), index);
    return child;
}

std::uint64_t Substream::next_u64() {
    // splitmix64 step
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Substream::next_uniform() {
    // 53-bit mantissa, offset by half an ulp so the result is in (0,1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
}

double Substream::next_normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(a);
    have_spare_normal_ = true;
    return r * std::cos(a);
}

double Substream::next_gumbel() {
    return -std::log(-std::log(next_uniform()));
}

std::vector<double> sample_uniform(const SeedSpec& stream, std::size_t count) {
    Substream g(stream);
    std::vector<double> out(count);
    for (auto& v : out) v = g.next_uniform();
    return out;
}

std::vector<double> sample_standard_normal(const SeedSpec& stream, std::size_t count) {
    Substream g(stream);
    std::vector<double> out(count);
    for (auto& v : out) v = g.next_normal();
    return out;
}

std::vector<double> sample_gumbel(const SeedSpec& stream, std::size_t count) {
    Substream g(stream);
    std::vector<double> out(count);
    for (auto& v : out) v = g.next_gumbel();
    return out;
}

}  // namespace simlik
