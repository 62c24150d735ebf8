#include <random>
#include <stdexcept>

#include "rfe/rsu.h"

namespace rfe::rsu {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

}  // namespace

void LinkModel::validate() const {
  if (!(p_loss >= 0 && p_loss < 1)) throw std::invalid_argument("link: p_loss must lie in [0, 1)");
  if (!(latency_ms >= 0) || !(jitter_ms >= 0)) {
    throw std::invalid_argument("link: latency terms must be >= 0");
  }
}

Delivery transmit(std::span<const std::uint8_t> bytes, const LinkModel& link, std::uint64_t nonce) {
  link.validate();
  std::mt19937_64 rng(splitmix64(link.seed ^ splitmix64(nonce)));
  Delivery d;
  if (unit(rng) < link.p_loss) return d;
  d.delivered = true;
  d.latency_ms = link.latency_ms + link.jitter_ms * unit(rng);
  d.bytes.assign(bytes.begin(), bytes.end());
  return d;
}

}  // namespace rfe::rsu
