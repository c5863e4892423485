#include "lipzoom/random.hpp"

namespace lipzoom {

std::uint64_t derive_seed(std::uint64_t root, Purpose purpose, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(root);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ a);
  return mix64(h ^ (b * 0xd1b54a32d192ed03ULL));
}

}  // namespace lipzoom
