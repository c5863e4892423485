#include "lipzoom/covering.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

namespace lipzoom {

namespace {

using Mask = std::uint32_t;

void check_size(std::size_t n) {
  if (n > kExactCountLimit)
    throw SizeError("exact counting supports at most " + std::to_string(kExactCountLimit) +
                    " points, got " + std::to_string(n));
}

// adj[i] has bit j set when the pair (i, j) satisfies the predicate.
template <class Pred>
std::vector<Mask> adjacency(const DistanceMatrix& d, Pred pred) {
  const std::size_t n = d.size();
  std::vector<Mask> adj(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && pred(d[i][j])) adj[i] |= Mask{1} << j;
  return adj;
}

constexpr std::uint64_t kPrimes[2] = {2305843009213693951ULL, 4611686018427387847ULL};

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::size_t exact_clique_cover(const std::vector<Mask>& adj) {
  const std::size_t n = adj.size();
  if (n == 0) return 0;
  const Mask full = n == 32 ? ~Mask{0} : (Mask{1} << n) - 1;
  const std::size_t states = std::size_t{1} << n;
  // cliques[m]: number of cliques (empty included) contained in m.
  std::vector<std::uint8_t> is_clique(states, 0);
  is_clique[0] = 1;
  for (std::size_t m = 1; m < states; ++m) {
    const auto low = static_cast<unsigned>(std::countr_zero(static_cast<Mask>(m)));
    const Mask rest = static_cast<Mask>(m) & (static_cast<Mask>(m) - 1);
    is_clique[m] = is_clique[rest] && (adj[low] & rest) == rest;
  }
  std::vector<std::uint64_t> count(states);
  for (std::size_t m = 0; m < states; ++m) count[m] = is_clique[m];
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t m = 0; m < states; ++m)
      if (m & (std::size_t{1} << b)) count[m] += count[m ^ (std::size_t{1} << b)];

  // k cliques cover everything iff the number of k-tuples of cliques whose
  // union is the full set is positive; inclusion-exclusion over the
  // complement, evaluated modulo two primes.
  std::vector<std::uint64_t> pw[2];
  for (auto& p : pw) p.assign(states, 1);
  for (std::size_t k = 1; k <= n; ++k) {
    bool positive = false;
    for (int q = 0; q < 2; ++q) {
      const std::uint64_t mod = kPrimes[q];
      std::uint64_t sum = 0;
      for (std::size_t m = 0; m < states; ++m) {
        pw[q][m] = mulmod(pw[q][m], count[m] % mod, mod);
        const bool odd = ((n - static_cast<std::size_t>(std::popcount(static_cast<Mask>(m)))) & 1) != 0;
        sum = odd ? (sum + mod - pw[q][m]) % mod : (sum + pw[q][m]) % mod;
      }
      if (sum != 0) positive = true;
    }
    if (positive) return k;
  }
  (void)full;
  return n;
}

std::size_t greedy_clique_cover(const std::vector<Mask>& adj) {
  const std::size_t n = adj.size();
  std::vector<bool> covered(n, false);
  std::size_t sets = 0, left = n;
  while (left > 0) {
    std::vector<std::size_t> best;
    for (std::size_t s = 0; s < n; ++s) {
      if (covered[s]) continue;
      std::vector<std::size_t> clique{s};
      for (std::size_t j = 0; j < n; ++j) {
        if (covered[j] || j == s) continue;
        bool ok = true;
        for (auto c : clique)
          if (!(adj[c] & (Mask{1} << j))) {
            ok = false;
            break;
          }
        if (ok) clique.push_back(j);
      }
      if (clique.size() > best.size()) best = std::move(clique);
    }
    for (auto c : best) covered[c] = true;
    left -= best.size();
    ++sets;
  }
  return sets;
}

std::size_t greedy_clique_cover_large(const DistanceMatrix& d, double r) {
  const std::size_t n = d.size();
  std::vector<bool> covered(n, false);
  std::size_t sets = 0, left = n;
  while (left > 0) {
    std::vector<std::size_t> best;
    for (std::size_t s = 0; s < n; ++s) {
      if (covered[s]) continue;
      std::vector<std::size_t> clique{s};
      for (std::size_t j = 0; j < n; ++j) {
        if (covered[j] || j == s) continue;
        if (std::all_of(clique.begin(), clique.end(), [&](std::size_t c) { return d[c][j] < r; }))
          clique.push_back(j);
      }
      if (clique.size() > best.size()) best = std::move(clique);
    }
    for (auto c : best) covered[c] = true;
    left -= best.size();
    ++sets;
  }
  return sets;
}

void max_clique(Mask candidates, std::size_t size, const std::vector<Mask>& adj,
                std::size_t& best) {
  if (candidates == 0) {
    best = std::max(best, size);
    return;
  }
  while (candidates != 0) {
    if (size + static_cast<std::size_t>(std::popcount(candidates)) <= best) return;
    const auto v = static_cast<unsigned>(std::countr_zero(candidates));
    candidates &= candidates - 1;
    max_clique(candidates & adj[v], size + 1, adj, best);
  }
  best = std::max(best, size);
}

}  // namespace

DistanceMatrix distance_matrix(const MetricSpace& space, std::span<const Point> points) {
  DistanceMatrix d(points.size(), std::vector<double>(points.size(), 0.0));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      d[i][j] = d[j][i] = space.distance(points[i], points[j]);
  return d;
}

std::size_t covering_number(const DistanceMatrix& d, double r, CountMode mode) {
  if (mode == CountMode::exact) {
    check_size(d.size());
    return exact_clique_cover(adjacency(d, [r](double v) { return v < r; }));
  }
  if (d.size() <= 32) return greedy_clique_cover(adjacency(d, [r](double v) { return v < r; }));
  return greedy_clique_cover_large(d, r);
}

std::size_t covering_number(const MetricSpace& space, std::span<const Point> points, double r,
                            CountMode mode) {
  return covering_number(distance_matrix(space, points), r, mode);
}

std::size_t packing_number(const DistanceMatrix& d, double r, CountMode mode) {
  const std::size_t n = d.size();
  if (n == 0) return 0;
  if (mode == CountMode::exact) {
    check_size(n);
    auto adj = adjacency(d, [r](double v) { return v >= r; });
    std::size_t best = 0;
    max_clique((Mask{1} << n) - 1, 0, adj, best);
    return best;
  }
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < n; ++i)
    if (std::all_of(chosen.begin(), chosen.end(), [&](std::size_t c) { return d[c][i] >= r; }))
      chosen.push_back(i);
  return chosen.size();
}

std::size_t packing_number(const MetricSpace& space, std::span<const Point> points, double r,
                           CountMode mode) {
  return packing_number(distance_matrix(space, points), r, mode);
}

}  // namespace lipzoom
