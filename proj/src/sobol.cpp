#include "metabo/sobol.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace metabo {

namespace {

struct DirectionSpec {
  unsigned degree;
  unsigned coefficients;  // interior polynomial coefficients a_1..a_{s-1}
  std::vector<std::uint32_t> m;
};

// new-joe-kuo-6.21201, dimensions 2..40.
const std::array<DirectionSpec, kSobolMaxDims - 1> kDirections = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
    {7, 50, {1, 3, 1, 3, 5, 53, 69}},
    {7, 55, {1, 1, 5, 5, 23, 33, 13}},
    {7, 56, {1, 1, 7, 7, 1, 61, 123}},
    {7, 59, {1, 1, 7, 9, 13, 61, 49}},
    {7, 62, {1, 3, 3, 5, 3, 55, 33}},
    {8, 14, {1, 3, 1, 15, 31, 13, 49, 245}},
    {8, 21, {1, 3, 5, 15, 31, 59, 63, 97}},
    {8, 22, {1, 3, 1, 11, 11, 11, 77, 249}},
}};

constexpr unsigned kBits = 32;

std::array<std::uint32_t, kBits> direction_numbers(std::size_t dim) {
  std::array<std::uint32_t, kBits> v{};
  if (dim == 0) {
    for (unsigned k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
    return v;
  }
  const auto& spec = kDirections[dim - 1];
  const unsigned s = spec.degree;
  std::array<std::uint32_t, kBits> m{};
  for (unsigned k = 0; k < s && k < kBits; ++k) m[k] = spec.m[k];
  for (unsigned k = s; k < kBits; ++k) {
    std::uint32_t value = m[k - s] ^ (m[k - s] << s);
    for (unsigned j = 1; j < s; ++j)
      if ((spec.coefficients >> (s - 1 - j)) & 1u) value ^= m[k - j] << j;
    m[k] = value;
  }
  for (unsigned k = 0; k < kBits; ++k) v[k] = m[k] << (kBits - 1 - k);
  return v;
}

}  // namespace

Eigen::MatrixXd sobol_points(std::size_t dims, std::size_t n, std::size_t skip) {
  if (dims == 0 || dims > kSobolMaxDims) throw std::invalid_argument("sobol_points: unsupported dimension");
  std::vector<std::array<std::uint32_t, kBits>> v(dims);
  for (std::size_t d = 0; d < dims; ++d) v[d] = direction_numbers(d);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  std::vector<std::uint32_t> x(dims, 0u);
  constexpr double scale = 1.0 / 4294967296.0;
  for (std::size_t i = 0; i < skip + n; ++i) {
    if (i > 0) {
      // Gray-code update: flip the direction number of the lowest zero bit of i-1.
      std::size_t c = 0;
      for (std::size_t value = i - 1; value & 1u; value >>= 1) ++c;
      if (c >= kBits) throw std::length_error("sobol_points: sequence exhausted");
      for (std::size_t d = 0; d < dims; ++d) x[d] ^= v[d][c];
    }
    if (i >= skip)
      for (std::size_t d = 0; d < dims; ++d)
        out(static_cast<Eigen::Index>(i - skip), static_cast<Eigen::Index>(d)) = x[d] * scale;
  }
  return out;
}

}  // namespace metabo
