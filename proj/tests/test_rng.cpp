#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sderates/rng.hpp"
#include "sderates/stats.hpp"

using namespace sderates;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  {
    const auto out = rng::philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    const auto out = rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
  }
  {
    const auto out = rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("streams are deterministic and path-independent") {
  rng::PathStream a(1234, 7), b(1234, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  // Consuming path 7 never touches path 8's stream.
  rng::PathStream c(1234, 8);
  rng::PathStream d(1234, 8);
  (void)a.normal();
  for (int i = 0; i < 10; ++i) CHECK(c.uniform() == d.uniform());
}

TEST_CASE("uniforms stay inside the open interval and look uniform") {
  rng::PathStream s(99, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normals have the right first moments") {
  rng::PathStream s(2024, 3);
  const int n = 200000;
  std::vector<double> z(n);
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    z[i] = s.normal();
    m1 += z[i];
    m2 += z[i] * z[i];
    m4 += z[i] * z[i] * z[i] * z[i];
  }
  CHECK(std::abs(m1 / n) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("seed derivation separates ids and orders") {
  CHECK(rng::derive_seed(1, 2, 3) != rng::derive_seed(1, 3, 2));
  CHECK(rng::derive_seed(1, 2) != rng::derive_seed(2, 2));
  CHECK(rng::derive_seed(5, 0) != rng::derive_seed(5, 1));
}
