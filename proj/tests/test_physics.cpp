#include <doctest.h>

#include <cmath>

#include "sivspec/broadening.hpp"
#include "sivspec/constants.hpp"
#include "sivspec/fine_structure.hpp"

using namespace sivspec;

TEST_CASE("constants carry the expected values and validate") {
  PhysicalConstants pc;
  CHECK(pc.kb_over_h_ghz_per_k == doctest::Approx(20.836619123).epsilon(1e-12));
  CHECK(pc.c_nm_ghz == doctest::Approx(2.99792458e8).epsilon(1e-15));
  CHECK_NOTHROW(validate(pc));
  pc.kb_over_h_ghz_per_k = 21.0;
  CHECK_THROWS_AS(validate(pc), ConfigError);
}

TEST_CASE("wavelength and frequency conversion is an involution") {
  CHECK(wavelength_frequency_convert(738.0) == doctest::Approx(406222.84281842818).epsilon(1e-12));
  for (Real v : {1.0, 736.4, 406000.0}) {
    CHECK(wavelength_frequency_convert(wavelength_frequency_convert(v)) ==
          doctest::Approx(v).epsilon(1e-14));
  }
  CHECK_THROWS_AS(wavelength_frequency_convert(0.0), ConfigError);
  CHECK_THROWS_AS(wavelength_frequency_convert(-3.0), ConfigError);
}

TEST_CASE("transition table encodes the double-doublet arithmetic") {
  FineStructure fs;  // 48.1 / 256.6 defaults
  const TransitionTable t = transition_frequencies(fs, 0.0);

  CHECK(t.a() - t.b() == doctest::Approx(48.1).epsilon(1e-12));
  CHECK(t.c() - t.d() == doctest::Approx(48.1).epsilon(1e-12));
  CHECK(t.a() - t.c() == doctest::Approx(256.6).epsilon(1e-12));
  CHECK(t.b() - t.d() == doctest::Approx(256.6).epsilon(1e-12));
  CHECK(t.a() == doctest::Approx((256.6 + 48.1) / 2).epsilon(1e-12));

  // Ordered by decreasing frequency; branch flags follow the level scheme.
  CHECK(t.lines[0].label == 'A');
  CHECK(t.lines[3].label == 'D');
  CHECK(t.lines[0].to_upper_excited);
  CHECK(t.lines[1].to_upper_excited);
  CHECK_FALSE(t.lines[2].to_upper_excited);
  CHECK_FALSE(t.lines[3].to_upper_excited);
  CHECK_FALSE(t.lines[0].from_upper_ground);
  CHECK(t.lines[1].from_upper_ground);
  CHECK_FALSE(t.lines[2].from_upper_ground);
  CHECK(t.lines[3].from_upper_ground);

  // A center offset translates every line rigidly.
  const TransitionTable s = transition_frequencies(fs, 100.0);
  for (int k = 0; k < 4; ++k)
    CHECK(s.lines[k].freq_ghz - t.lines[k].freq_ghz == doctest::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_AS(transition_frequencies(FineStructure{-1.0, 256.6}), ConfigError);
}

TEST_CASE("lifetime limited linewidth") {
  CHECK(lifetime_limited_linewidth(1.6) == doctest::Approx(0.099471839432434585).epsilon(1e-12));
  CHECK(lifetime_limited_linewidth(0.28) == doctest::Approx(0.56841051104248334).epsilon(1e-12));
  // 1.6 ns corresponds to 99.5 +- 0.1 MHz.
  CHECK(std::fabs(lifetime_limited_linewidth(1.6) * 1000 - 99.5) < 0.1);
  CHECK_THROWS_AS(lifetime_limited_linewidth(0.0), ConfigError);
}

TEST_CASE("upper branch thermal weight") {
  CHECK(upper_branch_weight(48.3, 5.0) == doctest::Approx(0.62901078202497758).epsilon(1e-12));
  CHECK(upper_branch_weight(48.1, 5.0) == doctest::Approx(0.63021945204954136).epsilon(1e-12));
  CHECK(upper_branch_weight(48.1, 1e-3) < 1e-100);   // frozen out
  CHECK(upper_branch_weight(48.1, 1e6) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(upper_branch_weight(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(upper_branch_weight(48.1, 0.0), ConfigError);
}

TEST_CASE("homogeneous width polynomial in odd powers") {
  BroadeningLaw law;  // a3 = 2.4e-4 default
  CHECK(homogeneous_width(0.0, law) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(homogeneous_width(5.0, law) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(homogeneous_width(10.0, law) == doctest::Approx(0.24).epsilon(1e-12));

  BroadeningLaw full{1e-3, 2e-4, 3e-8, 4e-12, 0.0, 0.0};
  for (Real t : {0.5, 7.0, 42.0, 130.0}) {
    const Real direct = 1e-3 * t + 2e-4 * t * t * t + 3e-8 * std::pow(t, 5) +
                        4e-12 * std::pow(t, 7);
    CHECK(homogeneous_width(t, full) == doctest::Approx(direct).epsilon(1e-13));
  }
  CHECK_THROWS_AS(homogeneous_width(-1.0, law), ConfigError);
  CHECK_THROWS_AS(homogeneous_width(5.0, BroadeningLaw{-1e-3, 0, 0, 0, 0, 0}), ConfigError);
}

TEST_CASE("line shift polynomial in even powers") {
  BroadeningLaw law;  // b2 = 4e-3, b4 = 6e-8 defaults
  CHECK(line_shift(0.0, law) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(line_shift(5.0, law) == doctest::Approx(0.1000375).epsilon(1e-12));
  for (Real t : {3.0, 60.0, 130.0}) {
    const Real direct = 4e-3 * t * t + 6e-8 * std::pow(t, 4);
    CHECK(line_shift(t, law) == doctest::Approx(direct).epsilon(1e-13));
  }
  CHECK_THROWS_AS(line_shift(-0.1, law), ConfigError);
}

TEST_CASE("phonon rate: cubic onset, thermal cutoff, peak position") {
  const PhysicalConstants pc;
  const Real a = 4.7e-8;

  CHECK(phonon_linewidth(0.0, 4.7, a) == 0.0);

  // Small splittings: expm1(x) ~ x, so gamma ~ a 2 pi kT delta^2.
  const Real kt = pc.kb_over_h_ghz_per_k * 4.7;
  const Real small = phonon_linewidth(0.01, 4.7, a);
  CHECK(small == doctest::Approx(a * two_pi * kt * 1e-4).epsilon(1e-4));

  // Large splittings: exponentially suppressed below the pure cubic curve.
  const Real big = 30 * kt;
  CHECK(phonon_linewidth(big, 4.7, a) < a * two_pi * big * big * big * 1e-12);

  // The maximum sits at x* kT with x* solving x = 3 (1 - exp(-x)).
  const Real xstar = 2.8214393721220789;
  for (Real t : {2.0, 4.7, 20.0, 50.0}) {
    CAPTURE(t);
    Real lo = 1.0 * pc.kb_over_h_ghz_per_k * t, hi = 5.0 * pc.kb_over_h_ghz_per_k * t;
    // Golden-section maximization of the rate over the splitting.
    const Real gr = 0.6180339887498949;
    Real x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    Real f1 = phonon_linewidth(x1, t, a), f2 = phonon_linewidth(x2, t, a);
    for (int i = 0; i < 200; ++i) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = phonon_linewidth(x2, t, a);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = phonon_linewidth(x1, t, a);
      }
    }
    const Real peak = 0.5 * (lo + hi);
    CHECK(peak == doctest::Approx(xstar * pc.kb_over_h_ghz_per_k * t).epsilon(1e-3));
  }

  // Rate scales linearly with the coupling.
  CHECK(phonon_linewidth(100.0, 4.7, 2 * a) ==
        doctest::Approx(2 * phonon_linewidth(100.0, 4.7, a)).epsilon(1e-14));

  CHECK_THROWS_AS(phonon_linewidth(-1.0, 4.7, a), ConfigError);
  CHECK_THROWS_AS(phonon_linewidth(100.0, 0.0, a), ConfigError);
  CHECK_THROWS_AS(phonon_linewidth(100.0, 4.7, -a), ConfigError);
}
