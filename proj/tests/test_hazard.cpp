#include <cmath>
#include <set>

#include <doctest.h>

#include "support.hpp"
#include "tsm/hazard.hpp"

using namespace tsm;

namespace {

const std::vector<double> kYearCuts{0.0, 1.0, 2.0};

PiecewiseHazard exp1_lambda1() { return {kYearCuts, {0.2, 0.2, 0.25}}; }
PiecewiseHazard exp1_lambda3() { return {kYearCuts, {0.4, 0.4, 0.4}}; }

// Trapezoid rule on every smooth stretch of the integrand, with one
// Richardson step from spacing h to h/2.
double marginal_trapezoid(const PiecewiseHazard& l1, const PiecewiseHazard& l3,
                          const PiecewiseHazard& l2, bool semi_markov, double t) {
  auto cum = [](const PiecewiseHazard& h, double s) {
    return test::cumulative_oracle(h.cuts(), h.rates(), s);
  };
  auto rate = [](const PiecewiseHazard& h, double s) {
    std::size_t j = 0;
    while (j + 1 < h.cuts().size() && s >= h.cuts()[j + 1]) ++j;
    return h.rates()[j];
  };
  auto integrand = [&](double u, double side) {
    const double inner = semi_markov ? cum(l2, t - u) : cum(l2, t) - cum(l2, u);
    // side selects the one-sided limit of the step hazard at a breakpoint
    return std::exp(-inner - cum(l1, u) - cum(l3, u)) * rate(l3, u + side);
  };
  std::set<double> knots{0.0, t};
  for (double c : l1.cuts()) {
    if (c < t) knots.insert(c);
    if (semi_markov && t - c > 0.0) knots.insert(t - c);
  }
  std::vector<double> k(knots.begin(), knots.end());
  auto trap = [&](int n) {
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < k.size(); ++s) {
      const double a = k[s], b = k[s + 1], h = (b - a) / n;
      double sum = 0.5 * (integrand(a, 1e-12) + integrand(b, -1e-12));
      for (int i = 1; i < n; ++i) sum += integrand(a + i * h, 0.0);
      total += sum * h;
    }
    return total;
  };
  const double integral = (4.0 * trap(4000) - trap(2000)) / 3.0;
  return std::exp(-cum(l1, t) - cum(l3, t)) + integral;
}

}  // namespace

TEST_CASE("survival of a constant hazard") {
  const auto h = PiecewiseHazard::constant(0.2);
  CHECK(h.survival(1.0) == doctest::Approx(0.818730753077982).epsilon(1e-14));
  CHECK(h.survival(0.0) == 1.0);
}

TEST_CASE("piecewise cumulative hazard") {
  CHECK(exp1_lambda1().survival(2.5) == doctest::Approx(std::exp(-0.525)).epsilon(1e-14));
  CHECK(exp1_lambda1().cumulative(0.5) == doctest::Approx(0.1));
  CHECK_THROWS_AS(exp1_lambda1().survival(-1.0), std::invalid_argument);
}

TEST_CASE("inverse survival") {
  const auto h = PiecewiseHazard::constant(0.2);
  CHECK(h.inverse_survival(std::exp(-0.2)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(h.inverse_survival(1.0) == 0.0);
  const PiecewiseHazard two({0.0, 1.0}, {0.5, 1.0});
  CHECK(two.inverse_survival(0.3) == doctest::Approx(1.0 + (-std::log(0.3) - 0.5)).epsilon(1e-13));
  CHECK_THROWS_AS(h.inverse_survival(0.0), std::invalid_argument);
  const PiecewiseHazard finite({0.0, 1.0}, {0.5, 0.0});
  CHECK_THROWS_WITH_AS(finite.inverse_survival(0.1), "mass beyond horizon", HorizonError);
  CHECK(std::isinf(finite.inverse_survival_or_inf(0.1)));
}

TEST_CASE("hazard construction rejects invalid input") {
  CHECK_THROWS_AS(PiecewiseHazard({0.5, 1.0}, {0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseHazard({0.0, 1.0, 1.0}, {0.1, 0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseHazard({0.0, 1.0}, {0.1, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseHazard({0.0, 1.0}, {0.1}), std::invalid_argument);
}

TEST_CASE("property: survival inverts inverse_survival") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> cuts{0.0};
    const int pieces = 1 + static_cast<int>(rng.index(6));
    for (int j = 1; j < pieces; ++j) cuts.push_back(cuts.back() + 0.1 + 2.0 * rng.uniform());
    const auto h = test::random_hazard(rng, cuts, 0.01, 3.0);
    for (int k = 0; k < 20; ++k) {
      const double p = rng.uniform();
      CHECK(h.survival(h.inverse_survival(p)) == doctest::Approx(p).epsilon(1e-10));
    }
    for (double t : {0.3, 1.7, 5.0})
      CHECK(h.cumulative(t) == doctest::Approx(test::cumulative_oracle(cuts, h.rates(), t)));
  }
}

TEST_CASE("marginal survival special cases") {
  const auto l1 = exp1_lambda1();
  const auto zero = PiecewiseHazard::constant_on(kYearCuts, 0.0);
  const CrossoverKind semi = SemiMarkovCrossover{l1.scaled(1.5)};
  for (double t : {0.0, 0.7, 2.0, 4.5}) {
    CHECK(marginal_survival(l1, zero, semi, t) == doctest::Approx(l1.survival(t)).epsilon(1e-12));
    const CrossoverKind markov = MarkovCrossover{l1};
    CHECK(marginal_survival(l1, exp1_lambda3(), markov, t) ==
          doctest::Approx(l1.survival(t)).epsilon(1e-9));
  }
  CHECK(marginal_survival(l1, exp1_lambda3(), semi, 0.0) == 1.0);
}

TEST_CASE("property: marginal survival is a survival function") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto l1 = test::random_hazard(rng, kYearCuts, 0.05, 1.0);
    const auto l3 = test::random_hazard(rng, kYearCuts, 0.05, 1.0);
    const auto l2 = test::random_hazard(rng, kYearCuts, 0.05, 1.0);
    const CrossoverKind kind =
        trial % 2 ? CrossoverKind(MarkovCrossover{l2}) : CrossoverKind(SemiMarkovCrossover{l2});
    double prev = 1.0;
    CHECK(marginal_survival(l1, l3, kind, 0.0) == doctest::Approx(1.0));
    for (double t = 0.25; t <= 6.0; t += 0.25) {
      const double s = marginal_survival(l1, l3, kind, t);
      CHECK(s <= prev + 1e-12);
      CHECK(s >= 0.0);
      prev = s;
    }
  }
}

// The clock restarts at crossover, so the coupling needs a time-homogeneous
// base hazard.
TEST_CASE("property: semi-Markov scaling bounds the marginal survival") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto l1 = PiecewiseHazard::constant_on(kYearCuts, 0.05 + 0.95 * rng.uniform());
    const auto l3 = test::random_hazard(rng, kYearCuts, 0.05, 1.0);
    for (double c : {0.5, 2.0}) {
      const auto l1c = l1.scaled(c);
      const CrossoverKind kind = SemiMarkovCrossover{l1c};
      for (double t = 0.5; t <= 5.0; t += 0.5) {
        const double s = marginal_survival(l1, l3, kind, t);
        const double lo = std::min(l1.survival(t), l1c.survival(t));
        const double hi = std::max(l1.survival(t), l1c.survival(t));
        CHECK(s >= lo - 1e-10);
        CHECK(s <= hi + 1e-10);
      }
    }
  }
}

TEST_CASE("property: quadrature agrees with a refined trapezoid rule") {
  Rng rng(13);
  const std::vector<double> cuts{0.0, 0.5, 1.5, 3.0};
  for (int trial = 0; trial < 6; ++trial) {
    const auto l1 = test::random_hazard(rng, cuts, 0.05, 1.2);
    const auto l3 = test::random_hazard(rng, cuts, 0.05, 1.2);
    const auto l2 = test::random_hazard(rng, cuts, 0.05, 1.2);
    const bool semi = trial % 2 == 0;
    const CrossoverKind kind =
        semi ? CrossoverKind(SemiMarkovCrossover{l2}) : CrossoverKind(MarkovCrossover{l2});
    for (double t : {0.8, 2.2, 4.0}) {
      CHECK(std::fabs(marginal_survival(l1, l3, kind, t) -
                      marginal_trapezoid(l1, l3, l2, semi, t)) < 1e-8);
    }
  }
}

TEST_CASE("general crossover matching a Markov hazard") {
  const auto l1 = exp1_lambda1();
  const auto l2 = l1.scaled(1.5);
  const CrossoverKind general =
      GeneralCrossover{kYearCuts, [l2](double t, double) { return l2.rate_at(t); }};
  const CrossoverKind markov = MarkovCrossover{l2};
  for (double t : {0.5, 1.5, 3.5})
    CHECK(marginal_survival(l1, exp1_lambda3(), general, t) ==
          doctest::Approx(marginal_survival(l1, exp1_lambda3(), markov, t)).epsilon(1e-7));
}

TEST_CASE("marginal density and hazard") {
  const auto l1 = PiecewiseHazard::constant(0.2);
  const auto zero = PiecewiseHazard::constant(0.0);
  const CrossoverKind semi = SemiMarkovCrossover{l1.scaled(2.0)};
  for (double t : {0.5, 2.0, 7.0})
    CHECK(std::fabs(marginal_density_and_hazard(l1, zero, semi, t).hazard - 0.2) < 1e-6);

  const auto e1 = exp1_lambda1();
  const CrossoverKind markov = MarkovCrossover{e1};
  for (double t : {0.5, 1.5, 2.5})
    CHECK(std::fabs(marginal_density_and_hazard(e1, exp1_lambda3(), markov, t).hazard -
                    e1.rate_at(t)) < 1e-6);

  const PiecewiseHazard treatment(kYearCuts, {0.12, 0.12, 0.15});
  CHECK(std::fabs(marginal_density_and_hazard(treatment, zero, semi, 1.5).hazard - 0.12) < 1e-6);

  CHECK_THROWS_WITH(marginal_density_and_hazard(PiecewiseHazard::constant(50.0), zero, semi, 2.0),
                    "survival underflow");
}
