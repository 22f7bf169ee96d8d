#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "drs/portfolio.hpp"
#include "drs/rng.hpp"

using namespace drs;
using namespace drs::portfolio;

namespace {

double brute_force_weight(const Eigen::VectorXd& draws, double r_f,
                          const AllocationConfig& coarse, int refine) {
  AllocationConfig fine = coarse;
  fine.step = coarse.step / refine;
  return optimal_weight(draws, r_f, fine);
}

}  // namespace

TEST_CASE("allocation grid covers the closed interval") {
  const AllocationConfig cfg{5.0, -1.0, 2.0, 0.01};
  REQUIRE_NOTHROW(cfg.validate());
  REQUIRE(cfg.grid_size() == 301);
  REQUIRE(cfg.grid_point(0) == -1.0);
  REQUIRE_THAT(cfg.grid_point(300), Catch::Matchers::WithinAbs(2.0, 1e-12));
  REQUIRE_THROWS_AS((AllocationConfig{1.0, 0.0, 1.0, 0.1}.validate()),
                    InvalidArgumentError);
  REQUIRE_THROWS_AS((AllocationConfig{5.0, 1.0, 0.0, 0.1}.validate()),
                    InvalidArgumentError);
  REQUIRE_THROWS_AS((AllocationConfig{5.0, 0.0, 1.0, 0.0}.validate()),
                    InvalidArgumentError);
}

TEST_CASE("gross return and power utility agree with direct formulas") {
  REQUIRE_THAT(gross_return(0.0, 0.5, 0.02),
               Catch::Matchers::WithinRel(std::exp(0.02), 1e-15));
  REQUIRE_THAT(gross_return(1.0, 0.5, 0.02),
               Catch::Matchers::WithinRel(std::exp(0.52), 1e-15));
  const double g = gross_return(0.6, 0.03, 0.001);
  REQUIRE_THAT(power_utility(0.6, 0.03, 0.001, 5.0),
               Catch::Matchers::WithinRel(std::pow(g, -4.0) / -4.0, 1e-13));
  REQUIRE_THAT(power_utility(0.6, 0.03, 0.001, 2.5),
               Catch::Matchers::WithinRel(std::pow(g, -1.5) / -1.5, 1e-13));
  // A leveraged position can wipe out: utility is undefined there.
  REQUIRE_THROWS_AS(power_utility(2.0, -1.0, 0.0, 5.0), NumericError);
}

TEST_CASE("grid search matches a ten times finer search") {
  Rng rng(88);
  const AllocationConfig coarse{5.0, -1.0, 2.0, 0.02};
  for (int rep = 0; rep < 25; ++rep) {
    Eigen::VectorXd draws;
    if (rep % 2 == 0) {
      draws.resize(2);  // two-point predictive
      draws << 0.02 + 0.03 * rng.normal(), -0.01 + 0.03 * rng.normal();
    } else {
      draws.resize(40);
      const double mu = 0.01 * rng.normal();
      for (int i = 0; i < 40; ++i) draws[i] = mu + 0.04 * rng.normal();
    }
    const double r_f = 0.002 * rng.uniform();
    const double w = optimal_weight(draws, r_f, coarse);
    const double w_fine = brute_force_weight(draws, r_f, coarse, 10);
    REQUIRE(std::abs(w - w_fine) <= coarse.step + 1e-12);
  }
}

TEST_CASE("exact utility ties resolve to the smallest absolute weight") {
  // A zero return with zero rate makes every feasible weight equivalent, and
  // the dyadic grid keeps the tie exact in floating point.
  Eigen::VectorXd draws(1);
  draws << 0.0;
  const AllocationConfig cfg{5.0, -1.0, 1.0, 0.5};
  REQUIRE(optimal_weight(draws, 0.0, cfg) == 0.0);
}

TEST_CASE("an all-infeasible grid is an error") {
  Eigen::VectorXd draws(1);
  draws << -20.0;
  const AllocationConfig cfg{5.0, 1.1, 2.0, 0.1};
  REQUIRE_THROWS_AS(optimal_weight(draws, 0.0, cfg), NumericError);
}

TEST_CASE("wealth path compounds gross returns from one") {
  const std::vector<data::MonthDate> dates{
      {2010, 1}, {2010, 2}, {2010, 3}};
  const std::vector<double> w{0.5, 1.0, 0.0};
  const std::vector<double> y{0.04, -0.02, 0.01};
  const std::vector<double> rf{0.001, 0.001, 0.002};
  const WealthPath path = realized_utility_series(dates, w, y, rf, 5.0);
  double wealth = 1.0;
  for (int t = 0; t < 3; ++t) {
    wealth *= gross_return(w[t], y[t], rf[t]);
    REQUIRE_THAT(path.wealth[t], Catch::Matchers::WithinRel(wealth, 1e-15));
    REQUIRE_THAT(path.utility[t],
                 Catch::Matchers::WithinRel(
                     power_utility(w[t], y[t], rf[t], 5.0), 1e-15));
  }
  REQUIRE_THROWS_WITH(
      realized_utility_series({{2011, 4}}, {2.0}, {-1.0}, {0.0}, 5.0),
      Catch::Matchers::ContainsSubstring("2011-04"));
}

TEST_CASE("cer identities") {
  const std::vector<double> u_ref{-0.25, -0.26, -0.24, -0.255};
  SECTION("a model against itself earns exactly zero") {
    REQUIRE(cer_aggregate(u_ref, u_ref, 5.0) == 0.0);
    for (const double c : cer_single_period(u_ref, u_ref, 5.0)) {
      REQUIRE(c == 0.0);
    }
  }
  SECTION("scaled utilities follow the closed form") {
    for (const double c : {0.5, 0.9, 1.3, 2.0}) {
      std::vector<double> u_model = u_ref;
      for (double& u : u_model) u *= c;
      const double expect = std::pow(c, -0.25) - 1.0;
      REQUIRE_THAT(cer_aggregate(u_model, u_ref, 5.0),
                   Catch::Matchers::WithinAbs(expect, 1e-12));
      for (const double s : cer_single_period(u_model, u_ref, 5.0)) {
        REQUIRE_THAT(s, Catch::Matchers::WithinAbs(expect, 1e-12));
      }
    }
  }
  SECTION("less negative utility means a positive excess return") {
    std::vector<double> better = u_ref;
    for (double& u : better) u *= 0.8;
    REQUIRE(cer_aggregate(better, u_ref, 5.0) > 0.0);
  }
  SECTION("sign flips and zeros are rejected") {
    std::vector<double> zero{0.0, 0.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(cer_aggregate(u_ref, zero, 5.0), NumericError);
    std::vector<double> positive{0.25, 0.26, 0.24, 0.255};
    REQUIRE_THROWS_AS(cer_aggregate(positive, u_ref, 5.0), NumericError);
  }
}

TEST_CASE("ccer accumulates compounded log returns") {
  const std::vector<data::MonthDate> dates{
      {2012, 1}, {2012, 2}, {2012, 3}};
  const std::vector<double> cer{0.01, -0.005, 0.02};
  const std::vector<double> ccer = ccer_series(cer, dates);
  double acc = 0.0;
  for (int t = 0; t < 3; ++t) {
    acc += std::log1p(cer[t]);
    REQUIRE_THAT(ccer[t], Catch::Matchers::WithinAbs(acc, 1e-15));
  }
  REQUIRE_THROWS_WITH(ccer_series({0.01, -1.0}, {{2012, 1}, {2012, 2}}),
                      Catch::Matchers::ContainsSubstring("2012-02"));
}
