#include "svfb/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace svfb;

TEST(Config, DefaultsFromEmptyText) {
  const SolverConfig c = parse_config("");
  EXPECT_EQ(c.n1, 32);
  EXPECT_EQ(c.n_modes, 32);
  EXPECT_EQ(c.steps, 200);
  EXPECT_DOUBLE_EQ(c.T, 0.05);
  EXPECT_EQ(c.scheme, Scheme::crank_nicolson);
  EXPECT_TRUE(c.pressure);
  EXPECT_EQ(c.u0, InitialVelocity::sinsin);
  EXPECT_FALSE(c.timestamp);
}

TEST(Config, ParsesAllSections) {
  const std::string text =
      "[grid]\nn1 = 16\nn2 = 24\n"
      "[weight]\nprofile = perturbed-sine\nepsilon = 0.2\n"
      "[initial]\nu0 = constant\nc1 = 0.5\nc2 = -0.25\n"
      "[solver]\nn_modes = 10\nT = 0.1\ndt = 0.001\npicard_tol = 1e-9\nmax_iter = 20\n"
      "scheme = implicit-euler\npressure = off\ntruncation_order = 3\n"
      "[output]\ndir = results\nexport_every = 10\nwrite_modes = yes\nquery_n1 = 5\nquery_n2 = 7\n"
      "[run]\nseed = 99\ntimestamp = true\n";
  const SolverConfig c = parse_config(text);
  EXPECT_EQ(c.n2, 24);
  EXPECT_EQ(c.profile, "perturbed-sine");
  EXPECT_DOUBLE_EQ(c.epsilon, 0.2);
  EXPECT_EQ(c.u0, InitialVelocity::constant);
  EXPECT_DOUBLE_EQ(c.c2, -0.25);
  EXPECT_EQ(c.steps, 100);
  EXPECT_EQ(c.scheme, Scheme::implicit_euler);
  EXPECT_FALSE(c.pressure);
  EXPECT_EQ(c.truncation_order, 3);
  EXPECT_TRUE(c.write_modes);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.raw, text);
  const PicardSettings p = c.picard();
  EXPECT_EQ(p.steps, 100);
  EXPECT_DOUBLE_EQ(p.tolerance, 1e-9);
  EXPECT_EQ(p.max_iterations, 20);
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(parse_config("[grid]\nn3 = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("[mesh]\nn1 = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("n1 = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nn1 = many\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nn1 = 16x\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nn1 = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[solver]\npressure = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("[solver]\nscheme = rk4\n"), ConfigError);
  EXPECT_THROW(parse_config("[solver]\nT = 0.1\ndt = 0.03\n"), ConfigError);
  EXPECT_THROW(parse_config("[solver]\ntruncation_order = 6\n"), ConfigError);
  EXPECT_THROW(parse_config("[solver]\nn_modes = 5000\n"), ConfigError);
  EXPECT_THROW(parse_config("[weight]\nprofile = gaussian\n"), ConfigError);
  EXPECT_THROW(parse_config("[weight]\nprofile = perturbed-sine\nepsilon = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[weight]\nprofile = tabulated\n"), ConfigError);
  EXPECT_THROW(parse_config("[initial]\nu0 = swirl\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid\nn1 = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nn1 = 16\nn1 = 32\n"), ConfigError);
}

TEST(Config, LoadResolvesTableAgainstConfigDirectory) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "svfb_config_test";
  fs::create_directories(dir);
  {
    std::ofstream t(dir / "rho.csv");
    for (int k = 0; k <= 100; ++k) t << k / 100.0 << "," << (k / 100.0) * (1 - k / 100.0) << "\n";
    std::ofstream c(dir / "run.ini");
    c << "[weight]\nprofile = tabulated\ntable = rho.csv\n";
  }
  const SolverConfig c = load_config(dir / "run.ini");
  const WeightProfile p = make_profile(c);
  EXPECT_EQ(p.kind(), ProfileKind::tabulated);
  EXPECT_NEAR(p(0.0, 0.5), 0.25, 1e-12);
  fs::remove_all(dir);
  EXPECT_THROW(load_config(dir / "run.ini"), ConfigError);
}

TEST(Config, InitialVelocityFields) {
  const Grid g = build_grid(8, 8);
  SolverConfig c;
  c.u0 = InitialVelocity::zero;
  EXPECT_EQ(initial_velocity(c, g)[0].abs().maxCoeff(), 0.0);
  c.u0 = InitialVelocity::constant;
  c.c1 = 1.5;
  EXPECT_EQ(initial_velocity(c, g)[0](3, 3), 1.5);
  c.u0 = InitialVelocity::sinsin;
  c.amplitude = 0.05;
  const VectorField v = initial_velocity(c, g);
  EXPECT_NEAR(v[0](2, 3), 0.05 * std::sin(2 * M_PI * g.x1(2)) * std::sin(M_PI * g.x2(3)), 1e-16);
  EXPECT_EQ(v[1].abs().maxCoeff(), 0.0);
  EXPECT_EQ(to_string(Scheme::implicit_euler), "implicit-euler");
  EXPECT_EQ(to_string(InitialVelocity::sinsin), "sinsin");
}
