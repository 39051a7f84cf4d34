// Seeded generator for the bundled synthetic survey. Responses follow a
// cumulative logit location-shift model with k = 5.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace {

// Uniform in (0,1) from the raw engine output so the stream does not depend
// on the standard library's distribution implementations.
double uniform(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic ordinal survey CSV"};
  int n = 400;
  std::uint64_t seed = 20240601;
  std::string out_path;
  app.add_option("--n", n, "Number of rows")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();
  app.add_option("--out", out_path, "Output path (stdout when omitted)");
  CLI11_PARSE(app, argc, argv);

  constexpr int k = 5;
  const std::array<double, k - 1> intercepts{-2.2, -0.8, 0.5, 1.9};
  // Location effects (positive pushes towards low categories) and dispersion effects.
  const double beta_age = -0.25, beta_male = 0.45, beta_urban = -0.35, beta_income = 0.0;
  const double alpha_age = 0.08, alpha_male = -0.20, alpha_urban = 0.15;

  std::mt19937_64 gen(seed);
  std::string csv = "y,age,gender,urban,income\n";
  for (int i = 0; i < n; ++i) {
    const double age = std::round((18.0 + 62.0 * uniform(gen)) * 10.0) / 10.0;
    const bool male = uniform(gen) < 0.5;
    const int urban = uniform(gen) < 0.6 ? 1 : 0;
    const double income = std::round(std::exp(3.0 + 0.4 * uniform(gen)) * 10.0) / 10.0;

    const double decades = (age - 50.0) / 10.0;
    const double location = beta_age * decades + beta_male * male + beta_urban * urban +
                            beta_income * (income - 30.0);
    const double dispersion = alpha_age * decades + alpha_male * male + alpha_urban * urban;
    double previous = 0.0;
    const double u = uniform(gen);
    int y = k;
    for (int r = 1; r < k; ++r) {
      const double scale = r - k / 2.0;
      const double cumulative =
          std::max(previous, logistic(intercepts[r - 1] + location + scale * dispersion));
      if (u <= cumulative) {
        y = r;
        break;
      }
      previous = cumulative;
    }
    csv += fmt::format("{},{:.1f},{},{},{:.1f}\n", y, age, male ? "male" : "female", urban, income);
  }

  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "cannot write " << out_path << "\n";
      return 1;
    }
    file << csv;
  }
  return 0;
}
