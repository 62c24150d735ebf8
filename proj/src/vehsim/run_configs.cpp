#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "rfe/vehsim.h"

namespace rfe::vehsim {

std::vector<double> default_mu_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(std::round((0.20 + 0.05 * i) * 100.0) / 100.0);
  return g;
}

std::vector<RunConfig> sample_run_configs(const road::RoadSection& section,
                                          road::Scenario scenario, int n_runs,
                                          std::uint64_t seed, const SamplingOptions& opt) {
  const auto grid = opt.mu_grid.empty() ? default_mu_grid() : opt.mu_grid;
  const int levels = static_cast<int>(grid.size());
  if (n_runs <= 0 || n_runs % levels != 0) {
    throw std::invalid_argument("sample_run_configs: n_runs must be a positive multiple of " +
                                std::to_string(levels));
  }
  if (!(opt.perception_lo > 0) || opt.perception_hi < opt.perception_lo) {
    throw std::invalid_argument("sample_run_configs: bad perception range");
  }
  if (!(opt.wear_lo > 0) || opt.wear_hi < opt.wear_lo) {
    throw std::invalid_argument("sample_run_configs: bad wear range");
  }
  const double rated = section.rated_speed_kmh;
  const double lo = rated * (1.0 - opt.speed_spread);
  const double hi = rated * (1.0 + opt.speed_spread);
  const std::vector<double> knots{lo, rated, hi};
  const std::vector<double> weights{0.0, 1.0, 0.0};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wear(opt.wear_lo, opt.wear_hi);
  std::piecewise_linear_distribution<double> speed(knots.begin(), knots.end(), weights.begin());
  std::uniform_int_distribution<size_t> pick_offset(0, opt.split_offsets.empty()
                                                           ? 0
                                                           : opt.split_offsets.size() - 1);
  std::bernoulli_distribution coin(0.5);

  const auto name = std::string(road::to_string(scenario));
  const int per_level = n_runs / levels;
  std::vector<RunConfig> out;
  out.reserve(static_cast<size_t>(n_runs));
  for (int li = 0; li < levels; ++li) {
    for (int k = 0; k < per_level; ++k) {
      RunConfig c;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s_%05d", name.c_str(), static_cast<int>(out.size()));
      c.run_id = buf;
      c.scenario = scenario;
      c.mu_base = grid[static_cast<size_t>(li)];
      c.wear = wear(rng);
      c.target_speed_kmh = speed(rng);
      c.seed = rng();
      {
        // Own stream, so the perception draw leaves the other samples untouched.
        std::mt19937_64 prng(c.seed ^ 0x7065726365707431ULL);
        c.grip_perception = std::uniform_real_distribution<double>(opt.perception_lo,
                                                                   opt.perception_hi)(prng);
      }
      if (scenario == road::Scenario::s_turn_split_mu && !opt.split_offsets.empty()) {
        // The grid value is the slippery curve; the other half is grippier.
        const double high = c.mu_base + opt.split_offsets[pick_offset(rng)];
        const double half = 0.5 * section.length;
        MuPatch p;
        p.mu_base = high;
        if (coin(rng)) {
          p.s_from = half;  // slippery first curve
          p.s_to = 1e9;
        } else {
          p.s_from = -1e9;  // slippery second curve
          p.s_to = half;
        }
        c.patches.push_back(p);
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace rfe::vehsim
