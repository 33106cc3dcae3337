#include <random>

#include "circbench/errors.hpp"
#include "circbench/interval.hpp"
#include "circbench/linsolve.hpp"
#include "circbench/modes.hpp"

namespace circbench::interval {

namespace {

std::map<std::string, Scalar> solve_point(const netgen::FamilySpec& spec) {
  ir::ConstraintSystem sys = ir::lower(netgen::build(spec));
  if (sys.disjunctions.empty()) return linsolve::solve_exact(sys).values;
  modes::SearchOptions options;
  options.check.backend = modes::Backend::Exact;
  modes::SearchResult r = modes::search_first(sys, modes::Strategy::standard(), options);
  return r.exact->values;
}

}  // namespace

std::map<std::string, ExactRange> range_oracle(const netgen::FamilySpec& spec, const Scalar& tolerance,
                                               int num_samples, std::uint64_t seed) {
  if (tolerance < 0 || tolerance >= 1) throw InvalidSpec("tolerance must lie in [0, 1)");
  netgen::FamilySpec base = spec;
  base.with_tolerance(0);
  base.validate();
  const std::size_t k = base.resistors.size();
  std::vector<Scalar> lo(k), width(k);
  for (std::size_t j = 0; j < k; ++j) {
    lo[j] = base.resistors[j].nominal * (1 - tolerance);
    width[j] = base.resistors[j].nominal * 2 * tolerance;
  }

  std::map<std::string, ExactRange> out;
  auto record = [&](const std::vector<Scalar>& fraction) {
    netgen::FamilySpec point = base;
    for (std::size_t j = 0; j < k; ++j) point.resistors[j].nominal = lo[j] + width[j] * fraction[j];
    for (const auto& [name, v] : solve_point(point)) {
      auto [it, fresh] = out.try_emplace(name, ExactRange{v, v});
      if (fresh) continue;
      if (v < it->second.lo) it->second.lo = v;
      if (v > it->second.hi) it->second.hi = v;
    }
  };

  std::vector<Scalar> fraction(k);
  for (unsigned long long mask = 0; mask < (1ull << k); ++mask) {
    for (std::size_t j = 0; j < k; ++j) fraction[j] = (mask >> j) & 1 ? 1 : 0;
    record(fraction);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> draw(0, 1000000);
  for (int s = 0; s < num_samples; ++s) {
    for (std::size_t j = 0; j < k; ++j) fraction[j] = ratio(draw(rng), 1000000);
    record(fraction);
  }
  return out;
}

}  // namespace circbench::interval
