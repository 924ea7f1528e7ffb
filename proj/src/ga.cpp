#include "alsc/ga.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "alsc/evaluation.hpp"
#include "alsc/sampling.hpp"
#include "alsc/spatial_index.hpp"

namespace alsc {

double radius_of_allele(int allele) {
  if (allele < kAlleleMin || allele > kAlleleMax) {
    throw std::invalid_argument("allele out of range: " +
                                std::to_string(allele));
  }
  return 1.0 + 0.5 * (allele - 1);
}

std::map<std::string, double> decode(const Genome& genome,
                                     const std::vector<std::string>& features) {
  if (genome.size() != features.size()) {
    throw std::invalid_argument("genome length does not match feature list");
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < genome.size(); ++i) {
    out[features[i]] = radius_of_allele(genome[i]);
  }
  return out;
}

void GAParams::validate() const {
  if (population < 2) throw std::invalid_argument("population must be >= 2");
  if (tournament < 1 || tournament > population) {
    throw std::invalid_argument("tournament size out of range");
  }
  if (mutation_p < 0.0 || mutation_p > 1.0) {
    throw std::invalid_argument("mutation probability out of range");
  }
  if (elite < 0.0 || reseed < 0.0 || elite + reseed >= 1.0) {
    throw std::invalid_argument("elite + reseed proportions must be < 1");
  }
  if (generations < 0) throw std::invalid_argument("negative generation count");
}

bool FitnessCache::lookup(const Genome& g, double& fitness) {
  const auto it = map_.find(g);
  if (it == map_.end()) {
    ++misses_;
    return false;
  }
  ++hits_;
  fitness = it->second;
  return true;
}

void FitnessCache::store(const Genome& g, double fitness) {
  map_[g] = fitness;
}

// ---------------------------------------------------------------------------
// Fitness

FeatureMatrix FitnessContext::assemble(const Genome& genome) const {
  if (genome.size() != features.size()) {
    throw std::invalid_argument("genome length does not match context");
  }
  std::vector<std::string> cols = features;
  for (const auto& [name, col] : passthrough) cols.push_back(name);
  FeatureMatrix fm;
  fm.init(std::move(cols), n_rows);
  for (std::size_t f = 0; f < features.size(); ++f) {
    const int a = genome[f];
    if (a < kAlleleMin || a > kAlleleMax) {
      throw std::invalid_argument("allele out of range");
    }
    const auto& stack = stacks[f];
    if (stack.size() != static_cast<std::size_t>(kAlleleMax)) {
      throw std::invalid_argument("feature stack missing radius variants");
    }
    const auto& col = stack[a - 1];
    for (std::size_t r = 0; r < n_rows; ++r) {
      fm.set(r, f, col[r],
             std::isnan(col[r]) ? Cause::MissingInput : Cause::Valid);
    }
  }
  for (std::size_t p = 0; p < passthrough.size(); ++p) {
    const auto& col = passthrough[p].second;
    const std::size_t c = features.size() + p;
    for (std::size_t r = 0; r < n_rows; ++r) {
      fm.set(r, c, col[r],
             std::isnan(col[r]) ? Cause::MissingInput : Cause::Valid);
    }
  }
  return fm;
}

FitnessContext build_fitness_context(const PointCloud& cloud, int train_size,
                                     std::uint64_t split_seed,
                                     const GrowControls& controls,
                                     int n_threads) {
  FitnessContext ctx;
  ctx.features = neighborhood_feature_names();
  ctx.n_rows = cloud.size();
  ctx.controls = controls;
  ctx.stacks.assign(ctx.features.size(),
                    std::vector<std::vector<double>>(kAlleleMax));

  const SpatialIndex index(cloud);
  for (int a = kAlleleMin; a <= kAlleleMax; ++a) {
    const FeatureMatrix fm = feature_table(
        cloud, index, uniform_specs(radius_of_allele(a)), BorderMode::None,
        n_threads);
    for (std::size_t f = 0; f < ctx.features.size(); ++f) {
      const int c = fm.col_index(ctx.features[f]);
      std::vector<double> col(ctx.n_rows);
      for (std::size_t r = 0; r < ctx.n_rows; ++r) col[r] = fm.at(r, c);
      ctx.stacks[f][a - 1] = std::move(col);
    }
    if (a == kAlleleMin) {
      for (std::size_t c = 0; c < fm.columns.size(); ++c) {
        if (std::find(ctx.features.begin(), ctx.features.end(),
                      fm.columns[c]) != ctx.features.end()) {
          continue;
        }
        std::vector<double> col(ctx.n_rows);
        for (std::size_t r = 0; r < ctx.n_rows; ++r) col[r] = fm.at(r, c);
        ctx.passthrough.emplace_back(fm.columns[c], std::move(col));
      }
    }
  }

  ctx.labels.resize(ctx.n_rows, -1);
  for (std::size_t i = 0; i < ctx.n_rows; ++i) {
    const auto code = cloud.class_code(i);
    if (code) ctx.labels[i] = *code;
  }
  const SplitPlan plan = stratified_sample(ctx.labels, train_size, split_seed);
  ctx.train_rows = plan.train_ids;
  ctx.test_rows = plan.test_ids;
  ctx.weights.assign(ctx.n_rows, 1.0);
  for (std::size_t i = 0; i < ctx.n_rows; ++i) {
    const auto it = plan.weights.find(ctx.labels[i]);
    if (it != plan.weights.end()) ctx.weights[i] = it->second;
  }
  return ctx;
}

double fitness(const Genome& genome, const FitnessContext& ctx,
               FitnessCache* cache) {
  double cached;
  if (cache && cache->lookup(genome, cached)) return cached;
  const FeatureMatrix fm = ctx.assemble(genome);
  TrainingData data{&fm, ctx.labels, ctx.weights};
  const ClassificationTree tree = grow(data, ctx.train_rows, ctx.controls);
  const std::vector<int> pred = tree.predict(fm, ctx.test_rows);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < ctx.test_rows.size(); ++i) {
    if (pred[i] != ctx.labels[ctx.test_rows[i]]) ++wrong;
  }
  const double e =
      static_cast<double>(wrong) / static_cast<double>(ctx.test_rows.size());
  if (cache) cache->store(genome, e);
  return e;
}

// ---------------------------------------------------------------------------
// Operators

Genome random_genome(Rng& rng, int length) {
  Genome g(length);
  for (int& a : g) {
    a = kAlleleMin +
        static_cast<int>(uniform_index(rng, kAlleleMax - kAlleleMin + 1));
  }
  return g;
}

namespace {

// Tournament of `size` contestants drawn with replacement; minimum MCR
// wins, ties to the earlier draw.
int tournament_select(const std::vector<double>& fitnesses, int size, Rng& rng) {
  int best = static_cast<int>(uniform_index(rng, fitnesses.size()));
  for (int t = 1; t < size; ++t) {
    const int c = static_cast<int>(uniform_index(rng, fitnesses.size()));
    if (fitnesses[c] < fitnesses[best]) best = c;
  }
  return best;
}

int mutate_allele(int current, Rng& rng) {
  int a = kAlleleMin + static_cast<int>(uniform_index(rng, kAlleleMax - kAlleleMin));
  if (a >= current) ++a;
  return a;
}

}  // namespace

std::vector<Genome> step(const std::vector<Genome>& population,
                         const std::vector<double>& fitnesses,
                         const GAParams& params, Rng& rng) {
  if (population.empty()) throw std::invalid_argument("empty population");
  if (population.size() != fitnesses.size()) {
    throw std::invalid_argument("population/fitness size mismatch");
  }
  const int n = static_cast<int>(population.size());
  const int length = static_cast<int>(population[0].size());
  const int n_elite = static_cast<int>(std::ceil(params.elite * n));
  const int n_reseed = static_cast<int>(std::ceil(params.reseed * n));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitnesses[a] < fitnesses[b]; });

  std::vector<Genome> next;
  next.reserve(n);
  for (int i = 0; i < std::min(n_elite, n); ++i) {
    next.push_back(population[order[i]]);
  }
  for (int i = 0; i < n_reseed && static_cast<int>(next.size()) < n; ++i) {
    next.push_back(random_genome(rng, length));
  }
  while (static_cast<int>(next.size()) < n) {
    const int p1 = tournament_select(fitnesses, params.tournament, rng);
    const int p2 = tournament_select(fitnesses, params.tournament, rng);
    const int cut = 1 + static_cast<int>(uniform_index(rng, length - 1));
    Genome child(length);
    for (int i = 0; i < cut; ++i) child[i] = population[p1][i];
    for (int i = cut; i < length; ++i) child[i] = population[p2][i];
    for (int i = 0; i < length; ++i) {
      if (uniform01(rng) < params.mutation_p) {
        child[i] = mutate_allele(child[i], rng);
      }
    }
    next.push_back(std::move(child));
  }
  return next;
}

EvolveResult evolve(const GAParams& params, const FitnessFn& fn,
                    int genome_length) {
  params.validate();
  Rng rng(params.seed);
  std::vector<Genome> pop;
  pop.reserve(params.population);
  for (int i = 0; i < params.population; ++i) {
    pop.push_back(random_genome(rng, genome_length));
  }

  EvolveResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();

  auto record = [&](int gen, const std::vector<double>& fitnesses) {
    double best = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int best_i = 0;
    for (std::size_t i = 0; i < fitnesses.size(); ++i) {
      sum += fitnesses[i];
      if (fitnesses[i] < best) {
        best = fitnesses[i];
        best_i = static_cast<int>(i);
      }
    }
    result.history.push_back({gen, best, sum / fitnesses.size()});
    if (best < result.best_fitness) {
      result.best_fitness = best;
      result.best = pop[best_i];
    }
  };

  std::vector<double> fitnesses(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) fitnesses[i] = fn(pop[i]);
  record(0, fitnesses);
  for (int gen = 1; gen <= params.generations; ++gen) {
    pop = step(pop, fitnesses, params, rng);
    for (std::size_t i = 0; i < pop.size(); ++i) fitnesses[i] = fn(pop[i]);
    record(gen, fitnesses);
  }
  return result;
}

EvolveResult evolve(const GAParams& params, const FitnessContext& ctx) {
  FitnessCache cache;
  EvolveResult result =
      evolve(params, [&](const Genome& g) { return fitness(g, ctx, &cache); },
             static_cast<int>(ctx.features.size()));
  result.cache_hits = cache.hits();
  result.cache_misses = cache.misses();
  return result;
}

// ---------------------------------------------------------------------------
// Stability

StabilityReport stability_report(
    const std::vector<std::pair<Genome, double>>& replications,
    const std::vector<std::string>& features, double tol) {
  if (replications.size() < 2) {
    throw std::invalid_argument("stability report needs >= 2 replications");
  }
  StabilityReport report;
  report.best_fitness = std::numeric_limits<double>::infinity();
  for (const auto& [g, f] : replications) {
    report.best_fitness = std::min(report.best_fitness, f);
  }
  std::vector<const Genome*> optimal;
  for (const auto& [g, f] : replications) {
    if (f <= report.best_fitness + tol) optimal.push_back(&g);
  }
  report.optimal_replications = static_cast<int>(optimal.size());

  report.grid.assign(features.size(),
                     std::vector<double>(optimal.size(), 0.0));
  for (std::size_t f = 0; f < features.size(); ++f) {
    FeatureStability fs;
    fs.feature = features[f];
    for (std::size_t r = 0; r < optimal.size(); ++r) {
      const int allele = (*optimal[r])[f];
      fs.allele_frequency[allele] += 1.0;
      report.grid[f][r] = radius_of_allele(allele);
    }
    double best_freq = 0.0;
    for (auto& [allele, count] : fs.allele_frequency) {
      count /= static_cast<double>(optimal.size());
      if (count > best_freq) {
        best_freq = count;
        fs.modal_allele = allele;
      }
    }
    fs.stable = best_freq >= 0.9 - 1e-12;
    report.features.push_back(std::move(fs));
  }
  return report;
}

void write_history(const std::vector<GenerationStats>& history,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "generation best mean\n";
  char buf[96];
  for (const GenerationStats& g : history) {
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g\n", g.generation, g.best,
                  g.mean);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_stability_grid(const StabilityReport& report,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "feature";
  for (int r = 0; r < report.optimal_replications; ++r) {
    out << " rep" << r;
  }
  out << " stable\n";
  for (std::size_t f = 0; f < report.features.size(); ++f) {
    out << report.features[f].feature;
    for (double radius : report.grid[f]) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " %.1f", radius);
      out << buf;
    }
    out << " " << (report.features[f].stable ? 1 : 0) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace alsc
