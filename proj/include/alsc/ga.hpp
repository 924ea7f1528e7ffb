#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "alsc/cart.hpp"
#include "alsc/random.hpp"

namespace alsc {

// Integer genome: one allele (1..11) per neighborhood-dependent feature,
// encoding a cylinder radius of 1.0 + 0.5 * (allele - 1) meters.
using Genome = std::vector<int>;

constexpr int kAlleleMin = 1;
constexpr int kAlleleMax = 11;

double radius_of_allele(int allele);

// feature name -> radius in meters.
std::map<std::string, double> decode(const Genome& genome,
                                     const std::vector<std::string>& features);

struct GAParams {
  int population = 100;
  int tournament = 5;
  double mutation_p = 0.05;
  double elite = 0.1;
  double reseed = 0.1;
  int generations = 500;
  std::uint64_t seed = 1;

  void validate() const;
};

class FitnessCache {
 public:
  bool lookup(const Genome& g, double& fitness);
  void store(const Genome& g, double fitness);
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::map<Genome, double> map_;
  std::size_t hits_ = 0, misses_ = 0;
};

// Precomputed feature stacks plus a fixed train/test split: genome
// evaluation reduces to column selection and one tree training.
struct FitnessContext {
  std::vector<std::string> features;  // genome order, length = genome length
  // stacks[f][a] = column of feature f at allele a+1, length n_rows.
  std::vector<std::vector<std::vector<double>>> stacks;
  // Extra columns independent of the genome (echo attributes, border terms).
  std::vector<std::pair<std::string, std::vector<double>>> passthrough;
  std::size_t n_rows = 0;
  std::vector<int> labels;       // per row
  std::vector<double> weights;   // per row
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  GrowControls controls;

  FeatureMatrix assemble(const Genome& genome) const;
};

// Extracts all 11 radius variants of the 13 neighborhood features from the
// cloud, draws one stratified train/test split of `train_size` points, and
// packages everything for genome evaluation.
FitnessContext build_fitness_context(const PointCloud& cloud, int train_size,
                                     std::uint64_t split_seed,
                                     const GrowControls& controls,
                                     int n_threads = 1);

// Held-out MCR of a tree trained on the context's fixed split.
double fitness(const Genome& genome, const FitnessContext& ctx,
               FitnessCache* cache = nullptr);

using FitnessFn = std::function<double(const Genome&)>;

Genome random_genome(Rng& rng, int length);

// One generation: elite clones + fresh reseeds + tournament/crossover/
// mutation offspring. Population size is preserved.
std::vector<Genome> step(const std::vector<Genome>& population,
                         const std::vector<double>& fitnesses,
                         const GAParams& params, Rng& rng);

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
};

struct EvolveResult {
  Genome best;
  double best_fitness = 0.0;
  std::vector<GenerationStats> history;
  std::size_t cache_hits = 0, cache_misses = 0;
};

EvolveResult evolve(const GAParams& params, const FitnessFn& fn,
                    int genome_length);
EvolveResult evolve(const GAParams& params, const FitnessContext& ctx);

// ---------------------------------------------------------------------------
// Replication stability

struct FeatureStability {
  std::string feature;
  std::map<int, double> allele_frequency;  // among optimal replications
  int modal_allele = 0;
  bool stable = false;  // >= 90% of optimal replications agree
};

struct StabilityReport {
  std::vector<FeatureStability> features;
  // grid[f][rep] = radius chosen by replication rep for feature f
  // (optimal replications only).
  std::vector<std::vector<double>> grid;
  double best_fitness = 0.0;
  int optimal_replications = 0;
};

// `tol`: replications within tol of the best fitness count as optimal.
StabilityReport stability_report(
    const std::vector<std::pair<Genome, double>>& replications,
    const std::vector<std::string>& features, double tol = 1e-12);

void write_history(const std::vector<GenerationStats>& history,
                   const std::string& path);
void write_stability_grid(const StabilityReport& report,
                          const std::string& path);

}  // namespace alsc
