// Command-line surface for the ALS classification toolkit: scene synthesis,
// feature extraction, tree training, classification, evaluation, radius
// optimization, and raster export.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alsc/cart.hpp"
#include "alsc/cloud.hpp"
#include "alsc/evaluation.hpp"
#include "alsc/features.hpp"
#include "alsc/ga.hpp"
#include "alsc/raster.hpp"
#include "alsc/sampling.hpp"
#include "alsc/spatial_index.hpp"
#include "alsc/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_cloud_auto(const alsc::PointCloud& cloud, const std::string& path,
                      bool binary) {
  if (binary || has_suffix(path, ".alsc")) {
    alsc::write_cloud_binary(cloud, path);
  } else {
    alsc::write_cloud_text(cloud, path);
  }
}

void write_features_auto(const alsc::FeatureMatrix& fm, const std::string& path,
                         bool binary) {
  if (binary || has_suffix(path, ".alsf")) {
    alsc::write_features_binary(fm, path);
  } else {
    alsc::write_features_text(fm, path);
  }
}

std::vector<int> read_labels(const alsc::PointCloud& cloud) {
  std::vector<int> labels(cloud.size(), -1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto code = cloud.class_code(i);
    if (code) labels[i] = *code;
  }
  return labels;
}

std::vector<int> read_prediction_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  if (!std::getline(in, header) || header != "predicted") {
    throw std::runtime_error(path + ": expected 'predicted' header");
  }
  std::vector<int> out;
  int code;
  while (in >> code) out.push_back(code);
  return out;
}

void write_prediction_file(const std::vector<int>& pred,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "predicted\n";
  for (int code : pred) out << code << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

// One "FeatureName radius" pair per line; '#' starts a comment.
std::map<std::string, double> read_radii_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, double> radii;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream row(line);
    std::string name;
    double radius;
    if (!(row >> name)) continue;
    if (!(row >> radius) || radius <= 0.0) {
      throw std::invalid_argument(path + ": bad radius for " + name);
    }
    radii[name] = radius;
  }
  return radii;
}

alsc::GAParams read_ga_params(const std::string& path) {
  alsc::GAParams p;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string key;
  double v;
  while (in >> key >> v) {
    if (key == "population") p.population = static_cast<int>(v);
    else if (key == "tournament") p.tournament = static_cast<int>(v);
    else if (key == "mutation") p.mutation_p = v;
    else if (key == "elite") p.elite = v;
    else if (key == "reseed") p.reseed = v;
    else if (key == "generations") p.generations = static_cast<int>(v);
    else throw std::invalid_argument(path + ": unknown parameter " + key);
  }
  p.validate();
  return p;
}

int run(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Airborne laser scanning point classification toolkit"};
  app.require_subcommand(1);

  const alsc::ClassTable table = alsc::ClassTable::standard();

  // ---- synth -------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a labeled scene");
  std::string synth_spec, synth_out;
  bool synth_binary = false;
  synth->add_option("spec", synth_spec, "Scene configuration file")->required();
  synth->add_option("out", synth_out, "Output cloud path")->required();
  synth->add_flag("--binary", synth_binary, "Write the binary cloud format");
  synth->callback([&] {
    std::exit(run([&] {
      const alsc::SceneSpec spec = alsc::SceneSpec::load(synth_spec);
      const alsc::PointCloud cloud = alsc::generate(spec);
      write_cloud_auto(cloud, synth_out, synth_binary);
      std::printf("points %zu\n", cloud.size());
      for (const auto& row : alsc::class_breakdown(cloud, table, 2)) {
        std::printf("%4d %-28s %10zu %6.2f%%\n", row.code, row.name.c_str(),
                    row.count, 100.0 * row.fraction);
      }
    }));
  });

  // ---- features ----------------------------------------------------------
  auto* feat = app.add_subcommand("features", "Extract per-point features");
  std::string feat_cloud, feat_out, feat_radii, feat_border = "none",
              feat_geometry = "cylinder";
  double feat_radius = 2.0;
  int feat_threads = 1;
  bool feat_binary = false;
  feat->add_option("cloud", feat_cloud, "Input cloud")->required();
  feat->add_option("out", feat_out, "Output feature table")->required();
  feat->add_option("--radius", feat_radius, "Uniform neighborhood radius (m)");
  feat->add_option("--radii-config", feat_radii,
                   "Per-feature radii file (name radius per line)");
  feat->add_option("--geometry", feat_geometry, "cylinder or sphere");
  feat->add_option("--border", feat_border, "none, beam, angle or both");
  feat->add_option("--threads", feat_threads, "Worker thread count");
  feat->add_flag("--binary", feat_binary, "Write the binary feature format");
  feat->callback([&] {
    std::exit(run([&] {
      const alsc::PointCloud cloud =
          alsc::read_cloud(feat_cloud, table).cloud;
      alsc::Geometry geom;
      if (feat_geometry == "cylinder") geom = alsc::Geometry::Cylinder;
      else if (feat_geometry == "sphere") geom = alsc::Geometry::Sphere;
      else throw std::invalid_argument("unknown geometry " + feat_geometry);
      std::vector<alsc::NeighborhoodSpec> specs =
          alsc::uniform_specs(feat_radius, geom);
      if (!feat_radii.empty()) {
        const auto radii = read_radii_config(feat_radii);
        for (auto& s : specs) {
          const auto it = radii.find(s.feature);
          if (it != radii.end()) s.size = it->second;
        }
      }
      const alsc::SpatialIndex index(cloud);
      const alsc::FeatureMatrix fm = alsc::feature_table(
          cloud, index, specs, alsc::border_mode_from_name(feat_border),
          feat_threads);
      write_features_auto(fm, feat_out, feat_binary);
      std::printf("rows %zu columns %zu invalid_entries %zu\n", fm.rows,
                  fm.columns.size(), fm.invalid_count());
    }));
  });

  // ---- train -------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train a classification tree");
  std::string train_cloud, train_features, train_out, train_split;
  int train_size = 50000, train_folds = 10, train_threads = 1;
  std::uint64_t train_seed = 1;
  bool train_no_prune = false;
  train->add_option("cloud", train_cloud, "Labeled cloud (truth source)")
      ->required();
  train->add_option("features", train_features, "Feature table")->required();
  train->add_option("out", train_out, "Output tree file")->required();
  train->add_option("--size", train_size, "Training set size (default 50000)");
  train->add_option("--seed", train_seed, "Sampling seed");
  train->add_option("--folds", train_folds, "Pruning cross-validation folds");
  train->add_flag("--no-prune", train_no_prune, "Skip cost-complexity pruning");
  train->add_option("--split-out", train_split, "Write the split plan here");
  train->add_option("--threads", train_threads, "Unused; reserved");
  train->callback([&] {
    std::exit(run([&] {
      const alsc::PointCloud cloud =
          alsc::read_cloud(train_cloud, table).cloud;
      const alsc::FeatureMatrix fm = alsc::read_features(train_features);
      if (fm.rows != cloud.size()) {
        throw std::invalid_argument(
            "feature table row count does not match the cloud");
      }
      std::vector<int> labels = read_labels(cloud);
      std::size_t labeled = 0;
      for (int l : labels) labeled += l >= 0;
      const int size =
          std::min<int>(train_size, static_cast<int>(labeled));
      const alsc::SplitPlan plan =
          alsc::stratified_sample(labels, size, train_seed);
      alsc::TrainingData data;
      data.features = &fm;
      data.labels = labels;
      data.weights.assign(fm.rows, 1.0);
      for (std::size_t i = 0; i < fm.rows; ++i) {
        const auto it = plan.weights.find(labels[i]);
        if (it != plan.weights.end()) data.weights[i] = it->second;
      }
      alsc::GrowControls controls;
      controls.cv_folds = train_folds;
      alsc::ClassificationTree tree =
          alsc::grow(data, plan.train_ids, controls);
      if (!train_no_prune) {
        tree = alsc::prune(tree, data, plan.train_ids, train_folds,
                           train_seed, controls);
      }
      alsc::write_tree(tree, train_out);
      if (!train_split.empty()) alsc::write_split_plan(plan, train_split);
      std::printf("training_points %zu leaves %zu\n", plan.train_ids.size(),
                  tree.leaf_count());
    }));
  });

  // ---- classify ----------------------------------------------------------
  auto* classify = app.add_subcommand("classify", "Apply a trained tree");
  std::string cls_features, cls_tree, cls_out;
  classify->add_option("features", cls_features, "Feature table")->required();
  classify->add_option("tree", cls_tree, "Tree file")->required();
  classify->add_option("out", cls_out, "Predicted class codes")->required();
  classify->callback([&] {
    std::exit(run([&] {
      const alsc::FeatureMatrix fm = alsc::read_features(cls_features);
      const alsc::ClassificationTree tree = alsc::read_tree(cls_tree);
      write_prediction_file(tree.predict(fm), cls_out);
      std::printf("classified %zu\n", fm.rows);
    }));
  });

  // ---- evaluate ----------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "Score predictions");
  std::string eval_cloud, eval_pred, eval_confusion;
  eval->add_option("cloud", eval_cloud, "Labeled cloud (truth)")->required();
  eval->add_option("predictions", eval_pred, "Prediction file")->required();
  eval->add_option("--confusion-out", eval_confusion,
                   "Write the confusion matrix here");
  eval->callback([&] {
    std::exit(run([&] {
      const alsc::PointCloud cloud = alsc::read_cloud(eval_cloud, table).cloud;
      const std::vector<int> pred = read_prediction_file(eval_pred);
      std::vector<int> truth = read_labels(cloud);
      if (truth.size() != pred.size()) {
        throw std::invalid_argument(
            "prediction count does not match the cloud");
      }
      std::vector<int> t2, p2;
      for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= 0) {
          t2.push_back(truth[i]);
          p2.push_back(pred[i]);
        }
      }
      const alsc::ConfusionMatrix m = alsc::confusion(t2, p2);
      std::printf("MCR %.3f\n", alsc::mcr(m));
      std::fputs(
          alsc::format_confusion_report(alsc::confusion_report(m, table))
              .c_str(),
          stdout);
      if (!eval_confusion.empty()) alsc::write_confusion(m, eval_confusion);
    }));
  });

  // ---- optimize-radii ----------------------------------------------------
  auto* opt = app.add_subcommand(
      "optimize-radii", "Optimize per-feature neighborhood radii");
  std::string opt_cloud, opt_params, opt_prefix = "ga";
  int opt_reps = 1, opt_sample = 20000, opt_train = 5000, opt_threads = 1;
  std::uint64_t opt_seed = 1;
  opt->add_option("cloud", opt_cloud, "Labeled cloud")->required();
  opt->add_option("--params", opt_params, "GA parameter file");
  opt->add_option("--replications", opt_reps, "Independent optimization runs");
  opt->add_option("--seed", opt_seed, "Base seed");
  opt->add_option("--sample", opt_sample, "Evaluation sample size");
  opt->add_option("--train-size", opt_train, "Training points per evaluation");
  opt->add_option("--threads", opt_threads, "Feature extraction threads");
  opt->add_option("--out-prefix", opt_prefix, "Output path prefix");
  opt->callback([&] {
    std::exit(run([&] {
      alsc::GAParams params;
      if (!opt_params.empty()) params = read_ga_params(opt_params);
      if (opt_reps < 1) throw std::invalid_argument("replications must be >= 1");
      alsc::PointCloud cloud = alsc::read_cloud(opt_cloud, table).cloud;
      if (cloud.size() > static_cast<std::size_t>(opt_sample)) {
        const std::vector<int> ids = alsc::simple_random_sample(
            cloud.size(), static_cast<std::size_t>(opt_sample), opt_seed);
        cloud = alsc::subset_cloud(cloud, ids);
      }
      alsc::GrowControls controls;
      controls.max_surrogates = 0;
      const alsc::FitnessContext ctx = alsc::build_fitness_context(
          cloud, opt_train, opt_seed, controls, opt_threads);
      std::vector<std::pair<alsc::Genome, double>> finals;
      for (int rep = 0; rep < opt_reps; ++rep) {
        params.seed = opt_seed + static_cast<std::uint64_t>(rep);
        const alsc::EvolveResult res = alsc::evolve(params, ctx);
        alsc::write_history(res.history, opt_prefix + "_history_" +
                                             std::to_string(rep) + ".txt");
        finals.emplace_back(res.best, res.best_fitness);
        std::printf("replication %d fitness %.6f genome", rep,
                    res.best_fitness);
        for (int a : res.best) std::printf(" %d", a);
        std::printf("\n");
      }
      std::ofstream genomes(opt_prefix + "_genomes.txt");
      genomes << "replication fitness";
      for (const std::string& f : ctx.features) genomes << " " << f;
      genomes << "\n";
      for (std::size_t rep = 0; rep < finals.size(); ++rep) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%zu %.17g", rep, finals[rep].second);
        genomes << buf;
        for (int a : finals[rep].first) {
          std::snprintf(buf, sizeof(buf), " %.1f", alsc::radius_of_allele(a));
          genomes << buf;
        }
        genomes << "\n";
      }
      if (opt_reps >= 2) {
        const alsc::StabilityReport report =
            alsc::stability_report(finals, ctx.features);
        alsc::write_stability_grid(report, opt_prefix + "_stability.txt");
      } else {
        std::fprintf(stderr,
                     "warning: stability grid needs >= 2 replications\n");
      }
    }));
  });

  // ---- hillshade ---------------------------------------------------------
  auto* shade = app.add_subcommand("hillshade", "Export a shaded relief grid");
  std::string sh_cloud, sh_out, sh_classes, sh_mode = "min";
  double sh_cell = 1.0, sh_azimuth = 315.0, sh_elevation = 45.0;
  shade->add_option("cloud", sh_cloud, "Input cloud")->required();
  shade->add_option("out", sh_out, "Output raster")->required();
  shade->add_option("--classes", sh_classes,
                    "Comma-separated class codes (default: all)");
  shade->add_option("--cell", sh_cell, "Cell size in meters");
  shade->add_option("--azimuth", sh_azimuth, "Light azimuth, degrees");
  shade->add_option("--elevation", sh_elevation, "Light elevation, degrees");
  shade->add_option("--mode", sh_mode, "min (terrain) or max (surface)");
  shade->callback([&] {
    std::exit(run([&] {
      const alsc::PointCloud cloud = alsc::read_cloud(sh_cloud, table).cloud;
      std::vector<int> filter;
      std::istringstream list(sh_classes);
      std::string tok;
      while (std::getline(list, tok, ',')) {
        if (!tok.empty()) filter.push_back(std::stoi(tok));
      }
      alsc::GridMode mode;
      if (sh_mode == "min") mode = alsc::GridMode::MinZ;
      else if (sh_mode == "max") mode = alsc::GridMode::MaxZ;
      else throw std::invalid_argument("unknown grid mode " + sh_mode);
      alsc::Raster dtm = alsc::grid_surface(cloud, sh_cell, mode, filter);
      alsc::fill_nearest(dtm);
      alsc::write_raster(alsc::hillshade(dtm, sh_azimuth, sh_elevation),
                         sh_out);
      std::printf("raster %dx%d cell %.3f\n", dtm.cols, dtm.rows, dtm.cell);
    }));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return kExitOk;
}
