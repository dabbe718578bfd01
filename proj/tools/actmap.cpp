// Command line front end: feature extraction, regression studies and
// dataset utilities. Every option may also come from a TOML file given with
// --config; options on the command line take precedence.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "actmap/actmap.hpp"

namespace {

struct RegressorFlags {
  std::string name = "gsvr";
  double c = 1.0;
  double epsilon = 0.1;
  double gamma = 0.0;
  double gpr_length_scale = 0.0;
  double gpr_signal_variance = 1.0;
  double gpr_alpha = 1.0;
  double gpr_noise = 0.05;
  bool grid = false;

  void add(CLI::App* app) {
    app->add_option("--regressor", name, "linsvr | gsvr | gpr")->check(CLI::IsMember({"linsvr", "gsvr", "gpr"}));
    app->add_option("--svr-c", c, "SVR box constraint C");
    app->add_option("--svr-epsilon", epsilon, "SVR tube width (standardized targets)");
    app->add_option("--svr-gamma", gamma, "RBF gamma; 0 = 1/(d*var)");
    app->add_option("--gpr-length-scale", gpr_length_scale, "RQ length scale; 0 = sqrt(d)");
    app->add_option("--gpr-signal-variance", gpr_signal_variance, "RQ signal variance");
    app->add_option("--gpr-alpha", gpr_alpha, "RQ mixture parameter");
    app->add_option("--gpr-noise", gpr_noise, "GPR noise variance");
    app->add_flag("--grid", grid, "hyperparameter grid search");
  }

  actmap::cmd::RegressorOptions options() const {
    actmap::cmd::RegressorOptions r;
    r.kind = actmap::parse_regressor(name);
    r.svr.c = c;
    r.svr.epsilon = epsilon;
    r.svr.gamma = gamma;
    r.gpr.kernel.length_scale = gpr_length_scale;
    r.gpr.kernel.signal_variance = gpr_signal_variance;
    r.gpr.kernel.alpha = gpr_alpha;
    r.gpr.noise = gpr_noise;
    r.grid = grid;
    return r;
  }
};

std::vector<int> parse_ratios(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      actmap::fail(actmap::ErrorKind::Validation, "bad train ratio '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace actmap;
  CLI::App app{"Activation-map feature IQA toolkit"};
  app.set_config("--config", "", "TOML file providing option values");
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = default_threads();
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  // extract
  auto* extract = app.add_subcommand("extract", "compute the feature cache for a manifest");
  cmd::ExtractOptions ex;
  std::string ex_metric = "haarpsi";
  extract->add_option("--net", ex.net, "weight archive directory")->required();
  extract->add_option("--manifest", ex.manifest, "manifest CSV")->required();
  extract->add_option("--metric", ex_metric, "psnr | ssim | haarpsi")->check(CLI::IsMember({"psnr", "ssim", "haarpsi"}));
  extract->add_option("--out", ex.out, "feature CSV to write (resumes if present)")->required();

  // crossval
  auto* crossval = app.add_subcommand("crossval", "reference-disjoint k-fold cross-validation");
  cmd::CrossvalOptions cv;
  RegressorFlags cv_reg;
  crossval->add_option("--features", cv.features, "feature CSV")->required();
  cv_reg.add(crossval);
  crossval->add_option("--folds", cv.protocol.folds, "folds per repetition")->check(CLI::Range(2, 1000));
  crossval->add_option("--reps", cv.protocol.repetitions, "repetitions")->check(CLI::PositiveNumber);
  crossval->add_option("--seed", cv.seed, "random seed");
  crossval->add_option("--out", cv.out, "report CSV")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "correlations versus training-set size");
  cmd::SweepOptions sw;
  RegressorFlags sw_reg;
  std::string ratios = "5,10,20,30,40,50,60,70,80";
  sweep->add_option("--features", sw.features, "feature CSV")->required();
  sw_reg.add(sweep);
  sweep->add_option("--train-ratios", ratios, "comma-separated training percentages (<= 95)");
  sweep->add_option("--reps", sw.repetitions, "repetitions per ratio")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sw.seed, "random seed");
  sweep->add_option("--out", sw.out, "sweep CSV")->required();

  // paramstudy
  auto* param = app.add_subcommand("paramstudy", "every metric x regressor combination");
  cmd::ParamStudyOptions ps;
  param->add_option("--manifest", ps.manifest, "manifest CSV")->required();
  param->add_option("--net", ps.net, "weight archive directory")->required();
  param->add_option("--work-dir", ps.work_dir, "directory for feature caches")->required();
  param->add_option("--folds", ps.protocol.folds, "folds per repetition")->check(CLI::Range(2, 1000));
  param->add_option("--reps", ps.protocol.repetitions, "repetitions")->check(CLI::PositiveNumber);
  param->add_option("--seed", ps.seed, "random seed");
  param->add_option("--out", ps.out, "study CSV")->required();

  // crossdb
  auto* crossdb = app.add_subcommand("crossdb", "train on one database, test on another");
  cmd::CrossDbOptions cd;
  RegressorFlags cd_reg;
  std::string cd_norm = "minmax";
  crossdb->add_option("--train-features", cd.train_features, "training feature CSV")->required();
  crossdb->add_option("--test-features", cd.test_features, "test feature CSV")->required();
  cd_reg.add(crossdb);
  crossdb->add_option("--mos-normalization", cd_norm, "none | minmax")->check(CLI::IsMember({"none", "minmax"}));
  crossdb->add_option("--out", cd.out, "report CSV")->required();

  // train / predict
  auto* train = app.add_subcommand("train", "fit a regressor on a feature file and save it");
  std::filesystem::path tr_features, tr_model;
  RegressorFlags tr_reg;
  train->add_option("--features", tr_features, "feature CSV")->required();
  tr_reg.add(train);
  train->add_option("--model", tr_model, "model file to write")->required();

  auto* predict = app.add_subcommand("predict", "score a feature file with a saved model");
  std::filesystem::path pr_model, pr_features, pr_out;
  predict->add_option("--model", pr_model, "model file")->required();
  predict->add_option("--features", pr_features, "feature CSV")->required();
  predict->add_option("--out", pr_out, "predictions CSV")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "write the synthetic benchmark dataset");
  std::filesystem::path gen_out;
  std::size_t gen_refs = 10;
  std::uint64_t gen_seed = 7;
  generate->add_option("--out", gen_out, "output directory")->required();
  generate->add_option("--references", gen_refs, "number of reference images (>= 5)");
  generate->add_option("--seed", gen_seed, "random seed");

  // repro-kadid10k
  auto* repro = app.add_subcommand("repro-kadid10k", "KADID-10k protocol check and optional full run");
  cmd::ReproOptions rp;
  repro->add_option("--kadid-dir", rp.kadid_dir, "directory with dmos.csv and images/")->required();
  repro->add_option("--net", rp.net, "weight archive directory (pretrained export)");
  repro->add_option("--out-dir", rp.out_dir, "output directory")->required();
  repro->add_option("--seed", rp.seed, "random seed");
  repro->add_flag("--check-only", rp.check_only, "only verify database shape and split protocol");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*extract) {
      ex.metric = parse_metric(ex_metric);
      ex.threads = threads;
      const auto r = cmd::extract(ex);
      std::cout << "computed " << r.rows_computed << " of " << r.rows_total << " rows -> " << ex.out.string() << '\n';
    } else if (*crossval) {
      cv.regressor = cv_reg.options();
      cv.threads = threads;
      cmd::print_table(cmd::crossval(cv), std::cout);
    } else if (*sweep) {
      sw.regressor = sw_reg.options();
      sw.train_ratios = parse_ratios(ratios);
      sw.threads = threads;
      for (const auto& row : cmd::sweep(sw)) {
        std::printf("ratio %3d%%  refs %3zu  PLCC %.4f  SROCC %.4f  KROCC %.4f\n", row.train_ratio,
                    row.train_references, row.overall.plcc, row.overall.srocc, row.overall.krocc);
      }
    } else if (*param) {
      ps.threads = threads;
      for (const auto& row : cmd::paramstudy(ps)) {
        std::printf("%-8s %-7s PLCC %.4f  SROCC %.4f  KROCC %.4f\n", std::string(to_string(row.metric)).c_str(),
                    std::string(to_string(row.regressor)).c_str(), row.overall.plcc, row.overall.srocc,
                    row.overall.krocc);
      }
    } else if (*crossdb) {
      cd.regressor = cd_reg.options();
      cd.normalization = parse_mos_normalization(cd_norm);
      cmd::print_table(cmd::crossdb(cd), std::cout);
    } else if (*train) {
      const auto model = cmd::train_model(tr_features, tr_reg.options(), tr_model);
      std::cout << "trained " << to_string(model.kind) << " on " << model.dimension() << " features -> "
                << tr_model.string() << '\n';
    } else if (*predict) {
      const auto p = cmd::predict_file(pr_model, pr_features, pr_out);
      std::cout << "wrote " << p.size() << " predictions -> " << pr_out.string() << '\n';
    } else if (*generate) {
      const auto manifest = synthetic::generate_dataset(gen_out, gen_refs, gen_seed);
      std::cout << "wrote " << manifest.rows.size() << " pairs -> " << (gen_out / "manifest.csv").string() << '\n';
    } else if (*repro) {
      rp.threads = threads;
      cmd::repro_kadid10k(rp, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
