// Command-line driver: simulate the benchmark field, fit models, predict,
// evaluate, cross-validate control settings, and run the forecasting
// competition. Every run writes a manifest with the fully resolved
// configuration so results are reproducible from the manifest alone.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "licors/cv.hpp"
#include "licors/field.hpp"
#include "licors/fit.hpp"
#include "licors/simulate.hpp"
#include "licors/states.hpp"
#include "licors/util.hpp"

namespace {

using licors::Boundary;
using licors::Field;
using licors::FitMode;
using nlohmann::ordered_json;

int env_threads() {
  const char* env = std::getenv("LICORS_THREADS");
  if (!env) return 0;
  return std::atoi(env);
}

void write_manifest(const std::string& path, const ordered_json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest: " + path);
  os << j.dump(2) << "\n";
}

Field load_field(const std::string& path, Boundary boundary) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return Field::load_csv_1d(path, boundary);
  return Field::load_stf1(path, boundary);
}

Boundary parse_boundary(const std::string& s) {
  if (s == "wrap") return Boundary::Wrap;
  if (s == "truncate") return Boundary::Truncate;
  throw CLI::ValidationError("--boundary", "expected wrap or truncate");
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void write_predictions_csv(const std::string& path,
                           const licors::EvalOutput& eval) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write: " + path);
  const int n_f = static_cast<int>(eval.forecast.predictions.cols());
  os << "r,t";
  for (int j = 0; j < n_f; ++j) os << ",pred_" << j;
  os << ",state\n";
  char buf[64];
  for (int64_t i = 0; i < eval.forecast.predictions.rows(); ++i) {
    os << eval.coords[i].r << ',' << eval.coords[i].t;
    for (int j = 0; j < n_f; ++j) {
      std::snprintf(buf, sizeof buf, "%.12g", eval.forecast.predictions(i, j));
      os << ',' << buf;
    }
    os << ',' << eval.forecast.per_point_state[i] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive-state reconstruction for spatio-temporal fields"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  int threads = env_threads();
  app.add_option("--threads", threads,
                 "Worker thread cap (0 = hardware; env LICORS_THREADS)");

  // --- simulate ------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a benchmark field");
  int sim_space = 100, sim_steps = 200, sim_burn = 100;
  uint64_t sim_seed = 0;
  std::string sim_dir = ".";
  bool sim_csv = false;
  sim_cmd->add_option("--space", sim_space, "Sites on the ring");
  sim_cmd->add_option("--steps", sim_steps, "Kept time steps");
  sim_cmd->add_option("--burn-in", sim_burn, "Discarded initial steps");
  sim_cmd->add_option("--seed", sim_seed, "Master seed");
  sim_cmd->add_option("--out-dir", sim_dir, "Output directory");
  sim_cmd->add_flag("--csv", sim_csv, "Also write plot-ready CSV copies");

  // --- fit -----------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Estimate a state model");
  std::string fit_input, fit_output = "model.lsm", fit_mode = "knn";
  std::string fit_boundary = "wrap", fit_present = "future";
  int fit_hp = 2, fit_hf = 0, fit_c = 1, fit_k = 50, fit_K = 200;
  int fit_max_iter = 50, fit_nproj = 10;
  double fit_delta = 1.0, fit_alpha = 0.05;
  uint64_t fit_seed = 0;
  bool fit_train_half = false;
  fit_cmd->add_option("input", fit_input, "Field file (.stf or .csv)")->required();
  fit_cmd->add_option("--hp", fit_hp, "Past horizon");
  fit_cmd->add_option("--hf", fit_hf, "Future horizon");
  fit_cmd->add_option("--c", fit_c, "Propagation speed");
  fit_cmd->add_option("--present", fit_present, "Present cell side: future|past");
  fit_cmd->add_option("--mode", fit_mode, "knn | cluster | delta");
  fit_cmd->add_option("--k", fit_k, "Neighbors (knn mode)");
  fit_cmd->add_option("--K", fit_K, "Clusters (cluster mode)");
  fit_cmd->add_option("--delta", fit_delta, "Ball radius (delta mode)");
  fit_cmd->add_option("--alpha", fit_alpha, "Test level for merging")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
  fit_cmd->add_option("--seed", fit_seed, "Seed");
  fit_cmd->add_option("--max-iter", fit_max_iter, "Lloyd iteration cap");
  fit_cmd->add_option("--n-proj", fit_nproj, "Projections for n_f > 1");
  fit_cmd->add_option("--boundary", fit_boundary, "wrap | truncate");
  fit_cmd->add_flag("--train-half", fit_train_half,
                    "Fit on the first half of the time axis only");
  fit_cmd->add_option("-o,--output", fit_output, "Model file");

  // --- predict ---------------------------------------------------------
  auto* pred_cmd = app.add_subcommand("predict", "Forecast cones of a field");
  std::string pred_model, pred_input, pred_output = "predictions.csv";
  std::string pred_boundary = "wrap";
  int pred_from = -1, pred_to = -1;
  pred_cmd->add_option("model", pred_model, "Model file")->required();
  pred_cmd->add_option("input", pred_input, "Field file")->required();
  pred_cmd->add_option("--t-from", pred_from, "First present time (default h_p)");
  pred_cmd->add_option("--t-to", pred_to, "One past the last present time");
  pred_cmd->add_option("--boundary", pred_boundary, "wrap | truncate");
  pred_cmd->add_option("-o,--output", pred_output, "Predictions CSV");

  // --- evaluate --------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "Out-of-sample error of a model");
  std::string eval_model, eval_input, eval_boundary = "wrap";
  bool eval_strict = true, eval_lenient = false;
  eval_cmd->add_option("model", eval_model, "Model file")->required();
  eval_cmd->add_option("input", eval_input, "Field file")->required();
  eval_cmd->add_flag("--strict-split", eval_strict,
                     "Test cones strictly inside the second half (default)");
  eval_cmd->add_flag("--lenient-split", eval_lenient,
                     "Let test cones use the last h_p training slices");
  eval_cmd->add_option("--boundary", eval_boundary, "wrap | truncate");

  // --- cv --------------------------------------------------------------
  auto* cv_cmd = app.add_subcommand("cv", "Cross-validate control settings");
  std::string cv_input, cv_mode = "knn", cv_boundary = "wrap";
  std::string cv_output = "cv_table.csv", cv_er_output = "excess_risk.csv";
  std::vector<int> cv_hp{1, 2, 3};
  std::vector<double> cv_alpha{0.3, 0.2, 0.15, 0.1, 0.05, 0.01, 0.001};
  int cv_c = 1, cv_hf = 0, cv_k = 50, cv_K = 200;
  int cv_replicates = 0, cv_space = 100, cv_steps = 200, cv_burn = 100;
  uint64_t cv_seed = 0;
  bool cv_lenient = false;
  cv_cmd->add_option("input", cv_input, "Field file (omit with --replicates)");
  cv_cmd->add_option("--hp", cv_hp, "Past horizons")->delimiter(',');
  cv_cmd->add_option("--alpha", cv_alpha, "Test levels")->delimiter(',');
  cv_cmd->add_option("--c", cv_c, "Propagation speed");
  cv_cmd->add_option("--hf", cv_hf, "Future horizon");
  cv_cmd->add_option("--mode", cv_mode, "knn | cluster");
  cv_cmd->add_option("--k", cv_k, "Neighbors (knn mode)");
  cv_cmd->add_option("--K", cv_K, "Clusters (cluster mode)");
  cv_cmd->add_option("--seed", cv_seed, "Seed");
  cv_cmd->add_flag("--lenient-split", cv_lenient,
                 "Let test cones use the last h_p training slices");
  cv_cmd->add_option("--replicates", cv_replicates,
                     "Simulate this many fields instead of reading one");
  cv_cmd->add_option("--space", cv_space, "Sites (with --replicates)");
  cv_cmd->add_option("--steps", cv_steps, "Steps (with --replicates)");
  cv_cmd->add_option("--burn-in", cv_burn, "Burn-in (with --replicates)");
  cv_cmd->add_option("-o,--output", cv_output, "Grid table CSV");
  cv_cmd->add_option("-e,--excess-output", cv_er_output,
                     "Excess-risk CSV (with --replicates)");
  cv_cmd->add_option("--boundary", cv_boundary, "wrap | truncate");

  // --- compete -----------------------------------------------------------
  auto* comp_cmd = app.add_subcommand("compete", "Forecasting competition");
  int comp_replicates = 10, comp_space = 100, comp_steps = 200, comp_burn = 100;
  int comp_hp = 2, comp_k = 50, comp_K = 200;
  double comp_alpha = 0.05;
  uint64_t comp_seed = 0;
  std::string comp_output = "competition.csv";
  comp_cmd->add_option("--replicates", comp_replicates, "Replicates");
  comp_cmd->add_option("--seed", comp_seed, "Master seed");
  comp_cmd->add_option("--space", comp_space, "Sites");
  comp_cmd->add_option("--steps", comp_steps, "Steps");
  comp_cmd->add_option("--burn-in", comp_burn, "Burn-in");
  comp_cmd->add_option("--hp", comp_hp, "Past horizon");
  comp_cmd->add_option("--k", comp_k, "Neighbors, direct variant");
  comp_cmd->add_option("--K", comp_K, "Clusters, pre-clustered variant");
  comp_cmd->add_option("--alpha", comp_alpha, "Test level");
  comp_cmd->add_option("-o,--output", comp_output, "Competition CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) {
      licors::SimOutput sim =
          licors::simulate(sim_space, sim_steps, sim_burn, sim_seed);
      std::string x_path = join_path(sim_dir, "x.stf");
      std::string d_path = join_path(sim_dir, "d.stf");
      std::string o_path = join_path(sim_dir, "oracle.stf");
      sim.x.save_stf1(x_path);
      sim.d.save_stf1(d_path);
      sim.true_state_mean.save_stf1(o_path);
      if (sim_csv) {
        sim.x.save_csv_1d(join_path(sim_dir, "x.csv"));
        sim.d.save_csv_1d(join_path(sim_dir, "d.csv"));
        sim.true_state_mean.save_csv_1d(join_path(sim_dir, "oracle.csv"));
      }
      ordered_json m;
      m["command"] = "simulate";
      m["space"] = sim_space;
      m["steps"] = sim_steps;
      m["burn_in"] = sim_burn;
      m["seed"] = sim_seed;
      m["csv"] = sim_csv;
      m["outputs"] = {x_path, d_path, o_path};
      write_manifest(join_path(sim_dir, "manifest.json"), m);
      std::printf("wrote %s, %s, %s\n", x_path.c_str(), d_path.c_str(),
                  o_path.c_str());
    } else if (*fit_cmd) {
      Field field = load_field(fit_input, parse_boundary(fit_boundary));
      if (fit_train_half) field = field.time_slice(0, field.T() / 2);
      licors::FitConfig cfg;
      cfg.geometry = {fit_c, fit_hp, fit_hf,
                      fit_present == "past" ? licors::PresentIn::Past
                                            : licors::PresentIn::Future};
      if (fit_mode == "knn") cfg.mode = FitMode::DirectKnn;
      else if (fit_mode == "cluster") cfg.mode = FitMode::PreClustered;
      else if (fit_mode == "delta") cfg.mode = FitMode::DirectDelta;
      else throw CLI::ValidationError("--mode", "expected knn, cluster or delta");
      cfg.k = fit_k;
      cfg.K = fit_K;
      cfg.delta = fit_delta;
      cfg.alpha = fit_alpha;
      cfg.seed = fit_seed;
      cfg.kmeans_max_iter = fit_max_iter;
      cfg.n_proj = fit_nproj;
      cfg.threads = threads;
      licors::FitReport report = licors::fit_licors(field, cfg);
      report.model.save(fit_output);
      report.model.save_text(fit_output + ".json");
      ordered_json m;
      m["command"] = "fit";
      m["input"] = fit_input;
      m["train_half"] = fit_train_half;
      m["boundary"] = fit_boundary;
      m["cone"] = {{"c", fit_c}, {"h_p", fit_hp}, {"h_f", fit_hf},
                   {"present_in", fit_present}};
      m["mode"] = fit_mode;
      m["k"] = fit_k;
      m["K"] = fit_K;
      m["delta"] = fit_delta;
      m["alpha"] = fit_alpha;
      m["seed"] = fit_seed;
      m["threads"] = threads;
      m["outputs"] = {fit_output, fit_output + ".json"};
      write_manifest(fit_output + ".manifest.json", m);
      std::printf("states=%d tests=%lld passes=%d", report.n_states,
                  static_cast<long long>(report.tests_run), report.passes);
      if (cfg.mode == FitMode::PreClustered)
        std::printf(" max_cluster_diameter=%.6g", report.max_cluster_diameter);
      std::printf("\nwrote %s\n", fit_output.c_str());
    } else if (*pred_cmd) {
      licors::StateModel model = licors::StateModel::load(pred_model);
      Field field = load_field(pred_input, parse_boundary(pred_boundary));
      int t_from = pred_from >= 0 ? pred_from : model.geometry.h_p;
      int t_to = pred_to >= 0 ? pred_to : field.T() - model.geometry.h_f;
      licors::EvalOutput eval =
          licors::evaluate_model(field, model, t_from, t_to, threads);
      write_predictions_csv(pred_output, eval);
      ordered_json m;
      m["command"] = "predict";
      m["model"] = pred_model;
      m["input"] = pred_input;
      m["t_from"] = t_from;
      m["t_to"] = t_to;
      m["threads"] = threads;
      m["outputs"] = {pred_output};
      write_manifest(pred_output + ".manifest.json", m);
      std::printf("rows=%lld mse=%.12g\nwrote %s\n",
                  static_cast<long long>(eval.n_rows), eval.mse,
                  pred_output.c_str());
    } else if (*eval_cmd) {
      licors::StateModel model = licors::StateModel::load(eval_model);
      Field field = load_field(eval_input, parse_boundary(eval_boundary));
      const int half = field.T() / 2;
      int t_from = eval_lenient ? half : half + model.geometry.h_p;
      int t_to = field.T() - model.geometry.h_f;
      licors::EvalOutput eval =
          licors::evaluate_model(field, model, t_from, t_to, threads);
      ordered_json m;
      m["command"] = "evaluate";
      m["model"] = eval_model;
      m["input"] = eval_input;
      m["split"] = eval_lenient ? "lenient" : "strict";
      m["t_from"] = t_from;
      m["t_to"] = t_to;
      m["out_of_sample_mse"] = eval.mse;
      m["rows"] = eval.n_rows;
      write_manifest("evaluate.manifest.json", m);
      std::printf("out_of_sample_mse=%.12g rows=%lld t=[%d,%d)\n", eval.mse,
                  static_cast<long long>(eval.n_rows), t_from, t_to);
    } else if (*cv_cmd) {
      licors::CvGrid grid;
      grid.h_p_values = cv_hp;
      grid.alpha_values = cv_alpha;
      grid.c = cv_c;
      grid.h_f = cv_hf;
      grid.k = cv_k;
      grid.K = cv_K;
      if (cv_mode == "knn") grid.mode = FitMode::DirectKnn;
      else if (cv_mode == "cluster") grid.mode = FitMode::PreClustered;
      else throw CLI::ValidationError("--mode", "expected knn or cluster");

      ordered_json m;
      m["command"] = "cv";
      m["mode"] = cv_mode;
      m["h_p"] = cv_hp;
      m["alpha"] = cv_alpha;
      m["k"] = cv_k;
      m["K"] = cv_K;
      m["seed"] = cv_seed;
      m["split"] = cv_lenient ? "lenient" : "strict";
      m["threads"] = threads;

      if (cv_replicates > 0) {
        licors::CvStudyConfig cfg;
        cfg.grid = grid;
        cfg.n_space = cv_space;
        cfg.T = cv_steps;
        cfg.burn_in = cv_burn;
        cfg.strict_split = !cv_lenient;
        cfg.threads = threads;
        licors::CvStudy study = licors::run_cv_study(cv_replicates, cv_seed, cfg);
        std::ofstream table(cv_output);
        licors::write_cv_table(table, study.reports);
        std::ofstream er(cv_er_output);
        licors::write_excess_risk(er, study);
        m["replicates"] = cv_replicates;
        m["space"] = cv_space;
        m["steps"] = cv_steps;
        m["burn_in"] = cv_burn;
        m["outputs"] = {cv_output, cv_er_output};
        write_manifest(cv_output + ".manifest.json", m);
        for (size_t i = 0; i < study.reports.size(); ++i) {
          const licors::EvalReport& r = study.reports[i];
          if (r.chosen < 0) { std::printf("replicate %zu: no valid cell\n", i); continue; }
          std::printf(
              "replicate %zu: h_p=%d alpha=%g test_mse=%.6g m=%d indep_mse=%.6g\n",
              i, r.chosen_cell().h_p, r.chosen_cell().alpha,
              r.chosen_cell().test_mse, r.chosen_cell().m_hat,
              r.independent_mse);
        }
        std::printf("wrote %s, %s\n", cv_output.c_str(), cv_er_output.c_str());
      } else {
        if (cv_input.empty())
          throw CLI::ValidationError("input", "field file or --replicates required");
        Field field = load_field(cv_input, parse_boundary(cv_boundary));
        licors::EvalReport report =
            licors::grid_search(field, grid, cv_seed, !cv_lenient, threads);
        std::ofstream table(cv_output);
        licors::write_cv_table(table, {report});
        m["input"] = cv_input;
        m["outputs"] = {cv_output};
        write_manifest(cv_output + ".manifest.json", m);
        if (report.chosen >= 0) {
          std::printf(
              "chosen: h_p=%d alpha=%g test_mse=%.6g m=%d in_sample_mse=%.6g\n",
              report.chosen_cell().h_p, report.chosen_cell().alpha,
              report.chosen_cell().test_mse, report.chosen_cell().m_hat,
              report.in_sample_mse);
        } else {
          std::printf("no grid cell produced a model\n");
        }
        std::printf("wrote %s\n", cv_output.c_str());
      }
    } else if (*comp_cmd) {
      licors::CompetitionConfig cfg;
      cfg.n_space = comp_space;
      cfg.T = comp_steps;
      cfg.burn_in = comp_burn;
      cfg.h_p = comp_hp;
      cfg.alpha = comp_alpha;
      cfg.k = comp_k;
      cfg.K = comp_K;
      cfg.threads = threads;
      licors::CompetitionResult res =
          licors::run_competition(comp_replicates, comp_seed, cfg);
      std::ofstream os(comp_output);
      os << res.to_csv();
      ordered_json m;
      m["command"] = "compete";
      m["replicates"] = comp_replicates;
      m["seed"] = comp_seed;
      m["space"] = comp_space;
      m["steps"] = comp_steps;
      m["burn_in"] = comp_burn;
      m["h_p"] = comp_hp;
      m["alpha"] = comp_alpha;
      m["k"] = comp_k;
      m["K"] = comp_K;
      m["threads"] = threads;
      m["outputs"] = {comp_output};
      write_manifest(comp_output + ".manifest.json", m);
      std::printf("wrote %s (%zu rows)\n", comp_output.c_str(), res.rows.size());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
