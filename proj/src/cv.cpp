#include "licors/cv.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "licors/baselines.hpp"
#include "licors/simulate.hpp"
#include "licors/util.hpp"

namespace licors {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::pair<Field, Field> split_half(const Field& field) {
  const int T = field.T();
  if (T < 2) throw std::invalid_argument("split_half: need at least two steps");
  const int half = T / 2;
  return {field.time_slice(0, half), field.time_slice(half, T - half)};
}

EvalReport grid_search(const Field& field, const CvGrid& grid, uint64_t seed,
                       bool strict_split, int threads) {
  if (grid.h_p_values.empty() || grid.alpha_values.empty())
    throw std::invalid_argument("grid_search: empty grid");
  for (double a : grid.alpha_values)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("grid_search: alpha values must lie in (0, 1)");

  const int T = field.T();
  const int half = T / 2;
  Field train = field.time_slice(0, half);

  EvalReport report;
  int best_hp = 0;
  double best_alpha = 0.0;

  for (int h_p : grid.h_p_values) {
    FitConfig cfg;
    cfg.geometry = ConeGeometry{grid.c, h_p, grid.h_f, PresentIn::Future};
    cfg.mode = grid.mode;
    cfg.K = grid.K;
    cfg.k = grid.k;
    cfg.n_proj = grid.n_proj;
    cfg.threads = threads;
    // One stream per (seed, h_p): cells along the alpha axis share the
    // grouping, and a cell's result cannot depend on which other cells exist.
    cfg.seed = mix_seed(seed, static_cast<uint64_t>(h_p));

    std::string base_error;
    std::optional<FitBase> base;
    std::optional<ConeSet> test_cones;
    try {
      base = prepare_fit(train, cfg);
      // Strict protocol: cones from the second half only, so present times
      // start at half + h_p. Lenient: history may reach into the first half.
      int t_begin = strict_split ? half + h_p : half;
      if (t_begin >= T - grid.h_f)
        throw std::invalid_argument("grid_search: test half too short");
      Field slice = field.time_slice(t_begin - h_p, T - (t_begin - h_p));
      test_cones = extract_cones(slice, cfg.geometry);
      for (Coord& cd : test_cones->coords) cd.t += t_begin - h_p;
    } catch (const std::exception& e) {
      base_error = e.what();
    }

    for (double alpha : grid.alpha_values) {
      CvCell cell;
      cell.h_p = h_p;
      cell.alpha = alpha;
      if (!base_error.empty()) {
        cell.error = base_error;
        report.table.push_back(cell);
        continue;
      }
      try {
        FitReport fit = complete_fit(*base, alpha);
        EvalOutput eval = evaluate_cones(*test_cones, fit.model, threads);
        cell.test_mse = eval.mse;
        cell.m_hat = fit.n_states;
        cell.valid = true;
        bool better = false;
        if (report.chosen < 0) {
          better = true;
        } else {
          double cur = report.table[report.chosen].test_mse;
          if (cell.test_mse < cur) better = true;
          else if (cell.test_mse == cur &&
                   (h_p < best_hp || (h_p == best_hp && alpha > best_alpha)))
            better = true;
        }
        if (better) {
          report.chosen = static_cast<int>(report.table.size());
          best_hp = h_p;
          best_alpha = alpha;
          report.future_mse = eval.mse;
          report.chosen_model = fit.model;
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      report.table.push_back(cell);
    }
  }

  if (report.chosen >= 0) {
    const StateModel& m = report.chosen_model;
    EvalOutput in_eval =
        evaluate_model(field, m, m.geometry.h_p, half - m.geometry.h_f, threads);
    report.in_sample_mse = in_eval.mse;
  }
  return report;
}

double excess_risk(const EvalReport& next_report, int chosen_h_p,
                   double chosen_alpha) {
  double numerator = std::numeric_limits<double>::quiet_NaN();
  double denominator = std::numeric_limits<double>::infinity();
  for (const CvCell& cell : next_report.table) {
    if (!cell.valid) continue;
    denominator = std::min(denominator, cell.test_mse);
    if (cell.h_p == chosen_h_p && std::abs(cell.alpha - chosen_alpha) < 1e-12)
      numerator = cell.test_mse;
  }
  if (!std::isfinite(numerator) || !(denominator > 0.0))
    throw std::invalid_argument("excess_risk: chosen setting missing from the grid");
  return numerator / denominator;
}

CvStudy run_cv_study(int n_replicates, uint64_t seed, const CvStudyConfig& cfg) {
  if (n_replicates < 1) throw std::invalid_argument("run_cv_study: need replicates");
  CvStudy study;
  study.reports.reserve(n_replicates);
  for (int rep = 0; rep < n_replicates; ++rep) {
    SimOutput sim = simulate(cfg.n_space, cfg.T, cfg.burn_in,
                             mix_seed(seed, rep, 0x736d));
    EvalReport report = grid_search(sim.x, cfg.grid, mix_seed(seed, rep, 0x6376),
                                    cfg.strict_split, cfg.threads);
    if (report.chosen >= 0) {
      SimOutput indep = simulate(cfg.n_space, cfg.T, cfg.burn_in,
                                 mix_seed(seed, rep, 0x696e64));
      const StateModel& m = report.chosen_model;
      EvalOutput e = evaluate_model(indep.x, m, m.geometry.h_p,
                                    indep.x.T() - m.geometry.h_f, cfg.threads);
      report.independent_mse = e.mse;
      report.has_independent = true;
    }
    study.reports.push_back(std::move(report));
  }
  for (int i = 0; i + 1 < n_replicates; ++i) {
    EvalReport& cur = study.reports[i];
    const EvalReport& next = study.reports[i + 1];
    if (cur.chosen < 0 || next.chosen < 0) continue;
    double ratio = excess_risk(next, cur.chosen_cell().h_p,
                               cur.chosen_cell().alpha);
    cur.excess_risk_ratio = ratio;
    cur.has_excess_risk = true;
    study.excess_risks.push_back(ratio);
  }
  return study;
}

void write_cv_table(std::ostream& os, const std::vector<EvalReport>& reports) {
  os << "replicate,h_p,alpha,test_mse,m_hat\n";
  for (size_t rep = 0; rep < reports.size(); ++rep) {
    for (const CvCell& cell : reports[rep].table) {
      os << rep << ',' << cell.h_p << ',' << fmt(cell.alpha) << ','
         << (cell.valid ? fmt(cell.test_mse) : "nan") << ',' << cell.m_hat
         << "\n";
    }
  }
}

void write_excess_risk(std::ostream& os, const CvStudy& study) {
  os << "pair,hp_cv,alpha_cv,ratio\n";
  size_t pair = 0;
  for (size_t i = 0; i + 1 < study.reports.size(); ++i) {
    const EvalReport& cur = study.reports[i];
    if (cur.chosen < 0 || study.reports[i + 1].chosen < 0) continue;
    if (pair >= study.excess_risks.size()) break;
    os << i << ',' << cur.chosen_cell().h_p << ','
       << fmt(cur.chosen_cell().alpha) << ',' << fmt(study.excess_risks[pair])
       << "\n";
    ++pair;
  }
}

// ---------------------------------------------------------------------------
// Competition
// ---------------------------------------------------------------------------

namespace {

// Shared evaluation targets: all sites at times [t_begin, t_end).
struct TargetBlock {
  int t_begin = 0;
  int t_end = 0;
};

double field_mse(const Field& field, const TargetBlock& block,
                 const std::function<double(int r, int t)>& predict) {
  double sse = 0.0;
  int64_t n = 0;
  for (int t = block.t_begin; t < block.t_end; ++t) {
    for (int r = 0; r < field.n_space(); ++r) {
      double e = predict(r, t) - field.at(r, t);
      sse += e * e;
      ++n;
    }
  }
  return sse / static_cast<double>(n);
}

template <typename Model>
std::pair<double, double> baseline_in_out(const Model& model, const Field& x,
                                          const TargetBlock& in,
                                          const TargetBlock& out) {
  Eigen::VectorXd pred;
  int cached_t = -1;
  auto f = [&](int r, int t) {
    if (t != cached_t) {
      pred = baseline_predict(model, x, t);
      cached_t = t;
    }
    return pred[r];
  };
  double in_mse = field_mse(x, in, f);
  cached_t = -1;
  double out_mse = field_mse(x, out, f);
  return {in_mse, out_mse};
}

}  // namespace

CompetitionResult run_competition(int n_replicates, uint64_t seed,
                                  const CompetitionConfig& cfg) {
  if (n_replicates < 1)
    throw std::invalid_argument("run_competition: need replicates");
  CompetitionResult result;

  for (int rep = 0; rep < n_replicates; ++rep) {
    try {
      SimOutput sim = simulate(cfg.n_space, cfg.T, cfg.burn_in,
                               mix_seed(seed, rep, 0x736d));
      const Field& x = sim.x;
      const int T = x.T();
      const int half = T / 2;
      // In-sample targets skip the first steps so every method (AR up to lag
      // 3, cones with horizon h_p, the conditional mean needing two steps)
      // predicts the same cells.
      TargetBlock in{std::max(cfg.h_p, 3), half};
      TargetBlock out{half + cfg.h_p, T};
      TrainRange train{0, half};
      Field train_field = x.time_slice(0, half);

      auto push = [&](const std::string& method, const std::string& setting,
                      double in_mse, double out_mse) {
        result.rows.push_back({rep, method, setting, in_mse, out_mse});
      };

      // Exact conditional mean of the generator.
      {
        auto f = [&](int r, int t) { return sim.true_state_mean.at(r, t); };
        push("oracle", "", field_mse(x, in, f), field_mse(x, out, f));
      }

      // Direct-estimation variant.
      {
        FitConfig fc;
        fc.geometry = ConeGeometry{cfg.c, cfg.h_p, 0, PresentIn::Future};
        fc.mode = FitMode::DirectKnn;
        fc.k = cfg.k;
        fc.alpha = cfg.alpha;
        fc.seed = mix_seed(seed, rep, 0x6b6e6e);
        fc.threads = cfg.threads;
        FitReport fit = fit_licors(train_field, fc);
        double in_mse =
            evaluate_model(x, fit.model, in.t_begin, in.t_end, cfg.threads).mse;
        double out_mse =
            evaluate_model(x, fit.model, out.t_begin, out.t_end, cfg.threads).mse;
        char setting[64];
        std::snprintf(setting, sizeof setting, "k=%d;hp=%d;alpha=%g", cfg.k,
                      cfg.h_p, cfg.alpha);
        push("licors_knn", setting, in_mse, out_mse);
      }

      // Pre-clustered variant.
      {
        FitConfig fc;
        fc.geometry = ConeGeometry{cfg.c, cfg.h_p, 0, PresentIn::Future};
        fc.mode = FitMode::PreClustered;
        fc.K = cfg.K;
        fc.alpha = cfg.alpha;
        fc.seed = mix_seed(seed, rep, 0x636c75);
        fc.threads = cfg.threads;
        FitReport fit = fit_licors(train_field, fc);
        double in_mse =
            evaluate_model(x, fit.model, in.t_begin, in.t_end, cfg.threads).mse;
        double out_mse =
            evaluate_model(x, fit.model, out.t_begin, out.t_end, cfg.threads).mse;
        char setting[64];
        std::snprintf(setting, sizeof setting, "K=%d;hp=%d;alpha=%g", cfg.K,
                      cfg.h_p, cfg.alpha);
        push("licors_cluster", setting, in_mse, out_mse);
      }

      {
        SiteMeanModel m = fit_site_mean(x, train);
        auto [in_mse, out_mse] = baseline_in_out(m, x, in, out);
        push("site_mean", "", in_mse, out_mse);
      }
      {
        ArModel m = select_and_fit_ar(x, train);
        auto [in_mse, out_mse] = baseline_in_out(m, x, in, out);
        char setting[32];
        std::snprintf(setting, sizeof setting, "p=%d", m.p);
        push("ar", setting, in_mse, out_mse);
      }
      {
        PatchVarModel m = select_and_fit_var_lasso(x, train);
        auto [in_mse, out_mse] = baseline_in_out(m, x, in, out);
        char setting[64];
        std::snprintf(setting, sizeof setting, "p=%d;patch=%d;lambda=%.6g", m.p,
                      m.patch_size, m.lambda);
        push("var_lasso", setting, in_mse, out_mse);
      }
    } catch (const std::exception& e) {
      result.rows.push_back({rep, "error", e.what(),
                             std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN()});
    }
  }
  return result;
}

std::string CompetitionResult::to_csv() const {
  std::ostringstream os;
  os << "replicate,method,setting,in_mse,out_mse\n";
  for (const CompetitionRow& r : rows) {
    os << r.replicate << ',' << r.method << ',' << r.setting << ','
       << fmt(r.in_mse) << ',' << fmt(r.out_mse) << "\n";
  }
  return os.str();
}

}  // namespace licors
