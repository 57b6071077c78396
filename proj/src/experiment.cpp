// Copyright 2026 The FedLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedldp/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fedldp/errors.hpp"

namespace fedldp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void check_keys(const json& object, const char* where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string(where) + ": unknown key '" + item.key() +
                        "'");
    }
  }
}

SyntheticSpec parse_synthetic(const json& node) {
  check_keys(node, "synthetic", {"kind", "n", "m", "d", "seed"});
  SyntheticSpec spec;
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "quadratic_means") {
    spec.kind = SyntheticKind::kQuadraticMeans;
  } else if (kind == "logistic_separable") {
    spec.kind = SyntheticKind::kLogisticSeparable;
  } else {
    throw ConfigError("synthetic.kind must be quadratic_means or "
                      "logistic_separable");
  }
  spec.num_workers = node.at("n").get<int>();
  spec.samples_per_worker = node.at("m").get<int>();
  spec.dim = node.at("d").get<int>();
  spec.seed = node.value("seed", std::uint64_t{0});
  return spec;
}

PartitionPlan parse_partition(const json& node) {
  check_keys(node, "partition", {"n", "m", "strategy", "seed"});
  PartitionPlan plan;
  plan.num_workers = node.at("n").get<int>();
  plan.samples_per_worker = node.at("m").get<int>();
  const std::string strategy = node.value("strategy", "uniform_random");
  if (strategy == "uniform_random") {
    plan.strategy = PartitionStrategy::kUniformRandom;
  } else if (strategy == "label_sorted") {
    plan.strategy = PartitionStrategy::kLabelSorted;
  } else {
    throw ConfigError("partition.strategy must be uniform_random or "
                      "label_sorted");
  }
  plan.seed = node.value("seed", std::uint64_t{1});
  return plan;
}

RegularizerConfig parse_regularizer(const json& node) {
  check_keys(node, "regularizer", {"kind", "alpha", "omega"});
  RegularizerConfig cfg;
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "none") {
    cfg.kind = RegKind::kNone;
  } else if (kind == "box") {
    cfg.kind = RegKind::kBoxIndicator;
    cfg.alpha = node.at("alpha").get<double>();
  } else if (kind == "weighted_l1_box") {
    cfg.kind = RegKind::kWeightedL1Box;
    cfg.alpha = node.at("alpha").get<double>();
    const json& omega = node.at("omega");
    if (omega.is_number()) {
      cfg.omega_uniform = omega.get<double>();
    } else {
      cfg.omega = omega.get<std::vector<double>>();
    }
  } else {
    throw ConfigError("regularizer.kind must be none, box or "
                      "weighted_l1_box");
  }
  return cfg;
}

double sample_std(const std::vector<double>& values, double mean) {
  if (values.size() < 2) {
    return 0.0;
  }
  double sum_sq = 0.0;
  for (double v : values) {
    sum_sq += (v - mean) * (v - mean);
  }
  return std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) {
    th.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

void write_file(const fs::path& path, const std::string& contents) {
  if (!path.parent_path().empty()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::ios_base::failure("cannot open '" + path.string() +
                                 "' for writing");
  }
  out << contents;
  if (!out) {
    throw std::ios_base::failure("failed writing '" + path.string() + "'");
  }
}

struct RepeatResults {
  std::vector<MetricSeries> series;  // by repeat index
};

RepeatResults run_repeats(const ExperimentConfig& config,
                          const PreparedExperiment& prepared,
                          const NoiseSchedule& schedule, int rounds,
                          const Vector& reference, int jobs) {
  RepeatResults results;
  results.series.resize(config.repeats);
  parallel_for(config.repeats, jobs, [&](int r) {
    RunConfig rc;
    rc.problem = &prepared.problem;
    rc.schedule = schedule;
    rc.step_size = prepared.gamma;
    rc.rounds = rounds;
    rc.seed = config.base_seed + static_cast<std::uint64_t>(r);
    rc.form = config.form;
    rc.metric_ref = reference;
    rc.gamma_policy = config.gamma_policy;
    rc.metric_stride = config.metric_stride;
    results.series[r] = execute(rc).metrics;
  });
  return results;
}

ExperimentConfig extract_config(const json& root);

std::string metrics_csv(const MetricSeries& series) {
  std::string out = "t,optimality,consensus,mean_error,cumulative_rho\n";
  for (const MetricRow& row : series.rows) {
    out += std::to_string(row.round);
    out += ',';
    out += format_double(row.optimality);
    out += ',';
    out += format_double(row.consensus);
    out += ',';
    out += format_double(row.mean_error);
    out += ',';
    out += format_double(row.cumulative_rho);
    out += '\n';
  }
  return out;
}

std::string aggregate_csv(const RepeatResults& results) {
  const std::size_t rows = results.series.front().rows.size();
  std::string out =
      "t,optimality_mean,optimality_std,consensus_mean,consensus_std,"
      "mean_error_mean,mean_error_std,cumulative_rho\n";
  const int repeats = static_cast<int>(results.series.size());
  std::vector<double> optimality(repeats), consensus(repeats),
      mean_error(repeats);
  for (std::size_t k = 0; k < rows; ++k) {
    for (int r = 0; r < repeats; ++r) {
      const MetricRow& row = results.series[r].rows[k];
      optimality[r] = row.optimality;
      consensus[r] = row.consensus;
      mean_error[r] = row.mean_error;
    }
    auto mean_of = [&](const std::vector<double>& v) {
      double sum = 0.0;
      for (double x : v) sum += x;
      return sum / static_cast<double>(v.size());
    };
    const double opt_mean = mean_of(optimality);
    const double con_mean = mean_of(consensus);
    const double err_mean = mean_of(mean_error);
    const MetricRow& first = results.series.front().rows[k];
    out += std::to_string(first.round);
    out += ',';
    out += format_double(opt_mean);
    out += ',';
    out += format_double(sample_std(optimality, opt_mean));
    out += ',';
    out += format_double(con_mean);
    out += ',';
    out += format_double(sample_std(consensus, con_mean));
    out += ',';
    out += format_double(err_mean);
    out += ',';
    out += format_double(sample_std(mean_error, err_mean));
    out += ',';
    out += format_double(first.cumulative_rho);
    out += '\n';
  }
  return out;
}

}  // namespace

Regularizer RegularizerConfig::materialize(int dim) const {
  switch (kind) {
    case RegKind::kNone:
      return Regularizer::none();
    case RegKind::kBoxIndicator:
      return Regularizer::box(alpha);
    case RegKind::kWeightedL1Box:
      if (omega_uniform) {
        return Regularizer::weighted_l1_box(*omega_uniform, dim, alpha);
      }
      if (!omega || static_cast<int>(omega->size()) != dim) {
        throw ConfigError("regularizer.omega length must equal the dimension");
      }
      return Regularizer::weighted_l1_box(
          Eigen::Map<const Vector>(omega->data(), dim), alpha);
  }
  throw ConfigError("unknown regularizer kind");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  try {
    return extract_config(root);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") +
                      e.what());
  }
}

namespace {

ExperimentConfig extract_config(const json& root) {
  check_keys(root, "config",
             {"dataset", "synthetic", "dim_override", "normalize_features",
              "partition", "epsilon", "delta", "gamma", "T", "schedule",
              "repeats", "base_seed", "output", "l2_coeff", "loss",
              "regularizer", "smooth_box_alpha", "grad_bound", "x_star",
              "solver_tol", "metric_stride", "form", "gamma_policy", "phi1"});

  ExperimentConfig cfg;
  if (root.contains("dataset")) {
    cfg.dataset_path = root.at("dataset").get<std::string>();
  }
  if (root.contains("synthetic")) {
    cfg.synthetic = parse_synthetic(root.at("synthetic"));
  }
  if (cfg.dataset_path.has_value() == cfg.synthetic.has_value()) {
    throw ConfigError("config needs exactly one of 'dataset' or 'synthetic'");
  }
  if (root.contains("dim_override")) {
    cfg.dim_override = root.at("dim_override").get<int>();
  }
  cfg.normalize_features = root.value("normalize_features", false);
  if (root.contains("partition")) {
    cfg.partition_plan = parse_partition(root.at("partition"));
  }
  if (cfg.dataset_path && !cfg.partition_plan) {
    throw ConfigError("'dataset' requires a 'partition' plan");
  }

  cfg.epsilon = root.at("epsilon").get<double>();
  cfg.delta = root.at("delta").get<double>();
  if (!(cfg.epsilon > 0.0) || !(cfg.delta > 0.0) || !(cfg.delta < 1.0)) {
    throw ConfigError("need epsilon > 0 and delta in (0, 1)");
  }
  if (root.contains("gamma")) {
    cfg.gamma = root.at("gamma").get<double>();
  }
  cfg.t_values = root.at("T").get<std::vector<int>>();
  if (cfg.t_values.empty()) {
    throw ConfigError("'T' must list at least one round count");
  }
  for (int t : cfg.t_values) {
    if (t < 1) {
      throw ConfigError("every T must be >= 1");
    }
  }
  const std::string mode = root.value("schedule", "dynamic");
  if (mode == "dynamic") {
    cfg.schedule_mode = ScheduleMode::kDynamic;
  } else if (mode == "static") {
    cfg.schedule_mode = ScheduleMode::kStatic;
  } else {
    throw ConfigError("schedule must be dynamic or static");
  }
  cfg.repeats = root.value("repeats", 20);
  if (cfg.repeats < 1) {
    throw ConfigError("repeats must be >= 1");
  }
  cfg.base_seed = root.value("base_seed", std::uint64_t{1});
  cfg.output = root.value("output", std::string("out"));

  cfg.l2_coeff = root.value("l2_coeff", 0.0);
  const std::string loss = root.value(
      "loss", cfg.synthetic &&
                      cfg.synthetic->kind == SyntheticKind::kQuadraticMeans
                  ? "quadratic"
                  : "logistic");
  if (loss == "logistic") {
    cfg.loss = LossFamily::kLogisticL2;
  } else if (loss == "quadratic") {
    cfg.loss = LossFamily::kQuadratic;
  } else {
    throw ConfigError("loss must be logistic or quadratic");
  }
  if (root.contains("regularizer")) {
    cfg.regularizer = parse_regularizer(root.at("regularizer"));
  }
  cfg.smooth_box_alpha = root.value("smooth_box_alpha", 1000.0);
  if (!(cfg.smooth_box_alpha > 0.0)) {
    throw ConfigError("smooth_box_alpha must be positive");
  }
  if (root.contains("grad_bound")) {
    cfg.grad_bound = root.at("grad_bound").get<double>();
  }
  if (root.contains("x_star")) {
    cfg.x_star_path = root.at("x_star").get<std::string>();
  }
  cfg.solver_tol = root.value("solver_tol", 1e-10);
  cfg.metric_stride = root.value("metric_stride", 1);
  const std::string form = root.value("form", "lambda");
  if (form == "lambda") {
    cfg.form = IterationForm::kLambda;
  } else if (form == "compact") {
    cfg.form = IterationForm::kCompact;
  } else {
    throw ConfigError("form must be lambda or compact");
  }
  const std::string policy = root.value("gamma_policy", "reject");
  if (policy == "reject") {
    cfg.gamma_policy = GammaPolicy::kReject;
  } else if (policy == "warn") {
    cfg.gamma_policy = GammaPolicy::kWarn;
  } else {
    throw ConfigError("gamma_policy must be reject or warn");
  }
  cfg.phi1 = root.value("phi1", 1.0);
  return cfg;
}

}  // namespace

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

PreparedExperiment prepare(const ExperimentConfig& config) {
  std::vector<WorkerDataset> workers;
  std::optional<Vector> closed_form;
  if (config.dataset_path) {
    Dataset dataset =
        parse_libsvm_file(*config.dataset_path, config.dim_override);
    if (config.normalize_features) {
      scale_features_unit(dataset);
    }
    workers = partition(dataset, *config.partition_plan);
  } else {
    SyntheticData data =
        synthesize(config.synthetic->kind, config.synthetic->num_workers,
                   config.synthetic->samples_per_worker, config.synthetic->dim,
                   config.synthetic->seed);
    workers = std::move(data.workers);
    closed_form = std::move(data.x_star);
  }
  const int dim = workers.front().dim;
  Regularizer reg = config.regularizer.materialize(dim);
  if (!reg.bounded() && !config.grad_bound) {
    // Assumption-preserving wrap: a (wide) box keeps iterates bounded and
    // makes the gradient bound finite.
    reg = Regularizer::box(config.smooth_box_alpha);
  }
  PreparedExperiment prepared;
  prepared.problem = make_problem(std::move(workers), config.loss,
                                  config.l2_coeff, std::move(reg),
                                  config.grad_bound);
  prepared.closed_form_x_star = std::move(closed_form);
  const double cap =
      std::min(0.25, 1.0 / prepared.problem.constants.smoothness);
  prepared.gamma = config.gamma.value_or(cap);
  prepared.ctx.step_size = prepared.gamma;
  prepared.ctx.grad_bound = prepared.problem.constants.grad_bound;
  prepared.ctx.num_workers = prepared.problem.num_workers();
  prepared.ctx.samples_per_worker = prepared.problem.samples_per_worker();
  prepared.budget = PrivacyBudget::from_eps_delta(config.epsilon,
                                                  config.delta);
  return prepared;
}

Vector resolve_reference(const ExperimentConfig& config,
                         const PreparedExperiment& prepared) {
  if (config.x_star_path) {
    const SolveReport report = read_solve_report(*config.x_star_path);
    if (report.x_star.size() != prepared.problem.dim()) {
      throw ConfigError("x* artifact dimension does not match the problem");
    }
    return report.x_star;
  }
  return solve(prepared.problem, config.solver_tol).x_star;
}

NoiseSchedule build_schedule(const ExperimentConfig& config,
                             const PreparedExperiment& prepared, int rounds) {
  NoiseSchedule schedule =
      config.schedule_mode == ScheduleMode::kStatic
          ? static_schedule(rounds, prepared.budget.rho_tgt, prepared.ctx)
          : dynamic_schedule(rounds, prepared.gamma,
                             prepared.problem.constants.strong_convexity,
                             prepared.budget.rho_tgt, prepared.ctx);
  const PrivacyBudget realized =
      audit_schedule(schedule, prepared.ctx, config.delta);
  if (realized.epsilon > config.epsilon + 1e-9) {
    throw ConfigError("schedule audit exceeds the configured budget: " +
                      format_double(realized.epsilon) + " > " +
                      format_double(config.epsilon));
  }
  return schedule;
}

void cmd_run(const ExperimentConfig& config, int jobs) {
  const PreparedExperiment prepared = prepare(config);
  const Vector reference = resolve_reference(config, prepared);
  for (int rounds : config.t_values) {
    const NoiseSchedule schedule = build_schedule(config, prepared, rounds);
    const PrivacyBudget realized =
        audit_schedule(schedule, prepared.ctx, config.delta);
    const RepeatResults results =
        run_repeats(config, prepared, schedule, rounds, reference, jobs);
    const fs::path out_dir(config.output);
    for (int r = 0; r < config.repeats; ++r) {
      write_file(out_dir / ("run_T" + std::to_string(rounds) + "_rep" +
                            std::to_string(r) + ".csv"),
                 metrics_csv(results.series[r]));
    }
    write_file(out_dir / ("run_T" + std::to_string(rounds) + "_agg.csv"),
               aggregate_csv(results));
    json meta;
    meta["rounds"] = rounds;
    meta["gamma"] = prepared.gamma;
    meta["repeats"] = config.repeats;
    meta["base_seed"] = config.base_seed;
    meta["rho"] = realized.rho_tgt;
    meta["realized_epsilon"] = realized.epsilon;
    meta["delta"] = realized.delta;
    meta["schedule"] = {{"mode", to_string(schedule.mode)},
                        {"decay_rate", schedule.decay_rate},
                        {"variances", schedule.variances}};
    write_file(out_dir / ("run_T" + std::to_string(rounds) + "_meta.json"),
               meta.dump(2));
  }
}

std::vector<SweepRow> cmd_sweep_t(const ExperimentConfig& config, int jobs) {
  const PreparedExperiment prepared = prepare(config);
  const Vector reference = resolve_reference(config, prepared);
  std::vector<SweepRow> rows;
  rows.reserve(config.t_values.size());
  for (int rounds : config.t_values) {
    const NoiseSchedule schedule = build_schedule(config, prepared, rounds);
    const PrivacyBudget realized =
        audit_schedule(schedule, prepared.ctx, config.delta);
    const RepeatResults results =
        run_repeats(config, prepared, schedule, rounds, reference, jobs);
    std::vector<double> finals(config.repeats);
    for (int r = 0; r < config.repeats; ++r) {
      finals[r] = results.series[r].rows.back().optimality;
    }
    double mean = 0.0;
    for (double v : finals) mean += v;
    mean /= static_cast<double>(finals.size());
    SweepRow row;
    row.rounds = rounds;
    row.final_optimality_mean = mean;
    row.final_optimality_std = sample_std(finals, mean);
    row.final_optimality_var =
        row.final_optimality_std * row.final_optimality_std;
    row.realized_epsilon = realized.epsilon;
    rows.push_back(row);
  }
  std::string csv =
      "T,final_optimality_mean,final_optimality_std,final_optimality_var,"
      "realized_epsilon\n";
  for (const SweepRow& row : rows) {
    csv += std::to_string(row.rounds);
    csv += ',';
    csv += format_double(row.final_optimality_mean);
    csv += ',';
    csv += format_double(row.final_optimality_std);
    csv += ',';
    csv += format_double(row.final_optimality_var);
    csv += ',';
    csv += format_double(row.realized_epsilon);
    csv += '\n';
  }
  write_file(fs::path(config.output) / "sweep.csv", csv);
  return rows;
}

std::string cmd_audit(const ExperimentConfig& config) {
  const PreparedExperiment prepared = prepare(config);
  const int rounds = config.t_values.front();
  const NoiseSchedule schedule = build_schedule(config, prepared, rounds);
  const std::vector<double> rho_t = per_round_rho(schedule, prepared.ctx);
  const PrivacyBudget realized =
      audit_schedule(schedule, prepared.ctx, config.delta);
  json report;
  report["rho"] = realized.rho_tgt;
  report["epsilon"] = realized.epsilon;
  report["delta"] = realized.delta;
  report["per_round_rho"] = rho_t;
  report["schedule"] = {{"mode", to_string(schedule.mode)},
                        {"decay_rate", schedule.decay_rate},
                        {"variances", schedule.variances}};
  report["min_rounds"] =
      min_rounds(prepared.budget, prepared.ctx,
                 prepared.problem.constants.strong_convexity, prepared.gamma,
                 prepared.problem.dim(), config.phi1);
  return report.dump(2);
}

SolveReport cmd_solve_ref(const ExperimentConfig& config) {
  const PreparedExperiment prepared = prepare(config);
  const SolveReport report = solve(prepared.problem, config.solver_tol);
  write_solve_report((fs::path(config.output) / "x_star.json").string(),
                     report);
  return report;
}

void cmd_synth(const ExperimentConfig& config) {
  if (!config.synthetic) {
    throw ConfigError("synth requires a 'synthetic' block");
  }
  const SyntheticData data =
      synthesize(config.synthetic->kind, config.synthetic->num_workers,
                 config.synthetic->samples_per_worker, config.synthetic->dim,
                 config.synthetic->seed);
  Dataset flat;
  flat.dim = config.synthetic->dim;
  for (const WorkerDataset& w : data.workers) {
    flat.samples.insert(flat.samples.end(), w.samples.begin(),
                        w.samples.end());
  }
  const fs::path out_dir(config.output);
  write_file(out_dir / "synthetic.libsvm", serialize_libsvm(flat));
  if (data.x_star) {
    json artifact;
    artifact["x_star"] =
        std::vector<double>(data.x_star->data(),
                            data.x_star->data() + data.x_star->size());
    artifact["residual"] = 0.0;
    artifact["iterations"] = 0;
    write_file(out_dir / "x_star_closed_form.json", artifact.dump(2));
  }
}

void write_solve_report(const std::string& path, const SolveReport& report) {
  json artifact;
  artifact["x_star"] = std::vector<double>(
      report.x_star.data(), report.x_star.data() + report.x_star.size());
  artifact["residual"] = report.residual;
  artifact["iterations"] = report.iterations;
  write_file(path, artifact.dump(2));
}

SolveReport read_solve_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open x* artifact '" + path + "'");
  }
  json artifact;
  try {
    in >> artifact;
  } catch (const json::exception& e) {
    throw ParseError(0, "x* artifact is not valid JSON: " +
                            std::string(e.what()));
  }
  SolveReport report;
  const std::vector<double> values =
      artifact.at("x_star").get<std::vector<double>>();
  report.x_star =
      Eigen::Map<const Vector>(values.data(),
                               static_cast<Eigen::Index>(values.size()));
  report.residual = artifact.value("residual", 0.0);
  report.iterations = artifact.value("iterations", 0L);
  return report;
}

}  // namespace fedldp
