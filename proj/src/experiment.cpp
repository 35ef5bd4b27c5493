#include "fgs/experiment.hpp"

#include "fgs/chain.hpp"
#include "fgs/diagnostics.hpp"
#include "fgs/errors.hpp"
#include "fgs/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

namespace fgs {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Shortest representation that round-trips.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string csv_banner(const std::string& command) {
  return std::string("# fgs ") + kToolVersion + " " + command + "\n";
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0)) {
    throw ConfigError(what + " must be > 0 (got " + short_num(v) + ")");
  }
}

// Runs job(i) for i in [0, count) across threads; rethrows the first failure
// in index order.
template <class Job>
void parallel_jobs(long long count, Job&& job) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      job(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SequenceState initial_state(const ExperimentConfig& cfg, Rng& rng) {
  const auto& table = cfg.model->table();
  if (cfg.initial) return SequenceState(table, *cfg.initial);
  return random_state(table, cfg.model->length(), rng);
}

std::optional<long long> hybrid_switch(const ChainKernel& kernel) {
  if (auto* h = dynamic_cast<const HybridKernel*>(&kernel)) {
    return h->switch_step();
  }
  return std::nullopt;
}

}  // namespace

KernelSpec kernel_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("kernel must be a JSON object");
  reject_unknown(doc,
                 {"name", "alpha", "p", "adjusted", "scan", "window",
                  "threshold", "max_pncg_steps"},
                 "kernel");
  KernelSpec spec;
  try {
    spec.kind = kernel_kind_from_string(doc.at("name").get<std::string>());
    spec.adjusted = doc.value("adjusted", spec.kind != KernelKind::mucola);
    spec.alpha = doc.value("alpha", 1.0);
    spec.p = doc.value("p", 2.0);
    const auto scan = doc.value("scan", std::string("random"));
    if (scan == "random") {
      spec.scan = Scan::random;
    } else if (scan == "systematic") {
      spec.scan = Scan::systematic;
    } else {
      throw ConfigError("kernel.scan must be 'random' or 'systematic'");
    }
    spec.hybrid.window = doc.value("window", spec.hybrid.window);
    spec.hybrid.change_threshold =
        doc.value("threshold", spec.hybrid.change_threshold);
    spec.hybrid.max_pncg_steps =
        doc.value("max_pncg_steps", spec.hybrid.max_pncg_steps);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed kernel: ") + e.what());
  }
  require_positive(spec.alpha, "kernel.alpha");
  if (!(spec.p >= 1.0)) {
    throw ConfigError("kernel.p must be >= 1 (got " + short_num(spec.p) + ")");
  }
  try {
    validate(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  return spec;
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"model", "kernel", "kernels", "steps", "seeds", "checkpoints",
                  "alphas", "epsilons", "p", "burn_in_fraction", "initial",
                  "output_dir", "cap", "emit_states", "notes"},
                 "config");
  if (!doc.contains("model")) throw ConfigError("config needs a 'model'");
  ExperimentConfig cfg;
  cfg.model_doc = doc.at("model");
  cfg.model = model_from_json(cfg.model_doc);
  try {
    if (doc.contains("kernel")) cfg.kernel = kernel_from_json(doc.at("kernel"));
    if (doc.contains("kernels")) {
      for (const auto& k : doc.at("kernels")) {
        cfg.kernels.push_back(kernel_from_json(k));
      }
    }
    cfg.steps = doc.value("steps", cfg.steps);
    if (doc.contains("seeds")) {
      cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    }
    if (doc.contains("checkpoints")) {
      cfg.checkpoints = doc.at("checkpoints").get<std::vector<long long>>();
    }
    if (doc.contains("alphas")) {
      cfg.alphas = doc.at("alphas").get<std::vector<double>>();
    }
    if (doc.contains("epsilons")) {
      cfg.epsilons = doc.at("epsilons").get<std::vector<double>>();
    }
    cfg.p = doc.value("p", cfg.p);
    cfg.burn_in_fraction = doc.value("burn_in_fraction", cfg.burn_in_fraction);
    if (doc.contains("initial")) {
      cfg.initial = doc.at("initial").get<std::vector<int>>();
    }
    cfg.output_dir = doc.value("output_dir", cfg.output_dir);
    cfg.cap = doc.value("cap", cfg.cap);
    cfg.emit_states = doc.value("emit_states", cfg.emit_states);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  if (cfg.steps < 1) {
    throw ConfigError("steps must be >= 1 (got " + std::to_string(cfg.steps) +
                      ")");
  }
  if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
  long long prev = 0;
  for (long long c : cfg.checkpoints) {
    if (c <= prev) {
      throw ConfigError("checkpoints must be positive and strictly increasing");
    }
    prev = c;
  }
  for (double a : cfg.alphas) require_positive(a, "alphas entry");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0 && e < 1.0)) {
      throw ConfigError("epsilons entries must lie in (0, 1) (got " +
                        short_num(e) + ")");
    }
  }
  if (!(cfg.p >= 1.0)) {
    throw ConfigError("p must be >= 1 (got " + short_num(cfg.p) + ")");
  }
  if (!(cfg.burn_in_fraction >= 0.0 && cfg.burn_in_fraction < 1.0)) {
    throw ConfigError("burn_in_fraction must lie in [0, 1)");
  }
  if (cfg.cap < 1) throw ConfigError("cap must be >= 1");
  if (cfg.initial) {
    try {
      SequenceState probe(cfg.model->table(), *cfg.initial);
      if (probe.length() != cfg.model->length()) {
        throw ConfigError("initial state must have length " +
                          std::to_string(cfg.model->length()));
      }
    } catch (const ContractError& e) {
      throw ConfigError(std::string("initial state: ") + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return config_from_json(doc);
}

std::vector<KernelSpec> toy_tv_kernels() {
  KernelSpec pncg{KernelKind::pncg, true, 1.0};
  KernelSpec gwl{KernelKind::gwl, true, 1.0};
  KernelSpec rwm{KernelKind::rwm, true, 1.0};
  KernelSpec mucola{KernelKind::mucola, false, 1.5};
  return {pncg, gwl, rwm, mucola};
}

std::vector<KernelSpec> toy_limit_kernels() {
  return {KernelSpec{KernelKind::mucola, false},
          KernelSpec{KernelKind::pncg, false},
          KernelSpec{KernelKind::pncg, true},
          KernelSpec{KernelKind::gwl, true},
          KernelSpec{KernelKind::rwm, true}};
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed to write " + partial.string());
  }
  fs::rename(partial, path);
}

// ---- toy-limit -------------------------------------------------------------

std::vector<ToyLimitRow> cmd_toy_limit(const ExperimentConfig& cfg) {
  const EnergyModel& model = *cfg.model;
  const StateSpace space(model.table(), model.length(), cfg.cap);
  const DistributionVector pi = exact_target(model, space);
  const auto kernels = cfg.kernels.empty() ? toy_limit_kernels() : cfg.kernels;

  std::vector<ToyLimitRow> rows;
  std::vector<std::pair<std::string, DistributionVector>> dists{{"target", pi}};
  for (const auto& base : kernels) {
    for (double alpha : cfg.alphas) {
      KernelSpec spec = base;
      spec.alpha = alpha;
      DistributionVector limit;
      if (spec.kind == KernelKind::pncg && !spec.adjusted) {
        limit = pi_alpha(model, space, spec.pncg());
      } else {
        limit = stationary_distribution(
            build_transition_matrix(spec, model, space));
      }
      rows.push_back({spec.name(), alpha, tv_distance(limit, pi)});
      dists.emplace_back(spec.name() + "@" + short_num(alpha), limit);
    }
  }

  std::ostringstream csv;
  csv << csv_banner("toy-limit") << "kernel,alpha,tv\n";
  for (const auto& r : rows) {
    csv << r.kernel << ',' << num(r.alpha) << ',' << num(r.tv) << '\n';
  }
  std::ostringstream dcsv;
  dcsv << csv_banner("toy-limit");
  write_distributions_csv(dcsv, space, dists);
  const fs::path dir(cfg.output_dir);
  write_file_atomic(dir / "toy_limit.csv", csv.str());
  write_file_atomic(dir / "toy_limit_distributions.csv", dcsv.str());
  return rows;
}

// ---- toy-tv ----------------------------------------------------------------

ToyTvResult cmd_toy_tv(const ExperimentConfig& cfg) {
  const EnergyModel& model = *cfg.model;
  const StateSpace space(model.table(), model.length(), cfg.cap);
  const DistributionVector pi = exact_target(model, space);
  const auto kernels = cfg.kernels.empty() ? toy_tv_kernels() : cfg.kernels;
  const auto checkpoints =
      cfg.checkpoints.empty() ? log_checkpoints(cfg.steps) : cfg.checkpoints;
  const long long burn_in =
      static_cast<long long>(cfg.burn_in_fraction * double(cfg.steps));

  const auto n_seeds = static_cast<long long>(cfg.seeds.size());
  const long long jobs = static_cast<long long>(kernels.size()) * n_seeds;
  std::vector<std::vector<TvPoint>> curves(jobs);
  std::vector<EnergyRow> energy(jobs);

  parallel_jobs(jobs, [&](long long job) {
    const auto k = static_cast<std::size_t>(job / n_seeds);
    const auto seed = cfg.seeds[static_cast<std::size_t>(job % n_seeds)];
    auto kernel = make_kernel(kernels[k], model);
    Rng rng = make_rng(seed, k);
    const SequenceState init = initial_state(cfg, rng);
    const ChainTrace trace = run_chain(model, *kernel, init, cfg.steps, rng);
    curves[job] = tv_curve(trace, space, pi, checkpoints);
    const EnergySummary es = energy_summary(trace, burn_in);
    energy[job] = {kernels[k].name(), seed, es.mean, es.standard_error,
                   acceptance_stats(trace).rate(), hybrid_switch(*kernel)};
  });

  ToyTvResult result;
  std::ostringstream csv;
  csv << csv_banner("toy-tv") << "kernel,seed,step,tv\n";
  for (long long job = 0; job < jobs; ++job) {
    const auto& e = energy[job];
    for (const auto& pt : curves[job]) {
      result.curve.push_back({e.kernel, e.seed, pt.step, pt.tv});
      csv << e.kernel << ',' << e.seed << ',' << pt.step << ',' << num(pt.tv)
          << '\n';
    }
  }
  std::ostringstream ecsv;
  ecsv << csv_banner("toy-tv") << "kernel,seed,mean_energy,se,acceptance_rate\n";
  for (const auto& e : energy) {
    ecsv << e.kernel << ',' << e.seed << ',' << num(e.mean_energy) << ','
         << num(e.se) << ',' << num(e.acceptance_rate) << '\n';
  }
  result.energy = std::move(energy);
  const fs::path dir(cfg.output_dir);
  write_file_atomic(dir / "toy_tv.csv", csv.str());
  write_file_atomic(dir / "toy_energy.csv", ecsv.str());
  return result;
}

// ---- mixing ----------------------------------------------------------------

std::vector<MixingReport> cmd_mixing(const ExperimentConfig& cfg) {
  const EnergyModel& model = *cfg.model;
  if (!model.constant_hessian()) {
    throw UnsupportedError("mixing analysis needs a quadratic energy");
  }
  const StateSpace space(model.table(), model.length(), cfg.cap);
  std::vector<MixingReport> reports;
  nlohmann::ordered_json doc;
  doc["tool"] = std::string("fgs ") + kToolVersion;
  doc["kernel"] = "pncg (unadjusted)";
  doc["reports"] = nlohmann::ordered_json::array();
  const fs::path dir(cfg.output_dir);
  for (double alpha : cfg.alphas) {
    const PncgConfig pc{alpha, cfg.p};
    for (double eps : cfg.epsilons) {
      reports.push_back(mixing_time_lower_bound(model, space, pc, eps, cfg.cap));
      doc["reports"].push_back(mixing_report_json(reports.back()));
    }
    std::ostringstream m;
    m << csv_banner("mixing");
    write_matrix_csv(m, build_transition_matrix(
                            KernelSpec{KernelKind::pncg, false, alpha, cfg.p},
                            model, space),
                     space);
    write_file_atomic(dir / ("pncg_matrix_alpha_" + short_num(alpha) + ".csv"),
                      m.str());
  }
  write_file_atomic(dir / "mixing.json", doc.dump(2) + "\n");
  return reports;
}

// ---- chain -----------------------------------------------------------------

std::vector<EnergyRow> cmd_chain(const ExperimentConfig& cfg) {
  const EnergyModel& model = *cfg.model;
  std::optional<double> target_mean;
  try {
    const StateSpace space(model.table(), model.length(), cfg.cap);
    const DistributionVector pi = exact_target(model, space);
    double m = 0.0;
    for (long long i = 0; i < space.size(); ++i) {
      m += pi[i] * model.energy_at(space.state(i).embedding());
    }
    target_mean = m;
  } catch (const InfeasibleError&) {
    // Not enumerable at this cap: energy traces only.
  }

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const long long burn_in =
      static_cast<long long>(cfg.burn_in_fraction * double(cfg.steps));
  const auto n_seeds = static_cast<long long>(cfg.seeds.size());
  std::vector<EnergyRow> rows(n_seeds);

  parallel_jobs(n_seeds, [&](long long job) {
    const auto seed = cfg.seeds[static_cast<std::size_t>(job)];
    auto kernel = make_kernel(cfg.kernel, model);
    Rng rng = make_rng(seed, 0);
    const SequenceState init = initial_state(cfg, rng);

    const fs::path path = dir / ("trace_seed" + std::to_string(seed) + ".jsonl");
    fs::path partial = path;
    partial += ".partial";
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + partial.string());
    const std::vector<StepCallback> callbacks{
        JsonlTraceWriter(out, cfg.emit_states)};
    const ChainTrace trace =
        run_chain(model, *kernel, init, cfg.steps, rng, callbacks, false);
    out.flush();
    if (trace.aborted || !out) {
      throw std::runtime_error("trace for seed " + std::to_string(seed) +
                               " aborted after " +
                               std::to_string(trace.records.size()) +
                               " steps (" + trace.error +
                               "); partial output left at " + partial.string());
    }
    out.close();
    fs::rename(partial, path);
    const EnergySummary es = energy_summary(trace, burn_in);
    rows[job] = {cfg.kernel.name(), seed, es.mean, es.standard_error,
                 acceptance_stats(trace).rate(), hybrid_switch(*kernel)};
  });

  std::ostringstream csv;
  csv << csv_banner("chain")
      << "kernel,seed,mean_energy,se,acceptance_rate,switch_step,"
         "target_mean_energy\n";
  for (const auto& r : rows) {
    csv << r.kernel << ',' << r.seed << ',' << num(r.mean_energy) << ','
        << num(r.se) << ',' << num(r.acceptance_rate) << ','
        << (r.switch_step ? std::to_string(*r.switch_step) : "") << ','
        << (target_mean ? num(*target_mean) : "") << '\n';
  }
  write_file_atomic(dir / "summary.csv", csv.str());
  return rows;
}

}  // namespace fgs
