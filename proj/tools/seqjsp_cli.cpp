// seqjsp: generate instances, train the policy, evaluate methods, draw schedules.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "seqjsp/checkpoint.hpp"
#include "seqjsp/config.hpp"
#include "seqjsp/dispatch_rules.hpp"
#include "seqjsp/exact_oracle.hpp"
#include "seqjsp/gantt.hpp"
#include "seqjsp/report.hpp"
#include "seqjsp/trainer.hpp"

using namespace seqjsp;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A dataset file starts with a single count, an instance file with "n m".
std::vector<Instance> load_instances(const std::string& path) {
  const auto text = slurp(path);
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream tok(line);
    std::vector<std::string> words;
    for (std::string w; tok >> w;) words.push_back(w);
    if (words.empty()) continue;
    if (words.size() == 1) return read_dataset(text);
    return {read_instance(text)};
  }
  throw ValidationError("'" + path + "' holds no instance");
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text_file(out, text);
}

// One "job pos" pair per line, 0-based; '#' starts a comment.
DispatchList read_list_file(const std::string& path, int n_machines) {
  std::istringstream lines(slurp(path));
  std::vector<std::pair<int, int>> pairs;
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream tok(line);
    int job = 0;
    int pos = 0;
    if (!(tok >> job)) continue;
    if (!(tok >> pos) || !(tok >> std::ws).eof())
      throw ParseError(number, 1, "expected 'job position'");
    if (pos < 0 || pos >= n_machines || job < 0) throw ParseError(number, 1, "operation out of range");
    pairs.emplace_back(job, pos);
  }
  return make_list(pairs, n_machines);
}

template <typename T>
PolicyModel<T> convert_model(const AnyModel& any, Precision target) {
  return std::visit(
      [&](const auto& src) {
        auto cfg = src.config();
        cfg.precision = target;
        PolicyModel<T> out(cfg, 0);
        const auto p = src.flat_parameters();
        const auto s = src.flat_norm_stats();
        out.set_flat_parameters(std::vector<T>(p.begin(), p.end()));
        out.set_flat_norm_stats(std::vector<T>(s.begin(), s.end()));
        return out;
      },
      any);
}

struct EvalOptions {
  std::string checkpoint;
  std::string dataset;
  std::string methods = "SPT,MWKR,MOPNR,FDD";
  std::string out;
  int samples = 16;
  int as_steps = 200;
  int as_batch = 64;
  double as_lr = 1e-4;
  int eas_steps = 20;
  int eas_samples = 8;
  double eas_lr = 0.03;
  std::uint64_t oracle_budget = 50'000'000;
};

std::vector<std::string> split_methods(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw ValidationError("no evaluation method given");
  return out;
}

template <typename T>
int run_eval(const EvalOptions& o, const std::optional<LoadedCheckpoint>& ckpt, Precision precision,
             std::uint64_t seed, BuildMode mode) {
  const auto instances = load_instances(o.dataset);
  if (instances.empty()) throw ValidationError("dataset is empty");
  require_same_shape(instances);
  const int n = instances[0].n_jobs();
  const int m = instances[0].n_machines();
  std::optional<PolicyModel<T>> model;
  if (ckpt) {
    if (ckpt->shape && (ckpt->shape->n_jobs != n || ckpt->shape->n_machines != m))
      throw ValidationError("checkpoint was trained on " + std::to_string(ckpt->shape->n_jobs) + "x" +
                            std::to_string(ckpt->shape->n_machines) + " instances, dataset is " + std::to_string(n) +
                            "x" + std::to_string(m));
    model = convert_model<T>(ckpt->model, precision);
  }
  auto need_model = [&](const std::string& method) -> const PolicyModel<T>& {
    if (!model) throw ValidationError("method " + method + " needs --checkpoint");
    return *model;
  };

  std::vector<MethodRow> rows;
  std::vector<std::optional<int>> optimum(instances.size());
  for (const auto& method : split_methods(o.methods)) {
    MethodRow row{method, {}};
    const auto t0 = std::chrono::steady_clock::now();
    if (method == "model-greedy") {
      row.makespans = greedy_makespans(need_model(method), instances, mode);
    } else if (method.starts_with("model-sample")) {
      int k = o.samples;
      if (method.size() > 13 && method != "model-sample-k") k = std::stoi(method.substr(13));
      if (k < 1) throw ValidationError("sample count must be >= 1");
      auto rng = Rng::derive(seed, {11});
      for (const auto& inst : instances) {
        auto rs = rollout(need_model(method), std::span<const Instance>(&inst, 1), DecodeMode::Sample, &rng, mode, k);
        int best = rs[0].makespan;
        for (const auto& r : rs) best = std::min(best, r.makespan);
        row.makespans.push_back(best);
      }
    } else if (method == "active-search") {
      ActiveSearchConfig cfg;
      cfg.steps = o.as_steps;
      cfg.batch_size = o.as_batch;
      cfg.learning_rate = o.as_lr;
      cfg.mode = mode;
      for (std::size_t k = 0; k < instances.size(); ++k) {
        cfg.seed = Rng::derive(seed, {12, k}).next();
        row.makespans.push_back(active_search(need_model(method), instances[k], cfg).best_makespan);
      }
    } else if (method == "eas-emb") {
      EasConfig cfg;
      cfg.steps = o.eas_steps;
      cfg.samples = o.eas_samples;
      cfg.learning_rate = o.eas_lr;
      cfg.seed = Rng::derive(seed, {13}).next();
      cfg.mode = mode;
      for (const auto& r : eas_emb(need_model(method), instances, cfg)) row.makespans.push_back(r.best_makespan);
    } else if (method == "oracle") {
      OracleOptions opt;
      opt.node_budget = o.oracle_budget;
      opt.mode = mode;
      for (std::size_t k = 0; k < instances.size(); ++k) {
        auto r = optimal_makespan(instances[k], opt);
        row.makespans.push_back(r.optimal_makespan);
        if (r.certified) optimum[k] = r.optimal_makespan;
      }
    } else {
      const auto rule = parse_rule(method);
      for (const auto& inst : instances) row.makespans.push_back(build_schedule(inst, run_pdr(inst, rule), mode).makespan());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "%s: %.2f s\n", method.c_str(), secs);
    rows.push_back(std::move(row));
  }
  auto report = make_report(std::move(rows), optimum);
  report.seed = seed;
  if (ckpt) {
    report.checkpoint_hash = hex64(fnv1a(slurp(o.checkpoint)));
    if (ckpt->training) report.config_hash = hex64(ckpt->training->config_hash);
  }
  if (!o.out.empty()) write_text_file(o.out, report_csv(report));
  std::cout << report_table(report);
  return kOk;
}

template <typename T>
int run_train(RunConfig cfg, const std::string& out_dir, const std::string& dataset_path,
              const std::string& resume_path) {
  const auto hash = config_hash(cfg);
  TrainOptions options;
  options.out_dir = out_dir;
  options.config_hash = hash;
  options.progress = [](const std::string& s) { std::cerr << s << std::endl; };
  if (!dataset_path.empty()) options.dataset = load_instances(dataset_path);
  std::optional<PolicyModel<T>> model;
  if (!resume_path.empty()) {
    auto ckpt = load_checkpoint(resume_path);
    if (ckpt.config() != cfg.model) throw ValidationError("resume checkpoint model config differs from the config file");
    if (!ckpt.training) throw ValidationError("checkpoint holds no training state");
    if (ckpt.training->config_hash != hash)
      throw ValidationError("resume checkpoint was written with a different config (hash " +
                            hex64(ckpt.training->config_hash) + ", now " + hex64(hash) + ")");
    model = std::get<PolicyModel<T>>(std::move(ckpt.model));
    options.resume = ckpt.training;
  } else {
    model.emplace(cfg.model, model_init_seed(cfg.trainer.seed));
  }
  std::filesystem::create_directories(out_dir);
  write_text_file((std::filesystem::path(out_dir) / "config.txt").string(), canonical_config(cfg));
  auto result = train(*model, cfg.trainer, cfg.data, options);
  const auto bytes = serialize_checkpoint(*model, &result.state, TrainedShape{cfg.data.n_jobs, cfg.data.n_machines});
  write_text_file((std::filesystem::path(out_dir) / "final.ckpt").string(), bytes);
  std::cout << "config_hash " << hex64(hash) << "\n";
  std::cout << "checkpoint_hash " << hex64(fnv1a(bytes)) << "\n";
  for (std::size_t k = 0; k < result.validation_means.size(); ++k)
    std::cout << "validation_mean[" << k << "] " << result.validation_means[k] << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Job-shop scheduling with a sequence-to-sequence policy"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out;
  std::string mode_name = "gap-insert";
  std::optional<std::string> precision_name;

  auto common = [&](CLI::App* sub, bool needs_seed) {
    auto* opt = sub->add_option("--seed", seed, "Random seed");
    if (needs_seed) opt->required();
    sub->add_option("--out", out, "Output path");
    sub->add_option("--mode", mode_name, "Schedule builder: gap-insert or append")
        ->check(CLI::IsMember({"gap-insert", "append"}));
    sub->add_option("--precision", precision_name, "Model precision: f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));
    sub->add_option("--config", config_path, "Config file (INI)");
  };

  auto* gen = app.add_subcommand("gen", "Generate a dataset of random instances");
  int gen_n = 6, gen_m = 6, gen_count = 100;
  std::string gen_kind = "jsp";
  gen->add_option("-n,--jobs", gen_n, "Jobs")->required();
  gen->add_option("-m,--machines", gen_m, "Machines")->required();
  gen->add_option("--count", gen_count, "Number of instances")->required();
  gen->add_option("--kind", gen_kind, "jsp or fsp")->check(CLI::IsMember({"jsp", "fsp"}));
  common(gen, true);

  auto* trn = app.add_subcommand("train", "Train a policy");
  std::string train_dataset, resume;
  trn->add_option("--dataset", train_dataset, "Fixed training set (default: generate per epoch)");
  trn->add_option("--resume", resume, "Checkpoint with training state to continue from");
  common(trn, true);

  auto* ev = app.add_subcommand("eval", "Evaluate methods on a dataset");
  EvalOptions eo;
  ev->add_option("--checkpoint", eo.checkpoint, "Model checkpoint");
  ev->add_option("--dataset", eo.dataset, "Dataset or instance file")->required();
  ev->add_option("--methods", eo.methods,
                 "Comma list of model-greedy, model-sample-k, model-sample-<k>, active-search, eas-emb, SPT, MWKR, "
                 "MOPNR, FDD, oracle");
  ev->add_option("--samples", eo.samples, "k for model-sample-k");
  ev->add_option("--as-steps", eo.as_steps, "Active search steps");
  ev->add_option("--as-batch", eo.as_batch, "Active search batch size");
  ev->add_option("--as-lr", eo.as_lr, "Active search learning rate");
  ev->add_option("--eas-steps", eo.eas_steps, "EAS-Emb steps");
  ev->add_option("--eas-samples", eo.eas_samples, "EAS-Emb samples per instance per step");
  ev->add_option("--eas-lr", eo.eas_lr, "EAS-Emb learning rate");
  ev->add_option("--oracle-budget", eo.oracle_budget, "Oracle node budget per instance");
  common(ev, true);

  auto* gan = app.add_subcommand("gantt", "Render a schedule as SVG");
  std::string gantt_instance, gantt_rule, gantt_ckpt, gantt_list;
  gan->add_option("--instance", gantt_instance, "Instance file")->required();
  auto* src_rule = gan->add_option("--rule", gantt_rule, "Dispatching rule");
  auto* src_ckpt = gan->add_option("--checkpoint", gantt_ckpt, "Greedy decode of a model");
  auto* src_list = gan->add_option("--list", gantt_list, "List file: one 'job position' per line");
  src_rule->excludes(src_ckpt)->excludes(src_list);
  src_ckpt->excludes(src_list);
  common(gan, false);

  auto* orc = app.add_subcommand("oracle", "Exact optimum of small instances");
  std::string oracle_input;
  std::uint64_t oracle_budget = 50'000'000;
  orc->add_option("--dataset", oracle_input, "Dataset or instance file")->required();
  orc->add_option("--budget", oracle_budget, "Node budget per instance");
  common(orc, false);

  auto* pdr = app.add_subcommand("pdr", "Run dispatching rules");
  std::string pdr_input, pdr_rules = "SPT,MWKR,MOPNR,FDD";
  pdr->add_option("--dataset", pdr_input, "Dataset or instance file")->required();
  pdr->add_option("--rules", pdr_rules, "Comma list of rules");
  common(pdr, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    const auto mode = parse_build_mode(mode_name);
    if (*gen) {
      if (gen_count < 0) throw ValidationError("--count must be >= 0");
      const auto data = generate_dataset(parse_instance_kind(gen_kind), gen_n, gen_m, gen_count, *seed);
      emit(out, write_dataset(data));
      return kOk;
    }
    if (*trn) {
      if (config_path.empty()) throw ValidationError("train needs --config");
      if (out.empty()) throw ValidationError("train needs --out <directory>");
      auto cfg = load_config(config_path);
      cfg.trainer.seed = *seed;
      if (precision_name) cfg.model.precision = parse_precision(*precision_name);
      cfg.data.mode = mode;
      return cfg.model.precision == Precision::F32 ? run_train<float>(cfg, out, train_dataset, resume)
                                                   : run_train<double>(cfg, out, train_dataset, resume);
    }
    if (*ev) {
      eo.out = out;
      std::optional<LoadedCheckpoint> ckpt;
      if (!eo.checkpoint.empty()) ckpt = load_checkpoint(eo.checkpoint);
      Precision precision = ckpt ? ckpt->config().precision : Precision::F32;
      if (precision_name) precision = parse_precision(*precision_name);
      return precision == Precision::F32 ? run_eval<float>(eo, ckpt, precision, *seed, mode)
                                         : run_eval<double>(eo, ckpt, precision, *seed, mode);
    }
    if (*gan) {
      const auto inst = read_instance_file(gantt_instance);
      DispatchList list;
      if (!gantt_list.empty()) {
        list = read_list_file(gantt_list, inst.n_machines());
        if (list.size() != static_cast<std::size_t>(inst.n_ops()))
          throw ValidationError("list has " + std::to_string(list.size()) + " operations, instance has " +
                                std::to_string(inst.n_ops()));
        auto report = check_feasible(list, inst);
        if (!report) throw ValidationError("infeasible list: " + report.violation->describe());
      } else if (!gantt_ckpt.empty()) {
        auto ckpt = load_checkpoint(gantt_ckpt);
        list = std::visit(
            [&](const auto& model) {
              return rollout(model, std::span<const Instance>(&inst, 1), DecodeMode::Greedy, nullptr, mode)[0].list;
            },
            ckpt.model);
      } else {
        list = run_pdr(inst, parse_rule(gantt_rule.empty() ? "MWKR" : gantt_rule));
      }
      const auto schedule = build_schedule(inst, list, mode);
      if (out.empty()) throw ValidationError("gantt needs --out <file.svg>");
      write_text_file(out, render_gantt_svg(schedule));
      std::cout << render_gantt_text(schedule);
      std::cout << "makespan " << schedule.makespan() << "\n";
      return kOk;
    }
    if (*orc) {
      OracleOptions opt;
      opt.node_budget = oracle_budget;
      opt.mode = mode;
      std::ostringstream csv;
      csv << "instance,makespan,certified,explored,list\n";
      const auto instances = load_instances(oracle_input);
      for (std::size_t k = 0; k < instances.size(); ++k) {
        const auto r = optimal_makespan(instances[k], opt);
        csv << k << ',' << r.optimal_makespan << ',' << (r.certified ? "yes" : "no") << ',' << r.explored << ',';
        for (std::size_t i = 0; i < r.optimal_list.perm.size(); ++i) csv << (i ? " " : "") << r.optimal_list.perm[i];
        csv << '\n';
      }
      emit(out, csv.str());
      return kOk;
    }
    if (*pdr) {
      const auto instances = load_instances(pdr_input);
      std::vector<MethodRow> rows;
      for (const auto& name : split_methods(pdr_rules)) {
        const auto rule = parse_rule(name);
        MethodRow row{std::string(to_string(rule)), {}};
        for (const auto& inst : instances)
          row.makespans.push_back(build_schedule(inst, run_pdr(inst, rule), mode).makespan());
        rows.push_back(std::move(row));
      }
      auto report = make_report(std::move(rows), std::vector<std::optional<int>>(instances.size()));
      report.seed = seed.value_or(0);
      if (!out.empty()) write_text_file(out, report_csv(report));
      std::cout << report_table(report);
      return kOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
