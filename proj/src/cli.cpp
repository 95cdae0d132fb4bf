#include "bgcn/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bgcn/data.hpp"
#include "bgcn/eval.hpp"
#include "bgcn/gradcheck.hpp"
#include "bgcn/graph.hpp"
#include "bgcn/train.hpp"

namespace bgcn {

namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      out.push_back(std::stoi(token));
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": bad integer '" + token + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string(flag) + ": empty list");
  return out;
}

const char* b2b_name(B2BMode mode) {
  switch (mode) {
    case B2BMode::None: return "none";
    case B2BMode::Unweighted: return "unweighted";
    case B2BMode::Weighted: return "weighted";
  }
  return "weighted";
}

const char* hard_name(HardMode mode) {
  switch (mode) {
    case HardMode::None: return "none";
    case HardMode::Item: return "item";
    case HardMode::Bundle: return "bundle";
    case HardMode::Both: return "both";
  }
  return "both";
}

void apply_ablation(const std::string& name, AblationSwitches& sw,
                    HardMode& hard) {
  if (name == "item-level") {
    sw.item_level = true;
    sw.bundle_level = false;
  } else if (name == "bundle-level") {
    sw.item_level = false;
    sw.bundle_level = true;
  } else if (name == "ib-levels") {
    sw.item_level = true;
    sw.bundle_level = true;
  } else if (name == "no-b2b") {
    sw.b2b = B2BMode::None;
  } else if (name == "unweighted-b2b") {
    sw.b2b = B2BMode::Unweighted;
  } else if (name == "weighted-b2b") {
    sw.b2b = B2BMode::Weighted;
  } else if (name == "no-hard") {
    hard = HardMode::None;
  } else if (name == "hard-item") {
    hard = HardMode::Item;
  } else if (name == "hard-bundle") {
    hard = HardMode::Bundle;
  } else if (name == "hard-both") {
    hard = HardMode::Both;
  } else {
    throw ConfigError("unknown ablation '" + name + "'");
  }
}

using ConfigEcho = std::map<std::string, std::string>;

std::string echo_to_string(const ConfigEcho& echo) {
  std::string out;
  for (const auto& [k, v] : echo) out += k + "=" + v + "\n";
  return out;
}

void print_echo(const ConfigEcho& echo) {
  std::cout << "resolved config:\n";
  for (const auto& [k, v] : echo) std::cout << "  " << k << "=" << v << "\n";
}

struct SplitFlags {
  std::uint64_t seed = 0;
  std::string ratios = "0.7,0.1,0.2";

  SplitSpec spec() const {
    SplitSpec s;
    s.seed = seed;
    std::stringstream ss(ratios);
    std::string token;
    std::vector<double> vals;
    while (std::getline(ss, token, ',')) {
      try {
        vals.push_back(std::stod(token));
      } catch (const std::exception&) {
        throw ConfigError("--split-ratios: bad number '" + token + "'");
      }
    }
    if (vals.size() != 3) {
      throw ConfigError("--split-ratios: expected three comma-separated values");
    }
    s.train = vals[0];
    s.val = vals[1];
    s.test = vals[2];
    return s;
  }
};

struct PreparedData {
  Dataset dataset;
  DataSplit split;
  TripartiteGraph graph;  // built on the training ub pairs only
  OverlapWeights overlap;
  UserPositives train_pos, val_truth, test_truth, trainval_pos;
};

PreparedData prepare_data(const std::string& dir, const SplitSpec& spec,
                          bool jaccard) {
  PreparedData d;
  d.dataset = load_dataset(dir);
  std::cout << stats_line(d.dataset) << "\n";
  if (d.dataset.duplicate_pairs > 0) {
    std::cerr << "warning: collapsed " << d.dataset.duplicate_pairs
              << " duplicate pairs\n";
  }
  d.split = split_dataset(d.dataset, spec);
  d.graph = build_graph(d.split.train, d.dataset.ui, d.dataset.bi,
                        d.dataset.num_users, d.dataset.num_bundles,
                        d.dataset.num_items);
  d.overlap = build_overlap(d.graph, jaccard);
  const index_t m = d.dataset.num_users;
  const index_t n = d.dataset.num_bundles;
  d.train_pos = UserPositives::build(m, n, d.split.train);
  d.val_truth = UserPositives::build(m, n, d.split.val);
  d.test_truth = UserPositives::build(m, n, d.split.test);
  std::vector<IdPair> trainval = d.split.train;
  trainval.insert(trainval.end(), d.split.val.begin(), d.split.val.end());
  d.trainval_pos = UserPositives::build(m, n, trainval);
  return d;
}

struct LoadedModel {
  ModelKind kind = ModelKind::Bgcn;
  ModelParams bgcn;
  MfParams mf;
  AblationSwitches sw;
  double leaky_slope = 0.01;
  bool beta_jaccard = false;
  std::uint64_t split_seed = 0;
  std::string split_ratios = "0.7,0.1,0.2";
};

LoadedModel model_from_checkpoint(const Checkpoint& ckpt) {
  LoadedModel m;
  const std::string kind = ckpt.config_value("model");
  if (kind == "mf") {
    m.kind = ModelKind::Mf;
    m.mf = mf_params_from_checkpoint(ckpt);
  } else if (kind == "bgcn") {
    m.kind = ModelKind::Bgcn;
    m.bgcn = bgcn_params_from_checkpoint(ckpt);
    m.sw.item_level = ckpt.config_value("item_level") != "0";
    m.sw.bundle_level = ckpt.config_value("bundle_level") != "0";
    const std::string b2b = ckpt.config_value("b2b");
    if (b2b == "none") {
      m.sw.b2b = B2BMode::None;
    } else if (b2b == "unweighted") {
      m.sw.b2b = B2BMode::Unweighted;
    } else {
      m.sw.b2b = B2BMode::Weighted;
    }
    const std::string slope = ckpt.config_value("leaky_slope");
    if (!slope.empty()) m.leaky_slope = std::stod(slope);
    m.beta_jaccard = ckpt.config_value("beta_jaccard") == "1";
  } else {
    throw CheckpointError("checkpoint config has unknown model kind '" + kind +
                          "'");
  }
  const std::string sseed = ckpt.config_value("split_seed");
  if (!sseed.empty()) m.split_seed = std::stoull(sseed);
  const std::string sratios = ckpt.config_value("split_ratios");
  if (!sratios.empty()) m.split_ratios = sratios;
  return m;
}

void check_dims(const LoadedModel& m, const Dataset& ds) {
  auto expect = [](const char* tensor, index_t got, index_t want,
                   const char* what) {
    if (got != want) {
      throw CheckpointError(std::string("tensor ") + tensor + " has " +
                            std::to_string(got) + " rows but dataset has " +
                            std::to_string(want) + " " + what);
    }
  };
  if (m.kind == ModelKind::Bgcn) {
    expect("P", m.bgcn.P.rows, ds.num_users, "users");
    expect("R", m.bgcn.R.rows, ds.num_bundles, "bundles");
    expect("Q", m.bgcn.Q.rows, ds.num_items, "items");
  } else {
    expect("P", m.mf.P.rows, ds.num_users, "users");
    expect("R", m.mf.R.rows, ds.num_bundles, "bundles");
  }
}

ScoreTable build_table(const LoadedModel& m, const TripartiteGraph& graph,
                       const OverlapWeights& overlap) {
  if (m.kind == ModelKind::Mf) return mf_score_table(m.mf);
  const ForwardResult fwd =
      bgcn_forward(graph, &overlap, m.bgcn, m.sw, m.leaky_slope);
  return score_table(fwd.emb);
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data, out, log_path, config_path;
  SplitFlags split;
  std::string model = "bgcn";
  std::vector<std::string> ablations;
  bool beta_jaccard = false;
  bool fast = false;
  TrainConfig cfg;
  std::string ks = "20,40,80";
};

// Flat key=value config file expanded into long flags; '_' and '-' in keys
// are interchangeable. The expansion is inserted before the real flags, which
// win through the TakeLast option policy.
std::vector<std::string> config_overlay_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    std::string key = line.substr(0, eq);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") {
      throw ConfigError(path + ": config files cannot nest");
    }
    tokens.push_back("--" + key);
    tokens.push_back(line.substr(eq + 1));
  }
  return tokens;
}

int cmd_train(TrainArgs& a) {
  if (a.model == "mf") {
    a.cfg.model = ModelKind::Mf;
  } else if (a.model == "bgcn") {
    a.cfg.model = ModelKind::Bgcn;
  } else {
    throw ConfigError("--model must be bgcn or mf");
  }
  for (const auto& name : a.ablations) {
    apply_ablation(name, a.cfg.switches, a.cfg.hard_mode);
  }
  a.cfg.eval_ks = parse_int_list(a.ks, "--ks");
  a.cfg.validate();
  const SplitSpec split_spec = a.split.spec();
  if (a.log_path.empty()) a.log_path = a.out + ".log";

  ConfigEcho echo;
  echo["model"] = a.model;
  echo["data"] = a.data;
  echo["seed"] = std::to_string(a.cfg.seed);
  echo["split_seed"] = std::to_string(a.split.seed);
  echo["split_ratios"] = a.split.ratios;
  echo["lr"] = fmt_double(a.cfg.lr);
  echo["lambda"] = fmt_double(a.cfg.lambda);
  echo["batch_size"] = std::to_string(a.cfg.batch_size);
  echo["d"] = std::to_string(a.cfg.d);
  echo["layers"] = std::to_string(a.cfg.layers);
  echo["message_dropout"] = fmt_double(a.cfg.message_dropout);
  echo["node_dropout"] = fmt_double(a.cfg.node_dropout);
  echo["leaky_slope"] = fmt_double(a.cfg.leaky_slope);
  echo["p_hard"] = fmt_double(a.cfg.p_hard);
  echo["tau"] = fmt_double(a.cfg.tau);
  echo["min_overlap"] = fmt_double(a.cfg.min_overlap);
  echo["patience"] = std::to_string(a.cfg.patience);
  echo["max_epochs"] = std::to_string(a.cfg.max_epochs);
  echo["eval_every"] = std::to_string(a.cfg.eval_every);
  echo["conv_k"] = std::to_string(a.cfg.conv_k);
  echo["ks"] = join_ints(a.cfg.eval_ks);
  echo["item_level"] = a.cfg.switches.item_level ? "1" : "0";
  echo["bundle_level"] = a.cfg.switches.bundle_level ? "1" : "0";
  echo["b2b"] = b2b_name(a.cfg.switches.b2b);
  echo["hard"] = hard_name(a.cfg.hard_mode);
  echo["beta_jaccard"] = a.beta_jaccard ? "1" : "0";
  echo["threads"] = std::to_string(a.cfg.threads);
  print_echo(echo);

  if (a.fast) set_runtime_checks(false);
  PreparedData data = prepare_data(a.data, split_spec, a.beta_jaccard);
  echo["M"] = std::to_string(data.dataset.num_users);
  echo["N"] = std::to_string(data.dataset.num_bundles);
  echo["O"] = std::to_string(data.dataset.num_items);

  a.cfg.progress = [](const std::string& line) {
    std::cerr << line << "\n";
  };
  const TrainResult res =
      train(a.cfg, data.graph, &data.overlap, data.train_pos, data.val_truth);

  const auto refs = res.best_tensor_refs();
  save_checkpoint(a.out, refs, echo_to_string(echo));
  write_file_atomic(a.log_path, res.log);
  std::cout << "checkpoint: " << a.out << "\n";
  std::cout << "log: " << a.log_path << "\n";
  std::cout << "best validation recall@" << a.cfg.conv_k << " = "
            << res.best_metric << " (epoch " << res.best_epoch << ")\n";
  if (res.diverged) {
    std::cerr << "error: training diverged; wrote last good checkpoint\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvalArgs {
  std::string data, ckpt, out;
  std::string ks = "20,40,80";
  std::string split_name = "test";
  bool groups = false;
  std::string boundaries = "4,16";
  SplitFlags split;
  bool split_seed_given = false;
  bool split_ratios_given = false;
  int threads = 1;
};

int cmd_evaluate(EvalArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  LoadedModel model = model_from_checkpoint(ckpt);
  // Defaults for the split come from the checkpoint so evaluation sees the
  // same training graph unless explicitly overridden.
  if (!a.split_seed_given) a.split.seed = model.split_seed;
  if (!a.split_ratios_given) a.split.ratios = model.split_ratios;

  const std::vector<int> ks = parse_int_list(a.ks, "--ks");
  if (a.split_name != "test" && a.split_name != "val") {
    throw ConfigError("--split must be test or val");
  }
  if (a.out.empty()) a.out = a.ckpt + ".eval";

  ConfigEcho echo;
  echo["data"] = a.data;
  echo["ckpt"] = a.ckpt;
  echo["ks"] = join_ints(ks);
  echo["split"] = a.split_name;
  echo["split_seed"] = std::to_string(a.split.seed);
  echo["split_ratios"] = a.split.ratios;
  echo["groups"] = a.groups ? a.boundaries : "off";
  echo["threads"] = std::to_string(a.threads);
  echo["seed"] = ckpt.config_value("seed");
  print_echo(echo);

  PreparedData data =
      prepare_data(a.data, a.split.spec(), model.beta_jaccard);
  check_dims(model, data.dataset);
  const ScoreTable table = build_table(model, data.graph, data.overlap);

  const UserPositives& truth =
      a.split_name == "test" ? data.test_truth : data.val_truth;
  const UserPositives& exclusions =
      a.split_name == "test" ? data.trainval_pos : data.train_pos;

  std::vector<int> groups;
  const std::vector<int>* groups_ptr = nullptr;
  if (a.groups) {
    const auto bounds = parse_int_list(a.boundaries, "--group-boundaries");
    std::vector<index_t> b(bounds.begin(), bounds.end());
    groups = sparsity_groups(data.graph, b);
    groups_ptr = &groups;
  }
  const EvalReport report =
      evaluate(table, truth, exclusions, ks, groups_ptr, a.threads);
  std::cout << format_report(report);
  write_file_atomic(a.out, report_kv(report));
  std::cout << "report: " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// recommend

struct RecommendArgs {
  std::string data, ckpt;
  index_t user = -1;
  index_t k = 10;
  SplitFlags split;
  bool split_seed_given = false;
};

int cmd_recommend(RecommendArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  LoadedModel model = model_from_checkpoint(ckpt);
  if (!a.split_seed_given) a.split.seed = model.split_seed;

  ConfigEcho echo;
  echo["data"] = a.data;
  echo["ckpt"] = a.ckpt;
  echo["user"] = std::to_string(a.user);
  echo["k"] = std::to_string(a.k);
  echo["split_seed"] = std::to_string(a.split.seed);
  echo["seed"] = ckpt.config_value("seed");
  print_echo(echo);

  PreparedData data = prepare_data(a.data, a.split.spec(), model.beta_jaccard);
  check_dims(model, data.dataset);
  if (a.user < 0 || a.user >= data.dataset.num_users) {
    throw ConfigError("--user " + std::to_string(a.user) +
                      " out of range [0, " +
                      std::to_string(data.dataset.num_users) + ")");
  }
  const ScoreTable table = build_table(model, data.graph, data.overlap);
  const auto ranked =
      rank_bundles(table, a.user, data.train_pos.by_user[a.user]);
  const index_t top = std::min<index_t>(a.k, static_cast<index_t>(ranked.size()));
  for (index_t i = 0; i < top; ++i) {
    char line[64];
    std::snprintf(line, sizeof line, "%lld %lld %.6f\n",
                  static_cast<long long>(i + 1),
                  static_cast<long long>(ranked[i]),
                  table.score(a.user, ranked[i]));
    std::cout << line;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  GradCheckOptions opts;
};

int cmd_gradcheck(GradcheckArgs& a) {
  ConfigEcho echo;
  echo["seed"] = std::to_string(a.opts.seed);
  echo["d"] = std::to_string(a.opts.d);
  echo["layers"] = std::to_string(a.opts.layers);
  echo["lambda"] = fmt_double(a.opts.lambda);
  echo["eps"] = fmt_double(a.opts.eps);
  echo["threshold"] = fmt_double(a.opts.threshold);
  print_echo(echo);

  const GradCheckReport report = run_gradcheck(a.opts);
  for (const auto& t : report.tensors) {
    char line[96];
    std::snprintf(line, sizeof line, "tensor %-6s max_rel_err=%.3e\n",
                  t.name.c_str(), t.max_rel_err);
    std::cout << line;
  }
  std::cout << "combos run: " << report.combos_run << "\n";
  char summary[96];
  std::snprintf(summary, sizeof summary, "worst=%.3e threshold=%.3e %s\n",
                report.worst, a.opts.threshold,
                report.pass(a.opts.threshold) ? "PASS" : "FAIL");
  std::cout << summary;
  return report.pass(a.opts.threshold) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string spec_path, out;
};

SynthSpec parse_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file " + path);
  SynthSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "users") spec.users = std::stoll(value);
      else if (key == "bundles") spec.bundles = std::stoll(value);
      else if (key == "items") spec.items = std::stoll(value);
      else if (key == "latent") spec.latent = std::stoll(value);
      else if (key == "bundle_size_min") spec.bundle_size_min = std::stoll(value);
      else if (key == "bundle_size_max") spec.bundle_size_max = std::stoll(value);
      else if (key == "ui_min") spec.ui_min = std::stoll(value);
      else if (key == "ui_max") spec.ui_max = std::stoll(value);
      else if (key == "ub_min") spec.ub_min = std::stoll(value);
      else if (key == "ub_max") spec.ub_max = std::stoll(value);
      else if (key == "noise") spec.noise = std::stod(value);
      else if (key == "item_signal_weight") spec.item_signal_weight = std::stod(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else throw ConfigError(path + ": unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value '" +
                        value + "' for " + key);
    }
  }
  return spec;
}

int cmd_synth(SynthArgs& a) {
  const SynthSpec spec = parse_synth_spec(a.spec_path);
  spec.validate();

  ConfigEcho echo;
  echo["users"] = std::to_string(spec.users);
  echo["bundles"] = std::to_string(spec.bundles);
  echo["items"] = std::to_string(spec.items);
  echo["latent"] = std::to_string(spec.latent);
  echo["bundle_size_min"] = std::to_string(spec.bundle_size_min);
  echo["bundle_size_max"] = std::to_string(spec.bundle_size_max);
  echo["ui_min"] = std::to_string(spec.ui_min);
  echo["ui_max"] = std::to_string(spec.ui_max);
  echo["ub_min"] = std::to_string(spec.ub_min);
  echo["ub_max"] = std::to_string(spec.ub_max);
  echo["noise"] = fmt_double(spec.noise);
  echo["item_signal_weight"] = fmt_double(spec.item_signal_weight);
  echo["seed"] = std::to_string(spec.seed);
  print_echo(echo);

  const SynthData synth = synth_generate(spec);
  save_dataset(synth.dataset, a.out);
  save_affinity(synth.affinity, a.out + "/truth_affinity.txt");
  std::cout << stats_line(synth.dataset) << "\n";
  std::cout << "dataset: " << a.out << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"BGCN bundle recommendation engine"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--data", train_args.data, "dataset directory")->required();
  train_cmd->add_option("--out", train_args.out, "output checkpoint path")->required();
  train_cmd->add_option("--config", train_args.config_path,
                        "key=value config file (flags override)");
  train_cmd->add_option("--log", train_args.log_path, "training log path (default <out>.log)");
  train_cmd->add_option("--model", train_args.model, "bgcn or mf");
  train_cmd->add_option("--seed", train_args.cfg.seed, "training seed");
  train_cmd->add_option("--lr", train_args.cfg.lr, "learning rate");
  train_cmd->add_option("--lambda", train_args.cfg.lambda, "L2 penalty");
  train_cmd->add_option("--batch-size", train_args.cfg.batch_size, "mini-batch size");
  train_cmd->add_option("--d", train_args.cfg.d, "embedding size");
  train_cmd->add_option("--layers", train_args.cfg.layers, "propagation layers L");
  train_cmd->add_option("--message-dropout", train_args.cfg.message_dropout, "message dropout rate");
  train_cmd->add_option("--node-dropout", train_args.cfg.node_dropout, "node dropout rate");
  train_cmd->add_option("--leaky-slope", train_args.cfg.leaky_slope, "LeakyReLU slope");
  train_cmd->add_option("--p-hard", train_args.cfg.p_hard, "hard-negative probability");
  train_cmd->add_option("--tau", train_args.cfg.tau, "item-coverage threshold");
  train_cmd->add_option("--min-overlap", train_args.cfg.min_overlap, "overlap candidate threshold");
  train_cmd->add_option("--patience", train_args.cfg.patience, "stalled evaluations before switch/stop");
  train_cmd->add_option("--max-epochs", train_args.cfg.max_epochs, "epoch budget");
  train_cmd->add_option("--eval-every", train_args.cfg.eval_every, "validation cadence in epochs");
  train_cmd->add_option("--conv-k", train_args.cfg.conv_k, "convergence metric K");
  train_cmd->add_option("--ks", train_args.ks, "evaluation cutoffs, comma separated");
  train_cmd->add_option("--threads", train_args.cfg.threads, "validation ranking threads");
  train_cmd->add_option("--split-seed", train_args.split.seed, "split seed");
  train_cmd->add_option("--split-ratios", train_args.split.ratios, "train,val,test ratios");
  train_cmd->add_option("--ablation", train_args.ablations,
                        "ablation switch: item-level, bundle-level, ib-levels, "
                        "no-b2b, unweighted-b2b, weighted-b2b, no-hard, "
                        "hard-item, hard-bundle, hard-both");
  train_cmd->add_flag("--beta-jaccard", train_args.beta_jaccard,
                      "experimental: Jaccard overlap weights");
  train_cmd->add_flag("--fast", train_args.fast, "disable runtime NaN checks");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "rank and score a split");
  eval_cmd->add_option("--data", eval_args.data, "dataset directory")->required();
  eval_cmd->add_option("--ckpt", eval_args.ckpt, "checkpoint path")->required();
  eval_cmd->add_option("--ks", eval_args.ks, "evaluation cutoffs");
  eval_cmd->add_option("--split", eval_args.split_name, "test or val");
  eval_cmd->add_option("--out", eval_args.out, "report path (default <ckpt>.eval)");
  eval_cmd->add_flag("--groups", eval_args.groups, "per-sparsity-group breakdown");
  eval_cmd->add_option("--group-boundaries", eval_args.boundaries, "group degree boundaries");
  auto* ev_seed = eval_cmd->add_option("--split-seed", eval_args.split.seed, "split seed override");
  auto* ev_ratios = eval_cmd->add_option("--split-ratios", eval_args.split.ratios, "split ratio override");
  eval_cmd->add_option("--threads", eval_args.threads, "ranking threads");

  RecommendArgs rec_args;
  auto* rec_cmd = app.add_subcommand("recommend", "top-K bundles for one user");
  rec_cmd->add_option("--data", rec_args.data, "dataset directory")->required();
  rec_cmd->add_option("--ckpt", rec_args.ckpt, "checkpoint path")->required();
  rec_cmd->add_option("--user", rec_args.user, "user id")->required();
  rec_cmd->add_option("--k", rec_args.k, "list length");
  auto* rec_seed = rec_cmd->add_option("--split-seed", rec_args.split.seed, "split seed override");

  GradcheckArgs gc_args;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gc_cmd->add_option("--seed", gc_args.opts.seed, "parameter init seed");
  gc_cmd->add_option("--d", gc_args.opts.d, "embedding size");
  gc_cmd->add_option("--layers", gc_args.opts.layers, "propagation layers");
  gc_cmd->add_option("--lambda", gc_args.opts.lambda, "L2 penalty");
  gc_cmd->add_option("--eps", gc_args.opts.eps, "finite-difference step");
  gc_cmd->add_option("--threshold", gc_args.opts.threshold, "max relative error");
  gc_cmd->add_flag("--corrupt", gc_args.opts.corrupt,
                   "test hook: corrupt one gradient entry");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate a planted dataset");
  synth_cmd->add_option("--spec", synth_args.spec_path, "spec file")->required();
  synth_cmd->add_option("--out", synth_args.out, "output directory")->required();

  // Later occurrences win so command-line flags override config-file values.
  for (CLI::Option* opt : train_cmd->get_options()) {
    if (opt->get_type_size_max() == 1 && opt->get_expected_max() == 1) {
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    if (!args.empty() && args[0] == "train") {
      std::string cfg_path;
      for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
          cfg_path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
          cfg_path = args[i].substr(9);
        }
      }
      if (!cfg_path.empty()) {
        const auto overlay = config_overlay_tokens(cfg_path);
        args.insert(args.begin() + 1, overlay.begin(), overlay.end());
      }
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes args in reverse
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) {
      eval_args.split_seed_given = ev_seed->count() > 0;
      eval_args.split_ratios_given = ev_ratios->count() > 0;
      return cmd_evaluate(eval_args);
    }
    if (rec_cmd->parsed()) {
      rec_args.split_seed_given = rec_seed->count() > 0;
      return cmd_recommend(rec_args);
    }
    if (gc_cmd->parsed()) return cmd_gradcheck(gc_args);
    if (synth_cmd->parsed()) return cmd_synth(synth_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace bgcn
