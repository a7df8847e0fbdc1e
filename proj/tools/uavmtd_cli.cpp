#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uavmtd/checkpoint.hpp"
#include "uavmtd/config.hpp"
#include "uavmtd/report.hpp"
#include "uavmtd/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace uavmtd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;
};

std::uint64_t parse_seed(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw UsageError(std::string(what) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

// "A..B" or a single seed.
SeedRange parse_seed_range(std::string_view text) {
  const auto dots = text.find("..");
  SeedRange r;
  if (dots == std::string_view::npos) {
    r.first = r.last = parse_seed(text, "--seeds");
  } else {
    r.first = parse_seed(text.substr(0, dots), "--seeds");
    r.last = parse_seed(text.substr(dots + 2), "--seeds");
  }
  if (r.last < r.first) throw UsageError("--seeds: empty range '" + std::string(text) + "'");
  return r;
}

Scenario parse_scenario(std::string_view strategy, std::string_view kind) {
  const auto s = parse_attack_strategy(strategy);
  const auto k = parse_attack_kind(kind);
  if (!s) throw UsageError("unknown attacker '" + std::string(strategy) + "'");
  if (!k) throw UsageError("unknown attack kind '" + std::string(kind) + "'");
  return {*s, *k};
}

std::string scenario_name(Scenario sc) {
  return std::string(to_string(sc.strategy)) + ":" + std::string(to_string(sc.kind));
}

std::vector<Scenario> parse_scenarios(const std::string& text) {
  std::vector<Scenario> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--scenarios: expected strategy:kind, got '" + item + "'");
    const Scenario sc = parse_scenario(item.substr(0, colon), item.substr(colon + 1));
    if (std::find(out.begin(), out.end(), sc) == out.end()) out.push_back(sc);
  }
  if (out.empty()) throw UsageError("--scenarios: no scenario given");
  return out;
}

std::vector<Scenario> all_scenarios() {
  std::vector<Scenario> out;
  for (auto s : {AttackStrategy::fixed, AttackStrategy::random, AttackStrategy::greedy}) {
    for (auto k : {AttackKind::node, AttackKind::link}) out.push_back({s, k});
  }
  return out;
}

ScenarioConfig read_config(const std::string& path) {
  return path.empty() ? ScenarioConfig{} : load_config(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; zero for fewer than two values.
double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

json eval_summary_json(const EvalSummary& s) {
  return {{"episodes", s.episodes},
          {"mitigation_rate", s.mitigation_mean},
          {"mitigation_rate_std", s.mitigation_std},
          {"mean_recovery_s", s.episodes_with_outage > 0 ? json(s.recovery_mean) : json(nullptr)},
          {"episodes_with_outage", s.episodes_with_outage},
          {"energy_J", s.energy_mean},
          {"cumulative_cost", s.cost_mean},
          {"return", s.return_mean}};
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string attacker = "fixed";
  std::string kind = "node";
  std::string out;
  int episodes = 0;
  bool timing = false;
  int keep_checkpoints = 3;
  bool quiet = false;
};

constexpr int kSummaryWindow = 100;

json train_summary(const TrainArgs& a, const ScenarioConfig& cfg, const std::vector<EpisodeLog>& logs,
                   int rounds, bool complete) {
  json j{{"schema", "uavmtd-train-summary/1"},
         {"seed", a.seed},
         {"attacker", a.attacker},
         {"attack_kind", a.kind},
         {"episodes_requested", cfg.max_episodes},
         {"episodes_completed", logs.size()},
         {"rounds", rounds},
         {"complete", complete}};
  const std::size_t n = std::min<std::size_t>(logs.size(), kSummaryWindow);
  std::vector<double> ret, mit, energy, cost, rec;
  for (std::size_t i = logs.size() - n; i < logs.size(); ++i) {
    const auto& m = logs[i].metrics;
    ret.push_back(logs[i].mean_return);
    mit.push_back(m.mitigation_rate);
    energy.push_back(m.energy);
    cost.push_back(m.cumulative_cost);
    if (m.mean_recovery) rec.push_back(*m.mean_recovery);
  }
  j["final"] = {{"window", n},
                {"return", mean(ret)},
                {"mitigation_rate", mean(mit)},
                {"mean_recovery_s", rec.empty() ? json(nullptr) : json(mean(rec))},
                {"energy_J", mean(energy)},
                {"cumulative_cost", mean(cost)}};
  return j;
}

std::vector<Policy> run_train(const TrainArgs& a) {
  const Scenario sc = parse_scenario(a.attacker, a.kind);
  ScenarioConfig cfg = read_config(a.config_path);
  if (a.episodes > 0) cfg.max_episodes = a.episodes;
  validate(cfg);

  const fs::path out(a.out);
  ensure_dir(out);
  ensure_dir(out / "checkpoints");
  write_text(out / "config.txt", serialize(cfg));

  std::ofstream csv(out / "episodes.csv", std::ios::binary | std::ios::trunc);
  std::ofstream rounds(out / "rounds.jsonl", std::ios::binary | std::ios::trunc);
  if (!csv || !rounds) throw std::runtime_error("cannot write into " + out.string());
  csv << episode_csv_header();

  std::vector<EpisodeLog> logs;
  int n_rounds = 0;
  write_json(out / "summary.json", train_summary(a, cfg, logs, 0, false));

  std::deque<fs::path> kept;
  TrainingHooks hooks;
  hooks.measure_time = a.timing;
  hooks.on_episode = [&](const EpisodeLog& log) {
    csv << episode_csv_row(log);
    csv.flush();
    logs.push_back(log);
    if (!a.quiet && (log.episode + 1) % 100 == 0) {
      std::fprintf(stderr, "[%s seed %llu] episode %d  return %.3f  mitigation %.4f\n",
                   scenario_name(sc).c_str(), static_cast<unsigned long long>(a.seed), log.episode + 1,
                   log.mean_return, log.metrics.mitigation_rate);
    }
  };
  hooks.on_round = [&](const RoundLog& r, const std::vector<Policy>& agents) {
    char name[32];
    std::snprintf(name, sizeof name, "round_%04d.ckpt", r.round);
    const fs::path ckpt = out / "checkpoints" / name;
    save_checkpoint(ckpt, agents);
    kept.push_back(ckpt);
    while (a.keep_checkpoints > 0 && static_cast<int>(kept.size()) > a.keep_checkpoints) {
      fs::remove(kept.front());
      kept.pop_front();
    }
    n_rounds = r.round;
    json j{{"round", r.round},
           {"episode", r.episode},
           {"recent_returns", r.recent_returns},
           {"weights", r.weights},
           {"finetune_steps", r.finetune_steps},
           {"checkpoint", fs::path("checkpoints") / name}};
    rounds << j.dump() << "\n";
    rounds.flush();
  };

  auto result = run_training(cfg, sc, a.seed, hooks);
  if (!csv || !rounds) throw std::runtime_error("write failed in " + out.string());
  save_checkpoint(out / "final.ckpt", result.agents);
  write_json(out / "summary.json", train_summary(a, cfg, logs, n_rounds, true));
  return std::move(result.agents);
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string config_path;
  std::string attacker = "fixed";
  std::string kind = "node";
  std::string checkpoint;
  std::string policy = "learned";
  std::string seeds = "1..10";
  int episodes = 10;
  bool stochastic = false;
  std::string out;
  std::string trace;
};

PolicyFn make_policy(const std::string& name, const std::string& checkpoint, const ScenarioConfig& cfg,
                     bool stochastic) {
  if (name == "none") return no_defense();
  if (name == "random") return random_defense();
  if (name.rfind("periodic:", 0) == 0) {
    const auto k = parse_seed(std::string_view(name).substr(9), "--policy periodic:<k>");
    if (k == 0) throw UsageError("--policy periodic:<k> needs k > 0");
    return periodic_defense(static_cast<int>(k));
  }
  if (name != "learned") throw UsageError("--policy must be learned, none, random or periodic:<k>");
  if (checkpoint.empty()) throw UsageError("--policy learned needs --checkpoint");
  auto agents = load_checkpoint(checkpoint);
  if (static_cast<int>(agents.size()) != cfg.n_uavs) {
    throw std::runtime_error(checkpoint + ": holds " + std::to_string(agents.size()) + " agents, config has " +
                             std::to_string(cfg.n_uavs) + " UAVs");
  }
  for (const auto& p : agents) {
    if (p.input_dim() != cfg.observation_dim()) {
      throw std::runtime_error(checkpoint + ": input size " + std::to_string(p.input_dim()) +
                               " does not match the observation size " +
                               std::to_string(cfg.observation_dim()));
    }
  }
  return learned_policy(std::move(agents), stochastic);
}

json trace_record(const EpisodeOutcome& o, const StepRecord& s) {
  std::vector<json> actions;
  for (const auto& a : s.actions) actions.push_back({a.leader_claim, a.relay, a.hop});
  return {{"seed", o.seed},
          {"episode", o.episode},
          {"t", s.t},
          {"leader", s.leader},
          {"channel", s.channel},
          {"attack_active", s.attack_active},
          {"hopped", s.hopped},
          {"leader_switched", s.leader_switched},
          {"routes", s.routes_active},
          {"e", s.e},
          {"heartbeat", s.heartbeat_connected},
          {"node_effective", s.node_effective},
          {"link_effective", s.link_effective},
          {"actions", actions},
          {"reward", s.reward}};
}

int cmd_eval(const EvalArgs& a) {
  const Scenario sc = parse_scenario(a.attacker, a.kind);
  const SeedRange seeds = parse_seed_range(a.seeds);
  if (a.episodes <= 0) throw UsageError("--episodes must be positive");
  const ScenarioConfig cfg = read_config(a.config_path);
  const PolicyFn policy = make_policy(a.policy, a.checkpoint, cfg, a.stochastic);

  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace, std::ios::binary | std::ios::trunc);
    if (!trace) throw std::runtime_error("cannot write " + a.trace);
  }
  TraceSink sink;
  if (trace.is_open()) {
    sink = [&](const EpisodeOutcome& o, const EpisodeTrace& t) {
      for (const auto& s : t.steps) trace << trace_record(o, s).dump() << "\n";
    };
  }
  const auto outcomes = evaluate(cfg, sc, policy, seeds.first, seeds.last, a.episodes, sink);
  const EvalSummary s = summarize(outcomes);

  json j{{"schema", "uavmtd-eval-summary/1"},
         {"scenario", scenario_name(sc)},
         {"policy", a.policy},
         {"selection", a.stochastic ? "sampled" : "argmax"},
         {"seeds", {seeds.first, seeds.last}},
         {"episodes_per_seed", a.episodes}};
  j.update(eval_summary_json(s));

  if (!a.out.empty()) {
    const fs::path out(a.out);
    ensure_dir(out);
    std::string csv = eval_csv_header();
    for (const auto& o : outcomes) csv += eval_csv_row(a.policy, o);
    write_text(out / "eval.csv", csv);
    write_json(out / "eval_summary.json", j);
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config_path;
  std::string scenarios;
  std::string seeds = "1..5";
  std::string out;
  int episodes = 0;
  int eval_episodes = 10;
  int jobs = 1;
  bool timing = false;
};

struct SweepRun {
  Scenario scenario;
  std::uint64_t seed = 0;
  fs::path dir;
  std::optional<EvalSummary> eval;
  std::string error;
};

std::optional<EvalSummary> load_finished_run(const fs::path& dir) {
  try {
    std::ifstream ts(dir / "summary.json"), es(dir / "eval_summary.json");
    if (!ts || !es) return std::nullopt;
    const json t = json::parse(ts), e = json::parse(es);
    if (!t.value("complete", false)) return std::nullopt;
    EvalSummary s;
    s.episodes = e.at("episodes").get<int>();
    s.mitigation_mean = e.at("mitigation_rate").get<double>();
    s.mitigation_std = e.at("mitigation_rate_std").get<double>();
    s.episodes_with_outage = e.at("episodes_with_outage").get<int>();
    s.recovery_mean = e.at("mean_recovery_s").is_null() ? 0.0 : e.at("mean_recovery_s").get<double>();
    s.energy_mean = e.at("energy_J").get<double>();
    s.cost_mean = e.at("cumulative_cost").get<double>();
    s.return_mean = e.at("return").get<double>();
    return s;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

json stat(const std::vector<double>& v) { return {{"mean", mean(v)}, {"std", stddev(v)}}; }

json sweep_summary(const SweepArgs& a, const std::vector<Scenario>& scenarios, const std::vector<SweepRun>& runs,
                   std::size_t seeds_requested) {
  json rows = json::array();
  for (const Scenario sc : scenarios) {
    std::vector<double> mit, rec, energy, cost, ret;
    std::vector<std::uint64_t> done;
    for (const auto& r : runs) {
      if (!(r.scenario == sc) || !r.eval) continue;
      done.push_back(r.seed);
      mit.push_back(r.eval->mitigation_mean);
      if (r.eval->episodes_with_outage > 0) rec.push_back(r.eval->recovery_mean);
      energy.push_back(r.eval->energy_mean);
      cost.push_back(r.eval->cost_mean);
      ret.push_back(r.eval->return_mean);
    }
    rows.push_back({{"scenario", scenario_name(sc)},
                    {"seeds_requested", seeds_requested},
                    {"seeds_completed", done},
                    {"complete", done.size() == seeds_requested},
                    {"mitigation_rate", stat(mit)},
                    {"mean_recovery_s", rec.empty() ? json(nullptr) : stat(rec)},
                    {"energy_J", stat(energy)},
                    {"cumulative_cost", stat(cost)},
                    {"return", stat(ret)}});
  }
  bool complete = true;
  for (const auto& r : rows) complete = complete && r["complete"].get<bool>();
  return {{"schema", "uavmtd-sweep-summary/1"},
          {"seeds", a.seeds},
          {"eval_episodes", a.eval_episodes},
          {"complete", complete},
          {"scenarios", rows}};
}

std::string sweep_csv(const json& summary) {
  std::string out = "# uavmtd-sweep/1\nscenario,complete,seeds,mitigation_mean,mitigation_std,"
                    "recovery_mean_s,recovery_std_s,energy_mean_J,energy_std_J,cost_mean,cost_std,"
                    "return_mean,return_std\n";
  auto cell = [](const json& s, const char* f) {
    return s.is_null() ? std::string() : format_number(s.at(f).get<double>());
  };
  for (const auto& r : summary["scenarios"]) {
    out += r["scenario"].get<std::string>() + "," + (r["complete"].get<bool>() ? "1" : "0") + "," +
           std::to_string(r["seeds_completed"].size());
    for (const char* key : {"mitigation_rate", "mean_recovery_s", "energy_J", "cumulative_cost", "return"}) {
      out += "," + cell(r[key], "mean") + "," + cell(r[key], "std");
    }
    out += "\n";
  }
  return out;
}

int cmd_sweep(const SweepArgs& a) {
  const auto scenarios = a.scenarios.empty() ? all_scenarios() : parse_scenarios(a.scenarios);
  const SeedRange seeds = parse_seed_range(a.seeds);
  if (a.jobs <= 0) throw UsageError("--jobs must be positive");
  if (a.eval_episodes <= 0) throw UsageError("--eval-episodes must be positive");
  const ScenarioConfig cfg = read_config(a.config_path);
  validate(cfg);
  const fs::path out(a.out);
  ensure_dir(out);

  std::vector<SweepRun> runs;
  for (const Scenario sc : scenarios) {
    for (std::uint64_t s = seeds.first; s <= seeds.last; ++s) {
      SweepRun r{sc, s, out / (std::string(to_string(sc.strategy)) + "-" + std::string(to_string(sc.kind))) /
                            ("seed-" + std::to_string(s)), std::nullopt, {}};
      r.eval = load_finished_run(r.dir);
      runs.push_back(std::move(r));
    }
  }
  const std::size_t n_seeds = seeds.last - seeds.first + 1;
  std::mutex mu;
  auto publish = [&] {
    const json summary = sweep_summary(a, scenarios, runs, n_seeds);
    write_json(out / "sweep_summary.json", summary);
    write_text(out / "sweep_summary.csv", sweep_csv(summary));
  };
  publish();

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      SweepRun& r = runs[i];
      if (r.eval) continue;
      try {
        TrainArgs t;
        t.config_path = a.config_path;
        t.seed = r.seed;
        t.attacker = std::string(to_string(r.scenario.strategy));
        t.kind = std::string(to_string(r.scenario.kind));
        t.out = r.dir.string();
        t.episodes = a.episodes;
        t.timing = a.timing;
        t.quiet = true;
        ScenarioConfig run_cfg = cfg;
        if (a.episodes > 0) run_cfg.max_episodes = a.episodes;
        auto agents = run_train(t);
        const auto outcomes =
            evaluate(run_cfg, r.scenario, learned_policy(std::move(agents), false), r.seed, r.seed, a.eval_episodes);
        const EvalSummary s = summarize(outcomes);
        json j{{"schema", "uavmtd-eval-summary/1"},
               {"scenario", scenario_name(r.scenario)},
               {"policy", "learned"},
               {"selection", "argmax"},
               {"seeds", {r.seed, r.seed}},
               {"episodes_per_seed", a.eval_episodes}};
        j.update(eval_summary_json(s));
        std::string csv = eval_csv_header();
        for (const auto& o : outcomes) csv += eval_csv_row("learned", o);
        write_text(r.dir / "eval.csv", csv);
        write_json(r.dir / "eval_summary.json", j);
        std::lock_guard lock(mu);
        r.eval = s;
        std::fprintf(stderr, "[sweep] %s seed %llu  mitigation %.4f\n", scenario_name(r.scenario).c_str(),
                     static_cast<unsigned long long>(r.seed), s.mitigation_mean);
        publish();
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        r.error = e.what();
        std::fprintf(stderr, "[sweep] %s seed %llu failed: %s\n", scenario_name(r.scenario).c_str(),
                     static_cast<unsigned long long>(r.seed), e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::min<int>(a.jobs, static_cast<int>(runs.size())); ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  publish();
  const json summary = sweep_summary(a, scenarios, runs, n_seeds);
  std::cout << sweep_csv(summary);
  for (const auto& r : runs) {
    if (!r.error.empty()) return kExitRuntime;
  }
  return kExitOk;
}

void add_scenario_flags(CLI::App* cmd, std::string& config, std::string& attacker, std::string& kind) {
  cmd->add_option("--config", config, "scenario config file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--attacker", attacker, "attacker strategy")
      ->check(CLI::IsMember({"fixed", "random", "greedy"}))
      ->capture_default_str();
  cmd->add_option("--attack-kind", kind, "attack kind")->check(CLI::IsMember({"node", "link"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV swarm moving-target defense: training and evaluation"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "train the federated multi-agent policy for one scenario and seed");
  add_scenario_flags(tr, train.config_path, train.attacker, train.kind);
  tr->add_option("--seed", train.seed, "training seed")->capture_default_str();
  tr->add_option("--out", train.out, "output directory")->required();
  tr->add_option("--episodes", train.episodes, "override the episode count")->check(CLI::PositiveNumber);
  tr->add_flag("--timing", train.timing, "record wall-clock milliseconds per episode (breaks byte identity)");
  tr->add_option("--keep-checkpoints", train.keep_checkpoints, "round checkpoints to keep, 0 keeps all")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  EvalArgs ev;
  auto* eg = app.add_subcommand("eval", "evaluate a checkpoint or a baseline policy");
  add_scenario_flags(eg, ev.config_path, ev.attacker, ev.kind);
  eg->add_option("--checkpoint", ev.checkpoint, "checkpoint for --policy learned");
  eg->add_option("--policy", ev.policy, "learned, none, random or periodic:<k>")->capture_default_str();
  eg->add_option("--seeds", ev.seeds, "seed range A..B")->capture_default_str();
  eg->add_option("--episodes", ev.episodes, "episodes per seed")->capture_default_str();
  eg->add_flag("--stochastic-eval", ev.stochastic, "sample actions instead of taking the argmax");
  eg->add_option("--out", ev.out, "directory for eval.csv and eval_summary.json");
  eg->add_option("--trace", ev.trace, "write per-step records as JSON lines");

  SweepArgs sw;
  auto* sp = app.add_subcommand("sweep", "train and evaluate a scenario grid over a seed range");
  sp->add_option("--config", sw.config_path, "scenario config file")->check(CLI::ExistingFile);
  sp->add_option("--scenarios", sw.scenarios, "comma list of strategy:kind (default: all six)");
  sp->add_option("--seeds", sw.seeds, "seed range A..B")->capture_default_str();
  sp->add_option("--out", sw.out, "output directory")->required();
  sp->add_option("--episodes", sw.episodes, "override the episode count")->check(CLI::PositiveNumber);
  sp->add_option("--eval-episodes", sw.eval_episodes, "evaluation episodes per run")->capture_default_str();
  sp->add_option("--jobs", sw.jobs, "parallel workers")->capture_default_str();
  sp->add_flag("--timing", sw.timing, "record wall-clock milliseconds per episode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (tr->parsed()) {
      run_train(train);
      return kExitOk;
    }
    if (eg->parsed()) return cmd_eval(ev);
    return cmd_sweep(sw);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
