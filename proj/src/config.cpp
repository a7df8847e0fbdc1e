#include "uavmtd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace uavmtd {

std::string_view to_string(AggregationWeighting w) {
  switch (w) {
    case AggregationWeighting::automatic: return "auto";
    case AggregationWeighting::raw: return "raw";
    case AggregationWeighting::shifted: return "shifted";
  }
  return "auto";
}

AggregationWeighting parse_aggregation_weighting(std::string_view text) {
  if (text == "auto") return AggregationWeighting::automatic;
  if (text == "raw") return AggregationWeighting::raw;
  if (text == "shifted") return AggregationWeighting::shifted;
  throw ConfigError("aggregation_weighting must be one of auto, raw, shifted; got '" +
                    std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

double to_double(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigError("key '" + std::string(key) + "': expected a number, got '" +
                      std::string(text) + "'");
  }
  return value;
}

int to_int(std::string_view key, std::string_view text) {
  // Accept integral values written in floating form ("2e4").
  const double value = to_double(key, text);
  if (value != std::floor(value) || std::abs(value) > 2e9) {
    throw ConfigError("key '" + std::string(key) + "': expected an integer, got '" +
                      std::string(text) + "'");
  }
  return static_cast<int>(value);
}

template <std::size_t N>
std::array<double, N> to_array(std::string_view key, std::string_view text) {
  const auto items = split_list(text);
  if (items.size() != N) {
    throw ConfigError("key '" + std::string(key) + "': expected " + std::to_string(N) +
                      " comma-separated values");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = to_double(key, items[i]);
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <std::size_t N>
std::string fmt_array(const std::array<double, N>& a) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ", ";
    out += fmt_double(a[i]);
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto dbl = [&t](const char* name, double ScenarioConfig::*field) {
      t[name] = [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
        c.*field = to_double(k, v);
      };
    };
    auto integer = [&t](const char* name, int ScenarioConfig::*field) {
      t[name] = [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
        c.*field = to_int(k, v);
      };
    };
    auto pm = [&t](const char* name, double PowerModel::*field) {
      t[name] = [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
        c.power.*field = to_double(k, v);
      };
    };

    t["area_size"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.area_size = to_array<2>(k, v);
    };
    t["gcs_position"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.gcs_position = to_array<3>(k, v);
    };
    dbl("patrol_radius", &ScenarioConfig::patrol_radius);
    dbl("patrol_height", &ScenarioConfig::patrol_height);
    integer("n_uavs", &ScenarioConfig::n_uavs);
    integer("n_channels", &ScenarioConfig::n_channels);
    dbl("comm_range", &ScenarioConfig::comm_range);
    dbl("v_pat", &ScenarioConfig::v_pat);
    dbl("v_max", &ScenarioConfig::v_max);
    dbl("d_min", &ScenarioConfig::d_min);
    dbl("deviation_threshold", &ScenarioConfig::deviation_threshold);
    dbl("tau_atk", &ScenarioConfig::tau_atk);
    dbl("tau_recon", &ScenarioConfig::tau_recon);
    dbl("tau_exec_leader", &ScenarioConfig::tau_exec_leader);
    dbl("tau_exec_route", &ScenarioConfig::tau_exec_route);
    dbl("tau_exec_freq", &ScenarioConfig::tau_exec_freq);
    integer("steps_per_episode", &ScenarioConfig::steps_per_episode);
    dbl("dt", &ScenarioConfig::dt);
    integer("max_episodes", &ScenarioConfig::max_episodes);
    dbl("gamma", &ScenarioConfig::gamma);
    t["hidden_sizes"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      c.hidden_sizes.clear();
      for (auto item : split_list(v)) c.hidden_sizes.push_back(to_int(k, item));
    };
    dbl("lr", &ScenarioConfig::lr);
    integer("batch_size", &ScenarioConfig::batch_size);
    integer("buffer_capacity", &ScenarioConfig::buffer_capacity);
    integer("agg_interval", &ScenarioConfig::agg_interval);
    integer("reward_window", &ScenarioConfig::reward_window);
    integer("finetune_steps", &ScenarioConfig::finetune_steps);
    integer("finetune_recent_episodes", &ScenarioConfig::finetune_recent_episodes);
    t["reward_coeffs"] = [](ScenarioConfig& c, std::string_view k, std::string_view v) {
      const auto a = to_array<5>(k, v);
      c.reward = RewardCoeffs{a[0], a[1], a[2], a[3], a[4]};
    };
    dbl("entropy_coeff", &ScenarioConfig::entropy_coeff);
    t["aggregation_weighting"] = [](ScenarioConfig& c, std::string_view, std::string_view v) {
      c.aggregation_weighting = parse_aggregation_weighting(v);
    };
    integer("heartbeat_window", &ScenarioConfig::heartbeat_window);
    dbl("heartbeat_threshold", &ScenarioConfig::heartbeat_threshold);
    pm("energy_c1", &PowerModel::c1);
    pm("energy_c2", &PowerModel::c2);
    pm("energy_c3", &PowerModel::c3);
    pm("energy_mass", &PowerModel::mass);
    pm("energy_gravity", &PowerModel::gravity);
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.area_size[0] > 0 && c.area_size[1] > 0, "area_size must be positive");
  require(c.patrol_radius > 0, "patrol_radius must be positive");
  require(c.patrol_height > 0, "patrol_height must be positive");
  require(c.n_uavs >= 1, "n_uavs must be at least 1");
  require(c.n_channels >= 2, "n_channels must be at least 2 (hopping needs a different channel)");
  require(c.comm_range > 0, "comm_range must be positive");
  require(c.v_pat > 0, "v_pat must be positive");
  require(c.v_max > 0, "v_max must be positive");
  require(c.v_pat <= c.v_max, "v_pat must not exceed v_max");
  require(c.d_min > 0, "d_min must be positive");
  if (c.n_uavs >= 2) {
    require(c.d_min < 2.0 * c.patrol_radius * std::sin(std::numbers::pi / c.n_uavs),
            "d_min must be below the initial ring spacing 2 r sin(pi/N)");
  }
  require(c.deviation_threshold > 0, "deviation_threshold must be positive");
  require(c.tau_atk > 0, "tau_atk must be positive");
  require(c.tau_recon > 0, "tau_recon must be positive");
  require(c.tau_exec_leader > 0 && c.tau_exec_route > 0 && c.tau_exec_freq > 0,
          "tau_exec values must be positive");
  require(c.steps_per_episode > 0, "steps_per_episode must be positive");
  require(c.dt > 0, "dt must be positive");
  require(c.tau_atk + c.tau_recon <= c.steps_per_episode * c.dt,
          "tau_atk + tau_recon must fit in one episode (T * dt)");
  require(c.max_episodes > 0, "max_episodes must be positive");
  require(c.gamma >= 0.0 && c.gamma <= 1.0, "gamma must lie in [0, 1]");
  require(!c.hidden_sizes.empty(), "hidden_sizes must list at least one layer");
  for (int h : c.hidden_sizes) require(h > 0, "hidden_sizes entries must be positive");
  require(c.lr > 0, "lr must be positive");
  require(c.batch_size > 0, "batch_size must be positive");
  require(c.buffer_capacity > 0, "buffer_capacity must be positive");
  require(c.agg_interval > 0, "agg_interval must be positive");
  require(c.reward_window > 0, "reward_window must be positive");
  require(c.finetune_steps >= 0, "finetune_steps must be non-negative");
  require(c.finetune_recent_episodes > 0, "finetune_recent_episodes must be positive");
  require(c.entropy_coeff >= 0, "entropy_coeff must be non-negative");
  require(c.heartbeat_window > 0, "heartbeat_window must be positive");
  require(c.heartbeat_threshold >= 0 && c.heartbeat_threshold <= 1,
          "heartbeat_threshold must lie in [0, 1]");
  const auto& p = c.power;
  require(p.c1 > 0 && p.c2 > 0 && p.c3 > 0 && p.mass > 0 && p.gravity > 0,
          "energy constants must be positive");
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig config;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    }
    try {
      it->second(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(config);
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize(const ScenarioConfig& c) {
  std::ostringstream out;
  auto kv = [&out](const char* key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  auto d = [](double v) { return fmt_double(v); };
  auto i = [](int v) { return std::to_string(v); };

  kv("area_size", fmt_array(c.area_size));
  kv("gcs_position", fmt_array(c.gcs_position));
  kv("patrol_radius", d(c.patrol_radius));
  kv("patrol_height", d(c.patrol_height));
  kv("n_uavs", i(c.n_uavs));
  kv("n_channels", i(c.n_channels));
  kv("comm_range", d(c.comm_range));
  kv("v_pat", d(c.v_pat));
  kv("v_max", d(c.v_max));
  kv("d_min", d(c.d_min));
  kv("deviation_threshold", d(c.deviation_threshold));
  kv("tau_atk", d(c.tau_atk));
  kv("tau_recon", d(c.tau_recon));
  kv("tau_exec_leader", d(c.tau_exec_leader));
  kv("tau_exec_route", d(c.tau_exec_route));
  kv("tau_exec_freq", d(c.tau_exec_freq));
  kv("steps_per_episode", i(c.steps_per_episode));
  kv("dt", d(c.dt));
  kv("max_episodes", i(c.max_episodes));
  kv("gamma", d(c.gamma));
  std::string hidden;
  for (std::size_t k = 0; k < c.hidden_sizes.size(); ++k) {
    if (k) hidden += ", ";
    hidden += i(c.hidden_sizes[k]);
  }
  kv("hidden_sizes", hidden);
  kv("lr", d(c.lr));
  kv("batch_size", i(c.batch_size));
  kv("buffer_capacity", i(c.buffer_capacity));
  kv("agg_interval", i(c.agg_interval));
  kv("reward_window", i(c.reward_window));
  kv("finetune_steps", i(c.finetune_steps));
  kv("finetune_recent_episodes", i(c.finetune_recent_episodes));
  const auto& r = c.reward;
  kv("reward_coeffs", fmt_array(std::array<double, 5>{r.connectivity, r.formation, r.velocity,
                                                      r.attack, r.cost}));
  kv("entropy_coeff", d(c.entropy_coeff));
  kv("aggregation_weighting", std::string(to_string(c.aggregation_weighting)));
  kv("heartbeat_window", i(c.heartbeat_window));
  kv("heartbeat_threshold", d(c.heartbeat_threshold));
  kv("energy_c1", d(c.power.c1));
  kv("energy_c2", d(c.power.c2));
  kv("energy_c3", d(c.power.c3));
  kv("energy_mass", d(c.power.mass));
  kv("energy_gravity", d(c.power.gravity));
  return out.str();
}

}  // namespace uavmtd
