#include "playkit/config.hpp"

#include <fstream>
#include <sstream>

namespace playkit {

std::string to_string(Method m) {
  switch (m) {
    case Method::Alan: return "alan";
    case Method::Ec: return "ec";
    case Method::Awr: return "awr";
    case Method::Lexa: return "lexa";
    case Method::Icm: return "icm";
    case Method::Random: return "random";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "alan") return Method::Alan;
  if (s == "ec") return Method::Ec;
  if (s == "awr") return Method::Awr;
  if (s == "lexa") return Method::Lexa;
  if (s == "icm") return Method::Icm;
  if (s == "random") return Method::Random;
  throw ConfigError("unknown method '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

bool IniFile::has(const std::string& sec, const std::string& key) const {
  const auto s = sections.find(sec);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& sec, const std::string& key,
                         const std::string& fallback) const {
  const auto s = sections.find(sec);
  if (s == sections.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_num(const std::string& sec, const std::string& key,
                        double fallback) const {
  if (!has(sec, key)) return fallback;
  const std::string v = get(sec, key, "");
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("[" + sec + "] " + key + ": expected number, got '" + v +
                      "'");
  }
}

std::int64_t IniFile::get_int(const std::string& sec, const std::string& key,
                              std::int64_t fallback) const {
  if (!has(sec, key)) return fallback;
  const std::string v = get(sec, key, "");
  try {
    size_t pos = 0;
    const std::int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("[" + sec + "] " + key + ": expected integer, got '" + v +
                      "'");
  }
}

bool IniFile::get_bool(const std::string& sec, const std::string& key,
                       bool fallback) const {
  if (!has(sec, key)) return fallback;
  const std::string v = get(sec, key, "");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("[" + sec + "] " + key + ": expected bool, got '" + v + "'");
}

std::vector<std::string> IniFile::get_list(
    const std::string& sec, const std::string& key,
    const std::vector<std::string>& fallback) const {
  if (!has(sec, key)) return fallback;
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(get(sec, key, ""));
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty())
    throw ConfigError("[" + sec + "] " + key + ": empty list");
  return out;
}

IniFile parse_ini(const std::string& text, const std::string& origin) {
  IniFile ini;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      ini.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    ini.sections[section][key] = value;
  }
  return ini;
}

IniFile load_ini(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ini(ss.str(), path);
}

void RunConfig::validate() const {
  cem.validate();
  weights.validate();
  if (sched.episode_len < 1) throw ConfigError("episode_len must be >= 1");
  if (sched.episode_len % cem.horizon != 0)
    throw ConfigError("episode_len must be a multiple of the planner horizon");
  if (sched.bootstrap_count < 1)
    throw ConfigError("bootstrap_count must be >= 1");
  if (sched.budget < 0) throw ConfigError("budget must be >= 0");
  if (ens_members < 2) throw ConfigError("ensemble needs >= 2 members");
  if (change.noise.flip_prob < 0.0 || change.noise.flip_prob > 1.0)
    throw ConfigError("flip_prob must be in [0, 1]");
  if (awr.n_top < 1) throw ConfigError("awr n_top must be >= 1");
}

FullConfig config_from_ini(const IniFile& ini) {
  FullConfig fc;
  RunConfig& rc = fc.run;

  rc.method = method_from_string(ini.get("explorer", "method", "alan"));
  rc.task = ini.get("explorer", "task", rc.task);
  rc.seed = static_cast<std::uint64_t>(
      ini.get_int("explorer", "seed", static_cast<std::int64_t>(rc.seed)));
  rc.out_dir = ini.get("explorer", "out", rc.out_dir);
  rc.scene_file = ini.get("scene", "file", "");

  rc.change.blur_sigma = ini.get_num("change", "blur_sigma", rc.change.blur_sigma);
  rc.change.pixel_threshold =
      ini.get_num("change", "pixel_threshold", rc.change.pixel_threshold);
  rc.change.feature_threshold =
      ini.get_num("change", "feature_threshold", rc.change.feature_threshold);
  rc.change.noise.flip_prob =
      ini.get_num("change", "flip_prob", rc.change.noise.flip_prob);
  rc.change.noise.dilate_px = static_cast<int>(
      ini.get_int("change", "dilate_px", rc.change.noise.dilate_px));

  rc.dims.embed = static_cast<int>(ini.get_int("model", "embed", rc.dims.embed));
  rc.dims.hidden =
      static_cast<int>(ini.get_int("model", "hidden", rc.dims.hidden));
  rc.dims.deter = static_cast<int>(ini.get_int("model", "deter", rc.dims.deter));
  rc.dims.stoch = static_cast<int>(ini.get_int("model", "stoch", rc.dims.stoch));
  rc.wm_train.beta = ini.get_num("model", "beta", rc.wm_train.beta);
  rc.wm_train.free_nats =
      ini.get_num("model", "free_nats", rc.wm_train.free_nats);
  rc.wm_train.adam.lr = ini.get_num("model", "lr", rc.wm_train.adam.lr);

  rc.ens_hidden =
      static_cast<int>(ini.get_int("ensemble", "hidden", rc.ens_hidden));
  rc.ens_members =
      static_cast<int>(ini.get_int("ensemble", "members", rc.ens_members));
  rc.ens_adam.lr = ini.get_num("ensemble", "lr", rc.ens_adam.lr);

  rc.cem.horizon = static_cast<int>(ini.get_int("planner", "horizon", rc.cem.horizon));
  rc.cem.population =
      static_cast<int>(ini.get_int("planner", "population", rc.cem.population));
  rc.cem.iterations =
      static_cast<int>(ini.get_int("planner", "iterations", rc.cem.iterations));
  rc.cem.elite_frac = ini.get_num("planner", "elite_frac", rc.cem.elite_frac);
  rc.cem.init_std = ini.get_num("planner", "init_std", rc.cem.init_std);
  rc.cem.refit_std_floor =
      ini.get_num("planner", "refit_std_floor", rc.cem.refit_std_floor);
  rc.weights.w_ec = ini.get_num("planner", "w_ec", rc.weights.w_ec);
  rc.weights.w_dis = ini.get_num("planner", "w_dis", rc.weights.w_dis);

  rc.awr.n_top = static_cast<int>(ini.get_int("awr", "n_top", rc.awr.n_top));
  rc.awr.beta = ini.get_num("awr", "beta", rc.awr.beta);
  rc.awr.discount = ini.get_num("awr", "discount", rc.awr.discount);
  rc.awr.weight_clip = ini.get_num("awr", "clip", rc.awr.weight_clip);
  rc.awr.action_std = ini.get_num("awr", "action_std", rc.awr.action_std);
  rc.awr.hidden = static_cast<int>(ini.get_int("awr", "hidden", rc.awr.hidden));
  rc.awr.adam.lr = ini.get_num("awr", "lr", rc.awr.adam.lr);

  rc.sched.episode_len = static_cast<int>(
      ini.get_int("explorer", "episode_len", rc.sched.episode_len));
  rc.sched.bootstrap_count = static_cast<int>(
      ini.get_int("explorer", "bootstrap", rc.sched.bootstrap_count));
  rc.sched.budget =
      static_cast<int>(ini.get_int("explorer", "budget", rc.sched.budget));
  rc.sched.episodes_per_cycle = static_cast<int>(
      ini.get_int("explorer", "episodes_per_cycle", rc.sched.episodes_per_cycle));
  rc.sched.wm_steps =
      static_cast<int>(ini.get_int("explorer", "wm_steps", rc.sched.wm_steps));
  rc.sched.ens_steps =
      static_cast<int>(ini.get_int("explorer", "ens_steps", rc.sched.ens_steps));
  rc.sched.awr_steps =
      static_cast<int>(ini.get_int("explorer", "awr_steps", rc.sched.awr_steps));
  rc.sched.wm_batch =
      static_cast<int>(ini.get_int("explorer", "wm_batch", rc.sched.wm_batch));
  rc.sched.ens_batch =
      static_cast<int>(ini.get_int("explorer", "ens_batch", rc.sched.ens_batch));
  rc.sched.awr_batch =
      static_cast<int>(ini.get_int("explorer", "awr_batch", rc.sched.awr_batch));
  rc.sched.checkpoint_every = static_cast<int>(ini.get_int(
      "explorer", "checkpoint_every", rc.sched.checkpoint_every));
  rc.sched.concurrent =
      ini.get_bool("explorer", "concurrent", rc.sched.concurrent);

  fc.bench.methods = ini.get_list("benchmark", "methods", fc.bench.methods);
  fc.bench.tasks = ini.get_list("benchmark", "tasks", fc.bench.tasks);
  if (ini.has("benchmark", "seeds")) {
    fc.bench.seeds.clear();
    for (const auto& s : ini.get_list("benchmark", "seeds", {}))
      fc.bench.seeds.push_back(std::stoull(s));
  }
  fc.bench.out_dir = ini.get("benchmark", "out", fc.bench.out_dir);
  fc.bench.jobs = static_cast<int>(ini.get_int("benchmark", "jobs", 0));

  rc.validate();
  return fc;
}

FullConfig load_config(const std::string& path) {
  if (path.empty()) {
    FullConfig fc;
    fc.run.validate();
    return fc;
  }
  return config_from_ini(load_ini(path));
}

std::string run_config_to_text(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "[explorer]\n";
  os << "method = " << to_string(cfg.method) << "\n";
  os << "task = " << cfg.task << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "episode_len = " << cfg.sched.episode_len << "\n";
  os << "bootstrap = " << cfg.sched.bootstrap_count << "\n";
  os << "budget = " << cfg.sched.budget << "\n";
  os << "episodes_per_cycle = " << cfg.sched.episodes_per_cycle << "\n";
  os << "wm_steps = " << cfg.sched.wm_steps << "\n";
  os << "ens_steps = " << cfg.sched.ens_steps << "\n";
  os << "awr_steps = " << cfg.sched.awr_steps << "\n";
  os << "wm_batch = " << cfg.sched.wm_batch << "\n";
  os << "ens_batch = " << cfg.sched.ens_batch << "\n";
  os << "awr_batch = " << cfg.sched.awr_batch << "\n";
  os << "checkpoint_every = " << cfg.sched.checkpoint_every << "\n";
  os << "concurrent = " << (cfg.sched.concurrent ? "true" : "false") << "\n";
  os << "\n[scene]\n";
  if (!cfg.scene_file.empty()) os << "file = " << cfg.scene_file << "\n";
  os << "\n[change]\n";
  os << "blur_sigma = " << cfg.change.blur_sigma << "\n";
  os << "pixel_threshold = " << cfg.change.pixel_threshold << "\n";
  os << "feature_threshold = " << cfg.change.feature_threshold << "\n";
  os << "flip_prob = " << cfg.change.noise.flip_prob << "\n";
  os << "dilate_px = " << cfg.change.noise.dilate_px << "\n";
  os << "\n[model]\n";
  os << "embed = " << cfg.dims.embed << "\n";
  os << "hidden = " << cfg.dims.hidden << "\n";
  os << "deter = " << cfg.dims.deter << "\n";
  os << "stoch = " << cfg.dims.stoch << "\n";
  os << "beta = " << cfg.wm_train.beta << "\n";
  os << "free_nats = " << cfg.wm_train.free_nats << "\n";
  os << "lr = " << cfg.wm_train.adam.lr << "\n";
  os << "\n[ensemble]\n";
  os << "hidden = " << cfg.ens_hidden << "\n";
  os << "members = " << cfg.ens_members << "\n";
  os << "lr = " << cfg.ens_adam.lr << "\n";
  os << "\n[planner]\n";
  os << "horizon = " << cfg.cem.horizon << "\n";
  os << "population = " << cfg.cem.population << "\n";
  os << "iterations = " << cfg.cem.iterations << "\n";
  os << "elite_frac = " << cfg.cem.elite_frac << "\n";
  os << "init_std = " << cfg.cem.init_std << "\n";
  os << "refit_std_floor = " << cfg.cem.refit_std_floor << "\n";
  os << "w_ec = " << cfg.weights.w_ec << "\n";
  os << "w_dis = " << cfg.weights.w_dis << "\n";
  os << "\n[awr]\n";
  os << "n_top = " << cfg.awr.n_top << "\n";
  os << "beta = " << cfg.awr.beta << "\n";
  os << "discount = " << cfg.awr.discount << "\n";
  os << "clip = " << cfg.awr.weight_clip << "\n";
  os << "action_std = " << cfg.awr.action_std << "\n";
  os << "hidden = " << cfg.awr.hidden << "\n";
  os << "lr = " << cfg.awr.adam.lr << "\n";
  return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = run_config_to_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace playkit
