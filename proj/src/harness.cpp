#include "spectra/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace spectra {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = kFnvOffset) {
  const auto* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= b[i];
    h *= kFnvPrime;
  }
  return h;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kKindNames[] = {
    "smin-tail",        "corank-census", "zero-prob",
    "partition-check",  "expansion-audit", "bounds-audit",
    "t23-anticoncentration", "net-audit", "distance-diagnostic",
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Fills defaults that depend on other fields so canonical() is unambiguous.
ExperimentConfig resolved(ExperimentConfig cfg) {
  if (cfg.t_grid.empty() && cfg.experiment == ExperimentKind::SminTail)
    cfg.t_grid = default_t_grid();
  return cfg;
}

json class_params_json(const ClassParams& cp) {
  json j;
  j["gamma"] = cp.gamma;
  j["c_t1"] = cp.c_t1;
  j["c_t2"] = cp.c_t2;
  j["r"] = cp.r;
  j["delta"] = cp.delta;
  j["rho"] = cp.rho;
  j["phi"] = cp.phi;
  j["phi0"] = cp.phi0;
  j["k_threshold"] = cp.k_threshold;
  return j;
}

ClassParams class_params_from_json(const json& j) {
  ClassParams cp;
  cp.gamma = j.at("gamma").get<double>();
  cp.c_t1 = j.at("c_t1").get<double>();
  cp.c_t2 = j.at("c_t2").get<double>();
  cp.r = j.at("r").get<double>();
  cp.delta = j.at("delta").get<double>();
  cp.rho = j.at("rho").get<double>();
  cp.phi = j.at("phi").get<double>();
  cp.phi0 = j.at("phi0").get<double>();
  cp.k_threshold = j.at("k_threshold").get<int>();
  return cp;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kKindNames[int(kind)]; }

ExperimentKind experiment_from_string(const std::string& name) {
  for (int i = 0; i < 9; ++i)
    if (name == kKindNames[i]) return ExperimentKind(i);
  throw std::invalid_argument("unknown experiment: " + name);
}

std::vector<double> default_t_grid() {
  std::vector<double> grid;
  grid.reserve(29);
  for (int i = 0; i < 29; ++i) grid.push_back(std::pow(10.0, -14.0 + 14.0 * i / 28.0));
  return grid;
}

void ExperimentConfig::validate() const {
  model.validate();
  class_params.validate(model.beta);
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (checkpoint_every < 0) throw std::invalid_argument("config: checkpoint_every must be >= 0");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0) throw std::invalid_argument("config: t_grid must be nonnegative");
    if (i > 0 && t_grid[i] <= t_grid[i - 1])
      throw std::invalid_argument("config: t_grid must be increasing");
  }
}

std::string ExperimentConfig::canonical() const {
  const ExperimentConfig c = resolved(*this);
  std::ostringstream ss;
  ss << "experiment = " << to_string(c.experiment) << "\n";
  ss << "n = " << c.model.n << "\n";
  ss << "p = " << fmt_double(c.model.p) << "\n";
  ss << "beta = " << c.model.beta << "\n";
  ss << "seed = " << c.model.seed << "\n";
  ss << "trials = " << c.trials << "\n";
  ss << "gamma = " << fmt_double(c.class_params.gamma) << "\n";
  ss << "c_t1 = " << fmt_double(c.class_params.c_t1) << "\n";
  ss << "c_t2 = " << fmt_double(c.class_params.c_t2) << "\n";
  ss << "r = " << fmt_double(c.class_params.r) << "\n";
  ss << "delta = " << fmt_double(c.class_params.delta) << "\n";
  ss << "rho = " << fmt_double(c.class_params.rho) << "\n";
  ss << "phi = " << fmt_double(c.class_params.phi) << "\n";
  ss << "phi0 = " << fmt_double(c.class_params.phi0) << "\n";
  ss << "k_threshold = " << c.class_params.k_threshold << "\n";
  ss << "t_grid =";
  for (double t : c.t_grid) ss << " " << fmt_double(t);
  ss << "\n";
  return ss.str();
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string text = canonical();
  return fnv1a(text.data(), text.size());
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool beta_seen = false, class_field_seen = false;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "experiment") {
      cfg.experiment = experiment_from_string(val);
    } else if (key == "n") {
      cfg.model.n = std::stoi(val);
    } else if (key == "p") {
      cfg.model.p = std::stod(val);
    } else if (key == "beta") {
      cfg.model.beta = std::stoi(val);
      beta_seen = true;
    } else if (key == "seed") {
      cfg.model.seed = std::stoull(val);
    } else if (key == "trials") {
      cfg.trials = std::stoi(val);
    } else if (key == "workers") {
      cfg.workers = std::stoi(val);
    } else if (key == "checkpoint_every") {
      cfg.checkpoint_every = std::stoi(val);
    } else if (key == "output_path") {
      cfg.output_path = val;
    } else if (key == "t_grid") {
      cfg.t_grid.clear();
      std::istringstream gs(val);
      double t;
      while (gs >> t) cfg.t_grid.push_back(t);
    } else if (key == "gamma") {
      cfg.class_params.gamma = std::stod(val);
      class_field_seen = true;
    } else if (key == "c_t1") {
      cfg.class_params.c_t1 = std::stod(val);
      class_field_seen = true;
    } else if (key == "c_t2") {
      cfg.class_params.c_t2 = std::stod(val);
      class_field_seen = true;
    } else if (key == "r") {
      cfg.class_params.r = std::stod(val);
      class_field_seen = true;
    } else if (key == "delta") {
      cfg.class_params.delta = std::stod(val);
      class_field_seen = true;
    } else if (key == "rho") {
      cfg.class_params.rho = std::stod(val);
      class_field_seen = true;
    } else if (key == "phi") {
      cfg.class_params.phi = std::stod(val);
      class_field_seen = true;
    } else if (key == "phi0") {
      cfg.class_params.phi0 = std::stod(val);
      class_field_seen = true;
    } else if (key == "k_threshold") {
      cfg.class_params.k_threshold = std::stoi(val);
      class_field_seen = true;
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  // beta-dependent defaults unless the file pinned class fields explicitly
  if (beta_seen && !class_field_seen) cfg.class_params = ClassParams::defaults(cfg.model.beta);
  return cfg;
}

bool RunResult::all_pass() const {
  for (const StatRecord& s : stats)
    if (!s.pass) return false;
  return true;
}

void write_checkpoint(const std::string& path, const ExperimentConfig& config,
                      const std::vector<TrialRecord>& done) {
  std::string cfg_text = config.canonical();
  // output path is excluded from the canonical identity but resume needs it
  if (!config.output_path.empty()) cfg_text += "output_path = " + config.output_path + "\n";
  std::string body;
  body.append("SPCK");
  body.push_back(char(1));  // version
  std::uint32_t cfg_len = std::uint32_t(cfg_text.size());
  body.append(reinterpret_cast<const char*>(&cfg_len), 4);
  body.append(cfg_text);
  std::uint64_t n_rec = done.size();
  body.append(reinterpret_cast<const char*>(&n_rec), 8);
  for (const TrialRecord& r : done) {
    body.append(reinterpret_cast<const char*>(&r.hash), 8);
    body.append(reinterpret_cast<const char*>(r.v), 48);
  }
  const std::uint64_t sum = fnv1a(body.data(), body.size());
  body.append(reinterpret_cast<const char*>(&sum), 8);
  // write-then-rename so an interrupted write never corrupts the checkpoint
  const std::string tmp = path + ".tmp";
  write_file(tmp, body);
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot replace checkpoint " + path);
}

std::vector<TrialRecord> read_checkpoint(const std::string& path, ExperimentConfig* config_out) {
  const std::string body = read_file(path);
  if (body.size() < 4 + 1 + 4 + 8 + 8 || body.compare(0, 4, "SPCK") != 0)
    throw std::runtime_error("checkpoint: bad magic: " + path);
  if (body[4] != char(1)) throw std::runtime_error("checkpoint: unsupported version");
  std::uint64_t stored_sum = 0;
  std::memcpy(&stored_sum, body.data() + body.size() - 8, 8);
  if (fnv1a(body.data(), body.size() - 8) != stored_sum)
    throw std::runtime_error("checkpoint: checksum mismatch: " + path);
  std::size_t off = 5;
  std::uint32_t cfg_len = 0;
  std::memcpy(&cfg_len, body.data() + off, 4);
  off += 4;
  const std::string cfg_text = body.substr(off, cfg_len);
  off += cfg_len;
  std::uint64_t n_rec = 0;
  std::memcpy(&n_rec, body.data() + off, 8);
  off += 8;
  if (body.size() != off + n_rec * 56 + 8) throw std::runtime_error("checkpoint: truncated record section");
  std::vector<TrialRecord> records(static_cast<std::size_t>(n_rec));
  for (std::uint64_t i = 0; i < n_rec; ++i) {
    std::memcpy(&records[std::size_t(i)].hash, body.data() + off, 8);
    std::memcpy(records[std::size_t(i)].v, body.data() + off + 8, 48);
    off += 56;
  }
  if (config_out) *config_out = resolved(parse_config_text(cfg_text));
  return records;
}

namespace {

// Computes records [done, trials) in place, checkpointing each chunk.
RunResult finish_run(ExperimentConfig cfg, std::vector<TrialRecord>& records, int done,
                     const std::string& ckpt_path) {
  const auto start = std::chrono::steady_clock::now();
  const int trials = cfg.trials;
  while (done < trials) {
    const int chunk_end =
        cfg.checkpoint_every > 0 ? std::min(trials, done + cfg.checkpoint_every) : trials;
    std::atomic<int> next{done};
    auto worker = [&]() {
      for (int idx = next.fetch_add(1); idx < chunk_end; idx = next.fetch_add(1))
        records[std::size_t(idx)] = run_trial(cfg, idx);
    };
    if (cfg.workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    done = chunk_end;
    if (!ckpt_path.empty())
      write_checkpoint(ckpt_path, cfg, {records.begin(), records.begin() + done});
  }

  RunResult result;
  result.config = cfg;
  result.stats = aggregate(cfg, records);
  result.stream_lo = 0;
  result.stream_hi = std::uint64_t(trials);
  std::uint64_t digest = kFnvOffset;
  for (const TrialRecord& r : records) digest = fnv1a(&r.hash, 8, digest);
  result.sample_digest = digest;
  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!cfg.output_path.empty()) write_file(cfg.output_path, serialize_run_result(result));
  return result;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  ExperimentConfig cfg = resolved(config);
  cfg.validate();
  std::string ckpt_path;
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  int done = 0;
  if (cfg.checkpoint_every > 0) {
    ckpt_path = (cfg.output_path.empty() ? std::string("run") : cfg.output_path) + ".ckpt";
    std::ifstream probe(ckpt_path, std::ios::binary);
    if (probe.good()) {
      probe.close();
      ExperimentConfig stored;
      std::vector<TrialRecord> prev = read_checkpoint(ckpt_path, &stored);
      if (stored.hash() != cfg.hash())
        throw std::runtime_error("checkpoint config mismatch: " + ckpt_path);
      if (prev.size() > std::size_t(cfg.trials))
        throw std::runtime_error("checkpoint has more records than config.trials");
      std::copy(prev.begin(), prev.end(), records.begin());
      done = int(prev.size());
    }
  }
  return finish_run(cfg, records, done, ckpt_path);
}

RunResult resume(const std::string& checkpoint_path) {
  ExperimentConfig cfg;
  std::vector<TrialRecord> prev = read_checkpoint(checkpoint_path, &cfg);
  cfg.validate();
  if (prev.size() > std::size_t(cfg.trials))
    throw std::runtime_error("checkpoint has more records than config.trials");
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  std::copy(prev.begin(), prev.end(), records.begin());
  return finish_run(cfg, records, int(prev.size()), checkpoint_path);
}

std::string serialize_run_result(const RunResult& result) {
  const ExperimentConfig& c = result.config;
  json j;
  json jc;
  jc["experiment"] = to_string(c.experiment);
  jc["n"] = c.model.n;
  jc["p"] = c.model.p;
  jc["beta"] = c.model.beta;
  jc["seed"] = c.model.seed;
  jc["trials"] = c.trials;
  jc["class_params"] = class_params_json(c.class_params);
  jc["t_grid"] = c.t_grid;
  j["config"] = jc;
  json stats = json::array();
  for (const StatRecord& s : result.stats) {
    json js;
    js["name"] = s.name;
    js["empirical"] = s.empirical;
    js["stderr"] = s.stderr_;
    js["prediction"] = s.prediction;
    js["bound"] = s.bound;
    js["tolerance"] = s.tolerance;
    js["pass"] = s.pass;
    stats.push_back(std::move(js));
  }
  j["stats"] = std::move(stats);
  json ledger;
  ledger["stream_lo"] = result.stream_lo;
  ledger["stream_hi"] = result.stream_hi;
  ledger["sample_digest"] = result.sample_digest;
  j["seed_ledger"] = std::move(ledger);
  return j.dump(2) + "\n";
}

RunResult parse_run_result(const std::string& text) {
  const json j = json::parse(text);
  RunResult result;
  const json& jc = j.at("config");
  result.config.experiment = experiment_from_string(jc.at("experiment").get<std::string>());
  result.config.model.n = jc.at("n").get<int>();
  result.config.model.p = jc.at("p").get<double>();
  result.config.model.beta = jc.at("beta").get<int>();
  result.config.model.seed = jc.at("seed").get<std::uint64_t>();
  result.config.trials = jc.at("trials").get<int>();
  result.config.class_params = class_params_from_json(jc.at("class_params"));
  result.config.t_grid = jc.at("t_grid").get<std::vector<double>>();
  for (const json& js : j.at("stats")) {
    StatRecord s;
    s.name = js.at("name").get<std::string>();
    s.empirical = js.at("empirical").get<double>();
    s.stderr_ = js.at("stderr").get<double>();
    s.prediction = js.at("prediction").get<double>();
    s.bound = js.at("bound").get<double>();
    s.tolerance = js.at("tolerance").get<double>();
    s.pass = js.at("pass").get<bool>();
    result.stats.push_back(std::move(s));
  }
  const json& ledger = j.at("seed_ledger");
  result.stream_lo = ledger.at("stream_lo").get<std::uint64_t>();
  result.stream_hi = ledger.at("stream_hi").get<std::uint64_t>();
  result.sample_digest = ledger.at("sample_digest").get<std::uint64_t>();
  return result;
}

std::string render_report(const RunResult& result, const std::string& format) {
  if (format == "json") return serialize_run_result(result);
  std::ostringstream ss;
  if (format == "csv") {
    ss << "name,n,p,beta,empirical,stderr,prediction,bound,tolerance,pass\n";
    for (const StatRecord& s : result.stats)
      ss << s.name << ',' << result.config.model.n << ',' << fmt_double(result.config.model.p)
         << ',' << result.config.model.beta << ',' << fmt_double(s.empirical) << ','
         << fmt_double(s.stderr_) << ',' << fmt_double(s.prediction) << ','
         << fmt_double(s.bound) << ',' << fmt_double(s.tolerance) << ','
         << (s.pass ? "true" : "false") << "\n";
    return ss.str();
  }
  if (format == "plotdata") {
    ss << "x y yerr\n";
    for (const StatRecord& s : result.stats) {
      // tail statistics are named tail@<t>
      if (s.name.rfind("tail@", 0) != 0) continue;
      ss << s.name.substr(5) << ' ' << fmt_double(s.empirical) << ' ' << fmt_double(s.stderr_)
         << "\n";
    }
    return ss.str();
  }
  throw std::invalid_argument("unknown report format: " + format);
}

}  // namespace spectra
