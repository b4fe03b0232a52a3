#include "swarm_edge/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {
namespace {

// --- config key table -------------------------------------------------------

struct Field {
  const char* key;  // "section.name"
  const char* doc;
  std::function<void(ExperimentConfig&, const std::string& raw)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string fmt_real(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, res.ptr);
  // Keep reals recognizable as reals in the file.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

[[noreturn]] void bad_value(const std::string& key, const std::string& raw,
                            const char* expected) {
  throw ConfigError("invalid value for " + key + ": '" + raw + "' (expected " + expected + ")");
}

template <class T>
T as_number(const std::string& key, const std::string& raw, const char* expected) {
  T value{};
  const char* first = raw.data();
  if (!raw.empty() && raw.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, raw.data() + raw.size(), value);
  if (ec != std::errc() || ptr != raw.data() + raw.size() || raw.empty()) {
    bad_value(key, raw, expected);
  }
  return value;
}

int as_int(const std::string& key, const std::string& raw) {
  return as_number<int>(key, raw, "an integer");
}

double as_real(const std::string& key, const std::string& raw) {
  const double v = as_number<double>(key, raw, "a real number");
  if (!std::isfinite(v)) bad_value(key, raw, "a finite real number");
  return v;
}

bool as_bool(const std::string& key, const std::string& raw) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  bad_value(key, raw, "true or false");
}

std::string as_string(const std::string& key, const std::string& raw) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    bad_value(key, raw, "a double-quoted string");
  }
  return raw.substr(1, raw.size() - 2);
}

template <class E>
E as_enum(const std::string& key, const std::string& raw,
          const std::vector<std::pair<const char*, E>>& names) {
  const std::string s = as_string(key, raw);
  for (const auto& [name, value] : names) {
    if (s == name) return value;
  }
  std::string expected = "one of";
  for (const auto& [name, value] : names) expected += std::string(" ") + name;
  bad_value(key, raw, expected.c_str());
}

template <class E>
std::string enum_name(E value, const std::vector<std::pair<const char*, E>>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return quote(name);
  }
  return quote("?");
}

const std::vector<std::pair<const char*, Fading>> kFadingNames = {
    {"none", Fading::kNone}, {"rayleigh", Fading::kRayleigh}};
const std::vector<std::pair<const char*, PowerPolicy>> kPolicyNames = {
    {"inversion", PowerPolicy::kInversion}, {"bev", PowerPolicy::kBev}};
const std::vector<std::pair<const char*, AttackKind>> kAttackNames = {
    {"none", AttackKind::kNone},          {"signflip", AttackKind::kSignFlip},
    {"gauss", AttackKind::kGaussianNoise}, {"scorecheat", AttackKind::kScoreCheat},
    {"mixed", AttackKind::kMixed}};

#define REAL_FIELD(KEY, MEMBER, DOC)                                                   \
  Field {                                                                              \
    KEY, DOC, [](ExperimentConfig& c, const std::string& r) { c.MEMBER = as_real(KEY, r); }, \
        [](const ExperimentConfig& c) { return fmt_real(c.MEMBER); }                   \
  }
#define INT_FIELD(KEY, MEMBER, DOC)                                                    \
  Field {                                                                              \
    KEY, DOC, [](ExperimentConfig& c, const std::string& r) { c.MEMBER = as_int(KEY, r); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }             \
  }
#define BOOL_FIELD(KEY, MEMBER, DOC)                                                   \
  Field {                                                                              \
    KEY, DOC, [](ExperimentConfig& c, const std::string& r) { c.MEMBER = as_bool(KEY, r); }, \
        [](const ExperimentConfig& c) { return std::string(c.MEMBER ? "true" : "false"); } \
  }
#define STRING_FIELD(KEY, MEMBER, DOC)                                                 \
  Field {                                                                              \
    KEY, DOC, [](ExperimentConfig& c, const std::string& r) { c.MEMBER = as_string(KEY, r); }, \
        [](const ExperimentConfig& c) { return quote(c.MEMBER); }                      \
  }
#define ENUM_FIELD(KEY, MEMBER, NAMES, DOC)                                            \
  Field {                                                                              \
    KEY, DOC,                                                                          \
        [](ExperimentConfig& c, const std::string& r) { c.MEMBER = as_enum(KEY, r, NAMES); }, \
        [](const ExperimentConfig& c) { return enum_name(c.MEMBER, NAMES); }           \
  }

std::string join_algos(const std::vector<Algo>& algos) {
  std::string out;
  for (Algo a : algos) {
    if (!out.empty()) out += ',';
    out += to_string(a);
  }
  return out;
}

std::vector<Algo> split_algos(const std::string& key, const std::string& list) {
  std::vector<Algo> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_algo(item));
    } catch (const ConfigError&) {
      bad_value(key, list, "a comma-separated subset of dsl,fl,pso");
    }
  }
  if (out.empty()) bad_value(key, list, "at least one algorithm");
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"experiment.seed", "master seed; every stream is derived from it",
            [](ExperimentConfig& c, const std::string& r) {
              c.seed = as_number<std::uint64_t>("experiment.seed", r, "a non-negative integer");
            },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      INT_FIELD("experiment.repetitions", repetitions, "independent repetitions (>= 1)"),
      Field{"experiment.algos", "algorithms to run, comma-separated subset of dsl,fl,pso",
            [](ExperimentConfig& c, const std::string& r) {
              c.algos = split_algos("experiment.algos", as_string("experiment.algos", r));
            },
            [](const ExperimentConfig& c) { return quote(join_algos(c.algos)); }},
      REAL_FIELD("experiment.target_accuracy", target_accuracy,
                 "accuracy threshold for the rounds-to-target metric"),
      STRING_FIELD("experiment.out_dir", out_dir, "output directory for metrics.csv and summary.json"),

      STRING_FIELD("data.source", data.source, "\"blobs\" (synthetic) or \"csv\""),
      INT_FIELD("data.classes", data.classes, "blobs: number of classes"),
      INT_FIELD("data.features", data.features, "blobs: feature dimension"),
      INT_FIELD("data.train_per_class", data.train_per_class, "blobs: training samples per class"),
      INT_FIELD("data.test_per_class", data.test_per_class,
                "held-out test samples per class (csv: used when csv_test_path is empty)"),
      REAL_FIELD("data.spread", data.spread, "blobs: per-coordinate std around each unit-norm center"),
      STRING_FIELD("data.csv_path", data.csv_path, "csv: training file"),
      STRING_FIELD("data.csv_test_path", data.csv_test_path, "csv: optional test file"),
      BOOL_FIELD("data.standardize", data.standardize, "z-score features with training statistics"),

      STRING_FIELD("model.kind", model.kind, "\"softmax\", \"mlp\" or \"quadratic\""),
      INT_FIELD("model.hidden", model.hidden, "mlp: tanh hidden units"),
      INT_FIELD("model.dim", model.dim, "quadratic: dimension"),
      REAL_FIELD("model.curvature_min", model.curvature_min, "quadratic: smallest curvature"),
      REAL_FIELD("model.curvature_max", model.curvature_max, "quadratic: largest curvature"),

      STRING_FIELD("partition.scheme", partition.scheme, "\"iid\" or \"shards\" (label-sorted shards)"),
      INT_FIELD("partition.shards_per_worker", partition.shards_per_worker, "shards: shards per worker"),

      REAL_FIELD("global.fraction", global.fraction, "share of the training data moved to the global set"),
      REAL_FIELD("global.score_ratio", global.score_ratio, "share of the global set reserved for scoring"),

      INT_FIELD("swarm.workers", swarm.workers, "number of workers K"),
      INT_FIELD("swarm.rounds", swarm.rounds, "communication rounds T"),
      REAL_FIELD("swarm.c0_max", swarm.c0_max, "inertia weight at round 0"),
      REAL_FIELD("swarm.c0_min", swarm.c0_min, "inertia weight at round T"),
      REAL_FIELD("swarm.c1", swarm.c1, "personal-best attraction weight"),
      REAL_FIELD("swarm.c2", swarm.c2, "global attraction weight"),
      REAL_FIELD("swarm.eta", swarm.eta, "learning rate"),
      REAL_FIELD("swarm.eta_decay", swarm.eta_decay, "eta_t = eta / (1 + eta_decay * t)"),
      REAL_FIELD("swarm.lambda", swarm.lambda, "proximity penalty towards the previous global variable"),
      INT_FIELD("swarm.s_min", swarm.s_min, "selected workers at round 0"),
      INT_FIELD("swarm.s_max", swarm.s_max, "selected workers at round T (default ceil(0.2 * workers))"),
      INT_FIELD("swarm.batch_size", swarm.batch_size, "minibatch size (full pool when larger)"),
      INT_FIELD("swarm.local_steps", swarm.local_steps, "FL: local SGD steps per round"),
      REAL_FIELD("swarm.censor_tau0", swarm.censor_tau0, "initial censoring threshold (0 disables censoring)"),
      REAL_FIELD("swarm.censor_rho", swarm.censor_rho, "geometric decay of the censoring threshold"),
      REAL_FIELD("swarm.grad_noise", swarm.grad_noise, "std of Gaussian noise added to local gradients"),
      REAL_FIELD("swarm.pso_init_spread", swarm.pso_init_spread, "PSO: std of initial position jitter"),

      REAL_FIELD("channel.noise_sigma", channel.noise_sigma, "receiver noise std per coordinate"),
      REAL_FIELD("channel.p_max", channel.p_max, "per-worker energy budget per vector transmission"),
      REAL_FIELD("channel.h_threshold", channel.h_threshold, "truncation cutoff on channel gains"),
      ENUM_FIELD("channel.fading", channel.fading, kFadingNames, "\"none\" or \"rayleigh\""),
      ENUM_FIELD("channel.policy", channel.policy, kPolicyNames,
                 "\"inversion\" or \"bev\" (bev applies only when attackers are present)"),

      ENUM_FIELD("attack.kind", attack.kind, kAttackNames,
                 "\"none\", \"signflip\", \"gauss\", \"scorecheat\" or \"mixed\""),
      REAL_FIELD("attack.fraction", attack.fraction, "fraction of workers that are Byzantine"),
      REAL_FIELD("attack.kappa", attack.kappa, "signflip: scale of the flipped vector"),
      REAL_FIELD("attack.sigma_a", attack.sigma_a, "gauss: std of the injected vector"),

      BOOL_FIELD("defense.audit", defense.audit, "DSL: audit one selected worker every period rounds"),
      INT_FIELD("defense.period", defense.period, "rounds between audits"),
      REAL_FIELD("defense.epsilon_audit", defense.epsilon_audit, "tolerated score deviation in an audit"),
      BOOL_FIELD("defense.rollback", defense.rollback, "DSL: reject global updates that worsen the score"),
      REAL_FIELD("defense.rollback_delta", defense.rollback_delta, "tolerated score increase before rollback"),
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

ParamVec quadratic_target(int dim, Rng& rng) {
  ParamVec w(static_cast<std::size_t>(dim));
  for (auto& x : w) x = standard_normal(rng);
  return w;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("experiment.repetitions must be >= 1");
  if (algos.empty()) throw ConfigError("experiment.algos must name at least one algorithm");
  if (data.source != "blobs" && data.source != "csv") {
    throw ConfigError("data.source must be \"blobs\" or \"csv\"");
  }
  if (data.source == "csv" && data.csv_path.empty()) {
    throw ConfigError("data.csv_path is required when data.source = \"csv\"");
  }
  if (data.source == "blobs") {
    if (data.classes < 2) throw ConfigError("data.classes must be >= 2");
    if (data.features < 1) throw ConfigError("data.features must be >= 1");
    if (data.train_per_class < 1) throw ConfigError("data.train_per_class must be >= 1");
    if (!(data.spread > 0.0)) throw ConfigError("data.spread must be positive");
  }
  if (data.test_per_class < 0) throw ConfigError("data.test_per_class must be >= 0");
  if (model.kind != "softmax" && model.kind != "mlp" && model.kind != "quadratic") {
    throw ConfigError("model.kind must be \"softmax\", \"mlp\" or \"quadratic\"");
  }
  if (model.hidden < 1) throw ConfigError("model.hidden must be >= 1");
  if (model.dim < 1) throw ConfigError("model.dim must be >= 1");
  if (!(model.curvature_min > 0.0 && model.curvature_min <= model.curvature_max)) {
    throw ConfigError("model.curvature_min and model.curvature_max must satisfy 0 < min <= max");
  }
  if (partition.scheme != "iid" && partition.scheme != "shards") {
    throw ConfigError("partition.scheme must be \"iid\" or \"shards\"");
  }
  if (partition.shards_per_worker < 1) throw ConfigError("partition.shards_per_worker must be >= 1");
  if (!(global.fraction > 0.0 && global.fraction < 1.0)) {
    throw ConfigError("global.fraction must lie in (0, 1)");
  }
  if (!(global.score_ratio > 0.0 && global.score_ratio < 1.0)) {
    throw ConfigError("global.score_ratio must lie in (0, 1)");
  }
  if (!(target_accuracy >= 0.0 && target_accuracy <= 1.0)) {
    throw ConfigError("experiment.target_accuracy must lie in [0, 1]");
  }
  swarm.validate();
  channel.validate();
  attack.validate();
  defense.validate();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw_line;
  std::size_t line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string key = section.empty() ? name : section + "." + name;
    const Field* field = find_field(key);
    if (field == nullptr) throw ConfigError("unknown config key: " + key);
    if (!seen.insert(key).second) throw ConfigError("duplicate config key: " + key);
    field->set(cfg, value);
  }
  if (!seen.contains("swarm.s_max")) cfg.swarm.s_max = default_s_max(cfg.swarm.workers);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const std::string key = f.key;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + f.get(cfg) + '\n';
  }
  return out;
}

std::string describe_config_keys() {
  const ExperimentConfig defaults;
  std::string out;
  for (const auto& f : fields()) {
    out += std::string(f.key) + " = " + f.get(defaults) + "\n    " + f.doc + '\n';
  }
  return out;
}

std::uint64_t repetition_seed(std::uint64_t seed, int rep) {
  return derive_seed(seed, Stream::kRepetition, static_cast<std::uint64_t>(rep));
}

Scenario build_scenario(const ExperimentConfig& cfg, int rep) {
  const std::uint64_t seed = repetition_seed(cfg.seed, rep);
  const int workers = cfg.swarm.workers;

  if (cfg.model.kind == "quadratic") {
    Rng rng = make_rng(seed, Stream::kData);
    ParamVec target = quadratic_target(cfg.model.dim, rng);
    std::vector<double> curvature(static_cast<std::size_t>(cfg.model.dim));
    std::uniform_real_distribution<double> pick(cfg.model.curvature_min, cfg.model.curvature_max);
    for (auto& c : curvature) c = pick(rng);
    if (!curvature.empty()) curvature.front() = cfg.model.curvature_min;
    FederatedData fed;
    fed.pools.resize(static_cast<std::size_t>(workers));
    return Scenario{Model::quadratic(std::move(target), std::move(curvature)), std::move(fed), {}, {}};
  }

  LabeledDataset train;
  LabeledDataset test;
  if (cfg.data.source == "blobs") {
    const LabeledDataset all =
        synth_blobs(cfg.data.classes, cfg.data.features,
                    cfg.data.train_per_class + cfg.data.test_per_class, cfg.data.spread,
                    derive_seed(seed, Stream::kData, 0));
    std::tie(train, test) =
        stratified_holdout(all, cfg.data.test_per_class, derive_seed(seed, Stream::kData, 1));
  } else {
    train = load_csv(cfg.data.csv_path);
    if (!cfg.data.csv_test_path.empty()) {
      test = load_csv(cfg.data.csv_test_path, false);
      if (test.n_features != train.n_features) {
        throw ConfigError("data.csv_test_path has a different feature count than data.csv_path");
      }
      test.class_count = train.class_count;
      for (int y : test.labels) {
        if (y >= train.class_count) throw ConfigError("test labels exceed the training classes");
      }
    } else {
      std::tie(train, test) =
          stratified_holdout(train, cfg.data.test_per_class, derive_seed(seed, Stream::kData, 1));
    }
  }
  if (cfg.data.standardize) {
    LabeledDataset fit = train;
    LabeledDataset* targets[] = {&train, &test};
    standardize(fit, targets);
  }

  const int classes = train.class_count;
  const int features = static_cast<int>(train.n_features);
  Model model = cfg.model.kind == "mlp" ? Model::mlp1(features, cfg.model.hidden, classes)
                                        : Model::softmax_linear(classes, features);

  GlobalSplit split = build_global_dataset(train, cfg.global.fraction, cfg.global.score_ratio,
                                           derive_seed(seed, Stream::kGlobalData));
  const std::uint64_t part_seed = derive_seed(seed, Stream::kPartition);
  const Partition part =
      cfg.partition.scheme == "shards"
          ? partition_noniid_shards(split.remaining, workers, cfg.partition.shards_per_worker, part_seed)
          : partition_iid(split.remaining, workers, part_seed);

  FederatedData fed;
  fed.score = std::move(split.global.score_part);
  for (const auto& indices : part) {
    LabeledDataset pool = split.remaining.subset(indices);
    pool.append(split.global.train_part);
    fed.pools.push_back(std::move(pool));
  }
  return Scenario{std::move(model), std::move(fed), std::move(train), std::move(test)};
}

namespace {

MetricsRow snapshot(const SwarmEngine& engine, const Scenario& scenario, int rep) {
  MetricsRow row;
  row.round = engine.round();
  row.algo = engine.config().algo;
  row.rep = rep;
  const ParamVec& w_g = engine.global().w_g;
  try {
    row.train_loss = loss_eval(engine.model(), w_g, scenario.train.view());
  } catch (const NumericError&) {
    row.train_loss = std::numeric_limits<double>::infinity();
  }
  row.test_acc = engine.model().is_classifier() && !scenario.test.empty()
                     ? accuracy(engine.model(), w_g, scenario.test.view())
                     : std::numeric_limits<double>::quiet_NaN();
  row.best_score = engine.global().best_score;
  std::vector<ParamVec> positions;
  for (const auto& ws : engine.workers()) {
    if (ws.active()) positions.push_back(ws.w);
  }
  row.weight_div = positions.empty() ? 0.0 : weight_divergence(positions);
  const CommLedger& ledger = engine.ledger();
  row.scalar_reports = ledger.scalar_reports;
  row.vector_uses = ledger.vector_channel_uses;
  row.energy = ledger.transmit_energy;
  row.blacklist = engine.blacklist_size();
  return row;
}

}  // namespace

MetricsTable run_experiment(const Scenario& scenario, const SwarmConfig& cfg,
                            const ChannelConfig& channel, const AttackerConfig& attack,
                            const AuditPolicy& defense, int rep,
                            const RoundObserver& observer) {
  SwarmEngine engine(scenario.model, cfg, channel, attack, defense, scenario.fed);
  MetricsTable table;
  table.reserve(static_cast<std::size_t>(cfg.rounds) + 1);
  table.push_back(snapshot(engine, scenario, rep));
  for (int t = 0; t < cfg.rounds; ++t) {
    const RoundMetrics m = engine.step();
    if (observer) observer(engine, m);
    table.push_back(snapshot(engine, scenario, rep));
  }
  return table;
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  BenchmarkResult result;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const Scenario scenario = build_scenario(cfg, rep);
    const std::uint64_t seed = repetition_seed(cfg.seed, rep);
    for (Algo algo : cfg.algos) {
      SwarmConfig swarm = cfg.swarm;
      swarm.algo = algo;
      swarm.seed = seed;
      AttackerConfig attack = cfg.attack;
      attack.seed = seed;
      MetricsTable rows = run_experiment(scenario, swarm, cfg.channel, attack, cfg.defense, rep);
      result.table.insert(result.table.end(), rows.begin(), rows.end());
    }
  }
  result.summary = summarize(result.table, cfg.target_accuracy);
  return result;
}

void write_benchmark_outputs(const BenchmarkResult& result, const std::filesystem::path& dir) {
  const auto csv = dir / "metrics.csv";
  const auto json = dir / "summary.json";
  try {
    std::filesystem::create_directories(dir);
    write_metrics_csv(result.table, csv);
    write_summary_json(result.summary, json);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(csv, ec);
    std::filesystem::remove(json, ec);
    throw;
  }
}

}  // namespace swarm_edge
