#include "entangled/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>
#include <vector>

#include "entangled/error.hpp"
#include "entangled/io.hpp"
#include "entangled/rng.hpp"

namespace entangled {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::InvalidConfig, "bad value for " + key + ": '" + value + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SIZE_FIELD(name)                                                                      \
  Field{#name, [](ExperimentConfig& c, const std::string& v) {                                \
          c.name = parse_number<std::size_t>(#name, v);                                       \
        },                                                                                    \
        [](const ExperimentConfig& c) { return std::to_string(c.name); }}
#define REAL_FIELD(name)                                                                      \
  Field{#name, [](ExperimentConfig& c, const std::string& v) {                                \
          c.name = parse_number<double>(#name, v);                                            \
        },                                                                                    \
        [](const ExperimentConfig& c) { return format_double(c.name); }}
#define TEXT_FIELD(name)                                                                      \
  Field{#name, [](ExperimentConfig& c, const std::string& v) { c.name = v; },                 \
        [](const ExperimentConfig& c) { return c.name; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      SIZE_FIELD(workers),
      TEXT_FIELD(data),
      TEXT_FIELD(data_path),
      SIZE_FIELD(synth_nodes),
      SIZE_FIELD(synth_graphs_per_class),
      REAL_FIELD(synth_hub_boost),
      REAL_FIELD(threshold),
      REAL_FIELD(train_ratio),
      REAL_FIELD(val_ratio),
      SIZE_FIELD(layers),
      SIZE_FIELD(heads),
      SIZE_FIELD(hidden_dim),
      SIZE_FIELD(ffn_dim),
      REAL_FIELD(dropout),
      REAL_FIELD(learning_rate),
      SIZE_FIELD(batch_size),
      SIZE_FIELD(epochs),
      REAL_FIELD(weight_decay),
      SIZE_FIELD(warmup_steps),
      TEXT_FIELD(readout),
      SIZE_FIELD(buckets),
      REAL_FIELD(gamma),
      TEXT_FIELD(mode),
      REAL_FIELD(mode_parameter),
      TEXT_FIELD(partition),
      TEXT_FIELD(extractor_tuning),
      REAL_FIELD(resolution),
      REAL_FIELD(drop_fraction),
      REAL_FIELD(temperature),
      SIZE_FIELD(negatives),
      SIZE_FIELD(extractor_dim),
      SIZE_FIELD(extractor_depth),
      SIZE_FIELD(extractor_epochs),
      SIZE_FIELD(extractor_batch_size),
      REAL_FIELD(extractor_learning_rate),
      Field{"ablate", [](ExperimentConfig& c, const std::string& v) { c.ablate = parse_ablation(v); },
            [](const ExperimentConfig& c) { return ablation_name(c.ablate); }},
      SIZE_FIELD(repeats),
  };
  return table;
}

#undef SIZE_FIELD
#undef REAL_FIELD
#undef TEXT_FIELD

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw Error(ErrorKind::InvalidConfig, what);
  }
}

}  // namespace

std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::NE: return "ne";
    case Ablation::FMAttn: return "fm-attn";
  }
  return "none";
}

Ablation parse_ablation(const std::string& name) {
  if (name == "none") return Ablation::None;
  if (name == "ne") return Ablation::NE;
  if (name == "fm-attn") return Ablation::FMAttn;
  throw Error(ErrorKind::InvalidConfig, "unknown ablation '" + name + "' (none|ne|fm-attn)");
}

void ExperimentConfig::validate() const {
  require(preset == "paper" || preset == "desk", "preset must be paper or desk");
  require(workers >= 1, "workers must be >= 1");
  require(data == "synthetic" || data == "dataset" || data == "manifest",
          "data must be synthetic, dataset or manifest");
  require(data == "synthetic" || !data_path.empty(), "data_path is required for data = " + data);
  require(synth_nodes >= 4, "synth_nodes must be >= 4");
  require(synth_graphs_per_class >= 1, "synth_graphs_per_class must be >= 1");
  require(threshold >= 0.0 && threshold <= 1.0, "threshold must be in [0, 1]");
  require(train_ratio > 0.0 && val_ratio >= 0.0 && train_ratio + val_ratio < 1.0,
          "train_ratio + val_ratio must be below 1");
  require(layers >= 1 && heads >= 1 && hidden_dim >= 1 && ffn_dim >= 1, "model sizes must be positive");
  require(hidden_dim % heads == 0, "hidden_dim must be divisible by heads");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(learning_rate > 0.0 && extractor_learning_rate > 0.0, "learning rates must be positive");
  require(batch_size >= 1 && extractor_batch_size >= 1, "batch sizes must be positive");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(readout == "mean", "readout must be mean");
  require(buckets >= 1, "buckets must be >= 1");
  require(gamma > 0.0, "gamma must be positive");
  require(mode == "ground" || mode == "isolate" || mode == "attach", "mode must be ground, isolate or attach");
  require(partition == "per-graph" || partition == "shared", "partition must be per-graph or shared");
  require(extractor_tuning == "frozen" || extractor_tuning == "joint", "extractor_tuning must be frozen or joint");
  require(resolution > 0.0, "resolution must be positive");
  require(drop_fraction >= 0.0 && drop_fraction < 1.0, "drop_fraction must be in [0, 1)");
  require(temperature > 0.0, "temperature must be positive");
  require(negatives >= 1, "negatives must be >= 1");
  require(extractor_dim >= 1 && extractor_depth >= 1, "extractor sizes must be positive");
  require(repeats >= 1, "repeats must be >= 1");
}

ExperimentConfig ExperimentConfig::paper() {
  ExperimentConfig c;
  c.preset = "paper";
  c.layers = 3;
  c.heads = 8;
  c.hidden_dim = 128;
  c.ffn_dim = 256;
  c.dropout = 0.5;
  c.threshold = 0.3;
  c.learning_rate = 3e-4;
  c.batch_size = 128;
  c.epochs = 200;
  c.weight_decay = 1e-4;
  c.warmup_steps = 10;
  c.extractor_dim = 64;
  c.extractor_depth = 1;
  c.temperature = 1.0;
  c.extractor_epochs = 20;
  return c;
}

ExperimentConfig ExperimentConfig::desk() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::from_preset(const std::string& name) {
  if (name == "paper") return paper();
  if (name == "desk") return desk();
  throw Error(ErrorKind::InvalidConfig, "unknown preset '" + name + "' (paper|desk)");
}

ModelConfig ExperimentConfig::model(std::size_t input_dim, std::size_t num_classes) const {
  ModelConfig m;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_dim;
  m.heads = heads;
  m.ffn_dim = ffn_dim;
  m.layers = layers;
  m.buckets = buckets;
  m.num_classes = num_classes;
  m.extractor_dim = extractor_dim;
  m.dropout = dropout;
  m.use_importance = ablate != Ablation::NE;
  m.use_module_attention = ablate != Ablation::FMAttn;
  m.seed = derive_seed(seed, 3);
  return m;
}

TrainConfig ExperimentConfig::training() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.weight_decay = weight_decay;
  t.warmup_steps = warmup_steps;
  t.seed = derive_seed(seed, 4);
  t.workers = workers;
  return t;
}

ContrastiveConfig ExperimentConfig::contrastive() const {
  ContrastiveConfig c;
  c.temperature = temperature;
  c.negatives = negatives;
  c.epochs = extractor_epochs;
  c.batch_size = extractor_batch_size;
  c.learning_rate = extractor_learning_rate;
  c.drop_fraction = drop_fraction;
  c.hidden_dim = extractor_dim;
  c.depth = extractor_depth;
  c.seed = derive_seed(seed, 2);
  c.workers = workers;
  return c;
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  ExperimentConfig cfg = std::move(base);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "preset") {
      cfg = ExperimentConfig::from_preset(value);
      continue;
    }
    bool known = false;
    for (const Field& f : fields()) {
      if (key == f.key) {
        f.set(cfg, value);
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

std::string config_to_text(const ExperimentConfig& cfg) {
  std::string out = "preset = " + cfg.preset + "\n";
  for (const Field& f : fields()) {
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace entangled
