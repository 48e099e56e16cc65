#include "run_config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "par/csv.hpp"

namespace par::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& v) { return csv::parse_double(v); }

std::size_t to_size(const std::string& v) {
  const long long x = csv::parse_int(v);
  if (x < 0) throw ConfigError("expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

std::uint64_t to_u64(const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size() || v.starts_with('-')) throw ConfigError("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected an unsigned integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }
std::string from_double(double d) { return csv::format_double(d); }

std::string part_name(SplitPart p) {
  switch (p) {
    case SplitPart::train: return "train";
    case SplitPart::validation: return "validation";
    case SplitPart::test: return "test";
  }
  return "test";
}

struct Entry {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define PAR_STRING(name, field) \
  Entry { name, [](RunConfig& c, const std::string& v) { c.field = v; }, [](const RunConfig& c) { return std::string(c.field); } }
#define PAR_SIZE(name, field) \
  Entry { name, [](RunConfig& c, const std::string& v) { c.field = to_size(v); }, [](const RunConfig& c) { return std::to_string(c.field); } }
#define PAR_DOUBLE(name, field) \
  Entry { name, [](RunConfig& c, const std::string& v) { c.field = to_double(v); }, [](const RunConfig& c) { return from_double(c.field); } }
#define PAR_BOOL(name, field) \
  Entry { name, [](RunConfig& c, const std::string& v) { c.field = to_bool(v); }, [](const RunConfig& c) { return from_bool(c.field); } }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      Entry{"out", [](RunConfig& c, const std::string& v) { c.out = v; }, [](const RunConfig& c) { return c.out.string(); }},
      PAR_STRING("nodes", nodes),
      PAR_STRING("edges", edges),
      PAR_STRING("features", features),
      PAR_SIZE("feature_dim", feature_dim),
      PAR_STRING("scores", scores),
      PAR_STRING("checkpoint", checkpoint),
      PAR_STRING("embeddings", embeddings),
      PAR_STRING("votes", votes),
      PAR_STRING("bills", bills),
      PAR_STRING("vote_model", vote_model),
      Entry{"term_mode",
            [](RunConfig& c, const std::string& v) {
              if (v == "latest") c.term_mode = TermMode::latest;
              else if (v == "expand") c.term_mode = TermMode::expand;
              else throw ConfigError("term_mode must be latest or expand");
            },
            [](const RunConfig& c) { return std::string(c.term_mode == TermMode::latest ? "latest" : "expand"); }},
      PAR_DOUBLE("split_train", split.train),
      PAR_DOUBLE("split_validation", split.validation),
      PAR_DOUBLE("split_test", split.test),
      Entry{"preset",
            [](RunConfig& c, const std::string& v) {
              if (v == "table8") c.train.weights = table8_weights();
              else if (v == "appendixB3") c.train.weights = appendix_b3_weights();
              else throw ConfigError("preset must be table8 or appendixB3");
              c.preset = v;
              for (const auto& [key, value] : c.weight_overrides) c.set(key, value);
            },
            [](const RunConfig& c) { return c.preset; }},
      PAR_DOUBLE("lambda1", train.weights.expert),
      PAR_DOUBLE("lambda2", train.weights.consistency),
      PAR_DOUBLE("lambda3", train.weights.echo),
      PAR_DOUBLE("lambda4", train.weights.l2),
      PAR_DOUBLE("q", train.weights.negative_weight),
      PAR_SIZE("negatives", train.weights.negatives_per_anchor),
      PAR_BOOL("loss_l1", train.losses.expert),
      PAR_BOOL("loss_l2", train.losses.consistency),
      PAR_BOOL("loss_l3", train.losses.echo),
      PAR_DOUBLE("lr", train.learning_rate),
      PAR_SIZE("max_epochs", train.max_epochs),
      PAR_SIZE("batch_size", train.batch_size),
      PAR_SIZE("patience", train.patience),
      PAR_SIZE("hidden", train.model.hidden),
      PAR_SIZE("layers", train.model.layers),
      Entry{"activation",
            [](RunConfig& c, const std::string& v) {
              const auto a = parse_activation(v);
              if (!a) throw ConfigError("activation must be leaky_relu or relu");
              c.train.model.activation = *a;
            },
            [](const RunConfig& c) { return std::string(to_string(c.train.model.activation)); }},
      PAR_DOUBLE("leaky_slope", train.model.leaky_slope),
      Entry{"variant",
            [](RunConfig& c, const std::string& v) {
              const auto a = parse_variant(v);
              if (!a) throw ConfigError("variant must be gated, plain or homogeneous");
              c.train.model.variant = *a;
            },
            [](const RunConfig& c) { return std::string(to_string(c.train.model.variant)); }},
      PAR_BOOL("consistency_all", train.consistency_on_all_labeled),
      Entry{"eval_part",
            [](RunConfig& c, const std::string& v) {
              if (v == "train") c.eval_part = SplitPart::train;
              else if (v == "validation") c.eval_part = SplitPart::validation;
              else if (v == "test") c.eval_part = SplitPart::test;
              else throw ConfigError("eval_part must be train, validation or test");
            },
            [](const RunConfig& c) { return part_name(c.eval_part); }},
      Entry{"project_group",
            [](RunConfig& c, const std::string& v) {
              if (v != "kind" && v != "stance") throw ConfigError("project_group must be kind or stance");
              c.project_group = v;
            },
            [](const RunConfig& c) { return c.project_group; }},
      Entry{"ablate_relations",
            [](RunConfig& c, const std::string& v) {
              std::vector<RelationKind> rels;
              for (const auto& field : csv::split_line(v)) {
                const auto r = parse_relation(trim(field));
                if (!r) throw ConfigError("unknown relation '" + field + "'");
                rels.push_back(*r);
              }
              if (rels.empty()) throw ConfigError("ablate_relations is empty");
              c.ablate_relations = rels;
            },
            [](const RunConfig& c) {
              std::string s;
              for (auto r : c.ablate_relations) s += (s.empty() ? "" : ",") + std::string(relation_code(r));
              return s;
            }},
      PAR_SIZE("synth_actors", synth.n_actors),
      PAR_SIZE("synth_context", synth.n_context),
      PAR_SIZE("synth_d_in", synth.d_in),
      PAR_SIZE("synth_communities", synth.n_communities),
      PAR_DOUBLE("synth_flip_prob", synth.flip_prob),
      PAR_DOUBLE("synth_feature_signal", synth.feature_signal),
      PAR_DOUBLE("synth_institution_rate", synth.institution_rate),
      PAR_BOOL("synth_votes", synth_votes),
      PAR_SIZE("synth_legislators", planted.n_legislators),
      PAR_SIZE("synth_bills", planted.n_bills),
      PAR_SIZE("synth_actor_dim", planted.actor_dim),
      PAR_SIZE("synth_bill_dim", planted.bill_dim),
      PAR_DOUBLE("synth_vote_noise", planted.noise),
      PAR_DOUBLE("synth_vote_feature_noise", planted.feature_noise),
      PAR_SIZE("vote_hidden", vote.hidden),
      PAR_DOUBLE("vote_lr", vote.learning_rate),
      PAR_SIZE("vote_max_epochs", vote.max_epochs),
      PAR_SIZE("vote_batch_size", vote.batch_size),
      PAR_SIZE("vote_patience", vote.patience),
      Entry{"vote_split",
            [](RunConfig& c, const std::string& v) {
              if (v == "random") c.vote_split = vote::SplitMode::random;
              else if (v == "time_based") c.vote_split = vote::SplitMode::time_based;
              else throw ConfigError("vote_split must be random or time_based");
            },
            [](const RunConfig& c) {
              return std::string(c.vote_split == vote::SplitMode::random ? "random" : "time_based");
            }},
  };
  return table;
}

#undef PAR_STRING
#undef PAR_SIZE
#undef PAR_DOUBLE
#undef PAR_BOOL

bool is_weight_key(const std::string& key) {
  return key == "lambda1" || key == "lambda2" || key == "lambda3" || key == "lambda4" || key == "q" ||
         key == "negatives";
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key != e.key) continue;
    try {
      e.set(*this, value);
    } catch (const std::exception& ex) {
      throw ConfigError(key + ": " + ex.what());
    }
    if (is_weight_key(key)) {
      std::erase_if(weight_overrides, [&](const auto& kv) { return kv.first == key; });
      weight_overrides.emplace_back(key, value);
    }
    return;
  }
  throw ConfigError("unknown key '" + key + "'");
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    try {
      set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) out.emplace_back(e.key, e.get(*this));
  return out;
}

void RunConfig::write_resolved(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& [k, v] : resolved()) out << k << " = " << v << '\n';
}

void RunConfig::apply_seed() {
  train.seed = seed;
  synth.seed = seed;
  planted.seed = seed;
  vote.seed = seed;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

}  // namespace par::cli
