#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gradcheck_fixture.hpp"
#include "par/analysis.hpp"
#include "par/checkpoint.hpp"
#include "par/csv.hpp"
#include "par/export.hpp"
#include "par/ingest.hpp"
#include "par/synth.hpp"
#include "par/trainer.hpp"
#include "par/vote.hpp"
#include "run_config.hpp"

namespace par::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kGradCheckTolerance = 1e-4;

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

const std::string& require(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string(key) + " is not set");
  return value;
}

Hin load_hin(const RunConfig& cfg) {
  FeatureSource features;
  if (!cfg.features.empty()) features = FeatureSource::parse(cfg.features, cfg.feature_dim);
  return load_graph(require(cfg.nodes, "nodes"), require(cfg.edges, "edges"), features);
}

SplitAssignment load_split(const RunConfig& cfg, const Hin& hin) {
  const auto scores = load_scores(require(cfg.scores, "scores"), hin);
  return split_scores(to_labels(scores, cfg.term_mode), cfg.split, cfg.seed);
}

ModelParams load_model(const RunConfig& cfg, const Hin& hin) {
  ModelParams params = load_checkpoint(require(cfg.checkpoint, "checkpoint"));
  if (!hin.has_features()) throw ConfigError("features are not set");
  if (params.options.d_in != hin.feature_dim())
    throw ConfigError("checkpoint expects " + std::to_string(params.options.d_in) + " feature columns, graph has " +
                      std::to_string(hin.feature_dim()));
  return params;
}

void write_metrics_header(std::ostream& out) {
  csv::write_row(out, {"part", "side", "accuracy", "macro_f1", "micro_f1"});
}

void write_metrics_rows(std::ostream& out, const std::string& part, const MetricsReport& r) {
  const std::pair<const char*, const Metrics*> rows[] = {
      {"liberal", &r.liberal}, {"conservative", &r.conservative}, {"combined", &r.combined}};
  for (const auto& [side, m] : rows)
    csv::write_row(out, {part, side, csv::format_double(m->accuracy), csv::format_double(m->macro_f1),
                         csv::format_double(m->micro_f1)});
}

csv::Row metric_fields(const Metrics& m) {
  return {csv::format_double(m.accuracy), csv::format_double(m.macro_f1), csv::format_double(m.micro_f1)};
}

std::string part_name(SplitPart p) {
  return p == SplitPart::train ? "train" : p == SplitPart::validation ? "validation" : "test";
}

void print_report(const std::string& what, const MetricsReport& r) {
  std::cout << what << ": accuracy " << csv::format_double(r.combined.accuracy) << " (liberal "
            << csv::format_double(r.liberal.accuracy) << ", conservative " << csv::format_double(r.conservative.accuracy)
            << "), macro-F1 " << csv::format_double(r.combined.macro_f1) << ", micro-F1 "
            << csv::format_double(r.combined.micro_f1) << '\n';
}

// Commands.

int cmd_validate_graph(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const auto violations = validate(hin);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw SchemaError(v.relation, hin.node(v.edge.src).kind, hin.node(v.edge.dst).kind);
  }
  auto out = open_csv(cfg.out / "graph_summary.csv");
  csv::write_row(out, {"relation", "name", "edges"});
  for (RelationKind r : kAllRelations)
    csv::write_row(out, {std::string(relation_code(r)), std::string(to_string(r)), std::to_string(hin.edge_count(r))});
  std::cout << "graph ok: " << hin.node_count() << " nodes, " << hin.edge_count() << " edges\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  const SynthGraph g = synth_hin(cfg.synth);
  write_graph(g.hin, cfg.out / "nodes.csv", cfg.out / "edges.csv", cfg.out / "features.csv");
  write_scores(g.scores, cfg.out / "scores.csv");
  {
    auto out = open_csv(cfg.out / "communities.csv");
    csv::write_row(out, {"id", "community"});
    for (std::size_t i = 0; i < g.community.size(); ++i)
      csv::write_row(out, {std::to_string(i), std::to_string(g.community[i])});
  }
  std::cout << "wrote planted graph: " << g.hin.node_count() << " nodes, " << g.hin.edge_count() << " edges, "
            << g.scores.size() << " scores\n";
  if (cfg.synth_votes) {
    const auto planted = vote::planted_votes(cfg.planted);
    vote::write_votes(planted.votes, cfg.out / "votes.csv");
    vote::write_bills(planted.bills, cfg.out / "bills.csv");
    std::vector<EntityId> ids;
    Matrix x(static_cast<Index>(planted.embeddings.rows.size()), static_cast<Index>(planted.embeddings.dim));
    for (const auto& [id, row] : planted.embeddings.rows) {
      x.row(static_cast<Index>(ids.size())) = row;
      ids.push_back(id);
    }
    // Planted legislator ids are 0..n-1, so row i of x belongs to id i.
    write_embeddings(cfg.out / "vote_embeddings.csv", x, ids);
    std::cout << "wrote planted votes: " << planted.votes.size() << " records\n";
  }
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const SplitAssignment split = load_split(cfg, hin);
  TrainConfig tc = cfg.train;
  tc.checkpoint_dir = cfg.out / "ckpt";
  fs::create_directories(*tc.checkpoint_dir);
  const auto result = train(hin, split, tc);
  save_checkpoint(result.params, cfg.out / "model");
  write_training_log(cfg.out / "training_log.csv", result.history);
  {
    auto out = open_csv(cfg.out / "epochs.csv");
    csv::write_row(out, {"epoch", "L1", "L2", "L3", "reg", "total", "val_liberal", "val_conservative", "val_combined"});
    for (const auto& e : result.history.epochs)
      csv::write_row(out, {std::to_string(e.epoch), csv::format_double(e.loss.expert),
                           csv::format_double(e.loss.consistency), csv::format_double(e.loss.echo),
                           csv::format_double(e.loss.l2), csv::format_double(e.loss.total),
                           csv::format_double(e.validation_liberal), csv::format_double(e.validation_conservative),
                           csv::format_double(e.validation_combined)});
  }
  const auto val = evaluate(result.params, hin, split, SplitPart::validation);
  const auto test = evaluate(result.params, hin, split, SplitPart::test);
  auto out = open_csv(cfg.out / "metrics.csv");
  write_metrics_header(out);
  write_metrics_rows(out, "validation", val);
  write_metrics_rows(out, "test", test);
  std::cout << "trained " << result.history.epochs.size() << " epochs, best epoch " << result.history.best_epoch << '\n';
  print_report("test", test);
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const SplitAssignment split = load_split(cfg, hin);
  const ModelParams params = load_model(cfg, hin);
  const auto report = evaluate(params, hin, split, cfg.eval_part);
  auto out = open_csv(cfg.out / "eval_metrics.csv");
  write_metrics_header(out);
  write_metrics_rows(out, part_name(cfg.eval_part), report);
  print_report(part_name(cfg.eval_part), report);
  return 0;
}

int cmd_embed(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const ModelParams params = load_model(cfg, hin);
  const auto enc = encode(hin, params);
  std::vector<EntityId> rows(hin.node_count());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  write_embeddings(cfg.out / "embeddings.csv", enc.x_final, rows);
  std::cout << "wrote " << rows.size() << " embeddings of dimension " << enc.x_final.cols() << '\n';
  return 0;
}

int cmd_stance(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const ModelParams params = load_model(cfg, hin);
  const auto enc = encode(hin, params);
  const auto [lib, con] = stance_heads(enc.x_final, params);
  std::vector<EntityId> rows;
  for (EntityId i = 0; i < hin.node_count(); ++i) {
    const NodeKind k = hin.node(i).kind;
    if (is_political_actor(k) || k == NodeKind::state) rows.push_back(i);
  }
  const auto scores = stance_scores(lib, con, rows);
  write_stances(cfg.out / "stances.csv", hin, scores);
  std::cout << "wrote " << scores.size() << " stance rows\n";
  return 0;
}

int cmd_project(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const ModelParams params = load_model(cfg, hin);
  const auto enc = encode(hin, params);
  const auto rows = actor_rows(hin);
  if (rows.size() < 2) throw AnalysisError("projection needs at least 2 political actors");
  Matrix x(static_cast<Index>(rows.size()), enc.x_final.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Index>(i)) = enc.x_final.row(static_cast<Index>(rows[i]));
  const Matrix p = pca_project(x, 2);

  std::vector<std::string> groups;
  if (cfg.project_group == "stance") {
    const auto [lib, con] = stance_heads(enc.x_final, params);
    for (EntityId id : rows) {
      const auto r = lib.row(static_cast<Index>(id));
      groups.push_back(governor_label(std::span<const double>(r.data(), static_cast<std::size_t>(r.size()))));
    }
  } else {
    for (EntityId id : rows) groups.emplace_back(to_string(hin.node(id).kind));
  }

  std::vector<ProjectedPoint> points;
  for (std::size_t i = 0; i < rows.size(); ++i)
    points.push_back({rows[i], p(static_cast<Index>(i), 0), p(static_cast<Index>(i), 1), groups[i]});
  write_projection_csv(cfg.out / "projection.csv", hin, points);
  write_projection_svg(cfg.out / "projection.svg", points);

  std::map<std::string, int> ids;
  std::vector<int> cluster;
  for (const auto& g : groups) cluster.push_back(ids.try_emplace(g, static_cast<int>(ids.size())).first->second);
  auto out = open_csv(cfg.out / "dbi.csv");
  csv::write_row(out, {"space", "dbi"});
  if (ids.size() < 2) {
    std::cout << "only one group present; DBI not defined\n";
    return 0;
  }
  const double full = dbi(x, cluster);
  const double flat = dbi(p, cluster);
  csv::write_row(out, {"full", csv::format_double(full)});
  csv::write_row(out, {"projected", csv::format_double(flat)});
  std::cout << "DBI full space " << csv::format_double(full) << ", projected " << csv::format_double(flat) << '\n';
  return 0;
}

int cmd_ablate_relations(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const SplitAssignment split = load_split(cfg, hin);
  auto out = open_csv(cfg.out / "ablate_relations.csv");
  csv::write_row(out, {"relation", "keep", "accuracy", "macro_f1", "micro_f1"});
  for (RelationKind rel : cfg.ablate_relations) {
    for (int step = 10; step >= 0; --step) {
      const double keep = step / 10.0;
      const Hin reduced = drop_relation_fraction(hin, rel, keep, cfg.seed);
      const auto result = train(reduced, split, cfg.train);
      const auto test = evaluate(result.params, reduced, split, SplitPart::test);
      csv::Row row{std::string(relation_code(rel)), csv::format_double(keep)};
      const auto m = metric_fields(test.combined);
      row.insert(row.end(), m.begin(), m.end());
      csv::write_row(out, row);
      out.flush();
      std::cout << relation_code(rel) << " keep " << csv::format_double(keep) << ": accuracy "
                << csv::format_double(test.combined.accuracy) << '\n';
    }
  }
  return 0;
}

int cmd_ablate_losses(const RunConfig& cfg) {
  const Hin hin = load_hin(cfg);
  const SplitAssignment split = load_split(cfg, hin);
  const std::pair<const char*, LossSelection> configs[] = {
      {"L1", {true, false, false}},
      {"L1+L2", {true, true, false}},
      {"L1+L3", {true, false, true}},
      {"L1+L2+L3", {true, true, true}},
  };
  auto out = open_csv(cfg.out / "ablate_losses.csv");
  csv::write_row(out, {"losses", "accuracy", "macro_f1", "micro_f1"});
  for (const auto& [name, sel] : configs) {
    TrainConfig tc = cfg.train;
    tc.losses = sel;
    const auto result = train(hin, split, tc);
    const auto test = evaluate(result.params, hin, split, SplitPart::test);
    csv::Row row{name};
    const auto m = metric_fields(test.combined);
    row.insert(row.end(), m.begin(), m.end());
    csv::write_row(out, row);
    out.flush();
    print_report(name, test);
  }
  return 0;
}

vote::EmbeddingTable load_vote_embeddings(const RunConfig& cfg) {
  if (!cfg.embeddings.empty()) {
    const auto [ids, x] = read_embeddings(cfg.embeddings);
    return vote::EmbeddingTable::from_rows(ids, x);
  }
  if (cfg.checkpoint.empty()) throw ConfigError("set embeddings, or checkpoint with a graph");
  const Hin hin = load_hin(cfg);
  const ModelParams params = load_model(cfg, hin);
  const auto enc = encode(hin, params);
  const auto rows = actor_rows(hin);
  Matrix x(static_cast<Index>(rows.size()), enc.x_final.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Index>(i)) = enc.x_final.row(static_cast<Index>(rows[i]));
  return vote::EmbeddingTable::from_rows(rows, x);
}

int cmd_vote_train(const RunConfig& cfg) {
  const auto embeddings = load_vote_embeddings(cfg);
  const auto bills = vote::load_bills(require(cfg.bills, "bills"));
  const auto records = vote::load_votes(require(cfg.votes, "votes"));
  const auto split = vote::split_votes(records, cfg.vote_split, cfg.seed);
  const auto model = vote::train_vote_model(embeddings, bills, split, cfg.vote);
  vote::save_classifier(model, cfg.out / "vote_model");
  auto out = open_csv(cfg.out / "vote_metrics.csv");
  csv::write_row(out, {"part", "records", "accuracy", "majority"});
  const std::pair<const char*, const std::vector<vote::VoteRecord>*> parts[] = {
      {"train", &split.train}, {"validation", &split.validation}, {"test", &split.test}};
  for (const auto& [name, recs] : parts) {
    if (recs->empty()) continue;
    const double acc = vote::vote_accuracy(model, embeddings, bills, *recs);
    csv::write_row(out, {name, std::to_string(recs->size()), csv::format_double(acc),
                         csv::format_double(vote::majority_rate(*recs))});
    std::cout << name << ": accuracy " << csv::format_double(acc) << " over " << recs->size() << " votes\n";
  }
  return 0;
}

int cmd_vote_eval(const RunConfig& cfg) {
  const auto model = vote::load_classifier(require(cfg.vote_model, "vote_model"));
  const auto embeddings = load_vote_embeddings(cfg);
  const auto bills = vote::load_bills(require(cfg.bills, "bills"));
  const auto records = vote::load_votes(require(cfg.votes, "votes"));
  const auto split = vote::split_votes(records, cfg.vote_split, cfg.seed);
  const auto& recs = cfg.eval_part == SplitPart::train        ? split.train
                     : cfg.eval_part == SplitPart::validation ? split.validation
                                                              : split.test;
  const double acc = vote::vote_accuracy(model, embeddings, bills, recs);
  const double majority = vote::majority_rate(recs);
  auto out = open_csv(cfg.out / "vote_eval.csv");
  csv::write_row(out, {"part", "records", "accuracy", "majority"});
  csv::write_row(out, {part_name(cfg.eval_part), std::to_string(recs.size()), csv::format_double(acc),
                       csv::format_double(majority)});
  std::cout << part_name(cfg.eval_part) << ": accuracy " << csv::format_double(acc) << ", majority "
            << csv::format_double(majority) << '\n';
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = model_gradcheck(cfg.seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "max relative error " << r.max_relative_error << " over " << r.coordinates << " coordinates ("
            << secs << " s)\n";
  auto out = open_csv(cfg.out / "gradcheck.csv");
  csv::write_row(out, {"seed", "max_relative_error", "coordinates"});
  csv::write_row(out, {std::to_string(cfg.seed), csv::format_double(r.max_relative_error), std::to_string(r.coordinates)});
  if (r.max_relative_error < kGradCheckTolerance) return 0;
  std::cerr << "error: numkit: gradient check failed with relative error " << r.max_relative_error << '\n';
  return 1;
}

struct Command {
  const char* name;
  const char* help;
  int (*fn)(const RunConfig&);
};

const Command kCommands[] = {
    {"validate-graph", "Load a graph and check every edge against its relation's endpoint rule", cmd_validate_graph},
    {"synth", "Write a planted-partition graph with scores (and optionally planted votes)", cmd_synth},
    {"train", "Train the encoder and stance heads; writes logs, metrics and checkpoints", cmd_train},
    {"eval", "Evaluate a checkpoint on one split part", cmd_eval},
    {"embed", "Export final-layer node representations", cmd_embed},
    {"stance", "Export stance distributions for actors and states", cmd_stance},
    {"project", "PCA projection of actor representations with DBI in full and projected space", cmd_project},
    {"ablate-relations", "Retrain with each relation thinned from keep 1.0 to 0.0", cmd_ablate_relations},
    {"ablate-losses", "Retrain with the four objective combinations", cmd_ablate_losses},
    {"vote-train", "Train the roll-call vote classifier", cmd_vote_train},
    {"vote-eval", "Evaluate a saved vote classifier", cmd_vote_eval},
    {"gradcheck", "Finite-difference check of the full training loss on a random 10-node graph", cmd_gradcheck},
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string module_of(const std::exception& e) {
  if (dynamic_cast<const GraphError*>(&e)) return "hin-core";
  if (dynamic_cast<const IngestError*>(&e)) return "ingest";
  if (dynamic_cast<const num::NumericError*>(&e)) return "numkit";
  if (dynamic_cast<const CheckpointError*>(&e)) return "grgcn-model";
  if (dynamic_cast<const LossError*>(&e)) return "objectives";
  if (dynamic_cast<const TrainError*>(&e)) return "trainer";
  if (dynamic_cast<const AnalysisError*>(&e)) return "analysis";
  if (dynamic_cast<const vote::VoteError*>(&e)) return "vote-downstream";
  return "cli";
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Political actor representation learning over heterogeneous graphs", "par"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "par 0.1.0");

  struct Flags {
    std::string config;
    std::string seed;
    std::string out;
    std::vector<std::string> sets;
    std::map<std::string, std::string> paths;
    bool quiet = false;
    bool verbose = false;
  } flags;

  const std::pair<const char*, const char*> path_flags[] = {
      {"nodes", "Nodes CSV (id,kind,name)"},
      {"edges", "Edges CSV (src,dst,relation)"},
      {"features", "Features CSV (id,f0..) or synthetic:<seed>"},
      {"scores", "Expert scores CSV (entity_id,side,score[,term])"},
      {"checkpoint", "Model checkpoint directory"},
      {"embeddings", "Embeddings CSV (id,e0..)"},
      {"votes", "Votes CSV (legislator_id,bill_id,congress,label)"},
      {"bills", "Bill features CSV (bill_id,f0..)"},
      {"vote-model", "Vote classifier directory"},
  };

  const Command* chosen = nullptr;
  for (const auto& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", flags.config, "Run configuration file (key = value lines)");
    sub->add_option("--seed", flags.seed, "Seed for every random choice");
    sub->add_option("--out", flags.out, "Output directory (default out)");
    sub->add_option("--set", flags.sets, "Override one configuration key, as key=value")->take_all();
    for (const auto& [name, help] : path_flags) sub->add_option(std::string("--") + name, flags.paths[name], help);
    sub->add_flag("--quiet", flags.quiet, "Only log warnings and errors");
    sub->add_flag("--verbose", flags.verbose, "Log per-epoch progress");
    sub->callback([&chosen, &cmd] { chosen = &cmd; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: cli: " << one_line(e.what()) << '\n';
    return 1;
  }
  if (!chosen) {
    std::cerr << "error: cli: no command given\n";
    return 1;
  }

  spdlog::set_level(flags.quiet ? spdlog::level::warn : flags.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    RunConfig cfg;
    if (!flags.config.empty()) cfg.load_file(flags.config);
    for (const auto& [name, value] : flags.paths) {
      if (value.empty()) continue;
      std::string key = name;
      std::replace(key.begin(), key.end(), '-', '_');
      cfg.set(key, value);
    }
    for (const auto& kv : flags.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!flags.seed.empty()) cfg.set("seed", flags.seed);
    if (!flags.out.empty()) cfg.set("out", flags.out);
    cfg.apply_seed();
    fs::create_directories(cfg.out);
    cfg.write_resolved(cfg.out / "config.resolved");
    return chosen->fn(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << module_of(e) << ": " << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace par::cli
