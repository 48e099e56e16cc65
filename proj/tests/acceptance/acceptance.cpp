// Acceptance run: one PASS/FAIL line per criterion.
//
//   par_acceptance [--known-unattainable 2,5] [--only 1,3]
//
// Criteria listed as known-unattainable still run and still print FAIL when
// they fail, but do not make the exit status non-zero.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "gradcheck_fixture.hpp"
#include "par/analysis.hpp"
#include "par/hin.hpp"
#include "par/objectives.hpp"
#include "par/ops.hpp"
#include "par/synth.hpp"
#include "par/trainer.hpp"
#include "par/vote.hpp"

using namespace par;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << std::fixed << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

std::set<int> parse_ids(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fixed(x, 3);
  return s;
}

// Planted-partition benchmark with default options and the given training setup.
struct PlantedRun {
  double accuracy = 0.0;
  double seconds = 0.0;
};

PlantedRun planted_run(std::uint64_t seed, const LossWeights& weights, const LossSelection& losses,
                       std::optional<std::pair<RelationKind, double>> thin = std::nullopt) {
  SynthOptions so;
  so.seed = seed;
  const SynthGraph g = synth_hin(so);
  const SplitAssignment split = split_scores(to_labels(g.scores), SplitRatios{}, seed);
  TrainConfig tc;
  tc.seed = seed;
  tc.weights = weights;
  tc.losses = losses;
  const auto t0 = Clock::now();
  const Hin hin = thin ? drop_relation_fraction(g.hin, thin->first, thin->second, seed) : g.hin;
  const auto result = train(hin, split, tc);
  const double acc = evaluate(result.params, hin, split, SplitPart::test).combined.accuracy;
  return {acc, seconds_since(t0)};
}

constexpr std::uint64_t kSeeds = 5;

// 1. Finite-difference agreement of the full loss gradient.
Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) worst = std::max(worst, cli::model_gradcheck(seed).max_relative_error);
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 30.0, "max relative error " + sci(worst) + " over 20 seeds in " + fixed(t, 2) + " s"};
}

// 2. Planted-partition recovery with the default preset.
Outcome planted_recovery() {
  std::vector<double> acc;
  double slowest = 0.0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto r = planted_run(seed, table8_weights(), LossSelection{});
    acc.push_back(r.accuracy);
    slowest = std::max(slowest, r.seconds);
  }
  const double m = mean(acc);
  return {m >= 0.95 && slowest < 60.0,
          "table8 mean test accuracy " + fixed(m) + " [" + join(acc) + "], slowest run " + fixed(slowest, 1) + " s"};
}

// 3. Schema rejection of illegal endpoints and acceptance of every legal one.
Outcome schema_suite() {
  using K = NodeKind;
  using R = RelationKind;
  struct Fixture {
    R rel;
    K src;
    K dst;
  };
  const Fixture illegal[] = {
      {R::party_affiliation, K::justice, K::party},      {R::party_affiliation, K::legislator, K::state},
      {R::party_affiliation, K::party, K::legislator},   {R::home_state, K::party, K::state},
      {R::home_state, K::legislator, K::party},          {R::home_state, K::state, K::legislator},
      {R::hold_office, K::state, K::institution},        {R::hold_office, K::legislator, K::state},
      {R::hold_office, K::institution, K::legislator},   {R::time_in_office, K::party, K::office_term},
      {R::time_in_office, K::legislator, K::institution}, {R::time_in_office, K::office_term, K::justice},
      {R::appoint, K::president, K::legislator},         {R::appoint, K::governor, K::justice},
      {R::appoint, K::legislator, K::justice},
  };
  int rejected = 0;
  for (const auto& f : illegal) {
    Hin h;
    const auto a = h.add_node(f.src, "a");
    const auto b = h.add_node(f.dst, "b");
    try {
      h.add_edge(a, b, f.rel);
    } catch (const SchemaError& e) {
      if (e.relation() == f.rel) ++rejected;
    }
  }
  // Legal endpoint pairs, written out per relation.
  const std::set<K> elected{K::legislator, K::president, K::governor};
  const std::set<K> actors{K::legislator, K::president, K::governor, K::justice};
  std::vector<Fixture> legal;
  for (K s : elected) legal.push_back({R::party_affiliation, s, K::party});
  for (K s : actors) {
    legal.push_back({R::home_state, s, K::state});
    legal.push_back({R::hold_office, s, K::institution});
    legal.push_back({R::time_in_office, s, K::office_term});
  }
  legal.push_back({R::appoint, K::president, K::justice});
  legal.push_back({R::appoint, K::governor, K::legislator});
  int accepted = 0;
  for (const auto& f : legal) {
    Hin h;
    const auto a = h.add_node(f.src, "a");
    const auto b = h.add_node(f.dst, "b");
    try {
      h.add_edge(a, b, f.rel);
      ++accepted;
    } catch (const std::exception&) {
    }
  }
  const int n_illegal = static_cast<int>(std::size(illegal));
  const int n_legal = static_cast<int>(legal.size());
  return {rejected == n_illegal && accepted == n_legal,
          std::to_string(rejected) + "/" + std::to_string(n_illegal) + " illegal rejected, " + std::to_string(accepted) +
              "/" + std::to_string(n_legal) + " legal accepted"};
}

// 4. Score bucketing at and just below every threshold.
Outcome bucketing() {
  const double eps = 1e-12;
  const double scores[] = {0.0, 0.1 - eps, 0.1, 0.25 - eps, 0.25, 0.75 - eps, 0.75, 0.9 - eps, 0.9, 1.0};
  const int expected[] = {0, 0, 1, 1, 2, 2, 3, 3, 4, 4};
  int ok = 0;
  std::string got;
  for (std::size_t i = 0; i < std::size(scores); ++i) {
    const int c = bucket_score(scores[i]);
    got += std::to_string(c);
    if (c == expected[i]) ++ok;
  }
  return {ok == 10, "classes " + got + ", expected 0011223344"};
}

// 5. Reversal involution and a saturated consistent prediction.
Outcome consistency() {
  bool involution = true;
  for (int k = 0; k < kNumClasses; ++k) involution = involution && reverse_class(reverse_class(k)) == k;
  num::Tape tape;
  Matrix lib = Matrix::Zero(kNumClasses, kNumClasses);
  Matrix con = Matrix::Zero(kNumClasses, kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    lib(k, k) = 50.0;
    con(k, kNumClasses - 1 - k) = 50.0;
  }
  std::vector<EntityId> all(kNumClasses);
  std::iota(all.begin(), all.end(), 0);
  const double loss = consistency_loss(num::row_log_softmax(tape.constant(lib)),
                                       num::row_log_softmax(tape.constant(con)), all)
                          .scalar();
  return {involution && loss <= 1e-6,
          std::string("involution ") + (involution ? "holds" : "broken") + ", saturated loss " + sci(std::abs(loss))};
}

// 6. Closed-form echo-loss values.
Outcome echo_arithmetic() {
  const double ln2 = std::log(2.0);
  Hin pair;
  pair.add_node(NodeKind::legislator, "a");
  pair.add_node(NodeKind::party, "p");
  pair.add_edge(0, 1, RelationKind::party_affiliation);
  Hin apart;
  apart.add_node(NodeKind::legislator, "a");
  apart.add_node(NodeKind::party, "p");

  num::Tape tape;
  const double positive = echo_loss(tape.constant(Matrix::Zero(2, 4)), pair, EchoOptions{}).scalar();
  EchoOptions one_negative;
  one_negative.negatives_per_anchor = 1;
  const std::vector<EntityId> anchor{0};
  const double negative = echo_loss(tape.constant(Matrix::Zero(2, 4)), apart, anchor, one_negative).scalar();
  Matrix far(2, 1);
  far << 1e3, 1e3;
  const double aligned = echo_loss(tape.constant(far), pair, EchoOptions{}).scalar();

  const double e1 = std::abs(positive - 2 * ln2);
  const double e2 = std::abs(negative - 0.1 * ln2);
  const double e3 = std::abs(aligned);
  return {e1 <= 1e-10 && e2 <= 1e-10 && e3 <= 1e-10,
          "errors " + sci(e1) + ", " + sci(e2) + ", " + sci(e3)};
}

// 7. DBI hand fixture and rotation invariance.
Outcome dbi_oracle() {
  Matrix four(4, 2);
  four << -1, 0, 1, 0, 9, 0, 11, 0;
  const double fixture = dbi(four, std::vector<int>{0, 0, 1, 1});

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix p(50, 5);
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = nd(rng);
  std::vector<int> ids(50);
  for (int i = 0; i < 50; ++i) {
    ids[static_cast<std::size_t>(i)] = i % 3;
    p(i, 0) += 2.0 * (i % 3);
  }
  Matrix g(5, 5);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  const double drift = std::abs(dbi(p * q, ids) - dbi(p, ids));
  const double e = std::abs(fixture - 0.2);
  return {e <= 1e-9 && drift <= 1e-9, "fixture " + fixed(fixture, 12) + ", rotation drift " + sci(drift)};
}

// 8. Ablation direction with the balanced loss weights.
Outcome ablation_direction() {
  const LossWeights w = appendix_b3_weights();
  std::vector<double> all, expert_only, keep1, keep0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    all.push_back(planted_run(seed, w, LossSelection{true, true, true}).accuracy);
    expert_only.push_back(planted_run(seed, w, LossSelection{true, false, false}).accuracy);
    keep1.push_back(planted_run(seed, w, LossSelection{}, std::pair{RelationKind::party_affiliation, 1.0}).accuracy);
    keep0.push_back(planted_run(seed, w, LossSelection{}, std::pair{RelationKind::party_affiliation, 0.0}).accuracy);
  }
  const double a = mean(all), l1 = mean(expert_only), k1 = mean(keep1), k0 = mean(keep0);
  std::cout << "  info: the default preset on the same benchmark is reported under criterion 2; the balanced preset\n"
            << "        used here reaches " << fixed(a) << " [" << join(all) << "]\n";
  return {a >= l1 - 0.02 && k1 - k0 >= 0.10, "L1+L2+L3 " + fixed(a) + " vs L1 " + fixed(l1) + "; R1 keep=1 " + fixed(k1) +
                                                   " vs keep=0 " + fixed(k0) + " (drop " + fixed(k1 - k0) + ")"};
}

// 9. Vote classifier on planted votes; time-based split holds out the 115th congress.
Outcome vote_harness() {
  std::vector<double> acc, majority;
  bool only_115 = true;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    vote::PlantedOptions po;
    po.seed = seed;
    const auto planted = vote::planted_votes(po);
    const auto split = vote::split_votes(planted.votes, vote::SplitMode::random, seed);
    vote::VoteConfig vc;
    vc.seed = seed;
    const auto model = vote::train_vote_model(planted.embeddings, planted.bills, split, vc);
    acc.push_back(vote::vote_accuracy(model, planted.embeddings, planted.bills, split.test));
    majority.push_back(vote::majority_rate(split.test));

    const auto timed = vote::split_votes(planted.votes, vote::SplitMode::time_based, seed);
    std::size_t later = 0;
    for (const auto& r : planted.votes) later += r.congress == 115;
    for (const auto& r : timed.test) only_115 = only_115 && r.congress == 115;
    only_115 = only_115 && timed.test.size() == later;
  }
  const double a = mean(acc), m = mean(majority);
  return {a >= 0.90 && a >= m + 0.2 && only_115, "accuracy " + fixed(a) + " [" + join(acc) + "] vs majority " + fixed(m) +
                                                     "; time-based test set " + (only_115 ? "is" : "is not") +
                                                     " exactly the 115th congress"};
}

// 10. Two identical train commands write identical metric files.
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "par_acceptance_determinism";
  fs::remove_all(dir);
  const auto data = dir / "data";
  if (cli::run({"synth", "--out", data.string(), "--seed", "7", "--quiet"}) != 0) return {false, "synth failed"};
  const auto train_into = [&](const std::string& name) {
    return cli::run({"train", "--out", (dir / name).string(), "--seed", "7", "--quiet", "--nodes",
                     (data / "nodes.csv").string(), "--edges", (data / "edges.csv").string(), "--features",
                     (data / "features.csv").string(), "--scores", (data / "scores.csv").string()});
  };
  if (train_into("a") != 0 || train_into("b") != 0) return {false, "train failed"};
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  bool same = true;
  std::string files;
  for (const char* f : {"metrics.csv", "epochs.csv", "training_log.csv"}) {
    const bool eq = slurp(dir / "a" / f) == slurp(dir / "b" / f) && !slurp(dir / "a" / f).empty();
    same = same && eq;
    files += std::string(files.empty() ? "" : ", ") + f + (eq ? " identical" : " differ");
  }
  fs::remove_all(dir);
  return {same, files};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known-unattainable" && i + 1 < argc) known = parse_ids(argv[++i]);
    else if (a == "--only" && i + 1 < argc) only = parse_ids(argv[++i]);
    else {
      std::cerr << "usage: par_acceptance [--known-unattainable ids] [--only ids]\n";
      return 2;
    }
  }
  spdlog::set_level(spdlog::level::warn);

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient fidelity", gradient_fidelity},
      {"planted-partition recovery", planted_recovery},
      {"schema suite", schema_suite},
      {"bucketing", bucketing},
      {"consistency involution", consistency},
      {"echo-loss arithmetic", echo_arithmetic},
      {"DBI oracle", dbi_oracle},
      {"ablation direction", ablation_direction},
      {"vote harness", vote_harness},
      {"determinism", determinism},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const bool excused = !o.pass && known.contains(id);
    if (!o.pass && !excused) ++unexpected;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail << " ("
              << fixed(seconds_since(t0), 1) << " s)" << (excused ? " [known unattainable]" : "") << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
