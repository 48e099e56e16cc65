#include "par/vote.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "par/adam.hpp"
#include "par/checkpoint.hpp"
#include "par/csv.hpp"
#include "par/ops.hpp"

namespace par::vote {

namespace {

constexpr int kFirstCongress = 114;
constexpr int kSecondCongress = 115;

csv::Table read_table(const std::filesystem::path& path) {
  try {
    return csv::read_file(path);
  } catch (const std::exception& e) {
    throw VoteError(e.what());
  }
}

LinearT<Matrix> xavier(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  LinearT<Matrix> l{Matrix(static_cast<Index>(in), static_cast<Index>(out)), Matrix::Zero(1, static_cast<Index>(out))};
  for (Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = dist(rng);
  return l;
}

Matrix build_inputs(const VoteClassifier& m, const EmbeddingTable& embeddings, const BillFeatures& bills,
                    const std::vector<VoteRecord>& records, std::size_t first, std::size_t last) {
  Matrix x(static_cast<Index>(last - first), static_cast<Index>(m.actor_dim + m.bill_dim));
  for (std::size_t i = first; i < last; ++i) {
    const auto row = static_cast<Index>(i - first);
    x.row(row).head(static_cast<Index>(m.actor_dim)) = embeddings.at(records[i].legislator);
    x.row(row).tail(static_cast<Index>(m.bill_dim)) = bills.at(records[i].bill_id);
  }
  return x;
}

num::Var logits(num::Tape& tape, const VoteClassifier& m, const Matrix& inputs, bool trainable,
                std::vector<num::Var>* params) {
  const auto leaf = [&](const Matrix& v) { return trainable ? tape.parameter(v) : tape.constant(v); };
  num::Var w1 = leaf(m.hidden.weight), b1 = leaf(m.hidden.bias);
  num::Var w2 = leaf(m.output.weight), b2 = leaf(m.output.bias);
  if (params) *params = {w1, b1, w2, b2};
  num::Var h = num::add_bias(num::matmul(tape.constant(inputs), w1), b1);
  h = m.activation == Activation::relu ? num::relu(h) : num::leaky_relu(h, m.leaky_slope);
  return num::add_bias(num::matmul(h, w2), b2);
}

Matrix probabilities(const VoteClassifier& m, const Matrix& inputs) {
  num::Tape tape;
  return num::row_softmax(logits(tape, m, inputs, false, nullptr)).value();
}

}  // namespace

const Eigen::RowVectorXd& BillFeatures::at(const std::string& bill) const {
  auto it = vectors.find(bill);
  if (it == vectors.end()) throw VoteError("unknown bill '" + bill + "'");
  return it->second;
}

EmbeddingTable EmbeddingTable::from_rows(const std::vector<EntityId>& ids, const Matrix& x) {
  if (static_cast<Index>(ids.size()) != x.rows()) throw VoteError("embedding ids and rows differ in count");
  EmbeddingTable t;
  t.dim = static_cast<std::size_t>(x.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) t.rows[ids[i]] = x.row(static_cast<Index>(i));
  return t;
}

const Eigen::RowVectorXd& EmbeddingTable::at(EntityId id) const {
  auto it = rows.find(id);
  if (it == rows.end()) throw VoteError("legislator " + std::to_string(id) + " has no embedding");
  return it->second;
}

std::vector<VoteRecord> load_votes(const std::filesystem::path& path) {
  const auto table = read_table(path);
  if (table.header != csv::Row{"legislator_id", "bill_id", "congress", "label"})
    throw VoteError(path.string() + ": unexpected header");
  std::vector<VoteRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      if (row.size() != 4) throw VoteError("expected 4 fields");
      VoteRecord v;
      const long long id = csv::parse_int(row[0]);
      if (id < 0) throw VoteError("negative legislator id");
      v.legislator = static_cast<EntityId>(id);
      v.bill_id = row[1];
      v.congress = static_cast<int>(csv::parse_int(row[2]));
      if (row[3] == "yea") v.label = Ballot::yea;
      else if (row[3] == "nay") v.label = Ballot::nay;
      else throw VoteError("label must be yea or nay");
      out.push_back(std::move(v));
    } catch (const std::exception& e) {
      throw VoteError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return out;
}

void write_votes(const std::vector<VoteRecord>& votes, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw VoteError("cannot write " + path.string());
  csv::write_row(out, {"legislator_id", "bill_id", "congress", "label"});
  for (const auto& v : votes)
    csv::write_row(out, {std::to_string(v.legislator), v.bill_id, std::to_string(v.congress),
                         v.label == Ballot::yea ? "yea" : "nay"});
}

BillFeatures load_bills(const std::filesystem::path& path) {
  const auto table = read_table(path);
  if (table.header.size() < 2 || table.header[0] != "bill_id") throw VoteError(path.string() + ": unexpected header");
  BillFeatures bills;
  bills.dim = table.header.size() - 1;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      if (row.size() != bills.dim + 1) throw VoteError("wrong field count");
      Eigen::RowVectorXd v(static_cast<Index>(bills.dim));
      for (std::size_t c = 0; c < bills.dim; ++c) v(static_cast<Index>(c)) = csv::parse_double(row[c + 1]);
      if (!bills.vectors.emplace(row[0], std::move(v)).second) throw VoteError("duplicate bill '" + row[0] + "'");
    } catch (const std::exception& e) {
      throw VoteError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return bills;
}

void write_bills(const BillFeatures& bills, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw VoteError("cannot write " + path.string());
  csv::Row header{"bill_id"};
  for (std::size_t c = 0; c < bills.dim; ++c) header.push_back("f" + std::to_string(c));
  csv::write_row(out, header);
  for (const auto& [id, v] : bills.vectors) {
    csv::Row row{id};
    for (Index c = 0; c < v.size(); ++c) row.push_back(csv::format_double(v(c)));
    csv::write_row(out, row);
  }
}

VoteSplit split_votes(const std::vector<VoteRecord>& records, SplitMode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VoteSplit split;
  if (mode == SplitMode::random) {
    std::vector<VoteRecord> pool = records;
    std::shuffle(pool.begin(), pool.end(), rng);
    const double n = static_cast<double>(pool.size());
    const auto cut1 = static_cast<std::size_t>(std::floor(0.6 * n + 1e-9));
    const auto cut2 = static_cast<std::size_t>(std::floor(0.8 * n + 1e-9));
    split.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cut1));
    split.validation.assign(pool.begin() + static_cast<std::ptrdiff_t>(cut1), pool.begin() + static_cast<std::ptrdiff_t>(cut2));
    split.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(cut2), pool.end());
    return split;
  }
  std::vector<VoteRecord> first;
  for (const auto& r : records) {
    if (r.congress == kFirstCongress) first.push_back(r);
    else if (r.congress == kSecondCongress) split.test.push_back(r);
    else throw VoteError("time-based split only accepts congresses 114 and 115, got " + std::to_string(r.congress));
  }
  if (first.empty() || split.test.empty()) throw VoteError("time-based split needs records from both the 114th and 115th congress");
  std::shuffle(first.begin(), first.end(), rng);
  const auto cut = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(first.size()) + 1e-9));
  split.train.assign(first.begin(), first.begin() + static_cast<std::ptrdiff_t>(cut));
  split.validation.assign(first.begin() + static_cast<std::ptrdiff_t>(cut), first.end());
  return split;
}

VoteClassifier zero_classifier(std::size_t actor_dim, std::size_t bill_dim, std::size_t hidden) {
  VoteClassifier m;
  m.actor_dim = actor_dim;
  m.bill_dim = bill_dim;
  m.hidden = {Matrix::Zero(static_cast<Index>(actor_dim + bill_dim), static_cast<Index>(hidden)),
              Matrix::Zero(1, static_cast<Index>(hidden))};
  m.output = {Matrix::Zero(static_cast<Index>(hidden), 2), Matrix::Zero(1, 2)};
  return m;
}

VoteClassifier train_vote_model(const EmbeddingTable& embeddings, const BillFeatures& bills, const VoteSplit& split,
                                const VoteConfig& config) {
  if (split.train.empty()) throw VoteError("no training votes");
  if (config.batch_size == 0 || config.max_epochs == 0 || config.hidden == 0) throw VoteError("invalid vote configuration");
  for (const auto* part : {&split.train, &split.validation, &split.test})
    for (const auto& r : *part) {
      embeddings.at(r.legislator);
      bills.at(r.bill_id);
    }

  std::mt19937_64 rng(config.seed);
  VoteClassifier m;
  m.actor_dim = embeddings.dim;
  m.bill_dim = bills.dim;
  m.activation = config.activation;
  m.leaky_slope = config.leaky_slope;
  m.hidden = xavier(m.actor_dim + m.bill_dim, config.hidden, rng);
  m.output = xavier(config.hidden, 2, rng);

  std::vector<VoteRecord> order = split.train;
  num::AdamState adam;
  std::vector<Matrix*> tensors{&m.hidden.weight, &m.hidden.bias, &m.output.weight, &m.output.bias};
  VoteClassifier best = m;
  double best_acc = -1.0;
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t last = std::min(order.size(), first + config.batch_size);
      num::Tape tape;
      std::vector<num::Var> params;
      num::Var z = logits(tape, m, build_inputs(m, embeddings, bills, order, first, last), true, &params);
      num::RowIndex rows, cols;
      for (std::size_t i = first; i < last; ++i) {
        rows.push_back(static_cast<Index>(i - first));
        cols.push_back(order[i].label == Ballot::yea ? 0 : 1);
      }
      num::Var loss = num::scale(num::sum(num::gather_entries(num::row_log_softmax(z), rows, cols)),
                                 -1.0 / static_cast<double>(last - first));
      tape.backward(loss);
      std::vector<Matrix> grads;
      for (const auto& p : params) grads.push_back(p.grad());
      num::adam_step(tensors, grads, adam, config.learning_rate);
    }
    if (split.validation.empty()) {
      best = m;
      continue;
    }
    const double acc = vote_accuracy(m, embeddings, bills, split.validation);
    if (acc > best_acc) {
      best_acc = acc;
      best_epoch = epoch;
      best = m;
    } else if (config.patience > 0 && epoch - best_epoch >= config.patience) {
      break;
    }
  }
  return best;
}

std::pair<double, double> predict_vote(const VoteClassifier& model, const EmbeddingTable& embeddings,
                                       const BillFeatures& bills, EntityId legislator, const std::string& bill) {
  const std::vector<VoteRecord> one{{legislator, bill, 0, Ballot::yea}};
  const Matrix p = probabilities(model, build_inputs(model, embeddings, bills, one, 0, 1));
  return {p(0, 0), p(0, 1)};
}

double vote_accuracy(const VoteClassifier& model, const EmbeddingTable& embeddings, const BillFeatures& bills,
                     const std::vector<VoteRecord>& records) {
  if (records.empty()) throw VoteError("accuracy over an empty record set");
  const Matrix p = probabilities(model, build_inputs(model, embeddings, bills, records, 0, records.size()));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    // Ties go to yea.
    const Ballot pred = p(static_cast<Index>(i), 0) >= p(static_cast<Index>(i), 1) ? Ballot::yea : Ballot::nay;
    correct += pred == records[i].label;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double majority_rate(const std::vector<VoteRecord>& records) {
  if (records.empty()) throw VoteError("majority over an empty record set");
  const auto yea = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.label == Ballot::yea; });
  const auto n = static_cast<double>(records.size());
  return std::max(static_cast<double>(yea), n - static_cast<double>(yea)) / n;
}

void save_classifier(const VoteClassifier& model, const std::filesystem::path& dir) {
  TensorBundle bundle;
  bundle.format = "par-vote";
  bundle.meta = {{"actor_dim", std::to_string(model.actor_dim)},
                 {"bill_dim", std::to_string(model.bill_dim)},
                 {"activation", std::string(to_string(model.activation))},
                 {"leaky_slope", csv::format_double(model.leaky_slope)}};
  bundle.tensors = {{"hidden.weight", model.hidden.weight},
                    {"hidden.bias", model.hidden.bias},
                    {"output.weight", model.output.weight},
                    {"output.bias", model.output.bias}};
  save_bundle(bundle, dir);
}

VoteClassifier load_classifier(const std::filesystem::path& dir) {
  const auto bundle = load_bundle(dir);
  if (bundle.format != "par-vote") throw VoteError(dir.string() + ": not a vote classifier");
  VoteClassifier m;
  try {
    m.actor_dim = static_cast<std::size_t>(csv::parse_int(bundle.meta.at("actor_dim")));
    m.bill_dim = static_cast<std::size_t>(csv::parse_int(bundle.meta.at("bill_dim")));
    m.leaky_slope = csv::parse_double(bundle.meta.at("leaky_slope"));
    const auto act = parse_activation(bundle.meta.at("activation"));
    if (!act) throw VoteError("bad activation");
    m.activation = *act;
  } catch (const std::exception& e) {
    throw VoteError(std::string("bad classifier metadata: ") + e.what());
  }
  m.hidden = {bundle.at("hidden.weight"), bundle.at("hidden.bias")};
  m.output = {bundle.at("output.weight"), bundle.at("output.bias")};
  if (m.hidden.weight.rows() != static_cast<Index>(m.actor_dim + m.bill_dim) || m.output.weight.cols() != 2 ||
      m.output.weight.rows() != m.hidden.weight.cols())
    throw VoteError("classifier tensor shapes are inconsistent");
  return m;
}

BillFeatures synth_bills(const std::vector<std::string>& bill_ids, std::size_t dim, std::uint64_t seed) {
  BillFeatures bills;
  bills.dim = dim;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t b = 0; b < bill_ids.size(); ++b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    Eigen::RowVectorXd v(static_cast<Index>(dim));
    for (Index c = 0; c < v.size(); ++c) v(c) = normal(rng);
    bills.vectors[bill_ids[b]] = std::move(v);
  }
  return bills;
}

PlantedVotes planted_votes(const PlantedOptions& o) {
  if (o.n_legislators < 2 || o.n_bills < 2 || o.actor_dim == 0 || o.bill_dim == 0)
    throw VoteError("planted_votes needs at least 2 legislators, 2 bills and positive dimensions");
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PlantedVotes out;

  std::vector<EntityId> ids;
  Matrix actors(static_cast<Index>(o.n_legislators), static_cast<Index>(o.actor_dim));
  for (std::size_t i = 0; i < o.n_legislators; ++i) {
    const double ideology = i % 2 == 0 ? 1.0 : -1.0;
    out.ideology.push_back(ideology);
    ids.push_back(i);
    for (Index c = 0; c < actors.cols(); ++c) actors(static_cast<Index>(i), c) = o.feature_noise * normal(rng);
    actors(static_cast<Index>(i), 0) += ideology;
  }
  out.embeddings = EmbeddingTable::from_rows(ids, actors);

  std::vector<double> polarity;
  out.bills.dim = o.bill_dim;
  for (std::size_t b = 0; b < o.n_bills; ++b) {
    const double p = unit(rng) < 0.5 ? 1.0 : -1.0;
    polarity.push_back(p);
    Eigen::RowVectorXd v(static_cast<Index>(o.bill_dim));
    for (Index c = 0; c < v.size(); ++c) v(c) = o.feature_noise * normal(rng);
    v(0) += p;
    out.bills.vectors["B" + std::to_string(b)] = std::move(v);
  }

  for (std::size_t b = 0; b < o.n_bills; ++b) {
    const int congress = b < o.n_bills / 2 ? kFirstCongress : kSecondCongress;
    for (std::size_t i = 0; i < o.n_legislators; ++i) {
      bool yea = out.ideology[i] * polarity[b] > 0;
      if (unit(rng) < o.noise) yea = !yea;
      out.votes.push_back({i, "B" + std::to_string(b), congress, yea ? Ballot::yea : Ballot::nay});
    }
  }
  return out;
}

}  // namespace par::vote
