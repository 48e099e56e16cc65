#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "par/hin.hpp"
#include "par/model.hpp"

namespace par::vote {

class VoteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Ballot : std::uint8_t { yea, nay };

struct VoteRecord {
  EntityId legislator = 0;
  std::string bill_id;
  int congress = 0;
  Ballot label = Ballot::yea;
};

/// Fixed-dimension vector per bill, e.g. an encoding of the bill text.
struct BillFeatures {
  std::size_t dim = 0;
  std::map<std::string, Eigen::RowVectorXd> vectors;

  const Eigen::RowVectorXd& at(const std::string& bill) const;
};

/// Actor representations keyed by entity id.
struct EmbeddingTable {
  std::map<EntityId, Eigen::RowVectorXd> rows;
  std::size_t dim = 0;

  static EmbeddingTable from_rows(const std::vector<EntityId>& ids, const Matrix& x);
  const Eigen::RowVectorXd& at(EntityId id) const;
};

std::vector<VoteRecord> load_votes(const std::filesystem::path& path);
void write_votes(const std::vector<VoteRecord>& votes, const std::filesystem::path& path);
BillFeatures load_bills(const std::filesystem::path& path);
void write_bills(const BillFeatures& bills, const std::filesystem::path& path);

enum class SplitMode { random, time_based };

struct VoteSplit {
  std::vector<VoteRecord> train;
  std::vector<VoteRecord> validation;
  std::vector<VoteRecord> test;
};

/// random: seeded 6:2:2 over all records. time_based: the 114th congress is
/// shuffled and cut 8:2 into train/validation, the 115th is the test set.
VoteSplit split_votes(const std::vector<VoteRecord>& records, SplitMode mode, std::uint64_t seed);

struct VoteConfig {
  std::size_t hidden = 128;
  Activation activation = Activation::leaky_relu;
  double leaky_slope = 0.01;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 100;
  std::size_t batch_size = 64;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
};

/// [actor, bill] -> hidden -> 2-way softmax (column 0 yea, column 1 nay).
struct VoteClassifier {
  std::size_t actor_dim = 0;
  std::size_t bill_dim = 0;
  Activation activation = Activation::leaky_relu;
  double leaky_slope = 0.01;
  LinearT<Matrix> hidden;
  LinearT<Matrix> output;
};

/// Classifier with every weight and bias set to zero.
VoteClassifier zero_classifier(std::size_t actor_dim, std::size_t bill_dim, std::size_t hidden);

VoteClassifier train_vote_model(const EmbeddingTable& embeddings, const BillFeatures& bills, const VoteSplit& split,
                                const VoteConfig& config);

/// (p_yea, p_nay).
std::pair<double, double> predict_vote(const VoteClassifier& model, const EmbeddingTable& embeddings,
                                       const BillFeatures& bills, EntityId legislator, const std::string& bill);

double vote_accuracy(const VoteClassifier& model, const EmbeddingTable& embeddings, const BillFeatures& bills,
                     const std::vector<VoteRecord>& records);

/// Fraction of the most common ballot in `records`.
double majority_rate(const std::vector<VoteRecord>& records);

void save_classifier(const VoteClassifier& model, const std::filesystem::path& dir);
VoteClassifier load_classifier(const std::filesystem::path& dir);

/// Planted-rule fixture: a legislator votes yea iff the sign of their planted
/// ideology agrees with the sign of the bill's planted polarity, with each
/// ballot flipped with probability `noise`.
struct PlantedVotes {
  EmbeddingTable embeddings;
  BillFeatures bills;
  std::vector<VoteRecord> votes;
  std::vector<double> ideology;
};

struct PlantedOptions {
  std::size_t n_legislators = 100;
  std::size_t n_bills = 60;
  std::size_t actor_dim = 16;
  std::size_t bill_dim = 16;
  double noise = 0.05;
  /// Gaussian noise on embedding and bill coordinates.
  double feature_noise = 0.5;
  std::uint64_t seed = 0;
};

PlantedVotes planted_votes(const PlantedOptions& options);

/// Deterministic standard-normal bill vectors, seeded per (seed, bill index).
BillFeatures synth_bills(const std::vector<std::string>& bill_ids, std::size_t dim, std::uint64_t seed);

}  // namespace par::vote
