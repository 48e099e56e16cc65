#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "par/tape.hpp"

// Differentiable primitives. Every result is recorded on the operands' tape
// and checked for finiteness.
namespace par::num {

using RowIndex = std::vector<Index>;
using RowGroups = std::vector<std::vector<Index>>;
using RowPair = std::pair<Index, Index>;

Var matmul(const Var& a, const Var& b);
/// x + 1*bias, bias is 1 x cols.
Var add_bias(const Var& x, const Var& bias);
Var add(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);

Var leaky_relu(const Var& x, double slope);
Var relu(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
/// log(sigmoid(x)) evaluated without underflow.
Var log_sigmoid(const Var& x);

Var row_softmax(const Var& x);
/// log(row_softmax(x)) evaluated without underflow.
Var row_log_softmax(const Var& x);

/// [a, b] along columns.
Var concat_cols(const Var& a, const Var& b);
/// Rows of x selected by `rows`, in order, repeats allowed.
Var gather_rows(const Var& x, const RowIndex& rows);
/// k x 1 column of x(rows[i], cols[i]).
Var gather_entries(const Var& x, const RowIndex& rows, const RowIndex& cols);
/// Row i of the result is the mean of x over groups[i]. Empty groups are an error.
Var mean_rows(const Var& x, const RowGroups& groups);
/// n_rows x cols result with x's row i placed at rows[i] (summed on repeats), zeros elsewhere.
Var scatter_rows(const Var& x, const RowIndex& rows, Index n_rows);
/// k x 1 column of dot(x.row(i), x.row(j)) over pairs.
Var row_pair_dot(const Var& x, const std::vector<RowPair>& pairs);

Var add_scalar(const Var& x, double c);
Var scale(const Var& x, double c);
Var log(const Var& x);
Var negate(const Var& x);
/// Sum of every entry, as 1x1.
Var sum(const Var& x);
/// Sum of squared entries, as 1x1.
Var squared_norm(const Var& x);

}  // namespace par::num
