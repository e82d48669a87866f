#pragma once

#include <string>
#include <vector>

#include "somnnet/network.hpp"

namespace somnnet {

// Platform overhead constants from the published cost model: the multiplies
// and additions left once conv/dense MACs are subtracted from the published
// dense totals. They cover input normalization, pooling and activation
// bookkeeping on the reference deployment, and they are constants of that
// deployment rather than functions of sparsity.
inline constexpr long long kOverheadMuls = 1496;
inline constexpr long long kOverheadAdds = 4356;

// The published dense parameter total exceeds conv kernels + dense weights +
// biases by this many values. The excess is unexplained, so it is carried as
// an explicit residual instead of being folded into any computed count.
inline constexpr long long kParamResidual = 124;

// Per-operation energy on the reference hardware, picojoules. Every
// addition is priced as a full multiply-accumulate in the real-valued
// model; binarized inference pays only the accumulate.
inline constexpr double kPicojoulePerMac = 0.39;
inline constexpr double kPicojoulePerAdd = 0.02;

struct ParamCounts {
  long long prunable = 0;  // conv kernel + dense weight values
  long long nonzero = 0;   // prunable values that are not exactly zero
  long long biases = 0;    // conv/dense bias values present
  long long norm_trainable = 0;  // normalization gain/shift
  long long norm_stats = 0;      // normalization moving stats
  long long residual = 0;        // published residual, anchored mode only

  long long conv_dense_total() const { return prunable + biases; }
  long long anchored_total() const { return nonzero + biases + residual; }
};

// Architecture-only accounting: every weight counts as nonzero and biases
// are assumed present.
ParamCounts count_params(const Network& net);

// Store-exact accounting: zeros in weight arrays are excluded from nonzero,
// and bias/normalization counts reflect the arrays actually present.
ParamCounts count_params(const Network& net, const ParameterStore& params);

struct LayerCost {
  std::string name;
  long long weights = 0;
  long long nonzero = 0;
  long long biases = 0;
  long long muls = 0;
  long long adds = 0;
};

struct OpCounts {
  long long muls = 0;
  long long adds = 0;
  std::vector<LayerCost> per_layer;
};

// Exact multiply/add counts for conv and dense layers of the dense network.
// Nothing else is counted; pooling, activation and normalization costs
// belong to the platform overhead constants.
OpCounts count_ops(const Network& net, bool use_bias = true);

// Uniform-sparsity model: one global rounding of (1 - s) times the dense
// multiply count, additions reduced in step. Matches the published sparse
// rows that are arithmetically consistent.
OpCounts count_ops_uniform(const Network& net, double sparsity,
                           bool use_bias = true);

// Mask-exact model: each surviving weight costs its actual number of uses
// (one per output position for conv, one for dense).
OpCounts count_ops_masked(const Network& net, const ParameterStore& params,
                          bool use_bias);

// Unrounded microjoules for a given addition count. Rounding to the 4
// published decimals happens only at rendering time.
double estimate_energy_uj(long long adds, bool binarized);

// One configuration of the reference model, with published figures attached
// when the configuration appears in the published tables. pub_* of -1 (or
// -1.0) means no published figure.
struct CostRow {
  std::string label;
  std::string mode;  // "dense", "uniform", "mask-exact", "binarized"
  double sparsity = 0.0;
  bool binarized = false;

  long long params_total = 0;
  long long muls = 0;
  long long adds = 0;
  double energy_uj = 0.0;

  long long pub_params = -1;
  long long pub_muls = -1;
  long long pub_adds = -1;
  double pub_energy = -1.0;

  std::vector<std::string> flags;
};

struct PublishedRow {
  const char* label;
  double sparsity;  // -1 when not a uniform-sparsity row
  bool binarized;
  long long params;
  long long muls;
  long long adds;
  double energy_uj;
};

// The published cost table for the reference model: the dense network, the
// eight uniform-sparsity variants, and the binarized network.
const std::vector<PublishedRow>& published_cost_rows();

// Anchored rows for the reference architecture: computed counts plus the
// platform overheads and the parameter residual, with published figures and
// discrepancy notes attached.
CostRow reference_dense_row();
CostRow reference_uniform_row(double sparsity);
CostRow reference_binarized_row();
std::vector<CostRow> reference_cost_table();

// Row for an actual trained store (mask-exact). anchored adds the platform
// overheads and residual so the row is comparable to the published table.
CostRow store_cost_row(const Network& net, const ParameterStore& params,
                       bool binarized, bool anchored);

std::string render_table(const std::vector<CostRow>& rows);
std::string render_csv(const std::vector<CostRow>& rows);
std::string render_layer_table(const OpCounts& ops);

}  // namespace somnnet
