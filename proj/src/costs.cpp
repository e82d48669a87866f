#include "somnnet/costs.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "somnnet/error.hpp"
#include "somnnet/model.hpp"

namespace somnnet {

namespace {

// The published description of the binarized network's additions, which
// disagrees with the published table row for the same network.
constexpr long long kPublishedBinarizedTextAdds = 1272876;

bool ends_with(const std::string& s, const char* suffix) {
  const size_t n = std::string_view(suffix).size();
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

long long nonzero_count(const Array& a) {
  long long n = 0;
  for (double v : a.v)
    if (v != 0.0) ++n;
  return n;
}

}  // namespace

ParamCounts count_params(const Network& net) {
  ParamCounts pc;
  for (int i = 0; i < net.layer_count(); ++i) {
    const LayerSpec& s = net.config().layers[i];
    const LayerShape& in = net.shape(i);
    switch (s.kind) {
      case LayerKind::InputNorm: {
        const long long f = static_cast<long long>(in.channels) * in.length;
        pc.norm_trainable += 2 * f;
        pc.norm_stats += 2 * f;
        break;
      }
      case LayerKind::Conv1d:
        pc.prunable += static_cast<long long>(s.filter_count) * in.channels *
                       s.kernel_length;
        pc.biases += s.filter_count;
        break;
      case LayerKind::Dense:
        pc.prunable += static_cast<long long>(s.filter_count) * in.length;
        pc.biases += s.filter_count;
        break;
      default:
        break;
    }
  }
  pc.nonzero = pc.prunable;
  return pc;
}

ParamCounts count_params(const Network& net, const ParameterStore& params) {
  (void)net;
  ParamCounts pc;
  for (const auto& [name, a] : params.items) {
    if (ends_with(name, ".latent")) continue;  // shadow copies, not deployed
    if (is_prunable_name(name)) {
      pc.prunable += a.size();
      pc.nonzero += nonzero_count(a);
    } else if (ends_with(name, ".bias")) {
      pc.biases += a.size();
    } else if (ends_with(name, ".gamma") || ends_with(name, ".beta")) {
      pc.norm_trainable += a.size();
    } else if (ends_with(name, ".mmean") || ends_with(name, ".mvar")) {
      pc.norm_stats += a.size();
    }
  }
  return pc;
}

OpCounts count_ops(const Network& net, bool use_bias) {
  OpCounts ops;
  for (int i = 0; i < net.layer_count(); ++i) {
    const LayerSpec& s = net.config().layers[i];
    const LayerShape& in = net.shape(i);
    const LayerShape& out = net.shape(i + 1);
    LayerCost lc;
    if (s.kind == LayerKind::Conv1d) {
      lc.weights = static_cast<long long>(s.filter_count) * in.channels *
                   s.kernel_length;
      lc.biases = s.filter_count;
      lc.muls = lc.weights * out.length;
      lc.adds = lc.muls -
                (use_bias ? 0
                          : static_cast<long long>(s.filter_count) *
                                out.length);
      std::ostringstream name;
      name << "L" << i << " conv " << s.filter_count << "x" << in.channels
           << "x" << s.kernel_length;
      lc.name = name.str();
    } else if (s.kind == LayerKind::Dense) {
      lc.weights = static_cast<long long>(s.filter_count) * in.length;
      lc.biases = s.filter_count;
      lc.muls = lc.weights;
      lc.adds = lc.muls - (use_bias ? 0 : s.filter_count);
      std::ostringstream name;
      name << "L" << i << " dense " << s.filter_count << "x" << in.length;
      lc.name = name.str();
    } else {
      continue;
    }
    lc.nonzero = lc.weights;
    if (!use_bias) lc.biases = 0;
    ops.muls += lc.muls;
    ops.adds += lc.adds;
    ops.per_layer.push_back(std::move(lc));
  }
  return ops;
}

OpCounts count_ops_uniform(const Network& net, double sparsity,
                           bool use_bias) {
  if (sparsity < 0.0 || sparsity > 0.95)
    throw ParameterError("cost: sparsity must be in [0, 0.95]");
  const OpCounts dense = count_ops(net, use_bias);
  OpCounts ops;
  // One global rounding, not per layer, so the result is a pure function of
  // the dense total.
  ops.muls = std::llround((1.0 - sparsity) * static_cast<double>(dense.muls));
  ops.adds = dense.adds - (dense.muls - ops.muls);
  return ops;
}

OpCounts count_ops_masked(const Network& net, const ParameterStore& params,
                          bool use_bias) {
  OpCounts ops;
  for (int i = 0; i < net.layer_count(); ++i) {
    const LayerSpec& s = net.config().layers[i];
    const LayerShape& in = net.shape(i);
    const LayerShape& out = net.shape(i + 1);
    LayerCost lc;
    if (s.kind == LayerKind::Conv1d) {
      const Array& k = params.at(net.param_name(i, "kernel"));
      lc.weights = k.size();
      lc.nonzero = nonzero_count(k);
      lc.biases = use_bias ? s.filter_count : 0;
      // Every surviving kernel value fires once per output position.
      lc.muls = lc.nonzero * out.length;
      lc.adds = lc.muls -
                (use_bias ? 0
                          : static_cast<long long>(s.filter_count) *
                                out.length);
      if (lc.adds < 0) lc.adds = 0;
      std::ostringstream name;
      name << "L" << i << " conv " << s.filter_count << "x" << in.channels
           << "x" << s.kernel_length;
      lc.name = name.str();
    } else if (s.kind == LayerKind::Dense) {
      const Array& w = params.at(net.param_name(i, "weight"));
      lc.weights = w.size();
      lc.nonzero = nonzero_count(w);
      lc.biases = use_bias ? s.filter_count : 0;
      lc.muls = lc.nonzero;
      lc.adds = lc.muls - (use_bias ? 0 : s.filter_count);
      if (lc.adds < 0) lc.adds = 0;
      std::ostringstream name;
      name << "L" << i << " dense " << s.filter_count << "x" << in.length;
      lc.name = name.str();
    } else {
      continue;
    }
    ops.muls += lc.muls;
    ops.adds += lc.adds;
    ops.per_layer.push_back(std::move(lc));
  }
  return ops;
}

double estimate_energy_uj(long long adds, bool binarized) {
  const double pj = binarized ? kPicojoulePerAdd : kPicojoulePerMac;
  return static_cast<double>(adds) * pj * 1e-6;
}

const std::vector<PublishedRow>& published_cost_rows() {
  static const std::vector<PublishedRow> rows = {
      {"dense", 0.0, false, 27182, 1270016, 1272876, 0.4964},
      {"sparse-10", 0.1, false, 24485, 1143428, 1146288, 0.4470},
      {"sparse-20", 0.2, false, 21788, 818840, 821700, 0.3205},
      {"sparse-30", 0.3, false, 19091, 889724, 892584, 0.3481},
      {"sparse-40", 0.4, false, 16394, 762608, 765468, 0.2985},
      {"sparse-50", 0.5, false, 13697, 636020, 638880, 0.2492},
      {"sparse-60", 0.6, false, 11000, 508904, 511764, 0.1996},
      {"sparse-70", 0.7, false, 8303, 382316, 385176, 0.1502},
      {"sparse-80", 0.8, false, 10106, 255200, 258060, 0.1006},
      {"binarized", -1.0, true, 27094, 1496, 1179946, 0.0236},
  };
  return rows;
}

namespace {

const PublishedRow* find_published(const std::string& label) {
  for (const PublishedRow& r : published_cost_rows())
    if (label == r.label) return &r;
  return nullptr;
}

void attach_published(CostRow& row) {
  const PublishedRow* pub = find_published(row.label);
  if (!pub) return;
  row.pub_params = pub->params;
  row.pub_muls = pub->muls;
  row.pub_adds = pub->adds;
  row.pub_energy = pub->energy_uj;

  auto note = [&row](const std::string& s) { row.flags.push_back(s); };
  if (pub->params != row.params_total)
    note("published params " + std::to_string(pub->params) +
         " differ from computed " + std::to_string(row.params_total));
  if (pub->muls != row.muls)
    note("published muls " + std::to_string(pub->muls) +
         " differ from computed " + std::to_string(row.muls) + " by " +
         std::to_string(pub->muls - row.muls));
  if (pub->adds != row.adds) {
    std::string s = "published adds " + std::to_string(pub->adds) +
                    " differ from computed " + std::to_string(row.adds);
    if (row.binarized)
      s += "; the published prose gives " +
           std::to_string(kPublishedBinarizedTextAdds) + " instead";
    note(s);
  }
}

CostRow anchored_row_from(const Network& net, const ParamCounts& pc,
                          const OpCounts& ops, bool binarized) {
  (void)net;
  CostRow row;
  row.binarized = binarized;
  row.muls = (binarized ? 0 : ops.muls) + kOverheadMuls;
  row.adds = ops.adds + kOverheadAdds;
  row.params_total = pc.nonzero + pc.biases + kParamResidual;
  row.energy_uj = estimate_energy_uj(row.adds, binarized);
  return row;
}

}  // namespace

CostRow reference_dense_row() {
  const Network net = build_reference_network();
  ParamCounts pc = count_params(net);
  pc.residual = kParamResidual;
  const OpCounts ops = count_ops(net, /*use_bias=*/true);
  CostRow row = anchored_row_from(net, pc, ops, /*binarized=*/false);
  row.label = "dense";
  row.mode = "dense";
  attach_published(row);
  return row;
}

CostRow reference_uniform_row(double sparsity) {
  const Network net = build_reference_network();
  ParamCounts pc = count_params(net);
  pc.residual = kParamResidual;
  pc.nonzero =
      pc.prunable - std::llround(sparsity * static_cast<double>(pc.prunable));
  const OpCounts ops = count_ops_uniform(net, sparsity, /*use_bias=*/true);
  CostRow row = anchored_row_from(net, pc, ops, /*binarized=*/false);
  std::ostringstream label;
  label << "sparse-" << std::llround(sparsity * 100.0);
  row.label = label.str();
  row.mode = "uniform";
  row.sparsity = sparsity;
  attach_published(row);
  return row;
}

CostRow reference_binarized_row() {
  const Network net = build_reference_network();
  ParamCounts pc = count_params(net);
  pc.residual = kParamResidual;
  pc.biases = 0;  // binarization removes conv/dense biases
  const OpCounts ops = count_ops(net, /*use_bias=*/false);
  CostRow row = anchored_row_from(net, pc, ops, /*binarized=*/true);
  row.label = "binarized";
  row.mode = "binarized";
  attach_published(row);
  return row;
}

std::vector<CostRow> reference_cost_table() {
  std::vector<CostRow> rows;
  rows.push_back(reference_dense_row());
  for (int pct = 10; pct <= 80; pct += 10)
    rows.push_back(reference_uniform_row(pct / 100.0));
  rows.push_back(reference_binarized_row());
  return rows;
}

CostRow store_cost_row(const Network& net, const ParameterStore& params,
                       bool binarized, bool anchored) {
  const ParamCounts pc = count_params(net, params);
  const bool use_bias = pc.biases > 0;
  const OpCounts ops = count_ops_masked(net, params, use_bias);
  CostRow row;
  row.label = "checkpoint";
  row.mode = "mask-exact";
  row.binarized = binarized;
  if (pc.prunable > 0)
    row.sparsity = 1.0 - static_cast<double>(pc.nonzero) /
                             static_cast<double>(pc.prunable);
  row.muls = binarized ? 0 : ops.muls;
  row.adds = ops.adds;
  row.params_total = pc.nonzero + pc.biases;
  if (anchored) {
    row.muls += kOverheadMuls;
    row.adds += kOverheadAdds;
    row.params_total += kParamResidual;
  }
  row.energy_uj = estimate_energy_uj(row.adds, binarized);
  return row;
}

namespace {

std::string fmt_energy(double uj) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << uj;
  return os.str();
}

}  // namespace

std::string render_table(const std::vector<CostRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "config" << std::right << std::setw(9)
     << "params" << std::setw(12) << "muls" << std::setw(12) << "adds"
     << std::setw(12) << "energy_uj"
     << "  published(params/muls/adds/energy)"
     << "  notes\n";
  std::vector<std::string> footnotes;
  for (const CostRow& row : rows) {
    os << std::left << std::setw(12) << row.label << std::right
       << std::setw(9) << row.params_total << std::setw(12) << row.muls
       << std::setw(12) << row.adds << std::setw(12)
       << fmt_energy(row.energy_uj);
    if (row.pub_params >= 0) {
      std::ostringstream pub;
      pub << row.pub_params << "/" << row.pub_muls << "/" << row.pub_adds
          << "/" << fmt_energy(row.pub_energy);
      os << "  " << std::left << std::setw(35) << pub.str();
    } else {
      os << "  " << std::left << std::setw(35) << "-";
    }
    if (row.flags.empty()) {
      os << "  -";
    } else {
      std::string refs;
      for (const std::string& f : row.flags) {
        footnotes.push_back(f);
        if (!refs.empty()) refs += ",";
        refs += "[" + std::to_string(footnotes.size()) + "]";
      }
      os << "  " << refs;
    }
    os << "\n";
  }
  for (size_t i = 0; i < footnotes.size(); ++i)
    os << "[" << (i + 1) << "] " << footnotes[i] << "\n";
  return os.str();
}

std::string render_csv(const std::vector<CostRow>& rows) {
  std::ostringstream os;
  os << "label,mode,sparsity,binarized,params,muls,adds,energy_uj,"
        "pub_params,pub_muls,pub_adds,pub_energy_uj,notes\n";
  for (const CostRow& row : rows) {
    os << row.label << "," << row.mode << "," << row.sparsity << ","
       << (row.binarized ? 1 : 0) << "," << row.params_total << ","
       << row.muls << "," << row.adds << "," << fmt_energy(row.energy_uj)
       << ",";
    if (row.pub_params >= 0)
      os << row.pub_params << "," << row.pub_muls << "," << row.pub_adds
         << "," << fmt_energy(row.pub_energy);
    else
      os << ",,,";
    os << ",\"";
    for (size_t i = 0; i < row.flags.size(); ++i) {
      if (i) os << "; ";
      os << row.flags[i];
    }
    os << "\"\n";
  }
  return os.str();
}

std::string render_layer_table(const OpCounts& ops) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "layer" << std::right << std::setw(9)
     << "weights" << std::setw(9) << "nonzero" << std::setw(8) << "biases"
     << std::setw(12) << "muls" << std::setw(12) << "adds\n";
  long long weights = 0, nonzero = 0, biases = 0;
  for (const LayerCost& lc : ops.per_layer) {
    os << std::left << std::setw(22) << lc.name << std::right << std::setw(9)
       << lc.weights << std::setw(9) << lc.nonzero << std::setw(8)
       << lc.biases << std::setw(12) << lc.muls << std::setw(12) << lc.adds
       << "\n";
    weights += lc.weights;
    nonzero += lc.nonzero;
    biases += lc.biases;
  }
  os << std::left << std::setw(22) << "total" << std::right << std::setw(9)
     << weights << std::setw(9) << nonzero << std::setw(8) << biases
     << std::setw(12) << ops.muls << std::setw(12) << ops.adds << "\n";
  return os.str();
}

}  // namespace somnnet
