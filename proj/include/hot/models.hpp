// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "hot/apply.hpp"
#include "hot/batch.hpp"
#include "hot/graph_ops.hpp"
#include "hot/nn.hpp"

namespace hot {

// Forward-only high-order GNN architectures. Each layer is a fixed
// composition of graph operators; every operator output runs through a
// tuplewise MLP and the branches are summed residually with the input.
enum class Arch { NGNN, GNNAK, DSSGNN, SUN, I2GNN, DRFWL, SSWL, PPGN, NGAT };
enum class Rep { sparse, dense };
enum class NormMode { per_batch, per_graph };

inline constexpr Index kSpdTableSize = 128;

inline std::string to_string(Arch a) {
  switch (a) {
    case Arch::NGNN: return "NGNN";
    case Arch::GNNAK: return "GNNAK";
    case Arch::DSSGNN: return "DSSGNN";
    case Arch::SUN: return "SUN";
    case Arch::I2GNN: return "I2GNN";
    case Arch::DRFWL: return "DRFWL";
    case Arch::SSWL: return "SSWL";
    case Arch::PPGN: return "PPGN";
    case Arch::NGAT: return "NGAT";
  }
  return "?";
}

inline Arch arch_from_string(const std::string& s) {
  for (Arch a : {Arch::NGNN, Arch::GNNAK, Arch::DSSGNN, Arch::SUN, Arch::I2GNN, Arch::DRFWL,
                 Arch::SSWL, Arch::PPGN, Arch::NGAT})
    if (to_string(a) == s) return a;
  throw ParseError("unknown architecture '" + s + "'");
}

inline std::vector<Arch> all_archs() {
  return {Arch::NGNN, Arch::GNNAK, Arch::DSSGNN, Arch::SUN, Arch::I2GNN,
          Arch::DRFWL, Arch::SSWL, Arch::PPGN, Arch::NGAT};
}

inline std::string to_string(Rep r) { return r == Rep::sparse ? "sparse" : "dense"; }
inline Rep rep_from_string(const std::string& s) {
  if (s == "sparse") return Rep::sparse;
  if (s == "dense") return Rep::dense;
  throw ParseError("unknown representation '" + s + "'");
}

// Native representation and tuple order per architecture.
inline Rep native_representation(Arch a) {
  return (a == Arch::SSWL || a == Arch::PPGN) ? Rep::dense : Rep::sparse;
}
inline Index tuple_order(Arch a) { return a == Arch::I2GNN ? 3 : 2; }

struct ModelConfig {
  Arch arch = Arch::NGNN;
  int num_layers = 2;
  int hidden = 16;
  Aggregator aggregator = Aggregator::sum;
  Rep representation = Rep::sparse;
  std::uint64_t seed = 0;
  NormMode norm = NormMode::per_graph;
  bool allow_rep_override = false;
};

inline void validate_config(const ModelConfig& cfg) {
  if (cfg.num_layers < 1) throw ShapeError("num_layers must be >= 1");
  if (cfg.hidden < 1) throw ShapeError("hidden must be >= 1");
  if (cfg.representation != native_representation(cfg.arch) && !cfg.allow_rep_override)
    throw UnsupportedError(to_string(cfg.arch) + " runs " +
                           to_string(native_representation(cfg.arch)) +
                           " natively; set rep_override=1 to cross over");
  if (cfg.representation == Rep::dense && tuple_order(cfg.arch) != 2)
    throw UnsupportedError("dense route covers order-2 tuples only");
}

// Flat key=value serialization.
inline std::string serialize_model_config(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "arch=" << to_string(cfg.arch) << "\n";
  os << "layers=" << cfg.num_layers << "\n";
  os << "hidden=" << cfg.hidden << "\n";
  os << "aggregator=" << to_string(cfg.aggregator) << "\n";
  os << "representation=" << to_string(cfg.representation) << "\n";
  os << "seed=" << cfg.seed << "\n";
  if (cfg.norm != NormMode::per_graph)
    os << "norm=" << (cfg.norm == NormMode::per_batch ? "batch" : "graph") << "\n";
  if (cfg.allow_rep_override) os << "rep_override=1\n";
  return os.str();
}

inline ModelConfig parse_model_config(const std::string& text) {
  ModelConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    try {
      if (key == "arch")
        cfg.arch = arch_from_string(val);
      else if (key == "layers")
        cfg.num_layers = std::stoi(val);
      else if (key == "hidden")
        cfg.hidden = std::stoi(val);
      else if (key == "aggregator")
        cfg.aggregator = aggregator_from_string(val);
      else if (key == "representation")
        cfg.representation = rep_from_string(val);
      else if (key == "seed")
        cfg.seed = std::stoull(val);
      else if (key == "norm")
        cfg.norm = val == "batch" ? NormMode::per_batch : NormMode::per_graph;
      else if (key == "rep_override")
        cfg.allow_rep_override = val == "1" || val == "true";
      else
        throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("config line " + std::to_string(lineno) + ": bad value '" + val + "'");
    }
  }
  return cfg;
}

struct LayerParams {
  std::vector<Mlp> mlps;
  std::vector<double> score_w;  // attention score form (NGAT)
};

struct Model {
  ModelConfig cfg;
  Index feat_dim = 0;
  RowMatrix<double> spd_embed;
  Linear node_encoder;
  std::vector<LayerParams> layers;
  Linear head;
};

inline Index branch_count(Arch a) {
  switch (a) {
    case Arch::GNNAK: return 3;
    case Arch::DSSGNN: return 2;
    case Arch::SUN: return 6;
    case Arch::PPGN: return 3;
    default: return 1;
  }
}

inline Model build_model(const ModelConfig& cfg, Index feat_dim) {
  validate_config(cfg);
  Model m;
  m.cfg = cfg;
  m.feat_dim = feat_dim;
  Rng root = Rng(cfg.seed).fork("model/" + to_string(cfg.arch));
  const Index d = cfg.hidden;
  m.spd_embed = make_embedding(root.fork("spd_embed"), kSpdTableSize, d);
  // bias-free so all-zero node features contribute exactly nothing to H0
  m.node_encoder = make_linear(root.fork("node_encoder"), feat_dim, d);
  std::fill(m.node_encoder.bias.begin(), m.node_encoder.bias.end(), 0.0);
  for (int t = 0; t < cfg.num_layers; ++t) {
    Rng ls = root.fork("layer" + std::to_string(t));
    LayerParams lp;
    const Index nb = branch_count(cfg.arch);
    for (Index r = 0; r < nb; ++r) {
      const Index in = (cfg.arch == Arch::SSWL && r == 0) ? 3 * d : d;
      lp.mlps.push_back(make_mlp(ls.fork("branch" + std::to_string(r)), in, d, d));
    }
    Rng sc = ls.fork("score");
    lp.score_w.resize(static_cast<std::size_t>(d));
    const double lim = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < lp.score_w.size(); ++i)
      lp.score_w[i] = lim * (2.0 * static_cast<double>(sc.bits(i) >> 11) * 0x1.0p-53 - 1.0);
    m.layers.push_back(std::move(lp));
  }
  m.head = make_linear(root.fork("head"), d, 1);
  return m;
}

// ---------------------------------------------------------------------------
// Normalization context: where the per-feature statistics are segmented.
// ---------------------------------------------------------------------------
struct SparseCtx {
  const SparseBatch* batch;
  NormMode norm;

  Index ngroups() const { return norm == NormMode::per_graph ? batch->num_graphs() : 1; }
  std::vector<Index> groups(const SparseTensor<double>& t) const {
    std::vector<Index> g(static_cast<std::size_t>(t.nnz()), 0);
    if (norm == NormMode::per_graph)
      for (Index e = 0; e < t.nnz(); ++e)
        g[static_cast<std::size_t>(e)] =
            batch->graph_ids[static_cast<std::size_t>(t.index(e, 0))];
    return g;
  }
  const std::uint8_t* valid(const SparseTensor<double>&) const { return nullptr; }
};

struct DenseCtx {
  const DenseBatch* batch;
  NormMode norm;

  Index ngroups() const { return norm == NormMode::per_graph ? batch->num_graphs() : 1; }
  std::vector<Index> groups(const MaskedTensor<double>& t) const {
    std::vector<Index> g(static_cast<std::size_t>(t.positions()), 0);
    if (norm == NormMode::per_graph) {
      const Index per = t.positions() / batch->num_graphs();
      for (Index p = 0; p < t.positions(); ++p) g[static_cast<std::size_t>(p)] = p / per;
    }
    return g;
  }
  const std::uint8_t* valid(const MaskedTensor<double>& t) const { return t.mask().data(); }
};

namespace detail {

template <typename Ctx, typename TT>
TT apply_mlp(const Ctx& ctx, const Mlp& mlp, const TT& t) {
  const std::vector<Index> groups = ctx.groups(t);
  const std::uint8_t* valid = ctx.valid(t);
  const Index ng = ctx.ngroups();
  BlockFn<double> fn = [&](const RowMatrix<double>& x) {
    return mlp.apply(x, groups, ng, valid);
  };
  return tuplewise_apply(t, fn);
}

inline Index order_of(const SparseTensor<double>& t) { return t.sparse_dim(); }
inline Index order_of(const MaskedTensor<double>& t) { return t.masked_rank() - 1; }

// Feature concatenation on a shared support. Sparse parts whose support
// shrank (max/min message passing) are zero-filled back onto the base.
inline SparseTensor<double> concat_features(const SparseTensor<double>& base,
                                            const std::vector<const SparseTensor<double>*>& parts) {
  Index w = 0;
  for (auto* p : parts) w += p->width();
  RowMatrix<double> vals(base.nnz(), w);
  Index col = 0;
  for (auto* p : parts) {
    SparseTensor<double> aligned =
        p->same_support(base) ? *p : align_to_support(*p, base);
    for (Index e = 0; e < base.nnz(); ++e) {
      auto r = aligned.value_row(e);
      std::copy(r.begin(), r.end(), vals.row(e).begin() + col);
    }
    col += p->width();
  }
  return SparseTensor<double>(base.sparse_shape(), {w}, std::vector<Index>(base.indices()),
                              std::move(vals));
}

inline MaskedTensor<double> concat_features(const MaskedTensor<double>& base,
                                            const std::vector<const MaskedTensor<double>*>& parts) {
  Index w = 0;
  for (auto* p : parts) w += p->width();
  const Index rows = base.positions();
  std::vector<double> data(static_cast<std::size_t>(rows * w), 0.0);
  Index col = 0;
  for (auto* p : parts) {
    const Index pw = p->width();
    for (Index r = 0; r < rows; ++r) {
      auto src = p->row(r);
      std::copy(src.begin(), src.end(), data.begin() + static_cast<std::size_t>(r * w + col));
    }
    col += pw;
  }
  return MaskedTensor<double>(base.masked_shape(), {w}, std::move(data),
                              std::vector<std::uint8_t>(base.mask()));
}

template <typename Ctx, typename TT, typename AT>
TT layer_forward_impl(const Model& m, const Ctx& ctx, Index t, const TT& H, const AT& A) {
  const LayerParams& lp = m.layers[static_cast<std::size_t>(t)];
  const Aggregator agg = m.cfg.aggregator;
  const Index last = order_of(H) - 1;

  switch (m.cfg.arch) {
    case Arch::NGNN:
    case Arch::DRFWL:
    case Arch::I2GNN: {
      TT msg = message_passing(H, A, last, agg);
      return add(H, apply_mlp(ctx, lp.mlps[0], msg));
    }
    case Arch::GNNAK: {
      TT b0 = apply_mlp(ctx, lp.mlps[0], message_passing(H, A, 1, agg));
      TT b1 = apply_mlp(ctx, lp.mlps[1], unpooling(pooling(H, 0, agg), 0, H));
      TT b2 = apply_mlp(ctx, lp.mlps[2], unpooling(pooling(H, 1, agg), 1, H));
      return add(add(add(H, b0), b1), b2);
    }
    case Arch::DSSGNN: {
      TT b0 = apply_mlp(ctx, lp.mlps[0], message_passing(H, A, 1, agg));
      TT pooled = pooling(H, 1, agg);
      TT across = message_passing(pooled, A, 0, agg);
      TT b1 = apply_mlp(ctx, lp.mlps[1], unpooling(across, 1, H));
      return add(add(H, b0), b1);
    }
    case Arch::SUN: {
      TT b0 = apply_mlp(ctx, lp.mlps[0], message_passing(H, A, 1, agg));
      TT b1 = apply_mlp(ctx, lp.mlps[1], unpooling(diagonal(H), 0, H));
      TT b2 = apply_mlp(ctx, lp.mlps[2], unpooling(diagonal(H), 1, H));
      TT b3 = apply_mlp(ctx, lp.mlps[3], unpooling(pooling(H, 0, agg), 0, H));
      TT b4 = apply_mlp(ctx, lp.mlps[4], unpooling(pooling(H, 1, agg), 1, H));
      TT b5 = apply_mlp(ctx, lp.mlps[5],
                        unpooling(message_passing(pooling(H, 0, agg), A, 0, agg), 0, H));
      return add(add(add(add(add(add(H, b0), b1), b2), b3), b4), b5);
    }
    case Arch::SSWL: {
      TT m1 = message_passing(H, A, 1, agg);
      TT m0 = message_passing(H, A, 0, agg);
      TT cat = concat_features(H, {&H, &m1, &m0});
      return add(H, apply_mlp(ctx, lp.mlps[0], cat));
    }
    case Arch::PPGN: {
      TT b1 = apply_mlp(ctx, lp.mlps[0], H);
      TT b2 = apply_mlp(ctx, lp.mlps[1], H);
      TT prod = tuple_contract(b1, b2, H, agg);
      return add(H, apply_mlp(ctx, lp.mlps[2], prod));
    }
    case Arch::NGAT: {
      const std::vector<double>& w = lp.score_w;
      ScoreFn<double> score = [&w](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        const std::size_t n = std::min(a.size(), w.size());
        for (std::size_t c = 0; c < n; ++c) s += w[c] * a[c];
        return b.empty() ? s : s * b[0];
      };
      TT msg = message_passing(H, A, 1, Aggregator::softmax_weighted,
                               PatternPolicy::input_pattern, score);
      return add(H, apply_mlp(ctx, lp.mlps[0], msg));
    }
  }
  throw UnsupportedError("unhandled architecture");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// H0: embedded tuple annotation plus the embedded node features of every
// index position, on the tuple-feature support.
// ---------------------------------------------------------------------------
inline SparseTensor<double> init_embedding(const Model& m, const SparseBatch& batch) {
  const auto& X = batch.tuple_feature;
  if (X.width() != 1) throw ShapeError("tuple annotations must be scalar");
  RowMatrix<double> xe = m.node_encoder.apply(batch.node_feat);
  const Index d = m.cfg.hidden;
  const Index sdim = X.sparse_dim();
  RowMatrix<double> vals(X.nnz(), d);
  for (Index e = 0; e < X.nnz(); ++e) {
    const std::int64_t ann = X.values()(e, 0);
    if (ann < 0 || ann >= kSpdTableSize)
      throw BoundsError("tuple annotation " + std::to_string(ann) + " exceeds embedding table");
    auto dst = vals.row(e);
    auto er = m.spd_embed.row(static_cast<Index>(ann));
    std::copy(er.begin(), er.end(), dst.begin());
    for (Index dim = 0; dim < sdim; ++dim) {
      auto nr = xe.row(X.index(e, dim));
      for (Index c = 0; c < d; ++c) dst[c] += nr[c];
    }
  }
  return SparseTensor<double>(X.sparse_shape(), {d}, std::vector<Index>(X.indices()),
                              std::move(vals));
}

inline MaskedTensor<double> init_embedding(const Model& m, const DenseBatch& batch) {
  const auto& X = batch.tuple_feature;
  if (X.width() != 1) throw ShapeError("tuple annotations must be scalar");
  const Index B = batch.num_graphs();
  const Index nmax = batch.max_nodes();
  const Index d = m.cfg.hidden;
  RowMatrix<double> nf(batch.node_feat.positions(), batch.node_feat.width(),
                       batch.node_feat.data());
  RowMatrix<double> xe = m.node_encoder.apply(nf);
  for (Index p = 0; p < batch.node_feat.positions(); ++p)
    if (!batch.node_feat.mask_at(p))
      for (auto& v : xe.row(p)) v = 0.0;

  typename MaskedTensor<double>::Builder out({B, nmax, nmax}, {d});
  for (Index b = 0; b < B; ++b) {
    for (Index i = 0; i < nmax; ++i) {
      for (Index j = 0; j < nmax; ++j) {
        const Index flat = (b * nmax + i) * nmax + j;
        if (!X.mask_at(flat)) continue;
        const auto ann = static_cast<std::int64_t>(std::llround(X.data()[static_cast<std::size_t>(flat)]));
        if (ann < 0 || ann >= kSpdTableSize)
          throw BoundsError("tuple annotation " + std::to_string(ann) + " exceeds embedding table");
        out.mask[static_cast<std::size_t>(flat)] = 1;
        auto dst = out.row(flat);
        auto er = m.spd_embed.row(static_cast<Index>(ann));
        auto xi = xe.row(b * nmax + i);
        auto xj = xe.row(b * nmax + j);
        for (Index c = 0; c < d; ++c) dst[c] = er[c] + xi[c] + xj[c];
      }
    }
  }
  return out.finish();
}

// ---------------------------------------------------------------------------
// Readout: pool within subgraphs, then across subgraphs segmented per graph.
// ---------------------------------------------------------------------------
inline RowMatrix<double> readout(const SparseTensor<double>& H, const SparseBatch& batch,
                                 Aggregator within, Aggregator across) {
  if (within == Aggregator::softmax_weighted || across == Aggregator::softmax_weighted)
    throw UnsupportedError("readout takes sum/mean/max/min");
  SparseTensor<double> h = H;
  while (h.sparse_dim() > 1) h = pooling(h, h.sparse_dim() - 1, within);
  const Index B = batch.num_graphs();
  const Index d = h.width();
  RowMatrix<double> out(B, d);
  std::vector<Index> cnt(static_cast<std::size_t>(B), 0);
  for (Index e = 0; e < h.nnz(); ++e) {
    const Index g = batch.graph_ids[static_cast<std::size_t>(h.index(e, 0))];
    auto r = h.value_row(e);
    auto o = out.row(g);
    if (cnt[static_cast<std::size_t>(g)] == 0) {
      std::copy(r.begin(), r.end(), o.begin());
    } else {
      switch (across) {
        case Aggregator::sum:
        case Aggregator::mean:
          for (Index c = 0; c < d; ++c) o[c] += r[c];
          break;
        case Aggregator::max:
          for (Index c = 0; c < d; ++c) o[c] = std::max(o[c], r[c]);
          break;
        case Aggregator::min:
          for (Index c = 0; c < d; ++c) o[c] = std::min(o[c], r[c]);
          break;
        default:
          break;
      }
    }
    ++cnt[static_cast<std::size_t>(g)];
  }
  if (across == Aggregator::mean)
    for (Index g = 0; g < B; ++g)
      if (cnt[static_cast<std::size_t>(g)] > 0)
        for (auto& v : out.row(g)) v /= static_cast<double>(cnt[static_cast<std::size_t>(g)]);
  return out;
}

inline RowMatrix<double> readout(const MaskedTensor<double>& H, const DenseBatch& batch,
                                 Aggregator within, Aggregator across) {
  if (within == Aggregator::softmax_weighted || across == Aggregator::softmax_weighted)
    throw UnsupportedError("readout takes sum/mean/max/min");
  MaskedTensor<double> h = H;
  while (h.masked_rank() > 2) h = pooling(h, h.masked_rank() - 2, within);
  h = pooling(h, 0, across);  // graph axis survives as the batch dim
  const Index B = batch.num_graphs();
  return RowMatrix<double>(B, h.width(), h.data());
}

// ---------------------------------------------------------------------------
// Full forward pass
// ---------------------------------------------------------------------------
inline SparseTensor<double> layer_forward(const Model& m, const SparseBatch& batch, Index t,
                                          const SparseTensor<double>& H) {
  SparseCtx ctx{&batch, m.cfg.norm};
  return detail::layer_forward_impl(m, ctx, t, H, batch.adjacency);
}

inline MaskedTensor<double> layer_forward(const Model& m, const DenseBatch& batch, Index t,
                                          const MaskedTensor<double>& H) {
  DenseCtx ctx{&batch, m.cfg.norm};
  return detail::layer_forward_impl(m, ctx, t, H, batch.adjacency);
}

inline std::vector<double> head_apply(const Model& m, const RowMatrix<double>& hg) {
  RowMatrix<double> y = m.head.apply(hg);
  return y.v;
}

inline std::vector<double> forward(const Model& m, const SparseBatch& batch) {
  if (m.cfg.representation != Rep::sparse)
    throw UnsupportedError("model configured for the dense route");
  if (batch.tuple_feature.sparse_dim() != tuple_order(m.cfg.arch))
    throw ShapeError(to_string(m.cfg.arch) + " expects order-" +
                     std::to_string(tuple_order(m.cfg.arch)) + " tuples");
  SparseTensor<double> H = init_embedding(m, batch);
  for (Index t = 0; t < m.cfg.num_layers; ++t) H = layer_forward(m, batch, t, H);
  return head_apply(m, readout(H, batch, Aggregator::mean, Aggregator::mean));
}

inline std::vector<double> forward(const Model& m, const DenseBatch& batch) {
  if (m.cfg.representation != Rep::dense)
    throw UnsupportedError("model configured for the sparse route");
  if (tuple_order(m.cfg.arch) != 2)
    throw UnsupportedError("dense route covers order-2 tuples only");
  MaskedTensor<double> H = init_embedding(m, batch);
  for (Index t = 0; t < m.cfg.num_layers; ++t) H = layer_forward(m, batch, t, H);
  return head_apply(m, readout(H, batch, Aggregator::mean, Aggregator::mean));
}

inline std::vector<double> forward(const ModelConfig& cfg, const SparseBatch& batch) {
  return forward(build_model(cfg, batch.node_feat.cols), batch);
}

inline std::vector<double> forward(const ModelConfig& cfg, const DenseBatch& batch) {
  return forward(build_model(cfg, batch.node_feat.width()), batch);
}

}  // namespace hot
