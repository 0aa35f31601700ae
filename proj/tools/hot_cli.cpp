// SPDX-License-Identifier: Apache-2.0
//
// hot: dataset generation, high-order preprocessing, oracle verification,
// forward inference and sparse-vs-dense benchmarking.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <hot/hot.hpp>

namespace {

using namespace hot;

// HOT_CACHE_DIR redirects relative cache paths.
std::string resolve_cache_path(const std::string& path) {
  const char* dir = std::getenv("HOT_CACHE_DIR");
  if (!dir || *dir == '\0') return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

std::pair<Index, Index> parse_node_range(const std::string& s) {
  auto dash = s.find('-');
  if (dash == std::string::npos) {
    Index n = std::stoll(s);
    return {n, n};
  }
  return {std::stoll(s.substr(0, dash)), std::stoll(s.substr(dash + 1))};
}

int cmd_gen(const std::string& kind, int num, const std::string& nodes, std::uint64_t seed,
            double density, Index degree, const std::string& out) {
  auto [lo, hi] = parse_node_range(nodes);
  if (lo < 1 || hi < lo) throw ParseError("bad --nodes range '" + nodes + "'");
  std::vector<Graph> graphs;
  for (int i = 0; i < num; ++i) {
    Rng rng = Rng(seed).fork("gen/" + kind).fork(static_cast<std::uint64_t>(i));
    const Index n = lo + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    if (kind == "path")
      graphs.push_back(gen_path(n, rng));
    else if (kind == "er")
      graphs.push_back(gen_er(n, density, rng));
    else if (kind == "regular")
      graphs.push_back(gen_regular(n, degree, rng));
    else if (kind == "zinc-like")
      graphs.push_back(gen_zinc_like(rng));
    else
      throw ParseError("unknown --kind '" + kind + "'");
  }
  save_graphs(graphs, out);
  std::printf("wrote %zu graphs to %s\n", graphs.size(), out.c_str());
  return 0;
}

int cmd_preprocess(const std::string& in, const std::string& sampler_desc, int workers,
                   const std::string& cache) {
  LoadStats stats;
  std::vector<Graph> graphs = load_graphs(in, &stats);
  if (stats.self_loops_dropped > 0)
    std::fprintf(stderr, "[hot] dropped %lld self-loops\n",
                 static_cast<long long>(stats.self_loops_dropped));
  std::string tag;
  TupleSampler sampler = make_sampler(sampler_desc, &tag);
  const std::string path = resolve_cache_path(cache);
  auto items = preprocess_parallel(graphs, sampler, workers, path, tag);
  Index nnz = 0;
  for (const auto& it : items) nnz += it.tuple_feature.nnz();
  std::printf("preprocessed %zu graphs (%lld tuples) -> %s\n", items.size(),
              static_cast<long long>(nnz), path.c_str());
  return 0;
}

int cmd_verify(const std::string& cache, const std::string& arch, Index max_n) {
  auto items = load_cache(resolve_cache_path(cache));
  std::vector<Graph> graphs;
  std::vector<PreprocessedGraph> small;
  for (const auto& it : items) {
    if (it.graph.n <= max_n) {
      graphs.push_back(it.graph);
      small.push_back(it);
    }
  }
  if (small.empty()) {
    std::fprintf(stderr, "no cached graphs with n <= %lld\n", static_cast<long long>(max_n));
    return 1;
  }
  const Index order = small[0].tuple_feature.sparse_dim();
  std::vector<Arch> archs;
  if (!arch.empty()) {
    archs.push_back(arch_from_string(arch));
  } else {
    for (Arch a : all_archs())
      if (tuple_order(a) == order) archs.push_back(a);
  }

  std::vector<SuiteResult> results;
  results.push_back(verify_kernels(60, std::min<Index>(max_n, 20), 17));
  results.push_back(verify_message_loop(graphs, 2, 23));
  results.push_back(verify_sampler(graphs, {1, 2, 3}));
  results.push_back(verify_batching(small, archs, 10, 6, 29, 1e-5));
  results.push_back(
      verify_permutation(graphs, archs, make_sampler(order == 3 ? "i2:2" : "khop:2"), 8, 31, 1e-5));
  bool ok = true;
  for (const auto& r : results) {
    print_suite(r);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int cmd_forward(const std::string& cache, const std::string& config_path, int batch_size,
                const std::string& out) {
  auto items = load_cache(resolve_cache_path(cache));
  std::ifstream cf(config_path);
  if (!cf) throw IoError("cannot open config " + config_path);
  std::string text((std::istreambuf_iterator<char>(cf)), std::istreambuf_iterator<char>());
  ModelConfig cfg = parse_model_config(text);
  validate_config(cfg);
  if (batch_size < 1) batch_size = 1;

  std::vector<double> preds;
  for (std::size_t start = 0; start < items.size();
       start += static_cast<std::size_t>(batch_size)) {
    std::vector<PreprocessedGraph> chunk(
        items.begin() + static_cast<std::ptrdiff_t>(start),
        items.begin() + static_cast<std::ptrdiff_t>(
                            std::min(items.size(), start + static_cast<std::size_t>(batch_size))));
    std::vector<double> p;
    if (cfg.representation == Rep::sparse)
      p = forward(cfg, collate_sparse(chunk));
    else
      p = forward(cfg, collate_dense(chunk));
    preds.insert(preds.end(), p.begin(), p.end());
  }

  std::ofstream os(out);
  if (!os) throw IoError("cannot write " + out);
  os << "graph,prediction\n";
  char buf[64];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6g\n", i, preds[i]);
    os << buf;
  }
  std::printf("wrote %zu predictions to %s\n", preds.size(), out.c_str());
  return 0;
}

int cmd_bench(const std::string& cache, const std::string& archs_csv, const std::string& reps,
              int hidden, int layers, std::uint64_t seed, const std::string& out) {
  auto items = load_cache(resolve_cache_path(cache));
  std::vector<Arch> archs;
  std::string tok;
  std::istringstream is(archs_csv);
  while (std::getline(is, tok, ',')) archs.push_back(arch_from_string(tok));
  const bool do_sparse = reps == "sparse" || reps == "both";
  const bool do_dense = reps == "dense" || reps == "both";
  if (!do_sparse && !do_dense) throw ParseError("--reps must be sparse, dense or both");

  ModelConfig base;
  base.hidden = hidden;
  base.num_layers = layers;
  base.seed = seed;
  BenchReport report = run_bench(items, archs, do_sparse, do_dense, base);
  std::fputs(BenchRow::csv_header(), stdout);
  std::fputc('\n', stdout);
  for (const auto& r : report.rows) std::printf("%s\n", r.csv().c_str());
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw IoError("cannot write " + out);
    os << report.to_csv();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"high-order graph tensor toolkit"};
  app.require_subcommand(1);

  std::string kind = "er", nodes = "16", out, in, cache, sampler = "khop:1";
  std::string config, archs = "NGNN", reps = "sparse", arch_filter;
  int num = 10, workers = 1, batch_size = 32, hidden = 8, layers = 1;
  Index max_n = 20, degree = 4;
  double density = 0.05;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen", "generate synthetic graphs as JSONL");
  gen->add_option("--kind", kind, "er|regular|path|zinc-like");
  gen->add_option("--num", num, "number of graphs");
  gen->add_option("--nodes", nodes, "node count or range lo-hi");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--density", density, "edge probability (er)");
  gen->add_option("--degree", degree, "degree (regular)");
  gen->add_option("--out", out, "output JSONL path")->required();

  auto* pre = app.add_subcommand("preprocess", "sample tuple features and cache them");
  pre->add_option("--in", in, "input JSONL")->required();
  pre->add_option("--sampler", sampler, "khop:H or i2:H");
  pre->add_option("--workers", workers, "worker threads");
  pre->add_option("--cache", cache, "cache file")->required();

  auto* ver = app.add_subcommand("verify", "run the oracle suites");
  ver->add_option("--cache", cache, "cache file")->required();
  ver->add_option("--arch", arch_filter, "restrict to one architecture");
  ver->add_option("--max-n", max_n, "largest graph to verify");

  auto* fwd = app.add_subcommand("forward", "run forward inference");
  fwd->add_option("--cache", cache, "cache file")->required();
  fwd->add_option("--config", config, "model config (key=value lines)")->required();
  fwd->add_option("--batch-size", batch_size, "graphs per batch");
  fwd->add_option("--out", out, "output CSV")->required();

  auto* bench = app.add_subcommand("bench", "sparse vs dense forward benchmark");
  bench->add_option("--cache", cache, "cache file")->required();
  bench->add_option("--archs", archs, "comma-separated architecture list");
  bench->add_option("--reps", reps, "sparse|dense|both");
  bench->add_option("--hidden", hidden, "hidden width");
  bench->add_option("--layers", layers, "layer count");
  bench->add_option("--seed", seed, "weight seed");
  bench->add_option("--out", out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(kind, num, nodes, seed, density, degree, out);
    if (pre->parsed()) return cmd_preprocess(in, sampler, workers, cache);
    if (ver->parsed()) return cmd_verify(cache, arch_filter, max_n);
    if (fwd->parsed()) return cmd_forward(cache, config, batch_size, out);
    if (bench->parsed()) return cmd_bench(cache, archs, reps, hidden, layers, seed, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
