// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <hot/graph.hpp>

namespace {

namespace fs = std::filesystem;

struct CliEnv {
  fs::path dir;
  CliEnv() {
    dir = fs::temp_directory_path() / ("hot_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~CliEnv() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

CliEnv env;

int run(const std::string& args, std::string* output = nullptr) {
  const std::string log = env.path("last_output.txt");
  const std::string cmd = std::string(HOT_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    output->assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, GenWritesOnePathGraph) {
  auto out = env.path("p3.jsonl");
  ASSERT_EQ(run("gen --kind path --num 1 --nodes 3 --seed 0 --out " + out), 0);
  auto graphs = hot::load_graphs(out);
  ASSERT_EQ(graphs.size(), 1u);
  EXPECT_EQ(graphs[0].n, 3);
  EXPECT_EQ(graphs[0].edges, (std::vector<std::pair<hot::Index, hot::Index>>{{0, 1}, {1, 2}}));
}

TEST(Cli, UnknownFlagExitsTwoWithUsage) {
  std::string output;
  EXPECT_EQ(run("gen --nope 1", &output), 2);
  EXPECT_NE(output.find("Usage"), std::string::npos);
}

TEST(Cli, PipelinePreprocessVerifyForwardBench) {
  auto graphs = env.path("er.jsonl");
  auto cache = env.path("er.cache");
  ASSERT_EQ(run("gen --kind er --num 12 --nodes 6-10 --density 0.35 --seed 3 --out " + graphs), 0);
  ASSERT_EQ(run("preprocess --in " + graphs + " --sampler khop:2 --workers 3 --cache " + cache),
            0);

  std::string verify_out;
  EXPECT_EQ(run("verify --cache " + cache + " --max-n 12", &verify_out), 0) << verify_out;
  EXPECT_NE(verify_out.find("dense-equivalence"), std::string::npos);
  EXPECT_NE(verify_out.find("PASS"), std::string::npos);
  EXPECT_EQ(verify_out.find("FAIL"), std::string::npos) << verify_out;

  auto config = env.path("model.cfg");
  {
    std::ofstream cf(config);
    cf << "arch=NGNN\nlayers=2\nhidden=8\naggregator=sum\nrepresentation=sparse\nseed=11\n";
  }
  auto csv1 = env.path("pred1.csv");
  auto csv2 = env.path("pred2.csv");
  ASSERT_EQ(run("forward --cache " + cache + " --config " + config + " --batch-size 4 --out " +
                csv1),
            0);
  ASSERT_EQ(run("forward --cache " + cache + " --config " + config + " --batch-size 4 --out " +
                csv2),
            0);
  const std::string a = slurp(csv1), b = slurp(csv2);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);  // byte-identical
  EXPECT_EQ(a.rfind("graph,prediction\n", 0), 0u);

  auto bench_csv = env.path("bench.csv");
  ASSERT_EQ(run("bench --cache " + cache + " --archs NGNN,SSWL --reps both --hidden 8 --layers 1"
                " --out " + bench_csv),
            0);
  const std::string bench = slurp(bench_csv);
  EXPECT_EQ(bench.rfind("arch,representation,n,density,time_ms,peak_bytes,checksum\n", 0), 0u);
  // rows sorted by (arch, representation, n): NGNN before SSWL, dense before sparse
  auto ngnn_dense = bench.find("NGNN,dense");
  auto ngnn_sparse = bench.find("NGNN,sparse");
  auto sswl_dense = bench.find("SSWL,dense");
  ASSERT_NE(ngnn_dense, std::string::npos);
  ASSERT_NE(ngnn_sparse, std::string::npos);
  ASSERT_NE(sswl_dense, std::string::npos);
  EXPECT_LT(ngnn_dense, ngnn_sparse);
  EXPECT_LT(ngnn_sparse, sswl_dense);
}

TEST(Cli, GenIsIdempotentForFixedSeeds) {
  auto a = env.path("gen_a.jsonl");
  auto b = env.path("gen_b.jsonl");
  const std::string args = "gen --kind zinc-like --num 5 --seed 12 --out ";
  ASSERT_EQ(run(args + a), 0);
  ASSERT_EQ(run(args + b), 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, CacheDirEnvRedirectsRelativePaths) {
  auto graphs = env.path("tiny.jsonl");
  ASSERT_EQ(run("gen --kind path --num 2 --nodes 4 --seed 1 --out " + graphs), 0);
  ::setenv("HOT_CACHE_DIR", env.dir.c_str(), 1);
  ASSERT_EQ(run("preprocess --in " + graphs + " --sampler khop:1 --workers 1 --cache rel.cache"),
            0);
  ::unsetenv("HOT_CACHE_DIR");
  EXPECT_TRUE(fs::exists(env.dir / "rel.cache"));
}

TEST(Cli, ForwardWithMissingConfigFails) {
  std::string output;
  EXPECT_EQ(run("forward --cache /does/not/exist --config /nope --batch-size 1 --out x.csv",
                &output),
            1);
}
