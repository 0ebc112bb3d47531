// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("ht_cli_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
    ASSERT_EQ(cli("demo " + demo()).code, 0);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string demo() const { return (root_ / "in").string(); }
  std::string state() const { return (root_ / "st").string(); }
  std::string files(const std::string& name) const {
    return demo() + "/" + name + ".model.json " + demo() + "/" + name + ".data.unnd " + demo() + "/" + name +
           ".hyper.json";
  }

  Outcome cli(const std::string& args) const {
    const std::string cmd = std::string(HT_CLI_PATH) + " --state " + state() + " " + args + " 2>&1";
    Outcome o;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (p == nullptr) return o;
    std::array<char, 512> buf;
    while (std::fgets(buf.data(), buf.size(), p) != nullptr) o.out += buf.data();
    const int status = ::pclose(p);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
  }

  fs::path root_;
};

TEST_F(CliTest, HappyPath) {
  for (const char* n : {"mlp2", "mlp3", "tiny_cnn"}) EXPECT_EQ(cli(std::string("submit ") + files(n)).code, 0);
  Outcome st = cli("status");
  EXPECT_EQ(st.code, 0);
  EXPECT_NE(st.out.find("job3  priority=3  queued 0/5"), std::string::npos) << st.out;
  const Outcome run = cli("run --policy sjf --sjf-metric size");
  EXPECT_EQ(run.code, 0) << run.out;
  EXPECT_NE(run.out.find("wrote"), std::string::npos);
  st = cli("status");
  EXPECT_NE(st.out.find("job2  priority=2  complete 4/4"), std::string::npos) << st.out;
  const Outcome mem = cli("report --memory");
  EXPECT_EQ(mem.code, 0);
  EXPECT_NE(mem.out.find("reduction"), std::string::npos) << mem.out;
  EXPECT_EQ(cli("report --training").code, 0);
  for (const char* id : {"job1", "job2", "job3"}) {
    EXPECT_TRUE(fs::exists(root_ / "st" / "outputs" / (std::string(id) + ".unnd")));
  }
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("run --policy lottery").code, 2);
  EXPECT_EQ(cli("report").code, 2);
  EXPECT_EQ(cli("run").code, 7);

  std::ofstream(root_ / "broken.json") << "{not json";
  EXPECT_EQ(cli("submit " + demo() + "/mlp2.model.json " + demo() + "/mlp2.data.unnd " +
                (root_ / "broken.json").string())
                .code,
            3);
  std::ofstream(root_ / "zero.json") << R"({"epochs": 0, "batch_size": 4, "learning_rate": 0.1, "optimizer": "sgd"})";
  EXPECT_EQ(cli("submit " + demo() + "/mlp2.model.json " + demo() + "/mlp2.data.unnd " +
                (root_ / "zero.json").string())
                .code,
            4);
  ASSERT_EQ(cli("submit " + files("mlp2")).code, 0);
  const Outcome adm = cli("run --capacity 100");
  EXPECT_EQ(adm.code, 5) << adm.out;
  EXPECT_EQ(cli("pause job9").code, 4);

  for (const auto& f : fs::directory_iterator(root_ / "st" / "datasets")) fs::remove(f.path());
  const Outcome tr = cli("run");
  EXPECT_EQ(tr.code, 6) << tr.out;
  EXPECT_NE(tr.out.find("job1"), std::string::npos);
}

TEST_F(CliTest, PauseResume) {
  for (const char* n : {"mlp2", "mlp3"}) ASSERT_EQ(cli(std::string("submit ") + files(n)).code, 0);
  EXPECT_EQ(cli("pause job2 --after-epochs 2").code, 0);
  EXPECT_EQ(cli("pause job2 --after-epochs 9").code, 4);
  ASSERT_EQ(cli("run --policy rr").code, 0);
  EXPECT_NE(cli("status").out.find("job2  priority=2  paused 2/4"), std::string::npos);
  const fs::path ckpt = root_ / "st" / "checkpoints" / "job2.ckpt";
  ASSERT_TRUE(fs::exists(ckpt));
  EXPECT_EQ(cli("resume job1 " + ckpt.string()).code, 7);
  EXPECT_EQ(cli("resume job2 " + ckpt.string()).code, 0);
  const Outcome run = cli("run --policy rr");
  EXPECT_EQ(run.code, 0) << run.out;
  EXPECT_NE(cli("status").out.find("job2  priority=2  complete 4/4"), std::string::npos);
}

}  // namespace
