// Copyright 2026 The MIDA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mida/data_io.hpp"
#include "oracles.hpp"

using namespace mida;
namespace fs = std::filesystem;

namespace {

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("mida_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& body) const {
    std::ofstream(path / name) << body;
    return path / name;
  }
};

KeywordVocabulary ArmSoreFever() { return KeywordVocabulary({"arm", "sore", "fever"}); }

solver::Model SampleModel(std::size_t k, std::uint64_t seed) {
  solver::Model m;
  m.vocabulary = oracle::vocabulary(k);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 3.0);
  m.beta = Coefficients::zeros(k);
  for (Eigen::Index j = 0; j < m.beta.size(); ++j) m.beta.beta(j) = g(rng) / 7.0;
  m.beta.beta(1) = 0.1;
  m.beta.beta(2) = 1.0 / 3.0;
  m.hyper.lambda2 = 0.25;
  m.hyper.seed = 99;
  m.summary = {12, true, 1e-7, 2e-8, 20.0, 130.25};
  return m;
}

bool BitEqual(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("load_reports") {
  TempDir dir;
  const KeywordVocabulary vocab({"arm", "fever"});
  SUBCASE("small file") {
    const ReportSet r = io::load_reports(dir.write("r.csv", "report_id,arm,fever\na,1,0\nb,0,2\n"), vocab);
    REQUIRE(r.size() == 2);
    CHECK(r.counts(0, 0) == 1);
    CHECK(r.counts(0, 1) == 0);
    CHECK(r.counts(1, 0) == 0);
    CHECK(r.counts(1, 1) == 2);
  }
  SUBCASE("bad cell names its row and column") {
    const fs::path p = dir.write("r.csv", "report_id,arm,fever\na,1,0\nb,0,x\n");
    try {
      io::load_reports(p, vocab);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
      CHECK(e.column() == "fever");
      CHECK(e.file() == p.string());
    }
  }
  SUBCASE("negative and missing cells") {
    CHECK_THROWS_AS(io::load_reports(dir.write("n.csv", "report_id,arm,fever\na,-1,0\n"), vocab),
                    ParseError);
    CHECK_THROWS_AS(io::load_reports(dir.write("m.csv", "report_id,arm,fever\na,1\n"), vocab),
                    ParseError);
    CHECK_THROWS_AS(io::load_reports(dir.write("h.csv", "report_id,fever,arm\na,1,0\n"), vocab),
                    ParseError);
  }
  SUBCASE("2,500 reports") {
    std::mt19937_64 rng(4);
    ReportSet big;
    big.counts = oracle::random_counts(rng, 2500, 2, 0.5);
    std::ostringstream os;
    io::write_reports_csv(os, vocab, big);
    const ReportSet back = io::load_reports(dir.write("big.csv", os.str()), vocab);
    CHECK(back.size() == 2500);
    CHECK(back.counts == big.counts);
  }
}

TEST_CASE("load_bags") {
  TempDir dir;
  const std::string tweets = "user_id,tweet_id,arm,fever\nu1,t1,1,0\nu2,t2,0,0\nu1,t3,0,3\n";
  SUBCASE("grouping keeps file order") {
    const io::LoadedBags lb = io::load_bags(dir.write("t.csv", tweets),
                                            dir.write("l.csv", "user_id,label\nu2,0\nu1,1\n"));
    REQUIRE(lb.bags.size() == 2);
    CHECK(lb.bags[0].user_id == "u1");
    CHECK(lb.bags[0].size() == 2);
    CHECK(lb.bags[0].label == 1);
    CHECK(lb.bags[0].counts(1, 1) == 3);
    CHECK(lb.bags[1].size() == 1);
    CHECK(lb.bags[1].label == 0);
    CHECK(lb.vocabulary.size() == 2);
  }
  SUBCASE("contract violations list the offenders") {
    const fs::path t = dir.write("t.csv", tweets);
    auto message = [&](const std::string& labels) {
      try {
        io::load_bags(t, dir.write("l.csv", labels));
      } catch (const ValidationError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("user_id,label\nu1,1\n").find("u2") != std::string::npos);
    CHECK(message("user_id,label\nu1,1\nu2,0\nu9,1\n").find("u9") != std::string::npos);
    CHECK(message("user_id,label\nu1,1\nu2,0\nu2,0\n").find("duplicate") != std::string::npos);
    CHECK_THROWS_AS(io::load_bags(t, dir.write("l.csv", "user_id,label\nu1,2\nu2,0\n")),
                    ParseError);
  }
  SUBCASE("566 positive and 1,006 negative users") {
    std::vector<UserBag> bags;
    std::mt19937_64 rng(5);
    for (int u = 0; u < 1572; ++u) {
      bags.push_back(UserBag{"user" + std::to_string(u), oracle::random_counts(rng, 1 + u % 3, 4, 0.7),
                             u < 566 ? 1 : 0});
    }
    const KeywordVocabulary vocab = oracle::vocabulary(4);
    std::ostringstream t, l;
    io::write_tweets_csv(t, vocab, bags);
    io::write_labels_csv(l, bags);
    const io::LoadedBags lb = io::load_bags(dir.write("t.csv", t.str()), dir.write("l.csv", l.str()));
    REQUIRE(lb.bags.size() == 1572);
    int pos = 0;
    for (std::size_t u = 0; u < lb.bags.size(); ++u) {
      pos += lb.bags[u].label;
      CHECK(lb.bags[u].counts == bags[u].counts);
    }
    CHECK(pos == 566);
  }
  SUBCASE("reloading is deterministic") {
    const fs::path t = dir.write("t.csv", tweets);
    const fs::path l = dir.write("l.csv", "user_id,label\nu1,1\nu2,0\n");
    const io::LoadedBags a = io::load_bags(t, l);
    const io::LoadedBags b = io::load_bags(t, l);
    for (std::size_t u = 0; u < a.bags.size(); ++u) {
      CHECK(a.bags[u].user_id == b.bags[u].user_id);
      CHECK(a.bags[u].counts == b.bags[u].counts);
    }
  }
}

TEST_CASE("load_dataset checks the report header against the tweet vocabulary") {
  TempDir dir;
  const fs::path t = dir.write("t.csv", "user_id,tweet_id,arm,fever\nu1,t1,1,0\nu2,t2,0,0\n");
  const fs::path l = dir.write("l.csv", "user_id,label\nu1,1\nu2,0\n");
  const Dataset d = io::load_dataset(dir.write("r.csv", "report_id,arm,fever\nr0,2,1\n"), t, l);
  CHECK(d.reports.size() == 1);
  CHECK(d.bags.size() == 2);
  CHECK_THROWS_AS(io::load_dataset(dir.write("r2.csv", "report_id,arm,cough\nr0,2,1\n"), t, l),
                  ParseError);
}

TEST_CASE("vectorize_text") {
  const KeywordVocabulary vocab = ArmSoreFever();
  CHECK(io::vectorize_text("Sore arm, sore!", vocab) == std::vector<std::int32_t>{1, 2, 0});
  CHECK(io::vectorize_text("", vocab) == std::vector<std::int32_t>{0, 0, 0});
  CHECK(io::vectorize_text("ARM arm Arm", vocab) == std::vector<std::int32_t>{3, 0, 0});
  CHECK(io::vectorize_text("forearm arms fever-fever", vocab) == std::vector<std::int32_t>{0, 0, 2});
}

TEST_CASE("prune_bag") {
  auto bag = [](std::initializer_list<std::initializer_list<int>> rows) {
    UserBag b{"u", CountMatrix(static_cast<Eigen::Index>(rows.size()), 2), 1};
    Eigen::Index i = 0;
    for (const auto& r : rows) {
      Eigen::Index j = 0;
      for (int v : r) b.counts(i, j++) = v;
      ++i;
    }
    return b;
  };
  const UserBag mixed = io::prune_bag(bag({{0, 0}, {1, 0}}));
  REQUIRE(mixed.size() == 1);
  CHECK(mixed.counts(0, 0) == 1);
  CHECK(mixed.label == 1);

  const UserBag zeros = io::prune_bag(bag({{0, 0}}));
  REQUIRE(zeros.size() == 1);
  CHECK(zeros.counts.isZero());

  const UserBag full = bag({{2, 0}, {0, 1}, {3, 3}});
  CHECK(io::prune_bag(full).counts == full.counts);
}

TEST_CASE("model files") {
  TempDir dir;
  SUBCASE("round trip is bit exact") {
    for (std::size_t k : {std::size_t{3}, std::size_t{234}}) {
      const solver::Model m = SampleModel(k, k);
      const fs::path p = dir.path / "m.json";
      io::save_model(m, p);
      const solver::Model back = io::load_model(p);
      CHECK(BitEqual(back.beta.beta, m.beta.beta));
      CHECK(back.vocabulary.keywords() == m.vocabulary.keywords());
      CHECK(back.hyper.lambda2 == m.hyper.lambda2);
      CHECK(back.hyper.seed == m.hyper.seed);
      CHECK(back.summary.iterations == 12);
      CHECK(back.summary.objective == 130.25);
      CHECK(io::model_to_json(back) == io::model_to_json(m));
    }
  }
  SUBCASE("corruption is a format error") {
    const std::string text = io::model_to_json(SampleModel(5, 1));
    CHECK_THROWS_AS(io::model_from_json(text.substr(0, text.size() / 2)), FormatError);

    std::string bumped = text;
    const auto v = bumped.find("\"version\": 1");
    REQUIRE(v != std::string::npos);
    bumped.replace(v, 12, "\"version\": 2");
    CHECK_THROWS_AS(io::model_from_json(bumped), FormatError);

    std::string tampered = text;
    const auto o = tampered.find("130.25");
    REQUIRE(o != std::string::npos);
    tampered.replace(o, 6, "131.25");
    CHECK_THROWS_AS(io::model_from_json(tampered), FormatError);

    CHECK_THROWS_AS(io::load_model(dir.path / "absent.json"), ValidationError);
  }
}
