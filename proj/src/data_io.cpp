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

#include "mida/data_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace mida::io {
namespace {

using nlohmann::json;

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  CsvTable t;
  t.file = path.string();
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      t.header = SplitLine(line);
      have_header = true;
    } else {
      t.rows.push_back(SplitLine(line));
    }
  }
  if (!have_header) throw ParseError(t.file, 0, "", "file has no header");
  return t;
}

std::int32_t ParseCount(const CsvTable& t, std::size_t row,
                        std::size_t col) {
  const std::string& cell = t.rows[row][col];
  std::int32_t v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw ParseError(t.file, row + 1, t.header[col],
                     "invalid integer \"" + cell + "\"");
  }
  if (v < 0) {
    throw ParseError(t.file, row + 1, t.header[col],
                     "negative count " + cell);
  }
  return v;
}

void CheckRowWidth(const CsvTable& t, std::size_t row) {
  const auto& cells = t.rows[row];
  if (cells.size() < t.header.size()) {
    throw ParseError(t.file, row + 1, t.header[cells.size()], "missing column");
  }
  if (cells.size() > t.header.size()) {
    throw ParseError(t.file, row + 1, "", "row has " + std::to_string(cells.size()) +
                                             " cells, header has " +
                                             std::to_string(t.header.size()));
  }
}

void ExpectLeading(const CsvTable& t, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (t.header.size() <= i || t.header[i] != names[i]) {
      throw ParseError(t.file, 0, names[i],
                       "expected header column " + std::to_string(i + 1) +
                           " to be \"" + names[i] + "\"");
    }
  }
}

KeywordVocabulary VocabularyFromHeader(const CsvTable& t, std::size_t skip) {
  std::vector<std::string> kws(t.header.begin() + static_cast<std::ptrdiff_t>(skip),
                               t.header.end());
  try {
    return KeywordVocabulary(std::move(kws));
  } catch (const ValidationError& e) {
    throw ParseError(t.file, 0, "", e.what());
  }
}

std::uint64_t Fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json HyperToJson(const Hyperparams& h) {
  return json{{"lambda1", h.lambda1},       {"lambda2", h.lambda2},
              {"rho0", h.rho0},             {"partitions", h.partitions},
              {"eta", h.eta},               {"max_outer", h.max_outer},
              {"max_fista", h.max_fista},   {"max_ccp", h.max_ccp},
              {"tol_abs", h.tol_abs},       {"tol_rel", h.tol_rel},
              {"adaptive_rho", h.adaptive_rho}, {"seed", h.seed}};
}

Hyperparams HyperFromJson(const json& j) {
  Hyperparams h;
  h.lambda1 = j.at("lambda1").get<double>();
  h.lambda2 = j.at("lambda2").get<double>();
  h.rho0 = j.at("rho0").get<double>();
  h.partitions = j.at("partitions").get<int>();
  h.eta = j.at("eta").get<double>();
  h.max_outer = j.at("max_outer").get<int>();
  h.max_fista = j.at("max_fista").get<int>();
  h.max_ccp = j.at("max_ccp").get<int>();
  h.tol_abs = j.at("tol_abs").get<double>();
  h.tol_rel = j.at("tol_rel").get<double>();
  h.adaptive_rho = j.at("adaptive_rho").get<bool>();
  h.seed = j.at("seed").get<std::uint64_t>();
  return h;
}

}  // namespace

ReportSet load_reports(const std::filesystem::path& path,
                       const KeywordVocabulary& vocab) {
  const CsvTable t = ReadCsv(path);
  ExpectLeading(t, {"report_id"});
  if (t.header.size() != vocab.size() + 1) {
    throw ParseError(t.file, 0, "", "header has " + std::to_string(t.header.size() - 1) +
                                        " keywords, vocabulary has " +
                                        std::to_string(vocab.size()));
  }
  for (std::size_t j = 0; j < vocab.size(); ++j) {
    if (t.header[j + 1] != vocab[j]) {
      throw ParseError(t.file, 0, t.header[j + 1],
                       "expected keyword \"" + vocab[j] + "\"");
    }
  }
  ReportSet out;
  out.counts.resize(static_cast<Eigen::Index>(t.rows.size()),
                    static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CheckRowWidth(t, i);
    for (std::size_t j = 0; j < vocab.size(); ++j) {
      out.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          ParseCount(t, i, j + 1);
    }
  }
  return out;
}

LoadedBags load_tweets(const std::filesystem::path& tweets_path) {
  const CsvTable t = ReadCsv(tweets_path);
  ExpectLeading(t, {"user_id", "tweet_id"});
  LoadedBags out;
  out.vocabulary = VocabularyFromHeader(t, 2);
  const std::size_t k = out.vocabulary.size();

  std::unordered_map<std::string, std::size_t> position;
  std::vector<std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CheckRowWidth(t, i);
    const std::string& uid = t.rows[i][0];
    if (uid.empty()) throw ParseError(t.file, i + 1, "user_id", "empty user id");
    auto [it, inserted] = position.emplace(uid, rows_of.size());
    if (inserted) {
      rows_of.emplace_back();
      out.bags.push_back(UserBag{uid, {}, 0});
    }
    rows_of[it->second].push_back(i);
  }
  for (std::size_t u = 0; u < out.bags.size(); ++u) {
    UserBag& bag = out.bags[u];
    bag.counts.resize(static_cast<Eigen::Index>(rows_of[u].size()),
                      static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < rows_of[u].size(); ++r) {
      for (std::size_t j = 0; j < k; ++j) {
        bag.counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
            ParseCount(t, rows_of[u][r], j + 2);
      }
    }
  }
  return out;
}

std::vector<std::pair<std::string, int>> load_labels(
    const std::filesystem::path& labels_path) {
  const CsvTable t = ReadCsv(labels_path);
  ExpectLeading(t, {"user_id", "label"});
  if (t.header.size() != 2) {
    throw ParseError(t.file, 0, "", "labels file must have exactly 2 columns");
  }
  std::vector<std::pair<std::string, int>> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CheckRowWidth(t, i);
    const std::string& cell = t.rows[i][1];
    if (cell != "0" && cell != "1") {
      throw ParseError(t.file, i + 1, "label", "label must be 0 or 1, got \"" + cell + "\"");
    }
    out.emplace_back(t.rows[i][0], cell == "1" ? 1 : 0);
  }
  return out;
}

LoadedBags load_bags(const std::filesystem::path& tweets_path,
                     const std::filesystem::path& labels_path) {
  LoadedBags out = load_tweets(tweets_path);
  const auto labels = load_labels(labels_path);

  std::map<std::string, int> label_of;
  std::vector<std::string> duplicates;
  for (const auto& [uid, y] : labels) {
    if (!label_of.emplace(uid, y).second) duplicates.push_back(uid);
  }
  std::vector<std::string> unlabeled;
  std::map<std::string, bool> seen;
  for (UserBag& bag : out.bags) {
    seen[bag.user_id] = true;
    auto it = label_of.find(bag.user_id);
    if (it == label_of.end()) {
      unlabeled.push_back(bag.user_id);
    } else {
      bag.label = it->second;
    }
  }
  std::vector<std::string> empty;
  for (const auto& [uid, y] : label_of) {
    if (!seen.count(uid)) empty.push_back(uid);
  }

  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size() && i < 10; ++i) s += (i ? ", " : "") + v[i];
    if (v.size() > 10) s += ", ... (" + std::to_string(v.size()) + " total)";
    return s;
  };
  std::string msg;
  if (!unlabeled.empty()) {
    msg += tweets_path.string() + ": users without a label row: " + join(unlabeled) + ". ";
  }
  if (!duplicates.empty()) {
    msg += labels_path.string() + ": duplicate label rows: " + join(duplicates) + ". ";
  }
  if (!empty.empty()) {
    msg += labels_path.string() + ": labelled users with no tweets: " + join(empty) + ". ";
  }
  if (!msg.empty()) {
    msg.pop_back();
    throw ValidationError(msg);
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& reports_path,
                     const std::filesystem::path& tweets_path,
                     const std::filesystem::path& labels_path) {
  LoadedBags lb = load_bags(tweets_path, labels_path);
  Dataset d;
  d.reports = load_reports(reports_path, lb.vocabulary);
  d.vocabulary = std::move(lb.vocabulary);
  d.bags = std::move(lb.bags);
  return d;
}

std::vector<std::int32_t> vectorize_text(const std::string& text,
                                         const KeywordVocabulary& vocab) {
  std::vector<std::int32_t> counts(vocab.size(), 0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (auto j = vocab.index_of(token)) ++counts[*j];
    token.clear();
  };
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      token.push_back(static_cast<char>(std::tolower(ch)));
    } else {
      flush();
    }
  }
  flush();
  return counts;
}

UserBag prune_bag(const UserBag& bag) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < bag.size(); ++i) {
    if ((bag.counts.row(i).array() != 0).any()) keep.push_back(i);
  }
  if (keep.empty()) {
    UserBag out{bag.user_id, CountMatrix::Zero(bag.size() > 0 ? 1 : 0, bag.counts.cols()),
                bag.label};
    return out;
  }
  UserBag out{bag.user_id, CountMatrix(static_cast<Eigen::Index>(keep.size()), bag.counts.cols()),
              bag.label};
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.counts.row(static_cast<Eigen::Index>(r)) = bag.counts.row(keep[r]);
  }
  return out;
}

void write_reports_csv(std::ostream& os, const KeywordVocabulary& vocab,
                       const ReportSet& reports) {
  os << "report_id";
  for (const auto& kw : vocab.keywords()) os << ',' << kw;
  os << '\n';
  for (Eigen::Index i = 0; i < reports.size(); ++i) {
    os << 'r' << i;
    for (Eigen::Index j = 0; j < reports.counts.cols(); ++j) os << ',' << reports.counts(i, j);
    os << '\n';
  }
}

void write_tweets_csv(std::ostream& os, const KeywordVocabulary& vocab,
                      const std::vector<UserBag>& bags) {
  os << "user_id,tweet_id";
  for (const auto& kw : vocab.keywords()) os << ',' << kw;
  os << '\n';
  for (const UserBag& bag : bags) {
    for (Eigen::Index i = 0; i < bag.size(); ++i) {
      os << bag.user_id << ',' << bag.user_id << '_' << i;
      for (Eigen::Index j = 0; j < bag.counts.cols(); ++j) os << ',' << bag.counts(i, j);
      os << '\n';
    }
  }
}

void write_labels_csv(std::ostream& os, const std::vector<UserBag>& bags) {
  os << "user_id,label\n";
  for (const UserBag& bag : bags) os << bag.user_id << ',' << bag.label << '\n';
}

std::string model_to_json(const solver::Model& model) {
  // nlohmann writes doubles in shortest round-trip form (at most 17
  // significant digits), so beta reloads bit-exactly.
  json body{
      {"version", kModelFormatVersion},
      {"vocabulary", model.vocabulary.keywords()},
      {"beta", std::vector<double>(model.beta.beta.begin(), model.beta.beta.end())},
      {"hyperparams", HyperToJson(model.hyper)},
      {"trace_summary",
       {{"iterations", model.summary.iterations},
        {"converged", model.summary.converged},
        {"r_primal", model.summary.r_primal},
        {"s_dual", model.summary.s_dual},
        {"rho", model.summary.rho},
        {"objective", model.summary.objective}}}};
  body["checksum"] = Hex(Fnv1a(body.dump()));
  return body.dump(2) + "\n";
}

solver::Model model_from_json(const std::string& text) {
  json body;
  try {
    body = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!body.is_object()) throw FormatError("model file is not a JSON object");
    const int version = body.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model format version " + std::to_string(version) +
                        " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    const std::string checksum = body.at("checksum").get<std::string>();
    json unsigned_body = body;
    unsigned_body.erase("checksum");
    if (Hex(Fnv1a(unsigned_body.dump())) != checksum) {
      throw FormatError("model checksum mismatch");
    }
    solver::Model m;
    m.vocabulary = KeywordVocabulary(body.at("vocabulary").get<std::vector<std::string>>());
    const auto beta = body.at("beta").get<std::vector<double>>();
    if (beta.size() != m.vocabulary.size() + 1) {
      throw FormatError("beta has " + std::to_string(beta.size()) +
                        " entries for a vocabulary of " +
                        std::to_string(m.vocabulary.size()));
    }
    m.beta.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                                    static_cast<Eigen::Index>(beta.size()));
    m.hyper = HyperFromJson(body.at("hyperparams"));
    const json& ts = body.at("trace_summary");
    m.summary.iterations = ts.at("iterations").get<int>();
    m.summary.converged = ts.at("converged").get<bool>();
    m.summary.r_primal = ts.at("r_primal").get<double>();
    m.summary.s_dual = ts.at("s_dual").get<double>();
    m.summary.rho = ts.at("rho").get<double>();
    m.summary.objective = ts.at("objective").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("malformed model vocabulary: ") + e.what());
  }
}

void save_model(const solver::Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw ValidationError("failed writing " + path.string());
}

solver::Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace mida::io
