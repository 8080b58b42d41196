#ifndef ADHINT_CORPUS_IO_HPP_
#define ADHINT_CORPUS_IO_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adhint/errors.hpp"
#include "adhint/task_world.hpp"

namespace adhint {

inline constexpr const char* kCorpusSchema = "v1";

inline nlohmann::json to_json(const HintCorpusEntry& e) {
  nlohmann::json j;
  j["v"] = kCorpusSchema;
  j["family"] = std::string(to_string(e.task.family));
  j["split"] = std::string(to_string(e.task.split));
  j["query"] = e.task.query;
  j["answer"] = e.task.answer;
  j["trajectory"] = e.teacher_trajectory;
  return j;
}

namespace detail {

inline HintCorpusEntry entry_from_json(const nlohmann::json& j, const Vocab& vocab) {
  if (!j.is_object()) throw std::runtime_error("record is not an object");
  if (j.at("v").get<std::string>() != kCorpusSchema)
    throw std::runtime_error("unsupported schema version");
  HintCorpusEntry e;
  e.task.family = parse_family(j.at("family").get<std::string>());
  e.task.split = parse_split(j.at("split").get<std::string>());
  e.task.query = j.at("query").get<TokenSeq>();
  e.task.answer = j.at("answer").get<TokenSeq>();
  e.task.length = static_cast<int>(e.task.query.size());
  e.teacher_trajectory = j.at("trajectory").get<TokenSeq>();
  e.teacher_len = static_cast<int>(e.teacher_trajectory.size());
  for (Token t : e.task.query)
    if (!vocab.is_symbol(t)) throw std::runtime_error("query token outside payload alphabet");
  for (Token t : e.teacher_trajectory)
    if (!vocab.contains(t)) throw std::runtime_error("trajectory token outside vocabulary");
  if (e.task.length < 2) throw std::runtime_error("query shorter than 2 symbols");
  if (derive_answer(e.task.family, e.task.query, vocab) != e.task.answer)
    throw std::runtime_error("answer does not match query");
  if (verify(e.task, e.teacher_trajectory).total != 1.0)
    throw std::runtime_error("trajectory does not verify");
  return e;
}

}  // namespace detail

inline void write_corpus(const std::filesystem::path& path, const std::vector<HintCorpusEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open corpus for writing: " + path.string());
  for (const auto& e : entries) out << to_json(e).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<HintCorpusEntry> read_corpus(const std::filesystem::path& path,
                                                const Vocab& vocab = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus: " + path.string());
  std::vector<HintCorpusEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      entries.push_back(detail::entry_from_json(nlohmann::json::parse(line), vocab));
    } catch (const std::exception& ex) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return entries;
}

}  // namespace adhint

#endif  // ADHINT_CORPUS_IO_HPP_
