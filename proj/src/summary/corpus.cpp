#include <sstream>
#include <stdexcept>

#include "rfe/summary.h"
#include "rfe/util/csv.h"

namespace rfe::summary {

size_t Corpus::feature_index(std::string_view name) const {
  for (size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return i;
  }
  throw std::invalid_argument("corpus has no feature " + std::string(name));
}

void write_corpus_csv(std::ostream& out, const Corpus& corpus) {
  out << "run_id,scenario,label";
  for (const auto& n : corpus.feature_names) out << ',' << n;
  out << '\n';
  for (const auto& r : corpus.rows) {
    if (r.values.size() != corpus.feature_names.size()) {
      throw std::invalid_argument("corpus row " + r.run_id + " has the wrong width");
    }
    out << r.run_id << ',' << r.scenario << ',' << util::format_double(r.label);
    for (double v : r.values) out << ',' << util::format_double(v);
    out << '\n';
  }
}

void write_corpus_csv(const std::filesystem::path& path, const Corpus& corpus) {
  std::ostringstream ss;
  write_corpus_csv(ss, corpus);
  util::write_file(path, ss.str());
}

Corpus parse_corpus_csv(std::string_view text) {
  const auto t = util::parse_csv(text);
  if (t.header.size() < 3 || t.header[0] != "run_id" || t.header[1] != "scenario" ||
      t.header[2] != "label") {
    throw std::invalid_argument("corpus header must start with run_id,scenario,label");
  }
  Corpus c;
  c.feature_names.assign(t.header.begin() + 3, t.header.end());
  c.rows.reserve(t.rows.size());
  for (const auto& cells : t.rows) {
    CorpusRow r;
    r.run_id = cells[0];
    r.scenario = cells[1];
    r.label = util::parse_double(cells[2]);
    r.values.reserve(cells.size() - 3);
    for (size_t i = 3; i < cells.size(); ++i) r.values.push_back(util::parse_double(cells[i]));
    c.rows.push_back(std::move(r));
  }
  return c;
}

Corpus read_corpus_csv(const std::filesystem::path& path) {
  return parse_corpus_csv(util::read_file(path));
}

}  // namespace rfe::summary
