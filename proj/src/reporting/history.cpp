#include "numta/reporting/history.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "numta/core/errors.hpp"
#include "numta/datasetio/csv.hpp"

namespace numta {

void write_history_csv(const std::filesystem::path& path, const EpochHistory& h) {
  h.validate();
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "epoch,train_loss,train_acc,test_loss,test_acc\n";
  char buf[160];
  for (std::size_t i = 0; i < h.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i + 1, h.train_loss[i], h.train_accuracy[i],
                  h.test_loss[i], h.test_accuracy[i]);
    os << buf;
  }
  if (!os) throw IoError("failed writing " + path.string());
}

EpochHistory read_history_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::string> row;
  if (!csv::read_row(is, row) ||
      row != std::vector<std::string>{"epoch", "train_loss", "train_acc", "test_loss", "test_acc"})
    throw DataError(path.string() + ": unexpected history header");
  EpochHistory h;
  std::size_t line = 1;
  while (csv::read_row(is, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 5) throw DataError(path.string() + ":" + std::to_string(line) + ": expected five cells");
    double v[5];
    for (int c = 0; c < 5; ++c) {
      const auto& s = row[c];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[c]);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
    if (v[0] != static_cast<double>(h.size() + 1))
      throw DataError(path.string() + ":" + std::to_string(line) + ": epochs must count up from 1");
    h.train_loss.push_back(v[1]);
    h.train_accuracy.push_back(v[2]);
    h.test_loss.push_back(v[3]);
    h.test_accuracy.push_back(v[4]);
  }
  h.validate();
  return h;
}

}  // namespace numta
