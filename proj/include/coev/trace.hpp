#pragma once

// Evaluation trace: one record per consumed fitness evaluation, in order.
// The best-so-far column makes checkpoint extraction trivial and lets two
// runs be compared byte-for-byte.

#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace coev {

struct TraceRecord {
  std::uint64_t ordinal;  // 1-based evaluation index
  int species;            // 1-based focal species; 0 = whole-system step
  double team_fitness;
  double best_so_far;
};

inline void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

class RunTrace {
 public:
  // Records an evaluation and returns its ordinal.
  std::uint64_t append(int species, double team_fitness) {
    if (team_fitness > best_) best_ = team_fitness;
    const std::uint64_t ordinal = records_.size() + 1;
    records_.push_back({ordinal, species, team_fitness, best_});
    return ordinal;
  }

  std::uint64_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  double best() const { return best_; }

  // Best fitness seen in the first `ordinal` evaluations.
  double best_at(std::uint64_t ordinal) const {
    if (ordinal == 0 || ordinal > records_.size()) {
      throw std::out_of_range("trace: checkpoint ordinal out of range");
    }
    return records_[static_cast<std::size_t>(ordinal - 1)].best_so_far;
  }

  const std::vector<TraceRecord>& records() const { return records_; }

  std::string to_csv() const {
    std::string out = "eval_ordinal,species,team_fitness,best_so_far\n";
    for (const auto& r : records_) {
      out += std::to_string(r.ordinal);
      out += ',';
      out += std::to_string(r.species);
      out += ',';
      append_double(out, r.team_fitness);
      out += ',';
      append_double(out, r.best_so_far);
      out += '\n';
    }
    return out;
  }

  void write_csv(std::ostream& os) const { os << to_csv(); }

 private:
  std::vector<TraceRecord> records_;
  double best_ = -std::numeric_limits<double>::infinity();
};

}  // namespace coev
