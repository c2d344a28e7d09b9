#include "slblr/gap.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <istream>
#include <sstream>

namespace slblr {

namespace {

class IntTokenStream {
 public:
  IntTokenStream(std::istream& in, bool strip_comments) : in_(in), strip_comments_(strip_comments) {}

  /// Pulls the next integer; throws ParseError naming the field on EOF or on
  /// a non-integer token.
  std::int64_t next(const char* field) {
    skip_separators();
    std::int64_t value = 0;
    if (!(in_ >> value)) throw ParseError(std::string("expected ") + field);
    return value;
  }

  void expect_count(Index count, const char* field) {
    pending_.clear();
    pending_.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
      skip_separators();
      std::int64_t value = 0;
      if (!(in_ >> value)) {
        std::ostringstream msg;
        msg << "expected " << count << " " << field << " entries";
        throw ParseError(msg.str());
      }
      pending_.push_back(value);
    }
  }

  const std::vector<std::int64_t>& pending() const { return pending_; }

  bool at_end() {
    skip_separators();
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  void skip_separators() {
    while (true) {
      const int c = in_.peek();
      if (c == std::char_traits<char>::eof()) return;
      if (std::isspace(c)) {
        in_.get();
        continue;
      }
      if (strip_comments_ && c == '#') {
        while (in_.peek() != std::char_traits<char>::eof() && in_.get() != '\n') {
        }
        continue;
      }
      return;
    }
  }

  std::istream& in_;
  bool strip_comments_;
  std::vector<std::int64_t> pending_;
};

void check_nonnegative(std::int64_t value, const char* field) {
  if (value < 0) {
    std::ostringstream msg;
    msg << "negative " << field << " entry: " << value;
    throw ValidationError(msg.str());
  }
}

}  // namespace

void GapInstance::validate() const {
  if (machines < 1 || jobs < 1) throw ValidationError("instance needs at least one machine and job");
  if (cost.rows() != jobs || cost.cols() != machines) throw ValidationError("cost matrix dimension mismatch");
  if (resource.rows() != jobs || resource.cols() != machines)
    throw ValidationError("resource matrix dimension mismatch");
  if (capacity.size() != machines) throw ValidationError("capacity vector dimension mismatch");
  if ((cost.array() < 0).any()) throw ValidationError("negative cost entry");
  if ((resource.array() < 0).any()) throw ValidationError("negative resource entry");
  if ((capacity.array() < 0).any()) throw ValidationError("negative capacity entry");
  for (Index i = 0; i < jobs; ++i) {
    bool hostable = false;
    for (Index j = 0; j < machines && !hostable; ++j) hostable = resource(i, j) <= capacity[j];
    if (!hostable) {
      std::ostringstream msg;
      msg << "job " << i << " fits no machine";
      throw ValidationError(msg.str());
    }
  }
}

std::int64_t GapInstance::assignment_cost(const std::vector<int>& assignment) const {
  std::int64_t total = 0;
  for (Index i = 0; i < jobs; ++i) total += cost(i, assignment[static_cast<std::size_t>(i)]);
  return total;
}

bool GapInstance::assignment_fits(const std::vector<int>& assignment) const {
  IntVector load = IntVector::Zero(machines);
  for (Index i = 0; i < jobs; ++i) load[assignment[static_cast<std::size_t>(i)]] += resource(i, assignment[static_cast<std::size_t>(i)]);
  return (load.array() <= capacity.array()).all();
}

std::vector<GapInstance> parse_orlib_gap(std::istream& in, const OrlibParseOptions& options) {
  IntTokenStream tokens(in, !options.strict);
  const std::int64_t problem_count = tokens.next("problem count");
  if (problem_count < 0) throw ValidationError("negative problem count");

  std::vector<GapInstance> instances;
  instances.reserve(static_cast<std::size_t>(problem_count));
  for (std::int64_t p = 0; p < problem_count; ++p) {
    GapInstance inst;
    inst.machines = tokens.next("machine count");
    inst.jobs = tokens.next("job count");
    if (inst.machines < 1 || inst.jobs < 1) throw ValidationError("nonpositive dimension");

    const Index cells = inst.machines * inst.jobs;
    inst.cost.resize(inst.jobs, inst.machines);
    inst.resource.resize(inst.jobs, inst.machines);
    inst.capacity.resize(inst.machines);

    // File order is machine-major; storage is job-major.
    tokens.expect_count(cells, "cost");
    for (Index j = 0; j < inst.machines; ++j)
      for (Index i = 0; i < inst.jobs; ++i) {
        const std::int64_t v = tokens.pending()[static_cast<std::size_t>(j * inst.jobs + i)];
        check_nonnegative(v, "cost");
        inst.cost(i, j) = v;
      }
    tokens.expect_count(cells, "resource");
    for (Index j = 0; j < inst.machines; ++j)
      for (Index i = 0; i < inst.jobs; ++i) {
        const std::int64_t v = tokens.pending()[static_cast<std::size_t>(j * inst.jobs + i)];
        check_nonnegative(v, "resource");
        inst.resource(i, j) = v;
      }
    tokens.expect_count(inst.machines, "capacity");
    for (Index j = 0; j < inst.machines; ++j) {
      const std::int64_t v = tokens.pending()[static_cast<std::size_t>(j)];
      check_nonnegative(v, "capacity");
      inst.capacity[j] = v;
    }
    inst.validate();
    instances.push_back(std::move(inst));
  }

  if (options.strict && !tokens.at_end())
    throw ParseError("trailing content after declared problems");
  return instances;
}

std::vector<GapInstance> parse_orlib_gap(const std::string& text, const OrlibParseOptions& options) {
  std::istringstream in(text);
  return parse_orlib_gap(in, options);
}

std::string serialize_orlib_gap(const std::vector<GapInstance>& instances) {
  std::ostringstream out;
  out << instances.size() << "\n";
  for (const auto& inst : instances) {
    out << inst.machines << " " << inst.jobs << "\n";
    for (Index j = 0; j < inst.machines; ++j) {
      for (Index i = 0; i < inst.jobs; ++i) out << inst.cost(i, j) << (i + 1 == inst.jobs ? "" : " ");
      out << "\n";
    }
    for (Index j = 0; j < inst.machines; ++j) {
      for (Index i = 0; i < inst.jobs; ++i) out << inst.resource(i, j) << (i + 1 == inst.jobs ? "" : " ");
      out << "\n";
    }
    for (Index j = 0; j < inst.machines; ++j) out << inst.capacity[j] << (j + 1 == inst.machines ? "" : " ");
    out << "\n";
  }
  return out.str();
}

SeparableProblem gap_to_separable(const GapInstance& instance) {
  instance.validate();
  const Index machines = instance.machines;
  const Index jobs = instance.jobs;
  const Index n = machines * jobs;

  Vector objective(n);
  std::vector<VariableBounds> bounds(static_cast<std::size_t>(n), VariableBounds{0, 1});
  std::vector<SubproblemShape> subs(static_cast<std::size_t>(machines));
  for (Index j = 0; j < machines; ++j) {
    auto& sub = subs[static_cast<std::size_t>(j)];
    sub.offset = j * jobs;
    sub.count = jobs;
    LocalRow capacity_row;
    capacity_row.coefficients = instance.resource.col(j).cast<double>();
    capacity_row.rhs = static_cast<double>(instance.capacity[j]);
    sub.local_rows.push_back(std::move(capacity_row));
    objective.segment(sub.offset, jobs) = instance.cost.col(j).cast<double>();
  }

  // Assignment equalities oriented as 1 - sum_j x_ij = 0: the priced item
  // cost on machine j becomes cost(i, j) - lambda_i and optimal multipliers
  // sit near the per-job cost scale.
  SparseRowMatrix coupling(jobs, n);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < jobs; ++i)
    for (Index j = 0; j < machines; ++j) entries.emplace_back(i, j * jobs + i, -1.0);
  coupling.setFromTriplets(entries.begin(), entries.end());

  return SeparableProblem(std::move(objective), std::move(bounds), std::move(subs),
                          std::move(coupling), Vector::Constant(jobs, -1.0),
                          std::vector<RowSense>(static_cast<std::size_t>(jobs), RowSense::Equality));
}

GapInstance make_type_d_gap(Index machines, Index jobs, std::uint64_t seed) {
  SplitMix64 rng(seed);
  GapInstance inst;
  inst.machines = machines;
  inst.jobs = jobs;
  inst.cost.resize(jobs, machines);
  inst.resource.resize(jobs, machines);
  inst.capacity.resize(machines);
  for (Index i = 0; i < jobs; ++i)
    for (Index j = 0; j < machines; ++j) {
      const std::int64_t a = rng.uniform_int(1, 100);
      inst.resource(i, j) = a;
      inst.cost(i, j) = std::max<std::int64_t>(0, 111 - a + rng.uniform_int(-10, 10));
    }
  for (Index j = 0; j < machines; ++j) {
    const std::int64_t column_sum = inst.resource.col(j).sum();
    inst.capacity[j] = (8 * column_sum) / (10 * machines);
  }
  inst.validate();
  return inst;
}

GapInstance make_random_feasible_gap(Index machines, Index jobs, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    SplitMix64 rng(seed * 0x9e3779b9ULL + attempt + 1);
    GapInstance inst;
    inst.machines = machines;
    inst.jobs = jobs;
    inst.cost.resize(jobs, machines);
    inst.resource.resize(jobs, machines);
    inst.capacity.resize(machines);
    for (Index i = 0; i < jobs; ++i)
      for (Index j = 0; j < machines; ++j) {
        inst.resource(i, j) = rng.uniform_int(5, 25);
        inst.cost(i, j) = rng.uniform_int(10, 50);
      }
    for (Index j = 0; j < machines; ++j)
      inst.capacity[j] = (8 * inst.resource.col(j).sum()) / (10 * machines);

    // Feasibility probe: depth-first over jobs with capacity pruning.
    std::vector<std::int64_t> slack(static_cast<std::size_t>(machines));
    for (Index j = 0; j < machines; ++j) slack[static_cast<std::size_t>(j)] = inst.capacity[j];
    std::function<bool(Index)> place = [&](Index job) {
      if (job == jobs) return true;
      for (Index j = 0; j < machines; ++j) {
        if (inst.resource(job, j) <= slack[static_cast<std::size_t>(j)]) {
          slack[static_cast<std::size_t>(j)] -= inst.resource(job, j);
          if (place(job + 1)) return true;
          slack[static_cast<std::size_t>(j)] += inst.resource(job, j);
        }
      }
      return false;
    };
    bool invalid = false;
    try {
      inst.validate();
    } catch (const ValidationError&) {
      invalid = true;
    }
    if (!invalid && place(0)) return inst;
  }
}

}  // namespace slblr
